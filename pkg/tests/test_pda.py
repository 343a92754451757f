import pytest
from hypothesis import given, settings, strategies as st

from hotcache.errors import ParameterError
from hotcache.hhpda import check_zeta, projected_cell, projection_array
from hotcache.pda import (
    STAR,
    PdaArray,
    b_array_params,
    b_row_index,
    build_b_array,
    find_row_assignment,
    load_array,
    store_array,
    to_grid,
    verify_hppda,
    verify_pda,
)

S = STAR

EXAMPLE_B = [
    [S, S, 1],
    [S, 1, S],
    [1, S, S],
    [S, S, 2],
    [S, 2, S],
    [2, S, S],
    [S, 3, 4],
    [3, S, 5],
    [4, 5, S],
]


def test_inner_array_matches_example():
    b = build_b_array(3, (1, 2))
    assert b.to_list() == EXAMPLE_B


def test_inner_array_rows_and_params():
    rows = b_row_index(3, (1, 2))
    assert rows[:4] == [(frozenset({1, 2}), 1), (frozenset({1, 3}), 1), (frozenset({2, 3}), 1), (frozenset({1, 2}), 2)]
    assert rows[-3:] == [(frozenset({1}), 1), (frozenset({2}), 1), (frozenset({3}), 1)]
    assert b_array_params(3, (1, 2)) == {"Kprime": 3, "Fprime": 9, "Zprime": 5, "S": 5}


@pytest.mark.parametrize("t, a", [(3, (1,)), (3, (-1, 2)), (3, (0, 0))])
def test_inner_array_rejects_bad_multiplicities(t, a):
    with pytest.raises(ParameterError):
        b_row_index(t, a)


@pytest.mark.parametrize("t, a", [(2, (4,)), (3, (2, 1)), (4, (1, 0, 2))])
def test_built_inner_arrays_are_pdas(t, a):
    b = build_b_array(t, a)
    verdict = verify_pda(b)
    assert verdict.ok
    params = b_array_params(t, a)
    assert (b.rows, b.cols) == (params["Fprime"], params["Kprime"])
    assert verdict.params["Z"] == params["Zprime"]
    assert verdict.params["S"] == params["S"]


def test_example_b_is_a_pda():
    verdict = verify_pda(PdaArray(to_grid(EXAMPLE_B)), claimed_labels=range(1, 6))
    assert verdict.ok
    assert verdict.params == {"K": 3, "F": 9, "Z": 5, "S": 5}


def test_every_single_cell_mutation_of_b_fails():
    for i in range(9):
        for j in range(3):
            grid = [list(row) for row in EXAMPLE_B]
            grid[i][j] = 99 if grid[i][j] == S else S
            verdict = verify_pda(PdaArray(to_grid(grid)), claimed_labels=range(1, 6))
            assert not verdict.ok, (i, j)
            assert set(verdict.codes()) <= {"C1", "C2", "C3"}
            assert all(v.location for v in verdict.violations)


def test_label_swap_violates_c3():
    grid = [list(row) for row in EXAMPLE_B]
    grid[6][1] = 4
    verdict = verify_pda(PdaArray(to_grid(grid)))
    assert "C3" in verdict.codes()


def test_undeclared_and_missing_labels():
    verdict = verify_pda(PdaArray(to_grid(EXAMPLE_B)), claimed_labels=range(1, 7))
    assert verdict.codes() == ["C2"]
    assert verdict.violations[0].location == "label 6"


def test_bad_cells():
    verdict = verify_pda(PdaArray(to_grid([[S, 0], ["x", S]])))
    assert verdict.codes() == ["cell"]


def test_projection_pair_is_an_hppda(example_pair):
    p = projection_array(example_pair)
    assert len(p) == 14 and len(p[0]) == 8
    verdict = verify_hppda(p, example_pair.B)
    assert verdict.ok
    assert verdict.params["Z"] == 7
    assert verdict.params["Zprime"] == 5
    assert verdict.params["tau_scanned"] == 56


def test_hppda_star_count_mismatch(example_pair):
    p = [list(row) for row in projection_array(example_pair)]
    p[0][0] = None
    verdict = verify_hppda(p, example_pair.B)
    assert "P-stars" in verdict.codes()


def test_hppda_needs_enough_columns(example_pair):
    with pytest.raises(ParameterError):
        verify_hppda([[S, None], [None, S]], example_pair.B)


def test_matching_infeasible_host():
    b = PdaArray(to_grid(EXAMPLE_B))
    assert find_row_assignment([[None, None, None]] * 12, b) is None


@settings(max_examples=40, deadline=None)
@given(st.permutations(list(range(14))))
def test_matching_ignores_host_row_order(example_pair, worked_tau, order):
    full = [[projected_cell(example_pair, f, user) for user in worked_tau] for f in range(14)]
    baseline = find_row_assignment(full, example_pair.B, host_rows=range(1, 15))
    assert baseline == [1, 2, 12, 7, 4, 13, 3, 8, 10]
    host = [full[f] for f in order]
    zeta = find_row_assignment(host, example_pair.B, host_rows=[f + 1 for f in order])
    assert zeta == baseline
    assert check_zeta(example_pair, zeta, worked_tau).ok


def test_matching_prefers_lower_keys(example_pair, worked_tau):
    full = [[projected_cell(example_pair, f, user) for user in worked_tau] for f in range(14)]
    zeta = find_row_assignment(full, example_pair.B, host_rows=range(1, 15), preference=lambda r, f: -f)
    assert zeta == [1, 2, 12, 7, 4, 13, 5, 9, 14]


def test_array_file_round_trip(tmp_path):
    b = build_b_array(3, (1, 2))
    path = tmp_path / "b.json"
    store_array(b, path)
    assert load_array(path) == b
