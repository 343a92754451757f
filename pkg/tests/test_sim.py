import dataclasses
import logging
from fractions import Fraction

import pytest

from hotcache import designs, sim
from hotcache.errors import ParameterError, ProtocolViolation, ShapeError, UndecodableError
from hotcache.hhpda import Strategy
from hotcache.schema import SessionReportFile
from hotcache.sim import (
    Library,
    Transmission,
    make_library,
    mirror_transmissions,
    open_session,
    place,
    plan_sweep,
    recover_packets,
    resolve_threads,
    run_session,
    server_transmissions,
    session_report,
    sweep,
    theoretical_loads,
    user_decode,
)
from hotcache.gf import xor_packets

WORKED_ZETA = (1, 2, 12, 7, 4, 13, 3, 8, 14)


@pytest.fixture
def session(example_pair, worked_tau):
    return open_session(example_pair, worked_tau, [1, 2, 3])


@pytest.fixture
def caches(example_pair, small_library):
    return place(example_pair, small_library)


def test_placement_follows_star_positions(example_pair, caches):
    assert [caches.mirror_rows(k1) for k1 in range(1, 5)] == [[1, 2, 3], [1, 8, 13], [2, 13, 14], [3, 8, 14]]
    assert caches.user_rows((2, 1)) == [4, 5, 10, 11]
    assert caches.user_rows((1, 1)) == [4, 5, 6, 7]
    assert caches.packet_bytes == 16
    for k1 in range(1, 5):
        assert len(caches.mirrors[k1]) == 4 * example_pair.Z1
    for user in example_pair.users():
        assert len(caches.users[user]) == 4 * example_pair.Z2


def test_placement_needs_divisible_files(example_pair):
    with pytest.raises(ShapeError):
        place(example_pair, Library((bytes(10), bytes(10))))


def test_library_validation():
    with pytest.raises(ParameterError):
        Library(())
    with pytest.raises(ShapeError):
        Library((b"ab", b"abc"))
    with pytest.raises(ParameterError):
        make_library(0, 9, 4)
    with pytest.raises(ParameterError):
        make_library(2, 9, 0)
    lib = make_library(3, 9, 4, seed=5)
    assert lib.N == 3 and lib.file_bytes == 36
    assert lib == make_library(3, 9, 4, seed=5)
    with pytest.raises(ParameterError):
        lib.file(4)


def test_session_state(session):
    assert session.tau == ((1, 1), (2, 2), (3, 1))
    assert session.zeta == WORKED_ZETA
    assert session.phi == {(1, 1): 1, (2, 2): 2, (3, 1): 3}
    assert session.column_labels((1, 1)) == {1, 2, 3, 4}
    assert session.column_labels((2, 2)) == {1, 2, 3, 5}
    assert session.column_labels((3, 1)) == {1, 2, 4, 5}
    assert session.active_under(4) == []


def test_demands_follow_the_given_order(example_pair):
    state = open_session(example_pair, [(3, 1), (1, 1), (2, 2)], [3, 1, 2])
    assert state.demands == (1, 2, 3)


def test_session_preconditions(example_pair, worked_tau):
    with pytest.raises(ParameterError):
        open_session(example_pair, worked_tau[:2], [1, 2])
    with pytest.raises(ParameterError):
        open_session(example_pair, worked_tau, [1, 2])
    with pytest.raises(ParameterError):
        open_session(example_pair, worked_tau, [1, 2, 5], n_files=4)
    with pytest.raises(ParameterError):
        open_session(example_pair, worked_tau, [0, 1, 2])


def test_server_messages(example_pair, session, caches):
    msgs = server_transmissions(example_pair, session, caches)
    assert [m.label for m in msgs] == [1, 2, 3, 4, 5]
    assert all(m.sender is None for m in msgs)
    assert msgs[0].terms == ((1, 12), (2, 2), (3, 1))
    assert msgs[2].terms == ((1, 8), (2, 3))
    assert msgs[0].payload == xor_packets(caches.packet((1, 12)), caches.packet((2, 2)), caches.packet((3, 1)))


def test_identical_demands_only_touch_one_file(example_pair, worked_tau, caches):
    state = open_session(example_pair, worked_tau, [1, 1, 1])
    for msg in server_transmissions(example_pair, state, caches):
        assert {n for n, _ in msg.terms} == {1}


def test_mirror_messages(example_pair, session, caches):
    server = server_transmissions(example_pair, session, caches)
    first = mirror_transmissions(example_pair, session, caches, 1, server)
    forwarded = [m for m in first if m.phase == sim.PHASE_FORWARD]
    local = [m for m in first if m.phase == sim.PHASE_LOCAL]
    assert [m.label for m in forwarded] == [1, 2, 3, 4]
    assert forwarded[0].terms == ((1, 12),)
    assert forwarded[0].payload == caches.packet((1, 12))
    assert [m.label for m in local] == [6, 8, 10]
    assert [m.terms for m in local] == [((1, 1),), ((1, 2),), ((1, 3),)]

    second = mirror_transmissions(example_pair, session, caches, 2, server)
    local = [m for m in second if m.phase == sim.PHASE_LOCAL]
    assert [m.label for m in local] == [13, 15, 17]
    assert [m.terms for m in local] == [((2, 1),), ((2, 8),), ((2, 13),)]
    assert [m.payload for m in local] == [caches.packet((2, 1)), caches.packet((2, 8)), caches.packet((2, 13))]

    third = mirror_transmissions(example_pair, session, caches, 3, server)
    assert [m.label for m in third if m.phase == sim.PHASE_LOCAL] == [18, 20, 22]
    assert mirror_transmissions(example_pair, session, caches, 4, server) == []


def test_user_recovers_nine_distinct_packets(example_pair, session, caches, small_library):
    server = server_transmissions(example_pair, session, caches)
    received = mirror_transmissions(example_pair, session, caches, 1, server)
    recovered = recover_packets(example_pair, session, (1, 1), caches.users[(1, 1)], received)
    assert set(recovered) == {12, 13, 8, 14, 1, 2, 3}
    cached_in_zeta = set(caches.user_rows((1, 1))) & set(session.zeta)
    assert cached_in_zeta == {4, 7}
    assert len(set(recovered) | cached_in_zeta) == 9
    data = user_decode(example_pair, session, (1, 1), caches.users[(1, 1)], received, caches.generator)
    assert data == small_library.file(1)


def test_decode_rejects_inactive_users(example_pair, session, caches):
    with pytest.raises(ParameterError):
        user_decode(example_pair, session, (4, 1), caches.users[(4, 1)], [])


def test_uncleaned_messages_violate_the_single_unknown_rule(example_pair, session, caches):
    server = server_transmissions(example_pair, session, caches)
    raw = [Transmission(1, sim.PHASE_FORWARD, m.label, m.payload, m.terms) for m in server]
    with pytest.raises(ProtocolViolation):
        user_decode(example_pair, session, (1, 1), caches.users[(1, 1)], raw)


def test_missing_forwarded_messages_leave_user_short(example_pair, session, caches):
    server = server_transmissions(example_pair, session, caches)
    received = mirror_transmissions(example_pair, session, caches, 1, server)
    local_only = [m for m in received if m.phase == sim.PHASE_LOCAL]
    with pytest.raises(UndecodableError):
        user_decode(example_pair, session, (1, 1), caches.users[(1, 1)], local_only)


def test_theoretical_loads(example_pair, session):
    loads = theoretical_loads(example_pair, session)
    assert loads.R1 == Fraction(5, 9)
    assert loads.R2 == Fraction(7, 9)
    assert loads.r2 == {1: Fraction(7, 9), 2: Fraction(7, 9), 3: Fraction(7, 9), 4: Fraction(0)}
    assert loads.phase_a == {1: 4, 2: 4, 3: 4, 4: 0}
    assert loads.phase_b == {1: 3, 2: 3, 3: 3, 4: 0}


def test_theoretical_loads_do_not_read_the_filled_rows(example_pair, session):
    blank = dataclasses.replace(session, qbar=tuple((None,) * 3 for _ in session.qbar))
    assert theoretical_loads(example_pair, blank) == theoretical_loads(example_pair, session)


def test_dropped_local_message_breaks_the_load_match(example_pair, session, caches, small_library):
    server = server_transmissions(example_pair, session, caches)
    mirror_msgs = {
        k1: mirror_transmissions(example_pair, session, caches, k1, server)
        for k1 in range(1, example_pair.K1 + 1)
    }
    assert session_report(example_pair, small_library, session, caches, server, mirror_msgs).ok

    mirror_msgs[1] = [m for m in mirror_msgs[1] if not (m.phase == sim.PHASE_LOCAL and m.label == 6)]
    report = session_report(example_pair, small_library, session, caches, server, mirror_msgs)
    assert not report.loads_match
    assert not report.ok
    counts = {m.k1: (m.phase_b, m.theory_phase_b) for m in report.mirrors}
    assert counts[1] == (2, 3)
    assert report.decode_ok[(1, 1)] is False
    assert report.decode_ok[(2, 2)] is True


def test_worked_session(example_pair, worked_tau):
    lib = make_library(3, example_pair.Fprime, 64, seed=0)
    report = run_session(example_pair, lib, worked_tau, [1, 2, 3])
    assert report.ok
    assert report.zeta == WORKED_ZETA
    assert report.R1_measured == report.R1_theory == Fraction(5, 9)
    assert report.R2_measured == report.R2_theory == Fraction(7, 9)
    assert report.decode_ok == {(1, 1): True, (2, 2): True, (3, 1): True}
    assert report.packets_server == 5
    assert report.packets_mirrors == 21
    assert report.bytes_server == 5 * 64


def test_avoid_strategy_still_decodes(example_pair, worked_tau, small_library):
    report = run_session(example_pair, small_library, worked_tau, [1, 2, 3], Strategy.AVOID_MIRROR_STAR)
    assert report.ok
    assert report.zeta == (1, 2, 12, 7, 4, 13, 5, 9, 10)
    assert report.strategy == "avoid-mirror-star"


def test_repeated_demands_decode_identically(example_pair, worked_tau, small_library):
    report = run_session(example_pair, small_library, worked_tau, [2, 2, 2])
    assert report.ok


def test_users_on_two_mirrors(example_pair, small_library):
    report = run_session(example_pair, small_library, [(1, 1), (1, 2), (2, 1)], [1, 2, 3])
    assert report.ok
    assert report.r2_per_mirror[3] == report.r2_per_mirror[4] == 0
    assert report.R2_measured == max(report.r2_per_mirror[1], report.r2_per_mirror[2])


def test_mirrorless_pair_session(example_pair, worked_tau, small_library):
    from test_hhpda import _mirrorless_pair

    pair = _mirrorless_pair(example_pair)
    report = run_session(pair, small_library, worked_tau, [1, 2, 3])
    assert report.ok
    assert all(m.phase_b == 0 for m in report.mirrors)


def test_report_dict_validates_and_reloads(example_pair, worked_tau, small_library, tmp_path):
    report = run_session(example_pair, small_library, worked_tau, [1, 2, 3])
    data = report.to_dict()
    assert data["R1_measured"] == "5/9"
    assert data["loads_float"]["R2_measured"] == pytest.approx(7 / 9)
    assert data["decode_ok"] == {"(1,1)": True, "(2,2)": True, "(3,1)": True}
    path = tmp_path / "report.json"
    path.write_text(SessionReportFile.model_validate(data).model_dump_json())
    assert sim.load_report(path).to_dict() == data


@pytest.mark.parametrize("strategy", [Strategy.PREFER_MIRROR_STAR, Strategy.AVOID_MIRROR_STAR])
def test_exhaustive_sweep(example_pair, strategy):
    lib = make_library(4, example_pair.Fprime, 64, seed=0)
    reports = sweep(example_pair, lib, per_tau=3, strategy=strategy, seed=0, threads=1, progress=False)
    assert len(reports) == 56 * 3
    for report in reports:
        assert all(report.decode_ok.values()), report.failures
        assert report.R1_measured == Fraction(5, 9)
        assert report.loads_match
    taus = [report.tau for report in reports[::3]]
    assert taus == sorted(taus)


def test_local_share_bounded_by_lambda_k2(built_pair, design_381):
    bound = designs.lambda_s(design_381, 2)
    for tau in sim.active_sets(built_pair):
        state = open_session(built_pair, tau, [1, 1, 1])
        loads = theoretical_loads(built_pair, state)
        for k1, count in loads.phase_b.items():
            assert count <= bound * len(state.active_under(k1))


def test_fixed_and_random_policies_agree(example_pair, small_library):
    fixed = sweep(example_pair, small_library, taus=8, policy="fixed", seed=3, threads=1, progress=False)
    random_ = sweep(example_pair, small_library, taus=8, policy="random", seed=3, threads=1, progress=False)
    assert [r.tau for r in fixed] == [r.tau for r in random_]
    assert all(r.demands == (1, 1, 1) for r in fixed)
    assert [all(r.decode_ok.values()) for r in fixed] == [all(r.decode_ok.values()) for r in random_]


def test_sample_zero_is_empty(example_pair, small_library):
    assert sweep(example_pair, small_library, taus=0) == []


def test_sweep_is_independent_of_parallelism(example_pair, small_library):
    one = sweep(example_pair, small_library, taus=6, per_tau=2, seed=9, threads=1, progress=False)
    many = sweep(example_pair, small_library, taus=6, per_tau=2, seed=9, threads=3, progress=False)
    assert [r.to_dict() for r in one] == [r.to_dict() for r in many]


def test_plan_seeds_and_demands(example_pair):
    tasks = plan_sweep(example_pair, 4, seed=5, per_tau=2)
    assert len(tasks) == 112
    for task in tasks:
        assert task.seed == 5 ^ task.rank
        assert all(1 <= n <= 4 for n in task.demands)
    assert tasks == plan_sweep(example_pair, 4, seed=5, per_tau=2)
    with pytest.raises(ParameterError):
        plan_sweep(example_pair, 4, policy="fixed", fixed_demands=[1, 2])
    with pytest.raises(ParameterError):
        plan_sweep(example_pair, 4, policy="zipf")
    with pytest.raises(ParameterError):
        plan_sweep(example_pair, 4, taus=-1)


def test_thread_setting(monkeypatch, caplog):
    monkeypatch.setenv(sim.THREADS_ENV, "3")
    assert resolve_threads() == 3
    monkeypatch.setenv(sim.THREADS_ENV, "lots")
    with caplog.at_level(logging.WARNING, logger="hotcache.sim"):
        assert resolve_threads() == 1
    assert "running sequentially" in caplog.text
    monkeypatch.delenv(sim.THREADS_ENV)
    assert 1 <= resolve_threads() <= 4


def test_session_on_rows_reordered_after_construction(built_pair, worked_tau):
    def swap(grid):
        rows = list(grid)
        rows[2], rows[3] = rows[3], rows[2]
        return tuple(rows)

    reordered = dataclasses.replace(
        built_pair, Q0=swap(built_pair.Q0), Qsub=tuple(swap(grid) for grid in built_pair.Qsub)
    )
    lib = make_library(3, reordered.Fprime, 16, seed=1)
    report = run_session(reordered, lib, worked_tau, [1, 2, 3])
    assert report.ok
    assert report.decode_ok == {(1, 1): True, (2, 2): True, (3, 1): True}
