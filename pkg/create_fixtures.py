#!/usr/bin/env python3
"""
Create sample designs and HHPDA pairs for trying out hotcache
"""

import json
import os

from hotcache import designs, hhpda


def write_mutated_pair(pair, filename):
    """Write a copy of ``pair`` with one mirror star removed; verify must reject it."""
    data = json.loads(hhpda.pair_json(pair))
    data["Q0"][0][0] = None
    with open(filename, "w", encoding="utf-8") as handle:
        json.dump(data, handle, indent=2)
    print(f"Created: {filename} (Q0 cell (1,1) cleared)")


def main():
    output_dir = os.path.join(os.path.dirname(__file__), "sample_fixtures")
    os.makedirs(output_dir, exist_ok=True)

    # (v, k, t) of complete designs small enough to verify exhaustively
    complete = [(6, 4, 3), (7, 5, 4)]
    for v, k, t in complete:
        d = designs.complete_design(v, k, t)
        filename = os.path.join(output_dir, f"complete-{t}-{v}-{k}.json")
        designs.store_design(d, filename)
        print(f"Created: {filename} ({d.label()}, {d.b} blocks)")

    builds = [
        ("ex2-3-8-4-1", 2, (1, 2)),
        ("ex2-3-8-4-1", 1, (1, 2)),
        (os.path.join(output_dir, "complete-3-6-4.json"), 2, (1, 3)),
    ]
    for source, k2, a in builds:
        d = designs.load_design(source)
        pair = hhpda.build_from_design(d, k2, a, design_id=os.path.basename(source))
        name = os.path.splitext(os.path.basename(source))[0]
        filename = os.path.join(output_dir, f"pair-{name}-k2{k2}.json")
        hhpda.store_pair(pair, filename)
        print(f"Created: {filename} {pair.header()}")

    write_mutated_pair(hhpda.example_pair(), os.path.join(output_dir, "pair-broken.json"))

    print(f"\n✓ Fixtures written to {output_dir}/")
    print("Run: python -m hotcache hhpda verify sample_fixtures/pair-ex2-3-8-4-1-k22.json")


if __name__ == "__main__":
    main()
