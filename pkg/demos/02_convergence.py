"""Convergence table for the manufactured square problem.

Solves on a nested mesh family and prints the energy-distance errors
with observed orders. Equivalent CLI call:

    galbrun-hdg convergence --k 2 --levels 4 --out conv.csv
"""

from galbrunhdg.experiments import RunConfig, run_convergence

for method, k in (("full", 1), ("full", 2), ("reduced", 2)):
    cfg = RunConfig(
        "convergence", method=method, k=k, levels=4
    ).validate()
    rows = run_convergence(cfg)
    print(f"\nmethod={method} k={k}")
    print(f"{'L':>2} {'ndofs':>8} {'error':>12} {'eoc':>6}")
    for r in rows:
        rate = "" if r.eoc is None else f"{r.eoc:.2f}"
        print(f"{r.L:>2} {r.ndofs:>8} {r.wxerror:>12.4e} {rate:>6}")
