"""Discretization error against the energy-norm best approximation for
increasing background Mach numbers.

The ratio of the two columns measures how far the solver sits from the
best the discrete space can do. Equivalent CLI call:

    galbrun-hdg mach --k 2 --levels 3 --out mach.csv --check
"""

from galbrunhdg.experiments import RunConfig, run_mach

cfg = RunConfig("mach", k=2, levels=3).validate()
rows = run_mach(cfg)
print(f"{'Mach':>5} {'L':>2} {'solver error':>13} "
      f"{'best approx':>13} {'ratio':>7}")
for sol, proj in zip(rows[::2], rows[1::2]):
    ratio = sol.wxerror / proj.wxerror if proj.wxerror > 0 else float("inf")
    print(f"{sol.Mach:>5.2f} {sol.L:>2} {sol.wxerror:>13.4e} "
          f"{proj.wxerror:>13.4e} {ratio:>7.2f}")
