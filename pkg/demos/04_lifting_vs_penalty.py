"""Lifting-stabilized convection against the penalty-only variant.

The penalty-only method needs a well-chosen penalty factor; the lifting
variant is parameter free and should track the best penalty choice.
Equivalent CLI call:

    galbrun-hdg sip --k 3 --levels 3 --mach 0.45 --out sip.csv --svg sip.svg
"""

from galbrunhdg.experiments import RunConfig, run_sip_compare

cfg = RunConfig("sip", k=3, levels=3, mach=0.45).validate()
rows = run_sip_compare(cfg)
print(f"{'L':>2} {'method':>8} {'lambda':>7} {'error':>12}")
for r in rows:
    lam = "" if r.lamb is None else f"{r.lamb:g}"
    print(f"{r.L:>2} {r.method:>8} {lam:>7} {r.wxerror:>12.4e}")
finest = max(r.L for r in rows)
lift = next(r.wxerror for r in rows
            if r.L == finest and r.method == "lifting")
best = min(r.wxerror for r in rows if r.L == finest and r.method == "sip")
print(f"\nfinest level: lifting {lift:.4e}, best penalty-only {best:.4e}")
