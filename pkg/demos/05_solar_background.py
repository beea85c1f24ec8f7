"""Robustness demo on a stellar-like radial background.

Generates a synthetic radial model CSV (density and sound speed falling
off toward the surface), then runs the solar study through the CLI entry
point for a ladder of Mach numbers. The study validates by solver
residual and dumps raster samples of the solution next to the CSV.

Run: python3 demos/05_solar_background.py
"""

import csv
import sys
import tempfile
from pathlib import Path

import numpy as np

from galbrunhdg.cli import main


def write_model(path):
    r = np.linspace(0.0, 1.0, 64)
    rho = 1.5 * np.exp(-3.0 * r**2) + 0.05
    cs = 1.2 - 0.7 * r**2
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("radius", "soundspeed", "density"))
        w.writerows(zip(r, cs, rho))


with tempfile.TemporaryDirectory() as tmp:
    model = Path(tmp) / "model.csv"
    out = Path(tmp) / "solar.csv"
    write_model(model)
    code = main([
        "solar", "--k", "1", "--levels", "2",
        "--solar-csv", str(model), "--out", str(out), "--check",
    ])
    print(f"\nexit code {code}")
    for dump in sorted(Path(tmp).glob("solar.csv.mach*.npy")):
        field = np.load(dump)
        finite = field[np.isfinite(field)]
        print(f"{dump.name}: raster {field.shape}, "
              f"range [{finite.min():.3e}, {finite.max():.3e}]")
    sys.exit(code)
