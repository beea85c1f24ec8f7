"""Command-line front end for the experiment studies.

Configuration comes from an optional TOML file with flag overrides; each
study writes a CSV (schema in experiments.CSV_COLUMNS). Exit codes: 0 on
success, 2 for configuration errors, 3 for solver failures, 4 when a
--check threshold is violated.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields, replace

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .experiments import (
    ConfigError,
    RunConfig,
    run,
)
from .solver import SingularMatrixError, IndefiniteMatrixError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_CHECK = 4


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="galbrun-hdg",
        description="Convergence, Mach-robustness, stabilization and "
        "stellar-background studies for the flow-acoustics solver.",
    )
    p.add_argument("experiment", nargs="?",
                   choices=("convergence", "mach", "sip", "solar"),
                   help="study to run (or set it in the config file)")
    p.add_argument("--config", help="TOML configuration file")
    p.add_argument("--k", type=int, help="polynomial degree")
    p.add_argument("--levels", type=int, help="number of refinement levels")
    p.add_argument("--method", choices=("full", "reduced"))
    p.add_argument("--alpha", type=float, help="divergence penalty factor")
    p.add_argument("--mode", dest="conv_mode", choices=("lifting", "sip"),
                   help="convection stabilization variant")
    p.add_argument("--lambda", dest="lam", type=float,
                   help="convection penalty factor for --mode sip")
    p.add_argument("--preset", choices=("square-manufactured", "paper-disk",
                                        "solar"))
    p.add_argument("--mach", type=float, help="target Mach number")
    p.add_argument("--solar-csv", dest="solar_csv",
                   help="radial model CSV for the solar preset")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--svg", help="also write a convergence line plot (SVG)")
    p.add_argument("--check", action="store_true",
                   help="verify study thresholds; exit 4 on violation")
    return p


def load_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                data = tomllib.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {args.config}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML: {exc}") from exc
        known = {f.name for f in fields(RunConfig)}
        for key, val in data.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            if key in ("mach_schedule", "lambda_factors"):
                val = tuple(val)
            values[key] = val
    for name in ("experiment", "method", "k", "alpha", "conv_mode", "lam",
                 "levels", "preset", "mach", "solar_csv", "out"):
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    if "experiment" not in values:
        raise ConfigError("no experiment given (argument or config file)")
    if values["experiment"] == "solar":
        values.setdefault("preset", "solar")
    try:
        return RunConfig(**values).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


# ---- threshold checks ----------------------------------------------------


def check_rows(config: RunConfig, rows) -> list:
    """Study-specific pass criteria; returns human-readable violations."""
    bad = []
    if config.experiment == "convergence":
        final = rows[-1].eoc
        if final is None or final < config.k - 0.2:
            bad.append(
                f"final EOC {final} below {config.k - 0.2} for k={config.k}"
            )
    elif config.experiment == "mach":
        for row, prow in zip(rows[::2], rows[1::2]):
            if row.Mach > 0.25 or prow.wxerror <= 0:
                continue
            ratio = row.wxerror / prow.wxerror
            if ratio > 10.0:
                bad.append(
                    f"Mach {row.Mach} level {row.L}: error/best-approx "
                    f"ratio {ratio:.2f} > 10"
                )
    elif config.experiment == "sip":
        finest = max(r.L for r in rows)
        lift = [r.wxerror for r in rows if r.L == finest
                and r.method == "lifting"]
        sips = [r.wxerror for r in rows if r.L == finest and r.method == "sip"]
        if lift and sips:
            if lift[0] > 2.0 * min(sips):
                bad.append(
                    f"lifting error {lift[0]:.3e} above twice the best "
                    f"penalty-only error {min(sips):.3e}"
                )
            if min(sips) > 0 and max(sips) / min(sips) <= 1.1:
                bad.append("penalty-only errors insensitive to lambda")
    elif config.experiment == "solar":
        first = min(rows, key=lambda r: r.Mach)
        if first.residual > 1e-8:
            bad.append(
                f"residual {first.residual:.2e} above 1e-8 at "
                f"Mach {first.Mach}"
            )
    return bad


# ---- SVG plot ------------------------------------------------------------


def write_svg(rows, path) -> None:
    """Minimal log-scale line plot of wxerror against level, one polyline
    per (method, lambda) series."""
    import math

    series = {}
    for r in rows:
        if r.wxerror <= 0:
            continue
        series.setdefault((r.method, r.lamb), []).append(
            (r.L, math.log10(r.wxerror))
        )
    if not series:
        raise ValueError("no positive errors to plot")
    w, h, pad = 480, 320, 40
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    x0, x1 = min(xs), max(max(xs), min(xs) + 1)
    y0, y1 = min(ys), max(max(ys), min(ys) + 1e-9)

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (w - 2 * pad)

    def sy(y):
        return h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad)

    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<text x="{w // 2}" y="{h - 8}" text-anchor="middle" '
        'font-size="12">refinement level</text>',
        f'<text x="12" y="{h // 2}" font-size="12" transform="rotate(-90 '
        f'12 {h // 2})" text-anchor="middle">log10 error</text>',
    ]
    for i, (key, pts) in enumerate(sorted(series.items(), key=str)):
        pts.sort()
        path_d = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in pts)
        color = colors[i % len(colors)]
        label = key[0] if key[1] is None else f"{key[0]} λ={key[1]:g}"
        parts.append(
            f'<polyline points="{path_d}" fill="none" stroke="{color}" '
            'stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{w - pad + 2}" y="{pad + 14 * i}" font-size="11" '
            f'fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = load_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rows = run(config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularMatrixError, IndefiniteMatrixError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if args.svg:
        write_svg(rows, args.svg)
    for row in rows:
        print(",".join(row.as_record()))
    if args.check:
        violations = check_rows(config, rows)
        if violations:
            for v in violations:
                print(f"check failed: {v}", file=sys.stderr)
            return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
