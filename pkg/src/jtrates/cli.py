"""Command-line driver: reference tables, bond quotes, path dumps and convexity reports.

Exit status is 0 on success, 1 when a reproduced table misses its tolerance
and 2 on invalid usage or configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import fields

import numpy as np

from . import __version__
from .analytic import bond_price_expectation
from .config import SolverConfig
from .errors import JtratesError
from .montecarlo import convexity_adjustment, default_maturity_grid, price_bonds_mc
from .pde import bond_prices_pde, solve_merton_ode
from .rng import substream
from .runconfig import RunConfig, parse_assignments, read_assignments, validate
from .tables import EXPECTATION_TOL, INITIAL_RATE, MATURITIES, MATURITY_LABELS, TABLES

EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE = 0, 1, 2


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def _markdown(header: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    return "\n".join(lines)


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _write(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# --------------------------------------------------------------------------
# table
# --------------------------------------------------------------------------


def table_prices(n: int, method: str = "all", cfg: SolverConfig | None = None) -> dict[str, list[tuple[float, float]]]:
    """Reproduced columns of reference table ``n`` keyed by ``"numerical"``/``"expectation"``."""
    table = TABLES[n]
    out = {}
    if method in ("all", "expectation"):
        out["expectation"] = [
            tuple(bond_price_expectation(table.model, i, INITIAL_RATE, 0.0, T) for i in (0, 1)) for T in MATURITIES
        ]
    if method in ("all", "numerical"):
        out["numerical"] = [bond_prices_pde(table.model, INITIAL_RATE, T, cfg) for T in MATURITIES]
    return out


def cmd_table(args) -> int:
    table = TABLES[args.number]
    cfg = SolverConfig(
        **{k: v for k, v in (("fd_nx", args.fd_nx), ("fd_nt", args.fd_nt), ("fd_coupling", args.fd_coupling)) if v is not None}
    )
    prices = table_prices(args.number, args.method, cfg)
    numerical_name = "ODE" if table.numerical_method == "ode" else "Finite differences"
    columns = [
        (key, numerical_name if key == "numerical" else "Expectation", table.numerical_tol if key == "numerical" else EXPECTATION_TOL)
        for key in ("numerical", "expectation")
        if key in prices
    ]
    reference = {"numerical": table.numerical, "expectation": table.expectation}

    worst = {}
    for key, _, _ in columns:
        worst[key] = max(abs(prices[key][k][i] - reference[key][k][i]) for k in range(len(MATURITIES)) for i in (0, 1))
    ok = all(worst[key] <= tol for key, _, tol in columns)

    if args.format == "csv":
        rows = [
            [MATURITIES[k], i, key, repr(prices[key][k][i]), reference[key][k][i], repr(prices[key][k][i] - reference[key][k][i])]
            for key, _, _ in columns
            for k in range(len(MATURITIES))
            for i in (0, 1)
        ]
        _write(_csv(["maturity", "regime", "method", "price", "reference", "error"], rows), args.out)
    else:
        header = ["Maturity"] + [f"{label} F{i}" for _, label, _ in columns for i in (0, 1)]
        rows = [
            [MATURITY_LABELS[k]] + [_fmt(prices[key][k][i]) for key, _, _ in columns for i in (0, 1)]
            for k in range(len(MATURITIES))
        ]
        title = f"Table {table.number}: {table.title}, initial rate {INITIAL_RATE:.0%}"
        summary = [
            f"{label}: max |error| {worst[key]:.2e} (tolerance {tol:.0e}) {'ok' if worst[key] <= tol else 'FAIL'}"
            for key, label, tol in columns
        ]
        _write("\n".join([title, "", _markdown(header, rows), ""] + summary), args.out)
    return EXIT_OK if ok else EXIT_TOLERANCE


# --------------------------------------------------------------------------
# run configuration from file, overrides and flags
# --------------------------------------------------------------------------


def _run_config(args) -> RunConfig:
    pairs = []
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            pairs += read_assignments(fh.read())
    for item in args.override or []:
        if "=" not in item:
            raise JtratesError(f"--override expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        pairs.append((key, raw, None))
    for f in fields(RunConfig):
        raw = getattr(args, f"set_{f.name}", None)
        if raw is not None:
            pairs.append((f.name, raw, None))
    cfg, where = parse_assignments(pairs)
    return validate(cfg, where)


def _add_config_options(p: argparse.ArgumentParser, *, skip=()):
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--override", action="append", metavar="KEY=VALUE", help="override one configuration key")
    keys = p.add_argument_group("configuration keys (each overrides the file)")
    for f in fields(RunConfig):
        if f.name not in skip:
            keys.add_argument("--" + f.name.replace("_", "-"), dest=f"set_{f.name}", metavar="VALUE")


# --------------------------------------------------------------------------
# price
# --------------------------------------------------------------------------


def quote_rows(cfg: RunConfig) -> list[tuple[str, int, float, str, float, float | None]]:
    """``(model, regime, maturity, method, price, stderr)`` for each requested method."""
    model = cfg.model()
    solver = cfg.solver()
    mats = list(cfg.maturities)
    rows = []
    for method in cfg.methods():
        if method == "pde" and not model.kind.dothan and max(mats) > 0:
            sol = solve_merton_ode(model, max(mats), solver)
            by_regime = [[(float(sol.price(i, cfg.r0, T)), None) for T in mats] for i in (0, 1)]
        elif method == "pde":
            pairs = [bond_prices_pde(model, cfg.r0, T, solver) for T in mats]
            by_regime = [[(pair[i], None) for pair in pairs] for i in (0, 1)]
        elif method == "expectation":
            by_regime = [[(bond_price_expectation(model, i, cfg.r0, 0.0, T), None) for T in mats] for i in (0, 1)]
        else:
            by_regime = [
                [(e.estimate, e.stderr) for e in price_bonds_mc(model, i, cfg.r0, mats, solver.mc_paths, solver, cfg.seed)]
                for i in (0, 1)
            ]
        for i in (0, 1):
            rows += [(model.kind.value, i, T, method, p, s) for T, (p, s) in zip(mats, by_regime[i])]
    return rows


def cmd_price(args) -> int:
    cfg = _run_config(args)
    rows = quote_rows(cfg)
    header = ["model", "regime", "maturity", "method", "price", "stderr"]
    if cfg.format == "csv":
        body = [[m, i, repr(T), meth, repr(p), "" if s is None else repr(s)] for m, i, T, meth, p, s in rows]
        _write(_csv(header, body), args.out)
    else:
        body = [[m, str(i), f"{T:.6g}", meth, _fmt(p), "" if s is None else f"{s:.2e}"] for m, i, T, meth, p, s in rows]
        _write(_markdown(header, body), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# simulate and convexity
# --------------------------------------------------------------------------


def path_rows(cfg: RunConfig, n_paths: int, horizon: float):
    """CSV rows for ``n_paths`` paths; path ``k`` uses the substream ``(seed, k)``."""
    from .models import simulate_rate

    model = cfg.model()
    step = cfg.solver().mc_step
    for path_id in range(n_paths):
        path = simulate_rate(model, cfg.r0, cfg.regime0, horizon, substream(cfg.seed, path_id), step)
        for t, reg, r, area in zip(path.times, path.regimes, path.rates, path.integral):
            yield [path_id, repr(float(t)), int(reg), repr(float(r)), repr(float(area))]


def cmd_simulate(args) -> int:
    cfg = _run_config(args)
    if args.paths < 1:
        raise JtratesError("--paths must be positive")
    if not args.horizon >= 0:
        raise JtratesError("--horizon must be non-negative")
    text = _csv(["path_id", "time", "regime", "rate", "integral"], list(path_rows(cfg, args.paths, args.horizon)))
    _write(text, args.out)
    return EXIT_OK


def cmd_convexity(args) -> int:
    cfg = _run_config(args)
    horizon = float(np.max(cfg.maturities))
    if not horizon > 0:
        raise JtratesError("convexity report needs a positive maturity")
    report = convexity_adjustment(
        cfg.model(), cfg.regime0, cfg.r0, default_maturity_grid(horizon), args.method, cfg.solver(), cfg.seed
    )
    _write(report.to_csv(), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jtrates", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table", help="reproduce a reference bond-price table")
    p.add_argument("number", type=int, choices=sorted(TABLES))
    p.add_argument("--method", choices=("all", "expectation", "numerical"), default="all")
    p.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    p.add_argument("--fd-nx", type=int)
    p.add_argument("--fd-nt", type=int)
    p.add_argument("--fd-coupling", choices=("implicit", "lagged"))
    p.add_argument("--out")
    p.set_defaults(handler=cmd_table)

    p = sub.add_parser("price", help="bond prices for a configured model")
    _add_config_options(p)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_price)

    p = sub.add_parser("simulate", help="write simulated short-rate paths as CSV")
    _add_config_options(p)
    p.add_argument("--paths", type=int, default=1)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("convexity", help="write a convexity-adjustment report as CSV")
    _add_config_options(p, skip=("method",))
    p.add_argument("--method", choices=("pde", "mc"), default="pde")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_convexity)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (JtratesError, OSError) as exc:
        print(f"jtrates {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
