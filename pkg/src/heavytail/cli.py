"""Command-line front end: ``heavytail {fit,trajectory,simulate,dist}``.

CSV conventions: ``.`` as decimal separator, 17 significant digits, LF line
endings, ``nan`` for missing values. Input samples are a single headerless
column unless ``--column NAME`` selects a column of a headered file.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._errors import (
    ArgumentError,
    DomainError,
    HeavyTailError,
    InvalidParameterError,
    UnsupportedModelError,
)
from .distributions import EpdParams, egpd_cdf, egpd_sf, epd_cdf, epd_pdf, epd_quantile, epd_sample, epd_sf, parse_model
from .estimators import SortedSample, fit_epd, fit_gpd_mle, hill, resolve_rho
from .simulation import (
    ESTIMATORS,
    TRAJECTORY_COLUMNS,
    McConfig,
    parse_k_grid,
    run_monte_carlo,
    run_trajectory,
)
from .tail_inference import ci_gamma

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

FIT_COLUMNS = (
    "k",
    "n",
    "threshold",
    "gamma_hill",
    "gamma_gpd",
    "gamma_epd",
    "delta_epd",
    "tau_epd",
    "rho_hat",
    "gamma_ci_lo",
    "gamma_ci_hi",
)
SUMMARY_COLUMNS = ("estimator", "k", "bias", "variance", "mse", "fail_count", "theory_var", "theory_bias")

# errors caused by what the user asked for, as opposed to numerical breakdowns
_USAGE_ERRORS = (ArgumentError, DomainError, InvalidParameterError, UnsupportedModelError)


class InputError(HeavyTailError):
    """Unreadable or invalid input file."""


# ---------------------------------------------------------------------------
# CSV helpers
# ---------------------------------------------------------------------------


def format_value(v) -> str:
    if isinstance(v, (str, bool)):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def write_csv(out, header: Sequence[str] | None, rows: Iterable[Sequence]) -> None:
    w = csv.writer(out, lineterminator="\n")
    if header is not None:
        w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])


def read_table(path) -> dict[str, np.ndarray]:
    """Read a CSV written by this tool back into float columns keyed by header."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in r] for r in reader if r]
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def read_sample(path, column: str | None = None) -> np.ndarray:
    """Positive observations from a headerless one-column CSV, or from ``column``.

    Every malformed or nonpositive row is reported with its line number.
    """
    try:
        text = Path(path).read_text() if str(path) != "-" else sys.stdin.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    lines = text.splitlines()
    if column is not None:
        if not lines:
            raise InputError(f"{path}: empty file")
        header = next(csv.reader([lines[0]]))
        if column not in header:
            raise InputError(f"{path}: no column {column!r} in header {header}")
        idx = header.index(column)
        cells = [(i, r[idx] if idx < len(r) else "") for i, r in enumerate(csv.reader(lines[1:]), start=2)]
    else:
        cells = list(enumerate(lines, start=1))
    values, bad = [], []
    for lineno, cell in cells:
        cell = cell.strip()
        if not cell:
            continue
        try:
            v = float(cell)
        except ValueError:
            bad.append(f"line {lineno}: not a number ({cell!r})")
            continue
        if not (math.isfinite(v) and v > 0):
            bad.append(f"line {lineno}: not a positive finite value ({cell})")
            continue
        values.append(v)
    if bad:
        shown = "; ".join(bad[:20]) + ("; ..." if len(bad) > 20 else "")
        raise InputError(f"{path}: {len(bad)} invalid rows: {shown}")
    if not values:
        raise InputError(f"{path}: no observations")
    return np.array(values)


@contextmanager
def _output(path):
    if path is None or str(path) == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


# ---------------------------------------------------------------------------
# SVG output
# ---------------------------------------------------------------------------


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # deterministic, self-contained SVG
    plt.rcParams.update({"svg.hashsalt": "heavytail", "svg.fonttype": "none"})
    return plt


def _save_svg(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})


def plot_trajectory(table, path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    k = table["k"]
    for col, style, label in (("gamma_hill", "--", "Hill"), ("gamma_gpd", "-.", "GPD"), ("gamma_epd", "-", "EPD")):
        ax.plot(k, table[col], style, label=label)
    ax.fill_between(k, table["gamma_ci_lo"], table["gamma_ci_hi"], alpha=0.2, label="EPD interval")
    ax.set_xlabel("k")
    ax.set_ylabel("gamma estimate")
    ax.legend()
    fig.tight_layout()
    _save_svg(fig, path)
    plt.close(fig)


def plot_summary(summary, path) -> None:
    plt = _pyplot()
    cfg = summary.config
    k = np.asarray(cfg.k_grid, dtype=float)
    fig, axes = plt.subplots(3, 1, figsize=(6, 9), sharex=True)
    styles = {"hill": "--", "gpd": "-.", "epd": "-"}
    for i, name in enumerate(cfg.estimators):
        (line,) = axes[0].plot(k, summary.variance[i], styles[name], label=name)
        axes[1].plot(k, summary.bias[i], styles[name], color=line.get_color())
        axes[2].plot(k, summary.mse[i], styles[name], color=line.get_color())
        if np.isfinite(summary.theory_var[i]).any():
            axes[0].plot(k, summary.theory_var[i] / k, ":", color=line.get_color(), linewidth=0.8)
            axes[1].plot(k, summary.theory_bias[i] / np.sqrt(k), ":", color=line.get_color(), linewidth=0.8)
    for ax, label in zip(axes, ("variance", "bias", "mse")):
        ax.set_ylabel(label)
    axes[1].axhline(0.0, color="grey", linewidth=0.5)
    axes[2].set_xlabel("k")
    axes[0].legend()
    fig.tight_layout()
    _save_svg(fig, path)
    plt.close(fig)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _rho_mode(args):
    return "estimated" if args.rho is None else args.rho


def cmd_fit(args) -> int:
    s = SortedSample(read_sample(args.input, args.column))
    k = args.k
    if not 1 <= k <= s.n - 1:
        raise ArgumentError(f"--k must satisfy 1 <= k <= n-1 = {s.n - 1}, got {k}")
    if args.rho is None:
        rho = resolve_rho(s, "estimated", k_rho=args.k_rho, tuning=args.rho_tuning)
    else:
        rho = resolve_rho(s, args.rho)
    efit = fit_epd(s, k, rho)
    try:
        g_gpd = fit_gpd_mle(s, k).gamma_hat if k >= 2 else math.nan
    except HeavyTailError as exc:
        print(f"warning: GPD fit failed: {exc}", file=sys.stderr)
        g_gpd = math.nan
    lo, hi = ci_gamma(efit.gamma_hat, rho, k, args.alpha)
    row = (k, s.n, efit.threshold, hill(s, k), g_gpd, efit.gamma_hat, efit.delta_hat, efit.tau_hat, rho, lo, hi)
    with _output(args.output) as out:
        write_csv(out, FIT_COLUMNS, [row])
    return EXIT_OK


def cmd_trajectory(args) -> int:
    data = read_sample(args.input, args.column)
    table = run_trajectory(
        data,
        parse_k_grid(args.k_grid),
        args.x_star,
        _rho_mode(args),
        alpha=args.alpha,
        k_rho=args.k_rho,
        rho_tuning=args.rho_tuning,
    )
    with _output(args.output) as out:
        write_csv(out, TRAJECTORY_COLUMNS, table.rows())
    if args.svg:
        plot_trajectory(table, args.svg)
    return EXIT_OK


def cmd_simulate(args) -> int:
    estimators = tuple(e.strip() for e in args.estimators.split(",") if e.strip())
    cfg = McConfig(
        model=parse_model(args.model),
        n=args.n,
        reps=args.reps,
        k_grid=parse_k_grid(args.k_grid),
        estimators=estimators,
        seed=args.seed,
        rho_mode=_rho_mode(args),
        k_rho=args.k_rho,
        rho_tuning=args.rho_tuning,
        workers=args.workers,
    )
    summary = run_monte_carlo(cfg)
    rows = [[r[c] for c in SUMMARY_COLUMNS] for r in summary.rows()]
    with _output(args.output) as out:
        write_csv(out, SUMMARY_COLUMNS, rows)
    if args.svg:
        plot_summary(summary, args.svg)
    return EXIT_OK


def _parse_dist(spec: str):
    name, _, rest = spec.strip().partition(":")
    name = name.strip().lower()
    if name in ("epd", "egpd"):
        try:
            g, d, t = (float(a) for a in rest.split(","))
        except ValueError:
            raise InvalidParameterError(f"{name} needs three parameters 'gamma,delta,tau', got {rest!r}") from None
        return name, EpdParams(g, d, t)
    return "model", parse_model(spec)


def cmd_dist(args) -> int:
    kind, obj = _parse_dist(args.dist)
    op = args.op
    if op == "sample":
        if args.n is None or args.n < 0:
            raise ArgumentError("--op sample needs --n >= 0")
        if kind == "model":
            values = obj.sample(args.seed, args.n)
        else:
            values = epd_sample(obj, args.seed, args.n)
            if kind == "egpd":
                values = values - 1.0
    else:
        if not args.values:
            raise ArgumentError(f"--op {op} needs at least one argument value")
        x = np.asarray(args.values, dtype=float)
        values = _evaluate(kind, obj, op, x)
    with _output(args.output) as out:
        write_csv(out, None, ([v] for v in np.atleast_1d(values)))
    return EXIT_OK


def _evaluate(kind, obj, op, x):
    if kind == "model":
        if op == "sf":
            return obj.sf(x)
        if op == "cdf":
            return 1.0 - obj.sf(x)
        if op == "quantile":
            return obj.quantile(x)
        raise UnsupportedModelError(f"--op {op} is not available for reference models")
    if kind == "egpd":
        if op == "cdf":
            return egpd_cdf(obj, x)
        if op == "sf":
            return egpd_sf(obj, x)
        if op == "pdf":
            return epd_pdf(obj, x + 1.0)
        return epd_quantile(obj, x) - 1.0
    return {"cdf": epd_cdf, "sf": epd_sf, "pdf": epd_pdf, "quantile": epd_quantile}[op](obj, x)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_input(p):
    p.add_argument("input", help="sample file, one positive value per line ('-' for stdin)")
    p.add_argument("--column", help="column name in a headered CSV")


def _add_rho(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--rho", type=float, help="fixed negative second-order parameter")
    g.add_argument("--estimate-rho", action="store_true", help="estimate rho from the sample (default)")
    p.add_argument("--k-rho", type=int, help="number of top order statistics used for rho (default n^0.995)")
    p.add_argument("--rho-tuning", type=float, default=0.0, choices=(0.0, 0.5, 1.0))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heavytail", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit Hill, GPD and EPD estimators at one threshold")
    _add_input(p)
    p.add_argument("--k", type=int, required=True, help="number of upper order statistics")
    _add_rho(p)
    p.add_argument("--alpha", type=float, default=0.10, help="1 - confidence level (default 0.10)")
    p.add_argument("-o", "--output", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("trajectory", help="estimates and tail probabilities along a k grid")
    _add_input(p)
    p.add_argument("--k-grid", required=True, help="start:stop:step (inclusive) or k1,k2,...")
    p.add_argument("--x-star", type=float, required=True, help="level for the exceedance probability")
    _add_rho(p)
    p.add_argument("--alpha", type=float, default=0.10)
    p.add_argument("-o", "--output")
    p.add_argument("--svg", help="also write a line chart of the gamma estimates")
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("simulate", help="Monte Carlo bias/variance/MSE comparison")
    p.add_argument("--model", required=True, help="e.g. student-t:4, frechet:1, pareto-mixture:2,2")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--k-grid", default="20:500:20")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimators", default=",".join(ESTIMATORS))
    _add_rho(p)
    p.add_argument("--workers", type=int, help="worker processes (default HEAVYTAIL_THREADS or CPU count)")
    p.add_argument("-o", "--output")
    p.add_argument("--svg", help="also write variance/bias/MSE panels")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dist", help="evaluate or sample the EPD, EGPD or a reference model")
    p.add_argument("--dist", required=True, help="epd:gamma,delta,tau | egpd:gamma,delta,tau | model spec")
    p.add_argument("--op", required=True, choices=("cdf", "sf", "pdf", "quantile", "sample"))
    p.add_argument("values", nargs="*", type=float, help="arguments for cdf/sf/pdf/quantile")
    p.add_argument("--n", type=int, help="sample size for --op sample")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_dist)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, *_USAGE_ERRORS) as exc:
        print(f"heavytail {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HeavyTailError as exc:
        print(f"heavytail {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"heavytail {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
