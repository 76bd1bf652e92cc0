"""Command-line front end: fit a series from CSV, run the simulation tables,
the tail-robustness probe, the sampler test battery, and prior density
curves.  All outputs are plain CSV/JSON written with 17 significant digits
and no timestamps, so a rerun with the same seed is byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .battery import run_battery
from .densities import write_density_curves
from .model import (
    Direction,
    ModelConfig,
    PriorFamily,
    SamplerConfig,
    SeriesData,
    run_chain,
)
from .posterior import (
    PosteriorSummary,
    interpolate_draws,
    max_increment_location,
    summarize,
)
from .probes import ProbeSpec, normal_prior_gap, tail_robustness_probe
from .simulate import (
    ReplicationPlan,
    Scenario,
    format_table,
    run_replications,
    write_details_csv,
    write_table_csv,
)

__all__ = ["FitRequest", "read_series_csv", "cmd_fit", "nile_path", "main"]

_PRIOR_FLAGS = {"hh": PriorFamily.HALF_HORSESHOE,
                "hl": PriorFamily.HALF_LAPLACE,
                "hn": PriorFamily.HALF_NORMAL}
_DIRECTION_FLAGS = {"inc": Direction.INCREASING, "dec": Direction.DECREASING}


@dataclass(frozen=True)
class FitRequest:
    """Everything cmd_fit needs; mirrors the fit subcommand's flags."""

    input_path: str
    output_path: str
    model: ModelConfig
    sampler: SamplerConfig
    level: float = 0.95
    grid: str = "observed"  # or "full-integer"
    format: str = "csv"     # or "json"

    def __post_init__(self) -> None:
        if not 0 < self.level < 1:
            raise ValueError("level must be in (0, 1)")
        if self.grid not in ("observed", "full-integer"):
            raise ValueError("grid must be 'observed' or 'full-integer'")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be 'csv' or 'json'")


def nile_path() -> Path:
    """Path of the shipped Nile annual-flow series (1871-1970)."""
    return Path(resources.files("isoshrink").joinpath("data/nile.csv"))


def read_series_csv(path) -> SeriesData:
    """Parse a `x,y` CSV into a SeriesData, sorting rows by x if needed.

    Malformed rows and duplicate locations raise with the offending line
    number; unsorted input is sorted with a warning carrying the count of
    out-of-order rows.
    """
    rows: list[tuple[float, float, int]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if [h.strip() for h in header] != ["x", "y"]:
            raise ValueError(f"{path}: expected header 'x,y', got {','.join(header)!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{line_no}: expected two fields, got {len(row)}")
            try:
                x, y = float(row[0]), float(row[1])
            except ValueError:
                raise ValueError(f"{path}:{line_no}: non-numeric row {row!r}") from None
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError(f"{path}:{line_no}: non-finite row {row!r}")
            rows.append((x, y, line_no))

    if len(rows) < 2:
        raise ValueError(f"{path}: need at least 2 observations, got {len(rows)}")
    seen: dict[float, int] = {}
    for x, _, line_no in rows:
        if x in seen:
            raise ValueError(
                f"{path}:{line_no}: duplicate location x={x} (first at line {seen[x]})")
        seen[x] = line_no
    out_of_order = sum(1 for a, b in zip(rows, rows[1:]) if b[0] < a[0])
    if out_of_order:
        warnings.warn(f"{path}: {out_of_order} out-of-order rows were sorted by x")
        rows.sort(key=lambda r: r[0])
    return SeriesData(np.array([r[0] for r in rows]), np.array([r[1] for r in rows]))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def cmd_fit(req: FitRequest) -> int:
    """Fit one series and write the posterior summary plus a JSON sidecar
    containing every field needed to reproduce the run."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        series = read_series_csv(req.input_path)
    sort_warnings = len(caught)

    draws = run_chain(series, req.model, req.sampler)
    if req.grid == "full-integer":
        grid = np.arange(math.ceil(series.locations[0]),
                         math.floor(series.locations[-1]) + 1, dtype=float)
        draws = interpolate_draws(draws, series.locations, grid)
    summary = summarize(draws, req.level)
    if req.model.direction is Direction.DECREASING:
        # the change-point readout of a decreasing fit is its largest drop,
        # i.e. the largest increment of the negated (increasing) fit
        flipped = PosteriorSummary(summary.locations, -summary.mean,
                                   -summary.upper, -summary.lower, req.level)
        loc, drop = max_increment_location(flipped)
        inc = -drop
    else:
        loc, inc = max_increment_location(summary)

    meta = {
        "command": "fit",
        "input": str(req.input_path),
        "config": draws.meta["model"],
        "sampler": draws.meta["sampler"],
        "level": req.level,
        "grid": req.grid,
        "n_observations": series.n,
        "n_retained": draws.n_draws,
        "sigma2_trace_mean": float(draws.sigma2_trace.mean()),
        "lambda_trace_mean": float(draws.lambda_trace.mean()),
        "floor_activations": draws.meta.get("floor_hits", {}),
        "max_increment": {"location": loc, "increment": inc},
        "sort_warnings": sort_warnings,
    }

    if req.format == "csv":
        with open(req.output_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "mean", "lower", "upper"])
            for i in range(summary.n):
                writer.writerow([_fmt(summary.locations[i]), _fmt(summary.mean[i]),
                                 _fmt(summary.lower[i]), _fmt(summary.upper[i])])
        sidecar = str(req.output_path) + ".meta.json"
        with open(sidecar, "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        payload = {
            "summary": {
                "x": [float(v) for v in summary.locations],
                "mean": [float(v) for v in summary.mean],
                "lower": [float(v) for v in summary.lower],
                "upper": [float(v) for v in summary.upper],
            },
            "meta": meta,
        }
        with open(req.output_path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def _fit_from_args(args) -> int:
    model = ModelConfig(
        prior=_PRIOR_FLAGS[args.prior],
        direction=_DIRECTION_FLAGS[args.direction],
        fixed_sigma2=args.fixed_sigma2,
        lambda_exponent=args.lambda_exponent,
    )
    sampler = SamplerConfig(n_iter=args.iters, burn_in=args.burnin,
                            thin=args.thin, seed=args.seed)
    req = FitRequest(
        input_path=args.input, output_path=args.out, model=model,
        sampler=sampler, level=args.level, grid=args.grid, format=args.format)
    return cmd_fit(req)


def _simulate_from_args(args) -> int:
    plan = ReplicationPlan(
        scenario=Scenario(args.scenario),
        n=args.n,
        reps=args.reps,
        noise_var=args.noise_var,
        priors=tuple(_PRIOR_FLAGS[p.strip()] for p in args.priors.split(",")),
        sampler=SamplerConfig(n_iter=args.iters, burn_in=args.burnin,
                              thin=args.thin, seed=args.seed),
        irregular=args.irregular_m,
        base_seed=args.base_seed,
    )
    if args.details:
        rows, details = run_replications(plan, threads=args.threads,
                                         collect_details=True)
        write_details_csv(args.details, details)
    else:
        rows = run_replications(plan, threads=args.threads)
    write_table_csv(args.out, rows)
    print(format_table(rows))
    return 0


def _probe_from_args(args) -> int:
    spec = ProbeSpec(
        base_z=np.full(args.n - 1, args.base_z),
        i_star=args.i_star,
        magnitudes=tuple(float(m) for m in args.magnitudes.split(",")),
        sigma2=args.sigma2,
    )
    mc = ModelConfig(prior=PriorFamily.HALF_HORSESHOE)
    sc = SamplerConfig(n_iter=args.iters, burn_in=args.burnin, seed=args.seed)
    results = tail_robustness_probe(spec, mc, sc, theorem1_strict=args.strict)
    contrast = normal_prior_gap(args.sigma2)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["z_star", "gap", "stderr", "normal_prior_gap"])
        for r in results:
            writer.writerow([_fmt(r.z_star), _fmt(r.gap), _fmt(r.stderr),
                             _fmt(contrast)])
    for r in results:
        print(f"z* = {r.z_star:g}: relative gap {r.gap:.4f} (se {r.stderr:.4f})")
    print(f"normal-prior contrast: {contrast:.4f} at every magnitude")
    return 0


def _dist_test_from_args(args) -> int:
    checks = run_battery(seed=args.seed, n_draws=args.draws)
    failed = 0
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status}  {c.name} — {c.detail}")
        failed += 0 if c.passed else 1
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


def _density_from_args(args) -> int:
    grid = np.linspace(args.min, args.max, args.points)
    write_density_curves(args.out, grid, sigma2=args.sigma2, lam=args.lam,
                         hl_nu=args.hl_nu)
    return 0


def _add_sampler_flags(p, iters: int, burnin: int) -> None:
    p.add_argument("--iters", type=int, default=iters,
                   help=f"total Gibbs sweeps (default {iters})")
    p.add_argument("--burnin", type=int, default=burnin,
                   help=f"discarded initial sweeps (default {burnin})")
    p.add_argument("--thin", type=int, default=1, help="retention stride")
    p.add_argument("--seed", type=int, default=0, help="chain seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isoshrink",
        description="Bayesian isotonic regression with half shrinkage priors")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a monotone curve to a x,y CSV series")
    p.add_argument("input", help="input CSV with header x,y")
    p.add_argument("--out", required=True, help="output summary path")
    p.add_argument("--prior", choices=sorted(_PRIOR_FLAGS), default="hh")
    p.add_argument("--direction", choices=sorted(_DIRECTION_FLAGS), default="inc")
    p.add_argument("--fixed-sigma2", type=float, default=None, dest="fixed_sigma2")
    p.add_argument("--level", type=float, default=0.95, help="credible level")
    p.add_argument("--grid", choices=["observed", "full-integer"], default="observed")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--lambda-exponent", choices=["paper", "derived"],
                   default="paper", dest="lambda_exponent")
    _add_sampler_flags(p, iters=3000, burnin=500)
    p.set_defaults(handler=_fit_from_args)

    p = sub.add_parser("simulate", help="replicate the simulation study table")
    p.add_argument("--scenario", choices=[s.value for s in Scenario], required=True)
    p.add_argument("--out", required=True, help="summary table CSV path")
    p.add_argument("--details", default=None, help="optional per-replication CSV")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--noise-var", type=float, default=0.25, dest="noise_var")
    p.add_argument("--priors", default="hh,hl,hn",
                   help="comma list of prior families to fit")
    p.add_argument("--irregular-m", type=int, default=None, dest="irregular_m",
                   help="subsample size for the irregular-grid protocol")
    p.add_argument("--base-seed", type=int, default=0, dest="base_seed")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    _add_sampler_flags(p, iters=3000, burnin=500)
    p.set_defaults(handler=_simulate_from_args)

    p = sub.add_parser("probe", help="tail-robustness probe of the posterior mean")
    p.add_argument("--out", required=True, help="probe CSV path")
    p.add_argument("--magnitudes", default="5,10,20,50,100")
    p.add_argument("--base-z", type=float, default=0.1, dest="base_z")
    p.add_argument("--n", type=int, default=10, help="model size")
    p.add_argument("--i-star", type=int, default=5, dest="i_star")
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--strict", action="store_true",
                   help="freeze the global scale at 1")
    _add_sampler_flags(p, iters=6000, burnin=1000)
    p.set_defaults(handler=_probe_from_args)

    p = sub.add_parser("dist-test")  # hidden battery: no help text on purpose
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--draws", type=int, default=100_000)
    p.set_defaults(handler=_dist_test_from_args)

    p = sub.add_parser("density-plot", help="emit prior density curves as CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--min", type=float, default=0.01)
    p.add_argument("--max", type=float, default=4.0)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--lambda", type=float, default=1.0, dest="lam")
    p.add_argument("--hl-nu", type=float, default=1.0, dest="hl_nu")
    p.set_defaults(handler=_density_from_args)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except Exception as err:  # CLI boundary: any failure exits 1 with a message
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
