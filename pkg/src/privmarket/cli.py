"""Command-line front end: solve / sweep / validate / plot.

Experiment configurations are JSON documents with an explicit schema version;
unknown fields are rejected (not ignored) so typos in parameter names surface
immediately. Results are CSV tables with the fixed header
``price,alpha_lo,alpha_hi,regime,k_star,source`` (12 significant digits,
'.' decimal separator, newline line endings) and optional SVG plots rendered
from the already-written CSV.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    BenefitFunction,
    ConstantBenefit,
    EmpiricalValuations,
    EquilibriumSet,
    LinearBenefit,
    MarketConfig,
    PersonalizedValuations,
    PowerBenefit,
    SShapedBenefit,
    UniformValuations,
    ValuationDistribution,
)
from .solver import (
    SolverSettings,
    closed_form,
    empirical_oracle,
    grid_equilibria,
    sweep,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "set_distance",
    "render_svg",
    "main",
    "EXIT_OK",
    "EXIT_VALIDATION",
    "EXIT_CONFIG",
    "EXIT_IO",
    "CSV_HEADER",
]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_IO = 3

SCHEMA_VERSION = 1
CSV_HEADER = ("price", "alpha_lo", "alpha_hi", "regime", "k_star", "source")


class ConfigError(Exception):
    """Malformed or inconsistent experiment configuration."""


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _check_keys(d: dict, allowed: set[str], required: set[str], ctx: str) -> None:
    if not isinstance(d, dict):
        raise ConfigError(f"{ctx} must be an object, got {type(d).__name__}")
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown field(s) in {ctx}: {', '.join(sorted(unknown))}")
    missing = required - set(d)
    if missing:
        raise ConfigError(f"missing field(s) in {ctx}: {', '.join(sorted(missing))}")


def _parse_benefit(d: dict) -> BenefitFunction:
    _check_keys(d, {"kind", "q", "c", "s", "a", "b"}, {"kind"}, "benefit")
    kind = d["kind"]
    try:
        if kind == "constant":
            _check_keys(d, {"kind", "q"}, {"kind", "q"}, "benefit")
            return ConstantBenefit(q=float(d["q"]))
        if kind == "linear":
            _check_keys(d, {"kind", "c"}, {"kind", "c"}, "benefit")
            return LinearBenefit(c=float(d["c"]))
        if kind == "power":
            _check_keys(d, {"kind", "c", "s"}, {"kind", "c", "s"}, "benefit")
            return PowerBenefit(c=float(d["c"]), s=float(d["s"]))
        if kind == "sshaped":
            _check_keys(d, {"kind", "c", "a", "b"}, {"kind", "c", "a", "b"}, "benefit")
            return SShapedBenefit(c=float(d["c"]), a=float(d["a"]), b=float(d["b"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid benefit parameters: {exc}") from exc
    raise ConfigError(f"unknown benefit kind {kind!r}")


def _parse_distribution(d: dict) -> ValuationDistribution:
    _check_keys(d, {"kind", "scale", "v_m", "samples"}, {"kind"}, "distribution")
    kind = d["kind"]
    try:
        if kind == "uniform":
            _check_keys(d, {"kind", "scale"}, {"kind"}, "distribution")
            return UniformValuations(scale=float(d.get("scale", 1.0)))
        if kind == "personalized":
            _check_keys(d, {"kind", "v_m"}, {"kind", "v_m"}, "distribution")
            return PersonalizedValuations(v_m=float(d["v_m"]))
        if kind == "empirical":
            _check_keys(d, {"kind", "samples"}, {"kind", "samples"}, "distribution")
            return EmpiricalValuations(np.asarray(d["samples"], dtype=float))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid distribution parameters: {exc}") from exc
    raise ConfigError(f"unknown distribution kind {kind!r}")


def _parse_prices(spec) -> tuple[float, ...]:
    if isinstance(spec, list):
        try:
            prices = tuple(float(p) for p in spec)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid price list: {exc}") from exc
    elif isinstance(spec, dict):
        _check_keys(
            spec,
            {"min", "max", "count", "spacing"},
            {"min", "max", "count"},
            "prices",
        )
        lo, hi, count = float(spec["min"]), float(spec["max"]), int(spec["count"])
        spacing = spec.get("spacing", "linear")
        if spacing not in ("linear", "log"):
            raise ConfigError(f"prices.spacing must be 'linear' or 'log', got {spacing!r}")
        if count < 1:
            raise ConfigError("prices.count must be >= 1")
        if count > 1 and not lo < hi:
            raise ConfigError("prices.min must be < prices.max")
        if spacing == "log":
            if not lo > 0:
                raise ConfigError("log spacing requires prices.min > 0")
            prices = tuple(float(p) for p in np.geomspace(lo, hi, count))
        else:
            prices = tuple(float(p) for p in np.linspace(lo, hi, count))
    else:
        raise ConfigError("prices must be a list or a {min, max, count, spacing} object")
    if not prices:
        raise ConfigError("at least one price is required")
    if any(not p > 0 for p in prices):
        raise ConfigError("prices must be positive")
    if any(a >= b for a, b in zip(prices, prices[1:])):
        raise ConfigError("prices must be strictly increasing")
    return prices


@dataclass(frozen=True)
class ValidationOptions:
    max_discrepancy: float = 2e-3
    oracle_discrepancy: float = 0.01
    # Testing hook: adds a constant offset to every analytic equilibrium
    # before comparison, so the detection path itself is testable.
    perturb_analytic: float = 0.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed experiment configuration (serialize∘parse is the identity)."""

    user_mass: float
    budgets: tuple[float, ...]
    benefit: BenefitFunction
    distribution: ValuationDistribution
    prices: tuple[float, ...]
    settings: SolverSettings
    csv_path: str | None = None
    svg_path: str | None = None
    oracle_n: int | None = None
    oracle_seeds: tuple[int, ...] = ()
    validation: ValidationOptions = ValidationOptions()

    def market_at(self, price: float) -> MarketConfig:
        return MarketConfig(user_mass=self.user_mass, budgets=self.budgets, price=price)

    def to_dict(self) -> dict:
        benefit: dict = {}
        if isinstance(self.benefit, ConstantBenefit):
            benefit = {"kind": "constant", "q": self.benefit.q}
        elif isinstance(self.benefit, LinearBenefit):
            benefit = {"kind": "linear", "c": self.benefit.c}
        elif isinstance(self.benefit, PowerBenefit):
            benefit = {"kind": "power", "c": self.benefit.c, "s": self.benefit.s}
        elif isinstance(self.benefit, SShapedBenefit):
            benefit = {
                "kind": "sshaped",
                "c": self.benefit.c,
                "a": self.benefit.a,
                "b": self.benefit.b,
            }
        dist: dict = {}
        if isinstance(self.distribution, UniformValuations):
            dist = {"kind": "uniform", "scale": self.distribution.scale}
        elif isinstance(self.distribution, PersonalizedValuations):
            dist = {"kind": "personalized", "v_m": self.distribution.v_m}
        elif isinstance(self.distribution, EmpiricalValuations):
            dist = {"kind": "empirical", "samples": self.distribution.samples.tolist()}
        out = {
            "schema_version": SCHEMA_VERSION,
            "market": {"user_mass": self.user_mass, "budgets": list(self.budgets)},
            "benefit": benefit,
            "distribution": dist,
            "prices": list(self.prices),
            "solver": {
                "grid_points": self.settings.grid_points,
                "tolerance": self.settings.tolerance,
                "refine_tolerance": self.settings.refine_tolerance,
                "interval_min_run": self.settings.interval_min_run,
            },
            "validation": {
                "max_discrepancy": self.validation.max_discrepancy,
                "oracle_discrepancy": self.validation.oracle_discrepancy,
                "perturb_analytic": self.validation.perturb_analytic,
            },
        }
        outputs = {}
        if self.csv_path is not None:
            outputs["csv_path"] = self.csv_path
        if self.svg_path is not None:
            outputs["svg_path"] = self.svg_path
        if outputs:
            out["outputs"] = outputs
        if self.oracle_n is not None:
            out["oracle"] = {"n": self.oracle_n, "seeds": list(self.oracle_seeds)}
        return out


def parse_config(doc: dict) -> ExperimentConfig:
    """Strict parse of a configuration document (unknown fields rejected)."""
    _check_keys(
        doc,
        {
            "schema_version",
            "market",
            "benefit",
            "distribution",
            "prices",
            "solver",
            "outputs",
            "oracle",
            "validation",
        },
        {"schema_version", "market", "benefit", "distribution", "prices"},
        "configuration",
    )
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {doc['schema_version']!r} "
            f"(expected {SCHEMA_VERSION})"
        )
    market = doc["market"]
    _check_keys(market, {"user_mass", "budgets"}, {"user_mass", "budgets"}, "market")
    try:
        user_mass = float(market["user_mass"])
        budgets = tuple(float(b) for b in market["budgets"])
        # construct once to trigger all market invariants early
        MarketConfig(user_mass=user_mass, budgets=budgets, price=1.0)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid market block: {exc}") from exc

    benefit = _parse_benefit(doc["benefit"])
    distribution = _parse_distribution(doc["distribution"])
    prices = _parse_prices(doc["prices"])

    solver = doc.get("solver", {})
    _check_keys(
        solver,
        {"grid_points", "tolerance", "refine_tolerance", "interval_min_run"},
        set(),
        "solver",
    )
    try:
        settings = SolverSettings(
            grid_points=int(solver.get("grid_points", 4096)),
            tolerance=float(solver.get("tolerance", 2e-3)),
            refine_tolerance=float(solver.get("refine_tolerance", 1e-10)),
            interval_min_run=int(solver.get("interval_min_run", 3)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver block: {exc}") from exc

    outputs = doc.get("outputs", {})
    _check_keys(outputs, {"csv_path", "svg_path"}, set(), "outputs")
    csv_path = outputs.get("csv_path")
    svg_path = outputs.get("svg_path")

    oracle = doc.get("oracle")
    oracle_n = None
    oracle_seeds: tuple[int, ...] = ()
    if oracle is not None:
        _check_keys(oracle, {"n", "seeds"}, {"n", "seeds"}, "oracle")
        try:
            oracle_n = int(oracle["n"])
            oracle_seeds = tuple(int(s) for s in oracle["seeds"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid oracle block: {exc}") from exc
        if oracle_n < 1 or not oracle_seeds:
            raise ConfigError("oracle needs n >= 1 and at least one seed")

    validation_doc = doc.get("validation", {})
    _check_keys(
        validation_doc,
        {"max_discrepancy", "oracle_discrepancy", "perturb_analytic"},
        set(),
        "validation",
    )
    try:
        validation = ValidationOptions(
            max_discrepancy=float(validation_doc.get("max_discrepancy", 2e-3)),
            oracle_discrepancy=float(validation_doc.get("oracle_discrepancy", 0.01)),
            perturb_analytic=float(validation_doc.get("perturb_analytic", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid validation block: {exc}") from exc

    return ExperimentConfig(
        user_mass=user_mass,
        budgets=budgets,
        benefit=benefit,
        distribution=distribution,
        prices=prices,
        settings=settings,
        csv_path=csv_path,
        svg_path=svg_path,
        oracle_n=oracle_n,
        oracle_seeds=oracle_seeds,
        validation=validation,
    )


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration {path} is not valid JSON: {exc}") from exc
    return parse_config(doc)


# ---------------------------------------------------------------------------
# CSV emission


def _csv_rows(price: float, eqs: EquilibriumSet) -> list[list[str]]:
    if eqs.is_empty:
        return [[_fmt(price), "", "", "empty", "-1", eqs.source]]
    rows = []
    for point in eqs.points:
        rows.append(
            [
                _fmt(price),
                _fmt(point.alpha),
                _fmt(point.alpha),
                point.regime,
                str(point.threshold),
                eqs.source,
            ]
        )
    for iv in eqs.intervals:
        rows.append([_fmt(price), _fmt(iv.lo), _fmt(iv.hi), "mixed", "-1", eqs.source])
    rows.sort(key=lambda r: float(r[1]))
    return rows


def _write_csv(rows: list[list[str]], out_path: str | None) -> None:
    if out_path is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(rows)
        return
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# Set distance (validation metric)


def _distance_segments(
    eqs: EquilibriumSet, clip: float, shift: float = 0.0
) -> list[tuple[float, float]]:
    """Closed segments covering the set, with alpha <= clip removed.

    The clip drops the neighborhood of the trivial equilibrium so open-at-zero
    continua compare cleanly against numeric scans that start at the first
    grid point.
    """
    segs = []
    for p in eqs.points:
        a = p.alpha + shift
        if a > clip:
            segs.append((a, a))
    for iv in eqs.intervals:
        lo, hi = max(iv.lo + shift, clip), iv.hi + shift
        if lo <= hi:
            segs.append((lo, hi))
    return sorted(segs)


def _directed_distance(
    a: list[tuple[float, float]], b: list[tuple[float, float]]
) -> float:
    worst = 0.0
    for lo, hi in a:
        xs = np.linspace(lo, hi, 257)
        dists = np.full(xs.shape, np.inf)
        for blo, bhi in b:
            d = np.maximum(np.maximum(blo - xs, xs - bhi), 0.0)
            dists = np.minimum(dists, d)
        worst = max(worst, float(dists.max()))
    return worst


def set_distance(
    a: EquilibriumSet, b: EquilibriumSet, clip: float = 2e-3, shift_a: float = 0.0
) -> float:
    """Symmetric Hausdorff-style distance between two equilibrium sets."""
    segs_a = _distance_segments(a, clip, shift_a)
    segs_b = _distance_segments(b, clip)
    if not segs_a and not segs_b:
        return 0.0
    if not segs_a or not segs_b:
        return math.inf
    return max(_directed_distance(segs_a, segs_b), _directed_distance(segs_b, segs_a))


# ---------------------------------------------------------------------------
# SVG rendering (from the already-written CSV; numbers are never recomputed)


def render_svg(csv_path: str, svg_path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    partial_x, partial_y = [], []
    full_x, full_y = [], []
    mixed = []
    with open(csv_path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            regime = row["regime"]
            if regime == "empty":
                continue
            price = float(row["price"])
            lo, hi = float(row["alpha_lo"]), float(row["alpha_hi"])
            if regime == "partial":
                partial_x.append(price)
                partial_y.append(lo)
            elif regime == "full":
                full_x.append(price)
                full_y.append(lo)
            elif regime == "mixed":
                mixed.append((price, lo, hi))

    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    if mixed:
        ax.vlines(
            [m[0] for m in mixed],
            [m[1] for m in mixed],
            [m[2] for m in mixed],
            color="tab:orange",
            alpha=0.45,
            linewidth=3,
            label="mixed (continuum)",
        )
    if partial_x:
        ax.plot(partial_x, partial_y, ".-", color="tab:red", label="partial")
    if full_x:
        ax.plot(full_x, full_y, ".-", color="tab:blue", label="full")
    ax.set_xlabel("price P")
    ax.set_ylabel("participation rate alpha")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(svg_path, format="svg")
    plt.close(fig)


# ---------------------------------------------------------------------------
# Subcommands


def _solve_at(cfg: ExperimentConfig, price: float) -> EquilibriumSet:
    """Analytic solution when recognized, numeric grid scan otherwise."""
    market = cfg.market_at(price)
    analytic = closed_form(market, cfg.benefit, cfg.distribution)
    if analytic is not None:
        return analytic
    return grid_equilibria(market, cfg.benefit, cfg.distribution, cfg.settings)


def cmd_solve(cfg: ExperimentConfig, out: str | None, quiet: bool) -> int:
    if len(cfg.prices) != 1:
        raise ConfigError("solve requires exactly one price")
    price = cfg.prices[0]
    rows = _csv_rows(price, _solve_at(cfg, price))
    _write_csv(rows, out)
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, out: str | None, quiet: bool) -> int:
    out_path = out or cfg.csv_path
    result = sweep(
        cfg.market_at(cfg.prices[0]),
        cfg.benefit,
        cfg.distribution,
        cfg.prices,
        cfg.settings,
    )
    rows = []
    for row in result.rows:
        eqs = row.analytic if row.analytic is not None else row.equilibria
        rows.extend(_csv_rows(row.price, eqs))
    _write_csv(rows, out_path)
    if cfg.svg_path is not None and out_path is not None:
        render_svg(out_path, cfg.svg_path)
    if not quiet and out_path is not None:
        print(f"wrote {len(rows)} rows to {out_path}")
    return EXIT_OK


def cmd_validate(cfg: ExperimentConfig, out: str | None, quiet: bool) -> int:
    has_analytic = (
        closed_form(cfg.market_at(cfg.prices[0]), cfg.benefit, cfg.distribution)
        is not None
    )
    if not has_analytic and cfg.oracle_n is None:
        raise ConfigError(
            "validate needs a closed-form instance or an oracle block; got neither"
        )
    clip = cfg.settings.tolerance
    report = []
    max_an = 0.0
    max_no = 0.0
    for price in cfg.prices:
        market = cfg.market_at(price)
        numeric = grid_equilibria(market, cfg.benefit, cfg.distribution, cfg.settings)
        if has_analytic:
            analytic = closed_form(market, cfg.benefit, cfg.distribution)
            d = set_distance(
                analytic, numeric, clip, shift_a=cfg.validation.perturb_analytic
            )
            max_an = max(max_an, d)
            report.append(f"P={_fmt(price)} analytic-vs-numeric distance {_fmt(d)}")
        if cfg.oracle_n is not None:
            # The empirical CDF carries O(1/sqrt(n)) sampling noise, which
            # spawns spurious roots wherever the true residual is itself
            # below the noise floor (always the case just above alpha = 0,
            # where the residual vanishes at the trivial equilibrium). Clip
            # the comparison at the noise scale.
            oracle_clip = max(clip, 3.0 / math.sqrt(cfg.oracle_n))
            for seed in cfg.oracle_seeds:
                oracle = empirical_oracle(
                    market,
                    cfg.benefit,
                    cfg.distribution,
                    cfg.oracle_n,
                    seed,
                    cfg.settings,
                )
                d = set_distance(numeric, oracle, oracle_clip)
                max_no = max(max_no, d)
                report.append(
                    f"P={_fmt(price)} seed={seed} numeric-vs-oracle distance {_fmt(d)}"
                )
    ok = max_an <= cfg.validation.max_discrepancy and (
        cfg.oracle_n is None or max_no <= cfg.validation.oracle_discrepancy
    )
    report.append(
        f"validation {'OK' if ok else 'FAIL'}: "
        f"max analytic-vs-numeric {_fmt(max_an)}, "
        f"max numeric-vs-oracle {_fmt(max_no)}"
    )
    text = "\n".join(report) + "\n"
    if out is not None:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    elif not quiet:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_plot(cfg: ExperimentConfig, out: str | None, quiet: bool) -> int:
    if cfg.csv_path is None:
        raise ConfigError("plot requires outputs.csv_path in the configuration")
    svg_path = out or cfg.svg_path
    if svg_path is None:
        raise ConfigError("plot requires an SVG path (--out or outputs.svg_path)")
    render_svg(cfg.csv_path, svg_path)
    if not quiet:
        print(f"wrote {svg_path}")
    return EXIT_OK


_COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
    "plot": cmd_plot,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privmarket",
        description="Equilibria of a two-sided data marketplace with "
        "endogenous privacy costs.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="experiment config (JSON)")
    parser.add_argument("--out", default=None, help="output path override")
    parser.add_argument("--grid", type=int, default=None, help="grid points override")
    parser.add_argument("--tol", type=float, default=None, help="tolerance override")
    parser.add_argument("--seed", type=int, default=None, help="oracle seed override")
    parser.add_argument("--quiet", action="store_true", help="suppress progress text")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.grid is not None or args.tol is not None:
            try:
                cfg = replace(
                    cfg,
                    settings=replace(
                        cfg.settings,
                        **{
                            k: v
                            for k, v in {
                                "grid_points": args.grid,
                                "tolerance": args.tol,
                            }.items()
                            if v is not None
                        },
                    ),
                )
            except ValueError as exc:
                raise ConfigError(f"invalid solver override: {exc}") from exc
        if args.seed is not None:
            if cfg.oracle_n is None:
                raise ConfigError("--seed given but the config has no oracle block")
            cfg = replace(cfg, oracle_seeds=(args.seed,))
        return _COMMANDS[args.command](cfg, args.out, args.quiet)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
