"""Command-line front end.

Subcommands: ``catalog`` (known sets and their dimensions), ``zeta-eval``
(zeta values on a grid of s), ``poles`` (complex dimensions), ``tube-compare``
(truncated tube formula against a direct oracle), ``measurability``
(criterion verdict).  All runs are driven by a JSON experiment config with
a mandatory seed; identical config and seed give byte-identical outputs.

Exit codes: 0 success, 1 numeric threshold breached, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import geometry, zeta
from .dimensions import Pole, languidity_probe
from .errors import FractalZetaError
from .geometry import CompactSet, set_from_json
from .tube import (
    compare_tube_formula,
    measurability_criterion,
    series_from_zeta,
)
from .zeta import NumericZetaConfig, catalog_zeta, closed_form_eval, default_delta


def _fmt(x: float) -> str:
    """17 significant digits: guarantees float round-trip in CSV output."""
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# Experiment configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TGrid:
    min: float
    max: float
    count: int
    log: bool = True

    def values(self) -> np.ndarray:
        if self.min <= 0 or self.max <= self.min or self.count < 1:
            raise ValueError("t grid needs 0 < min < max and count >= 1")
        if self.log:
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class ExperimentConfig:
    """Reproducible run description; round-trips losslessly through JSON."""

    set: dict
    seed: int
    delta: Optional[float] = None
    mc_samples: int = 1_000_000
    quadrature_points: int = 64
    t_grid: TGrid = TGrid(1e-3, 1e-1, 16, True)
    truncation: int = 50
    band: float = 20.0
    oracle: str = "auto"
    grid_cell: Optional[float] = None
    rel_error_threshold: float = 1e-2
    zeta_method: str = "closed_form"
    s_values: tuple[tuple[float, float], ...] = ()
    out_dir: str = "out"

    def __post_init__(self):
        if self.mc_samples <= 0 or self.quadrature_points <= 0 or self.truncation < 0:
            raise ValueError("numeric budgets must be positive")
        if self.band <= 0:
            raise ValueError("band must be positive")
        if self.rel_error_threshold <= 0:
            raise ValueError("rel_error_threshold must be positive")
        if self.zeta_method not in ("closed_form", "monte_carlo"):
            raise ValueError("zeta_method must be closed_form or monte_carlo")

    def the_set(self) -> CompactSet:
        return set_from_json(self.set)

    def the_delta(self) -> float:
        return self.delta if self.delta is not None else default_delta(self.the_set())

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        d["t_grid"] = dataclasses.asdict(self.t_grid)
        d["s_values"] = [list(sv) for sv in self.s_values]
        return d

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        if "set" not in data or "seed" not in data:
            raise ValueError("config requires 'set' and 'seed'")
        kwargs = dict(data)
        if "t_grid" in kwargs and isinstance(kwargs["t_grid"], dict):
            kwargs["t_grid"] = TGrid(**kwargs["t_grid"])
        if "s_values" in kwargs:
            kwargs["s_values"] = tuple(tuple(float(v) for v in sv) for sv in kwargs["s_values"])
        return cls(**kwargs)


def _load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        return ExperimentConfig.from_json(json.load(fh))


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Catalog metadata
# ---------------------------------------------------------------------------

_CATALOG = [
    {
        "variant": "point_set",
        "dimension": 0.0,
        "oscillatory_period": None,
        "delta_bound": "half the minimal point separation (none for a single point)",
    },
    {
        "variant": "cantor_like",
        "dimension": math.log(2.0) / math.log(3.0),
        "oscillatory_period": 2.0 * math.pi / math.log(3.0),
        "delta_bound": "half the largest gap: (1 - 2 ratio) * scale / 2",
    },
    {
        "variant": "string_boundary",
        "dimension": math.log(2.0) / math.log(3.0),
        "oscillatory_period": 2.0 * math.pi / math.log(3.0),
        "delta_bound": "half the first length: l_1 / 2",
    },
    {
        "variant": "sierpinski_gasket",
        "dimension": math.log(3.0) / math.log(2.0),
        "oscillatory_period": 2.0 * math.pi / math.log(2.0),
        "delta_bound": "1 / (4 sqrt 3)",
    },
    {
        "variant": "sierpinski_carpet_3d",
        "dimension": math.log(26.0) / math.log(3.0),
        "oscillatory_period": 2.0 * math.pi / math.log(3.0),
        "delta_bound": "1/6",
    },
]


def cmd_catalog(args) -> int:
    entries = [dict(e) for e in _CATALOG]
    if args.json:
        print(json.dumps(entries, indent=2, sort_keys=True))
        return 0
    print(f"{'variant':<22} {'dim D':>10} {'period p':>10}  delta bound")
    for e in entries:
        p = f"{e['oscillatory_period']:.6f}" if e["oscillatory_period"] else "-"
        print(f"{e['variant']:<22} {e['dimension']:>10.6f} {p:>10}  {e['delta_bound']}")
    print("(dimensions for the default parameters: middle-third Cantor, Cantor string)")
    return 0


# ---------------------------------------------------------------------------
# zeta-eval
# ---------------------------------------------------------------------------


def cmd_zeta_eval(cfg: ExperimentConfig, out_dir: Path) -> int:
    set_ = cfg.the_set()
    delta = cfg.the_delta()
    if not cfg.s_values:
        raise ValueError("zeta-eval needs s_values in the config")
    rows = []
    if cfg.zeta_method == "closed_form":
        form = catalog_zeta(set_, delta)
        for re_s, im_s in cfg.s_values:
            val = closed_form_eval(form, complex(re_s, im_s))
            rows.append((re_s, im_s, val.real, val.imag, 0.0))
    else:
        ncfg = NumericZetaConfig(
            delta=delta, seed=cfg.seed, mc_samples=cfg.mc_samples,
            quadrature_points=cfg.quadrature_points,
        )
        for re_s, im_s in cfg.s_values:
            est = zeta.distance_zeta_numeric(set_, complex(re_s, im_s), ncfg)
            rows.append((re_s, im_s, est.value.real, est.value.imag, est.half_width))
    out = out_dir / "zeta_eval.csv"
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re_s", "im_s", "re_zeta", "im_zeta", "half_width"])
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    print(f"wrote {out} ({len(rows)} rows, method={cfg.zeta_method})")
    return 0


# ---------------------------------------------------------------------------
# poles
# ---------------------------------------------------------------------------


def _pole_to_json(p: Pole) -> dict:
    d = {
        "re": p.location.real,
        "im": p.location.imag,
        "order": p.order,
    }
    if p.residue is not None:
        d["residue_re"] = p.residue.real
        d["residue_im"] = p.residue.imag
    return d


def cmd_poles(cfg: ExperimentConfig, out_dir: Path) -> int:
    set_ = cfg.the_set()
    form = catalog_zeta(set_, cfg.the_delta())
    pole_list = [Pole(w, order=1, residue=r) for w, r in form.poles(cfg.band)]
    pole_list.sort(key=lambda p: (round(p.location.real * 1e9), p.location.imag))
    out = out_dir / "poles.json"
    _dump_json([_pole_to_json(p) for p in pole_list], out)
    print(f"{'Re':>14} {'Im':>14} {'order':>5} {'residue':>24}")
    for p in pole_list:
        res = f"{p.residue.real:.8g}{p.residue.imag:+.8g}i" if p.residue is not None else "-"
        print(f"{p.location.real:>14.8f} {p.location.imag:>14.8f} {p.order:>5} {res:>24}")
    print(f"wrote {out} ({len(pole_list)} poles in |Im s| <= {cfg.band})")
    return 0


# ---------------------------------------------------------------------------
# tube-compare
# ---------------------------------------------------------------------------

_T_VALID = {
    geometry.SierpinskiGasket: 1.0 / (2.0 * math.sqrt(3.0)),
    geometry.SierpinskiCarpet3D: 0.5,
}


def _t_valid_max(set_: CompactSet) -> float:
    for klass, bound in _T_VALID.items():
        if isinstance(set_, klass):
            return bound
    if isinstance(set_, geometry.FractalStringBoundary):
        if set_.is_self_similar:
            return set_.first_length / 2.0
        # a finite string's zeta only has the pole at 0; the residue sum
        # reproduces |A_t| on the first linear piece, below half the
        # smallest length
        return min(set_.lengths) / 2.0
    if isinstance(set_, geometry.CantorLike):
        return set_.largest_gap / 2.0
    if isinstance(set_, geometry.PointSet):
        gap = set_.min_gap()
        return math.inf if gap == math.inf else gap / 2.0
    return math.inf


def write_tube_samples_csv(samples, path: Path) -> None:
    """TubeSample rows as CSV: (t, volume, method, error_bound)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "volume", "method", "error_bound"])
        for s in samples:
            w.writerow([_fmt(s.t), _fmt(s.volume), s.method.value, _fmt(s.error_bound)])


def cmd_tube_compare(cfg: ExperimentConfig, out_dir: Path) -> int:
    set_ = cfg.the_set()
    form = catalog_zeta(set_, cfg.the_delta())
    series = series_from_zeta(form, truncation=cfg.truncation, t_valid_max=_t_valid_max(set_))
    method = None if cfg.oracle == "auto" else cfg.oracle
    kwargs = {}
    if cfg.grid_cell is not None:
        kwargs["cell"] = cfg.grid_cell
    samples = geometry.sample_tube_curve(
        set_, cfg.t_grid.values(), method=method, mc_samples=cfg.mc_samples, seed=cfg.seed, **kwargs
    )
    write_tube_samples_csv(samples, out_dir / "tube_samples.csv")
    comparison = compare_tube_formula(series, samples, set_id=cfg.set.get("variant", "custom"))

    csv_path = out_dir / "tube_compare.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "direct_volume", "formula_value", "abs_error", "rel_error"])
        for r in comparison.rows:
            w.writerow([_fmt(r.t), _fmt(r.direct_volume), _fmt(r.formula_value),
                        _fmt(r.abs_error), _fmt(r.rel_error)])
    summary = comparison.summary()
    summary["rel_error_threshold"] = cfg.rel_error_threshold
    summary["passed"] = comparison.max_rel_error <= cfg.rel_error_threshold
    _dump_json(summary, out_dir / "tube_compare_summary.json")
    print(
        f"max rel error {comparison.max_rel_error:.3e} vs threshold "
        f"{cfg.rel_error_threshold:.3e} over {len(comparison.rows)} points (K={cfg.truncation})"
    )
    return 0 if summary["passed"] else 1


# ---------------------------------------------------------------------------
# measurability
# ---------------------------------------------------------------------------


def cmd_measurability(cfg: ExperimentConfig, out_dir: Path) -> int:
    set_ = cfg.the_set()
    form = catalog_zeta(set_, cfg.the_delta())
    periods = form.lattice_periods()
    band = max([cfg.band] + [2.5 * p for p in periods])
    pole_list = [Pole(w, order=1, residue=r) for w, r in form.poles(band)]
    d = max(p.location.real for p in pole_list)
    kappa = None
    try:
        probe = languidity_probe(form, d + 0.5, list(np.geomspace(10.0, 1000.0, 16)))
        kappa = probe.kappa
    except FractalZetaError:
        pass
    verdict = measurability_criterion(
        pole_list, d, 1e-6,
        ambient_dim=set_.ambient_dim,
        band_height=band,
        lattice_period=min(periods) if periods else None,
        languidity_kappa=kappa,
    )
    report = {
        "verdict": verdict.verdict.value,
        "dimension": verdict.dimension,
        "content": verdict.content,
        "critical_line_poles": [_pole_to_json(p) for p in verdict.critical_line_poles],
        "notes": list(verdict.notes),
    }
    _dump_json(report, out_dir / "measurability.json")
    print(f"verdict: {verdict.verdict.value} at D = {d:.10g}")
    if verdict.content is not None:
        print(f"Minkowski content: {verdict.content:.10g}")
    for p in verdict.critical_line_poles:
        print(f"  critical-line pole {p.location.real:.8f} {p.location.imag:+.8f}i (order {p.order})")
    for note in verdict.notes:
        print(f"  note: {note}")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fractalzeta",
        description="fractal zeta functions, complex dimensions, and tube formulas",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p_cat = sub.add_parser("catalog", help="list catalog sets with D, period, delta bounds")
    p_cat.add_argument("--json", action="store_true", help="machine-readable listing")

    for name, help_ in [
        ("zeta-eval", "evaluate the zeta function on a grid of s values"),
        ("poles", "extract complex dimensions in a band"),
        ("tube-compare", "compare the truncated tube formula against a direct oracle"),
        ("measurability", "render the Minkowski measurability verdict"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out-dir", default=None, help="override the config output directory")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    if args.command == "catalog":
        return cmd_catalog(args)
    try:
        cfg = _load_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.out_dir is not None:
            cfg = dataclasses.replace(cfg, out_dir=args.out_dir)
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "zeta-eval":
            return cmd_zeta_eval(cfg, out_dir)
        if args.command == "poles":
            return cmd_poles(cfg, out_dir)
        if args.command == "tube-compare":
            return cmd_tube_compare(cfg, out_dir)
        if args.command == "measurability":
            return cmd_measurability(cfg, out_dir)
        raise ValueError(f"unknown command {args.command}")
    except (ValueError, KeyError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FractalZetaError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
