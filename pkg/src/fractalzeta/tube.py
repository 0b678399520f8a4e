"""Truncated fractal tube formulas, Minkowski contents, and the measurability verdict.

The tube volume of a compact set with simple complex dimensions expands as

    |A_t| = sum over poles omega of  c_omega * t^(N - omega) / (N - omega),

where ``c_omega`` is the residue of the distance zeta function; the general
term is the residue of ``t^(N-s) zeta(s) / (N - s)`` at ``omega``.  This
module evaluates symmetric truncations of that sum, reports an empirical
tail estimate for the omitted lattice terms, estimates Minkowski contents
and box dimensions from measured tube samples, and renders the
measurability verdict: a set is Minkowski measurable exactly when its box
dimension is the only pole on the critical line and is simple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .dimensions import Pole, _vectorized, conjugate_closed
from .errors import (
    DimensionCollision,
    FractalZetaError,
    InsufficientSamples,
    NonpositiveContent,
)
from .geometry import TubeSample
from .zeta import ClosedFormZeta


@dataclass(frozen=True)
class TubeFormulaSeries:
    """A conjugate-closed, truncated family of complex dimensions.

    ``truncation`` is the lattice cutoff K: each lattice family contributes
    poles with ``|k| <= K`` while real poles are always included.
    ``t_valid_max`` records the range on which the underlying exact formula
    is known to hold (infinity when unknown).
    """

    ambient_dim: int
    poles: tuple[Pole, ...]
    truncation: int
    source: Optional[ClosedFormZeta] = None
    t_valid_max: float = math.inf

    def __post_init__(self):
        for p in self.poles:
            if abs(self.ambient_dim - p.location) < 1e-10:
                raise DimensionCollision(
                    f"pole {p.location} collides with the ambient dimension {self.ambient_dim}"
                )
        if not conjugate_closed(self.poles):
            raise ValueError("series pole list must be closed under conjugation")

    @property
    def real_poles(self) -> tuple[Pole, ...]:
        return tuple(p for p in self.poles if abs(p.location.imag) < 1e-12)

    @property
    def max_real_part(self) -> float:
        return max(p.location.real for p in self.poles)


def series_from_zeta(
    zeta: ClosedFormZeta, truncation: int = 50, t_valid_max: float = math.inf
) -> TubeFormulaSeries:
    """Build the truncated series from a closed form's pole structure."""
    poles = tuple(
        Pole(w, order=1, residue=res) for w, res in zeta.poles_for_truncation(truncation)
    )
    return TubeFormulaSeries(
        ambient_dim=zeta.ambient_dim,
        poles=poles,
        truncation=truncation,
        source=zeta,
        t_valid_max=t_valid_max,
    )


def tube_term(pole: Pole, t: float, ambient_dim: int, evaluator=None) -> complex:
    """One pole's contribution: the residue of ``t^(N-s) zeta(s) / (N-s)``.

    Simple poles use the algebraic form ``c * t^(N-omega) / (N-omega)``
    (complex valued: conjugate pairs are combined by the caller so totals
    come out real).  Higher orders need ``evaluator`` and use contour
    quadrature around the pole.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    n = ambient_dim
    w = pole.location
    if abs(n - w) < 1e-10:
        raise DimensionCollision(f"pole {w} collides with ambient dimension {n}")
    if pole.order == 1:
        if pole.residue is None:
            raise ValueError("simple-pole tube term needs the residue")
        return pole.residue * np.exp((n - w) * math.log(t)) / (n - w)
    if evaluator is None:
        raise ValueError("higher-order tube terms need the zeta evaluator")
    f = _vectorized(evaluator)
    radius = min(0.05, 0.45 * abs(n - w))
    nodes = 512
    theta = 2.0 * math.pi * np.arange(nodes) / nodes
    ring = np.exp(1j * theta)
    s = w + radius * ring
    vals = np.exp((n - s) * math.log(t)) * f(s) / (n - s)
    return radius * complex(np.mean(vals * ring))


def tube_formula_truncated(series: TubeFormulaSeries, t: float) -> float:
    """Evaluate the truncated tube formula at ``t`` (must be a real value).

    Conjugate pairs combine as twice the real part; the total's imaginary
    residue is checked against a 1e-10 relative bound.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if t >= series.t_valid_max:
        raise ValueError(
            f"t={t} is outside the formula's validity range (t < {series.t_valid_max})"
        )
    total = 0.0 + 0.0j
    mag = 0.0
    for p in series.poles:
        if p.location.imag < -1e-12:
            continue  # conjugate partner of an Im > 0 pole
        term = tube_term(p, t, series.ambient_dim, evaluator=series.source)
        if p.location.imag > 1e-12:
            term = 2.0 * term.real + 0.0j
        total += term
        mag = max(mag, abs(term))
    scale = max(abs(total), mag, 1e-300)
    if abs(total.imag) > 1e-10 * scale:
        raise FractalZetaError(
            f"tube formula total has nonvanishing imaginary part {total.imag} (|total|={abs(total)})"
        )
    return float(total.real)


def truncation_tail_estimate(series: TubeFormulaSeries, t: float) -> float:
    """Empirical bound on the omitted lattice terms beyond the truncation.

    Uses the observed power-law decay of the term magnitudes along the
    lattice family; reported, not certified.  Zero when the series has no
    nonreal poles.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    n = series.ambient_dim
    nonreal = [p for p in series.poles if p.location.imag > 1e-12]
    if not nonreal:
        return 0.0
    top = max(nonreal, key=lambda p: p.location.imag)
    half = min(nonreal, key=lambda p: abs(p.location.imag - 0.5 * top.location.imag))

    def term_mag(p: Pole) -> float:
        return (
            abs(p.residue) * t ** (n - p.location.real) / abs(n - p.location)
        )

    m_top = term_mag(top)
    m_half = term_mag(half)
    if m_top <= 0:
        return 0.0
    if m_half > m_top and top.location.imag > half.location.imag * 1.5:
        q = math.log(m_half / m_top) / math.log(top.location.imag / half.location.imag)
    else:
        q = 3.0
    q = max(q, 1.5)
    k_count = sum(1 for p in nonreal)
    # sum_{k>K} k^-q ~ K^(1-q)/(q-1); the K in front counts omitted pairs
    return 2.0 * m_top * k_count / (q - 1.0)


def minkowski_content_from_residue(residue_at_d: float, ambient_dim: int, d: float) -> float:
    """Residue-normalized content ``res / (N - D)``.

    Equals the Minkowski content when the set is measurable; in general the
    residue is only bracketed between the lower and upper contents, so the
    value is reported without a measurability claim.
    """
    if ambient_dim <= d:
        raise ValueError("requires D < N")
    if residue_at_d <= 0:
        raise NonpositiveContent(f"residue {residue_at_d} is not positive")
    return residue_at_d / (ambient_dim - d)


def _smallest_decade(samples: Sequence[TubeSample]) -> list[TubeSample]:
    ts = [s.t for s in samples]
    if len(samples) < 16:
        raise InsufficientSamples("need at least 16 samples")
    if max(ts) / min(ts) < 100.0 * (1.0 - 1e-9):
        raise InsufficientSamples("samples must span at least two decades of t")
    t_min = min(ts)
    picked = [s for s in samples if s.t <= 10.0 * t_min * (1.0 + 1e-12)]
    if len(picked) < 4:
        raise InsufficientSamples("too few samples in the smallest decade")
    return picked


def content_bounds_estimate(
    samples: Sequence[TubeSample], r: float, ambient_dim: int
) -> tuple[float, float]:
    """Finite-scale proxies for the lower and upper r-dimensional contents.

    Min and max of ``|A_t| / t^(N-r)`` over the smallest sampled decade;
    these approximate liminf and limsup of the content quotient.
    """
    picked = _smallest_decade(samples)
    vals = [s.volume / s.t ** (ambient_dim - r) for s in picked]
    return min(vals), max(vals)


def box_dimension_fit(samples: Sequence[TubeSample], ambient_dim: int) -> float:
    """``N - slope`` of the least-squares fit of ``ln |A_t|`` against ``ln t``.

    The fit uses the smallest sampled decade, where the leading power law
    dominates.
    """
    picked = _smallest_decade(samples)
    ln_t = np.log([s.t for s in picked])
    ln_v = np.log([max(s.volume, 1e-300) for s in picked])
    slope, _ = np.polyfit(ln_t, ln_v, 1)
    return float(ambient_dim - slope)


class Verdict(str, Enum):
    MEASURABLE = "measurable"
    NOT_MEASURABLE = "not_measurable"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class MeasurabilityVerdict:
    """Outcome of the measurability criterion at dimension ``D``.

    ``content`` is present exactly when the verdict is measurable.  Notes
    record the hypotheses that were assumed rather than machine-verified
    (screen placement, languidity) plus any attached evidence.
    """

    verdict: Verdict
    dimension: float
    critical_line_poles: tuple[Pole, ...]
    content: Optional[float] = None
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if (self.verdict == Verdict.MEASURABLE) != (self.content is not None):
            raise ValueError("content must be present iff the verdict is measurable")


def measurability_criterion(
    poles: Sequence[Pole],
    d: float,
    tol: float,
    *,
    ambient_dim: int,
    band_height: Optional[float] = None,
    lattice_period: Optional[float] = None,
    languidity_kappa: Optional[float] = None,
) -> MeasurabilityVerdict:
    """Measurability verdict from the poles near the critical line.

    Measurable iff exactly one pole lies within ``tol`` of the line
    ``Re s = d`` and that pole is real (within tol) and simple.  Two or
    more such poles, or a nonsimple one, give not-measurable.  A pole
    straddling the tolerance boundary, a search band narrower than one
    lattice period, or an empty critical line give inconclusive.

    The screen/languidity hypotheses of the underlying criterion are not
    machine-verified; they are recorded in the notes (with the probe's
    kappa when supplied).
    """
    if d >= ambient_dim:
        raise ValueError("criterion requires D < N")
    notes = [
        "screen and languidity hypotheses assumed, not machine-verified",
    ]
    if languidity_kappa is not None:
        notes.append(f"languidity probe: fitted kappa = {languidity_kappa:.6g}")

    critical = tuple(p for p in poles if abs(p.location.real - d) <= tol)
    straddling = [p for p in poles if tol < abs(p.location.real - d) <= 2.0 * tol]
    if straddling:
        notes.append(f"{len(straddling)} pole(s) straddle the tolerance boundary at {tol}")
        return MeasurabilityVerdict(Verdict.INCONCLUSIVE, d, critical, notes=tuple(notes))
    if band_height is not None and lattice_period is not None and band_height < lattice_period:
        notes.append("search band narrower than one lattice period")
        return MeasurabilityVerdict(Verdict.INCONCLUSIVE, d, critical, notes=tuple(notes))
    if not critical:
        notes.append("no pole found on the critical line; D may be inconsistent with the poles")
        return MeasurabilityVerdict(Verdict.INCONCLUSIVE, d, critical, notes=tuple(notes))
    if len(critical) > 1 or critical[0].order > 1:
        notes.append("nonreal poles (or a multiple pole) on the critical line force oscillations")
        return MeasurabilityVerdict(Verdict.NOT_MEASURABLE, d, critical, notes=tuple(notes))
    lone = critical[0]
    if abs(lone.location.imag) > tol:
        notes.append("the lone critical-line pole is not real")
        return MeasurabilityVerdict(Verdict.NOT_MEASURABLE, d, critical, notes=tuple(notes))
    if lone.residue is None or lone.residue.real <= 0 or abs(lone.residue.imag) > tol * max(
        1.0, abs(lone.residue)
    ):
        notes.append("residue at D unavailable or not positive real; content undetermined")
        return MeasurabilityVerdict(Verdict.INCONCLUSIVE, d, critical, notes=tuple(notes))
    content = minkowski_content_from_residue(lone.residue.real, ambient_dim, d)
    return MeasurabilityVerdict(Verdict.MEASURABLE, d, critical, content=content, notes=tuple(notes))


# ---------------------------------------------------------------------------
# Formula-vs-oracle comparison
# ---------------------------------------------------------------------------

_EPS_MACHINE = float(np.finfo(float).eps)


@dataclass(frozen=True)
class ComparisonRow:
    t: float
    direct_volume: float
    formula_value: float
    abs_error: float
    rel_error: float


@dataclass(frozen=True)
class TubeComparison:
    """Paired (direct oracle, truncated formula) samples for validation."""

    rows: tuple[ComparisonRow, ...]
    set_id: str
    truncation: int
    oracle_method: str

    @property
    def max_rel_error(self) -> float:
        return max(r.rel_error for r in self.rows)

    def summary(self) -> dict:
        return {
            "set_id": self.set_id,
            "truncation": self.truncation,
            "oracle_method": self.oracle_method,
            "max_rel_error": self.max_rel_error,
            "rows": len(self.rows),
        }


def compare_tube_formula(
    series: TubeFormulaSeries,
    samples: Sequence[TubeSample],
    set_id: str = "",
) -> TubeComparison:
    """Tabulate the truncated formula against direct tube-volume samples."""
    rows = []
    methods = set()
    for s in samples:
        formula = tube_formula_truncated(series, s.t)
        abs_err = abs(s.volume - formula)
        rel_err = abs_err / max(s.volume, _EPS_MACHINE)
        rows.append(ComparisonRow(s.t, s.volume, formula, abs_err, rel_err))
        methods.add(s.method.value)
    return TubeComparison(
        rows=tuple(rows),
        set_id=set_id,
        truncation=series.truncation,
        oracle_method=",".join(sorted(methods)),
    )
