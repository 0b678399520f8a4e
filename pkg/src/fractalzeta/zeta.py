"""Distance and tube zeta functions: numeric evaluators and closed forms.

The distance zeta function of a compact set ``A`` in R^N is
``zeta_A(s; delta) = integral over A_delta of d(x, A)^(s-N) dx`` and the
tube zeta function is ``ztilde_A(s; delta) = integral_0^delta t^(s-N-1)
|A_t| dt``; both are holomorphic for ``Re s`` above the upper box dimension
and satisfy the functional equation

    zeta_A(s; delta) = delta^(s-N) |A_delta| + (N - s) ztilde_A(s; delta).

Catalog sets carry structured meromorphic closed forms built from two term
shapes:

* lattice terms ``a * beta^(-s) / (prod_rho (s - rho) * (m^s - r))`` whose
  lattice factor generates the arithmetic progression of complex
  dimensions ``log_m r + (2 pi k / ln m) i``;
* elementary terms ``c * delta^(s-j) / (s - p)``.

All complex powers use the principal branch on positive real bases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import geometry
from .errors import (
    DeltaTooSmall,
    NearPole,
    NoClosedForm,
    NotAPole,
    QuadratureNonconvergent,
    VarianceOverflow,
)
from .geometry import CompactSet, bounding_box, distances_to_set, tube_volume

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Closed-form representation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeTerm:
    """``amplitude * base_scale^(-s) / (prod (s - rho) * (m^s - r))``.

    ``lattice=None`` drops the ``(m^s - r)`` factor, which is how finite
    fractal strings (entire geometric zeta functions) are represented.
    """

    amplitude: float
    base_scale: float
    roots: tuple[float, ...]
    lattice: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.base_scale <= 0:
            raise ValueError("base_scale must be positive")
        if len(set(self.roots)) != len(self.roots):
            raise ValueError("denominator roots must be distinct")
        if self.lattice is not None:
            m, r = self.lattice
            if m <= 1.0 or r <= 0.0:
                raise ValueError("lattice needs m > 1 and r > 0")
            for rho in self.roots:
                if abs(m**rho - r) < 1e-12:
                    raise ValueError(
                        f"denominator root {rho} coincides with a lattice pole; "
                        "only simple poles are supported"
                    )

    @property
    def period(self) -> float:
        return TWO_PI / math.log(self.lattice[0])

    def lattice_pole(self, k: int) -> complex:
        m, r = self.lattice
        return math.log(r) / math.log(m) + 1j * self.period * k


@dataclass(frozen=True)
class ElementaryTerm:
    """``coefficient * delta^(s - shift) / (s - pole)``."""

    coefficient: float
    shift: int
    pole: float


@dataclass(frozen=True)
class ClosedFormZeta:
    """Structured meromorphic representation of a distance zeta function."""

    ambient_dim: int
    delta: float
    lattice_terms: tuple[LatticeTerm, ...] = ()
    elementary_terms: tuple[ElementaryTerm, ...] = ()

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")

    # -- evaluation ---------------------------------------------------------

    def _evaluate_raw(self, s: np.ndarray) -> np.ndarray:
        total = np.zeros(s.shape, dtype=complex)
        for term in self.lattice_terms:
            val = term.amplitude * np.exp(-s * math.log(term.base_scale))
            den = np.ones(s.shape, dtype=complex)
            for rho in term.roots:
                den = den * (s - rho)
            if term.lattice is not None:
                m, r = term.lattice
                den = den * (np.exp(s * math.log(m)) - r)
            total = total + val / den
        ln_delta = math.log(self.delta)
        for term in self.elementary_terms:
            total = total + term.coefficient * np.exp((s - term.shift) * ln_delta) / (s - term.pole)
        return total

    def evaluate(self, s):
        """Evaluate at a complex scalar or ndarray of points.

        Removable candidates (pole locations whose term residues cancel,
        e.g. the gasket form at ``s = 1``) are filled in by their limit;
        genuine poles evaluate to complex infinity.
        """
        s = np.asarray(s, dtype=complex)
        scalar = not s.shape
        s = np.atleast_1d(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            total = self._evaluate_raw(s)
        bad = ~np.isfinite(total)
        if bad.any():
            scale = self._residue_scale()
            for i in np.nonzero(bad)[0]:
                si = complex(s[i])
                try:
                    res = self.residue_at(si, tol=1e-9)
                except NotAPole:
                    total[i] = complex(np.inf, np.inf)
                    continue
                if abs(res) > 1e-11 * scale:
                    total[i] = complex(np.inf, np.inf)
                else:
                    # removable point: second-order symmetric limit
                    h = 1e-7 * (1.0 + abs(si))
                    probes = si + np.array([h, -h, 1j * h, -1j * h])
                    with np.errstate(divide="ignore", invalid="ignore"):
                        total[i] = complex(np.mean(self._evaluate_raw(probes)))
        if scalar:
            return complex(total[0])
        return total

    __call__ = evaluate

    def derivative(self, s):
        """Exact term-wise derivative (for Newton refinement of poles)."""
        s = np.asarray(s, dtype=complex)
        total = np.zeros(s.shape, dtype=complex)
        for term in self.lattice_terms:
            lnb = math.log(term.base_scale)
            num = term.amplitude * np.exp(-s * lnb)
            den = np.ones(s.shape, dtype=complex)
            logd = np.zeros(s.shape, dtype=complex)
            for rho in term.roots:
                den = den * (s - rho)
                logd = logd + 1.0 / (s - rho)
            if term.lattice is not None:
                m, r = term.lattice
                ms = np.exp(s * math.log(m))
                den = den * (ms - r)
                logd = logd + math.log(m) * ms / (ms - r)
            total = total + num / den * (-lnb - logd)
        ln_delta = math.log(self.delta)
        for term in self.elementary_terms:
            f = term.coefficient * np.exp((s - term.shift) * ln_delta) / (s - term.pole)
            total = total + f * (ln_delta - 1.0 / (s - term.pole))
        return total if total.shape else complex(total)

    # -- pole structure -----------------------------------------------------

    def _candidates(self, imag_band: float, lattice_k: Optional[int] = None) -> list[complex]:
        locs: list[complex] = []
        for term in self.lattice_terms:
            locs.extend(complex(rho) for rho in term.roots)
            if term.lattice is not None:
                if lattice_k is not None:
                    kmax = lattice_k
                else:
                    kmax = int(math.floor(imag_band / term.period + 1e-12))
                locs.extend(term.lattice_pole(k) for k in range(-kmax, kmax + 1))
        locs.extend(complex(term.pole) for term in self.elementary_terms)
        uniq: list[complex] = []
        for w in sorted(locs, key=lambda z: (z.real, z.imag)):
            if not uniq or abs(w - uniq[-1]) > 1e-12:
                uniq.append(w)
        if lattice_k is None:
            uniq = [w for w in uniq if abs(w.imag) <= imag_band + 1e-12]
        return uniq

    def residue_at(self, omega: complex, tol: float = 1e-9) -> complex:
        """Residue at a candidate pole by term-wise simple-pole algebra.

        Raises :class:`NotAPole` if ``omega`` is not within ``tol`` of any
        structural pole candidate.  A zero return value means the candidate
        cancels between terms and is a removable point.
        """
        omega = complex(omega)
        res = 0.0 + 0.0j
        matched = False
        for term in self.lattice_terms:
            m_r = term.lattice
            for rho in term.roots:
                if abs(omega - rho) <= tol:
                    matched = True
                    qprime = 1.0
                    for other in term.roots:
                        if other != rho:
                            qprime *= rho - other
                    den = qprime
                    if m_r is not None:
                        m, r = m_r
                        den *= m**rho - r
                    res += term.amplitude * term.base_scale ** (-rho) / den
            if m_r is not None:
                m, r = m_r
                k = round(omega.imag / term.period)
                wk = term.lattice_pole(k)
                if abs(omega - wk) <= tol:
                    matched = True
                    q = 1.0 + 0.0j
                    for rho in term.roots:
                        q *= wk - rho
                    res += (
                        term.amplitude
                        * np.exp(-wk * math.log(term.base_scale))
                        / (q * math.log(m) * r)
                    )
        for term in self.elementary_terms:
            if abs(omega - term.pole) <= tol:
                matched = True
                res += term.coefficient * self.delta ** (term.pole - term.shift)
        if not matched:
            raise NotAPole(f"{omega} is not a pole candidate of this closed form")
        return complex(res)

    def _residue_scale(self) -> float:
        mags = [abs(t.amplitude) for t in self.lattice_terms]
        mags += [abs(t.coefficient) for t in self.elementary_terms]
        return max(1.0, *mags) if mags else 1.0

    def poles(self, imag_band: float, drop_tol: float = 1e-11) -> list[tuple[complex, complex]]:
        """(location, residue) pairs with ``|Im| <= imag_band``.

        Candidates whose residues cancel between terms (removable points)
        are dropped.
        """
        scale = self._residue_scale()
        out = []
        for w in self._candidates(imag_band):
            res = self.residue_at(w)
            if abs(res) > drop_tol * scale:
                out.append((w, res))
        return out

    def poles_for_truncation(self, k_band: int, drop_tol: float = 1e-11) -> list[tuple[complex, complex]]:
        """All real poles plus lattice poles with ``|k| <= k_band`` per family."""
        scale = self._residue_scale()
        out = []
        for w in self._candidates(0.0, lattice_k=k_band):
            res = self.residue_at(w)
            if abs(res) > drop_tol * scale:
                out.append((w, res))
        return out

    def nearest_pole_distance(self, s: complex) -> float:
        """Distance to the nearest genuine pole (removable candidates excluded)."""
        s = complex(s)
        scale = self._residue_scale()
        candidates: list[complex] = []
        for term in self.lattice_terms:
            candidates.extend(complex(rho) for rho in term.roots)
            if term.lattice is not None:
                k = round(s.imag / term.period)
                candidates.extend(term.lattice_pole(kk) for kk in (k - 1, k, k + 1))
        candidates.extend(complex(term.pole) for term in self.elementary_terms)
        best = math.inf
        for w in candidates:
            if abs(self.residue_at(w)) > 1e-11 * scale:
                best = min(best, abs(s - w))
        return best

    def lattice_periods(self) -> list[float]:
        return [t.period for t in self.lattice_terms if t.lattice is not None]


def closed_form_eval(zeta: ClosedFormZeta, s: complex) -> complex:
    """Evaluate a closed form away from its poles.

    Raises :class:`NearPole` when ``s`` is within 1e-12 of a pole; residue
    machinery must be used there instead.
    """
    if zeta.nearest_pole_distance(s) < 1e-12:
        raise NearPole(f"s={s} is within 1e-12 of a pole")
    return complex(zeta.evaluate(s))


def scale_zeta(zeta: ClosedFormZeta, lam: float) -> ClosedFormZeta:
    """Representation of ``s -> lam^s * zeta(s)`` with delta replaced by lam*delta.

    This is the zeta function of the set scaled by ``lam``: pole locations
    are unchanged and each simple-pole residue is multiplied by
    ``lam**omega``.
    """
    if lam <= 0:
        raise ValueError("scaling factor must be positive")
    lat = tuple(
        LatticeTerm(t.amplitude, t.base_scale / lam, t.roots, t.lattice) for t in zeta.lattice_terms
    )
    ele = tuple(
        ElementaryTerm(t.coefficient * lam**t.shift, t.shift, t.pole) for t in zeta.elementary_terms
    )
    return ClosedFormZeta(zeta.ambient_dim, zeta.delta * lam, lat, ele)


# ---------------------------------------------------------------------------
# Catalog closed forms
# ---------------------------------------------------------------------------


def default_delta(set_: CompactSet) -> float:
    """Default integration cutoff per catalog set (all above the closed-form bounds)."""
    if isinstance(set_, geometry.SierpinskiGasket):
        return 0.5
    if isinstance(set_, geometry.SierpinskiCarpet3D):
        return 0.25
    if isinstance(set_, geometry.FractalStringBoundary):
        return set_.first_length
    if isinstance(set_, geometry.CantorLike):
        return set_.scale / 2.0
    return 1.0


def _sphere_area(n: int) -> float:
    # surface measure of the unit sphere S^(n-1)
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def catalog_zeta(set_: CompactSet, delta: Optional[float] = None) -> ClosedFormZeta:
    """Closed-form distance zeta function for a catalog set.

    Raises :class:`NoClosedForm` for point clouds and
    :class:`DeltaTooSmall` when ``delta`` violates the validity bound of
    the closed form (gasket ``1/(4 sqrt 3)``, carpet ``1/6``, strings and
    Cantor sets half their largest gap, point sets half the minimal point
    separation).
    """
    if isinstance(set_, geometry.PointCloud):
        raise NoClosedForm("point clouds have no canonical closed-form zeta function")
    if delta is None:
        delta = default_delta(set_)
    if delta <= 0:
        raise ValueError("delta must be positive")

    if isinstance(set_, geometry.PointSet):
        n = len(set_.points)
        dim = set_.ambient_dim
        if n > 1 and delta > set_.min_gap() / 2.0:
            raise DeltaTooSmall(
                "delta exceeds half the minimal point separation; balls overlap and the "
                "closed form no longer holds"
            )
        coeff = n * _sphere_area(dim)
        return ClosedFormZeta(dim, delta, (), (ElementaryTerm(coeff, 0, 0.0),))

    if isinstance(set_, geometry.CantorLike):
        bound = set_.largest_gap / 2.0
        if delta < bound:
            raise DeltaTooSmall(f"CantorLike closed form needs delta >= {bound}")
        m = 1.0 / set_.ratio
        beta = 2.0 * set_.ratio / ((1.0 - 2.0 * set_.ratio) * set_.scale)
        lat = LatticeTerm(2.0, beta, (0.0,), (m, 2.0))
        return ClosedFormZeta(1, delta, (lat,), (ElementaryTerm(2.0, 0, 0.0),))

    if isinstance(set_, geometry.FractalStringBoundary):
        bound = set_.first_length / 2.0
        if delta <= bound:
            raise DeltaTooSmall(f"string-boundary closed form needs delta > {bound}")
        ele = (ElementaryTerm(2.0, 0, 0.0),)
        if set_.is_self_similar:
            if set_.multiplicity == 1:
                raise NoClosedForm(
                    "multiplicity-1 strings put a double pole at s = 0, outside the "
                    "supported simple-pole term shapes"
                )
            lat = LatticeTerm(2.0, 2.0 / set_.scale, (0.0,), (set_.base, float(set_.multiplicity)))
            return ClosedFormZeta(1, delta, (lat,), ele)
        groups: dict[float, int] = {}
        for l in set_.lengths:
            groups[l] = groups.get(l, 0) + 1
        lat_terms = tuple(
            LatticeTerm(2.0 * count, 2.0 / l, (0.0,), None) for l, count in sorted(groups.items())
        )
        return ClosedFormZeta(1, delta, lat_terms, ele)

    if isinstance(set_, geometry.SierpinskiGasket):
        bound = 1.0 / (4.0 * math.sqrt(3.0))
        if delta <= bound:
            raise DeltaTooSmall(f"gasket closed form needs delta > {bound}")
        lat = LatticeTerm(6.0 * math.sqrt(3.0), 2.0 * math.sqrt(3.0), (0.0, 1.0), (2.0, 3.0))
        ele = (ElementaryTerm(2.0 * math.pi, 0, 0.0), ElementaryTerm(3.0, 1, 1.0))
        return ClosedFormZeta(2, delta, (lat,), ele)

    if isinstance(set_, geometry.SierpinskiCarpet3D):
        bound = 1.0 / 6.0
        if delta <= bound:
            raise DeltaTooSmall(f"3D carpet closed form needs delta > {bound}")
        lat = LatticeTerm(48.0, 2.0, (0.0, 1.0, 2.0), (3.0, 26.0))
        ele = (
            ElementaryTerm(4.0 * math.pi, 0, 0.0),
            ElementaryTerm(6.0 * math.pi, 1, 1.0),
            ElementaryTerm(6.0, 2, 2.0),
        )
        return ClosedFormZeta(3, delta, (lat,), ele)

    raise NoClosedForm(f"no closed form for {type(set_).__name__}")


# ---------------------------------------------------------------------------
# Numeric evaluators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NumericZetaConfig:
    """Budgets and seed for the numeric zeta evaluators."""

    delta: float
    seed: int
    mc_samples: int = 1_000_000
    quadrature_points: int = 64

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.mc_samples < 1000:
            raise ValueError("mc_samples must be at least 1000 for any reported value")
        if self.quadrature_points < 64:
            raise ValueError("quadrature_points must be at least 64")


class ZetaEstimate(NamedTuple):
    value: complex
    half_width: float


_MC_CHUNK = 1 << 17


def distance_zeta_numeric(set_: CompactSet, s: complex, cfg: NumericZetaConfig) -> ZetaEstimate:
    """Monte Carlo estimate of the distance zeta function.

    Samples uniformly in a bounding box of ``A_delta`` and averages
    ``1[d < delta] * d^(s - N)``; exact zeros of ``d`` are discarded (they
    occur with probability zero on the measure-zero sets of interest).
    Raises :class:`VarianceOverflow` when a single sample dominates the
    weight sum, the signature of ``Re s`` at or below the abscissa of
    convergence.
    """
    s = complex(s)
    n_dim = set_.ambient_dim
    delta = cfg.delta
    lo, hi = bounding_box(set_)
    lo = lo - delta
    hi = hi + delta
    box_vol = float(np.prod(hi - lo))
    total = 0.0 + 0.0j
    total_sq_re = 0.0
    total_sq_im = 0.0
    abs_sum = 0.0
    abs_max = 0.0
    n_done = 0
    stream = 0
    while n_done < cfg.mc_samples:
        g = np.random.Generator(np.random.Philox(np.random.SeedSequence((int(cfg.seed), stream))))
        stream += 1
        m = min(_MC_CHUNK, cfg.mc_samples - n_done)
        x = lo + (hi - lo) * g.random((m, n_dim))
        d = distances_to_set(x, set_, eps=min(1e-12, delta * 1e-9))
        w = np.zeros(m, dtype=complex)
        ok = (d > 1e-280) & (d < delta)
        w[ok] = np.exp((s - n_dim) * np.log(d[ok]))
        total += w.sum()
        total_sq_re += float((w.real**2).sum())
        total_sq_im += float((w.imag**2).sum())
        aw = np.abs(w)
        abs_sum += float(aw.sum())
        abs_max = max(abs_max, float(aw.max(initial=0.0)))
        n_done += m
        if n_done >= 10_000 and abs_sum > 0 and abs_max / abs_sum > 0.2:
            raise VarianceOverflow(
                "a single sample dominates the Monte Carlo weight sum; "
                "Re s is at or below the abscissa of convergence"
            )
    n = float(cfg.mc_samples)
    mean = total / n
    var_re = max(total_sq_re / n - mean.real**2, 0.0)
    var_im = max(total_sq_im / n - mean.imag**2, 0.0)
    half_width = box_vol * math.sqrt((var_re + var_im) / n)
    return ZetaEstimate(box_vol * mean, half_width)


def _tube_volume_for_quadrature(set_: CompactSet, t: float) -> float:
    return tube_volume(set_, t).volume


def tube_zeta_numeric(
    set_: CompactSet,
    s: complex,
    cfg: NumericZetaConfig,
    rtol: float = 1e-6,
    max_refinements: int = 9,
) -> complex:
    """Quadrature of ``integral_0^delta t^(s-N-1) |A_t| dt``.

    Integrates in ``u = ln t`` with composite Gauss-Legendre panels; panels
    extend toward ``u -> -inf`` until their contribution is negligible,
    which requires ``Re s`` above the box dimension for convergence.  Node
    counts double until the relative change is below ``rtol``; raises
    :class:`QuadratureNonconvergent` otherwise.
    """
    s = complex(s)
    n_dim = set_.ambient_dim
    u_hi = math.log(cfg.delta)
    nodes = max(16, cfg.quadrature_points // 4)
    x, w = np.polynomial.legendre.leggauss(nodes)
    # per-panel stop threshold scales with the panel width so the truncated
    # tail stays ~0.01 rtol regardless of how finely the panels are split
    tail_tol = min(1e-9, 1e-3 * rtol)

    def integrate(panel_width: float) -> complex:
        acc = 0.0 + 0.0j
        u_top = u_hi
        quiet = 0
        max_panels = int(math.ceil(1200.0 / panel_width))
        for _ in range(max_panels):
            u_bot = u_top - panel_width
            um = 0.5 * (u_top + u_bot)
            uh = 0.5 * (u_top - u_bot)
            u = um + uh * x
            vols = np.array([_tube_volume_for_quadrature(set_, math.exp(ui)) for ui in u])
            vals = np.exp((s - n_dim) * u) * vols
            contrib = uh * np.sum(w * vals)
            acc += contrib
            u_top = u_bot
            if abs(contrib) <= tail_tol * panel_width * max(abs(acc), 1e-300):
                quiet += 1
                if quiet >= 3:
                    break
            else:
                quiet = 0
            if u_top < math.log(1e-280):
                break
        return acc

    # halving the panel width (rather than raising the node count) also
    # converges when |A_t| has derivative kinks inside a panel
    width = 2.0
    prev = integrate(width)
    for _ in range(max_refinements):
        width *= 0.5
        cur = integrate(width)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise QuadratureNonconvergent(
        f"tube zeta quadrature did not stabilize to rtol={rtol} at s={s}"
    )


def functional_equation_residual(
    set_: CompactSet,
    s: complex,
    cfg: NumericZetaConfig,
    prefer_closed_form: bool = True,
) -> float:
    """Relative defect of ``zeta = delta^(s-N) |A_delta| + (N - s) ztilde``.

    The distance-zeta side comes from the closed form when the catalog has
    one (Monte Carlo otherwise); the tube side is always assembled from the
    tube-volume oracle and the tube-zeta quadrature.  Returns
    ``|LHS - RHS| / (1 + |LHS|)``.
    """
    s = complex(s)
    n_dim = set_.ambient_dim
    lhs = None
    if prefer_closed_form:
        try:
            lhs = closed_form_eval(catalog_zeta(set_, cfg.delta), s)
        except (NoClosedForm, DeltaTooSmall):
            lhs = None
    if lhs is None:
        lhs = distance_zeta_numeric(set_, s, cfg).value
    a_delta = tube_volume(set_, cfg.delta).volume
    rhs = cfg.delta ** (s - n_dim) * a_delta + (n_dim - s) * tube_zeta_numeric(set_, s, cfg)
    return abs(lhs - rhs) / (1.0 + abs(lhs))


# ---------------------------------------------------------------------------
# JSON schema
# ---------------------------------------------------------------------------


def zeta_to_json(zeta: ClosedFormZeta) -> dict:
    return {
        "ambient_dim": zeta.ambient_dim,
        "delta": zeta.delta,
        "lattice_terms": [
            {
                "amplitude": t.amplitude,
                "base_scale": t.base_scale,
                "roots": list(t.roots),
                "lattice": list(t.lattice) if t.lattice is not None else None,
            }
            for t in zeta.lattice_terms
        ],
        "elementary_terms": [
            {"coefficient": t.coefficient, "shift": t.shift, "pole": t.pole}
            for t in zeta.elementary_terms
        ],
    }


def zeta_from_json(data: dict) -> ClosedFormZeta:
    lat = tuple(
        LatticeTerm(
            float(t["amplitude"]),
            float(t["base_scale"]),
            tuple(float(r) for r in t["roots"]),
            tuple(t["lattice"]) if t.get("lattice") is not None else None,
        )
        for t in data.get("lattice_terms", [])
    )
    ele = tuple(
        ElementaryTerm(float(t["coefficient"]), int(t["shift"]), float(t["pole"]))
        for t in data.get("elementary_terms", [])
    )
    return ClosedFormZeta(int(data["ambient_dim"]), float(data["delta"]), lat, ele)
