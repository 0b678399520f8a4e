"""Complex dimensions: pole families, numeric pole finding, residues, growth probes.

Complex dimensions of a compact set are the poles of its meromorphically
continued distance zeta function.  For lattice closed forms they form
arithmetic progressions ``omega_k = log_m r + (2 pi k / ln m) i``; for
arbitrary evaluators they are located numerically by the argument
principle on recursively subdivided rectangles and refined by Newton
iteration on the reciprocal.  Residues come either from the closed-form
term algebra or from trapezoidal contour quadrature on circles (which
converges geometrically for analytic integrands).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import (
    BoundaryPole,
    ContourContaminated,
    NonIsolable,
    NotAPole,
    PoleOnLine,
)
from .zeta import ClosedFormZeta

Evaluator = Union[ClosedFormZeta, Callable[[complex], complex]]


@dataclass(frozen=True)
class Pole:
    """A complex dimension: location, order, and principal-part data.

    ``residue`` is the coefficient of ``1/(s - omega)``; ``principal_part``
    lists ``(c_-order, ..., c_-1)`` for orders above one.
    """

    location: complex
    order: int = 1
    residue: Optional[complex] = None
    principal_part: tuple[complex, ...] = ()

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("pole order must be >= 1")


@dataclass(frozen=True)
class ScreenProfile:
    """Sampled screen curve ``tau -> S(tau)`` with its Lipschitz bound."""

    taus: tuple[float, ...]
    values: tuple[float, ...]
    lipschitz: float

    def __call__(self, tau: float) -> float:
        return float(np.interp(tau, self.taus, self.values))


@dataclass(frozen=True)
class Window:
    """Region of the plane where poles are sought.

    ``imag_range`` is the vertical search band; ``screen_sup`` (and the
    optional sampled profile) bound the region on the left: only poles with
    real part at or right of the screen are visible.
    """

    imag_range: tuple[float, float]
    screen_sup: Optional[float] = None
    screen_profile: Optional[ScreenProfile] = None

    def __post_init__(self):
        lo, hi = self.imag_range
        if not lo < hi:
            raise ValueError("imag_range must be a nonempty interval")

    def screen_at(self, tau: float) -> float:
        if self.screen_profile is not None:
            return self.screen_profile(tau)
        if self.screen_sup is not None:
            return self.screen_sup
        return -math.inf

    def contains(self, w: complex) -> bool:
        lo, hi = self.imag_range
        return lo <= w.imag <= hi and w.real >= self.screen_at(w.imag)


@dataclass(frozen=True)
class LanguidityEstimate:
    """Fitted polynomial growth exponent along a vertical line."""

    kappa: float
    sample_heights: tuple[float, ...]
    constant: float
    strong_bound: Optional[float] = None


def _vectorized(evaluator: Evaluator) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(evaluator, ClosedFormZeta):
        return lambda s: np.asarray(evaluator.evaluate(s), dtype=complex)

    def call(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        flat = s.ravel()
        out = np.array([complex(evaluator(z)) for z in flat])
        return out.reshape(s.shape)

    return call


def lattice_poles(m: float, r: float, window: Window) -> list[complex]:
    """Arithmetic pole family ``log_m r + (2 pi / ln m) k i`` inside the window."""
    if m <= 1.0 or r <= 0.0:
        raise ValueError("need m > 1 and r > 0")
    period = 2.0 * math.pi / math.log(m)
    re = math.log(r) / math.log(m)
    lo, hi = window.imag_range
    k_lo = math.ceil(lo / period - 1e-12)
    k_hi = math.floor(hi / period + 1e-12)
    out = [complex(re, period * k) for k in range(k_lo, k_hi + 1)]
    return [w for w in out if window.contains(w)]


# ---------------------------------------------------------------------------
# Contour machinery
# ---------------------------------------------------------------------------


def residue_contour(
    evaluator: Evaluator,
    omega: complex,
    radius: Optional[float] = None,
    *,
    known_poles: Sequence[complex] = (),
    nodes: int = 256,
    tol: float = 1e-10,
    max_nodes: int = 4096,
) -> complex:
    """Residue at ``omega`` by trapezoidal circle quadrature.

    The radius defaults to half the distance to the nearest other known
    pole, capped at 0.1.  The node count doubles until the value is stable
    to ``tol``; persistent drift raises :class:`ContourContaminated`
    (another singularity inside or on the contour).
    """
    omega = complex(omega)
    f = _vectorized(evaluator)
    if radius is None:
        others = [abs(omega - p) for p in known_poles if abs(omega - p) > 1e-12]
        radius = min(0.1, 0.5 * min(others)) if others else 0.1
    if radius <= 0:
        raise ValueError("contour radius must be positive")

    def estimate(n: int) -> complex:
        theta = 2.0 * math.pi * np.arange(n) / n
        ring = np.exp(1j * theta)
        vals = f(omega + radius * ring)
        return radius * complex(np.mean(vals * ring))

    prev = estimate(nodes)
    n = nodes
    while n < max_nodes:
        n *= 2
        cur = estimate(n)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise ContourContaminated(
        f"contour at {omega} (radius {radius}) did not stabilize; "
        "another singularity is inside or on the circle"
    )


def _principal_part_contour(
    f: Callable[[np.ndarray], np.ndarray], omega: complex, order: int, radius: float, nodes: int = 512
) -> tuple[complex, ...]:
    theta = 2.0 * math.pi * np.arange(nodes) / nodes
    ring = np.exp(1j * theta)
    vals = f(omega + radius * ring)
    coeffs = []
    for j in range(order, 0, -1):
        # c_{-j} = (1/2 pi i) contour f(s) (s - omega)^(j-1) ds
        coeffs.append(radius**j * complex(np.mean(vals * ring**j)))
    return tuple(coeffs)


def _boundary_log_walk(
    f: Callable[[np.ndarray], np.ndarray],
    corners: tuple[complex, ...],
    moment_tol: float,
) -> tuple[int, complex]:
    """Winding number and centered first moment along a closed polygon.

    Returns ``(W, M1)`` where ``W = (1/2 pi i) contour d log f`` counts
    zeros minus poles and ``M1 = (1/2 pi i) contour (s - c) d log f`` sums
    ``(z - c)`` over zeros minus ``(p - c)`` over poles, with ``c`` the
    polygon centroid.  ``M1`` is the pair detector: a zero-pole pair hidden
    inside leaves ``W = 0`` but ``M1 = z - p != 0``.

    The walk refines until phase steps are below pi/2 and the moment is
    stable to ``moment_tol``; failure raises :class:`BoundaryPole`.
    """
    center = sum(corners) / len(corners)
    pts: list[complex] = []
    n0 = 24
    for a, b in zip(corners, corners[1:] + corners[:1]):
        pts.extend(a + (b - a) * np.arange(n0) / n0)
    z = np.array(pts + [pts[0]], dtype=complex)
    vals = f(z)
    prev_m1 = None
    for _ in range(28):
        if not np.isfinite(vals).all():
            raise BoundaryPole("evaluator blows up on a cell boundary")
        av = np.abs(vals)
        if av.min() < 1e-280:
            raise BoundaryPole("evaluator vanishes on a cell boundary")
        ratio = vals[1:] / vals[:-1]
        dphi = np.angle(ratio)
        dlnr = np.log(np.abs(ratio))
        bad = (np.abs(dphi) > 0.5 * math.pi) | (np.abs(dlnr) > 0.7)
        if not bad.any():
            total = float(dphi.sum()) / (2.0 * math.pi)
            w = round(total)
            if abs(total - w) <= 0.25:
                dlog = dlnr + 1j * dphi
                mid = 0.5 * (z[1:] + z[:-1]) - center
                m1 = complex(np.sum(mid * dlog) / (2j * math.pi))
                if prev_m1 is not None and abs(m1 - prev_m1) <= 0.25 * moment_tol:
                    return int(w), m1
                prev_m1 = m1
            # refine everywhere once more for moment stability
            bad = np.ones(dphi.shape, dtype=bool)
        idx = np.nonzero(bad)[0]
        mids = 0.5 * (z[idx] + z[idx + 1])
        mvals = f(mids)
        z = np.insert(z, idx + 1, mids)
        vals = np.insert(vals, idx + 1, mvals)
    raise BoundaryPole("phase refinement exhausted; a pole or zero sits on the boundary")


def _rect_corners(re_lo, re_hi, im_lo, im_hi) -> tuple[complex, ...]:
    return (
        complex(re_lo, im_lo),
        complex(re_hi, im_lo),
        complex(re_hi, im_hi),
        complex(re_lo, im_hi),
    )


def _newton_on_reciprocal(
    f, fprime_exact, start: complex, tol: float, max_iter: int = 80
) -> Optional[complex]:
    """Newton iteration on ``g = 1/f`` whose zeros are the poles of ``f``.

    With an exact derivative the step is ``s + f/f'``; for black boxes the
    derivative of ``g`` itself is finite-differenced (``g`` is smooth near
    a pole of ``f``, unlike ``f``).
    """
    s = complex(start)
    for _ in range(max_iter):
        if fprime_exact is not None:
            fv = complex(f(np.array([s]))[0])
            dv = complex(fprime_exact(s))
            if dv == 0 or not np.isfinite(fv):
                return None
            step = fv / dv
        else:
            h = 1e-6 * (1.0 + abs(s))
            vals = f(np.array([s, s + h, s - h, s + 1j * h, s - 1j * h]))
            with np.errstate(divide="ignore", invalid="ignore"):
                gv = 1.0 / vals
            if not np.isfinite(gv).all():
                return None
            gp = 0.5 * ((gv[1] - gv[2]) / (2 * h) + (gv[3] - gv[4]) / (2j * h))
            if gp == 0:
                return None
            step = -gv[0] / gp
        s = s + step
        if not (math.isfinite(s.real) and math.isfinite(s.imag)):
            return None
        if abs(step) < 0.25 * tol:
            return s
    return None


def find_poles_argument_principle(
    evaluator: Evaluator,
    rect: tuple[float, float, float, float],
    tol: float = 1e-9,
    *,
    max_order: int = 3,
    initial_cell: float = 1.0,
    moment_floor: Optional[float] = None,
) -> list[Pole]:
    """Locate the poles of a meromorphic function inside an axis rectangle.

    ``rect`` is ``(re_lo, re_hi, im_lo, im_hi)``.  Cells are classified by
    the boundary winding count ``Z - P`` together with the centered first
    moment of ``d log f``: the moment exposes zero-pole pairs that cancel
    in the count (zeta functions grow such zeros near every lattice pole)
    and localizes lone poles for Newton refinement on ``1/f``.  Cells are
    subdivided with irrational split fractions so singularities stay off
    shared edges.

    ``moment_floor`` is the pair-detection resolution: a zero-pole pair
    closer than this is treated as cancelled.  Raises
    :class:`BoundaryPole` when a singularity obstructs the outer boundary
    walk and :class:`NonIsolable` when subdivision stalls or an order
    exceeds ``max_order``.
    """
    re_lo, re_hi, im_lo, im_hi = map(float, rect)
    f = _vectorized(evaluator)
    fprime = (lambda s: complex(evaluator.derivative(s))) if isinstance(
        evaluator, ClosedFormZeta
    ) else None

    diag = math.hypot(re_hi - re_lo, im_hi - im_lo)
    if moment_floor is None:
        moment_floor = max(1e-4, 64.0 * tol)
    min_cell = max(16.0 * tol, 1e-9 * diag)

    def split(cell, depth):
        a, b, c, d = cell
        # alternate irrational fractions so repeated splits never build a
        # rational sub-lattice that could pin a pole to an edge
        frac = (0.5 + 0.5 * (math.sqrt(5) - 2.0)) if depth % 2 == 0 else 0.5471398
        if b - a >= d - c:
            mid = a + (b - a) * frac
            return [(a, mid, c, d), (mid, b, c, d)]
        mid = c + (d - c) * frac
        return [(a, b, c, mid), (a, b, mid, d)]

    stack: list[tuple[tuple[float, float, float, float], int]] = [
        ((re_lo, re_hi, im_lo, im_hi), 0)
    ]
    found: list[tuple[complex, int]] = []

    while stack:
        cell, depth = stack.pop()
        a, b, c, d = cell
        size = max(b - a, d - c)
        if size > initial_cell:
            stack.extend((sc, depth + 1) for sc in split(cell, depth))
            continue
        try:
            w, m1 = _boundary_log_walk(f, _rect_corners(a, b, c, d), moment_floor)
        except BoundaryPole:
            if size > min_cell and depth > 0:
                stack.extend((sc, depth + 1) for sc in split(cell, depth))
                continue
            raise
        if w == 0:
            if abs(m1) <= moment_floor:
                continue
            if size <= max(64.0 * tol, min_cell):
                raise NonIsolable(
                    f"cell {cell} hides a zero-pole pair below the resolution floor"
                )
            stack.extend((sc, depth + 1) for sc in split(cell, depth))
            continue
        if w > 0:
            # net zeros; treated as a zero cluster (a pole co-located with
            # two or more zeros below the cell scale is out of contract)
            continue
        # net poles: the moment centroid seeds Newton refinement
        centroid = complex(0.5 * (a + b), 0.5 * (c + d))
        seed = centroid - m1 / (-w)
        if not (a <= seed.real <= b and c <= seed.imag <= d):
            seed = centroid
        loc = _newton_on_reciprocal(f, fprime, seed, tol)
        in_cell = loc is not None and a - tol <= loc.real <= b + tol and c - tol <= loc.imag <= d + tol
        if not in_cell:
            if size > min_cell:
                stack.extend((sc, depth + 1) for sc in split(cell, depth))
                continue
            raise NonIsolable(f"Newton refinement failed in cell {cell}")
        order = None
        radius = 0.3 * size
        for _ in range(8):
            if radius < 4.0 * tol:
                break
            try:
                order = -_winding_circle(f, loc, radius)
            except BoundaryPole:
                radius *= 0.5
                continue
            if order == -w:
                break
            radius *= 0.5
            order = None
        if order is None or order != -w:
            # mixed content (extra zero or second pole inside): separate it
            if size > min_cell:
                stack.extend((sc, depth + 1) for sc in split(cell, depth))
                continue
            raise NonIsolable(f"could not isolate the pole content of cell {cell}")
        if order > max_order:
            raise NonIsolable(f"pole at {loc} has order {order} > max_order={max_order}")
        found.append((loc, order))

    # quantized deterministic ordering: location errors are O(tol), far below
    # the quantum, so equal poles sort equally across runs
    quantum = max(1000.0 * tol, 1e-6)
    sort_key = lambda z: (round(z.real / quantum), round(z.imag / quantum))
    found.sort(key=lambda item: sort_key(item[0]))
    uniq: list[tuple[complex, int]] = []
    for z, order in found:
        if not uniq or abs(z - uniq[-1][0]) > max(100 * tol, 1e-10):
            uniq.append((z, order))

    poles: list[Pole] = []
    locs = [z for z, _ in uniq]
    for z, order in uniq:
        gaps = [abs(z - other) for other in locs if abs(z - other) > 1e-12]
        radius = min(0.05, 0.25 * min(gaps)) if gaps else 0.05
        residue = residue_contour(evaluator, z, radius=radius)
        principal: tuple[complex, ...] = ()
        if order > 1:
            principal = _principal_part_contour(f, z, order, radius)
            residue = principal[-1]
        poles.append(Pole(z, order=order, residue=residue, principal_part=principal))
    return poles


def _winding_circle(f, center: complex, radius: float, nodes: int = 128) -> int:
    theta = 2.0 * math.pi * np.arange(nodes + 1) / nodes
    z = center + radius * np.exp(1j * theta)
    vals = f(z)
    for _ in range(20):
        if not np.isfinite(vals).all():
            raise BoundaryPole("evaluator blows up on the order-check circle")
        av = np.abs(vals)
        if av.min() < 1e-280:
            raise BoundaryPole("evaluator vanishes on the order-check circle")
        dphi = np.angle(vals[1:] / vals[:-1])
        bad = np.abs(dphi) > 0.5 * math.pi
        if not bad.any():
            return int(round(float(dphi.sum()) / (2.0 * math.pi)))
        idx = np.nonzero(bad)[0]
        mids = 0.5 * (z[idx] + z[idx + 1])
        z = np.insert(z, idx + 1, mids)
        vals = np.insert(vals, idx + 1, f(mids))
    raise BoundaryPole("could not resolve phase on the order-check circle")


def residues_closed_form(zeta: ClosedFormZeta, omega: complex) -> Pole:
    """Residue of a closed form at a structural pole, as a :class:`Pole`.

    Raises :class:`NotAPole` when ``omega`` is not within 1e-9 of a pole
    candidate or when the candidate's residue cancels between terms.
    """
    residue = zeta.residue_at(omega, tol=1e-9)
    if abs(residue) <= 1e-11 * zeta._residue_scale():
        raise NotAPole(f"{omega} is a removable point (term residues cancel)")
    return Pole(complex(omega), order=1, residue=residue)


def languidity_probe(
    evaluator: Evaluator,
    screen_abscissa: float,
    heights: Sequence[float],
    pole_locations: Optional[Sequence[complex]] = None,
) -> LanguidityEstimate:
    """Least-squares growth exponent of ``|zeta|`` along a vertical line.

    Fits ``log |zeta(sigma + i T)|`` against ``log T`` over the given
    heights (at least 8, spanning at least two decades); the slope
    estimates the languidity exponent kappa.  Heights within 1 of a pole
    ordinate whose pole is near the line are skipped; a sample within
    1e-3 of a pole raises :class:`PoleOnLine`.
    """
    hs = [float(h) for h in heights]
    if len(hs) < 8:
        raise ValueError("need at least 8 heights")
    if any(h <= 0 for h in hs) or any(b <= a for a, b in zip(hs, hs[1:])):
        raise ValueError("heights must be positive and increasing")
    if hs[-1] / hs[0] < 100.0:
        raise ValueError("heights must span at least two decades")

    if pole_locations is None and isinstance(evaluator, ClosedFormZeta):
        band = hs[-1] + 1.0
        pole_locations = [w for w, _ in evaluator.poles(band)]
    pole_locations = list(pole_locations or [])

    f = _vectorized(evaluator)
    used: list[float] = []
    for h in hs:
        s = complex(screen_abscissa, h)
        dists = [abs(s - w) for w in pole_locations]
        if dists and min(dists) < 1e-3:
            raise PoleOnLine(f"sample at {s} sits within 1e-3 of a pole")
        near_line = [w for w in pole_locations if abs(w.real - screen_abscissa) < 0.5]
        if any(abs(h - w.imag) < 1.0 for w in near_line):
            continue
        used.append(h)
    if len(used) < 8:
        raise ValueError("too few usable heights after pole-ordinate exclusions")
    vals = f(np.array([complex(screen_abscissa, h) for h in used]))
    logs = np.log(np.abs(vals))
    logt = np.log(np.array(used))
    kappa, intercept = np.polyfit(logt, logs, 1)
    return LanguidityEstimate(
        kappa=float(kappa), sample_heights=tuple(used), constant=float(math.exp(intercept))
    )


def conjugate_closed(poles: Sequence[Pole], tol: float = 1e-9) -> bool:
    """Whether every nonreal pole has its conjugate with conjugated residue."""
    for p in poles:
        if abs(p.location.imag) <= tol:
            continue
        target = p.location.conjugate()
        match = [q for q in poles if abs(q.location - target) <= tol]
        if not match:
            return False
        q = match[0]
        if p.residue is not None and q.residue is not None:
            scale = max(1.0, abs(p.residue))
            if abs(q.residue - p.residue.conjugate()) > 1e-8 * scale:
                return False
    return True
