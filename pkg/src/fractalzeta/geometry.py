"""Compact-set descriptors with distance and tube-volume oracles.

Descriptors are immutable value objects for compact subsets ``A`` of R^N.
Every descriptor supports Euclidean distance evaluation ``d(x, A)`` and
tube-volume measurement ``|A_t|`` (Lebesgue volume of the open
t-neighborhood).  Where the geometry allows it the tube volume is computed
exactly:

* 1D sets (point sets, Cantor-type sets, fractal-string boundaries) via
  interval sweeps or closed-form gap sums;
* the Sierpinski gasket and the three-dimensional carpet via exact
  hole-decomposition sums (the removed holes are bounded by surfaces that
  belong to the set, so the uncovered core of every hole is an explicit
  inner parallel body).

For everything else there is a deterministic grid-count oracle (cells whose
center lies within distance t, with a conservative boundary-cell error
bound) and a seeded Monte Carlo oracle with a reported confidence
half-width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from .errors import ResolutionTooCoarse, FractalZetaError
from .intervals import IntervalUnion, fatten_intervals

SQRT3 = math.sqrt(3.0)

# Offset of the grid lattice relative to the set's bounding box, in cell
# units.  Irrational so that cell centers do not align with the dyadic or
# triadic face planes of the catalog fractals.
_GRID_OFFSET = math.sqrt(2.0) - 1.0


# ---------------------------------------------------------------------------
# Descriptors
# ---------------------------------------------------------------------------


def _as_point_tuple(points) -> tuple[tuple[float, ...], ...]:
    out = []
    for p in points:
        q = tuple(float(c) for c in (p if isinstance(p, (tuple, list, np.ndarray)) else (p,)))
        if not all(math.isfinite(c) for c in q):
            raise ValueError("all coordinates must be finite")
        out.append(q)
    return tuple(out)


@dataclass(frozen=True)
class PointSet:
    """A finite set of points in R^N."""

    points: tuple[tuple[float, ...], ...]

    def __init__(self, points):
        object.__setattr__(self, "points", _as_point_tuple(points))
        if not self.points:
            raise ValueError("PointSet needs at least one point")
        dims = {len(p) for p in self.points}
        if len(dims) != 1:
            raise ValueError("all points must share one ambient dimension")

    @property
    def ambient_dim(self) -> int:
        return len(self.points[0])

    def min_gap(self) -> float:
        """Smallest pairwise distance (inf for a single point)."""
        if len(self.points) < 2:
            return math.inf
        arr = np.asarray(self.points)
        if len(arr) > 2000:
            tree = cKDTree(arr)
            d, _ = tree.query(arr, k=2)
            return float(d[:, 1].min())
        diff = arr[:, None, :] - arr[None, :, :]
        d = np.sqrt((diff**2).sum(-1))
        np.fill_diagonal(d, np.inf)
        return float(d.min())


@dataclass(frozen=True)
class CantorLike:
    """Middle-gap Cantor set on ``[0, scale]``.

    Each interval of length L splits into two end intervals of length
    ``ratio * L``; the open middle gap of length ``(1 - 2 ratio) * L`` is
    removed.  The default ``ratio = 1/3`` gives the classical middle-third
    set.
    """

    ratio: float = 1.0 / 3.0
    scale: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.ratio < 0.5):
            raise ValueError("ratio must lie in (0, 1/2)")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    ambient_dim = 1

    @property
    def box_dimension(self) -> float:
        return math.log(2.0) / math.log(1.0 / self.ratio)

    @property
    def largest_gap(self) -> float:
        return (1.0 - 2.0 * self.ratio) * self.scale


@dataclass(frozen=True)
class FractalStringBoundary:
    """The boundary set ``{a_k = sum_{j >= k} l_j} ∪ {0}`` of a fractal string.

    Two construction modes:

    * explicit -- ``lengths`` is a finite nonincreasing tuple of positive
      reals;
    * self-similar -- lengths ``scale * base**-n`` with multiplicity
      ``multiplicity**(n-1)`` for ``n = 1, 2, ...`` (e.g. the Cantor string
      has ``base=3, multiplicity=2``), in which case the sequence is
      conceptually infinite and materialized lazily.
    """

    lengths: Optional[tuple[float, ...]] = None
    base: Optional[float] = None
    multiplicity: Optional[int] = None
    scale: float = 1.0

    ambient_dim = 1

    def __post_init__(self):
        if (self.lengths is None) == (self.base is None):
            raise ValueError("give either explicit lengths or a self-similar generator")
        if self.lengths is not None:
            ls = tuple(float(v) for v in self.lengths)
            if not ls or any(v <= 0 for v in ls):
                raise ValueError("lengths must be positive")
            if any(a < b for a, b in zip(ls, ls[1:])):
                raise ValueError("lengths must be nonincreasing")
            object.__setattr__(self, "lengths", ls)
        else:
            if self.base is None or self.multiplicity is None:
                raise ValueError("self-similar mode needs base and multiplicity")
            if self.base <= 1.0 or self.multiplicity < 1:
                raise ValueError("need base > 1 and multiplicity >= 1")
            if self.multiplicity >= self.base:
                raise ValueError("multiplicity must be < base for a summable string")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    @classmethod
    def cantor_string(cls) -> "FractalStringBoundary":
        return cls(base=3.0, multiplicity=2, scale=1.0)

    @property
    def is_self_similar(self) -> bool:
        return self.base is not None

    @property
    def total_length(self) -> float:
        if self.is_self_similar:
            return self.scale / (self.base - self.multiplicity)
        return float(sum(self.lengths))

    @property
    def first_length(self) -> float:
        if self.is_self_similar:
            return self.scale / self.base
        return self.lengths[0]

    @property
    def box_dimension(self) -> float:
        if self.is_self_similar:
            return math.log(self.multiplicity) / math.log(self.base)
        return 0.0

    def level_tail(self, n: int) -> float:
        """Sum of all lengths strictly below level ``n`` (self-similar mode)."""
        b, m = self.base, self.multiplicity
        return self.scale * (m / b) ** n / (b - m)

    def materialize_points(self, min_length: float = 0.0, max_count: int = 2_000_000):
        """Descending array of boundary points, plus the residual segment top.

        Returns ``(points, tail_top)``: all points ``a_k`` whose following
        gap exceeds ``min_length`` are listed exactly; the remaining points
        fill ``[0, tail_top]`` with gaps <= ``min_length``.
        """
        if not self.is_self_similar:
            ls = np.asarray(self.lengths)
            a = self.total_length - np.concatenate([[0.0], np.cumsum(ls[:-1])])
            return a, 0.0
        b, m = self.base, int(self.multiplicity)
        pts = []
        count = 0
        n = 1
        top = self.total_length
        while True:
            ln = self.scale * b**-n
            k = m ** (n - 1)
            if ln <= min_length or count + k > max_count:
                break
            pts.append(top - ln * np.arange(1, k + 1))
            top = self.level_tail(n)
            count += k
            n += 1
        points = np.concatenate([[self.total_length]] + pts) if pts else np.array([self.total_length])
        return points, top


@dataclass(frozen=True)
class SierpinskiGasket:
    """The Sierpinski gasket in the unit triangle (0,0), (1,0), (1/2, sqrt3/2)."""

    ambient_dim = 2

    @property
    def box_dimension(self) -> float:
        return math.log(3.0) / math.log(2.0)


@dataclass(frozen=True)
class SierpinskiCarpet3D:
    """Three-dimensional carpet: unit cube, remove the open middle 27th, iterate on the 26 others."""

    ambient_dim = 3

    @property
    def box_dimension(self) -> float:
        return math.log(26.0) / math.log(3.0)


@dataclass(frozen=True)
class PointCloud:
    """A sampled point cloud with a declared ambient dimension.

    Supported for measurement operations only; there is no canonical
    continuum limit and hence no closed-form zeta function.
    """

    points: tuple[tuple[float, ...], ...]
    ambient_dim: int = 0

    def __init__(self, points, ambient_dim=None):
        object.__setattr__(self, "points", _as_point_tuple(points))
        if not self.points:
            raise ValueError("PointCloud needs at least one point")
        dim = len(self.points[0])
        if any(len(p) != dim for p in self.points):
            raise ValueError("all points must share one ambient dimension")
        if ambient_dim is None:
            ambient_dim = dim
        if ambient_dim != dim:
            raise ValueError("declared ambient_dim does not match point dimension")
        object.__setattr__(self, "ambient_dim", int(ambient_dim))


CompactSet = Union[
    PointSet, CantorLike, FractalStringBoundary, SierpinskiGasket, SierpinskiCarpet3D, PointCloud
]


def bounding_box(set_: CompactSet) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned bounding box (lo, hi) of the set itself."""
    if isinstance(set_, (PointSet, PointCloud)):
        arr = np.asarray(set_.points, dtype=float)
        return arr.min(axis=0), arr.max(axis=0)
    if isinstance(set_, CantorLike):
        return np.array([0.0]), np.array([set_.scale])
    if isinstance(set_, FractalStringBoundary):
        return np.array([0.0]), np.array([set_.total_length])
    if isinstance(set_, SierpinskiGasket):
        return np.array([0.0, 0.0]), np.array([1.0, SQRT3 / 2.0])
    if isinstance(set_, SierpinskiCarpet3D):
        return np.zeros(3), np.ones(3)
    raise TypeError(f"unknown set descriptor {type(set_)!r}")


def diameter(set_: CompactSet) -> float:
    """Diameter of the set (exact for catalog sets, hull-based for clouds)."""
    if isinstance(set_, (PointSet, PointCloud)):
        arr = np.asarray(set_.points, dtype=float)
        if len(arr) == 1:
            return 0.0
        if len(arr) <= 4000:
            diff = arr[:, None, :] - arr[None, :, :]
            return float(np.sqrt((diff**2).sum(-1)).max())
        lo, hi = bounding_box(set_)
        return float(np.linalg.norm(hi - lo))
    if isinstance(set_, CantorLike):
        return set_.scale
    if isinstance(set_, FractalStringBoundary):
        return set_.total_length
    if isinstance(set_, SierpinskiGasket):
        return 1.0
    if isinstance(set_, SierpinskiCarpet3D):
        return SQRT3
    raise TypeError(f"unknown set descriptor {type(set_)!r}")


# ---------------------------------------------------------------------------
# Distance evaluation
# ---------------------------------------------------------------------------


def _point_cloud_distances(pts: np.ndarray, cloud: np.ndarray) -> np.ndarray:
    tree = cKDTree(cloud)
    d, _ = tree.query(pts)
    return np.asarray(d, dtype=float)


def _cantor_distances(x: np.ndarray, ratio: float, scale: float) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    out = np.maximum(np.maximum(-x, x - scale), 0.0)
    inside = (x > 0.0) & (x < scale)
    xi = x[inside]
    res = np.full(xi.shape, np.inf)
    idx = np.arange(xi.size)
    a = np.zeros(xi.size)
    L = scale
    for _ in range(256):
        if idx.size == 0 or L < 1e-18 * scale:
            break
        xa = xi[idx]
        g1 = a + ratio * L
        g2 = a + (1.0 - ratio) * L
        in_gap = (xa >= g1) & (xa <= g2)
        res[idx[in_gap]] = np.minimum(xa[in_gap] - g1[in_gap], g2[in_gap] - xa[in_gap])
        stay = ~in_gap
        right = xa > g2
        a = np.where(right, g2, a)[stay]
        idx = idx[stay]
        L *= ratio
    if idx.size:
        xa = xi[idx]
        res[idx] = np.minimum(xa - a, a + L - xa)
    out[inside] = res
    return out


def _string_distances(x: np.ndarray, s: FractalStringBoundary) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    pts, tail_top = s.materialize_points(min_length=1e-12 * s.scale)
    asc = np.sort(pts)
    j = np.searchsorted(asc, x)
    d = np.full(x.shape, np.inf)
    has_left = j > 0
    d[has_left] = np.abs(x[has_left] - asc[j[has_left] - 1])
    has_right = j < asc.size
    d[has_right] = np.minimum(d[has_right], np.abs(asc[j[has_right]] - x[has_right]))
    # remaining points fill [0, tail_top] densely (gaps below resolution)
    d_seg = np.maximum(np.maximum(-x, x - tail_top), 0.0)
    return np.minimum(d, d_seg)


def _gasket_edge_min(qx, qy, ox, oy, s):
    """Min distance to the three outline edges of upright triangles (o, s)."""
    # bottom edge, direction (1, 0)
    ux = qx - ox
    uy = qy - oy
    tt = np.clip(ux, 0.0, s)
    e = np.hypot(ux - tt, uy)
    # right edge from (o_x + s, o_y), direction (-1/2, sqrt3/2)
    wx = ux - s
    tt = np.clip(-0.5 * wx + (SQRT3 / 2.0) * uy, 0.0, s)
    np.minimum(e, np.hypot(wx + 0.5 * tt, uy - (SQRT3 / 2.0) * tt), out=e)
    # left edge from the apex, direction (-1/2, -sqrt3/2)
    wx = ux - 0.5 * s
    wy = uy - (SQRT3 / 2.0) * s
    tt = np.clip(-0.5 * wx - (SQRT3 / 2.0) * wy, 0.0, s)
    np.minimum(e, np.hypot(wx + 0.5 * tt, wy + (SQRT3 / 2.0) * tt), out=e)
    return e


def _gasket_descend(pts: np.ndarray, eps: float, band=None, max_depth: int = 64) -> np.ndarray:
    """Upper distance bounds to the gasket, within ``eps`` of the true value.

    ``band=(lo, hi)`` enables early classification: refinement of a point
    stops as soon as its distance is provably below ``lo`` or above ``hi``;
    the returned value then only supports that comparison.
    """
    px = np.ascontiguousarray(pts[:, 0], dtype=float)
    py = np.ascontiguousarray(pts[:, 1], dtype=float)
    n = px.size
    # the outline of every construction triangle belongs to the set
    best = _gasket_edge_min(px, py, 0.0, 0.0, 1.0)
    idx = np.arange(n)
    ox = np.zeros(n)
    oy = np.zeros(n)
    s = 1.0
    lo, hi = (band if band is not None else (None, None))
    for _ in range(max_depth):
        if idx.size == 0 or s < eps:
            break
        # cheap circumdisk prune first, then the exact filled-triangle
        # distance: a triangle whose filled distance equals the achieved
        # best cannot improve it (its outline is already in the set), so
        # the frontier collapses onto triangles that still might
        cx = ox + 0.5 * s
        cy = oy + s * (SQRT3 / 6.0)
        lb = np.hypot(px[idx] - cx, py[idx] - cy) - s / SQRT3
        keep = lb < best[idx]
        if hi is not None:
            keep &= lb < hi
        if lo is not None:
            keep &= best[idx] >= lo
        idx = idx[keep]
        ox = ox[keep]
        oy = oy[keep]
        if idx.size == 0:
            break
        qx = px[idx]
        qy = py[idx]
        e = _gasket_edge_min(qx, qy, ox, oy, s)
        np.minimum.at(best, idx, e)
        rx = qx - ox
        ry = qy - oy
        inside = (ry >= 0.0) & (ry <= SQRT3 * rx) & (ry <= -SQRT3 * (rx - s))
        fill = np.where(inside, 0.0, e)
        keep = fill < best[idx]
        if hi is not None:
            keep &= fill < hi
        if lo is not None:
            keep &= best[idx] >= lo
        idx = idx[keep]
        ox = ox[keep]
        oy = oy[keep]
        if idx.size == 0:
            break
        # children: three corner triangles of half size (index-sorted order)
        h = 0.5 * s
        idx = np.repeat(idx, 3)
        ox = (ox[:, None] + np.array([0.0, h, 0.5 * h])).ravel()
        oy = (oy[:, None] + np.array([0.0, 0.0, h * (SQRT3 / 2.0)])).ravel()
        s = h
    return best


_CARPET_OFFSETS = np.array(
    [(i, j, k) for i in range(3) for j in range(3) for k in range(3) if (i, j, k) != (1, 1, 1)],
    dtype=float,
)


def _box_surface_and_fill(px, py, pz, ox, oy, oz, s):
    """Distance to the surface and to the filled body of axis cubes [o, o+s]^3."""
    h = 0.5 * s
    qx = np.abs(px - (ox + h)) - h
    qy = np.abs(py - (oy + h)) - h
    qz = np.abs(pz - (oz + h)) - h
    outside = np.sqrt(
        np.maximum(qx, 0.0) ** 2 + np.maximum(qy, 0.0) ** 2 + np.maximum(qz, 0.0) ** 2
    )
    inner = np.minimum(np.maximum(qx, np.maximum(qy, qz)), 0.0)
    sdf = outside + inner
    return np.abs(sdf), np.maximum(sdf, 0.0)


def _carpet_descend(pts: np.ndarray, eps: float, band=None, max_depth: int = 42) -> np.ndarray:
    """Carpet analogue of :func:`_gasket_descend` (faces of kept cubes lie in the set)."""
    px = np.ascontiguousarray(pts[:, 0], dtype=float)
    py = np.ascontiguousarray(pts[:, 1], dtype=float)
    pz = np.ascontiguousarray(pts[:, 2], dtype=float)
    n = px.size
    surf, _ = _box_surface_and_fill(px, py, pz, 0.0, 0.0, 0.0, 1.0)
    best = surf
    idx = np.arange(n)
    ox = np.zeros(n)
    oy = np.zeros(n)
    oz = np.zeros(n)
    s = 1.0
    lo, hi = (band if band is not None else (None, None))
    for _ in range(max_depth):
        if idx.size == 0 or s < eps:
            break
        surf, fill = _box_surface_and_fill(px[idx], py[idx], pz[idx], ox, oy, oz, s)
        np.minimum.at(best, idx, surf)
        # prune with the exact filled-cube distance against the fresh best:
        # the cube whose surface achieves the minimum prunes itself
        keep = fill < best[idx]
        if hi is not None:
            keep &= fill < hi
        if lo is not None:
            keep &= best[idx] >= lo
        idx = idx[keep]
        ox = ox[keep]
        oy = oy[keep]
        oz = oz[keep]
        if idx.size == 0:
            break
        h = s / 3.0
        m = idx.size
        idx = np.repeat(idx, 26)
        ox = (np.repeat(ox, 26).reshape(m, 26) + h * _CARPET_OFFSETS[:, 0]).ravel()
        oy = (np.repeat(oy, 26).reshape(m, 26) + h * _CARPET_OFFSETS[:, 1]).ravel()
        oz = (np.repeat(oz, 26).reshape(m, 26) + h * _CARPET_OFFSETS[:, 2]).ravel()
        s = h
    return best


def distances_to_set(points, set_: CompactSet, eps: float = 1e-12, band=None) -> np.ndarray:
    """Vectorized distances from an ``(n, N)`` array of points to the set.

    The result overestimates the true distance by at most ``eps`` for the
    recursive fractal descents and is exact for point-based and 1D sets.
    ``band`` is an optional early-classification interval, see
    :func:`_gasket_descend`.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != set_.ambient_dim:
        raise ValueError(f"points have dimension {pts.shape[1]}, set has {set_.ambient_dim}")
    if isinstance(set_, (PointSet, PointCloud)):
        return _point_cloud_distances(pts, np.asarray(set_.points, dtype=float))
    if isinstance(set_, CantorLike):
        return _cantor_distances(pts[:, 0], set_.ratio, set_.scale)
    if isinstance(set_, FractalStringBoundary):
        return _string_distances(pts[:, 0], set_)
    if isinstance(set_, SierpinskiGasket):
        return _gasket_descend(pts, eps=eps, band=band)
    if isinstance(set_, SierpinskiCarpet3D):
        return _carpet_descend(pts, eps=eps, band=band)
    raise TypeError(f"unknown set descriptor {type(set_)!r}")


def distance_to_set(x, set_: CompactSet) -> float:
    """Euclidean distance from the point ``x`` to the set."""
    return float(distances_to_set([x], set_, eps=1e-14)[0])


# ---------------------------------------------------------------------------
# Tube volumes
# ---------------------------------------------------------------------------


class TubeMethod(str, Enum):
    EXACT_1D = "exact_1d"
    EXACT_CLOSED = "exact_closed"
    GRID_COUNT = "grid_count"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class TubeSample:
    """One tube-volume measurement: ``|A_t|`` at radius ``t``."""

    t: float
    volume: float
    method: TubeMethod
    error_bound: float = 0.0

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError("t must be positive")
        if self.volume < 0:
            raise ValueError("volume must be nonnegative")


def _unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def _cantor_tube_exact(set_: CantorLike, t: float) -> float:
    # number of gap generations still wider than 2t
    n = 0
    g = set_.largest_gap
    while g * set_.ratio**n > 2.0 * t:
        n += 1
    return 2.0 * t * 2.0**n + set_.scale * (2.0 * set_.ratio) ** n


def _string_tube_exact(set_: FractalStringBoundary, t: float) -> float:
    if not set_.is_self_similar:
        ls = np.asarray(set_.lengths)
        return float(2.0 * t + np.minimum(ls, 2.0 * t).sum())
    b, m = set_.base, int(set_.multiplicity)
    n = 0
    while set_.scale * b ** -(n + 1) > 2.0 * t:
        n += 1
    open_gaps = n if m == 1 else (m**n - 1) // (m - 1)
    tail = set_.level_tail(n)
    return 2.0 * t * (open_gaps + 1) + tail


def _gasket_tube_exact(t: float) -> float:
    total = SQRT3 / 4.0 + 3.0 * t + math.pi * t * t
    k = 1
    while 2.0**-k > 2.0 * SQRT3 * t:
        side = 2.0**-k - 2.0 * SQRT3 * t
        total -= 3.0 ** (k - 1) * (SQRT3 / 4.0) * side * side
        k += 1
    return total


def _carpet_tube_exact(t: float) -> float:
    total = 1.0 + 6.0 * t + 3.0 * math.pi * t * t + (4.0 / 3.0) * math.pi * t**3
    k = 1
    while 3.0**-k > 2.0 * t:
        side = 3.0**-k - 2.0 * t
        total -= 26.0 ** (k - 1) * side**3
        k += 1
    return total


def _sweep_1d_points(points: Sequence[float], t: float) -> float:
    return fatten_intervals(IntervalUnion.from_points(points), t).total_length


def _cantor_segments(set_: CantorLike, t: float, max_segments: int = 1 << 22):
    """Level-n construction segments whose internal gaps are all <= 2t."""
    n = 0
    while set_.largest_gap * set_.ratio**n > 2.0 * t:
        n += 1
        if 2**n > max_segments:
            raise ResolutionTooCoarse("Cantor sweep would need too many segments at this t")
    starts = np.array([0.0])
    L = set_.scale
    for _ in range(n):
        starts = np.concatenate([starts, starts + (1.0 - set_.ratio) * L])
        L *= set_.ratio
    starts.sort()
    return starts, L


def _cantor_tube_sweep(set_: CantorLike, t: float) -> float:
    starts, L = _cantor_segments(set_, t)
    union = IntervalUnion.from_intervals((a, a + L) for a in starts)
    return fatten_intervals(union, t).total_length


def _grid_tube(set_: CompactSet, t: float, cell: float, budget_rows: int = 8_000_000):
    """Flat grid count (centers within distance t), evaluated blockwise.

    Blocks of cells that are provably entirely inside or outside ``A_t``
    (with a margin covering the boundary-adjacency band) are resolved
    without visiting their cells, which reproduces the flat count exactly
    at a cost proportional to the boundary.
    """
    n_dim = set_.ambient_dim
    lo, hi = bounding_box(set_)
    lo = lo - t
    hi = hi + t
    origin = lo - cell * _GRID_OFFSET
    ncell = np.ceil((hi - origin) / cell).astype(np.int64) + 1
    margin = cell * math.sqrt(n_dim) / 2.0
    eps = cell / 8.0  # distance overestimate budget; miscounts land in the boundary band
    blo = np.zeros((1, n_dim), dtype=np.int64)
    bsz = ncell[None, :].copy()
    inside_cells = 0
    boundary_cells = 0
    rows_seen = 0
    while blo.shape[0]:
        rows_seen += blo.shape[0]
        if rows_seen > budget_rows:
            raise ResolutionTooCoarse(
                f"grid refinement exceeded the {budget_rows} block budget at cell={cell}"
            )
        centers = origin + (blo + 0.5 * bsz) * cell
        rc = cell * np.linalg.norm(0.5 * (bsz - 1), axis=1)
        fine = rc == 0.0
        d = np.empty(blo.shape[0])
        eps_used = np.full(blo.shape[0], eps)
        if fine.any():
            d[fine] = distances_to_set(
                centers[fine], set_, eps=eps, band=(t - margin - 2 * eps, t + margin + 2 * eps)
            )
        coarse = ~fine
        if coarse.any():
            # block tests tolerate accuracy proportional to the block radius
            eps_c = max(eps, 0.05 * float(rc[coarse].min()))
            rc_max = float(rc[coarse].max())
            d[coarse] = distances_to_set(
                centers[coarse], set_, eps=eps_c,
                band=(t - margin - rc_max - 2 * eps_c, t + margin + rc_max + 2 * eps_c),
            )
            eps_used[coarse] = eps_c
        # d overestimates the true distance by at most eps_used
        all_in = d + rc < t - margin
        all_out = d - eps_used - rc >= t + margin
        if all_in.any():
            inside_cells += int(np.prod(bsz[all_in].astype(object), axis=1).sum())
        undecided = ~(all_in | all_out)
        fine_cells = undecided & fine
        if fine_cells.any():
            df = d[fine_cells]
            inside_cells += int((df < t).sum())
            boundary_cells += int((np.abs(df - t) <= margin + eps).sum())
        split = undecided & ~fine
        blo = blo[split]
        bsz = bsz[split]
        for ax in range(n_dim):
            need = bsz[:, ax] > 1
            if not need.any():
                continue
            h1 = bsz[need, ax] // 2
            left_lo, left_sz = blo.copy(), bsz.copy()
            left_sz[need, ax] = h1
            right_lo, right_sz = blo[need].copy(), bsz[need].copy()
            right_lo[:, ax] += h1
            right_sz[:, ax] -= h1
            blo = np.concatenate([left_lo, right_lo])
            bsz = np.concatenate([left_sz, right_sz])
    volume = inside_cells * cell**n_dim
    error = boundary_cells * cell**n_dim
    return volume, error


def _mc_streams(seed: int):
    i = 0
    while True:
        yield np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed), i))))
        i += 1


_MC_CHUNK = 1 << 17


def _mc_tube(set_: CompactSet, t: float, n_samples: int, seed: int):
    lo, hi = bounding_box(set_)
    lo = lo - t
    hi = hi + t
    box_vol = float(np.prod(hi - lo))
    hits = 0
    streams = _mc_streams(seed)
    remaining = n_samples
    while remaining > 0:
        g = next(streams)
        m = min(_MC_CHUNK, remaining)
        x = lo + (hi - lo) * g.random((m, len(lo)))
        d = distances_to_set(x, set_, eps=max(t * 1e-9, 1e-15), band=(t, t))
        hits += int((d < t).sum())
        remaining -= m
    p = hits / n_samples
    volume = box_vol * p
    half_width = box_vol * math.sqrt(max(p * (1.0 - p), 0.0) / n_samples)
    return volume, half_width


def _auto_method(set_: CompactSet, t: float) -> TubeMethod:
    if isinstance(set_, PointSet):
        if set_.ambient_dim == 1:
            return TubeMethod.EXACT_1D
        if set_.min_gap() >= 2.0 * t:
            return TubeMethod.EXACT_CLOSED
        return TubeMethod.GRID_COUNT if set_.ambient_dim <= 3 else TubeMethod.MONTE_CARLO
    if isinstance(set_, (CantorLike, FractalStringBoundary)):
        return TubeMethod.EXACT_1D
    if isinstance(set_, (SierpinskiGasket, SierpinskiCarpet3D)):
        return TubeMethod.EXACT_CLOSED
    if isinstance(set_, PointCloud):
        if set_.ambient_dim == 1:
            return TubeMethod.EXACT_1D
        return TubeMethod.GRID_COUNT if set_.ambient_dim <= 3 else TubeMethod.MONTE_CARLO
    raise TypeError(f"unknown set descriptor {type(set_)!r}")


_METHOD_ALIASES = {
    "auto": None,
    "exact": "exact",
    "exact_1d": "exact",
    "exact_closed": "exact",
    "grid": TubeMethod.GRID_COUNT,
    "grid_count": TubeMethod.GRID_COUNT,
    "monte_carlo": TubeMethod.MONTE_CARLO,
    "mc": TubeMethod.MONTE_CARLO,
}


def tube_volume(
    set_: CompactSet,
    t: float,
    method: Optional[str] = None,
    *,
    cell: Optional[float] = None,
    mc_samples: int = 200_000,
    seed: int = 0,
    budget_rows: int = 8_000_000,
) -> TubeSample:
    """Measure the tube volume ``|A_t|``.

    ``method`` is one of ``"auto"`` (default), ``"exact"``, ``"grid"`` or
    ``"monte_carlo"``.  Exact methods report ``error_bound = 0``; the grid
    reports the conservative boundary-cell bound; Monte Carlo reports a
    one-standard-error confidence half-width.

    Raises :class:`ResolutionTooCoarse` when the grid refinement (or an
    exact sweep) cannot finish within its cell/segment budget.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    req = _METHOD_ALIASES.get(method or "auto", "unknown")
    if req == "unknown":
        raise ValueError(f"unknown tube-volume method {method!r}")
    chosen = _auto_method(set_, t) if req is None else req

    if chosen == "exact" or chosen in (TubeMethod.EXACT_1D, TubeMethod.EXACT_CLOSED):
        if isinstance(set_, CantorLike):
            return TubeSample(t, _cantor_tube_exact(set_, t), TubeMethod.EXACT_1D)
        if isinstance(set_, FractalStringBoundary):
            return TubeSample(t, _string_tube_exact(set_, t), TubeMethod.EXACT_1D)
        if isinstance(set_, (PointSet, PointCloud)) and set_.ambient_dim == 1:
            pts = [p[0] for p in set_.points]
            return TubeSample(t, _sweep_1d_points(pts, t), TubeMethod.EXACT_1D)
        if isinstance(set_, SierpinskiGasket):
            return TubeSample(t, _gasket_tube_exact(t), TubeMethod.EXACT_CLOSED)
        if isinstance(set_, SierpinskiCarpet3D):
            return TubeSample(t, _carpet_tube_exact(t), TubeMethod.EXACT_CLOSED)
        if isinstance(set_, PointSet) and set_.min_gap() >= 2.0 * t:
            vol = len(set_.points) * _unit_ball_volume(set_.ambient_dim) * t**set_.ambient_dim
            return TubeSample(t, vol, TubeMethod.EXACT_CLOSED)
        raise FractalZetaError(f"no exact tube volume available for {type(set_).__name__} at t={t}")

    if chosen == TubeMethod.GRID_COUNT:
        if set_.ambient_dim > 3:
            raise ResolutionTooCoarse("grid counting is limited to ambient dimension <= 3")
        if cell is None:
            cell = t / 64.0
        volume, error = _grid_tube(set_, t, cell, budget_rows=budget_rows)
        return TubeSample(t, volume, TubeMethod.GRID_COUNT, error)

    if chosen == TubeMethod.MONTE_CARLO:
        volume, hw = _mc_tube(set_, t, mc_samples, seed)
        return TubeSample(t, volume, TubeMethod.MONTE_CARLO, hw)

    raise ValueError(f"unhandled method {chosen!r}")


def sample_tube_curve(set_: CompactSet, t_values: Sequence[float], method=None, **kwargs) -> list[TubeSample]:
    """Tube volumes at an ascending grid of radii, with a monotonicity check."""
    ts = [float(t) for t in t_values]
    if any(t <= 0 for t in ts):
        raise ValueError("all t values must be positive")
    if any(b < a for a, b in zip(ts, ts[1:])):
        raise ValueError("t values must be sorted ascending")
    samples = [tube_volume(set_, t, method=method, **kwargs) for t in ts]
    for a, b in zip(samples, samples[1:]):
        slack = 3.0 * (a.error_bound + b.error_bound) + 1e-12 * max(1.0, a.volume)
        if a.volume > b.volume + slack:
            raise FractalZetaError(
                f"tube volume not monotone: |A_{a.t}| = {a.volume} > |A_{b.t}| = {b.volume}"
            )
    return samples


# ---------------------------------------------------------------------------
# JSON descriptor schema
# ---------------------------------------------------------------------------


def set_to_json(set_: CompactSet) -> dict:
    """Serialize a descriptor to the tagged-variant JSON schema."""
    if isinstance(set_, PointSet):
        return {"variant": "point_set", "points": [list(p) for p in set_.points]}
    if isinstance(set_, CantorLike):
        return {"variant": "cantor_like", "ratio": set_.ratio, "scale": set_.scale}
    if isinstance(set_, FractalStringBoundary):
        if set_.is_self_similar:
            return {
                "variant": "string_boundary",
                "base": set_.base,
                "multiplicity": set_.multiplicity,
                "scale": set_.scale,
            }
        return {"variant": "string_boundary", "lengths": list(set_.lengths)}
    if isinstance(set_, SierpinskiGasket):
        return {"variant": "sierpinski_gasket"}
    if isinstance(set_, SierpinskiCarpet3D):
        return {"variant": "sierpinski_carpet_3d"}
    if isinstance(set_, PointCloud):
        return {
            "variant": "point_cloud",
            "points": [list(p) for p in set_.points],
            "ambient_dim": set_.ambient_dim,
        }
    raise TypeError(f"unknown set descriptor {type(set_)!r}")


def set_from_json(data: dict) -> CompactSet:
    """Parse the tagged-variant JSON schema back into a descriptor."""
    variant = data.get("variant")
    if variant == "point_set":
        return PointSet(data["points"])
    if variant == "cantor_like":
        return CantorLike(ratio=data.get("ratio", 1.0 / 3.0), scale=data.get("scale", 1.0))
    if variant == "string_boundary":
        if "lengths" in data:
            return FractalStringBoundary(lengths=tuple(data["lengths"]))
        return FractalStringBoundary(
            base=float(data["base"]),
            multiplicity=int(data["multiplicity"]),
            scale=float(data.get("scale", 1.0)),
        )
    if variant == "sierpinski_gasket":
        return SierpinskiGasket()
    if variant == "sierpinski_carpet_3d":
        return SierpinskiCarpet3D()
    if variant == "point_cloud":
        return PointCloud(data["points"], ambient_dim=data.get("ambient_dim"))
    raise ValueError(f"unknown set variant {variant!r}")
