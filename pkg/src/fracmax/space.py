"""Finite metric measure spaces: balls, averages, and geometric constants.

A space is a finite point set with a metric given as a full distance matrix
and a strictly positive weight per point.  All measure-theoretic quantities
(measure, average, L^p norm) are weighted sums.  Ball queries run in
O(log n) after an O(n^2 log n) sort that is cached on the space.

Ball conventions used by the estimators:

* The doubling constant is the supremum over r > 0 of
  mu(B(x, 2r)) / mu(B(x, r)) for open balls.  On a finite space that
  supremum is attained at radii in the distance set, so the estimator
  evaluates open balls exactly at the supplied grid radii.
* The lower mass bound mu(B(x, r)) >= c_l * r^Q is certified with closed
  balls at the supplied radii, which makes the reported c_l a bound that
  holds by construction at every grid pair.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyBallError, ParameterWindowError, SpaceFormatError

DEFAULT_TRIANGLE_AUDIT_LIMIT = 256
TRIANGLE_SAMPLE_COUNT = 200_000


def _as_float_matrix(rows: Sequence[Sequence[float]]) -> np.ndarray:
    mat = np.asarray(rows, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise SpaceFormatError(f"distance matrix must be square, got shape {mat.shape}")
    return mat


def audit_metric(
    dist: np.ndarray,
    *,
    triangle_limit: int = DEFAULT_TRIANGLE_AUDIT_LIMIT,
    sample_count: int = TRIANGLE_SAMPLE_COUNT,
    seed: int = 0,
) -> dict:
    """Check metric axioms on a distance matrix.

    Symmetry, zero diagonal, and off-diagonal positivity are checked
    exhaustively.  The triangle inequality is checked exhaustively for
    n <= triangle_limit and on a seeded sample of triples above that.
    """
    n = dist.shape[0]
    report: dict = {
        "n": n,
        "symmetric": bool(np.array_equal(dist, dist.T)),
        "zero_diagonal": bool(np.all(np.diag(dist) == 0.0)),
        "finite": bool(np.all(np.isfinite(dist))),
    }
    off = dist[~np.eye(n, dtype=bool)]
    report["positive_offdiagonal"] = bool(off.size == 0 or np.all(off > 0.0))

    worst = 0.0
    if n <= triangle_limit:
        mode = "exhaustive"
        for i in range(n):
            slack = dist - (dist[:, i : i + 1] + dist[i : i + 1, :])
            worst = max(worst, float(slack.max()))
    else:
        mode = "sampled"
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, n, size=(sample_count, 3))
        slack = dist[idx[:, 0], idx[:, 1]] - (
            dist[idx[:, 0], idx[:, 2]] + dist[idx[:, 2], idx[:, 1]]
        )
        worst = float(slack.max())
    report["triangle_mode"] = mode
    report["worst_triangle_slack"] = worst
    report["triangle_ok"] = bool(worst <= 1e-12)
    report["ok"] = bool(
        report["symmetric"]
        and report["zero_diagonal"]
        and report["finite"]
        and report["positive_offdiagonal"]
        and report["triangle_ok"]
    )
    return report


@dataclass(frozen=True)
class MetricMeasureSpace:
    """Immutable finite metric measure space.

    ids hold the external point identifiers (ints or strings); all array
    functions address points by index 0..n-1 in id order.
    """

    ids: tuple
    dist: np.ndarray
    weights: np.ndarray
    coords: np.ndarray | None = None
    _order: np.ndarray = field(init=False, repr=False, compare=False)
    _sorted_dist: np.ndarray = field(init=False, repr=False, compare=False)
    _weight_prefix: np.ndarray = field(init=False, repr=False, compare=False)
    _id_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        dist = _as_float_matrix(self.dist)
        n = dist.shape[0]
        if len(self.ids) != n:
            raise SpaceFormatError("ids and distance matrix size disagree")
        if len(set(self.ids)) != n:
            raise SpaceFormatError("point ids must be unique")
        weights = np.asarray(self.weights, dtype=float)
        if weights.shape != (n,):
            raise SpaceFormatError("weights must be one value per point")
        if not np.all(weights > 0.0):
            raise SpaceFormatError("weights must be strictly positive")
        report = audit_metric(dist)
        if not report["ok"]:
            raise SpaceFormatError(f"metric axioms violated: {report}")
        order = np.argsort(dist, axis=1, kind="stable")
        sorted_dist = np.take_along_axis(dist, order, axis=1)
        wprefix = np.concatenate(
            [np.zeros((n, 1)), np.cumsum(weights[order], axis=1)], axis=1
        )
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_order", order)
        object.__setattr__(self, "_sorted_dist", sorted_dist)
        object.__setattr__(self, "_weight_prefix", wprefix)
        object.__setattr__(self, "_id_index", {pid: i for i, pid in enumerate(self.ids)})
        dist.setflags(write=False)
        weights.setflags(write=False)

    # ------------------------------------------------------------------
    # basic geometry
    # ------------------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def diam(self) -> float:
        return float(self.dist.max()) if self.n > 1 else 0.0

    @property
    def min_gap(self) -> float | None:
        """Smallest positive distance; None for a single point."""
        if self.n < 2:
            return None
        return float(self._sorted_dist[:, 1].min())

    @property
    def total_measure(self) -> float:
        return float(self.weights.sum())

    def index(self, point_id) -> int:
        try:
            return self._id_index[point_id]
        except KeyError:
            raise SpaceFormatError(f"unknown point id {point_id!r}") from None

    # ------------------------------------------------------------------
    # balls
    # ------------------------------------------------------------------
    def ball_indices(self, i: int, r: float, *, closed: bool = False) -> np.ndarray:
        """Indices of the ball around index i, in increasing-distance order."""
        side = "right" if closed else "left"
        k = int(np.searchsorted(self._sorted_dist[i], r, side=side))
        return self._order[i, :k]

    def ball(self, point_id, r: float, *, closed: bool = False) -> frozenset:
        """Ball membership as a set of point ids.

        Open balls are {y : d(y, x) < r}; closed balls use <=.  An open ball
        with r > 0 always contains its center.
        """
        i = self.index(point_id)
        return frozenset(self.ids[j] for j in self.ball_indices(i, r, closed=closed))

    def ball_measure(self, i: int, r: float, *, closed: bool = False) -> float:
        side = "right" if closed else "left"
        k = int(np.searchsorted(self._sorted_dist[i], r, side=side))
        return float(self._weight_prefix[i, k])

    def ball_measure_table(self, radii: np.ndarray, *, closed: bool) -> np.ndarray:
        """mu(B(x, r)) for every point (rows) and every radius (columns)."""
        radii = np.asarray(radii, dtype=float)
        side = "right" if closed else "left"
        out = np.empty((self.n, radii.size))
        for i in range(self.n):
            k = np.searchsorted(self._sorted_dist[i], radii, side=side)
            out[i] = self._weight_prefix[i, k]
        return out

    # ------------------------------------------------------------------
    # measure and integration
    # ------------------------------------------------------------------
    def measure(self, points: Iterable) -> float:
        """Total weight of a set of point ids."""
        idx = [self.index(p) for p in points]
        return float(self.weights[idx].sum()) if idx else 0.0

    def average(self, u: np.ndarray, members: np.ndarray) -> float:
        """Weighted mean of u over an index set; errors if the set is empty."""
        if len(members) == 0:
            raise EmptyBallError("average over an empty point set")
        w = self.weights[members]
        return float(np.dot(u[members], w) / w.sum())


def lp_norm(space: MetricMeasureSpace, u: np.ndarray, p: float) -> float:
    """Weighted L^p norm; p = inf gives the max of |u| (all weights positive)."""
    u = np.asarray(u, dtype=float)
    if math.isinf(p):
        return float(np.abs(u).max()) if u.size else 0.0
    if p <= 0:
        raise ParameterWindowError("L^p norm needs p > 0")
    return float(np.sum(np.abs(u) ** p * space.weights) ** (1.0 / p))


# ----------------------------------------------------------------------
# radius grids
# ----------------------------------------------------------------------
def radius_scale_set(
    space: MetricMeasureSpace,
    policy: str = "dyadic",
    *,
    base: float = 2.0,
    count: int | None = None,
    r_max: float | None = None,
) -> np.ndarray:
    """Finite radius grid for sup-over-radius computations.

    policy "distances" returns the distinct positive distances, clipped to
    (0, r_max].  policy "dyadic" returns {min_gap * base^k : k = 0, 1, ...}
    clipped to (0, r_max].  r_max defaults to the diameter.  A single-point
    space yields an empty grid.
    """
    if space.n < 2:
        return np.array([])
    cap = space.diam if r_max is None else float(r_max)
    if policy in ("distances", "distinct-distances"):
        vals = np.unique(space.dist[space.dist > 0.0])
        vals = vals[vals <= cap]
        return vals if count is None else vals[:count]
    if policy == "dyadic":
        if base <= 1.0:
            raise ParameterWindowError("dyadic policy needs base > 1")
        gap = space.min_gap
        scales = []
        r = gap
        while r <= cap * (1 + 1e-12):
            scales.append(min(r, cap))
            if count is not None and len(scales) >= count:
                break
            r *= base
        return np.array(scales)
    raise ParameterWindowError(f"unknown radius policy {policy!r}")


# ----------------------------------------------------------------------
# geometric constants
# ----------------------------------------------------------------------
def estimate_doubling_constant(
    space: MetricMeasureSpace, radius_grid: np.ndarray
) -> tuple[float, dict | None]:
    """Smallest constant with mu(B(x, 2r)) <= c_d * mu(B(x, r)) on the grid.

    Open balls are evaluated exactly at the grid radii; the max over the
    grid of mu(B(x, 2r)) / mu(B(x, r)) is returned with its first witness
    in (radius, point) scan order.  With the distinct-distance grid this
    equals the open-ball supremum over all r <= max(radius_grid).
    """
    radii = np.asarray(radius_grid, dtype=float)
    if radii.size == 0:
        return 1.0, None
    mu_r = space.ball_measure_table(radii, closed=False)
    mu_2r = space.ball_measure_table(2.0 * radii, closed=False)
    ratios = mu_2r / mu_r
    best = float(ratios.max())
    flat = int(np.argmax(ratios.T))  # radius-major: first radius, then point
    r_idx, x_idx = flat // space.n, flat % space.n
    witness = {
        "x": space.ids[x_idx],
        "r": float(radii[r_idx]),
        "mu_ball_2r": float(mu_2r[x_idx, r_idx]),
        "mu_ball_r": float(mu_r[x_idx, r_idx]),
    }
    return best, witness


def homogeneous_dimension(c_d: float) -> float:
    """Dimension exponent log2(c_d) associated with a doubling constant."""
    if c_d < 1.0:
        raise ParameterWindowError(f"doubling constant must be >= 1, got {c_d}")
    return math.log2(c_d)


def estimate_lower_mass_constant(
    space: MetricMeasureSpace, Q: float, radii: np.ndarray
) -> tuple[float, dict | None]:
    """Largest c_l with mu(B(x, r)) >= c_l * r^Q at every grid pair.

    Closed balls at the given radii; the constant is the min of
    mu(B(x, r)) / r^Q, so the bound holds by construction on the grid.
    """
    if Q <= 0:
        raise ParameterWindowError(f"lower mass bound needs Q > 0, got {Q}")
    radii = np.asarray(radii, dtype=float)
    if radii.size == 0:
        return float("nan"), None
    if np.any(radii <= 0):
        raise ParameterWindowError("lower mass radii must be positive")
    mu = space.ball_measure_table(radii, closed=True)
    ratios = mu / radii[np.newaxis, :] ** Q
    best = float(ratios.min())
    flat = int(np.argmin(ratios.T))
    r_idx, x_idx = flat // space.n, flat % space.n
    witness = {
        "x": space.ids[x_idx],
        "r": float(radii[r_idx]),
        "mu_ball_r": float(mu[x_idx, r_idx]),
    }
    return best, witness


@dataclass(frozen=True)
class GeometryConstants:
    """Doubling constant, homogeneous dimension, and lower mass constant."""

    c_d: float
    Q: float
    c_l: float | None
    radius_grid: tuple[float, ...]
    doubling_witness: dict | None
    lower_mass_witness: dict | None

    def to_dict(self) -> dict:
        return {
            "c_d": self.c_d,
            "Q": self.Q,
            "c_l": self.c_l,
            "radius_grid": list(self.radius_grid),
            "doubling_witness": self.doubling_witness,
            "lower_mass_witness": self.lower_mass_witness,
        }


def estimate_geometry(
    space: MetricMeasureSpace,
    policy: str = "distances",
    *,
    base: float = 2.0,
    r_max: float | None = None,
) -> GeometryConstants:
    """Estimate (c_d, Q, c_l) over one radius grid.

    c_l is only defined for Q > 0 and is reported as None otherwise.
    """
    grid = radius_scale_set(space, policy, base=base, r_max=r_max)
    c_d, dwit = estimate_doubling_constant(space, grid)
    Q = homogeneous_dimension(c_d)
    if Q > 0 and grid.size:
        c_l, lwit = estimate_lower_mass_constant(space, Q, grid)
    else:
        c_l, lwit = None, None
    return GeometryConstants(
        c_d=c_d,
        Q=Q,
        c_l=c_l,
        radius_grid=tuple(float(r) for r in grid),
        doubling_witness=dwit,
        lower_mass_witness=lwit,
    )


# ----------------------------------------------------------------------
# serialization
# ----------------------------------------------------------------------
def _euclidean_matrix(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, np.newaxis, :] - coords[np.newaxis, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def space_from_coords(
    coords: Sequence[Sequence[float]],
    *,
    ids: Sequence | None = None,
    weights: Sequence[float] | None = None,
) -> MetricMeasureSpace:
    """Build a space from Euclidean coordinates."""
    pts = np.asarray(coords, dtype=float)
    if pts.ndim != 2:
        raise SpaceFormatError("coords must be a 2d array")
    n = pts.shape[0]
    return MetricMeasureSpace(
        ids=tuple(ids) if ids is not None else tuple(range(n)),
        dist=_euclidean_matrix(pts),
        weights=np.ones(n) if weights is None else np.asarray(weights, dtype=float),
        coords=pts,
    )


def space_to_dict(space: MetricMeasureSpace) -> dict:
    """JSON-ready dict; coordinate spaces round-trip through coords."""
    doc: dict = {"points": list(space.ids), "weights": [float(w) for w in space.weights]}
    if space.coords is not None:
        doc["metric"] = "euclidean"
        doc["coords"] = [[float(v) for v in row] for row in space.coords]
    else:
        doc["metric"] = "matrix"
        doc["dist"] = [[float(v) for v in row] for row in space.dist]
    return doc


def space_from_dict(doc: dict) -> MetricMeasureSpace:
    try:
        ids = tuple(doc["points"])
        metric = doc.get("metric", "matrix")
    except (KeyError, TypeError) as exc:
        raise SpaceFormatError(f"malformed space document: {exc}") from exc
    n = len(ids)
    weights = np.asarray(doc.get("weights", np.ones(n)), dtype=float)
    if metric == "euclidean":
        if "coords" not in doc:
            raise SpaceFormatError("euclidean metric requires coords")
        coords = np.asarray(doc["coords"], dtype=float)
        return MetricMeasureSpace(
            ids=ids, dist=_euclidean_matrix(coords), weights=weights, coords=coords
        )
    if metric == "matrix":
        if "dist" not in doc:
            raise SpaceFormatError("matrix metric requires dist")
        return MetricMeasureSpace(
            ids=ids, dist=_as_float_matrix(doc["dist"]), weights=weights
        )
    raise SpaceFormatError(f"unknown metric kind {metric!r}")


def save_space(space: MetricMeasureSpace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(space_to_dict(space), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_space(path) -> MetricMeasureSpace:
    with open(path, encoding="utf-8") as fh:
        return space_from_dict(json.load(fh))
