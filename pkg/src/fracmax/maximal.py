"""Standard and discrete fractional maximal operators on finite spaces.

The standard operator takes closed-ball averages over a finite radius set:

    M_a u(x) = max_{r in radii} r^a * avg_{B(x, r)} |u|.

Callers that want M_0 u >= |u| pointwise should include a radius below the
minimum gap; standard_radius_set() prepends min_gap / 2 for exactly that
purpose.

The discrete operator replaces ball averages by partition-of-unity
convolutions over a family of scales r_j:

    u_r(x)     = sum_i phi_i(x) * avg_{B(x_i, 3r)} u,
    M*_a u(x)  = max_j r_j^a * (|u|)_{r_j}(x),

with open 3r-balls, matching the cover construction.  Ball averages reuse
per-point prefix sums, so a full multi-scale sweep costs
O(n^2 + n * scales * log n).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covering import Cover, PartitionOfUnity, build_cover, build_partition_of_unity
from .errors import ParameterWindowError
from .space import MetricMeasureSpace, radius_scale_set


class BallAverager:
    """Prefix-sum tables for weighted ball averages of one function."""

    def __init__(self, space: MetricMeasureSpace, u: np.ndarray) -> None:
        self.space = space
        u = np.asarray(u, dtype=float)
        vals = u[space._order] * space.weights[space._order]
        self._prefix = np.concatenate(
            [np.zeros((space.n, 1)), np.cumsum(vals, axis=1)], axis=1
        )

    def average_table(self, radii: np.ndarray, *, closed: bool) -> np.ndarray:
        """avg_{B(x, r)} u for all points x (rows) and radii (columns).

        Empty balls yield 0; with positive radii every ball contains its
        center, so emptiness only occurs for r <= 0 on the open convention.
        """
        radii = np.asarray(radii, dtype=float)
        side = "right" if closed else "left"
        space = self.space
        out = np.empty((space.n, radii.size))
        for i in range(space.n):
            k = np.searchsorted(space._sorted_dist[i], radii, side=side)
            mass = space._weight_prefix[i, k]
            with np.errstate(invalid="ignore", divide="ignore"):
                out[i] = np.where(mass > 0.0, self._prefix[i, k] / mass, 0.0)
        return out


def standard_radius_set(
    space: MetricMeasureSpace,
    policy: str = "distances",
    *,
    base: float = 2.0,
    r_max: float | None = None,
) -> np.ndarray:
    """Radius grid for the standard operator: scale set plus min_gap / 2.

    The extra sub-gap radius makes the closed ball at the smallest radius a
    singleton, so M_0 u >= |u| pointwise.
    """
    scales = radius_scale_set(space, policy, base=base, r_max=r_max)
    gap = space.min_gap
    if gap is None:
        return scales
    return np.concatenate([[gap / 2.0], scales])


def fractional_maximal(
    space: MetricMeasureSpace,
    u: np.ndarray,
    alpha: float,
    radii: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Standard operator over closed balls at the given radii.

    Returns (values, argmax_radius); the argmax is the first radius in the
    given order attaining the max, for deterministic witnesses.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size == 0 or np.any(radii <= 0):
        raise ParameterWindowError("fractional_maximal needs a nonempty positive radius set")
    if alpha < 0:
        raise ParameterWindowError(f"alpha must be >= 0, got {alpha}")
    averages = BallAverager(space, np.abs(np.asarray(u, dtype=float))).average_table(
        radii, closed=True
    )
    scaled = averages * radii[np.newaxis, :] ** alpha
    best = scaled.argmax(axis=1)
    values = scaled[np.arange(space.n), best]
    return values, radii[best]


@dataclass(frozen=True)
class ScaleFamily:
    """Covers and partitions of unity for a fixed family of scales."""

    scales: tuple[float, ...]
    covers: tuple[Cover, ...]
    partitions: tuple[PartitionOfUnity, ...]


def build_scale_family(space: MetricMeasureSpace, scales) -> ScaleFamily:
    scales = tuple(float(r) for r in np.asarray(scales, dtype=float))
    if not scales:
        raise ParameterWindowError("scale family needs at least one scale")
    covers = tuple(build_cover(space, r) for r in scales)
    partitions = tuple(build_partition_of_unity(space, cov) for cov in covers)
    return ScaleFamily(scales=scales, covers=covers, partitions=partitions)


def discrete_convolution(
    space: MetricMeasureSpace,
    u: np.ndarray,
    cover: Cover,
    pou: PartitionOfUnity,
    alpha: float = 0.0,
) -> np.ndarray:
    """r^alpha * sum_i phi_i(x) * avg_{B(x_i, 3r)} u at the cover's scale."""
    u = np.asarray(u, dtype=float)
    ball_avgs = np.array(
        [space.average(u, mem) for mem in cover.members_3r]
    )
    vals = pou.phi.T @ ball_avgs
    return cover.r**alpha * vals


def discrete_fractional_maximal(
    space: MetricMeasureSpace,
    u: np.ndarray,
    alpha: float,
    family: ScaleFamily,
) -> tuple[np.ndarray, np.ndarray]:
    """M*_a u over the scale family; returns (values, argmax_scale).

    The convolutions act on |u|, and the argmax is the first scale in
    family order attaining the max.
    """
    if alpha < 0:
        raise ParameterWindowError(f"alpha must be >= 0, got {alpha}")
    absu = np.abs(np.asarray(u, dtype=float))
    table = np.stack(
        [
            discrete_convolution(space, absu, cov, pou, alpha)
            for cov, pou in zip(family.covers, family.partitions)
        ]
    )
    best = table.argmax(axis=0)
    values = table[best, np.arange(space.n)]
    scales = np.asarray(family.scales)[best]
    return values, scales


@dataclass(frozen=True)
class ComparabilityReport:
    """Pointwise band for M*_a u / M_a u over a space."""

    c_low: float
    c_high: float
    witness_low: dict | None
    witness_high: dict | None
    flags: tuple[str, ...] = ()


def comparability_report(
    space: MetricMeasureSpace,
    u: np.ndarray,
    alpha: float,
    radii: np.ndarray,
    family: ScaleFamily,
) -> ComparabilityReport:
    """Ratio band between the discrete and standard operators.

    Points where the standard operator vanishes (possible only for u = 0
    when the radius set reaches the diameter) are flagged rather than
    divided through.
    """
    m_std, _ = fractional_maximal(space, u, alpha, radii)
    m_disc, _ = discrete_fractional_maximal(space, u, alpha, family)
    if np.all(m_std == 0.0):
        return ComparabilityReport(
            float("nan"), float("nan"), None, None, ("zero_function",)
        )
    if np.any(m_std == 0.0):
        return ComparabilityReport(
            float("nan"), float("nan"), None, None, ("vanishing_standard_maximal",)
        )
    ratios = m_disc / m_std
    lo, hi = int(np.argmin(ratios)), int(np.argmax(ratios))
    return ComparabilityReport(
        c_low=float(ratios[lo]),
        c_high=float(ratios[hi]),
        witness_low={"x": space.ids[lo], "ratio": float(ratios[lo])},
        witness_high={"x": space.ids[hi], "ratio": float(ratios[hi])},
    )
