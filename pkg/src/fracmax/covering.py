"""Scale-r covers by balls and the Lipschitz partitions of unity they carry.

A cover at scale r is built from a greedy maximal r-separated net taken in
point-index order, so it is fully deterministic.  Member sets use open
balls.  The partition of unity is the standard bump construction

    psi_i(x) = clamp((6r - d(x, x_i)) / (3r), 0, 1),   phi_i = psi_i / sum_j psi_j,

which gives phi_i = 1/S(x) on the 3r-ball of its center, hard zeros outside
the open 6r-ball, and an O(1/r) Lipschitz constant that is measured
empirically rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterWindowError
from .space import MetricMeasureSpace


@dataclass(frozen=True)
class Cover:
    """Ball cover at one scale: centers plus open-ball member sets."""

    r: float
    center_indices: np.ndarray
    members_r: tuple
    members_3r: tuple
    members_6r: tuple

    @property
    def size(self) -> int:
        return len(self.center_indices)


def build_cover(space: MetricMeasureSpace, r: float) -> Cover:
    """Greedy maximal r-separated net with open-ball member sets.

    Points are scanned in index order; a point becomes a center unless it
    lies within distance < r of an existing center.  Every point then lies
    in at least one open B(center, r), and centers are pairwise >= r apart.
    """
    if not (r > 0.0):
        raise ParameterWindowError(f"cover scale must be positive, got {r}")
    centers: list[int] = []
    for i in range(space.n):
        if not centers or space.dist[i, centers].min() >= r:
            centers.append(i)
    center_idx = np.asarray(centers, dtype=int)
    members_r = tuple(space.ball_indices(c, r) for c in centers)
    members_3r = tuple(space.ball_indices(c, 3.0 * r) for c in centers)
    members_6r = tuple(space.ball_indices(c, 6.0 * r) for c in centers)
    covered = np.zeros(space.n, dtype=bool)
    for mem in members_r:
        covered[mem] = True
    assert covered.all(), "greedy net failed to cover the space"
    return Cover(
        r=float(r),
        center_indices=center_idx,
        members_r=members_r,
        members_3r=members_3r,
        members_6r=members_6r,
    )


def overlap_count(space: MetricMeasureSpace, cover: Cover) -> int:
    """Max over points of the number of open 6r-balls containing the point."""
    counts = np.zeros(space.n, dtype=int)
    for mem in cover.members_6r:
        counts[mem] += 1
    return int(counts.max())


@dataclass(frozen=True)
class PartitionOfUnity:
    """Partition subordinate to a cover: phi[i, x] for center i, point x."""

    r: float
    center_indices: np.ndarray
    phi: np.ndarray
    overlap: int
    nu: float
    lip_times_r: float
    max_sum_deviation: float


def partition_lipschitz_ratio(
    space: MetricMeasureSpace, phi: np.ndarray, r: float
) -> float:
    """Empirical sup over centers i and pairs x != y of |phi_i(x) - phi_i(y)| * r / d."""
    if space.n < 2:
        return 0.0
    off = ~np.eye(space.n, dtype=bool)
    inv_d = np.zeros_like(space.dist)
    inv_d[off] = 1.0 / space.dist[off]
    worst = 0.0
    for row in phi:
        ratios = np.abs(row[:, np.newaxis] - row[np.newaxis, :]) * inv_d
        worst = max(worst, float(ratios.max()))
    return worst * r


def build_partition_of_unity(space: MetricMeasureSpace, cover: Cover) -> PartitionOfUnity:
    """Normalized bump partition subordinate to the cover's 6r-balls.

    Invariants measured and stored: the columns sum to 1 (deviation
    recorded), phi_i >= nu on each open 3r member set with nu * N >= 1,
    and the empirical Lipschitz constant times r.
    """
    r = cover.r
    d_to_centers = space.dist[cover.center_indices, :]
    psi = np.clip((6.0 * r - d_to_centers) / (3.0 * r), 0.0, 1.0)
    col_sums = psi.sum(axis=0)
    assert np.all(col_sums >= 1.0 - 1e-12), "some point is uncovered at scale r"
    phi = psi / col_sums
    dev = float(np.abs(phi.sum(axis=0) - 1.0).max())
    nu = 1.0
    for i, mem in enumerate(cover.members_3r):
        if len(mem):
            nu = min(nu, float(phi[i, mem].min()))
    return PartitionOfUnity(
        r=r,
        center_indices=cover.center_indices,
        phi=phi,
        overlap=overlap_count(space, cover),
        nu=nu,
        lip_times_r=partition_lipschitz_ratio(space, phi, r),
        max_sum_deviation=dev,
    )
