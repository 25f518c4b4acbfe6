"""Pointwise gradient candidates of fractional smoothness and their checks.

A function g >= 0 is an s-gradient of u when

    |u(x) - u(y)| <= d(x, y)^s * (g(x) + g(y))      for all x != y.

The fractional variant replaces one g by a sequence (g_k) indexed by dyadic
annuli: level k only constrains pairs with 2^(-k-1) <= d(x, y) < 2^(-k).
Violations are measured in gradient units, i.e. as

    |u(x) - u(y)| / d(x, y)^s - (g(x) + g(y)),

so that the canonical candidate (the rowwise max of the difference
quotients) passes its own check with violation <= 0 exactly, without any
floating-point tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AnnulusRangeError, ParameterWindowError
from .space import MetricMeasureSpace


def annulus_index(d: float) -> int:
    """The unique integer k with 2^(-k-1) <= d < 2^(-k)."""
    if not (d > 0.0) or not math.isfinite(d):
        raise ParameterWindowError(f"annulus index needs a positive finite distance, got {d}")
    return -math.frexp(d)[1]


def annulus_index_matrix(dist: np.ndarray) -> np.ndarray:
    """Vectorized annulus indices; entries on the diagonal are meaningless."""
    safe = np.where(dist > 0.0, dist, 1.0)
    _, exps = np.frexp(safe)
    return -exps.astype(int)


def space_level_range(space: MetricMeasureSpace) -> tuple[int, int]:
    """Inclusive annulus range (k_min, k_max) covering all realized distances."""
    gap = space.min_gap
    if gap is None:
        raise ParameterWindowError("a single-point space has no annulus range")
    return annulus_index(space.diam), annulus_index(gap)


def _difference_quotients(space: MetricMeasureSpace, u: np.ndarray, s: float) -> np.ndarray:
    """Matrix |u(x) - u(y)| / d(x, y)^s with zero diagonal."""
    if s < 0:
        raise ParameterWindowError(f"smoothness exponent must be >= 0, got {s}")
    u = np.asarray(u, dtype=float)
    num = np.abs(u[:, np.newaxis] - u[np.newaxis, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        quot = num / space.dist**s
    np.fill_diagonal(quot, 0.0)
    return quot


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a gradient check: pass flag, worst violation, witness pair."""

    passed: bool
    worst_violation: float
    witness: dict | None


def canonical_gradient(space: MetricMeasureSpace, u: np.ndarray, s: float) -> np.ndarray:
    """g(x) = max_{y != x} |u(x) - u(y)| / d(x, y)^s, the one-sided envelope.

    Each pair constraint is met by one endpoint's term alone, so this is
    always a valid s-gradient (generally far from L^p optimal).
    """
    quot = _difference_quotients(space, u, s)
    if space.n == 1:
        return np.zeros(1)
    return quot.max(axis=1)


def is_hajlasz_gradient(
    space: MetricMeasureSpace,
    u: np.ndarray,
    g: np.ndarray,
    s: float,
    tol: float = 0.0,
) -> CheckResult:
    """Check the s-gradient inequality on every pair.

    The worst violation is reported in gradient units; values <= tol pass.
    """
    g = np.asarray(g, dtype=float)
    quot = _difference_quotients(space, u, s)
    slack = quot - (g[:, np.newaxis] + g[np.newaxis, :])
    np.fill_diagonal(slack, -np.inf)
    if space.n < 2:
        return CheckResult(True, 0.0, None)
    flat = int(np.argmax(slack))
    i, j = flat // space.n, flat % space.n
    worst = float(slack[i, j])
    witness = {
        "x": space.ids[i],
        "y": space.ids[j],
        "d": float(space.dist[i, j]),
        "quotient": float(quot[i, j]),
        "g_sum": float(g[i] + g[j]),
    }
    return CheckResult(worst <= tol, worst, witness)


# ----------------------------------------------------------------------
# annulus-indexed sequences
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class GradientSequence:
    """Sequence (g_k) for k = k_min..k_max, stored as a (K, n) array."""

    k_min: int
    k_max: int
    levels: np.ndarray

    def __post_init__(self) -> None:
        levels = np.asarray(self.levels, dtype=float)
        if levels.ndim != 2 or levels.shape[0] != self.k_max - self.k_min + 1:
            raise ParameterWindowError(
                f"levels shape {levels.shape} does not match k range "
                f"[{self.k_min}, {self.k_max}]"
            )
        object.__setattr__(self, "levels", levels)

    @property
    def k_values(self) -> range:
        return range(self.k_min, self.k_max + 1)

    def level(self, k: int) -> np.ndarray:
        if not self.k_min <= k <= self.k_max:
            raise AnnulusRangeError(f"level {k} outside [{self.k_min}, {self.k_max}]")
        return self.levels[k - self.k_min]

    def scaled(self, factor: float) -> "GradientSequence":
        return GradientSequence(self.k_min, self.k_max, factor * self.levels)


def canonical_fractional_gradient(
    space: MetricMeasureSpace, u: np.ndarray, s: float
) -> GradientSequence:
    """Per-level one-sided envelopes over the pairs of each dyadic annulus."""
    k_min, k_max = space_level_range(space)
    quot = _difference_quotients(space, u, s)
    ann = annulus_index_matrix(space.dist)
    levels = np.zeros((k_max - k_min + 1, space.n))
    off = ~np.eye(space.n, dtype=bool)
    for k in range(k_min, k_max + 1):
        mask = off & (ann == k)
        if mask.any():
            levels[k - k_min] = np.where(mask, quot, 0.0).max(axis=1)
    return GradientSequence(k_min, k_max, levels)


def is_fractional_gradient(
    space: MetricMeasureSpace,
    u: np.ndarray,
    seq: GradientSequence,
    s: float,
    tol: float = 0.0,
) -> CheckResult:
    """Check the per-annulus gradient inequality for every pair.

    Raises AnnulusRangeError if some realized pair falls outside the
    sequence's level range.
    """
    if space.n < 2:
        return CheckResult(True, 0.0, None)
    quot = _difference_quotients(space, u, s)
    ann = annulus_index_matrix(space.dist)
    iu, ju = np.triu_indices(space.n, k=1)
    ks = ann[iu, ju]
    lo, hi = int(ks.min()), int(ks.max())
    if lo < seq.k_min or hi > seq.k_max:
        raise AnnulusRangeError(
            f"realized annuli [{lo}, {hi}] exceed sequence range "
            f"[{seq.k_min}, {seq.k_max}]"
        )
    gi = seq.levels[ks - seq.k_min, iu]
    gj = seq.levels[ks - seq.k_min, ju]
    slack = quot[iu, ju] - (gi + gj)
    pos = int(np.argmax(slack))
    worst = float(slack[pos])
    i, j = int(iu[pos]), int(ju[pos])
    witness = {
        "x": space.ids[i],
        "y": space.ids[j],
        "d": float(space.dist[i, j]),
        "k": int(ks[pos]),
        "quotient": float(quot[i, j]),
        "g_sum": float(quot[i, j] - worst),
    }
    return CheckResult(worst <= tol, worst, witness)


# ----------------------------------------------------------------------
# mixed norms
# ----------------------------------------------------------------------
def _lq_along_levels(levels: np.ndarray, q: float) -> np.ndarray:
    if math.isinf(q):
        return np.abs(levels).max(axis=0)
    return (np.abs(levels) ** q).sum(axis=0) ** (1.0 / q)


def mixed_norm(
    space: MetricMeasureSpace,
    seq: GradientSequence | np.ndarray,
    p: float,
    q: float,
    mode: str,
) -> float:
    """Mixed norm of a level array: "Lp(lq)" or "lq(Lp)".

    "Lp(lq)" takes the little-lq norm across levels pointwise and then the
    weighted L^p norm; "lq(Lp)" takes per-level L^p norms and combines them
    in little-lq.  Both accept any p, q > 0 and infinity.
    """
    from .space import lp_norm

    levels = seq.levels if isinstance(seq, GradientSequence) else np.asarray(seq, dtype=float)
    if (not math.isinf(p) and p <= 0) or (not math.isinf(q) and q <= 0):
        raise ParameterWindowError("mixed norms need p, q > 0")
    if mode == "Lp(lq)":
        return lp_norm(space, _lq_along_levels(levels, q), p)
    if mode == "lq(Lp)":
        per_level = np.array([lp_norm(space, row, p) for row in levels])
        if math.isinf(q):
            return float(per_level.max()) if per_level.size else 0.0
        return float((per_level**q).sum() ** (1.0 / q))
    raise ParameterWindowError(f"unknown mixed norm mode {mode!r}")


# ----------------------------------------------------------------------
# smoothness parameters
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class SmoothnessParams:
    """Exponent bundle (s, alpha, p, q, t, eps, eps_prime, delta).

    Only the fields a given operation needs must be set; the validators
    enforce the admissible windows for each transfer regime.
    """

    s: float
    alpha: float = 0.0
    p: float | None = None
    q: float | None = None
    t: float | None = None
    eps: float | None = None
    eps_prime: float | None = None
    delta: float | None = None

    def validate_scalar_transfer(self, Q: float) -> None:
        """Windows for the single-gradient transfer: s, s + alpha, and t."""
        if self.s < 0 or self.alpha < 0:
            raise ParameterWindowError("need s >= 0 and alpha >= 0")
        if self.s > 1.0:
            raise ParameterWindowError(f"scalar transfer needs s <= 1, got {self.s}")
        if self.s + self.alpha <= 0:
            raise ParameterWindowError("need s + alpha > 0")
        if self.t is None:
            raise ParameterWindowError("scalar transfer needs t")
        if self.t < Q / (Q + self.s):
            raise ParameterWindowError(
                f"need t >= Q/(Q+s) = {Q / (Q + self.s):.6g}, got {self.t}"
            )

    def validate_sequence_transfer(self, Q: float) -> None:
        """Windows for the sequence transfer: delta, eps, eps_prime, t."""
        if not 0 < self.s:
            raise ParameterWindowError("need s > 0")
        if self.alpha < 0 or not self.s + self.alpha < 1:
            raise ParameterWindowError("need alpha >= 0 and s + alpha < 1")
        if self.delta is None or not 0 < self.delta < 1 - self.s - self.alpha:
            raise ParameterWindowError(
                f"need 0 < delta < 1 - s - alpha = {1 - self.s - self.alpha:.6g}, "
                f"got {self.delta}"
            )
        if (
            self.eps is None
            or self.eps_prime is None
            or not 0 < self.eps < self.eps_prime < self.s
        ):
            raise ParameterWindowError(
                f"need 0 < eps < eps_prime < s, got eps={self.eps}, "
                f"eps_prime={self.eps_prime}, s={self.s}"
            )
        if self.t is None or self.t < Q / (Q + self.eps):
            raise ParameterWindowError(
                f"need t >= Q/(Q+eps) = {Q / (Q + self.eps):.6g}, got {self.t}"
            )


def default_sequence_params(
    s: float,
    alpha: float,
    p: float,
    q: float,
    Q: float,
    *,
    r: float | None = None,
) -> SmoothnessParams:
    """Default (delta, eps, eps_prime, t) for the sequence transfer.

    r defaults to min(p, q); the per-level route uses r = p.  The recipe is

        delta = (1 - (s + alpha)) / 2,
        eps   = max(s, s + (Q - Q r) / r) / 2,
        eps'  = (eps + s) / 2,
        t     = Q / (Q + eps),

    which satisfies the admissible windows whenever 0 < s + alpha < 1 and
    r > Q / (Q + s).
    """
    if r is None:
        r = min(p, q)
    delta = 0.5 * (1.0 - (s + alpha))
    eps = 0.5 * max(s, s + (Q - Q * r) / r)
    eps_prime = 0.5 * (eps + s)
    t = Q / (Q + eps)
    return SmoothnessParams(
        s=s, alpha=alpha, p=p, q=q, t=t, eps=eps, eps_prime=eps_prime, delta=delta
    )
