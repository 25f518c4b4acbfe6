"""Empirical certification of the smoothing inequalities.

Every check hunts for the smallest admissible constant of one inequality
over a finite sweep (points, radii, pairs, or corpus instances) and
returns a VerificationReport carrying the constant, a replayable witness,
and pass/fail semantics:

* vacuous sweeps (for example a constant function) pass with constant 0
  and a "vacuous" flag;
* a zero right-hand side against a nonzero left-hand side is a hard
  failure, never an infinite constant silently swallowed.

Increments below REL_ZERO relative to the function scale are treated as
exact zeros so that constants of genuinely constant data come out as 0
rather than floating-point dust.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterWindowError
from .gradients import (
    GradientSequence,
    SmoothnessParams,
    _difference_quotients,
    annulus_index_matrix,
    canonical_fractional_gradient,
    canonical_gradient,
    default_sequence_params,
    mixed_norm,
)
from .maximal import (
    BallAverager,
    ScaleFamily,
    build_scale_family,
    discrete_fractional_maximal,
    fractional_maximal,
    standard_radius_set,
)
from .norms import besov_norm, hajlasz_norm, triebel_lizorkin_norm
from .space import (
    MetricMeasureSpace,
    estimate_geometry,
    lp_norm,
    radius_scale_set,
)

REL_ZERO = 1e-12


@dataclass(frozen=True)
class VerificationReport:
    """One inequality, its smallest admissible constant, and a witness."""

    check_id: str
    params: dict
    best_constant: float
    witness: dict | None
    passed: bool
    flags: tuple[str, ...] = ()
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "params": self.params,
            "best_constant": self.best_constant,
            "witness": self.witness,
            "passed": self.passed,
            "flags": list(self.flags),
            "details": self.details,
        }


class _ConstantHunt:
    """Accumulates LHS <= C * RHS samples into the smallest admissible C."""

    def __init__(self, zero_scale: float) -> None:
        self.zero = REL_ZERO * max(1.0, zero_scale)
        self.best = 0.0
        self.witness: dict | None = None
        self.skipped = 0
        self.total = 0
        self.failed: dict | None = None

    def offer(self, lhs: float, rhs: float, meta: dict) -> None:
        lhs, rhs = float(lhs), float(rhs)
        self.total += 1
        if lhs <= self.zero and rhs <= 0.0:
            self.skipped += 1
            return
        if rhs <= 0.0:
            if self.failed is None:
                self.failed = {**meta, "lhs": lhs, "rhs": rhs}
            return
        ratio = lhs / rhs
        if ratio > self.best:
            self.best = ratio
            self.witness = {**meta, "lhs": lhs, "rhs": rhs}

    def report(self, check_id: str, params: dict, details: dict | None = None) -> VerificationReport:
        details = dict(details or {})
        details.update({"samples": self.total, "skipped": self.skipped})
        flags: list[str] = []
        if self.failed is not None:
            return VerificationReport(
                check_id,
                params,
                float("inf"),
                self.failed,
                passed=False,
                flags=("zero_rhs",),
                details=details,
            )
        if self.witness is None:
            flags.append("vacuous")
        return VerificationReport(
            check_id, params, self.best, self.witness, True, tuple(flags), details
        )


# ----------------------------------------------------------------------
# Poincare-type checks
# ----------------------------------------------------------------------
def check_poincare(
    space: MetricMeasureSpace,
    u: np.ndarray,
    g: np.ndarray,
    s: float,
    p_exp: float,
    radii: np.ndarray | None = None,
) -> VerificationReport:
    """Smallest C with avg_B(x,r) |u - u_B| <= C r^s (avg_B(x,2r) g^p)^(1/p).

    Closed balls at every grid radius; (x, r) pairs where both sides vanish
    are skipped, and a vanishing right side against a nonvanishing left
    side fails the check.
    """
    u = np.asarray(u, dtype=float)
    g = np.asarray(g, dtype=float)
    if radii is None:
        radii = radius_scale_set(space, "distances")
    radii = np.asarray(radii, dtype=float)
    hunt = _ConstantHunt(float(np.abs(u).max(initial=0.0)))
    gp_avg = BallAverager(space, g**p_exp).average_table(2.0 * radii, closed=True)
    for ri, r in enumerate(radii):
        for x in range(space.n):
            members = space.ball_indices(x, r, closed=True)
            u_ball = space.average(u, members)
            lhs = space.average(np.abs(u - u_ball), members)
            rhs = r**s * gp_avg[x, ri] ** (1.0 / p_exp)
            hunt.offer(lhs, rhs, {"x": space.ids[x], "r": float(r)})
    return hunt.report(
        "poincare",
        {"s": s, "p": p_exp},
        {"radii": [float(r) for r in radii]},
    )


def _inf_center_lp(vals: np.ndarray, weights: np.ndarray, p_star: float) -> float:
    """inf_c (sum w |v - c|^p* / sum w)^(1/p*) over c in [min v, max v].

    Convex for p* >= 1 (ternary search); for p* < 1 the objective is
    concave between data values, so the minimum sits at a data value.
    """
    total = weights.sum()

    def f(c: float) -> float:
        return float((weights @ np.abs(vals - c) ** p_star / total) ** (1.0 / p_star))

    lo, hi = float(vals.min()), float(vals.max())
    if lo == hi:
        return 0.0
    if p_star < 1.0:
        return min(f(c) for c in np.unique(vals))
    for _ in range(120):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    mid = 0.5 * (lo + hi)
    return min(f(lo), f(mid), f(hi))


def check_sobolev_poincare(
    space: MetricMeasureSpace,
    u: np.ndarray,
    g: np.ndarray,
    s: float,
    p_exp: float,
    Q: float,
    radii: np.ndarray | None = None,
) -> VerificationReport:
    """Sharpened left side: inf_c (avg_B |u - c|^p*)^(1/p*), p* = Qp/(Q - sp)."""
    if Q <= s * p_exp:
        raise ParameterWindowError(
            f"p*(s) undefined: need Q > s*p, got Q={Q}, s={s}, p={p_exp}"
        )
    p_star = Q * p_exp / (Q - s * p_exp)
    u = np.asarray(u, dtype=float)
    g = np.asarray(g, dtype=float)
    if radii is None:
        radii = radius_scale_set(space, "distances")
    radii = np.asarray(radii, dtype=float)
    hunt = _ConstantHunt(float(np.abs(u).max(initial=0.0)))
    gp_avg = BallAverager(space, g**p_exp).average_table(2.0 * radii, closed=True)
    for ri, r in enumerate(radii):
        for x in range(space.n):
            members = space.ball_indices(x, r, closed=True)
            lhs = _inf_center_lp(u[members], space.weights[members], p_star)
            rhs = r**s * gp_avg[x, ri] ** (1.0 / p_exp)
            hunt.offer(lhs, rhs, {"x": space.ids[x], "r": float(r)})
    return hunt.report(
        "sobolev-poincare",
        {"s": s, "p": p_exp, "Q": Q, "p_star": p_star},
        {"radii": [float(r) for r in radii]},
    )


def check_fractional_poincare(
    space: MetricMeasureSpace,
    u: np.ndarray,
    seq: GradientSequence,
    s: float,
    p_exp: float,
    eps: float,
    eps_prime: float,
    ball_levels: range | None = None,
) -> VerificationReport:
    """Per-level Poincare inequality for a fractional gradient sequence.

    For each point x and level k the right side sums the tail j >= k - 2,

        2^(-k eps') sum_j 2^(-j (s - eps')) (avg_B(x, 2^(1-k)) g_j^p)^(1/p),

    truncated to the sequence's level range (truncation recorded).
    """
    if not 0.0 < eps < eps_prime < s:
        raise ParameterWindowError(
            f"need 0 < eps < eps' < s, got eps={eps}, eps'={eps_prime}, s={s}"
        )
    u = np.asarray(u, dtype=float)
    if ball_levels is None:
        ball_levels = seq.k_values
    hunt = _ConstantHunt(float(np.abs(u).max(initial=0.0)))
    avg_tables = [
        BallAverager(space, np.asarray(seq.level(j), dtype=float) ** p_exp)
        for j in seq.k_values
    ]
    for k in ball_levels:
        r1, r2 = 2.0 ** (-k), 2.0 ** (-k + 1)
        j_lo = max(k - 2, seq.k_min)
        coeffs = [
            2.0 ** (-k * eps_prime) * 2.0 ** (-j * (s - eps_prime))
            for j in range(j_lo, seq.k_max + 1)
        ]
        tails = [
            avg_tables[j - seq.k_min].average_table(np.array([r2]), closed=True)[:, 0]
            for j in range(j_lo, seq.k_max + 1)
        ]
        for x in range(space.n):
            members = space.ball_indices(x, r1, closed=True)
            u_ball = space.average(u, members)
            lhs = space.average(np.abs(u - u_ball), members)
            rhs = sum(
                co * tail[x] ** (1.0 / p_exp) for co, tail in zip(coeffs, tails)
            )
            hunt.offer(lhs, float(rhs), {"x": space.ids[x], "k": int(k)})
    return hunt.report(
        "fractional-poincare",
        {"s": s, "p": p_exp, "eps": eps, "eps_prime": eps_prime},
        {
            "levels": [int(k) for k in ball_levels],
            "tail_truncated_at": int(seq.k_max),
        },
    )


# ----------------------------------------------------------------------
# gradient transfers
# ----------------------------------------------------------------------
def _default_family(space: MetricMeasureSpace) -> ScaleFamily:
    return build_scale_family(space, radius_scale_set(space, "dyadic"))


def _best_pair_constant(
    space: MetricMeasureSpace,
    F: np.ndarray,
    sigma: float,
    denom_for_pair,
    check_id: str,
    params: dict,
    details: dict,
) -> VerificationReport:
    """Smallest C with |F(x)-F(y)| <= d^sigma (C denom(x,y)) over all pairs."""
    quot = _difference_quotients(space, F, sigma)
    hunt = _ConstantHunt(float(np.abs(quot).max(initial=0.0)))
    iu, ju = np.triu_indices(space.n, k=1)
    denom = denom_for_pair(iu, ju)
    for a, b, den in zip(iu, ju, denom):
        hunt.offer(
            float(quot[a, b]),
            float(den),
            {"x": space.ids[int(a)], "y": space.ids[int(b)], "d": float(space.dist[a, b])},
        )
    return hunt.report(check_id, params, details)


def scalar_transfer(
    space: MetricMeasureSpace,
    u: np.ndarray,
    g: np.ndarray,
    params: SmoothnessParams,
    Q: float,
    *,
    family: ScaleFamily | None = None,
    radii: np.ndarray | None = None,
) -> tuple[np.ndarray, VerificationReport]:
    """Transfer a single s-gradient of u to the discrete maximal function.

    Builds h = (M(g^t))^(1/t) when s + alpha <= 1 (the transferred
    smoothness is s + alpha) and h = (M_{t(s+alpha-1)}(g^t))^(1/t) when
    s + alpha > 1 (transferred smoothness 1), then finds the smallest C*
    such that C* h is a gradient of M*_alpha u at the transferred
    smoothness.  Returns (h, report); the report's constant is C*.
    """
    params.validate_scalar_transfer(Q)
    s, alpha, t = params.s, params.alpha, params.t
    if family is None:
        family = _default_family(space)
    if radii is None:
        radii = standard_radius_set(space)
    g = np.asarray(g, dtype=float)
    if s + alpha <= 1.0:
        branch, sigma, inner_alpha = "subunit", s + alpha, 0.0
    else:
        branch, sigma, inner_alpha = "superunit", 1.0, t * (s + alpha - 1.0)
    m_gt, _ = fractional_maximal(space, g**t, inner_alpha, radii)
    h = m_gt ** (1.0 / t)
    F, _ = discrete_fractional_maximal(space, u, alpha, family)
    report = _best_pair_constant(
        space,
        F,
        sigma,
        lambda iu, ju: h[iu] + h[ju],
        "scalar-transfer",
        {"s": s, "alpha": alpha, "t": t, "Q": Q},
        {"branch": branch, "sigma": sigma, "scales": list(family.scales)},
    )
    return h, report


def sequence_transfer(
    space: MetricMeasureSpace,
    u: np.ndarray,
    seq: GradientSequence,
    params: SmoothnessParams,
    Q: float,
    *,
    family: ScaleFamily | None = None,
    radii: np.ndarray | None = None,
    extension: int = 0,
) -> tuple[GradientSequence, VerificationReport]:
    """Transfer a fractional s-gradient sequence to M*_alpha u.

    Builds h_j = (M(g_j^t))^(1/t) per level and

        gtilde_k = sum_{j <= k} 2^((j-k) delta) h_j
                 + sum_{j >= k-7} 2^((k-j)(s-eps')) h_j,

    with both sums truncated to the sequence's level range (extension pads
    the range with zero levels, which provably changes nothing for
    canonical sequences; the padding is reported).  The constant C* is the
    smallest one making C* gtilde a fractional (s+alpha)-gradient of
    M*_alpha u.
    """
    params.validate_sequence_transfer(Q)
    s, alpha, t = params.s, params.alpha, params.t
    delta, eps_prime = params.delta, params.eps_prime
    if family is None:
        family = _default_family(space)
    if radii is None:
        radii = standard_radius_set(space)

    k_min, k_max = seq.k_min - extension, seq.k_max + extension
    h_levels = np.zeros((k_max - k_min + 1, space.n))
    for j in seq.k_values:
        gj = np.asarray(seq.level(j), dtype=float)
        if np.any(gj > 0.0):
            m_gt, _ = fractional_maximal(space, gj**t, 0.0, radii)
            h_levels[j - k_min] = m_gt ** (1.0 / t)

    gtilde = np.zeros_like(h_levels)
    for k in range(k_min, k_max + 1):
        row = np.zeros(space.n)
        for j in range(k_min, k + 1):
            row += 2.0 ** ((j - k) * delta) * h_levels[j - k_min]
        for j in range(max(k - 7, k_min), k_max + 1):
            row += 2.0 ** ((k - j) * (s - eps_prime)) * h_levels[j - k_min]
        gtilde[k - k_min] = row

    F, _ = discrete_fractional_maximal(space, u, alpha, family)
    sigma = s + alpha
    quot = _difference_quotients(space, F, sigma)
    ann = annulus_index_matrix(space.dist)
    hunt = _ConstantHunt(float(np.abs(quot).max(initial=0.0)))
    iu, ju = np.triu_indices(space.n, k=1)
    ks = ann[iu, ju]
    for a, b, k in zip(iu, ju, ks):
        den = gtilde[k - k_min, a] + gtilde[k - k_min, b]
        hunt.offer(
            float(quot[a, b]),
            float(den),
            {
                "x": space.ids[int(a)],
                "y": space.ids[int(b)],
                "d": float(space.dist[a, b]),
                "k": int(k),
            },
        )
    report = hunt.report(
        "sequence-transfer",
        {
            "s": s,
            "alpha": alpha,
            "t": t,
            "delta": delta,
            "eps": params.eps,
            "eps_prime": eps_prime,
            "Q": Q,
        },
        {
            "sigma": sigma,
            "level_range": [k_min, k_max],
            "extension": extension,
            "scales": list(family.scales),
        },
    )
    return GradientSequence(k_min, k_max, gtilde), report


# ----------------------------------------------------------------------
# vector-valued maximal inequality
# ----------------------------------------------------------------------
def fefferman_stein_check(
    space: MetricMeasureSpace,
    levels: np.ndarray | GradientSequence,
    p: float,
    q: float,
    radii: np.ndarray | None = None,
) -> VerificationReport:
    """Ratio ||(M g_k)_k||_{L^p(l^q)} / ||(g_k)_k||_{L^p(l^q)}."""
    if p <= 1.0 or q <= 1.0:
        raise ParameterWindowError(
            f"vector maximal bound needs p > 1 and q > 1, got p={p}, q={q}"
        )
    arr = levels.levels if isinstance(levels, GradientSequence) else np.asarray(levels, dtype=float)
    if radii is None:
        radii = standard_radius_set(space)
    maximal_rows = np.stack(
        [fractional_maximal(space, row, 0.0, radii)[0] for row in arr]
    )
    lhs = mixed_norm(space, maximal_rows, p, q, "Lp(lq)")
    rhs = mixed_norm(space, arr, p, q, "Lp(lq)")
    hunt = _ConstantHunt(float(np.abs(arr).max(initial=0.0)))
    hunt.offer(lhs, rhs, {"levels": int(arr.shape[0])})
    return hunt.report(
        "fefferman-stein", {"p": p, "q": q}, {"radii_count": int(len(radii))}
    )


# ----------------------------------------------------------------------
# norm boundedness experiments
# ----------------------------------------------------------------------
def _full_tl(space, u, s, p, q) -> float:
    return lp_norm(space, u, p) + triebel_lizorkin_norm(space, u, s, p, q).value


def _full_besov(space, u, s, p, q) -> float:
    return lp_norm(space, u, p) + besov_norm(space, u, s, p, q).value


EXPERIMENTS = (
    "maximal-lp",
    "hajlasz",
    "hajlasz-endpoint",
    "triebel-lizorkin",
    "besov",
    "triebel-lizorkin-alpha0",
    "triebel-lizorkin-alpha0-full",
    "besov-alpha0",
    "besov-alpha0-full",
)

_DEFAULT_EXPONENTS = {
    "maximal-lp": {"p": 2.0, "alpha": 0.3},
    "hajlasz": {"s": 0.5, "alpha": 0.3, "p": 1.5},
    "hajlasz-endpoint": {"s": 0.8, "alpha": 0.5, "p": 1.2},
    "triebel-lizorkin": {"s": 0.5, "alpha": 0.3, "p": 1.5, "q": 1.5},
    "besov": {"s": 0.5, "alpha": 0.3, "p": 1.5, "q": 1.5},
    "triebel-lizorkin-alpha0": {"s": 0.5, "alpha": 0.0, "p": 1.5, "q": 1.5},
    "triebel-lizorkin-alpha0-full": {"s": 0.5, "alpha": 0.0, "p": 1.5, "q": 1.5},
    "besov-alpha0": {"s": 0.5, "alpha": 0.0, "p": 1.5, "q": 2.0},
    "besov-alpha0-full": {"s": 0.5, "alpha": 0.0, "p": 1.5, "q": 2.0},
}


def _experiment_row(
    experiment: str,
    space: MetricMeasureSpace,
    u: np.ndarray,
    Q: float,
    family: ScaleFamily,
    exps: dict,
) -> dict:
    """One (source norm, target norm, ratio) row; empty ratios are flagged."""
    p = exps.get("p")
    alpha = exps.get("alpha", 0.0)
    s = exps.get("s")
    q = exps.get("q")
    radii = standard_radius_set(space)
    row: dict = {"experiment": experiment, "exponents": dict(exps), "flags": []}

    if experiment == "maximal-lp":
        if not 0 < alpha < Q / p:
            row["flags"].append("window_violation")
            return row
        p_star = Q * p / (Q - alpha * p)
        m_vals, _ = fractional_maximal(space, u, alpha, radii)
        source, target = lp_norm(space, u, p), lp_norm(space, m_vals, p_star)
        row["exponents"]["p_star"] = p_star
    else:
        F, _ = discrete_fractional_maximal(space, u, alpha, family)
        if experiment == "hajlasz":
            source = hajlasz_norm(space, u, s, p)
            target = hajlasz_norm(space, F, s + alpha, p)
        elif experiment == "hajlasz-endpoint":
            if not (1.0 < s + alpha and Q > (s + alpha - 1.0) * p):
                row["flags"].append("window_violation")
                return row
            q_target = Q * p / (Q - (s + alpha - 1.0) * p)
            source = hajlasz_norm(space, u, s, p)
            target = hajlasz_norm(space, F, 1.0, q_target)
            row["exponents"]["q_target"] = q_target
        elif experiment == "triebel-lizorkin":
            source = triebel_lizorkin_norm(space, u, s, p, q).value
            target = triebel_lizorkin_norm(space, F, s + alpha, p, q).value
        elif experiment == "besov":
            source = besov_norm(space, u, s, p, q).value
            target = besov_norm(space, F, s + alpha, p, q).value
        elif experiment == "triebel-lizorkin-alpha0":
            source = triebel_lizorkin_norm(space, u, s, p, q).value
            target = triebel_lizorkin_norm(space, F, s, p, q).value
        elif experiment == "triebel-lizorkin-alpha0-full":
            source = _full_tl(space, u, s, p, q)
            target = _full_tl(space, F, s, p, q)
        elif experiment == "besov-alpha0":
            source = besov_norm(space, u, s, p, q).value
            target = besov_norm(space, F, s, p, q).value
        elif experiment == "besov-alpha0-full":
            source = _full_besov(space, u, s, p, q)
            target = _full_besov(space, F, s, p, q)
        else:
            raise ParameterWindowError(f"unknown experiment {experiment!r}")

    row["source_norm"] = float(source)
    row["target_norm"] = float(target)
    if source <= REL_ZERO * max(1.0, float(np.abs(u).max())):
        row["flags"].append("zero_source")
    else:
        row["ratio"] = float(target / source)
    return row


def boundedness_experiment(
    corpus, experiment: str, exponents: dict | None = None
) -> dict:
    """Hunt the largest target/source norm ratio of one experiment.

    Returns a table dict with one row per corpus instance (vacuous sources
    are flagged and excluded from the max).
    """
    if experiment not in EXPERIMENTS:
        raise ParameterWindowError(
            f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}"
        )
    exps = dict(_DEFAULT_EXPONENTS[experiment])
    if exponents:
        exps.update(exponents)
    rows = []
    cache: dict[str, tuple] = {}
    for inst in corpus.instances:
        if inst.space_label not in cache:
            space = inst.space
            geom = estimate_geometry(space)
            family = _default_family(space)
            cache[inst.space_label] = (space, geom, family)
        space, geom, family = cache[inst.space_label]
        row = _experiment_row(experiment, space, inst.u, geom.Q, family, exps)
        row["instance"] = f"{inst.space_label}/{inst.function_label}"
        row["Q"] = geom.Q
        rows.append(row)
    ratios = [r["ratio"] for r in rows if "ratio" in r]
    return {
        "experiment": experiment,
        "exponents": exps,
        "rows": rows,
        "max_ratio": max(ratios) if ratios else None,
        "instances_with_ratio": len(ratios),
    }


# ----------------------------------------------------------------------
# suites
# ----------------------------------------------------------------------
def run_poincare_suite(corpus, *, s: float = 0.5, p_exp: float = 1.0) -> list[VerificationReport]:
    """Canonical-gradient Poincare checks over a corpus."""
    reports = []
    for inst in corpus.instances:
        space = inst.space
        if space.n < 2:
            continue
        geom = estimate_geometry(space)
        g = canonical_gradient(space, inst.u, s)
        label = f"{inst.space_label}/{inst.function_label}"
        rep = check_poincare(space, inst.u, g, s, p_exp)
        reports.append(_with_instance(rep, label))
        if geom.Q > s * p_exp:
            rep = check_sobolev_poincare(space, inst.u, g, s, p_exp, geom.Q)
            reports.append(_with_instance(rep, label))
        if s < 1.0:
            seq = canonical_fractional_gradient(space, inst.u, s)
            pars = default_sequence_params(s, 0.0, p_exp, p_exp, geom.Q)
            rep = check_fractional_poincare(
                space, inst.u, seq, s, p_exp, pars.eps, pars.eps_prime
            )
            reports.append(_with_instance(rep, label))
    return reports


def run_scalar_transfer_suite(
    corpus,
    *,
    pairs: tuple = ((0.5, 0.3), (1.0, 0.0), (0.8, 0.5)),
    p_for_gradient: float = 1.0,
) -> list[VerificationReport]:
    """Scalar gradient transfers with canonical source gradients."""
    from .norms import optimal_gradient

    reports = []
    for inst in corpus.instances:
        space = inst.space
        if space.n < 2:
            continue
        geom = estimate_geometry(space)
        family = _default_family(space)
        label = f"{inst.space_label}/{inst.function_label}"
        for s, alpha in pairs:
            t = geom.Q / (geom.Q + s)
            params = SmoothnessParams(s=s, alpha=alpha, t=t)
            g, _ = optimal_gradient(space, inst.u, s, p_for_gradient)
            _, rep = scalar_transfer(space, inst.u, g, params, geom.Q, family=family)
            reports.append(_with_instance(rep, label))
    return reports


def run_sequence_transfer_suite(
    corpus,
    *,
    s: float = 0.5,
    alpha: float = 0.3,
    p: float = 1.5,
    q: float = 1.5,
    overrides: dict | None = None,
) -> list[VerificationReport]:
    """Sequence transfers with canonical fractional gradients.

    Window parameters default to the standard recipe per space; explicit
    overrides (delta, eps, eps_prime, t) are validated before any space
    is processed, so an out-of-window request rejects up front.
    """
    overrides = dict(overrides or {})
    unknown = set(overrides) - {"delta", "eps", "eps_prime", "t"}
    if unknown:
        raise ParameterWindowError(f"unknown window overrides: {sorted(unknown)}")
    if "delta" in overrides and not 0.0 < overrides["delta"] < 1.0 - s - alpha:
        raise ParameterWindowError(
            f"need 0 < delta < 1 - s - alpha = {1.0 - s - alpha}, "
            f"got delta={overrides['delta']}"
        )
    reports = []
    for inst in corpus.instances:
        space = inst.space
        if space.n < 2:
            continue
        geom = estimate_geometry(space)
        family = _default_family(space)
        defaults = default_sequence_params(s, alpha, p, q, geom.Q)
        params = SmoothnessParams(
            s=s,
            alpha=alpha,
            p=p,
            q=q,
            t=overrides.get("t", defaults.t),
            eps=overrides.get("eps", defaults.eps),
            eps_prime=overrides.get("eps_prime", defaults.eps_prime),
            delta=overrides.get("delta", defaults.delta),
        )
        seq = canonical_fractional_gradient(space, inst.u, s)
        label = f"{inst.space_label}/{inst.function_label}"
        _, rep = sequence_transfer(space, inst.u, seq, params, geom.Q, family=family)
        reports.append(_with_instance(rep, label))
    return reports


def run_boundedness_suite(corpus, experiments: tuple = EXPERIMENTS) -> list[dict]:
    return [boundedness_experiment(corpus, ex) for ex in experiments]


def run_fefferman_stein_suite(
    corpus,
    *,
    pq_pairs: tuple = ((2.0, 2.0), (1.5, 3.0)),
    n_levels: int = 3,
    seed: int = 2024,
) -> list[VerificationReport]:
    """Vector maximal inequality over seeded random level arrays per space."""
    reports = []
    for label, space in corpus.spaces.items():
        if space.n < 2:
            continue
        rng = np.random.default_rng(
            np.random.SeedSequence([seed, space.n, len(label)])
        )
        levels = rng.random((n_levels, space.n))
        for p, q in pq_pairs:
            rep = fefferman_stein_check(space, levels, p, q)
            reports.append(_with_instance(rep, label))
    return reports


def _with_instance(report: VerificationReport, label: str) -> VerificationReport:
    params = dict(report.params)
    params["instance"] = label
    return VerificationReport(
        report.check_id,
        params,
        report.best_constant,
        report.witness,
        report.passed,
        report.flags,
        report.details,
    )


# ----------------------------------------------------------------------
# report output
# ----------------------------------------------------------------------
def write_reports(reports: list[VerificationReport], out_dir: str) -> list[str]:
    """One JSON file per report plus a summary CSV; returns file names."""
    os.makedirs(out_dir, exist_ok=True)
    names = []
    for idx, rep in enumerate(reports):
        name = f"{rep.check_id}__{idx:04d}.json"
        with open(os.path.join(out_dir, name), "w", encoding="utf-8") as fh:
            json.dump(rep.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")
        names.append(name)
    summary = os.path.join(out_dir, "summary.csv")
    with open(summary, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["check_id", "instance", "best_constant", "passed", "flags"])
        for rep in reports:
            writer.writerow(
                [
                    rep.check_id,
                    rep.params.get("instance", ""),
                    repr(rep.best_constant),
                    rep.passed,
                    ";".join(rep.flags),
                ]
            )
    names.append("summary.csv")
    return names


def write_boundedness_tables(tables: list[dict], out_dir: str) -> list[str]:
    """JSON per experiment plus one CSV of all ratio rows."""
    os.makedirs(out_dir, exist_ok=True)
    names = []
    for table in tables:
        name = f"bounds__{table['experiment']}.json"
        with open(os.path.join(out_dir, name), "w", encoding="utf-8") as fh:
            json.dump(table, fh, sort_keys=True, indent=2)
            fh.write("\n")
        names.append(name)
    summary = os.path.join(out_dir, "bounds_summary.csv")
    with open(summary, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["experiment", "instance", "source_norm", "target_norm", "ratio", "flags"]
        )
        for table in tables:
            for row in table["rows"]:
                writer.writerow(
                    [
                        table["experiment"],
                        row.get("instance", ""),
                        repr(row.get("source_norm", "")),
                        repr(row.get("target_norm", "")),
                        repr(row.get("ratio", "")),
                        ";".join(row.get("flags", [])),
                    ]
                )
    names.append("bounds_summary.csv")
    return names
