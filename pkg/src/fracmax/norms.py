"""Smallest-gradient convex programs: Hajlasz, Besov, Triebel-Lizorkin norms.

Each homogeneous norm is the infimum of an L^p (or mixed L^p(l^q) /
l^q(L^p)) norm over the convex set of admissible gradients or gradient
sequences.  Routes:

* p in {1, inf}: linear programs (scipy HiGHS), followed by an optional
  secondary least-squares tie-break so the reported minimizer is the
  minimal-L2 point of the optimal face.
* 1 < p < inf (and the joint level programs for finite p, q >= 1): power
  cone programs through cvxpy/Clarabel.
* min(p, q) < 1: the program is nonconvex; a deterministic shrink of the
  canonical candidate is returned and flagged "nonconvex_upper_bound".

The per-level structure of the l^q(L^p) norm decouples (levels constrain
disjoint pair sets and the objective is monotone per level), so that norm
is solved level by level.  The L^p(l^q) norm does not decouple and is
solved as one joint program.

Every returned candidate is repaired to satisfy its pair constraints
within the feasibility tolerance, and the reported value is the norm of
the returned candidate.  Tolerances can be overridden through the
environment variables FRACMAX_FEASIBILITY_TOL and FRACMAX_OBJECTIVE_REL_TOL.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass

import cvxpy as cp
import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import ParameterWindowError, SolverError
from .gradients import (
    GradientSequence,
    annulus_index_matrix,
    canonical_fractional_gradient,
    canonical_gradient,
    mixed_norm,
    space_level_range,
)
from .space import MetricMeasureSpace, lp_norm


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ParameterWindowError(f"bad float in ${name}: {raw!r}") from exc


def feasibility_tol() -> float:
    return _env_float("FRACMAX_FEASIBILITY_TOL", 1e-10)


def objective_rel_tol() -> float:
    return _env_float("FRACMAX_OBJECTIVE_REL_TOL", 1e-8)


_CLARABEL_OPTS = {"tol_gap_abs": 1e-11, "tol_gap_rel": 1e-11, "tol_feas": 1e-11}
_HIGHS_OPTS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclass(frozen=True)
class NormResult:
    """Norm value (of the returned minimizer), solver status, bound semantics."""

    value: float
    status: str
    bound_kind: str  # "exact" | "upper"
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class SequenceNormResult:
    value: float
    sequence: GradientSequence
    status: str
    bound_kind: str
    flags: tuple[str, ...] = ()
    level_values: tuple[float, ...] | None = None


# ----------------------------------------------------------------------
# constraint extraction
# ----------------------------------------------------------------------
def pair_constraints(
    space: MetricMeasureSpace, u: np.ndarray, s: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Active pair constraints (i < j, c > 0) with c = |u_i - u_j| / d_ij^s.

    Pairs with c = 0 are dropped: they are implied by g >= 0.
    """
    u = np.asarray(u, dtype=float)
    iu, ju = np.triu_indices(space.n, k=1)
    num = np.abs(u[iu] - u[ju])
    c = num / space.dist[iu, ju] ** s
    keep = c > 0.0
    return iu[keep], ju[keep], c[keep]


def _repair(g: np.ndarray, iu: np.ndarray, ju: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Scale a near-feasible candidate up so every pair constraint holds."""
    g = np.maximum(np.asarray(g, dtype=float), 0.0)
    if len(iu) == 0:
        return g
    sums = g[iu] + g[ju]
    if np.any(sums <= 0.0):
        raise SolverError("solver returned a zero gradient sum on an active pair")
    factor = float((c / sums).max())
    return g * factor if factor > 1.0 else g


def _check_lp_status(res) -> None:
    if res.status != 0:
        raise SolverError(f"linear program failed: {res.message}")


def _solve_cvxpy(problem: cp.Problem) -> float:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            problem.solve(solver=cp.CLARABEL, **_CLARABEL_OPTS)
    except cp.error.SolverError as exc:  # pragma: no cover - backend failure
        raise SolverError(f"convex solver failed: {exc}") from exc
    if problem.status not in ("optimal", "optimal_inaccurate"):
        raise SolverError(f"convex solve ended with status {problem.status}")
    return float(problem.value)


# ----------------------------------------------------------------------
# scalar solves at fixed p
# ----------------------------------------------------------------------
def _pair_matrix(n: int, iu: np.ndarray, ju: np.ndarray) -> sp.coo_matrix:
    m = len(iu)
    rows = np.concatenate([np.arange(m), np.arange(m)])
    cols = np.concatenate([iu, ju])
    return sp.coo_matrix((np.ones(2 * m), (rows, cols)), shape=(m, n))


def _tie_break_l2(
    n: int,
    iu: np.ndarray,
    ju: np.ndarray,
    c: np.ndarray,
    *,
    budget_w: np.ndarray | None,
    budget_cap: float,
    box_cap: float | None,
) -> np.ndarray | None:
    """Minimal-L2 point of the (near-)optimal face; None if the QP fails."""
    g = cp.Variable(n, nonneg=True)
    cons = [g[iu] + g[ju] >= c]
    if budget_w is not None:
        cons.append(budget_w @ g <= budget_cap)
    if box_cap is not None:
        cons.append(g <= box_cap)
    prob = cp.Problem(cp.Minimize(cp.sum_squares(g)), cons)
    try:
        _solve_cvxpy(prob)
    except SolverError:
        return None
    return np.asarray(g.value, dtype=float)


def _solve_scalar(
    space: MetricMeasureSpace,
    iu: np.ndarray,
    ju: np.ndarray,
    c: np.ndarray,
    p: float,
    *,
    tie_break: bool = True,
) -> tuple[np.ndarray, NormResult]:
    """Minimize the weighted L^p norm of g over the pair constraints."""
    n, w = space.n, space.weights
    if len(iu) == 0:
        g = np.zeros(n)
        return g, NormResult(0.0, "optimal", "exact")

    flags: list[str] = []
    if math.isinf(p):
        A = sp.hstack(
            [_pair_matrix(n, iu, ju), sp.coo_matrix((len(iu), 1))]
        )
        B = sp.hstack([sp.eye(n), -np.ones((n, 1))])
        res = linprog(
            c=np.concatenate([np.zeros(n), [1.0]]),
            A_ub=sp.vstack([-A, B]).tocsr(),
            b_ub=np.concatenate([-c, np.zeros(n)]),
            bounds=(0, None),
            method="highs",
            options=_HIGHS_OPTS,
        )
        _check_lp_status(res)
        g, vstar = res.x[:n], float(res.fun)
        if tie_break:
            cap = vstar * (1 + 1e-10) + 1e-13
            g2 = _tie_break_l2(n, iu, ju, c, budget_w=None, budget_cap=0.0, box_cap=cap)
            if g2 is not None:
                g = g2
            else:
                flags.append("tie_break_failed")
        g = _repair(g, iu, ju, c)
        return g, NormResult(lp_norm(space, g, p), "optimal", "exact", tuple(flags))

    if p == 1.0:
        res = linprog(
            c=w,
            A_ub=(-_pair_matrix(n, iu, ju)).tocsr(),
            b_ub=-c,
            bounds=(0, None),
            method="highs",
            options=_HIGHS_OPTS,
        )
        _check_lp_status(res)
        g, vstar = res.x, float(res.fun)
        if tie_break:
            cap = vstar * (1 + 1e-10) + 1e-13
            g2 = _tie_break_l2(n, iu, ju, c, budget_w=w, budget_cap=cap, box_cap=None)
            if g2 is not None:
                g = g2
            else:
                flags.append("tie_break_failed")
        g = _repair(g, iu, ju, c)
        return g, NormResult(lp_norm(space, g, p), "optimal", "exact", tuple(flags))

    if p > 1.0:
        g = cp.Variable(n, nonneg=True)
        prob = cp.Problem(
            cp.Minimize(cp.sum(cp.multiply(w, cp.power(g, p)))), [g[iu] + g[ju] >= c]
        )
        _solve_cvxpy(prob)
        if prob.status == "optimal_inaccurate":
            flags.append("solver_inaccurate")
        gv = _repair(np.asarray(g.value, dtype=float), iu, ju, c)
        return gv, NormResult(lp_norm(space, gv, p), prob.status, "exact", tuple(flags))

    if 0 < p < 1:
        g = _upper_bound_candidate(space, iu, ju, c, p)
        return g, NormResult(
            lp_norm(space, g, p), "heuristic", "upper", ("nonconvex_upper_bound",)
        )

    raise ParameterWindowError(f"gradient norm needs p > 0, got {p}")


def _shrink_to_minimal(
    n: int, iu: np.ndarray, ju: np.ndarray, c: np.ndarray, g0: np.ndarray
) -> np.ndarray:
    """Coordinate-wise shrink: lower each g(x) to the least feasible value.

    Deterministic sweep order; feasibility is preserved after every single
    update, so the result is feasible and pointwise <= the start.
    """
    g = g0.astype(float).copy()
    partners: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for a, b, cc in zip(iu, ju, c):
        partners[a].append((int(b), float(cc)))
        partners[b].append((int(a), float(cc)))
    for _ in range(64):
        changed = False
        for i in range(n):
            if not partners[i]:
                req = 0.0
            else:
                req = max(0.0, max(cc - g[j] for j, cc in partners[i]))
            if req < g[i]:
                g[i] = req
                changed = True
        if not changed:
            break
    return g


def _upper_bound_candidate(
    space: MetricMeasureSpace,
    iu: np.ndarray,
    ju: np.ndarray,
    c: np.ndarray,
    p: float,
) -> np.ndarray:
    """Best of several feasible candidates for the nonconvex p < 1 range."""
    envelope = np.zeros(space.n)
    np.maximum.at(envelope, iu, c)
    np.maximum.at(envelope, ju, c)
    cands = [envelope, _shrink_to_minimal(space.n, iu, ju, c, envelope)]
    g_lp, _ = _solve_scalar(space, iu, ju, c, 1.0, tie_break=False)
    cands.append(_repair(g_lp, iu, ju, c))
    vals = [lp_norm(space, g, p) for g in cands]
    return cands[int(np.argmin(vals))]


# ----------------------------------------------------------------------
# public scalar interface
# ----------------------------------------------------------------------
def optimal_gradient(
    space: MetricMeasureSpace,
    u: np.ndarray,
    s: float,
    p: float,
    *,
    tie_break: bool = True,
) -> tuple[np.ndarray, NormResult]:
    """L^p-smallest s-gradient of u.

    Exact (up to solver tolerances) for p >= 1; for 0 < p < 1 a feasible
    candidate is returned with bound_kind "upper".  Ties on the LP routes
    are broken by a secondary least-squares objective.
    """
    iu, ju, c = pair_constraints(space, u, s)
    return _solve_scalar(space, iu, ju, c, p, tie_break=tie_break)


def hajlasz_norm(space: MetricMeasureSpace, u: np.ndarray, s: float, p: float) -> float:
    """Homogeneous norm: inf ||g||_p over s-gradients g of u."""
    return optimal_gradient(space, u, s, p)[1].value


# ----------------------------------------------------------------------
# sequence norms
# ----------------------------------------------------------------------
def _level_constraints(
    space: MetricMeasureSpace, u: np.ndarray, s: float
) -> tuple[int, int, dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]]]:
    """Pair constraints grouped by annulus level; only c > 0 pairs kept."""
    k_min, k_max = space_level_range(space)
    iu, ju, c = pair_constraints(space, u, s)
    ann = annulus_index_matrix(space.dist)
    ks = ann[iu, ju]
    by_level: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    for k in range(k_min, k_max + 1):
        mask = ks == k
        if mask.any():
            by_level[k] = (iu[mask], ju[mask], c[mask])
    return k_min, k_max, by_level


def _lq_combine(values: np.ndarray, q: float) -> float:
    if values.size == 0:
        return 0.0
    if math.isinf(q):
        return float(values.max())
    return float((values**q).sum() ** (1.0 / q))


def besov_norm(
    space: MetricMeasureSpace, u: np.ndarray, s: float, p: float, q: float
) -> SequenceNormResult:
    """Homogeneous l^q(L^p) norm: per-level minimization, combined in l^q.

    Levels constrain disjoint pair sets and l^q is monotone per level, so
    the infimum decouples for every q > 0; each level is solved exactly for
    p >= 1 and by the flagged heuristic for p < 1.
    """
    if (not math.isinf(q)) and q <= 0:
        raise ParameterWindowError(f"besov norm needs q > 0, got {q}")
    if space.n < 2:
        seq = GradientSequence(0, 0, np.zeros((1, space.n)))
        return SequenceNormResult(0.0, seq, "optimal", "exact", (), (0.0,))
    k_min, k_max, by_level = _level_constraints(space, u, s)
    levels = np.zeros((k_max - k_min + 1, space.n))
    level_vals = np.zeros(k_max - k_min + 1)
    flags: set[str] = set()
    status = "optimal"
    for k, (iu, ju, c) in by_level.items():
        g, res = _solve_scalar(space, iu, ju, c, p)
        levels[k - k_min] = g
        level_vals[k - k_min] = res.value
        flags.update(res.flags)
        if res.bound_kind == "upper":
            status = "heuristic"
    seq = GradientSequence(k_min, k_max, levels)
    return SequenceNormResult(
        value=_lq_combine(level_vals, q),
        sequence=seq,
        status=status,
        bound_kind="upper" if status == "heuristic" else "exact",
        flags=tuple(sorted(flags)),
        level_values=tuple(float(v) for v in level_vals),
    )


def _tl_joint_program(
    space: MetricMeasureSpace,
    by_level: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]],
    k_min: int,
    k_max: int,
    p: float,
    q: float,
) -> tuple[np.ndarray, str]:
    """Joint minimization of the L^p(l^q) norm over all levels at once."""
    K, n, w = k_max - k_min + 1, space.n, space.weights
    G = cp.Variable((K, n), nonneg=True)
    cons = []
    for k, (iu, ju, c) in by_level.items():
        row = k - k_min
        cons.append(G[row, iu] + G[row, ju] >= c)
    if math.isinf(q):
        env = cp.max(G, axis=0)
        pointwise = env
    else:
        pointwise = cp.hstack([cp.pnorm(G[:, x], q) for x in range(n)])
    if math.isinf(p):
        objective = cp.max(pointwise)
    elif p == 1.0:
        objective = w @ pointwise
    else:
        objective = cp.sum(cp.multiply(w, cp.power(pointwise, p)))
    prob = cp.Problem(cp.Minimize(objective), cons)
    _solve_cvxpy(prob)
    return np.maximum(np.asarray(G.value, dtype=float), 0.0), prob.status


def triebel_lizorkin_norm(
    space: MetricMeasureSpace, u: np.ndarray, s: float, p: float, q: float
) -> SequenceNormResult:
    """Homogeneous L^p(l^q) norm over gradient sequences (joint program).

    For q = inf the minimizer is canonicalized to a constant-envelope
    sequence, whose value provably agrees with the scalar gradient norm.
    For min(p, q) < 1 the canonical sequence is returned as a flagged
    upper bound.
    """
    if (not math.isinf(q)) and q <= 0:
        raise ParameterWindowError(f"triebel-lizorkin norm needs q > 0, got {q}")
    if (not math.isinf(p)) and p <= 0:
        raise ParameterWindowError(f"triebel-lizorkin norm needs p > 0, got {p}")
    if space.n < 2:
        seq = GradientSequence(0, 0, np.zeros((1, space.n)))
        return SequenceNormResult(0.0, seq, "optimal", "exact")
    k_min, k_max, by_level = _level_constraints(space, u, s)
    if not by_level:
        seq = GradientSequence(k_min, k_max, np.zeros((k_max - k_min + 1, space.n)))
        return SequenceNormResult(0.0, seq, "optimal", "exact")

    nonconvex = (not math.isinf(p) and p < 1) or (not math.isinf(q) and q < 1)
    if nonconvex:
        seq = canonical_fractional_gradient(space, u, s)
        value = mixed_norm(space, seq, p, q, "Lp(lq)")
        return SequenceNormResult(
            value, seq, "heuristic", "upper", ("nonconvex_upper_bound",)
        )

    levels, status = _tl_joint_program(space, by_level, k_min, k_max, p, q)
    flags = ("solver_inaccurate",) if status == "optimal_inaccurate" else ()
    if math.isinf(q):
        envelope = levels.max(axis=0)
        all_iu = np.concatenate([v[0] for v in by_level.values()])
        all_ju = np.concatenate([v[1] for v in by_level.values()])
        all_c = np.concatenate([v[2] for v in by_level.values()])
        envelope = _repair(envelope, all_iu, all_ju, all_c)
        levels = np.tile(envelope, (k_max - k_min + 1, 1))
    else:
        worst = 1.0
        for k, (iu, ju, c) in by_level.items():
            row = levels[k - k_min]
            sums = row[iu] + row[ju]
            if np.any(sums <= 0.0):
                raise SolverError("joint solve returned a zero gradient sum")
            worst = max(worst, float((c / sums).max()))
        if worst > 1.0:
            levels = levels * worst
    seq = GradientSequence(k_min, k_max, levels)
    return SequenceNormResult(
        value=mixed_norm(space, seq, p, q, "Lp(lq)"),
        sequence=seq,
        status=status,
        bound_kind="exact",
        flags=flags,
    )
