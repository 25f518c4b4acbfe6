from __future__ import annotations

import math

import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given

import fracmax as fm
from fracmax.errors import ParameterWindowError

from _oracles import besov_joint_oracle, lp_vertex_oracle
from conftest import spaces_with_functions


def _scalar_oracle(space, u, s, p):
    """Independent route: direct cvxpy model of inf ||g||_p, other solver."""
    iu, ju, c = fm.pair_constraints(space, u, s)
    g = cp.Variable(space.n, nonneg=True)
    prob = cp.Problem(
        cp.Minimize(cp.pnorm(cp.multiply(space.weights ** (1.0 / p), g), p)),
        [g[iu] + g[ju] >= c],
    )
    solver = "ECOS" if "ECOS" in cp.installed_solvers() else "SCS"
    prob.solve(solver=solver)
    return float(prob.value)


FUNCS = {
    "linear": lambda sp_: sp_.dist[0].copy(),
    "spike": lambda sp_: np.eye(sp_.n)[sp_.n // 2] * 3.0,
    "wobble": lambda sp_: np.sin(np.arange(sp_.n, dtype=float)),
}


# ----------------------------------------------------------------------
# scalar norm: exactness against independent oracles
# ----------------------------------------------------------------------
@pytest.mark.parametrize("fixture", ["two_point", "path3", "path5", "gasket1", "cloud6"])
@pytest.mark.parametrize("fname", sorted(FUNCS))
@pytest.mark.parametrize("s", [0.5, 1.0])
def test_p1_matches_vertex_enumeration(request, fixture, fname, s):
    space = request.getfixturevalue(fixture)
    u = FUNCS[fname](space)
    got = fm.hajlasz_norm(space, u, s, 1.0)
    want = lp_vertex_oracle(space, u, s)
    assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_intermediate_p_matches_other_solver(path5, p):
    u = np.array([0.0, 2.0, 1.0, 5.0, 3.0])
    got = fm.hajlasz_norm(path5, u, 0.7, p)
    want = _scalar_oracle(path5, u, 0.7, p)
    assert got == pytest.approx(want, rel=1e-6)


def test_p_inf_closed_form(path5, two_point):
    # sup-norm optimum is the constant max(c)/2
    u = np.array([0.0, 2.0, 1.0, 5.0, 3.0])
    _, _, c = fm.pair_constraints(path5, u, 1.0)
    g, res = fm.optimal_gradient(path5, u, 1.0, math.inf)
    assert res.value == pytest.approx(c.max() / 2.0, abs=5e-11)
    assert np.max(g) == pytest.approx(c.max() / 2.0, abs=5e-11)

    g2, res2 = fm.optimal_gradient(two_point, np.array([0.0, 1.0]), 1.0, math.inf)
    assert res2.value == pytest.approx(0.5, abs=5e-11)
    assert g2 == pytest.approx([0.5, 0.5], abs=5e-11)


def test_two_point_p1_tie_break_symmetric(two_point):
    g, res = fm.optimal_gradient(two_point, np.array([0.0, 1.0]), 1.0, 1.0)
    assert res.value == pytest.approx(1.0, abs=5e-11)
    # any (a, 1-a) is optimal in L1; the least-squares tie-break picks the middle
    assert g == pytest.approx([0.5, 0.5], abs=1e-9)


def test_minimizer_is_feasible_and_value_consistent(path5):
    for p in (1.0, 1.5, 2.0, math.inf):
        u = np.array([1.0, -1.0, 0.5, 2.0, 0.0])
        g, res = fm.optimal_gradient(path5, u, 0.5, p)
        chk = fm.is_hajlasz_gradient(path5, u, g, 0.5, tol=fm.feasibility_tol())
        assert chk.passed
        assert res.value == pytest.approx(fm.lp_norm(path5, g, p), rel=1e-13)
        assert res.bound_kind == "exact"


def test_p_below_one_flagged_upper_bound(path5):
    u = np.array([0.0, 1.0, 3.0, 1.0, 2.0])
    g, res = fm.optimal_gradient(path5, u, 0.5, 0.6)
    assert res.bound_kind == "upper"
    assert "nonconvex_upper_bound" in res.flags
    assert fm.is_hajlasz_gradient(path5, u, g, 0.5, tol=1e-12).passed
    assert res.value == pytest.approx(fm.lp_norm(path5, g, 0.6), rel=1e-13)
    # candidate set includes the canonical gradient, so it never does worse
    canon = fm.canonical_gradient(path5, u, 0.5)
    assert res.value <= fm.lp_norm(path5, canon, 0.6) * (1 + 1e-12)


@given(spaces_with_functions())
def test_scalar_invariances(space_u):
    space, u = space_u
    ptp = float(np.ptp(u))
    if ptp == 0.0:
        assert fm.hajlasz_norm(space, u, 0.5, 2.0) == 0.0
        return
    u = u / ptp  # keep magnitudes at solver scale; homogeneity is checked below
    base = fm.hajlasz_norm(space, u, 0.5, 2.0)
    shifted = fm.hajlasz_norm(space, u + 7.5, 0.5, 2.0)
    scaled = fm.hajlasz_norm(space, -3.0 * u, 0.5, 2.0)
    assert shifted == pytest.approx(base, rel=1e-7, abs=1e-9)
    assert scaled == pytest.approx(3.0 * base, rel=1e-7, abs=1e-9)
    canon = fm.canonical_gradient(space, u, 0.5)
    assert base <= fm.lp_norm(space, canon, 2.0) * (1.0 + 1e-9)


def test_single_point_guards(single_point):
    u = np.array([4.2])
    assert fm.hajlasz_norm(single_point, u, 0.5, 2.0) == 0.0
    assert fm.besov_norm(single_point, u, 0.5, 2.0, 2.0).value == 0.0
    assert fm.triebel_lizorkin_norm(single_point, u, 0.5, 2.0, 2.0).value == 0.0


# ----------------------------------------------------------------------
# sequence norms
# ----------------------------------------------------------------------
@pytest.mark.parametrize("fixture", ["path3", "path5", "gasket1"])
@pytest.mark.parametrize("p,q", [(1.5, 2.0), (2.0, 1.0), (2.0, math.inf)])
def test_besov_matches_joint_oracle(request, fixture, p, q):
    space = request.getfixturevalue(fixture)
    u = space.dist[0] ** 1.3 + np.arange(space.n) * 0.1
    res = fm.besov_norm(space, u, 0.5, p, q)
    want = besov_joint_oracle(space, u, 0.5, p, q)
    assert res.value == pytest.approx(want, rel=1e-6)
    assert res.bound_kind == "exact"


def test_besov_level_values_combine(path5):
    res = fm.besov_norm(path5, np.arange(5.0), 0.5, 1.5, 2.0)
    assert res.value == pytest.approx(
        sum(v**2 for v in res.level_values) ** 0.5, rel=1e-13
    )
    seq_norm = fm.mixed_norm(path5, res.sequence, 1.5, 2.0, "lq(Lp)")
    assert res.value == pytest.approx(seq_norm, rel=1e-12)


def test_besov_minimizer_is_fractional_gradient(path5):
    u = np.array([0.0, 1.0, 0.5, 2.0, 1.5])
    res = fm.besov_norm(path5, u, 0.5, 2.0, 2.0)
    chk = fm.is_fractional_gradient(path5, u, res.sequence, 0.5, tol=1e-8)
    assert chk.passed


@pytest.mark.parametrize("fixture", ["two_point", "path3", "path5", "cloud6"])
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0])
def test_tl_qinf_equals_scalar_norm(request, fixture, p):
    space = request.getfixturevalue(fixture)
    u = space.dist[-1] + 0.3 * np.arange(space.n)
    res = fm.triebel_lizorkin_norm(space, u, 0.5, p, math.inf)
    assert res.value == pytest.approx(fm.hajlasz_norm(space, u, 0.5, p), rel=1e-6)
    chk = fm.is_fractional_gradient(space, u, res.sequence, 0.5, tol=1e-8)
    assert chk.passed


def test_tl_two_point_single_level_equals_besov(two_point):
    u = np.array([0.0, 1.0])
    for q in (1.0, 2.0, 3.0):
        tl = fm.triebel_lizorkin_norm(two_point, u, 0.5, 1.5, q)
        bes = fm.besov_norm(two_point, u, 0.5, 1.5, q)
        assert tl.value == pytest.approx(bes.value, rel=1e-7)
        assert tl.value == pytest.approx(fm.hajlasz_norm(two_point, u, 0.5, 1.5), rel=1e-7)


def test_tl_minimizer_feasible_and_consistent(path5):
    u = np.array([0.0, 1.0, 3.0, 1.5, 2.5])
    res = fm.triebel_lizorkin_norm(path5, u, 0.5, 1.5, 2.0)
    chk = fm.is_fractional_gradient(path5, u, res.sequence, 0.5, tol=1e-9)
    assert chk.passed
    assert res.value == pytest.approx(
        fm.mixed_norm(path5, res.sequence, 1.5, 2.0, "Lp(lq)"), rel=1e-12
    )
    # TL dominates at the canonical sequence, minimization only helps
    canon = fm.canonical_fractional_gradient(path5, u, 0.5)
    assert res.value <= fm.mixed_norm(path5, canon, 1.5, 2.0, "Lp(lq)") * (1 + 1e-9)


def test_tl_nonconvex_flagged(path5):
    u = np.array([0.0, 1.0, 3.0, 1.5, 2.5])
    res = fm.triebel_lizorkin_norm(path5, u, 0.5, 0.7, 2.0)
    assert res.bound_kind == "upper"
    assert "nonconvex_upper_bound" in res.flags
    assert fm.is_fractional_gradient(path5, u, res.sequence, 0.5, tol=0.0).passed


def test_sequence_norm_q_monotone_on_fixed_sequence(path5):
    rng = np.random.default_rng(11)
    seq = fm.GradientSequence(-2, 0, rng.random((3, 5)))
    vals = [fm.mixed_norm(path5, seq, 1.5, q, "Lp(lq)") for q in (1.0, 2.0, 4.0, math.inf)]
    assert vals == sorted(vals, reverse=True)


def test_sequence_norm_window_rejections(path5):
    u = np.arange(5.0)
    with pytest.raises(ParameterWindowError):
        fm.besov_norm(path5, u, 0.5, 1.5, 0.0)
    with pytest.raises(ParameterWindowError):
        fm.triebel_lizorkin_norm(path5, u, 0.5, 1.5, -1.0)
    with pytest.raises(ParameterWindowError):
        fm.triebel_lizorkin_norm(path5, u, 0.5, 0.0, 2.0)
