from __future__ import annotations

import json
import math
import os

import numpy as np
import pytest

import fracmax as fm
from fracmax.corpus import Corpus, CorpusInstance, builtin_corpus, path_space
from fracmax.errors import ParameterWindowError
from fracmax.verify import _inf_center_lp

from _oracles import center_scan_oracle


# ----------------------------------------------------------------------
# ball-to-ball inequality checks (pinned two-point values)
# ----------------------------------------------------------------------
def test_two_point_poincare_pinned(two_point):
    u = np.array([0.0, 1.0])
    g = fm.canonical_gradient(two_point, u, 0.5)
    rep = fm.check_poincare(two_point, u, g, 0.5, 1.0)
    assert rep.passed
    assert rep.best_constant == 0.5
    assert rep.flags == ()
    assert rep.witness["lhs"] == 0.5 and rep.witness["rhs"] == 1.0


def test_two_point_sharpened_poincare_pinned(two_point):
    u = np.array([0.0, 1.0])
    g = fm.canonical_gradient(two_point, u, 0.5)
    rep = fm.check_sobolev_poincare(two_point, u, g, 0.5, 1.0, Q=1.0)
    assert rep.passed
    assert rep.params["p_star"] == pytest.approx(2.0)
    # best centering of (0, 1) in L2 is c = 1/2, giving lhs = 1/2
    assert rep.best_constant == pytest.approx(0.5, abs=1e-10)


def test_two_point_fractional_poincare_pinned(two_point):
    u = np.array([0.0, 1.0])
    seq = fm.canonical_fractional_gradient(two_point, u, 0.5)
    rep = fm.check_fractional_poincare(
        two_point, u, seq, 0.5, 1.0, eps=0.25, eps_prime=0.375
    )
    assert rep.passed
    # single level k = -1: lhs 1/2 against 2^(3/8) * 2^(1/8) = sqrt(2)
    assert rep.best_constant == pytest.approx(0.5 / math.sqrt(2.0), abs=1e-13)
    assert rep.details["tail_truncated_at"] == -1


def test_center_infimum_matches_scan():
    rng = np.random.default_rng(3)
    vals, w = rng.random(9) * 4.0 - 1.0, rng.random(9) + 0.1
    for p_star in (1.0, 2.0, 3.7):
        got = _inf_center_lp(vals, w, p_star)
        want = center_scan_oracle(vals, w, p_star)
        assert got <= want + 1e-12  # true infimum never above any scanned center
        assert got == pytest.approx(want, abs=1e-4)  # scan grid resolution
    # concave range: optimum sits at a data value, scan grid contains them
    got = _inf_center_lp(vals, w, 0.7)
    want = min(
        float((w @ np.abs(vals - c) ** 0.7 / w.sum()) ** (1 / 0.7)) for c in vals
    )
    assert got == pytest.approx(want, abs=1e-12)


def test_constant_function_is_vacuous(two_point):
    u = np.full(2, 3.0)
    rep = fm.check_poincare(two_point, u, np.zeros(2), 0.5, 1.0)
    assert rep.passed
    assert rep.best_constant == 0.0
    assert "vacuous" in rep.flags


def test_zero_gradient_on_nonconstant_fails(two_point):
    rep = fm.check_poincare(two_point, np.array([0.0, 1.0]), np.zeros(2), 0.5, 1.0)
    assert not rep.passed
    assert rep.best_constant == math.inf
    assert rep.flags == ("zero_rhs",)


def test_window_rejections(two_point, path5):
    u = np.array([0.0, 1.0])
    g = np.ones(2)
    with pytest.raises(ParameterWindowError):
        fm.check_sobolev_poincare(two_point, u, g, 0.5, 2.0, Q=1.0)  # Q <= s*p
    seq = fm.canonical_fractional_gradient(two_point, u, 0.5)
    with pytest.raises(ParameterWindowError):
        fm.check_fractional_poincare(two_point, u, seq, 0.5, 1.0, 0.4, 0.3)
    with pytest.raises(ParameterWindowError):
        fm.check_fractional_poincare(two_point, u, seq, 0.5, 1.0, 0.0, 0.3)
    with pytest.raises(ParameterWindowError):
        fm.fefferman_stein_check(path5, np.ones((2, 5)), 1.0, 2.0)
    with pytest.raises(ParameterWindowError):
        fm.fefferman_stein_check(path5, np.ones((2, 5)), 2.0, 0.8)


def test_refinement_adds_constraints(path5):
    u = np.array([0.0, 1.0, 0.3, 2.0, 1.1])
    g = fm.canonical_gradient(path5, u, 0.5)
    coarse = fm.check_poincare(path5, u, g, 0.5, 1.0, radii=np.array([1.0, 2.0]))
    fine = fm.check_poincare(
        path5, u, g, 0.5, 1.0, radii=np.array([1.0, 1.5, 2.0, 3.0, 4.0])
    )
    assert fine.best_constant >= coarse.best_constant
    assert fine.details["samples"] > coarse.details["samples"]


# ----------------------------------------------------------------------
# gradient transfers
# ----------------------------------------------------------------------
def _transfer_setup(space, u, s, alpha):
    geom = fm.estimate_geometry(space)
    t = geom.Q / (geom.Q + s)
    params = fm.SmoothnessParams(s=s, alpha=alpha, t=t)
    g, _ = fm.optimal_gradient(space, u, s, 1.0)
    return geom, params, g


def test_scalar_transfer_two_point_constant_target(two_point):
    # the only scale averages both points, so the maximal function is constant
    u = np.array([0.0, 1.0])
    geom, params, g = _transfer_setup(two_point, u, 1.0, 0.0)
    h, rep = fm.scalar_transfer(two_point, u, g, params, geom.Q)
    assert rep.check_id == "scalar-transfer"
    assert rep.best_constant == 0.0
    assert rep.details["branch"] == "subunit"
    assert h == pytest.approx([0.5, 0.5], abs=5e-11)


def test_scalar_transfer_path5_replay(path5):
    u = np.array([0.0, 1.0, 4.0, 2.0, 3.0])
    geom, params, g = _transfer_setup(path5, u, 1.0, 0.0)
    h, rep = fm.scalar_transfer(path5, u, g, params, geom.Q)
    assert rep.passed and 0.0 < rep.best_constant < math.inf
    assert rep.details["sigma"] == 1.0

    family = fm.build_scale_family(path5, fm.radius_scale_set(path5, "dyadic"))
    F, _ = fm.discrete_fractional_maximal(path5, u, 0.0, family)
    # C* h is a valid gradient of the maximal function, and C* is smallest
    chk = fm.is_hajlasz_gradient(path5, F, rep.best_constant * h, 1.0, tol=1e-12)
    assert chk.passed
    shrunk = fm.is_hajlasz_gradient(path5, F, 0.999 * rep.best_constant * h, 1.0)
    assert not shrunk.passed
    # witness replays the constant
    wit = rep.witness
    assert wit["lhs"] / wit["rhs"] == rep.best_constant


def test_scalar_transfer_superunit_branch(path5):
    u = np.array([0.0, 1.0, 4.0, 2.0, 3.0])
    geom, params, g = _transfer_setup(path5, u, 0.8, 0.5)
    h, rep = fm.scalar_transfer(path5, u, g, params, geom.Q)
    assert rep.details["branch"] == "superunit"
    assert rep.details["sigma"] == 1.0
    assert rep.passed and rep.best_constant < math.inf


def test_scalar_transfer_scale_invariance(path5):
    u = np.array([0.0, 1.0, 4.0, 2.0, 3.0])
    for s, alpha in ((1.0, 0.0), (0.5, 0.3)):
        geom, params, g = _transfer_setup(path5, u, s, alpha)
        _, rep1 = fm.scalar_transfer(path5, u, g, params, geom.Q)
        _, rep2 = fm.scalar_transfer(path5, 10.0 * u, 10.0 * g, params, geom.Q)
        assert rep2.best_constant == pytest.approx(rep1.best_constant, rel=1e-10)


def test_sequence_transfer_path5(path5):
    u = np.array([0.0, 1.0, 4.0, 2.0, 3.0])
    geom = fm.estimate_geometry(path5)
    params = fm.default_sequence_params(0.5, 0.3, 1.5, 1.5, geom.Q)
    seq = fm.canonical_fractional_gradient(path5, u, 0.5)
    gt, rep = fm.sequence_transfer(path5, u, seq, params, geom.Q)
    assert rep.passed and rep.best_constant < math.inf
    assert rep.details["sigma"] == pytest.approx(0.8)

    family = fm.build_scale_family(path5, fm.radius_scale_set(path5, "dyadic"))
    F, _ = fm.discrete_fractional_maximal(path5, u, 0.3, family)
    scaled = gt.scaled(rep.best_constant)
    chk = fm.is_fractional_gradient(path5, F, scaled, 0.8, tol=1e-12)
    assert chk.passed


def test_sequence_transfer_extension_is_noop(path5):
    u = np.array([0.0, 1.0, 4.0, 2.0, 3.0])
    geom = fm.estimate_geometry(path5)
    params = fm.default_sequence_params(0.5, 0.3, 1.5, 1.5, geom.Q)
    seq = fm.canonical_fractional_gradient(path5, u, 0.5)
    _, base = fm.sequence_transfer(path5, u, seq, params, geom.Q)
    ext, rep = fm.sequence_transfer(path5, u, seq, params, geom.Q, extension=2)
    assert rep.best_constant == base.best_constant
    assert rep.details["level_range"] == [seq.k_min - 2, seq.k_max + 2]
    assert ext.k_min == seq.k_min - 2


def test_sequence_suite_override_validation():
    corpus = builtin_corpus("two_point")
    with pytest.raises(ParameterWindowError):
        fm.run_sequence_transfer_suite(corpus, overrides={"gamma": 0.1})
    with pytest.raises(ParameterWindowError):
        fm.run_sequence_transfer_suite(
            corpus, s=0.4, alpha=0.1, overrides={"delta": 1.0}
        )


# ----------------------------------------------------------------------
# vector-valued maximal inequality
# ----------------------------------------------------------------------
def test_fefferman_stein_single_level_is_scalar_ratio(path5):
    rng = np.random.default_rng(7)
    row = rng.random(5)
    rep = fm.fefferman_stein_check(path5, row[None, :], 2.0, 2.0)
    radii = fm.standard_radius_set(path5)
    m_row, _ = fm.fractional_maximal(path5, row, 0.0, radii)
    want = fm.lp_norm(path5, m_row, 2.0) / fm.lp_norm(path5, row, 2.0)
    assert rep.best_constant == pytest.approx(want, rel=1e-12)
    assert rep.best_constant >= 1.0  # maximal function dominates |u|


def test_fefferman_stein_accepts_gradient_sequence(path5):
    seq = fm.GradientSequence(-1, 0, np.abs(np.sin(np.arange(10.0))).reshape(2, 5))
    rep = fm.fefferman_stein_check(path5, seq, 1.5, 3.0)
    assert rep.passed and math.isfinite(rep.best_constant)


# ----------------------------------------------------------------------
# norm boundedness experiments
# ----------------------------------------------------------------------
def _mini_corpus() -> Corpus:
    space = path_space(5)
    u_lin = space.dist[0].copy()
    u_const = np.full(5, 2.0)
    return Corpus(
        name="mini",
        spaces={"path_5": space},
        instances=(
            CorpusInstance("path_5", "linear", space, u_lin),
            CorpusInstance("path_5", "constant", space, u_const),
        ),
    )


def test_experiment_rows_and_zero_source():
    table = fm.boundedness_experiment(_mini_corpus(), "besov-alpha0")
    assert table["experiment"] == "besov-alpha0"
    by_label = {r["instance"]: r for r in table["rows"]}
    lin = by_label["path_5/linear"]
    assert lin["flags"] == [] and lin["ratio"] > 0.0
    con = by_label["path_5/constant"]
    assert "zero_source" in con["flags"] and "ratio" not in con
    assert table["instances_with_ratio"] == 1
    assert table["max_ratio"] == lin["ratio"]


def test_alpha_smoothing_flattens_small_space():
    # with alpha > 0 the top scale dominates on a short path, so the
    # fractional maximal function is constant and the target norm vanishes
    table = fm.boundedness_experiment(_mini_corpus(), "hajlasz")
    lin = {r["instance"]: r for r in table["rows"]}["path_5/linear"]
    assert lin["target_norm"] == 0.0
    assert lin["ratio"] == 0.0


def test_experiment_window_violation():
    # Q = log2(3) on this path, so alpha = 0.9 >= Q/p leaves the window
    table = fm.boundedness_experiment(
        _mini_corpus(), "maximal-lp", {"alpha": 0.9, "p": 2.0}
    )
    assert all("window_violation" in r["flags"] for r in table["rows"])
    assert table["max_ratio"] is None


def test_experiment_unknown_rejected():
    with pytest.raises(ParameterWindowError):
        fm.boundedness_experiment(_mini_corpus(), "no-such-experiment")


def test_maximal_lp_experiment_values():
    table = fm.boundedness_experiment(_mini_corpus(), "maximal-lp")
    row = next(r for r in table["rows"] if r["instance"] == "path_5/linear")
    space = path_space(5)
    Q = fm.estimate_geometry(space).Q
    assert row["exponents"]["p_star"] == pytest.approx(
        Q * 2.0 / (Q - 0.3 * 2.0), rel=1e-12
    )
    m_vals, _ = fm.fractional_maximal(
        space, space.dist[0], 0.3, fm.standard_radius_set(space)
    )
    want = fm.lp_norm(space, m_vals, row["exponents"]["p_star"]) / fm.lp_norm(
        space, space.dist[0], 2.0
    )
    assert row["ratio"] == pytest.approx(want, rel=1e-12)


# ----------------------------------------------------------------------
# suites and report output
# ----------------------------------------------------------------------
def test_suites_run_on_builtin_corpus():
    corpus = builtin_corpus("two_point")
    poi = fm.run_poincare_suite(corpus)
    assert {r.check_id for r in poi} == {
        "poincare",
        "sobolev-poincare",
        "fractional-poincare",
    }
    assert all(r.passed for r in poi)
    sca = fm.run_scalar_transfer_suite(corpus)
    assert len(sca) == 3 * len(corpus.instances)
    assert all(r.passed for r in sca)
    seqs = fm.run_sequence_transfer_suite(corpus)
    assert all(r.passed for r in seqs)
    fs = fm.run_fefferman_stein_suite(corpus)
    assert len(fs) == 2 * len(corpus.spaces)
    assert all(r.best_constant >= 1.0 for r in fs)
    assert all("instance" in r.params for r in poi + sca + seqs + fs)


def test_write_reports_and_tables(tmp_path):
    corpus = builtin_corpus("two_point")
    reports = fm.run_poincare_suite(corpus)
    out = tmp_path / "reports"
    names = fm.write_reports(reports, str(out))
    assert names[-1] == "summary.csv"
    assert sorted(os.listdir(out)) == sorted(names)
    first = json.loads((out / names[0]).read_text())
    assert set(first) == {
        "check_id",
        "params",
        "best_constant",
        "witness",
        "passed",
        "flags",
        "details",
    }
    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0] == "check_id,instance,best_constant,passed,flags"
    assert len(summary) == len(reports) + 1

    tables = [fm.boundedness_experiment(corpus, "maximal-lp")]
    tnames = fm.write_boundedness_tables(tables, str(out))
    assert "bounds__maximal-lp.json" in tnames
    loaded = json.loads((out / "bounds__maximal-lp.json").read_text())
    assert loaded["experiment"] == "maximal-lp"

    # byte determinism on repeated writes
    blob1 = (out / names[0]).read_bytes()
    fm.write_reports(fm.run_poincare_suite(corpus), str(out))
    assert (out / names[0]).read_bytes() == blob1
