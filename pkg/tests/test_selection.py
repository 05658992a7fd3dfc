import math

import pytest

from isoq import metrics, selection
from isoq.errors import BallLike, ConfigError
from isoq.experiments import ELLIPSE_CONSTANT
from isoq.selection import OptimizerSettings, SelectionConfig, SelectionResult
from isoq.shapes import FourierCoeffs, from_fourier, make_ellipse, make_regular_polygon

QUICK = OptimizerSettings(restarts=1, max_iter=150, seed=3)


# -- penalized value ------------------------------------------------------------

def test_penalty_vanishes_on_target():
    e = make_ellipse(0.1)
    alpha, _ = metrics.asymmetry(e)
    assert selection.penalized_value(e, alpha) == pytest.approx(metrics.quotient(e), abs=1e-15)


def test_penalty_is_one_at_double_target():
    e = make_ellipse(0.1)
    alpha, _ = metrics.asymmetry(e)
    assert selection.penalized_value(e, alpha / 2) == pytest.approx(metrics.quotient(e) + 1.0, abs=1e-12)


def test_square_penalized_value():
    assert selection.penalized_value(make_regular_polygon(4), 0.18109) == pytest.approx(3.915, abs=1e-2)


def test_ball_has_no_penalized_value():
    with pytest.raises(BallLike):
        selection.penalized_value(from_fourier(FourierCoeffs([0.0], [])), 0.1)


# -- configuration ----------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    dict(alpha_target=0.0), dict(alpha_target=0.6), dict(alpha_target=0.1, K=1),
    dict(alpha_target=0.1, quadrature_n=300),
    dict(alpha_target=0.1, optimizer=OptimizerSettings(restarts=0)),
])
def test_config_guards(kwargs):
    with pytest.raises(ConfigError):
        SelectionConfig(**kwargs)


def test_recovery_target_guards():
    with pytest.raises(ConfigError):
        selection.recovery_sequence([0.1, 0.2])
    with pytest.raises(ConfigError):
        selection.recovery_sequence([0.1, 0.1])
    with pytest.raises(ConfigError):
        selection.recovery_sequence([])
    with pytest.raises(ConfigError):
        selection.recovery_sequence([0.7])


# -- optimizer ---------------------------------------------------------------------

def test_single_mode_selection_is_ellipse_like():
    res = selection.minimize_penalized(SelectionConfig(0.1, K=2))
    assert res.Q_value == pytest.approx(0.4626, abs=0.005)
    assert res.penalty <= 1e-3
    assert res.converged


def test_reproducible_serialization():
    cfg = SelectionConfig(0.1, K=4, optimizer=QUICK)
    a = selection.minimize_penalized(cfg)
    b = selection.minimize_penalized(cfg)
    assert a.to_json() == b.to_json()
    assert a.csv_row() == b.csv_row()


def test_iteration_cap_clears_converged_flag():
    res = selection.minimize_penalized(SelectionConfig(0.1, K=6, optimizer=OptimizerSettings(1, 1e-8, 40)))
    assert not res.converged
    assert res.evaluations <= 40 + 2


def test_trajectory_is_running_best():
    res = selection.minimize_penalized(SelectionConfig(0.1, K=4, optimizer=QUICK))
    values = [v for _, v in res.trajectory]
    assert values == sorted(values, reverse=True)
    assert res.objective <= values[-1] + 1e-12


def test_result_fields_are_consistent():
    res = selection.minimize_penalized(SelectionConfig(0.08, K=3, optimizer=QUICK))
    assert res.Q_value == pytest.approx(res.deficit / res.alpha**2, rel=1e-14)
    assert res.penalty == pytest.approx((res.alpha / 0.08 - 1) ** 2, rel=1e-14)
    assert res.coeffs.a[0] == 0.0 and res.coeffs.a[1] == 0.0 and res.coeffs.b[0] == 0.0
    assert SelectionResult.CSV_HEADER == "alpha_target,alpha,deficit,Q,penalty,kappa_dev,kappa_osc"


def test_monotone_truncation_with_warm_start():
    cfg2 = SelectionConfig(0.1, K=2, optimizer=OptimizerSettings(restarts=1))
    r2 = selection.minimize_penalized(cfg2)
    cfg3 = SelectionConfig(0.1, K=3, optimizer=OptimizerSettings(restarts=1, max_iter=300))
    r3 = selection.minimize_penalized(cfg3, x0=r2.coeffs)
    assert r3.objective <= r2.objective + 1e-9


@pytest.mark.slow
def test_eight_mode_selection_range():
    res = selection.minimize_penalized(SelectionConfig(0.1, K=8, optimizer=OptimizerSettings(restarts=4)))
    assert 0.452 <= res.Q_value <= 0.463
    assert res.penalty <= 1e-3


def test_single_target_recovery_is_that_run():
    seq = selection.recovery_sequence([0.1], K=2, optimizer=OptimizerSettings(restarts=1))
    assert seq.extrapolated_QB == seq.results[0].Q_value


# -- curvature bound ------------------------------------------------------------------

def fake_result(Q, alpha):
    return SelectionResult(FourierCoeffs([0.0], []), Q, alpha, Q * alpha**2, 0.0, 0.0, 0.1, True)


def test_oscillation_bound_formula():
    _, bound = selection.curvature_oscillation_bound(fake_result(0.46, 0.1), 0.1)
    assert bound == pytest.approx(0.184, abs=1e-15)
    _, b2 = selection.curvature_oscillation_bound(fake_result(0.46, 0.12), 0.1)
    assert b2 == pytest.approx(4 * (0.46 * 0.12 + 1.44 * 0.02), rel=1e-14)


# -- recovery sequence (shared run) -----------------------------------------------------

@pytest.mark.slow
def test_recovery_quotients_in_range(recovery_run):
    seq, _ = recovery_run
    for r in seq.results:
        assert 0.45 <= r.Q_value <= ELLIPSE_CONSTANT + 0.01
        assert r.penalty <= 1e-3


@pytest.mark.slow
def test_recovery_curvature_deviation_decreases(recovery_run):
    seq, _ = recovery_run
    dev = [r.curvature_max_dev for r in seq.results]
    assert dev[0] > dev[1] > dev[2]
    assert dev[2] <= 0.5


@pytest.mark.slow
def test_recovery_extrapolation_near_hall_constant(recovery_run):
    seq, _ = recovery_run
    C0 = math.pi / (8 * (4 - math.pi))
    assert seq.extrapolated_QB == pytest.approx(C0, rel=0.03)
    assert seq.fits_agree


@pytest.mark.slow
def test_oscillation_within_slack_at_smallest_target(recovery_run):
    seq, _ = recovery_run
    last = seq.results[-1]
    observed, bound = selection.curvature_oscillation_bound(last, last.alpha_target)
    assert observed <= 1.5 * bound
