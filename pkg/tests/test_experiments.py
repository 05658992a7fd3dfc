import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isoq import experiments, metrics
from isoq.errors import ConfigError, DegenerateDenominator, DomainError, InsufficientData
from isoq.experiments import ELLIPSE_CONSTANT, HALL_CONSTANT, SweepRow, SweepTable
from isoq.shapes import FourierCoeffs, from_fourier, make_ellipse, make_regular_polygon, normalize_volume


def test_constants_from_closed_forms():
    assert HALL_CONSTANT == pytest.approx(0.457474, abs=5e-7)
    assert ELLIPSE_CONSTANT == pytest.approx(0.4626377, abs=5e-8)


# -- sweeps -------------------------------------------------------------------------

def test_ellipse_sweep_row():
    table = experiments.ellipse_sweep([0.1])
    assert table.rows[0].quotient == pytest.approx(0.463, abs=0.01)
    assert table.rows[0].quotient == table.rows[0].deficit / table.rows[0].asymmetry**2


def test_ellipse_quotient_increases_with_eps():
    q = [r.quotient for r in experiments.ellipse_sweep([0.05, 0.1, 0.2, 0.4]).rows]
    assert q == sorted(q) and len(set(q)) == 4


@pytest.mark.parametrize("eps", [0.0, -0.1, 0.6])
def test_ellipse_sweep_domain(eps):
    with pytest.raises(DomainError):
        experiments.ellipse_sweep([0.1, eps])


def test_sweep_table_invariants():
    with pytest.raises(DomainError):
        SweepTable((SweepRow(0.1, 1, 1, 1), SweepRow(0.3, 1, 1, 1), SweepRow(0.2, 1, 1, 1)))
    with pytest.raises(DomainError):
        SweepTable((SweepRow(0.1, 1, 1, math.inf),))
    with pytest.raises(DomainError):
        SweepTable((SweepRow(0.1, 1, 1, -1.0),))


def test_sweep_csv():
    text = experiments.ellipse_sweep([0.2, 0.1]).to_csv()
    lines = text.splitlines()
    assert lines[0] == "parameter,deficit,asymmetry,quotient"
    assert len(lines) == 3 and lines[1].startswith("0.2,")


def test_estimate_constant_needs_two_rows():
    with pytest.raises(InsufficientData):
        experiments.estimate_constant(experiments.ellipse_sweep([0.1]))


def test_estimate_constant_recovers_exact_line():
    rows = tuple(SweepRow(p, 0.0, a, 0.5 - 0.2 * a) for p, a in [(0.3, 0.3), (0.2, 0.2), (0.1, 0.1)])
    assert experiments.estimate_constant(SweepTable(rows)) == pytest.approx(0.5, abs=1e-14)


def test_ellipse_extrapolation():
    table = experiments.ellipse_sweep([0.05, 0.1, 0.2])
    assert experiments.estimate_constant(table) == pytest.approx(ELLIPSE_CONSTANT, abs=1e-3)


def test_ellipse_extrapolation_in_squared_asymmetry():
    table = experiments.ellipse_sweep([0.05, 0.1, 0.2])
    assert experiments.estimate_constant(table, power=2) == pytest.approx(ELLIPSE_CONSTANT, abs=1e-4)


# -- linearized quotient ------------------------------------------------------------------

def test_linearized_quotient_examples():
    cos2 = FourierCoeffs.from_modes({2: (1.0, 0.0)})
    cos3 = FourierCoeffs.from_modes({3: (1.0, 0.0)})
    assert experiments.asymptotic_quotient(cos2) == pytest.approx(3 * math.pi**2 / 64, abs=1e-9)
    assert experiments.asymptotic_quotient(cos3) == pytest.approx(math.pi**2 / 8, abs=1e-9)
    assert experiments.asymptotic_quotient(cos2) == pytest.approx(0.4626377, abs=1e-7)
    assert experiments.asymptotic_quotient(cos3) == pytest.approx(1.2337006, abs=1e-7)


@given(st.floats(-2, 2))
def test_translation_mode_is_invisible(beta):
    u = FourierCoeffs.from_modes({1: (beta, 0.0), 2: (1.0, 0.0)})
    assert experiments.asymptotic_quotient(u) == pytest.approx(3 * math.pi**2 / 64, abs=1e-9)


@given(st.floats(0.01, 100), st.floats(0, 2 * np.pi), st.floats(-0.5, 0.5))
def test_linearized_quotient_scale_and_rotation_invariant(scale, phi, c4):
    u = FourierCoeffs.from_modes({2: (1.0, 0.3), 4: (c4, 0.1)})
    base = experiments.asymptotic_quotient(u)
    # rotating by phi maps (a_k, b_k) through the angle k phi
    modes = {}
    for k, (a, b) in {2: (1.0, 0.3), 4: (c4, 0.1)}.items():
        ca, sa = math.cos(k * phi), math.sin(k * phi)
        modes[k] = (scale * (a * ca - b * sa), scale * (a * sa + b * ca))
    assert experiments.asymptotic_quotient(FourierCoeffs.from_modes(modes)) == pytest.approx(base, rel=1e-8)


def test_linearized_quotient_degenerate():
    with pytest.raises(DegenerateDenominator):
        experiments.asymptotic_quotient(FourierCoeffs.from_modes({1: (1.0, 0.0)}))
    with pytest.raises(DegenerateDenominator):
        experiments.asymptotic_quotient(FourierCoeffs([0.0], []))


@pytest.mark.parametrize("modes", [{2: (1.0, 0.0), 4: (0.3, 0.0)}, {2: (0.7, 0.7), 3: (0.0, 0.4)}])
def test_linearized_quotient_is_small_amplitude_limit(modes):
    u = FourierCoeffs.from_modes(modes)
    J = experiments.asymptotic_quotient(u)
    q = []
    for t in (0.004, 0.002):
        s = normalize_volume(from_fourier(u.scaled(t)))
        q.append(metrics.quotient(s))
    # the nonlinear quotient approaches J and the gap shrinks with the amplitude
    assert abs(q[1] - J) < abs(q[0] - J) or abs(q[1] - J) < 1e-5
    assert q[1] == pytest.approx(J, rel=5e-3)


def test_minimize_asymptotic_single_mode():
    value, coeffs = experiments.minimize_asymptotic(2)
    assert value == pytest.approx(3 * math.pi**2 / 64, abs=1e-8)
    assert coeffs.K == 2
    assert experiments.asymptotic_quotient(coeffs) == pytest.approx(value, abs=1e-9)


def test_minimize_asymptotic_guard():
    with pytest.raises(ConfigError):
        experiments.minimize_asymptotic(1)


def test_minimize_asymptotic_nonincreasing_small_k():
    vals = [experiments.minimize_asymptotic(k, restarts=1)[0] for k in (2, 3, 4, 5, 6)]
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))
    assert min(vals) >= 0.45


@pytest.mark.slow
def test_minimize_asymptotic_twelve_modes(linearized_12):
    value, coeffs, _ = linearized_12
    assert value == pytest.approx(HALL_CONSTANT, rel=0.02)
    assert value >= 0.45
    assert experiments.asymptotic_quotient(coeffs) == pytest.approx(value, rel=1e-7)


@pytest.mark.slow
def test_minimize_asymptotic_nested(linearized_12, linearized_13):
    assert linearized_13[0] <= linearized_12[0] + 1e-9


# -- corpus property suite ---------------------------------------------------------------

def test_corpus_composition():
    names = [n for n, _ in experiments.default_corpus()]
    assert {f"polygon-{m}" for m in range(3, 13)} <= set(names)
    assert sum(n.startswith("ellipse") for n in names) == 5
    for name, shape in experiments.default_corpus():
        if name.startswith("random"):
            assert np.max(np.abs(shape.u)) <= 0.05 + 1e-3
            assert shape.r.min() >= 0.5


def test_corpus_is_seeded():
    a = experiments.random_corpus_shape(2024, 3)
    b = experiments.random_corpus_shape(2024, 3)
    assert np.array_equal(a.r, b.r)


def test_named_corpus_entries():
    rep = experiments.qii_property_suite([("square", make_regular_polygon(4)), ("ellipse", make_ellipse(0.05))])
    by_name = {e.name: e for e in rep.entries}
    assert by_name["square"].quotient == pytest.approx(3.915, abs=1e-2) and by_name["square"].passed
    assert by_name["ellipse"].quotient == pytest.approx(0.463, abs=1e-2) and by_name["ellipse"].passed


def test_failures_are_reported_not_raised():
    rep = experiments.qii_property_suite([("ellipse", make_ellipse(0.05))], constant=10.0)
    assert not rep.all_passed and rep.failures == ["ellipse"]


def test_default_corpus_inequality_and_hall_form():
    rep = experiments.qii_property_suite()
    assert rep.all_passed
    assert rep.min_quotient >= 0.45
    assert rep.hall_failures == []
    assert [e.name for e in rep.entries] == sorted(e.name for e in rep.entries)


# -- cross-route separation ---------------------------------------------------------------

@pytest.mark.slow
def test_ellipse_constant_exceeds_recovery_constant(recovery_run):
    seq, _ = recovery_run
    ellipse = experiments.estimate_constant(experiments.ellipse_sweep([0.05, 0.1, 0.2]))
    recovery = experiments.estimate_constant(experiments.recovery_table(seq.results))
    assert recovery == pytest.approx(HALL_CONSTANT, rel=0.02)
    assert ellipse - recovery >= 0.003
