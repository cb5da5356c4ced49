import math

import pytest

import dirand


def test_analytic_endpoints():
    assert dirand.pure_state_guessing(0.0).guessing_probability == pytest.approx(0.25, abs=1e-12)
    assert dirand.pure_state_alpha(math.pi / 4) == pytest.approx(math.pi / 4, abs=1e-12)


def test_uniform_behavior_has_no_randomness():
    r = dirand.guessing_probability(dirand.Behavior.uniform(2, 2), level=1)
    assert r.optimal()
    assert r.hmin == pytest.approx(0.0, abs=1e-6)


def test_noisy_state_certificate_matches_bound():
    p = dirand.behavior(dirand.make_state(0.9, math.pi / 4), dirand.canonical_settings(2, 2))
    r = dirand.guessing_probability(p, level=2)
    assert r.optimal()
    assert r.bell_expression.evaluate(p) == pytest.approx(r.guessing_probability, abs=1e-6)


def test_chsh_bound_at_tsirelson():
    coeffs = dirand.chsh_coefficients(2, 2)
    r = dirand.bell_constrained_bound(coeffs, 2 * math.sqrt(2))
    assert r.hmin == pytest.approx(1.22845, abs=2e-3)


def test_behavior_csv_round_trip():
    p = dirand.behavior(dirand.make_state(1.0, math.pi / 8), dirand.canonical_settings(2, 3))
    q = dirand.behavior_from_csv(p.to_csv())
    assert q.probs == pytest.approx(p.probs, abs=1e-12)


def test_invalid_state_raises():
    with pytest.raises(ValueError):
        dirand.make_state(1.5, 0.0)


def test_optimize_runs():
    opts = dirand.SeesawOptions()
    opts.starts = 2
    r = dirand.optimize(dirand.make_state(0.95, math.pi / 4), options=opts)
    assert r.best_report.hmin > 0.5
    assert all(b <= a + 1e-9 for a, b in zip(r.trajectory, r.trajectory[1:]))
