"""Small-noise phase variance: closed form vs quadrature, bounds, limits."""

import numpy as np
import pytest

from phasediff import (
    AmplifierParams,
    CoherentInput,
    SdeConfig,
    ensemble_stats,
    mean_photon,
    phase_variance_expansion,
    simulate_polar,
    small_noise_constants,
    small_noise_phase_variance,
    small_noise_variance_rate,
)

IDEAL_1 = AmplifierParams(1.0, 0.0)

PARAM_GRID = [
    (AmplifierParams(1.0, 0.0), 2.0),
    (AmplifierParams(1.0, 0.0), 13.0),
    (AmplifierParams(0.7, 0.3), 3.0),
    (AmplifierParams(2.0, 0.5), 6.0),
]


def test_constants_reproduce_mean_curve():
    for p, n0 in PARAM_GRID:
        c = small_noise_constants(p, CoherentInput(n0))
        assert c.a + c.b == pytest.approx(n0, rel=1e-14)
        assert c.b < 0
        for t in (0.0, 0.7, 2.3):
            from phasediff import gain
            assert c.a * gain(p, t) + c.b == pytest.approx(mean_photon(p, n0, t), rel=1e-13)


def test_initial_value_is_initial_variance():
    inp = CoherentInput(5.0)
    assert small_noise_phase_variance(IDEAL_1, inp, 0.0) == pytest.approx(0.0, abs=1e-16)
    assert small_noise_phase_variance(IDEAL_1, inp, 0.0, initial_variance=0.2) == pytest.approx(0.2)


def test_stationary_increment_n0_13():
    # late-time increment collapses to (1/2) ln((n0 + 1)/n0) for the lossless case
    v = small_noise_phase_variance(IDEAL_1, CoherentInput(13.0), 60.0)
    assert v == pytest.approx(0.5 * np.log(14.0 / 13.0), abs=1e-10)


def test_strong_input_freezes_the_phase():
    t = np.linspace(0.0, 10.0, 50)
    v = small_noise_phase_variance(IDEAL_1, CoherentInput(1e12), t)
    assert np.all(np.abs(v) < 1e-9)


def test_monotone_nondecreasing():
    t = np.linspace(0.0, 12.0, 600)
    for p, n0 in PARAM_GRID:
        v = small_noise_phase_variance(p, CoherentInput(n0), t)
        assert np.all(np.diff(v) >= -1e-15)


class TestRate:
    def test_hand_value(self):
        assert small_noise_variance_rate(IDEAL_1, CoherentInput(2.0), 0.0) == pytest.approx(0.25)

    def test_vanishes_at_late_times(self):
        assert small_noise_variance_rate(IDEAL_1, CoherentInput(2.0), 40.0) < 1e-16

    def test_finite_difference_consistency(self):
        dt = 1e-4
        for p, n0 in PARAM_GRID:
            inp = CoherentInput(n0)
            for t in (0.0, 0.3, 1.1, 2.9):
                fd = (
                    small_noise_phase_variance(p, inp, t + dt)
                    - small_noise_phase_variance(p, inp, t)
                ) / dt
                rate = small_noise_variance_rate(p, inp, t + dt / 2)
                assert abs(fd - rate) <= 1e-6


def test_closed_form_equals_trapezoid_quadrature():
    # the closed form is the integral of kappa_up / (2 E[N]); trapezoid at
    # step 1e-3 must agree to 1e-6 relative
    dt = 1e-3
    grid = np.arange(0.0, 3.0 + dt / 2, dt)
    for p, n0 in PARAM_GRID:
        inp = CoherentInput(n0)
        integrand = small_noise_variance_rate(p, inp, grid)
        quad = np.concatenate([[0.0], np.cumsum((integrand[1:] + integrand[:-1]) / 2) * dt])
        closed = small_noise_phase_variance(p, inp, grid)
        mask = grid > 0.1
        assert np.max(np.abs(quad[mask] - closed[mask]) / closed[mask]) < 1e-6


class TestJensenBound:
    def test_below_expansion_everywhere(self):
        t = np.linspace(0.0, 10.0, 400)
        for n0 in (1.5, 2.25, 5.0, 13.0):
            inp = CoherentInput(n0)
            for p in (IDEAL_1, AmplifierParams(0.8, 0.2)):
                sn = small_noise_phase_variance(p, inp, t)
                k2 = phase_variance_expansion(p, inp, 2, t)
                assert np.all(sn <= k2 + 1e-12)

    def test_never_exceeds_sampled_variance_beyond_noise(self):
        p, inp = IDEAL_1, CoherentInput(2.25)
        cfg = SdeConfig(dt=1e-3, t_max=4.0, n_traj=500, master_seed=2, record_every=40)
        stats = ensemble_stats(simulate_polar(p, inp, cfg))["phi"]
        t = np.arange(0, cfg.n_steps + 1, cfg.record_every) * cfg.dt
        sn = small_noise_phase_variance(p, inp, t)
        assert np.all(sn <= stats.variance + 3 * stats.se_variance)
