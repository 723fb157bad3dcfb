"""Order parameters, frequency estimates, switching detection, scaling."""

import numpy as np
import pytest

from hetsync import Params, integrate_em, integrate_rk4, lift
from hetsync.observables import (
    SwitchingEvent,
    average_frequencies,
    detect_switches,
    episode_argument_gaps,
    order_parameters,
    residence_times,
    transition_scaling,
)
from hetsync.spectral import equilibrium_point

PI = np.pi


def params_n2(**kw):
    base = dict(M=3, N=2, alpha2=PI / 2, alpha4=PI, r=0.05, K=0.15)
    base.update(kw)
    return Params(**base)


def params_n3(**kw):
    base = dict(M=3, N=3, alpha2=PI / 2, alpha4=PI, r=0.01, K=0.16)
    base.update(kw)
    return Params(**base)


class TestOrderParameters:
    def test_synchronized_population(self):
        p = params_n3()
        th = np.repeat([0.3, 1.1, 4.9], 3)
        R, arg = order_parameters(th, p)
        assert np.allclose(R, 1.0, atol=1e-12)
        assert np.allclose(arg, [0.3, 1.1, 4.9 - 2 * PI], atol=1e-12)

    def test_splay_population(self):
        p = params_n3()
        th = np.concatenate([[0, 2 * PI / 3, 4 * PI / 3], np.zeros(6)])
        R, _ = order_parameters(th, p)
        assert R[0] == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(R[1:], 1.0, atol=1e-12)

    def test_antiphase_pair(self):
        p = params_n2()
        th = np.array([0.0, PI, 0, 0, 0, 0])
        R, _ = order_parameters(th, p)
        assert R[0] == pytest.approx(0.0, abs=1e-12)

    def test_invariance_under_permutation_and_global_shift(self):
        p = params_n3()
        rng = np.random.default_rng(70)
        th = rng.uniform(0, 2 * PI, 9)
        R0, _ = order_parameters(th, p)
        perm = th.copy()
        perm[3:6] = th[[4, 5, 3]]
        R1, _ = order_parameters(perm, p)
        R2, _ = order_parameters(th + 1.7, p)
        assert np.allclose(R0, R1, atol=1e-12)
        assert np.allclose(R0, R2, atol=1e-12)

    def test_batch_shape(self):
        p = params_n2()
        R, arg = order_parameters(np.zeros((5, 6)), p)
        assert R.shape == arg.shape == (5, 3)


class TestAverageFrequencies:
    def test_uncoupled_one_splay_rates_n3(self):
        p = params_n3(K=0.0)
        th0 = lift(equilibrium_point("DSS", 3), 3)
        traj = integrate_rk4(th0, p, dt=1e-3, T=100.0, stride=100)
        freqs, spread = average_frequencies(traj, (0.0, 100.0))
        assert np.allclose(freqs, [-3.0, 0.0, 0.0], atol=1e-6)
        assert spread < 1e-9

    def test_uncoupled_gap_n2(self):
        p = params_n2(K=0.0)
        th0 = lift(equilibrium_point("DSS", 2), 2)
        traj = integrate_rk4(th0, p, dt=1e-3, T=100.0, stride=100)
        freqs, _ = average_frequencies(traj, (0.0, 100.0))
        assert abs(freqs[0] - freqs[1]) == pytest.approx(2.0, abs=1e-6)

    def test_gap_respects_coupled_bound_n3(self):
        # |Omega_1 - Omega_2| >= 3 - (4/3) K at the one-splay configuration
        K = 0.1
        p = params_n3(K=K)
        th0 = lift(equilibrium_point("DSS", 3), 3)
        traj = integrate_rk4(th0, p, dt=1e-3, T=100.0, stride=100)
        freqs, _ = average_frequencies(traj, (0.0, 100.0))
        assert abs(freqs[0] - freqs[1]) >= 3 - (4.0 / 3.0) * K - 1e-9

    def test_synchronized_pair_agrees(self):
        p = params_n3()
        th0 = lift(equilibrium_point("DSS", 3), 3)
        traj = integrate_rk4(th0, p, dt=1e-3, T=50.0, stride=100)
        freqs, _ = average_frequencies(traj, (0.0, 50.0))
        assert abs(freqs[1] - freqs[2]) < 1e-6

    def test_window_validation(self):
        p = params_n3()
        traj = integrate_rk4(np.zeros(9), p, dt=1e-3, T=1.0, stride=100)
        with pytest.raises(ValueError, match="outside"):
            average_frequencies(traj, (0.0, 2.0))
        with pytest.raises(ValueError, match="fewer than 10"):
            average_frequencies(traj, (0.0, 0.5))


class TestDetectSwitches:
    def test_synthetic_single_dip(self):
        t = np.linspace(0, 30, 301)
        R = np.full((301, 3), 0.99)
        R[(t >= 10) & (t <= 20), 0] = 0.1
        events = detect_switches(t, R, 0.4, 0.9)
        assert len(events) == 1
        ev = events[0]
        assert ev.population == 1
        assert ev.t_enter == pytest.approx(10.0, abs=0.2)
        assert ev.t_exit == pytest.approx(20.1, abs=0.2)
        assert ev.duration > 0

    def test_constant_sync_gives_no_events(self):
        t = np.linspace(0, 10, 100)
        assert detect_switches(t, np.ones((100, 3)), 0.4, 0.9) == []

    def test_hysteresis_suppresses_chatter(self):
        t = np.linspace(0, 4, 5)
        R = np.array([[0.95], [0.3], [0.6], [0.3], [0.95]])
        events = detect_switches(t, R, 0.4, 0.9)
        assert len(events) == 1  # the mid-band excursion does not close it

    def test_unclosed_episode_dropped(self):
        t = np.linspace(0, 4, 5)
        R = np.array([[0.95], [0.3], [0.3], [0.3], [0.3]])
        assert detect_switches(t, R, 0.4, 0.9) == []

    def test_threshold_ordering_enforced(self):
        with pytest.raises(ValueError):
            detect_switches([0, 1], np.ones((2, 1)), 0.9, 0.4)

    def test_sde_run_cycles_in_population_order(self):
        # near the cycle each population desynchronizes in turn: 1, 2, 3, ...
        p = params_n2(eta=1e-5)
        rng = np.random.default_rng(71)
        th0 = lift(equilibrium_point("DSS", 2), 2) + 0.01 * rng.standard_normal(6)
        traj = integrate_em(th0, p, dt=1e-3, T=2000.0, stride=100, seed=1001)
        R, _ = order_parameters(traj.states, p)
        events = detect_switches(traj.times, R)
        seq = [e.population for e in events]
        assert len(seq) >= 4
        steps = [(b - a) % 3 for a, b in zip(seq, seq[1:])]
        assert steps.count(1) >= 3  # at least three +1 cyclic transitions


class TestEpisodeArgumentGaps:
    def test_synthetic_locked_pair(self):
        t = np.linspace(0, 10, 101)
        R = np.full((101, 3), 0.99)
        R[(t >= 2) & (t <= 8), 0] = 0.05
        args = np.zeros((101, 3))
        args[:, 1] = 0.03
        args[:, 2] = -0.03
        events = detect_switches(t, R, 0.4, 0.9)
        gaps = episode_argument_gaps(t, R, args, events)
        assert len(gaps) == 1
        assert gaps[0] == pytest.approx(0.06, abs=1e-12)

    def test_wraparound_gap(self):
        t = np.linspace(0, 10, 101)
        R = np.full((101, 3), 0.99)
        R[(t >= 2) & (t <= 8), 1] = 0.05
        args = np.zeros((101, 3))
        args[:, 0] = 3.1
        args[:, 2] = -3.1
        events = detect_switches(t, R, 0.4, 0.9)
        gaps = episode_argument_gaps(t, R, args, events)
        assert gaps[0] == pytest.approx(2 * PI - 6.2, abs=1e-12)


class TestResidenceAndScaling:
    def test_residence_times_from_midpoints(self):
        events = [SwitchingEvent(1, 0.0, 10.0), SwitchingEvent(2, 20.0, 30.0),
                  SwitchingEvent(3, 45.0, 55.0)]
        assert np.allclose(residence_times(events), [20.0, 25.0])

    def test_zero_eta_rejected(self):
        with pytest.raises(ValueError):
            transition_scaling(params_n2(), [1e-4, 0.0], 1, seed_base=0)

    def test_insufficient_events_flagged(self):
        res = transition_scaling(params_n2(), [1e-5], repetitions=1, seed_base=3,
                                 T=50.0)
        assert res.points[0].status == "insufficient events"
        assert res.points[0].mean_residence is None
        assert res.r_squared is None

    def test_scaling_monotone_and_loglinear(self):
        res = transition_scaling(params_n2(), [1e-4, 1e-5, 1e-6], repetitions=1,
                                 seed_base=7, T=2000.0)
        means = [p.mean_residence for p in res.points]
        assert all(m is not None for m in means)
        assert means[0] < means[1] < means[2]
        assert res.r_squared > 0.9
