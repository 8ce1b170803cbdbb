import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid

from tomokit import core, dynamics, transform
from tomokit.errors import (
    InvalidArgumentError,
    OutOfRangeError,
    ResolutionError,
    StepSizeError,
)
from tomokit.dynamics import OscillatorSpec, PositionHistory

import oracles


def make_spec(omega=1.0, force=0.0, t_max=2.0, dt=1e-3):
    return OscillatorSpec(dynamics.constant_rate(omega),
                          dynamics.constant_rate(force), t_max, dt)


# ---------------------------------------------------------------- presets


def test_rate_presets_evaluate():
    assert dynamics.constant_rate(2.0)(17.0) == 2.0
    assert dynamics.linear_ramp(1.0, 0.5)(2.0) == pytest.approx(2.0)
    assert dynamics.cosine_modulated(1.0, 0.2, 3.0)(0.0) == pytest.approx(1.2)


def test_rate_preset_lookup():
    f = dynamics.rate_preset("linear-ramp", [0.5, 2.0])
    assert f(1.0) == pytest.approx(2.5)
    with pytest.raises(InvalidArgumentError, match="unknown preset"):
        dynamics.rate_preset("exponential", [1.0])
    with pytest.raises(InvalidArgumentError, match="parameter"):
        dynamics.rate_preset("constant", [1.0, 2.0])


@pytest.mark.parametrize("kwargs", [
    dict(t_max=0.0), dict(t_max=np.inf), dict(dt=-1.0), dict(dt=3.0),
])
def test_oscillator_spec_rejects_bad_stepping(kwargs):
    with pytest.raises(InvalidArgumentError):
        make_spec(**kwargs)


def test_oscillator_spec_requires_callables():
    with pytest.raises(InvalidArgumentError):
        OscillatorSpec(1.0, dynamics.constant_rate(0.0), 1.0, 1e-3)


# ---------------------------------------------------------------- integrator


def test_constant_frequency_solution_is_exponential():
    traj = dynamics.solve_epsilon_delta(make_spec())
    want = np.exp(1j * traj.times)
    assert np.max(np.abs(traj.epsilon - want)) < 1e-10
    assert np.max(np.abs(traj.epsilon_dot - 1j * want)) < 1e-10
    assert np.max(np.abs(traj.delta)) == 0.0
    assert np.max(np.abs(traj.wronskian() - 1.0)) < 1e-12


def test_final_step_lands_on_t_max():
    traj = dynamics.solve_epsilon_delta(make_spec(t_max=1.0005, dt=1e-3))
    assert traj.times[-1] == 1.0005
    assert np.max(np.abs(traj.epsilon - np.exp(1j * traj.times))) < 1e-10


def test_constant_force_closed_form():
    # delta(t) = -(c/sqrt(2)) (e^{it} - 1) for omega = 1, force = c
    c = 0.3
    traj = dynamics.solve_epsilon_delta(make_spec(force=c, t_max=np.pi))
    want = -(c / np.sqrt(2.0)) * (np.exp(1j * traj.times) - 1.0)
    assert np.max(np.abs(traj.delta - want)) < 1e-10
    assert abs(traj.at(np.pi)[2] - np.sqrt(2.0) * c) < 1e-10


def test_trajectory_interpolates_between_steps():
    traj = dynamics.solve_epsilon_delta(make_spec(dt=1e-2))
    t = 0.7351
    eps, epsd, _ = traj.at(t)
    assert abs(eps - np.exp(1j * t)) < 1e-8
    assert abs(epsd - 1j * np.exp(1j * t)) < 1e-8


def test_trajectory_range_checked():
    traj = dynamics.solve_epsilon_delta(make_spec(t_max=1.0))
    with pytest.raises(OutOfRangeError):
        traj.at(1.1)
    with pytest.raises(OutOfRangeError):
        traj.at(-0.1)


def test_coarse_step_raises():
    with pytest.raises(StepSizeError, match="reduce dt"):
        dynamics.solve_epsilon_delta(make_spec(omega=5.0, t_max=4.0, dt=0.5))


def test_trajectory_rejects_wrong_start():
    t = np.array([0.0, 1.0])
    with pytest.raises(InvalidArgumentError):
        dynamics.OscillatorTrajectory(t, [2.0, 1.0], [1j, 1j], [0.0, 0.0])


# ---------------------------------------------------------------- propagators


def test_free_flight_spreads_vacuum(grid, vacuum):
    t = 1.5
    out = dynamics.free_propagate(vacuum, t)
    var = float(np.sum(grid.points ** 2 * out.density()) * grid.dx)
    assert abs(var - 0.5 * (1.0 + t ** 2)) < 1e-8
    assert dynamics.free_propagate(vacuum, 0.0) is vacuum


def test_free_flight_composes():
    g = core.make_grid(-16.0, 16.0, 2048)
    psi = core.sample_state(core.GaussianPreset(), g)
    one = dynamics.free_propagate(dynamics.free_propagate(psi, 0.4), 0.6)
    two = dynamics.free_propagate(psi, 1.0)
    assert np.max(np.abs(one.amplitudes - two.amplitudes)) < 1e-12


def test_free_flight_detects_edge_leak(grid):
    kicked = core.sample_state(core.GaussianPreset(p0=8.0), grid)
    with pytest.raises(ResolutionError, match="widen the extent"):
        dynamics.free_propagate(kicked, 1.2)


def test_harmonic_propagate_matches_split_step_oracle(grid):
    psi = core.sample_state(core.GaussianPreset(x0=1.0), grid)
    got = dynamics.harmonic_propagate(psi, 0.7, 1.3, dt_target=2e-3)
    want = oracles.split_step_kinetic_first(psi.amplitudes, grid.points,
                                            0.7, 1.3, 2000)
    assert np.max(np.abs(got.amplitudes - want)) < 1e-5


def test_harmonic_coherent_center_oscillates(grid):
    psi = core.sample_state(core.GaussianPreset(x0=1.0), grid)
    for t in (np.pi / 2, np.pi):
        ev = dynamics.harmonic_propagate(psi, t)
        mean = float(np.sum(grid.points * ev.density()) * grid.dx)
        assert abs(mean - np.cos(t)) < 1e-5


def test_harmonic_full_period_fidelity(grid):
    psi = core.sample_state(core.GaussianPreset(x0=1.0), grid)
    ev = dynamics.harmonic_propagate(psi, 2.0 * np.pi)
    fid = abs(np.sum(np.conj(ev.amplitudes) * psi.amplitudes) * grid.dx)
    assert fid > 1.0 - 1e-10


# ---------------------------------------------------------------- histories


def test_position_history_validates(grid, vacuum):
    pos = transform.tomogram(vacuum, 1.0, 0.0)
    mom = transform.tomogram(vacuum, 0.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        PositionHistory([0.0, 1.0], [pos])
    with pytest.raises(InvalidArgumentError):
        PositionHistory([0.0, 0.0], [pos, pos])
    with pytest.raises(InvalidArgumentError):
        PositionHistory([0.0, 1.0], [pos, mom])


def test_position_history_interpolates(vacuum):
    times = np.linspace(0.0, 1.0, 21)
    hist = dynamics.free_position_history(vacuum, times)
    t = 0.475
    direct = dynamics.free_propagate(vacuum, t).density()
    assert np.max(np.abs(hist.density_at(t) - direct)) < 1e-6
    with pytest.raises(OutOfRangeError):
        hist.density_at(1.5)


def test_free_history_recovers_initial_tomogram(vacuum):
    hist = dynamics.free_position_history(vacuum, np.linspace(0.0, 1.0, 21))
    for mu, nu in [(1.0, 0.5), (2.0, 1.0)]:
        rec = dynamics.initial_tomogram_from_position_history(hist, mu, nu)
        ref = transform.tomogram(vacuum, mu, nu)
        assert np.max(np.abs(rec.density - ref.density)) < 1e-8


def test_free_history_rejects_pure_momentum(vacuum):
    hist = dynamics.free_position_history(vacuum, [0.0, 0.5])
    with pytest.raises(InvalidArgumentError):
        dynamics.initial_tomogram_from_position_history(hist, 0.0, 1.0)


def test_oscillator_recovery_at_time_zero_is_exact(grid):
    psi = core.sample_state(core.GaussianPreset(x0=1.0), grid)
    hist = dynamics.harmonic_position_history(psi, np.linspace(0.0, 1.2, 25))
    traj = dynamics.solve_epsilon_delta(make_spec(t_max=1.2))
    rec = dynamics.initial_tomogram_from_oscillator(hist, traj, 0.0)
    assert rec.mu == 1.0
    assert rec.nu == 0.0
    assert np.max(np.abs(rec.density - hist.slices[0].density)) < 1e-12


def test_oscillator_recovery_matches_direct_tomogram(grid):
    psi = core.sample_state(core.GaussianPreset(x0=1.0), grid)
    hist = dynamics.harmonic_position_history(psi, np.linspace(0.0, 1.2, 25))
    traj = dynamics.solve_epsilon_delta(make_spec(t_max=1.2))
    rec = dynamics.initial_tomogram_from_oscillator(hist, traj, 1.0)
    assert rec.mu == pytest.approx(np.cos(1.0), abs=1e-12)
    assert rec.nu == pytest.approx(np.sin(1.0), abs=1e-12)
    ref = transform.tomogram(psi, np.cos(1.0), np.sin(1.0))
    assert np.max(np.abs(rec.density - ref.density)) < 5e-4


def test_evolve_distribution_free_flight(grid, vacuum):
    spec = OscillatorSpec(dynamics.constant_rate(0.0),
                          dynamics.constant_rate(0.0), 2.0, 1e-3)
    traj = dynamics.solve_epsilon_delta(spec)

    def initial(X, mu, nu):
        s = transform.tomogram(vacuum, mu, nu)
        cdf = cumulative_trapezoid(s.density, grid.points, initial=0.0)
        return float(np.interp(X, grid.points, cdf))

    t, mu, nu = 0.8, 1.0, 0.3
    later = transform.tomogram(dynamics.free_propagate(vacuum, t), mu, nu)
    cdf_t = cumulative_trapezoid(later.density, grid.points, initial=0.0)
    for X in (-1.0, 0.0, 0.7, 2.0):
        got = dynamics.evolve_distribution(initial, traj, t, X, mu, nu)
        assert abs(got - float(np.interp(X, grid.points, cdf_t))) < 1e-8


def test_evolve_distribution_rejects_null_direction(vacuum):
    traj = dynamics.solve_epsilon_delta(make_spec())
    with pytest.raises(InvalidArgumentError):
        dynamics.evolve_distribution(lambda X, m, n: 0.0, traj, 1.0, 0.0,
                                     0.0, 0.0)
