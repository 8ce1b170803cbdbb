import numpy as np
import pytest
from scipy.interpolate import InterpolatedUnivariateSpline

from tomokit import core
from tomokit.errors import InvalidArgumentError, UnsupportedError

import oracles


def test_grid_points_and_spacing():
    g = core.make_grid(-3.0, 3.0, 7)
    assert g.points[0] == -3.0
    assert g.points[-1] == 3.0
    assert g.dx == pytest.approx(1.0)
    assert g.x_max == pytest.approx(3.0)
    assert g.n_points == 7


def test_default_grid_shape():
    g = core.default_grid()
    assert g.n_points == 2048
    assert g.points[0] == -12.0
    assert g.x_max == pytest.approx(12.0)


def test_grid_points_read_only():
    g = core.make_grid(-1.0, 1.0, 5)
    with pytest.raises(ValueError):
        g.points[0] = 99.0


@pytest.mark.parametrize("args", [(-1.0, 1.0, 1), (1.0, -1.0, 8), (0.0, 0.0, 8)])
def test_make_grid_rejects_bad_arguments(args):
    with pytest.raises(InvalidArgumentError):
        core.make_grid(*args)


def test_wavefunction_normalizes(grid):
    psi = core.WaveFunction(grid, np.exp(-grid.points ** 2))
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)


def test_wavefunction_verify_mode_rejects_unnormalized(grid):
    with pytest.raises(InvalidArgumentError):
        core.WaveFunction(grid, np.exp(-grid.points ** 2), normalize=False)


def test_wavefunction_amplitudes_read_only(vacuum):
    with pytest.raises(ValueError):
        vacuum.amplitudes[0] = 1.0


def test_wavefunction_zero_amplitudes_rejected(grid):
    with pytest.raises(InvalidArgumentError):
        core.WaveFunction(grid, np.zeros(grid.n_points))


def test_inner_product_conjugate_symmetry(grid):
    rng = np.random.default_rng(3)
    a = core.WaveFunction(grid, rng.standard_normal(grid.n_points)
                          + 1j * rng.standard_normal(grid.n_points))
    b = core.WaveFunction(grid, rng.standard_normal(grid.n_points)
                          + 1j * rng.standard_normal(grid.n_points))
    assert a.inner(b) == pytest.approx(np.conj(b.inner(a)), abs=1e-12)


def test_inner_product_grid_mismatch(vacuum, small_grid):
    other = core.sample_state(core.GaussianPreset(), small_grid)
    with pytest.raises(InvalidArgumentError):
        vacuum.inner(other)


def test_vacuum_peak_density(vacuum):
    """The even default grid has no sample at x = 0, so interpolate."""
    x = vacuum.grid.points
    spline = InterpolatedUnivariateSpline(x, vacuum.density(), k=3)
    assert abs(float(spline(0.0)) - 1.0 / np.sqrt(np.pi)) < 1e-6


def test_gaussian_preset_center_and_momentum(grid):
    psi = core.sample_state(core.GaussianPreset(x0=1.5, p0=-0.7), grid)
    x = grid.points
    mean_x = float(np.sum(x * psi.density()) * grid.dx)
    k = 2.0 * np.pi * np.fft.fftfreq(grid.n_points, grid.dx)
    spectrum = np.abs(np.fft.fft(psi.amplitudes)) ** 2
    mean_p = float(np.sum(k * spectrum) / np.sum(spectrum))
    assert mean_x == pytest.approx(1.5, abs=1e-9)
    assert mean_p == pytest.approx(-0.7, abs=1e-9)


def test_gaussian_preset_rejects_bad_sigma():
    with pytest.raises(InvalidArgumentError):
        core.GaussianPreset(sigma=0.0)


def test_fock_orthonormality(grid):
    states = [core.sample_state(core.FockPreset(n), grid) for n in range(6)]
    gram = np.array([[a.inner(b) for b in states] for a in states])
    assert np.max(np.abs(gram - np.eye(6))) < 1e-10


def test_fock_matches_hermite_oracle(grid):
    psi = core.sample_state(core.FockPreset(3), grid)
    ref = oracles.hermite_psi(3, grid.points)
    assert np.max(np.abs(psi.amplitudes - ref)) < 1e-12


def test_fock_cutoff_enforced(grid):
    core.sample_state(core.FockPreset(core.FOCK_N_MAX), grid)
    with pytest.raises(UnsupportedError):
        core.sample_state(core.FockPreset(core.FOCK_N_MAX + 1), grid)


def test_fock_preset_rejects_negative_index():
    with pytest.raises(InvalidArgumentError):
        core.FockPreset(-1)


def test_boundary_leak_warning(grid):
    with pytest.warns(core.BoundaryLeakWarning):
        core.sample_state(core.GaussianPreset(sigma=6.0), grid)


def test_piecewise_preset_samples_assembled_state(grid):
    from tomokit import reconstruct

    x = grid.points
    mags = [np.where(x <= 0, np.exp(-(x + 2.5) ** 2 / 0.3), 0.0),
            np.where(x > 0, np.exp(-(x - 2.5) ** 2 / 0.3), 0.0)]
    state = reconstruct.PiecewiseState([0.0], mags, [0.0, 1.0], grid)
    psi = core.sample_state(core.PiecewisePreset(state), grid)
    ref = reconstruct.assemble_state(state, grid)
    assert np.max(np.abs(psi.amplitudes - ref.amplitudes)) < 1e-12


def test_unknown_preset_rejected(grid):
    with pytest.raises(InvalidArgumentError):
        core.sample_state("squeezed", grid)


def test_density_matrix_mixture_properties(small_grid):
    f0 = core.sample_state(core.FockPreset(0), small_grid)
    f1 = core.sample_state(core.FockPreset(1), small_grid)
    rho = core.density_matrix([f0, f1], [0.25, 0.75])
    assert rho.trace() == pytest.approx(1.0, abs=1e-10)
    assert np.max(np.abs(rho.entries - rho.entries.conj().T)) < 1e-12


@pytest.mark.parametrize("weights", [[0.5], [-0.1, 1.1], [0.4, 0.4]])
def test_density_matrix_rejects_bad_weights(small_grid, weights):
    f0 = core.sample_state(core.FockPreset(0), small_grid)
    f1 = core.sample_state(core.FockPreset(1), small_grid)
    with pytest.raises(InvalidArgumentError):
        core.density_matrix([f0, f1], weights)


def test_density_matrix_rejects_grid_mix(small_grid, vacuum):
    other = core.sample_state(core.FockPreset(0), small_grid)
    with pytest.raises(InvalidArgumentError):
        core.density_matrix([vacuum, other], [0.5, 0.5])


def test_entropy_pure_state(small_grid):
    f0 = core.sample_state(core.FockPreset(0), small_grid)
    rho = core.density_matrix([f0], [1.0])
    assert abs(core.von_neumann_entropy(rho)) < 1e-8


def test_entropy_orthogonal_mixture(small_grid):
    f0 = core.sample_state(core.FockPreset(0), small_grid)
    f1 = core.sample_state(core.FockPreset(1), small_grid)
    rho = core.density_matrix([f0, f1], [0.5, 0.5])
    assert core.von_neumann_entropy(rho) == pytest.approx(np.log(2.0), abs=1e-10)


def test_entropy_nonorthogonal_mixture_oracle(small_grid):
    a = core.sample_state(core.GaussianPreset(x0=0.0), small_grid)
    b = core.sample_state(core.GaussianPreset(x0=1.0), small_grid)
    rho = core.density_matrix([a, b], [0.6, 0.4])
    ref = oracles.mixture_entropy_two(0.6, 0.4, a.inner(b))
    assert core.von_neumann_entropy(rho) == pytest.approx(ref, abs=1e-8)
