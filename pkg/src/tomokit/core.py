"""Grids, wavefunctions, state presets, density matrices and entropy.

Everything downstream works with uniformly sampled complex amplitudes on a
:class:`SpatialGrid`.  Inner products and norms carry the grid weight ``dx``,
so a normalized :class:`WaveFunction` satisfies ``sum |psi|^2 dx = 1``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidArgumentError, NumericalError, UnsupportedError

__all__ = [
    "SpatialGrid",
    "WaveFunction",
    "DensityMatrix",
    "GaussianPreset",
    "FockPreset",
    "PiecewisePreset",
    "BoundaryLeakWarning",
    "make_grid",
    "default_grid",
    "sample_state",
    "density_matrix",
    "von_neumann_entropy",
    "FOCK_N_MAX",
]

# Highest Fock index the recurrence is validated for.
FOCK_N_MAX = 20

# Relative boundary amplitude above which a sampled state is flagged as
# leaking out of its grid.
_BOUNDARY_LEAK_REL = 1e-8


class BoundaryLeakWarning(UserWarning):
    """A sampled state has non-negligible amplitude at the grid edge."""


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform spatial grid x_k = x_min + k dx, k = 0 .. n_points-1."""

    x_min: float
    dx: float
    n_points: int

    def __post_init__(self):
        if not isinstance(self.n_points, (int, np.integer)) or self.n_points < 2:
            raise InvalidArgumentError("n_points must be an integer >= 2")
        if not (np.isfinite(self.x_min) and np.isfinite(self.dx)):
            raise InvalidArgumentError("grid parameters must be finite")
        if self.dx <= 0:
            raise InvalidArgumentError("dx must be positive")

    @property
    def x_max(self) -> float:
        return self.x_min + self.dx * (self.n_points - 1)

    @cached_property
    def points(self) -> np.ndarray:
        x = self.x_min + self.dx * np.arange(self.n_points)
        x.flags.writeable = False
        return x


def make_grid(x_min: float, x_max: float, n_points: int) -> SpatialGrid:
    """Build the grid covering [x_min, x_max] with n_points samples."""
    if not (np.isfinite(x_min) and np.isfinite(x_max)) or x_max <= x_min:
        raise InvalidArgumentError("need finite x_min < x_max")
    if not isinstance(n_points, (int, np.integer)) or n_points < 2:
        raise InvalidArgumentError("n_points must be an integer >= 2")
    return SpatialGrid(float(x_min), (float(x_max) - float(x_min)) / (n_points - 1), int(n_points))


def default_grid() -> SpatialGrid:
    """The default working window, [-12, 12] with 2048 samples."""
    return make_grid(-12.0, 12.0, 2048)


class WaveFunction:
    """Complex amplitudes on a grid, normalized so sum |psi|^2 dx = 1.

    Parameters
    ----------
    grid : SpatialGrid
    amplitudes : array_like of complex, matching ``grid.n_points``
    normalize : bool
        Rescale to unit norm (default).  When False the input must already
        be normalized to within ``norm_tol``.
    norm_tol : float or None
        Tolerance on ``|sum |psi|^2 dx - 1|`` when ``normalize`` is False.
        ``None`` skips the check (reserved for callers that validated it).
    """

    def __init__(self, grid: SpatialGrid, amplitudes, normalize: bool = True,
                 norm_tol: float | None = 1e-9):
        if not isinstance(grid, SpatialGrid):
            raise InvalidArgumentError("grid must be a SpatialGrid")
        amps = np.asarray(amplitudes, dtype=np.complex128)
        if amps.shape != (grid.n_points,):
            raise InvalidArgumentError(
                f"amplitudes must have shape ({grid.n_points},), got {amps.shape}")
        if not np.all(np.isfinite(amps.view(np.float64))):
            raise InvalidArgumentError("amplitudes must be finite")
        nrm2 = float(np.sum(np.abs(amps) ** 2) * grid.dx)
        if nrm2 <= 0.0:
            raise InvalidArgumentError("amplitudes have zero norm")
        if normalize:
            amps = amps / np.sqrt(nrm2)
        elif norm_tol is not None and abs(nrm2 - 1.0) > norm_tol:
            raise InvalidArgumentError(
                f"amplitudes not normalized: sum |psi|^2 dx = {nrm2!r}")
        else:
            amps = amps.copy()
        amps.flags.writeable = False
        self._grid = grid
        self._amps = amps

    @property
    def grid(self) -> SpatialGrid:
        return self._grid

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amps

    def density(self) -> np.ndarray:
        """Position density |psi(x_k)|^2."""
        return np.abs(self._amps) ** 2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self._amps) ** 2) * self._grid.dx))

    def inner(self, other: "WaveFunction") -> complex:
        """<self|other> with the dx weight."""
        if other._grid != self._grid:
            raise InvalidArgumentError("wavefunctions live on different grids")
        return complex(np.sum(np.conj(self._amps) * other._amps) * self._grid.dx)


@dataclass(frozen=True)
class GaussianPreset:
    """Gaussian packet centered at x0 with mean momentum p0 and position
    spread sigma (so sigma_xx = sigma^2)."""

    x0: float = 0.0
    p0: float = 0.0
    sigma: float = 2.0 ** -0.5

    def __post_init__(self):
        if not (np.isfinite(self.x0) and np.isfinite(self.p0) and np.isfinite(self.sigma)):
            raise InvalidArgumentError("gaussian preset parameters must be finite")
        if self.sigma <= 0:
            raise InvalidArgumentError("sigma must be positive")


@dataclass(frozen=True)
class FockPreset:
    """Harmonic oscillator number state."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 0:
            raise InvalidArgumentError("fock index must be a nonnegative integer")


@dataclass(frozen=True)
class PiecewisePreset:
    """Wraps a reconstruct.PiecewiseState for sampling."""

    state: object


StatePreset = GaussianPreset | FockPreset | PiecewisePreset


def _hermite_functions(n_max: int, x: np.ndarray) -> np.ndarray:
    """Normalized Hermite functions h_0..h_n_max by the stable recurrence."""
    h = np.zeros((n_max + 1, x.size))
    h[0] = np.pi ** -0.25 * np.exp(-0.5 * x ** 2)
    if n_max >= 1:
        h[1] = np.sqrt(2.0) * x * h[0]
    for n in range(2, n_max + 1):
        h[n] = np.sqrt(2.0 / n) * x * h[n - 1] - np.sqrt((n - 1.0) / n) * h[n - 2]
    return h


def _check_boundary(amps: np.ndarray, what: str) -> None:
    peak = np.abs(amps).max()
    edge = max(abs(amps[0]), abs(amps[-1]))
    if peak > 0 and edge > _BOUNDARY_LEAK_REL * peak:
        warnings.warn(
            f"{what}: boundary amplitude {edge/peak:.2e} of peak; "
            "grid may be too narrow", BoundaryLeakWarning, stacklevel=3)


def sample_state(preset: StatePreset, grid: SpatialGrid) -> WaveFunction:
    """Realize a preset on a grid as a normalized WaveFunction.

    Warns with :class:`BoundaryLeakWarning` when the boundary amplitude
    exceeds 1e-8 of the peak.
    """
    x = grid.points
    if isinstance(preset, GaussianPreset):
        s2 = preset.sigma ** 2
        amps = ((2.0 * np.pi * s2) ** -0.25
                * np.exp(-((x - preset.x0) ** 2) / (4.0 * s2) + 1j * preset.p0 * x))
    elif isinstance(preset, FockPreset):
        if preset.n > FOCK_N_MAX:
            raise UnsupportedError(
                f"fock index {preset.n} above validated maximum {FOCK_N_MAX}")
        amps = _hermite_functions(preset.n, x)[preset.n].astype(np.complex128)
    elif isinstance(preset, PiecewisePreset):
        from .reconstruct import assemble_state
        return assemble_state(preset.state, grid)
    else:
        raise InvalidArgumentError(f"unknown state preset {preset!r}")
    _check_boundary(amps, f"sample_state({preset!r})")
    return WaveFunction(grid, amps)


class DensityMatrix:
    """Hermitian unit-trace kernel rho(x_a, x_b) sampled on a grid.

    Trace and inner products carry the dx weight: trace = sum diag * dx.
    """

    def __init__(self, grid: SpatialGrid, entries):
        if not isinstance(grid, SpatialGrid):
            raise InvalidArgumentError("grid must be a SpatialGrid")
        m = np.asarray(entries, dtype=np.complex128)
        n = grid.n_points
        if m.shape != (n, n):
            raise InvalidArgumentError(f"entries must have shape ({n}, {n})")
        herm = np.abs(m - m.conj().T).max()
        if herm > 1e-10:
            raise InvalidArgumentError(f"entries not Hermitian: max deviation {herm:.2e}")
        tr = np.sum(np.diagonal(m)).real * grid.dx
        if abs(tr - 1.0) > 1e-8:
            raise InvalidArgumentError(f"trace {tr!r} differs from 1 beyond 1e-8")
        m.flags.writeable = False
        self._grid = grid
        self._entries = m

    @property
    def grid(self) -> SpatialGrid:
        return self._grid

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    def trace(self) -> float:
        return float(np.sum(np.diagonal(self._entries)).real * self._grid.dx)


def density_matrix(states: list[WaveFunction], weights) -> DensityMatrix:
    """Mixture  rho = sum_j w_j |psi_j><psi_j|  as a DensityMatrix."""
    w = np.asarray(weights, dtype=float)
    if len(states) == 0 or w.shape != (len(states),):
        raise InvalidArgumentError("need one weight per state")
    if np.any(w < 0):
        raise InvalidArgumentError("weights must be nonnegative")
    if abs(w.sum() - 1.0) > 1e-10:
        raise InvalidArgumentError(f"weights sum to {w.sum()!r}, not 1")
    grid = states[0].grid
    for s in states:
        if s.grid != grid:
            raise InvalidArgumentError("all states must share one grid")
    m = np.zeros((grid.n_points, grid.n_points), dtype=np.complex128)
    for wj, s in zip(w, states):
        if wj > 0:
            m += wj * np.outer(s.amplitudes, np.conj(s.amplitudes))
    return DensityMatrix(grid, m)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Entropy -sum lam ln lam over eigenvalues of (entries * dx).

    Eigenvalues in [-1e-8, 0) are clamped to zero; anything lower raises
    :class:`NumericalError`.
    """
    lam = np.linalg.eigvalsh(rho.entries * rho.grid.dx)
    low = lam.min()
    if low < -1e-8:
        raise NumericalError(f"density matrix has eigenvalue {low!r} below -1e-8")
    lam = lam[lam > 0.0]
    if lam.size == 0:
        return 0.0
    return float(-np.sum(lam * np.log(lam)))
