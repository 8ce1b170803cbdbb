"""Quadrature transform, tomogram slices and Gaussian closed forms.

The central object is the two-parameter unitary transform

    (F psi)(X) = (2 pi |nu|)^(-1/2) integral exp(-i X y/nu + i mu y^2/(2 nu)) psi(y) dy

whose squared modulus is the tomographic density of the quadrature
mu*x + nu*p.  The oscillatory kernel is evaluated with a chirp-z transform
directly on the caller's grid, so the discrete sum is exact to rounding; no
intermediate resampling is involved.  For |nu| below ``NU_FLOOR`` the
integral degenerates and the scaling branch
``density(X) = |psi(X/mu)|^2 / |mu|`` applies instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import InterpolatedUnivariateSpline
from scipy.signal import czt

from .core import SpatialGrid, WaveFunction, _check_boundary
from .errors import (
    InvalidArgumentError,
    InvalidCovarianceError,
    ResolutionError,
    ScalingBranchError,
)

__all__ = [
    "NU_FLOOR",
    "TomogramSlice",
    "GaussianState",
    "fractional_transform",
    "tomogram",
    "tomogram_gaussian",
    "fresnel_tomogram",
    "sample_pure_gaussian",
]

# Below this |nu| the oscillatory kernel is numerically meaningless and the
# scaling branch of the tomogram applies.
NU_FLOOR = 1e-6

# Amplitudes below this fraction of the peak do not count toward the
# effective support used in resolution checks.
_SUPPORT_REL = 1e-12


class TomogramSlice:
    """Tomographic density of the quadrature mu*x + nu*p on a grid.

    Invariants: (mu, nu) != (0, 0); density >= 0; sum(density) dx = 1
    within 1e-6 (pass renormalize=True to rescale data that is known good
    to a looser tolerance).
    """

    def __init__(self, mu: float, nu: float, grid: SpatialGrid, density,
                 renormalize: bool = False):
        mu, nu = float(mu), float(nu)
        if not (np.isfinite(mu) and np.isfinite(nu)):
            raise InvalidArgumentError("direction components must be finite")
        if mu == 0.0 and nu == 0.0:
            raise InvalidArgumentError("direction (0, 0) is not a measurement")
        if not isinstance(grid, SpatialGrid):
            raise InvalidArgumentError("grid must be a SpatialGrid")
        d = np.asarray(density, dtype=float)
        if d.shape != (grid.n_points,):
            raise InvalidArgumentError(
                f"density must have shape ({grid.n_points},), got {d.shape}")
        if not np.all(np.isfinite(d)):
            raise InvalidArgumentError("density must be finite")
        peak = d.max() if d.size else 0.0
        if peak <= 0.0:
            raise InvalidArgumentError("density must be positive somewhere")
        if d.min() < -1e-9 * peak:
            raise InvalidArgumentError(
                f"density has negative values down to {d.min()!r}")
        d = np.where(d < 0.0, 0.0, d)
        integral = float(d.sum() * grid.dx)
        if renormalize:
            d = d / integral
        elif abs(integral - 1.0) > 1e-6:
            raise InvalidArgumentError(
                f"density integrates to {integral!r}, off 1 beyond 1e-6")
        d.flags.writeable = False
        self.mu = mu
        self.nu = nu
        self._grid = grid
        self._density = d

    @property
    def grid(self) -> SpatialGrid:
        return self._grid

    @property
    def density(self) -> np.ndarray:
        return self._density

    @property
    def r(self) -> float:
        """Direction magnitude sqrt(mu^2 + nu^2)."""
        return float(np.hypot(self.mu, self.nu))

    @property
    def theta(self) -> float:
        """Direction angle atan2(nu, mu) in (-pi, pi]."""
        return float(np.arctan2(self.nu, self.mu))


@dataclass(frozen=True)
class GaussianState:
    """Zero-mean Gaussian state given by its covariances.

    The uncertainty bound sigma_xx*sigma_pp - sigma_xp^2 >= 1/4 is enforced
    at construction (with 1e-10 slack for roundoff).
    """

    sigma_xx: float
    sigma_pp: float
    sigma_xp: float = 0.0

    def __post_init__(self):
        for v in (self.sigma_xx, self.sigma_pp, self.sigma_xp):
            if not np.isfinite(v):
                raise InvalidCovarianceError("covariances must be finite")
        if self.sigma_xx <= 0 or self.sigma_pp <= 0:
            raise InvalidCovarianceError("diagonal covariances must be positive")
        if self.determinant < 0.25 - 1e-10:
            raise InvalidCovarianceError(
                f"covariance determinant {self.determinant!r} violates the "
                "uncertainty bound 1/4")

    @property
    def determinant(self) -> float:
        return self.sigma_xx * self.sigma_pp - self.sigma_xp ** 2


def _effective_support(values: np.ndarray, y: np.ndarray) -> float:
    """Largest |y| carrying amplitude above 1e-12 of the peak."""
    mag = np.abs(values)
    idx = np.nonzero(mag > _SUPPORT_REL * mag.max())[0]
    return float(np.abs(y[idx]).max())


def _check_kernel_resolution(values, grid: SpatialGrid, mu: float, nu: float,
                             out_grid: SpatialGrid) -> None:
    """Require the chirp kernel to be Nyquist-resolvable over the support."""
    y_eff = _effective_support(values, grid.points)
    x_abs = max(abs(out_grid.x_min), abs(out_grid.x_max))
    rate = (abs(mu) * y_eff + x_abs) / abs(nu)
    nyquist = np.pi / grid.dx
    if rate > nyquist:
        need = int(np.ceil(grid.n_points * rate / nyquist))
        raise ResolutionError(
            f"kernel at (mu={mu!r}, nu={nu!r}) oscillates at {rate:.1f} rad "
            f"per unit, above the grid Nyquist {nyquist:.1f}; "
            f"suggest n_points >= {need}")


def _transform_samples(values: np.ndarray, grid: SpatialGrid, mu: float,
                       nu: float, out_grid: SpatialGrid) -> np.ndarray:
    """Discrete transform of raw samples; no normalization checks.

    Evaluates dy * sum_n values_n exp(i mu y_n^2/(2 nu) - i x_k y_n/nu)
    divided by sqrt(2 pi |nu|) on the output grid via Bluestein's algorithm.
    """
    y0, dy = grid.x_min, grid.dx
    x = out_grid.points
    chirped = values * np.exp(1j * mu * grid.points ** 2 / (2.0 * nu))
    a = np.exp(1j * dy * out_grid.x_min / nu)
    w = np.exp(-1j * dy * out_grid.dx / nu)
    spec = czt(chirped, m=out_grid.n_points, w=w, a=a)
    spec = spec * np.exp(-1j * x * y0 / nu)
    return spec * (dy / np.sqrt(2.0 * np.pi * abs(nu)))


def fractional_transform(psi: WaveFunction, mu: float, nu: float) -> WaveFunction:
    """Apply the quadrature transform, returning the transformed state.

    The output lives on the input grid.  Unitarity is verified: if the
    discrete norm moves off 1 by more than 1e-8 the output grid failed to
    contain the transformed state and a ResolutionError is raised.

    Parameters
    ----------
    psi : WaveFunction
    mu, nu : float
        Quadrature direction; |nu| must be at least NU_FLOOR, otherwise a
        ScalingBranchError points the caller at :func:`tomogram`.
    """
    mu, nu = float(mu), float(nu)
    if not (np.isfinite(mu) and np.isfinite(nu)):
        raise InvalidArgumentError("mu and nu must be finite")
    if abs(nu) < NU_FLOOR:
        raise ScalingBranchError(
            f"|nu| = {abs(nu)!r} below {NU_FLOOR}; the transform degenerates, "
            "use tomogram() which handles this via the scaling branch")
    grid = psi.grid
    _check_kernel_resolution(psi.amplitudes, grid, mu, nu, grid)
    out = _transform_samples(psi.amplitudes, grid, mu, nu, grid)
    nrm = float(np.sqrt(np.sum(np.abs(out) ** 2) * grid.dx))
    if abs(nrm - 1.0) > 1e-8:
        raise ResolutionError(
            f"transform norm {nrm!r} off 1 beyond 1e-8; output grid cannot "
            f"contain the transformed state, suggest n_points >= "
            f"{2 * grid.n_points} with a wider extent")
    return WaveFunction(grid, out, normalize=False, norm_tol=None)


def _scaled_density(psi: WaveFunction, mu: float) -> np.ndarray:
    """Scaling-branch density |psi(X/mu)|^2 / |mu| on psi's grid."""
    x = psi.grid.points
    dens = psi.density()
    if mu == 1.0:
        return dens.copy()
    spline = InterpolatedUnivariateSpline(x, dens, k=3, ext="zeros")
    out = spline(x / mu) / abs(mu)
    return np.where(out < 0.0, 0.0, out)


def tomogram(psi: WaveFunction, mu: float, nu: float) -> TomogramSlice:
    """Tomographic density of mu*x + nu*p for a pure state.

    For |nu| >= NU_FLOOR this is |F psi|^2 with the quadrature transform F;
    below the floor the scaling branch |psi(X/mu)|^2/|mu| is used.
    """
    mu, nu = float(mu), float(nu)
    if not (np.isfinite(mu) and np.isfinite(nu)):
        raise InvalidArgumentError("mu and nu must be finite")
    if abs(mu) < NU_FLOOR and abs(nu) < NU_FLOOR:
        raise InvalidArgumentError(
            f"direction ({mu!r}, {nu!r}) too close to (0, 0)")
    grid = psi.grid
    if abs(nu) >= NU_FLOOR:
        f = fractional_transform(psi, mu, nu)
        density = f.density()
    else:
        density = _scaled_density(psi, mu)
        integral = float(density.sum() * grid.dx)
        if abs(integral - 1.0) > 1e-6:
            raise ResolutionError(
                f"scaled density integrates to {integral!r}; grid cannot "
                f"contain the support stretched by mu = {mu!r}")
    return TomogramSlice(mu, nu, grid, density)


def tomogram_gaussian(state: GaussianState, mu: float, nu: float,
                      grid: SpatialGrid) -> TomogramSlice:
    """Closed-form Gaussian tomogram with variance
    v = sigma_xx mu^2 + 2 sigma_xp mu nu + sigma_pp nu^2."""
    mu, nu = float(mu), float(nu)
    if not (np.isfinite(mu) and np.isfinite(nu)):
        raise InvalidArgumentError("mu and nu must be finite")
    if mu == 0.0 and nu == 0.0:
        raise InvalidArgumentError("direction (0, 0) is not a measurement")
    v = (state.sigma_xx * mu ** 2 + 2.0 * state.sigma_xp * mu * nu
         + state.sigma_pp * nu ** 2)
    if v <= 0.0:
        raise InvalidCovarianceError(
            f"quadrature variance {v!r} not positive at ({mu!r}, {nu!r})")
    x = grid.points
    density = np.exp(-x ** 2 / (2.0 * v)) / np.sqrt(2.0 * np.pi * v)
    integral = float(density.sum() * grid.dx)
    if abs(integral - 1.0) > 1e-6:
        raise ResolutionError(
            f"Gaussian slice with variance {v!r} integrates to {integral!r} "
            "on this grid; widen the extent")
    return TomogramSlice(mu, nu, grid, density)


def fresnel_tomogram(psi0: WaveFunction, nu: float) -> TomogramSlice:
    """Free-particle tomogram by direct Fresnel quadrature.

    Propagates psi0 through the Fresnel kernel
    (2 pi i nu)^(-1/2) exp(i (X-Y)^2 / (2 nu)) by explicit O(N^2) summation
    and squares the result.  The slice is labeled (1, nu): it equals the
    initial-state tomogram in that direction and the position density after
    free flight for time nu.
    """
    nu = float(nu)
    if nu == 0.0 or not np.isfinite(nu):
        raise InvalidArgumentError("nu must be finite and nonzero")
    grid = psi0.grid
    x = grid.points
    weighted = psi0.amplitudes * grid.dx
    pref = 1.0 / (2.0 * np.pi * abs(nu))
    density = np.empty(grid.n_points)
    block = 256
    for lo in range(0, grid.n_points, block):
        xb = x[lo:lo + block, None]
        kernel = np.exp(1j * (xb - x[None, :]) ** 2 / (2.0 * nu))
        density[lo:lo + block] = pref * np.abs(kernel @ weighted) ** 2
    integral = float(density.sum() * grid.dx)
    if abs(integral - 1.0) > 1e-6:
        raise ResolutionError(
            f"Fresnel slice at nu = {nu!r} integrates to {integral!r}; the "
            "spread state leaks off the grid, widen the extent")
    return TomogramSlice(1.0, nu, grid, density)


def sample_pure_gaussian(state: GaussianState, grid: SpatialGrid) -> WaveFunction:
    """Realize a pure Gaussian state (determinant exactly 1/4) on a grid.

    The wavefunction exp(-(alpha + i beta) x^2 / 2) with alpha = 1/(2 sigma_xx)
    and beta = -sigma_xp/sigma_xx reproduces all three covariances.
    """
    if abs(state.determinant - 0.25) > 1e-8:
        raise InvalidArgumentError(
            f"determinant {state.determinant!r} != 1/4: not a pure state")
    alpha = 1.0 / (2.0 * state.sigma_xx)
    beta = -state.sigma_xp / state.sigma_xx
    x = grid.points
    amps = np.exp(-0.5 * (alpha + 1j * beta) * x ** 2)
    _check_boundary(amps, f"sample_pure_gaussian({state!r})")
    return WaveFunction(grid, amps)
