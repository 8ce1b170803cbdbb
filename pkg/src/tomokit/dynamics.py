"""Free flight, harmonic evolution and tomogram transport.

Two complementary views are implemented.  The wavefunction view propagates
amplitudes directly (spectral free flight, split-step harmonic evolution).
The tomographic view never touches amplitudes: a classical trajectory pair
(epsilon, delta) solved from

    epsilon'' + omega(t)^2 epsilon = 0,   epsilon(0) = 1, epsilon'(0) = i
    delta'    = -(i/sqrt 2) epsilon f(t), delta(0) = 0

carries the cumulative quadrature distribution along characteristics, and a
position history recorded over time yields initial-state tomograms in
directions the trajectory visited.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import InterpolatedUnivariateSpline, make_interp_spline

from .core import SpatialGrid, WaveFunction
from .errors import (
    DegenerateDirectionError,
    InvalidArgumentError,
    OutOfRangeError,
    ResolutionError,
    StepSizeError,
)
from .transform import TomogramSlice, tomogram

__all__ = [
    "OscillatorSpec",
    "OscillatorTrajectory",
    "PositionHistory",
    "constant_rate",
    "linear_ramp",
    "cosine_modulated",
    "rate_preset",
    "free_propagate",
    "harmonic_propagate",
    "free_position_history",
    "harmonic_position_history",
    "initial_tomogram_from_position_history",
    "solve_epsilon_delta",
    "evolve_distribution",
    "initial_tomogram_from_oscillator",
]

# Relative edge amplitude above which a propagated state is considered to
# have wrapped around the periodic grid.
_EDGE_LEAK_REL = 1e-4

# Wronskian drift at which fixed-step integration is rejected.
_WRONSKIAN_RAISE = 1e-6


def constant_rate(value: float) -> Callable[[float], float]:
    """Preset: t -> value."""
    value = float(value)
    return lambda t: value


def linear_ramp(start: float, slope: float) -> Callable[[float], float]:
    """Preset: t -> start + slope * t."""
    start, slope = float(start), float(slope)
    return lambda t: start + slope * t


def cosine_modulated(base: float, depth: float, rate: float) -> Callable[[float], float]:
    """Preset: t -> base * (1 + depth * cos(rate * t))."""
    base, depth, rate = float(base), float(depth), float(rate)
    return lambda t: base * (1.0 + depth * np.cos(rate * t))


_PRESETS = {
    "constant": (constant_rate, 1),
    "linear-ramp": (linear_ramp, 2),
    "cosine-modulated": (cosine_modulated, 3),
}


def rate_preset(name: str, params: Sequence[float]) -> Callable[[float], float]:
    """Look up a named rate preset (constant, linear-ramp, cosine-modulated)."""
    if name not in _PRESETS:
        raise InvalidArgumentError(
            f"unknown preset {name!r}; choose from {sorted(_PRESETS)}")
    factory, arity = _PRESETS[name]
    if len(params) != arity:
        raise InvalidArgumentError(
            f"preset {name!r} takes {arity} parameter(s), got {len(params)}")
    return factory(*params)


@dataclass(frozen=True)
class OscillatorSpec:
    """Time-dependent oscillator omega(t) with linear drive f(t).

    ``omega`` and ``force`` are callables of time; use the preset factories
    for the named shapes.  Integration runs over [0, t_max] with fixed step
    ``dt`` (the final step may be shorter to land exactly on t_max).
    """

    omega: Callable[[float], float]
    force: Callable[[float], float]
    t_max: float
    dt: float

    def __post_init__(self):
        if not callable(self.omega) or not callable(self.force):
            raise InvalidArgumentError("omega and force must be callables of t")
        if not np.isfinite(self.t_max) or self.t_max <= 0:
            raise InvalidArgumentError("t_max must be finite and positive")
        if not np.isfinite(self.dt) or self.dt <= 0:
            raise InvalidArgumentError("dt must be finite and positive")
        if self.dt > self.t_max:
            raise InvalidArgumentError("dt must not exceed t_max")


class OscillatorTrajectory:
    """Sampled (epsilon, epsilon', delta) with cubic interpolation in t."""

    def __init__(self, times, epsilon, epsilon_dot, delta):
        t = np.asarray(times, dtype=float)
        eps = np.asarray(epsilon, dtype=complex)
        epsd = np.asarray(epsilon_dot, dtype=complex)
        dlt = np.asarray(delta, dtype=complex)
        if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
            raise InvalidArgumentError("times must be strictly increasing, >= 2 samples")
        for arr in (eps, epsd, dlt):
            if arr.shape != t.shape:
                raise InvalidArgumentError("trajectory arrays must match times")
        if abs(eps[0] - 1.0) > 1e-12 or abs(epsd[0] - 1j) > 1e-12 or abs(dlt[0]) > 1e-12:
            raise InvalidArgumentError(
                "trajectory must start from epsilon=1, epsilon'=i, delta=0")
        self.times = t
        self.epsilon = eps
        self.epsilon_dot = epsd
        self.delta = dlt
        k = min(3, t.size - 1)
        self._interp = [make_interp_spline(t, arr, k=k)
                        for arr in (eps, epsd, dlt)]

    def wronskian(self) -> np.ndarray:
        """Im(conj(epsilon) epsilon') at the sample times; identically 1 in
        exact arithmetic."""
        return np.imag(np.conj(self.epsilon) * self.epsilon_dot)

    def at(self, t: float) -> tuple[complex, complex, complex]:
        """Interpolated (epsilon, epsilon', delta) at time t."""
        t = float(t)
        lo, hi = self.times[0], self.times[-1]
        if t < lo - 1e-12 or t > hi + 1e-12:
            raise OutOfRangeError(
                f"t = {t!r} outside trajectory range [{lo!r}, {hi!r}]")
        t = min(max(t, lo), hi)
        return tuple(complex(f(t)) for f in self._interp)


def solve_epsilon_delta(spec: OscillatorSpec) -> OscillatorTrajectory:
    """Integrate the classical pair with fixed-step RK4.

    The Wronskian Im(conj(epsilon) epsilon') is monitored after every step;
    drift beyond 1e-6 raises StepSizeError naming the failing time.
    """

    def rhs(t, y):
        w = float(spec.omega(t))
        f = float(spec.force(t))
        if not (np.isfinite(w) and np.isfinite(f)):
            raise InvalidArgumentError(f"omega/force not finite at t = {t!r}")
        return np.array([y[1], -(w * w) * y[0], -1j / np.sqrt(2.0) * y[0] * f],
                        dtype=complex)

    ratio = spec.t_max / spec.dt
    n_full = int(round(ratio))
    if abs(ratio - n_full) > 1e-9 or n_full == 0:
        n_full = int(np.floor(ratio))
    times = [0.0]
    remainder = spec.t_max - n_full * spec.dt
    steps = [spec.dt] * n_full
    if remainder > 1e-12 * max(1.0, spec.t_max):
        steps.append(remainder)

    y = np.array([1.0, 1.0j, 0.0], dtype=complex)
    ys = [y]
    t = 0.0
    for h in steps:
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t + h
        w = float(np.imag(np.conj(y[0]) * y[1]))
        if abs(w - 1.0) > _WRONSKIAN_RAISE:
            raise StepSizeError(
                f"Wronskian drifted to {w!r} at t = {t!r}; reduce dt")
        times.append(t)
        ys.append(y)
    times[-1] = spec.t_max
    ys = np.array(ys)
    return OscillatorTrajectory(np.array(times), ys[:, 0], ys[:, 1], ys[:, 2])


def _check_edges(amps: np.ndarray, what: str) -> None:
    peak = np.abs(amps).max()
    edge = max(abs(amps[0]), abs(amps[-1]))
    if edge > _EDGE_LEAK_REL * peak:
        raise ResolutionError(
            f"{what}: edge amplitude {edge/peak:.2e} of peak; the spread "
            "state exceeds the grid, widen the extent")


def free_propagate(psi: WaveFunction, t: float) -> WaveFunction:
    """Free flight for time t by spectral multiplication exp(-i k^2 t / 2).

    t = 0 returns the input unchanged.  Exact for band-limited states; the
    semigroup property holds to rounding.
    """
    t = float(t)
    if not np.isfinite(t):
        raise InvalidArgumentError("t must be finite")
    if t == 0.0:
        return psi
    grid = psi.grid
    k = 2.0 * np.pi * np.fft.fftfreq(grid.n_points, d=grid.dx)
    out = np.fft.ifft(np.fft.fft(psi.amplitudes) * np.exp(-0.5j * k ** 2 * t))
    _check_edges(out, f"free_propagate(t={t!r})")
    return WaveFunction(grid, out, normalize=False, norm_tol=None)


def harmonic_propagate(psi: WaveFunction, t: float, omega: float = 1.0,
                       dt_target: float = 2e-3) -> WaveFunction:
    """Constant-frequency harmonic evolution by Strang split-step.

    This is the independent evolution oracle: H = p^2/2 + omega^2 x^2/2,
    second-order accurate in the substep, with omega = 0 reducing exactly
    to free flight.
    """
    t = float(t)
    if not (np.isfinite(t) and np.isfinite(omega)):
        raise InvalidArgumentError("t and omega must be finite")
    if not np.isfinite(dt_target) or dt_target <= 0:
        raise InvalidArgumentError("dt_target must be positive")
    if t == 0.0:
        return psi
    grid = psi.grid
    n_steps = max(1, int(np.ceil(abs(t) / dt_target)))
    h = t / n_steps
    x = grid.points
    k = 2.0 * np.pi * np.fft.fftfreq(grid.n_points, d=grid.dx)
    half_v = np.exp(-0.25j * (omega ** 2) * x ** 2 * h)
    kin = np.exp(-0.5j * k ** 2 * h)
    amps = psi.amplitudes.copy()
    for _ in range(n_steps):
        amps *= half_v
        amps = np.fft.ifft(np.fft.fft(amps) * kin)
        amps *= half_v
    _check_edges(amps, f"harmonic_propagate(t={t!r}, omega={omega!r})")
    return WaveFunction(grid, amps, normalize=False, norm_tol=None)


class PositionHistory:
    """Position-density snapshots rho(t_i, x) with cubic time interpolation.

    All slices must be position tomograms ((mu, nu) = (1, 0) to 1e-12) on
    one shared grid, at strictly increasing times.
    """

    def __init__(self, times, slices: Sequence[TomogramSlice]):
        t = np.asarray(times, dtype=float)
        if t.ndim != 1 or t.size == 0 or t.size != len(slices):
            raise InvalidArgumentError("need one time per slice")
        if np.any(np.diff(t) <= 0):
            raise InvalidArgumentError("times must be strictly increasing")
        grid = slices[0].grid
        for s in slices:
            if not isinstance(s, TomogramSlice):
                raise InvalidArgumentError("slices must be TomogramSlice objects")
            if abs(s.mu - 1.0) > 1e-12 or abs(s.nu) > 1e-12:
                raise InvalidArgumentError(
                    f"history slice at ({s.mu!r}, {s.nu!r}) is not a position tomogram")
            if s.grid != grid:
                raise InvalidArgumentError("history slices must share one grid")
        self.times = t
        self.slices = list(slices)
        self._grid = grid
        self._stack = np.stack([s.density for s in slices])
        self._spline = (make_interp_spline(t, self._stack, k=min(3, t.size - 1), axis=0)
                        if t.size > 1 else None)

    @property
    def grid(self) -> SpatialGrid:
        return self._grid

    def density_at(self, t: float) -> np.ndarray:
        """Interpolated position density at time t (clipped nonnegative)."""
        t = float(t)
        lo, hi = self.times[0], self.times[-1]
        if t < lo - 1e-12 or t > hi + 1e-12:
            raise OutOfRangeError(
                f"t = {t!r} outside history range [{lo!r}, {hi!r}]")
        if self._spline is None:
            return self._stack[0].copy()
        d = self._spline(min(max(t, lo), hi))
        return np.where(d < 0.0, 0.0, d)


def free_position_history(psi0: WaveFunction, times) -> PositionHistory:
    """Record |psi(t, x)|^2 under free flight at the given times."""
    times = np.asarray(times, dtype=float)
    slices = [tomogram(free_propagate(psi0, t), 1.0, 0.0) for t in times]
    return PositionHistory(times, slices)


def harmonic_position_history(psi0: WaveFunction, times, omega: float = 1.0,
                              dt_target: float = 2e-3) -> PositionHistory:
    """Record |psi(t, x)|^2 under constant-omega harmonic evolution."""
    times = np.asarray(times, dtype=float)
    if times.size and times[0] < 0:
        raise InvalidArgumentError("history times must start at t >= 0")
    slices = []
    state = psi0
    prev = 0.0
    for t in times:
        state = harmonic_propagate(state, t - prev, omega, dt_target)
        prev = t
        slices.append(tomogram(state, 1.0, 0.0))
    return PositionHistory(times, slices)


def initial_tomogram_from_position_history(history: PositionHistory, mu: float,
                                           nu: float) -> TomogramSlice:
    """Initial-state tomogram at (mu, nu) read off free-flight position data.

    Free flight reaches the direction (mu, nu) at time t* = nu/mu through
    density(X) = rho(t*, X/mu) / |mu|.  Interpolation is cubic in both t
    and X; the result is checked to stay normalized within 1e-5 and then
    rescaled exactly.
    """
    mu, nu = float(mu), float(nu)
    if not (np.isfinite(mu) and np.isfinite(nu)):
        raise InvalidArgumentError("mu and nu must be finite")
    if mu == 0.0:
        raise InvalidArgumentError(
            "mu = 0 is not reachable from free-flight position data")
    t_star = nu / mu
    dens_t = history.density_at(t_star)
    grid = history.grid
    x = grid.points
    if mu == 1.0:
        out = dens_t
    else:
        spline = InterpolatedUnivariateSpline(x, dens_t, k=3, ext="zeros")
        out = spline(x / mu) / abs(mu)
        out = np.where(out < 0.0, 0.0, out)
    integral = float(out.sum() * grid.dx)
    if abs(integral - 1.0) > 1e-5:
        raise ResolutionError(
            f"recovered slice at ({mu!r}, {nu!r}) integrates to {integral!r}; "
            "the scaled support leaves the grid")
    return TomogramSlice(mu, nu, grid, out, renormalize=True)


def evolve_distribution(initial: Callable[[float, float, float], float],
                        traj: OscillatorTrajectory, t: float, X: float,
                        mu: float, nu: float) -> float:
    """Cumulative quadrature distribution at time t from the initial one.

    ``initial(X, mu, nu)`` must return the t = 0 cumulative distribution.
    The value at time t follows by substituting the transported argument
    and direction:

        X  -> X + sqrt(2) Re((mu eps + nu eps') conj(delta))
        mu -> mu Re eps + nu Re eps'
        nu -> mu Im eps + nu Im eps'
    """
    mu, nu = float(mu), float(nu)
    if not (np.isfinite(mu) and np.isfinite(nu)) or (mu == 0.0 and nu == 0.0):
        raise InvalidArgumentError("direction (mu, nu) must be finite, not (0, 0)")
    eps, epsd, delta = traj.at(t)
    mu_t = mu * eps.real + nu * epsd.real
    nu_t = mu * eps.imag + nu * epsd.imag
    if np.hypot(mu_t, nu_t) < 1e-12:
        raise DegenerateDirectionError(
            f"transported direction collapsed at t = {t!r}")
    shift = np.sqrt(2.0) * ((mu * eps + nu * epsd) * np.conj(delta)).real
    return float(initial(float(X) + shift, mu_t, nu_t))


def initial_tomogram_from_oscillator(history: PositionHistory,
                                     traj: OscillatorTrajectory,
                                     t: float) -> TomogramSlice:
    """Initial-state tomogram in the direction (Re eps(t), Im eps(t)).

    Builds the cumulative distribution of the position slice at time t,
    shifts its argument by -sqrt(2) Re(eps conj(delta)), and differentiates
    in X by central differences.  The result is normalized within 1e-5 and
    rescaled exactly.
    """
    eps, _epsd, delta = traj.at(t)
    if np.hypot(eps.real, eps.imag) < 1e-12:
        raise DegenerateDirectionError(f"epsilon vanished at t = {t!r}")
    dens_t = history.density_at(t)
    grid = history.grid
    if abs(eps - 1.0) <= 1e-12 and abs(delta) <= 1e-12:
        # the transport map is the identity; skip the lossy differentiation
        return TomogramSlice(1.0, 0.0, grid, dens_t, renormalize=True)
    x = grid.points
    cdf = cumulative_trapezoid(dens_t, x, initial=0.0)
    shift = np.sqrt(2.0) * (eps * np.conj(delta)).real
    spline = InterpolatedUnivariateSpline(x, cdf, k=3, ext="const")
    out = np.gradient(spline(x - shift), x)
    out = np.where(out < 0.0, 0.0, out)
    integral = float(out.sum() * grid.dx)
    if abs(integral - 1.0) > 1e-5:
        raise ResolutionError(
            f"recovered slice at t = {t!r} integrates to {integral!r}; the "
            "shifted support leaves the grid")
    return TomogramSlice(eps.real, eps.imag, grid, out, renormalize=True)
