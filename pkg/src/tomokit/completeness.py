"""How much a set of tomogram slices can say about the underlying state.

Holevo's chi bounds the extractable information of a finite ensemble;
for Gaussian states the entropy has a closed form in the covariance, and
the covariance itself can be fitted from slice variances.  Depending on
which directions were measured the residual ignorance is unbounded,
bounded by an entropy, or zero (under a purity assumption).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import erf, xlogy

from . import core
from .errors import (InconsistentTomogramsError, InsufficientDataError,
                     InvalidArgumentError, InvalidCovarianceError,
                     ModelMismatchError, NumericalError, UnsupportedError)
from .transform import GaussianState, TomogramSlice

_KS_LIMIT = 0.01
_FIT_RESIDUAL_LIMIT = 1e-3
_CHI_NEGATIVE_SLACK = 1e-6
_UNCERTAINTY_SLACK = 1e-4
_LINE_ATOL = 1e-9

REGIME_POSITION = "position-only"
REGIME_POSITION_MOMENTUM = "position-and-momentum"
REGIME_THREE_OR_MORE = "three-or-more"
_REGIMES = (REGIME_POSITION, REGIME_POSITION_MOMENTUM, REGIME_THREE_OR_MORE)

_COMPONENTS = ("sigma_xx", "sigma_xp", "sigma_pp")


def g_function(x):
    """(x+1)ln(x+1) - x ln x in nats, with the 0 ln 0 = 0 convention.

    Accepts a scalar or an array; strictly increasing from g(0) = 0.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise InvalidArgumentError("g_function needs finite x >= 0")
    val = xlogy(arr + 1.0, arr + 1.0) - xlogy(arr, arr)
    if arr.ndim == 0:
        return float(val)
    return val


def gaussian_entropy(state: GaussianState) -> float:
    """Von Neumann entropy of a Gaussian state from its covariance alone."""
    arg = float(np.sqrt(state.determinant)) - 0.5
    return g_function(max(arg, 0.0))


@dataclass(frozen=True)
class Ensemble:
    """Finite weighted ensemble of pure states on one grid."""

    weights: np.ndarray
    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0 or w.size != len(members):
            raise InvalidArgumentError("need one weight per ensemble member")
        if np.any(w < 0.0) or abs(w.sum() - 1.0) > 1e-10:
            raise InvalidArgumentError("weights must form a probability vector")
        for m in members:
            if not isinstance(m, core.WaveFunction):
                raise InvalidArgumentError("ensemble members must be wavefunctions")
            if m.grid != members[0].grid:
                raise InvalidArgumentError("ensemble members must share a grid")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "members", members)

    def __len__(self) -> int:
        return len(self.members)

    def average_density_matrix(self) -> core.DensityMatrix:
        return core.density_matrix(list(self.members), self.weights)


def holevo_chi(ensemble: Ensemble) -> float:
    """chi = S(mixture) - sum of weighted member entropies.

    Both terms go through the sampled density matrices, so the member
    term vanishes only up to eigensolver roundoff; small negative totals
    are clamped to zero.
    """
    total = core.von_neumann_entropy(ensemble.average_density_matrix())
    for w, m in zip(ensemble.weights, ensemble.members):
        if w == 0.0:
            continue
        total -= w * core.von_neumann_entropy(core.density_matrix([m], [1.0]))
    if total < -_CHI_NEGATIVE_SLACK:
        raise NumericalError(
            f"Holevo chi came out {total:.2e}, negative beyond roundoff")
    return max(total, 0.0)


@dataclass(frozen=True)
class MeasurementSet:
    """Tomogram slices along distinct directions.

    Two directions that agree after rescaling by a positive factor carry
    identical information and are rejected as duplicates.
    """

    slices: tuple

    def __post_init__(self):
        slices = tuple(self.slices)
        units = []
        for s in slices:
            if not isinstance(s, TomogramSlice):
                raise InvalidArgumentError(
                    "measurement set entries must be TomogramSlice objects")
            r = float(np.hypot(s.mu, s.nu))
            u = (s.mu / r, s.nu / r)
            for v in units:
                if abs(u[0] - v[0]) <= _LINE_ATOL and abs(u[1] - v[1]) <= _LINE_ATOL:
                    raise InvalidArgumentError(
                        f"direction ({s.mu!r}, {s.nu!r}) duplicates an earlier "
                        "one up to positive scaling")
            units.append(u)
        object.__setattr__(self, "slices", slices)

    def __len__(self) -> int:
        return len(self.slices)

    @property
    def directions(self) -> list[tuple[float, float]]:
        return [(s.mu, s.nu) for s in self.slices]


def _canonical_line(mu: float, nu: float) -> tuple[float, float]:
    """Unit representative of the undirected line through (mu, nu)."""
    r = float(np.hypot(mu, nu))
    u, v = mu / r, nu / r
    if v < -_LINE_ATOL or (abs(v) <= _LINE_ATOL and u < 0.0):
        u, v = -u, -v
    return u, v


def _is_position(line) -> bool:
    return abs(line[1]) <= _LINE_ATOL


def _is_momentum(line) -> bool:
    return abs(line[0]) <= _LINE_ATOL


def _distinct_lines(mset: MeasurementSet) -> list[tuple[float, float]]:
    lines = []
    for s in mset.slices:
        c = _canonical_line(s.mu, s.nu)
        if not any(abs(c[0] - l[0]) <= _LINE_ATOL and abs(c[1] - l[1]) <= _LINE_ATOL
                   for l in lines):
            lines.append(c)
    return lines


def slice_variance(s: TomogramSlice) -> float:
    """Second moment of the slice density about zero."""
    x = s.grid.points
    return float(np.trapezoid(x * x * s.density, x))


def _ks_distance(s: TomogramSlice, variance: float) -> float:
    x = s.grid.points
    emp = np.concatenate([[0.0], cumulative_trapezoid(s.density, x)])
    emp /= emp[-1]
    model = 0.5 * (1.0 + erf(x / np.sqrt(2.0 * variance)))
    return float(np.max(np.abs(emp - model)))


@dataclass(frozen=True)
class CovarianceEstimate:
    """Covariance components a direction set determines; None marks one
    outside the span of the measured directions."""

    sigma_xx: float | None
    sigma_xp: float | None
    sigma_pp: float | None
    residual: float

    @property
    def absent(self) -> tuple[str, ...]:
        return tuple(n for n in _COMPONENTS if getattr(self, n) is None)

    def present(self) -> dict:
        return {n: getattr(self, n) for n in _COMPONENTS
                if getattr(self, n) is not None}

    def to_gaussian_state(self) -> GaussianState:
        if self.absent:
            raise InsufficientDataError(
                "covariance components not determined by the measured "
                "directions: " + ", ".join(self.absent))
        return GaussianState(sigma_xx=self.sigma_xx, sigma_pp=self.sigma_pp,
                             sigma_xp=self.sigma_xp)


def covariance_from_tomograms(mset: MeasurementSet) -> CovarianceEstimate:
    """Fit v = sigma_xx mu^2 + 2 sigma_xp mu nu + sigma_pp nu^2 to the
    slice variances.

    Every slice must first pass a zero-mean Gaussianity check (KS distance
    against the Gaussian its own variance predicts, limit 0.01).  With
    more slices than the rank of the direction system the fit must close
    to within 1e-3, and components outside the measured span come back
    None rather than as a min-norm guess.
    """
    if len(mset) == 0:
        raise InvalidArgumentError("empty measurement set")
    rows = np.array([[s.mu ** 2, 2.0 * s.mu * s.nu, s.nu ** 2]
                     for s in mset.slices])
    v = np.empty(len(mset))
    for i, s in enumerate(mset.slices):
        v[i] = slice_variance(s)
        if v[i] <= 0.0:
            raise ModelMismatchError(
                f"slice at ({s.mu!r}, {s.nu!r}) has nonpositive variance")
        ks = _ks_distance(s, v[i])
        if ks > _KS_LIMIT:
            raise ModelMismatchError(
                f"slice at ({s.mu!r}, {s.nu!r}) is not a zero-mean Gaussian: "
                f"KS distance {ks:.3f} above {_KS_LIMIT}")
    sol, _, _, _ = np.linalg.lstsq(rows, v, rcond=None)
    _, sv, vt = np.linalg.svd(rows)
    rank = int(np.sum(sv > sv[0] * 1e-10))
    null = vt[rank:]
    residual = float(np.max(np.abs(rows @ sol - v) / np.maximum(1.0, np.abs(v))))
    if residual > _FIT_RESIDUAL_LIMIT:
        raise InconsistentTomogramsError(
            f"variance system residual {residual:.2e} above "
            f"{_FIT_RESIDUAL_LIMIT}: slices disagree about the covariance")
    vals = [float(sol[j]) if np.linalg.norm(null[:, j]) <= 1e-8 else None
            for j in range(3)]
    return CovarianceEstimate(vals[0], vals[1], vals[2], residual)


@dataclass(frozen=True)
class CompletenessReport:
    """Regime analysis outcome; value None means unbounded ignorance."""

    value: float | None
    regime: str
    covariances: CovarianceEstimate | None
    purity_assumed: bool

    def __post_init__(self):
        if self.regime not in _REGIMES:
            raise InvalidArgumentError(f"unknown regime {self.regime!r}")
        if self.value is not None and not (np.isfinite(self.value)
                                           and self.value >= 0.0):
            raise InvalidArgumentError(
                "finite completeness value must be nonnegative")
        if (self.regime == REGIME_THREE_OR_MORE and self.purity_assumed
                and self.value != 0.0):
            raise InvalidArgumentError(
                "three or more directions under purity must report zero")

    @property
    def unbounded(self) -> bool:
        return self.value is None

    def payload(self) -> dict:
        cov = {} if self.covariances is None else self.covariances.present()
        value = "unbounded" if self.value is None else {"finite": self.value}
        return {"value": value, "regime": self.regime, "covariances": cov,
                "purity_assumed": self.purity_assumed}


def _oblique_residual(mset, sxx, sxp, spp) -> float:
    total = 0.0
    for s in mset.slices:
        line = _canonical_line(s.mu, s.nu)
        if _is_position(line) or _is_momentum(line):
            continue
        pred = sxx * s.mu ** 2 + 2.0 * sxp * s.mu * s.nu + spp * s.nu ** 2
        total += abs(pred - slice_variance(s))
    return total


def _pure_covariance(mset: MeasurementSet,
                     est: CovarianceEstimate) -> CovarianceEstimate:
    """Pin the cross covariance through purity, sign from the oblique
    slices, then nudge the momentum variance so the determinant is
    exactly 1/4 (a pure report must sit on the purity manifold)."""
    sxx, spp = est.sigma_xx, est.sigma_pp
    if sxx is None or spp is None:
        raise InsufficientDataError(
            "three-direction analysis needs both marginal variances")
    excess = sxx * spp - 0.25
    if excess < -_UNCERTAINTY_SLACK:
        raise InvalidCovarianceError(
            f"fitted variances give sigma_xx sigma_pp = {sxx * spp:.6f} < 1/4: "
            "no pure Gaussian state is compatible")
    mag = float(np.sqrt(max(excess, 0.0)))
    plus = _oblique_residual(mset, sxx, mag, spp)
    minus = _oblique_residual(mset, sxx, -mag, spp)
    if abs(plus - minus) <= 1e-12:
        sxp = 0.0
    else:
        sxp = mag if plus < minus else -mag
    return CovarianceEstimate(sxx, sxp, (0.25 + sxp ** 2) / sxx, est.residual)


def gaussian_completeness(mset: MeasurementSet,
                          purity_assumed: bool = False) -> CompletenessReport:
    """Residual ignorance about a Gaussian state after measuring a set of
    directions.

    Position alone leaves it unbounded; position plus momentum bounds it
    by the entropy at the largest determinant the unseen cross covariance
    allows; three or more distinct directions pin the state completely,
    but only under an explicit purity assumption.
    """
    if len(mset) == 0:
        raise InvalidArgumentError("empty measurement set")
    lines = _distinct_lines(mset)
    has_pos = any(_is_position(l) for l in lines)
    has_mom = any(_is_momentum(l) for l in lines)
    est = covariance_from_tomograms(mset)
    if len(lines) >= 3:
        if not purity_assumed:
            raise UnsupportedError(
                "three or more directions only yield a completeness value "
                "under the purity assumption")
        cov = _pure_covariance(mset, est)
        return CompletenessReport(0.0, REGIME_THREE_OR_MORE, cov, True)
    if len(lines) == 2 and has_pos and has_mom:
        arg = float(np.sqrt(est.sigma_xx * est.sigma_pp)) - 0.5
        if arg < -_UNCERTAINTY_SLACK:
            raise InvalidCovarianceError(
                "fitted variances violate the uncertainty relation")
        value = g_function(max(arg, 0.0))
        return CompletenessReport(value, REGIME_POSITION_MOMENTUM, est,
                                  purity_assumed)
    if len(lines) == 1 and has_pos:
        return CompletenessReport(None, REGIME_POSITION, est, purity_assumed)
    raise UnsupportedError(
        "no completeness value for this direction set; supported are "
        "position only, position plus momentum, and three or more "
        "distinct directions")
