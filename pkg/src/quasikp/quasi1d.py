"""Dispersion machinery for a waveguide threaded by a lattice of impurities.

A particle in a transverse harmonic trap (frequency omega) moving along z
scatters on identical short-range impurities spaced L apart.  Units are
hbar = m = a_perp = 1, so hbar*omega = 1 and the axially symmetric
transverse channels open at E = 1, 3, 5, ...

A Bloch state with phase theta per cell exists at energy E when

    a1d(E) + 2 L (Lambda_p(E, theta) + Lambda_e(E, theta)) = 0,

where a1d(E) is the effective 1D scattering length of a single impurity
(which absorbs the closed-channel physics through C(E)), Lambda_p sums
the open (propagating) channels over lattice sites, and Lambda_e the
closed (evanescent) ones.

Below the lowest threshold every channel is evanescent and the branch
offset q = (1 - E)/2 continues smoothly to arbitrarily deep energies;
this reproduces the correct single-impurity dimer at small positive a.
Between thresholds, q = 1 - eps/2 with eps the excess above the highest
open threshold.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    ConfigError,
    DomainError,
    PoleError,
    PrecisionWarning,
    ThresholdError,
)
from .specfun import h_series, hurwitz_zeta_half

TOL_THRESHOLD = 1e-9
TOL_POLE = 1e-9


def olshanii_constant() -> float:
    """C at the lowest threshold, i.e. -zeta(1/2, 1) = 1.4603545..."""
    return -hurwitz_zeta_half(1.0)


def _branch_offsets(E):
    """Channel index n_star and excess eps above the governing threshold.

    n_star = floor((E - 1)/2) clamped to >= -1: below the lowest threshold
    all channels are closed and the same branch continues downward.
    Raises ThresholdError within TOL_THRESHOLD below any threshold, where
    the closed-channel sums diverge.
    """
    arr = np.asarray(E, dtype=float)
    if arr.size and not np.all(np.isfinite(arr)):
        raise DomainError("energy must be finite")
    n_star = np.maximum(np.floor((arr - 1.0) / 2.0), -1.0)
    eps = arr - (2.0 * n_star + 1.0)
    # q = 1 - eps/2 -> 0+ approaching the next threshold from below
    if np.any(1.0 - 0.5 * eps < 0.5 * TOL_THRESHOLD):
        raise ThresholdError(
            "energy within TOL_THRESHOLD below a transverse threshold"
        )
    return n_star, eps


@dataclass(frozen=True)
class ChannelDecomposition:
    """Open/closed transverse channel split at a given total energy.

    open_k holds the axial momenta (in 1/a_perp) of the open channels;
    closed channel momenta come from :meth:`closed_k` on demand since
    there are infinitely many.
    """

    n_star: int
    e_threshold: float
    epsilon: float
    open_k: np.ndarray

    def closed_k(self, n):
        """Evanescent momentum 2*sqrt(n - eps/2) of the n-th closed channel, n >= 1."""
        n_arr = np.asarray(n)
        if np.any(n_arr < 1):
            raise DomainError("closed channels are indexed from 1")
        out = 2.0 * np.sqrt(n_arr - 0.5 * self.epsilon)
        return float(out) if n_arr.ndim == 0 else out


def channels(E: float) -> ChannelDecomposition:
    """Decompose energy E into open and closed transverse channels."""
    n_star_arr, eps_arr = _branch_offsets(float(E))
    n_star = int(n_star_arr)
    eps = float(eps_arr)
    ns = np.arange(0, n_star + 1, dtype=float)
    open_k = 2.0 * np.sqrt(np.maximum((float(E) - 1.0) / 2.0 - ns, 0.0))
    return ChannelDecomposition(n_star, 2.0 * n_star + 1.0, eps, open_k)


def c_of_e(E):
    """Closed-channel regularization constant C(E) = -zeta(1/2, 1 - eps/2).

    Diverges to -infinity approaching any threshold from below (guarded),
    equals the Olshanii constant 1.46035 at E = hbar*omega, and grows like
    sqrt(2(1 - E)) for deep negative energies.  Scalar or ndarray E.
    """
    _, eps = _branch_offsets(E)
    return -hurwitz_zeta_half(1.0 - 0.5 * eps)


def lambda_p(E, theta: float, L: float):
    """Open-channel lattice sum; scalar theta, scalar or ndarray E.

    Sum over open channels of sin(k_n L) / (2 k_n L (cos theta - cos k_n L)).
    Empty (zero) below the lowest threshold.  Raises PoleError within
    TOL_POLE of cos(theta) = cos(k_n L), where a free lattice band passes.
    """
    arr = np.asarray(E, dtype=float)
    n_star, _ = _branch_offsets(arr)
    if not math.isfinite(theta) or not (math.isfinite(L) and L > 0.0):
        raise DomainError("theta must be finite and L positive")
    out = np.zeros(arr.shape)
    n_top = int(n_star.max()) if arr.size else -1
    cos_t = math.cos(theta)
    for n in range(0, n_top + 1):
        mask = n_star >= n
        kn = 2.0 * np.sqrt(np.maximum((arr - 1.0) / 2.0 - n, 0.0))
        knL = kn * L
        denom = cos_t - np.cos(knL)
        if np.any(mask & (np.abs(denom) < TOL_POLE)):
            raise PoleError(
                f"open-channel pole cos(theta) = cos(k_n L) in channel n={n}",
                channel=n,
            )
        with np.errstate(invalid="ignore", divide="ignore"):
            term = 0.5 * np.sinc(knL / np.pi) / denom
        out = np.where(mask, out + term, out)
    return float(out) if np.asarray(E).ndim == 0 else out


def _re_geometric(t, cos_t):
    """Re[1/(1 - e^{x + i theta})] written in t = exp(-x); stable for any x > 0."""
    return (t * t - t * cos_t) / (1.0 - 2.0 * t * cos_t + t * t)


def lambda_e(E, theta: float, L: float, *, rel_tol: float = 1e-14,
             max_terms: int = 10**6):
    """Closed-channel lattice sum; scalar theta, scalar or ndarray E.

    Sum over closed channels of Re[1/(1 - e^{k_n L + i theta})]/(k_n L)
    with k_n = 2*sqrt(n - eps/2).  Converges like exp(-2 sqrt(n) L); the
    sum is truncated once the newest term drops below rel_tol of the
    running total, with a hard cap that emits PrecisionWarning.
    """
    arr = np.atleast_1d(np.asarray(E, dtype=float)).ravel()
    _, eps = _branch_offsets(arr)
    if not math.isfinite(theta) or not (math.isfinite(L) and L > 0.0):
        raise DomainError("theta must be finite and L positive")
    cos_t = math.cos(theta)
    total = np.zeros(arr.shape)
    n = 1
    block = 16
    converged = False
    while n <= max_terms:
        ns = np.arange(n, min(n + block, max_terms + 1), dtype=float)
        kn = 2.0 * np.sqrt(ns[:, None] - 0.5 * eps[None, :])
        x = kn * L
        terms = _re_geometric(np.exp(-x), cos_t) / x
        total = total + terms.sum(axis=0)
        last = np.abs(terms[-1])
        if np.all(last <= rel_tol * np.maximum(np.abs(total), 1e-300)):
            converged = True
            break
        n += len(ns)
        block = min(2 * block, 4096)
    if not converged:
        warnings.warn(
            f"closed-channel sum truncated after {max_terms} terms",
            PrecisionWarning,
            stacklevel=2,
        )
    return float(total[0]) if np.asarray(E).ndim == 0 else total.reshape(np.asarray(E).shape)


def lambda_e_series_approx(theta, L: float, *, rel_tol: float = 1e-14,
                           max_terms: int = 10**6):
    """Low-energy closed-channel sum with k_n -> 2*sqrt(n) (eps -> 0 limit).

    Accepts scalar or ndarray theta; valid near the lowest threshold where
    the full sum reduces to sum_n Re[1/(1 - e^{2 sqrt(n) L + i theta})]/(2 sqrt(n) L).
    """
    th = np.asarray(theta, dtype=float)
    if not (math.isfinite(L) and L > 0.0):
        raise DomainError("L must be positive")
    cos_t = np.cos(th)
    total = np.zeros(th.shape)
    n = 1
    block = 16
    converged = False
    while n <= max_terms:
        ns = np.arange(n, min(n + block, max_terms + 1), dtype=float)
        x = 2.0 * np.sqrt(ns)[(...,) + (None,) * th.ndim] * L
        terms = _re_geometric(np.exp(-x), cos_t) / x
        total = total + terms.sum(axis=0)
        if np.all(np.abs(terms[-1]) <= rel_tol * np.maximum(np.abs(total), 1e-300)):
            converged = True
            break
        n += len(ns)
        block = min(2 * block, 4096)
    if not converged:
        warnings.warn(
            f"closed-channel sum truncated after {max_terms} terms",
            PrecisionWarning,
            stacklevel=2,
        )
    return float(total) if th.ndim == 0 else total


def lambda_e_h_approx(theta, L: float):
    """Large-spacing closed-channel sum -cos(theta) H(2L) / (2L).

    Keeps only the single-site exponential of each closed channel, which
    turns the lattice sum into the universal series H(x); accurate once
    exp(-4 sqrt(1) L) corrections are negligible.
    """
    th = np.asarray(theta, dtype=float)
    if not (math.isfinite(L) and L > 0.0):
        raise DomainError("L must be positive")
    out = -0.5 * np.cos(th) * h_series(2.0 * L) / L
    return float(out) if th.ndim == 0 else out


@dataclass(frozen=True)
class ConstantScatteringLength:
    """Energy-independent 3D scattering length (units of a_perp)."""

    a: float

    def __post_init__(self):
        if not math.isfinite(self.a):
            raise ConfigError(["scattering length must be finite"])

    @property
    def is_free(self) -> bool:
        return self.a == 0.0

    def a_of(self, E):
        return np.broadcast_to(self.a, np.shape(E)).copy() if np.ndim(E) else self.a

    def inv_a_of(self, E):
        if self.a == 0.0:
            raise DomainError(
                "free-particle limit (a = 0): band structure is the free one"
            )
        inv = 1.0 / self.a
        return np.broadcast_to(inv, np.shape(E)).copy() if np.ndim(E) else inv


@dataclass(frozen=True)
class EnergyDependentScatteringLength:
    """3D scattering length taken from an atom-ion phase-shift table.

    The table works in ion units (lengths in R*, energies in E*); this
    wrapper converts waveguide energies via E* = 2 (R*/a_perp)^2 E[hbar*omega]
    and lengths via a[a_perp] = (R*/a_perp) a[R*].

    kinetic_reference selects which energy feeds the 3D collision:
    "total" uses the full Bloch energy, "relative-to-threshold" subtracts
    the transverse zero point hbar*omega.  Below the table's first sample
    the universal low-energy form a(k) = a(k_min) + (pi/3)(k - k_min)
    extends it continuously; below zero kinetic energy it freezes.
    """

    table: object
    r_star_ratio: float
    kinetic_reference: str = "total"

    def __post_init__(self):
        if not (math.isfinite(self.r_star_ratio) and self.r_star_ratio > 0.0):
            raise ConfigError(["r_star_ratio must be > 0 for an ion-scale model"])
        if self.kinetic_reference not in ("total", "relative-to-threshold"):
            raise ConfigError([f"unknown kinetic_reference {self.kinetic_reference!r}"])

    @property
    def is_free(self) -> bool:
        return False

    def _ion_energy(self, E_ho):
        offset = 0.0 if self.kinetic_reference == "total" else 1.0
        return (np.asarray(E_ho, dtype=float) - offset) * 2.0 * self.r_star_ratio**2

    def _a_rstar(self, e_ion):
        """a(E) in R* units with the continuous low-energy extension."""
        e = np.atleast_1d(np.asarray(e_ion, dtype=float))
        e_min = self.table.e_min
        out = np.empty(e.shape)
        low = e < e_min
        if np.any(~low):
            out[~low] = self.table.a_of_e(e[~low])
        if np.any(low):
            anchor = float(self.table.a_of_e(e_min))
            k = np.sqrt(np.maximum(e[low], 0.0))
            out[low] = anchor + (math.pi / 3.0) * (k - math.sqrt(e_min))
        return out

    def a_of(self, E_ho):
        out = self._a_rstar(self._ion_energy(E_ho)) * self.r_star_ratio
        return float(out[0]) if np.ndim(E_ho) == 0 else out.reshape(np.shape(E_ho))

    def inv_a_of(self, E_ho):
        with np.errstate(divide="ignore"):
            out = 1.0 / self._a_rstar(self._ion_energy(E_ho)) / self.r_star_ratio
        return float(out[0]) if np.ndim(E_ho) == 0 else out.reshape(np.shape(E_ho))

    def a_zero_energies_ho(self) -> list[float]:
        """Waveguide energies where a(E) crosses zero (residual poles)."""
        offset = 0.0 if self.kinetic_reference == "total" else 1.0
        scale = 2.0 * self.r_star_ratio**2
        return [e / scale + offset for e in self.table.a_zero_energies]


ScatteringModel = Union[ConstantScatteringLength, EnergyDependentScatteringLength]


def a1d_of_e(E, model: ScatteringModel):
    """Effective 1D scattering length a1d(E) = -(1/(2a))(1 - C(E) a).

    Written through 1/a so energy-dependent models stay finite across
    their 3D resonances (where a1d simply approaches C(E)/2).  Scalar or
    ndarray E; raises for the free model where a1d is undefined.
    """
    return -0.5 * model.inv_a_of(E) + 0.5 * c_of_e(E)


def dispersion_residual(E, theta: float, config):
    """Residual a1d(E) + 2L (Lambda_p + Lambda_e); zero at Bloch eigenenergies.

    Scalar theta, scalar or ndarray E.  Pole and threshold errors from the
    lattice sums propagate so callers can partition their search windows.
    """
    L = config.lattice_spacing
    lam = lambda_p(E, theta, L) + lambda_e(E, theta, L)
    return a1d_of_e(E, config.scattering) + 2.0 * L * lam


def a1d_eff(theta, L: float, model: ScatteringModel, mode: str = "series"):
    """Effective 1D scattering length of the lattice near the lowest threshold.

    a1d_eff(theta) = a1d + 2L * Lambda_e(theta) with the low-energy C;
    the lattice correction uses either the exact eps -> 0 series
    (mode "series") or the large-spacing H-function form (mode "h-approx").
    Only meaningful for a constant-a model.
    """
    if not isinstance(model, ConstantScatteringLength):
        raise DomainError("a1d_eff is defined for the constant-a model")
    if model.a == 0.0:
        raise DomainError("a1d_eff undefined for a = 0 (free lattice)")
    if mode in ("series", "exact-series"):
        lam = lambda_e_series_approx(theta, L)
    elif mode in ("h", "h-approx"):
        lam = lambda_e_h_approx(theta, L)
    else:
        raise DomainError(f"unknown a1d_eff mode {mode!r}")
    a1 = -0.5 / model.a * (1.0 - olshanii_constant() * model.a)
    return a1 + 2.0 * L * lam


def single_impurity_bound_energy(model: ScatteringModel) -> float:
    """Energy of the single-impurity bound state, the L -> infinity limit.

    Solves C(E) = 1/a(E) below the lowest threshold; exists for every
    nonzero scattering length (weakly bound for a < 0, diving to the
    free-space dimer -1/(2 a^2) for small positive a).
    """
    if getattr(model, "is_free", False):
        raise DomainError("free model has no bound state")

    def g(E: float) -> float:
        return float(c_of_e(E)) - float(model.inv_a_of(E))

    hi = 1.0 - 1e-8
    g_hi = g(hi)
    if g_hi >= 0.0:  # pragma: no cover - guard distance keeps C very negative
        raise DomainError("no bound root bracket found near threshold")
    lo = -1.0
    g_lo = g(lo)
    while g_lo < 0.0:
        lo = 1.0 - 2.0 * (1.0 - lo)
        if lo < -1e12:
            raise DomainError("bound-state bracket search ran away")
        g_lo = g(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        g_mid = g(mid)
        if g_mid == 0.0:
            return mid
        if g_mid > 0.0:
            lo, g_lo = mid, g_mid
        else:
            hi, g_hi = mid, g_mid
    return 0.5 * (lo + hi)
