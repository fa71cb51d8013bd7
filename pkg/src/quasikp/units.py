"""Unit systems and run configuration.

Waveguide quantities are expressed in harmonic-oscillator units:
hbar = m = a_perp = 1, so hbar*omega = 1 and E = k^2/2 along the axis.
Atom-ion quantities use the polarization-potential units
2m = hbar = R* = 1, where R* = sqrt(2 m C4)/hbar and E* = hbar^2/(2 m R*^2).

The only nontrivial bridge between the two systems is the energy map

    E[E*] = E[hbar*omega] * 2 * (R*/a_perp)^2

which follows from E* / (hbar*omega) = a_perp^2 / (2 R*^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

from .errors import ConfigError, UnitsError

if TYPE_CHECKING:  # pragma: no cover - annotation only
    from .quasi1d import ScatteringModel


@dataclass(frozen=True)
class IonUnits:
    """Ion length scale relative to the transverse oscillator length.

    ``r_star_ratio`` is R*/a_perp; zero means a pure contact model with
    no ion scale at all, in which case energy conversions are refused.
    """

    r_star_ratio: float

    def __post_init__(self):
        if not (math.isfinite(self.r_star_ratio) and self.r_star_ratio >= 0.0):
            raise ConfigError(["r_star_ratio must be finite and >= 0"])

    @property
    def e_star_ratio(self) -> float:
        """E*/(hbar*omega) = 1 / (2 (R*/a_perp)^2)."""
        if self.r_star_ratio == 0.0:
            raise UnitsError("contact model has no ion energy scale")
        return 1.0 / (2.0 * self.r_star_ratio**2)


def energy_ho_to_ion(e_ho: float, units: IonUnits) -> float:
    """Convert an energy from hbar*omega units to E* units."""
    if units.r_star_ratio == 0.0:
        raise UnitsError("contact model has no ion energy scale")
    return e_ho * 2.0 * units.r_star_ratio**2


def energy_ion_to_ho(e_ion: float, units: IonUnits) -> float:
    """Convert an energy from E* units back to hbar*omega units."""
    if units.r_star_ratio == 0.0:
        raise UnitsError("contact model has no ion energy scale")
    return e_ion / (2.0 * units.r_star_ratio**2)


@dataclass(frozen=True)
class ModelConfig:
    """Everything the band solver needs to know about one physical setup.

    lattice_spacing
        Impurity spacing L in units of a_perp.
    scattering
        A scattering model (constant or energy dependent 3D scattering
        length); see :mod:`quasikp.quasi1d`.
    r_star_ratio
        R*/a_perp of the underlying atom-ion interaction, zero for a
        pure contact model.  Kept here so output tables can be labelled.
    theta_grid_size
        Number of Bloch-phase samples on [0, pi].
    energy_window
        Energy search window (E_min, E_max) in hbar*omega.
    """

    lattice_spacing: float
    scattering: "ScatteringModel"
    r_star_ratio: float = 0.0
    theta_grid_size: int = 101
    energy_window: tuple[float, float] = (-1.0, 7.0)


def validate(config: ModelConfig) -> ModelConfig:
    """Check a :class:`ModelConfig` and return a normalized copy.

    All violations are collected and reported together in the raised
    :class:`ConfigError`, each message naming the offending field.
    """
    errors: list[str] = []

    try:
        spacing = float(config.lattice_spacing)
        if not (math.isfinite(spacing) and spacing > 0.0):
            errors.append("lattice_spacing must be finite and > 0")
            spacing = float("nan")
    except (TypeError, ValueError):
        errors.append("lattice_spacing must be a positive number")
        spacing = float("nan")

    try:
        r_star = float(config.r_star_ratio)
        if not (math.isfinite(r_star) and r_star >= 0.0):
            errors.append("r_star_ratio must be finite and >= 0")
    except (TypeError, ValueError):
        errors.append("r_star_ratio must be a number")
        r_star = 0.0

    try:
        grid = int(config.theta_grid_size)
        if grid < 2:
            errors.append("theta_grid_size must be >= 2")
    except (TypeError, ValueError):
        errors.append("theta_grid_size must be an integer")
        grid = 0

    try:
        lo, hi = (float(config.energy_window[0]), float(config.energy_window[1]))
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            errors.append("energy_window must satisfy E_min < E_max")
    except (TypeError, ValueError, IndexError):
        errors.append("energy_window must be a pair of numbers")
        lo, hi = (0.0, 0.0)

    if config.scattering is None or not hasattr(config.scattering, "inv_a_of"):
        errors.append("scattering must provide an inv_a_of(E) model")

    if errors:
        raise ConfigError(errors)
    return replace(
        config,
        lattice_spacing=spacing,
        r_star_ratio=r_star,
        theta_grid_size=grid,
        energy_window=(lo, hi),
    )
