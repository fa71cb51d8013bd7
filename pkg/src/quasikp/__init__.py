"""Bound bands and scattering of a particle in a quasi-1D waveguide
threaded by a periodic lattice of zero-range or atom-ion impurities.

Harmonic-oscillator units (hbar = m = a_perp = 1) everywhere on the
waveguide side; polarization-potential units (2m = hbar = R* = 1) on the
atom-ion side; see :mod:`quasikp.units` for the bridge.
"""

from .atomion import (
    RegularizedPotential,
    ScatteringLengthTable,
    a_from_delta,
    a_low_energy,
    a_of_b,
    a_of_e_table,
    a_zero_extrapolated,
    bound_state_count,
    count_transition_b,
    find_resonance,
    invert_a_of_b,
    numerov_delta0,
    numerov_node_count,
    threshold_b,
    write_scatlen_table,
)
from .bands import (
    Band,
    BandEdgeRow,
    EffectiveMassFit,
    EffectiveMassRow,
    band_edges_vs_a,
    band_energies_at_theta,
    effective_mass,
    effective_mass_for_model,
    effective_mass_vs_a,
    lattice_sum_pole_energies,
    solve_bands,
    write_band_table,
)
from .errors import (
    ConfigError,
    DomainError,
    FitRankError,
    GridError,
    OracleError,
    PoleError,
    PrecisionWarning,
    QuasiKpError,
    ResonanceError,
    RootError,
    ThresholdError,
    UnitsError,
)
from .greens_oracle import (
    ModeSumParams,
    beta_bruteforce,
    g1d,
    g3d_onaxis,
    g3d_onaxis_with_tail,
    lambda_bruteforce,
    lambda_bruteforce_reduced,
    zeta_half_bruteforce,
)
from .kp1d import Kp1dParams, kp1d_bands, kp1d_rhs, kp1d_rhs_negative
from .quasi1d import (
    ChannelDecomposition,
    ConstantScatteringLength,
    EnergyDependentScatteringLength,
    a1d_eff,
    a1d_of_e,
    c_of_e,
    channels,
    dispersion_residual,
    lambda_e,
    lambda_e_h_approx,
    lambda_e_series_approx,
    lambda_p,
    olshanii_constant,
    single_impurity_bound_energy,
)
from .specfun import h_series, hurwitz_zeta_half
from .units import (
    IonUnits,
    ModelConfig,
    energy_ho_to_ion,
    energy_ion_to_ho,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "Band",
    "BandEdgeRow",
    "ChannelDecomposition",
    "ConfigError",
    "ConstantScatteringLength",
    "DomainError",
    "EffectiveMassFit",
    "EffectiveMassRow",
    "EnergyDependentScatteringLength",
    "FitRankError",
    "GridError",
    "IonUnits",
    "Kp1dParams",
    "ModeSumParams",
    "ModelConfig",
    "OracleError",
    "PoleError",
    "PrecisionWarning",
    "QuasiKpError",
    "RegularizedPotential",
    "ResonanceError",
    "RootError",
    "ScatteringLengthTable",
    "ThresholdError",
    "UnitsError",
    "a1d_eff",
    "a1d_of_e",
    "a_from_delta",
    "a_low_energy",
    "a_of_b",
    "a_of_e_table",
    "a_zero_extrapolated",
    "band_edges_vs_a",
    "band_energies_at_theta",
    "beta_bruteforce",
    "bound_state_count",
    "c_of_e",
    "channels",
    "count_transition_b",
    "dispersion_residual",
    "effective_mass",
    "effective_mass_for_model",
    "effective_mass_vs_a",
    "energy_ho_to_ion",
    "energy_ion_to_ho",
    "find_resonance",
    "g1d",
    "g3d_onaxis",
    "g3d_onaxis_with_tail",
    "h_series",
    "hurwitz_zeta_half",
    "invert_a_of_b",
    "kp1d_bands",
    "kp1d_rhs",
    "kp1d_rhs_negative",
    "lambda_bruteforce",
    "lambda_bruteforce_reduced",
    "lambda_e",
    "lambda_e_h_approx",
    "lambda_e_series_approx",
    "lambda_p",
    "lattice_sum_pole_energies",
    "numerov_delta0",
    "numerov_node_count",
    "olshanii_constant",
    "single_impurity_bound_energy",
    "solve_bands",
    "threshold_b",
    "validate",
    "write_band_table",
    "write_scatlen_table",
    "zeta_half_bruteforce",
]
