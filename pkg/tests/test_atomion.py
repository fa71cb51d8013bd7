"""Atom-ion scattering on the regularized polarization potential."""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from quasikp import (
    DomainError,
    GridError,
    PrecisionWarning,
    RegularizedPotential,
    ResonanceError,
    RootError,
    ScatteringLengthTable,
    ThresholdError,
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
from quasikp.atomion import _delta_on_grid, _wrap_half_pi


class TestPotential:
    def test_shape(self):
        pot = RegularizedPotential(0.5)
        assert pot(0.0) == pytest.approx(-16.0, rel=1e-14)  # -1/b^4
        assert pot(10.0) == pytest.approx(-1e-4, rel=1e-2)  # -1/r^4 tail
        rr = pot(np.array([0.0, 1.0]))
        assert rr[0] == pytest.approx(-16.0, rel=1e-14)

    def test_rejects_bad_radius(self):
        with pytest.raises(DomainError):
            RegularizedPotential(0.0)
        with pytest.raises(DomainError):
            RegularizedPotential(-1.0)


class TestClosedForms:
    def test_thresholds(self):
        assert threshold_b(1) == pytest.approx(1.0 / math.sqrt(3.0), rel=1e-14)
        assert threshold_b(2) == pytest.approx(1.0 / math.sqrt(15.0), rel=1e-14)
        with pytest.raises(DomainError):
            threshold_b(0)

    def test_a_of_b_frozen_values(self):
        assert a_of_b(0.431) == pytest.approx(1.0018086406849596, rel=1e-12)
        assert a_of_b(0.299) == pytest.approx(-1.0139463136708977, rel=1e-12)

    def test_a_of_b_caption_values(self):
        # the operating points of the two reference couplings
        assert a_of_b(0.431) == pytest.approx(1.0, abs=2e-3)
        assert a_of_b(0.299) == pytest.approx(-1.0, abs=1.5e-2)

    def test_a_diverges_at_threshold(self):
        # the first bound state enters as b drops through b1: a -> +inf
        # just below (weakly bound), -inf just above (virtual)
        b1 = threshold_b(1)
        assert a_of_b(b1 * (1.0 - 1e-10)) > 1e4
        assert a_of_b(b1 * (1.0 + 1e-10)) < -1e4

    def test_invert_a_of_b(self):
        b_plus = invert_a_of_b(1.0, 1)
        b_minus = invert_a_of_b(-1.0, 1)
        assert b_plus == pytest.approx(0.4308867360537225, abs=1e-9)
        assert b_minus == pytest.approx(0.29941508579612164, abs=1e-9)
        assert a_of_b(b_plus) == pytest.approx(1.0, abs=1e-10)
        assert a_of_b(b_minus) == pytest.approx(-1.0, abs=1e-10)
        # branches live between consecutive thresholds
        assert threshold_b(2) < b_minus < b_plus < threshold_b(1)

    def test_invert_outermost_branch(self):
        b = invert_a_of_b(-2.0, 0)
        assert b > threshold_b(1)
        assert a_of_b(b) == pytest.approx(-2.0, abs=1e-10)
        with pytest.raises(DomainError):
            invert_a_of_b(1.0, 0)  # no bound state means a < 0

    def test_bound_state_count(self):
        assert bound_state_count(0.431) == 1
        assert bound_state_count(0.135) == 3
        assert bound_state_count(10.0) == 0
        with pytest.raises(ThresholdError):
            bound_state_count(threshold_b(1))
        with pytest.raises(DomainError):
            bound_state_count(-0.4)


class TestNumerov:
    def test_weak_coupling_born_limit(self):
        # huge b: delta -> Born value -(1/k) int V sin^2(kr) dr, which for
        # k b >> 1 averages to pi/(8 k b^3); positive for attraction
        k, b = 0.5, 50.0
        born = math.pi / (8.0 * k * b**3)
        assert numerov_delta0(k, b) == pytest.approx(born, rel=1e-2)

    def test_cross_check_high_order_ivp(self):
        # independent integrator (DOP853) on the same potential
        def delta_ivp(k, b):
            pot = RegularizedPotential(b)
            r_max = max(50.0, 20.0 / k, (1e10 / (k * k)) ** 0.25)

            def rhs(r, y):
                return [y[1], -(k * k - pot(r)) * y[0]]

            sol = solve_ivp(rhs, (1e-8, r_max), [0.0, 1.0], method="DOP853",
                            rtol=1e-11, atol=1e-13, dense_output=True)
            r1 = r_max - 0.5 * math.pi / k
            rho = sol.sol(r1)[0] / sol.sol(r_max)[0]
            num = rho * math.sin(k * r_max) - math.sin(k * r1)
            den = math.cos(k * r1) - rho * math.cos(k * r_max)
            return math.atan(num / den)

        for k, b in ((0.3, 0.431), (0.8, 0.299), (1.5, 0.7)):
            mine = numerov_delta0(k, b)
            ref = delta_ivp(k, b)
            assert abs(_wrap_half_pi(mine - ref)) < 1e-6, (k, b)

    def test_fourth_order_convergence(self):
        # halving the step should cut the phase error ~16x
        k, b, r_max = 0.7, 0.5, 60.0
        ref = _delta_on_grid(k, b, 0.0005, r_max)
        e1 = abs(_wrap_half_pi(_delta_on_grid(k, b, 0.016, r_max) - ref))
        e2 = abs(_wrap_half_pi(_delta_on_grid(k, b, 0.008, r_max) - ref))
        assert 10.0 < e1 / e2 < 24.0

    def test_rejects_bad_arguments(self):
        with pytest.raises(DomainError):
            numerov_delta0(0.0, 0.431)
        with pytest.raises(DomainError):
            numerov_delta0(0.5, -1.0)

    def test_tiny_k_exceeds_box_cap(self):
        with pytest.raises(GridError):
            numerov_delta0(1e-6, 0.431)

    def test_unconvergable_tolerance(self):
        with pytest.raises(GridError):
            numerov_delta0(0.5, 0.431, h=0.01, tol=1e-15)


class TestNodeCounting:
    def test_levinson_consistency(self):
        # zero-energy node count equals the analytic bound-state count
        for b in (0.9, 0.5, 0.431, 0.299, 0.156, 0.135):
            assert numerov_node_count(b) == bound_state_count(b), b

    def test_transition_radii(self):
        b1 = count_transition_b(0.5, 0.7)
        b2 = count_transition_b(0.2, 0.3)
        assert b1 == pytest.approx(threshold_b(1), abs=1e-4)
        assert b2 == pytest.approx(threshold_b(2), abs=1e-4)

    def test_no_transition_raises(self):
        with pytest.raises(RootError):
            count_transition_b(0.45, 0.5)

    def test_rejects_bad_interval(self):
        with pytest.raises(DomainError):
            count_transition_b(0.5, 0.3)


class TestLowEnergy:
    def test_expansion_values(self):
        assert a_low_energy(1.0, 0.0) == 1.0
        assert a_low_energy(-1.0, 0.3) == pytest.approx(
            -1.0 + math.pi * 0.1, rel=1e-14
        )
        assert a_low_energy(-1.0, 0.3) == pytest.approx(-0.6858, abs=1e-4)

    def test_warns_beyond_validity(self):
        with pytest.warns(PrecisionWarning):
            a_low_energy(1.0, 0.5)
        with pytest.raises(DomainError):
            a_low_energy(1.0, -0.1)

    def test_zero_extrapolation_matches_closed_form(self):
        b = 0.431
        assert a_zero_extrapolated(b) == pytest.approx(a_of_b(b), rel=1e-3)

    def test_extrapolation_needs_three_momenta(self):
        with pytest.raises(DomainError):
            a_zero_extrapolated(0.431, k_values=(0.1, 0.2))

    def test_a_from_delta(self):
        assert a_from_delta(2.0, -math.pi / 4.0) == pytest.approx(0.5, rel=1e-14)


@pytest.fixture(scope="module")
def table():
    return ScatteringLengthTable.from_potential(0.431, e_min=0.2, e_max=3.0, n=30)


class TestScatteringLengthTable:

    def test_interpolant_exact_at_nodes(self, table):
        for e, d in zip(table.energies, table.deltas):
            assert table.delta_of_e(float(e)) == pytest.approx(float(d), abs=1e-14)

    def test_refinement_stable_off_pole(self, table):
        finer = ScatteringLengthTable.from_potential(0.431, e_min=0.2, e_max=3.0, n=59)
        es = np.linspace(0.25, 2.9, 40)
        assert np.max(np.abs(table.delta_of_e(es) - finer.delta_of_e(es))) < 1e-4

    def test_a_consistent_with_delta(self, table):
        e = 1.1
        a = table.a_of_e(e)
        d = table.delta_of_e(e)
        assert a == pytest.approx(-math.tan(d) / math.sqrt(e), rel=1e-12)
        assert table.inv_a_of_e(e) == pytest.approx(1.0 / a, rel=1e-12)

    def test_range_checked(self, table):
        with pytest.raises(DomainError):
            table.a_of_e(10.0)
        with pytest.raises(DomainError):
            table.delta_of_e(0.01)

    def test_resonance_guard(self):
        # b = 0.431 has an a(E) pole near 3.8 E*; sample right on it so
        # the interval tagging is deterministic
        coarse = ScatteringLengthTable.from_potential(
            0.431, e_min=0.5, e_max=5.0, n=60
        )
        pole = find_resonance(coarse, 3.0, 4.5)
        es = pole + np.array([-0.3, -0.1, -0.03, 0.0, 0.03, 0.1, 0.3])
        table = a_of_e_table(0.431, energies=es)
        assert len(table.resonance_intervals) >= 1
        with pytest.raises(ResonanceError):
            table.a_of_e(pole)
        # explicit opt-in returns the (huge) value instead
        assert abs(table.a_of_e(pole, allow_resonant=True)) > 10.0
        # the smooth reciprocal crosses zero there instead of diverging
        assert abs(table.inv_a_of_e(pole)) < 2.0

    def test_find_resonance_position(self):
        table = ScatteringLengthTable.from_potential(
            0.431, e_min=0.5, e_max=5.0, n=60
        )
        pole = find_resonance(table, 3.0, 4.5)
        assert pole == pytest.approx(3.8, abs=0.1)
        with pytest.raises(RootError):
            find_resonance(table, 0.6, 1.5)

    def test_explicit_energy_grid(self):
        es = np.linspace(0.3, 1.5, 7)
        table = a_of_e_table(0.431, energies=es)
        assert table.energies == pytest.approx(es)
        with pytest.raises(DomainError):
            a_of_e_table(0.431, energies=[-1.0, 0.5])

    def test_constructor_validation(self):
        with pytest.raises(DomainError):
            ScatteringLengthTable(0.431, [1.0, 2.0], [0.1, 0.2])  # too few
        with pytest.raises(DomainError):
            ScatteringLengthTable(0.431, [1.0, 1.0, 2.0, 3.0], [0.1] * 4)

    def test_csv_output(self, table, tmp_path):
        path = tmp_path / "scatlen.csv"
        write_scatlen_table(path, table)
        lines = path.read_text().splitlines()
        assert lines[0] == "E_over_Estar,delta0_rad,a_over_Rstar"
        assert len(lines) == 1 + table.energies.size
        first = [float(x) for x in lines[1].split(",")]
        assert first[0] == pytest.approx(table.e_min, rel=1e-12)
