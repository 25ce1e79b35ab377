import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beampower.actions import (RECIPROCAL_SQUARE, UNIFORM, build_grid, decode,
                               decode_many, encode, joint_decision, validate_grid)
from beampower.radio import RadioParams
from beampower.units import dbm_to_watts

P_MIN = float(dbm_to_watts(2.0))
P_MAX = 1.0
PHI_MIN = math.radians(3.0)
PHI_MAX = math.radians(30.0)


def default_grid(n_p=8, n_phi=8, scheme=RECIPROCAL_SQUARE):
    return build_grid(n_p, n_phi, P_MIN, P_MAX, PHI_MIN, PHI_MAX, scheme)


class TestBuildGrid:
    def test_two_point_beamwidths_are_endpoints(self):
        grid = default_grid(n_phi=2)
        assert np.array_equal(grid.beamwidths, [PHI_MIN, PHI_MAX])

    def test_three_point_reciprocal_square_midpoint(self):
        grid = default_grid(n_phi=3)
        # midpoint in 1/phi^2 space, computed in degrees: 4.2216 degrees
        u_mid_deg = (1.0 / 900.0 + 1.0 / 9.0) / 2.0
        expected = math.radians(1.0 / math.sqrt(u_mid_deg))
        assert grid.beamwidths[1] == pytest.approx(expected, rel=1e-12)
        assert math.degrees(grid.beamwidths[1]) == pytest.approx(4.2216, abs=1e-4)

    def test_default_size(self):
        assert default_grid().n_actions == 64

    def test_endpoints_bit_exact(self):
        for scheme in (RECIPROCAL_SQUARE, UNIFORM):
            grid = default_grid(scheme=scheme)
            assert grid.powers[0] == P_MIN and grid.powers[-1] == P_MAX
            assert grid.beamwidths[0] == PHI_MIN and grid.beamwidths[-1] == PHI_MAX

    def test_strictly_monotone(self):
        for scheme in (RECIPROCAL_SQUARE, UNIFORM):
            grid = default_grid(scheme=scheme)
            assert np.all(np.diff(grid.powers) > 0)
            assert np.all(np.diff(grid.beamwidths) > 0)

    def test_powers_uniform_in_watts(self):
        grid = default_grid()
        steps = np.diff(grid.powers)
        assert steps == pytest.approx(steps[0], rel=1e-12)

    def test_reciprocal_square_uniform_in_u(self):
        grid = default_grid(n_phi=8)
        u = 1.0 / grid.beamwidths**2
        steps = np.diff(u)
        assert steps == pytest.approx(steps[0], rel=1e-12)

    def test_uniform_scheme_uniform_in_phi(self):
        grid = default_grid(scheme=UNIFORM)
        steps = np.diff(grid.beamwidths)
        assert steps == pytest.approx(steps[0], rel=1e-12)

    def test_rejects_degenerate_bounds(self):
        with pytest.raises(ValueError):
            build_grid(8, 8, P_MAX, P_MIN, PHI_MIN, PHI_MAX)
        with pytest.raises(ValueError):
            build_grid(8, 8, P_MIN, P_MAX, PHI_MAX, PHI_MIN)
        with pytest.raises(ValueError):
            build_grid(1, 8, P_MIN, P_MAX, PHI_MIN, PHI_MAX)

    def test_rejects_unknown_scheme(self):
        with pytest.raises(ValueError):
            build_grid(4, 4, P_MIN, P_MAX, PHI_MIN, PHI_MAX, scheme="log")

    def test_validation_against_radio(self):
        radio = RadioParams()
        grid = build_grid(8, 8, P_MIN, P_MAX, PHI_MIN, PHI_MAX, radio=radio)
        validate_grid(grid, radio)  # does not raise

    def test_validation_rejects_too_narrow(self):
        # with a slower pilot the 3-degree beam can no longer pair with itself
        radio = RadioParams(pilot_tp=0.005)
        with pytest.raises(ValueError):
            build_grid(8, 8, P_MIN, P_MAX, PHI_MIN, PHI_MAX, radio=radio)


class TestIndexing:
    def test_first_index(self):
        grid = default_grid()
        p, phi = decode(grid, 0)
        assert p == P_MIN and phi == PHI_MIN

    def test_last_index(self):
        grid = default_grid()
        p, phi = decode(grid, grid.n_actions - 1)
        assert p == P_MAX and phi == PHI_MAX

    def test_round_trip_all(self):
        grid = default_grid()
        for idx in range(grid.n_actions):
            p, phi = decode(grid, idx)
            p_idx = int(np.where(grid.powers == p)[0][0])
            phi_idx = int(np.where(grid.beamwidths == phi)[0][0])
            assert encode(grid, p_idx, phi_idx) == idx

    def test_out_of_range(self):
        grid = default_grid()
        with pytest.raises(IndexError):
            decode(grid, -1)
        with pytest.raises(IndexError):
            decode(grid, grid.n_actions)
        with pytest.raises(IndexError):
            decode_many(grid, np.array([0, grid.n_actions]))

    @given(st.integers(min_value=0, max_value=63))
    def test_decode_many_matches_decode(self, idx):
        grid = default_grid()
        p, phi = decode(grid, idx)
        ps, phis = decode_many(grid, np.array([idx]))
        assert ps[0] == p and phis[0] == phi

    def test_joint_decision(self):
        grid = default_grid(4, 4)
        dec = joint_decision(grid, np.array([0, 15]))
        assert dec.power[0] == P_MIN and dec.beamwidth[0] == PHI_MIN
        assert dec.power[1] == P_MAX and dec.beamwidth[1] == PHI_MAX

    def test_describe_rebuilds_identical(self):
        grid = default_grid()
        d = grid.describe()
        rebuilt = build_grid(d["n_power"], d["n_beamwidth"], d["p_min_w"], d["p_max_w"],
                             d["phi_min_rad"], d["phi_max_rad"], d["scheme"])
        assert np.array_equal(rebuilt.powers, grid.powers)
        assert np.array_equal(rebuilt.beamwidths, grid.beamwidths)
