import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beampower.channel import (ChannelParams, ScenarioConfig, blockage_prob,
                               dump_realization, pathloss, read_realization,
                               sample_fading, sample_realization, trial_rng)


@pytest.fixture
def params():
    return ChannelParams()


class TestPathloss:
    def test_los_at_reference(self, params):
        # 1e-6 * 5^-2
        assert pathloss(5.0, True, params) == pytest.approx(4.0e-8, rel=1e-12)

    def test_nlos(self, params):
        # 1e-7 * 10^-4
        assert pathloss(10.0, False, params) == pytest.approx(1.0e-11, rel=1e-12)

    def test_clamped_below_reference(self, params):
        assert pathloss(2.0, True, params) == pathloss(5.0, True, params)

    def test_rejects_nonpositive_distance(self, params):
        with pytest.raises(ValueError):
            pathloss(0.0, True, params)
        with pytest.raises(ValueError):
            pathloss(-3.0, False, params)

    def test_array_input(self, params):
        out = pathloss(np.array([5.0, 10.0]), np.array([True, False]), params)
        assert out == pytest.approx([4.0e-8, 1.0e-11], rel=1e-12)

    @given(st.floats(min_value=5.0, max_value=200.0),
           st.floats(min_value=0.0, max_value=195.0))
    def test_monotone_nonincreasing(self, r, dr):
        p = ChannelParams()
        for los in (True, False):
            assert pathloss(r + dr, los, p) <= pathloss(r, los, p)

    @given(st.floats(min_value=5.0, max_value=200.0))
    def test_los_branch_dominates(self, r):
        p = ChannelParams()
        assert pathloss(r, True, p) >= pathloss(r, False, p)


class TestBlockage:
    def test_zero_distance(self):
        assert blockage_prob(0.0, 0.006) == 1.0

    def test_zero_beta(self):
        assert blockage_prob(123.4, 0.0) == 1.0

    def test_direct_value(self):
        assert blockage_prob(100.0, 0.006) == pytest.approx(math.exp(-0.6), rel=1e-12)

    def test_empirical_los_fraction(self):
        # fraction of unblocked paths at fixed R matches exp(-beta*R) to 3 SE
        r, beta, n = 50.0, 0.006, 20000
        rng = np.random.default_rng(42)
        p = blockage_prob(r, beta)
        frac = np.mean(rng.random(n) < p)
        se = math.sqrt(p * (1 - p) / n)
        assert abs(frac - p) < 3 * se


class TestFading:
    def test_moments(self):
        rng = np.random.default_rng(7)
        draws = sample_fading(3.0, rng, size=10**6)
        assert np.mean(draws) == pytest.approx(1.0, abs=0.01)
        # Gamma(m, 1/m) variance is 1/m
        assert np.var(draws) == pytest.approx(1.0 / 3.0, abs=0.01)

    def test_strictly_positive(self):
        rng = np.random.default_rng(8)
        assert np.all(sample_fading(3.0, rng, size=10**5) > 0)

    def test_rejects_small_shape(self):
        with pytest.raises(ValueError):
            sample_fading(0.2, np.random.default_rng(0))


class TestSampleRealization:
    def test_single_link_shape(self):
        cfg = ScenarioConfig(n_links=1, side_len=20.0, seed=0)
        real = sample_realization(cfg, np.random.default_rng(0))
        assert real.gain.shape == (1, 1)
        assert real.gain[0, 0] > 0

    def test_deterministic_under_seed(self):
        cfg = ScenarioConfig(n_links=5, side_len=20.0, seed=3)
        a = sample_realization(cfg, np.random.default_rng(3))
        b = sample_realization(cfg, np.random.default_rng(3))
        assert np.array_equal(a.tx_pos, b.tx_pos)
        assert np.array_equal(a.rx_pos, b.rx_pos)
        assert np.array_equal(a.gain, b.gain)
        assert np.array_equal(a.los, b.los)

    def test_extreme_beta_blocks_everything(self):
        ch = ChannelParams(beta=1e6)
        cfg = ScenarioConfig(n_links=4, side_len=20.0, channel=ch, seed=1)
        real = sample_realization(cfg, np.random.default_rng(1))
        assert not real.los.any()

    def test_gain_matrix_finite_positive(self):
        cfg = ScenarioConfig(n_links=8, side_len=20.0, seed=9)
        real = sample_realization(cfg, np.random.default_rng(9))
        assert real.gain.shape == (8, 8)
        assert np.all(np.isfinite(real.gain))
        assert np.all(real.gain > 0)

    def test_positions_inside_square(self):
        cfg = ScenarioConfig(n_links=50, side_len=13.0, seed=2)
        real = sample_realization(cfg, np.random.default_rng(2))
        for pos in (real.tx_pos, real.rx_pos):
            assert np.all(pos >= 0) and np.all(pos <= 13.0)

    def test_max_pair_dist_enforced(self):
        cfg = ScenarioConfig(n_links=30, side_len=20.0, seed=4, max_pair_dist=5.0)
        real = sample_realization(cfg, np.random.default_rng(4))
        d = np.hypot(*(real.tx_pos - real.rx_pos).T)
        assert np.all(d <= 5.0)

    def test_los_paths_skip_fading(self):
        # with blockage off, gains equal the pure pathloss values
        ch = ChannelParams(beta=0.0)
        cfg = ScenarioConfig(n_links=3, side_len=20.0, channel=ch, seed=5)
        real = sample_realization(cfg, np.random.default_rng(5))
        dist = np.hypot(real.tx_pos[:, None, 0] - real.rx_pos[None, :, 0],
                        real.tx_pos[:, None, 1] - real.rx_pos[None, :, 1])
        assert real.los.all()
        assert real.gain == pytest.approx(pathloss(dist, True, ch), rel=1e-12)


class TestTrialRng:
    def test_independent_streams(self):
        a = trial_rng(5, 0).random(4)
        b = trial_rng(5, 1).random(4)
        assert not np.array_equal(a, b)

    def test_reproducible(self):
        assert np.array_equal(trial_rng(5, 3).random(4), trial_rng(5, 3).random(4))


class TestSerialization:
    def test_round_trip(self):
        cfg = ScenarioConfig(n_links=4, side_len=20.0, seed=17)
        real = sample_realization(cfg, np.random.default_rng(17))
        buf = io.StringIO()
        dump_realization(real, buf)
        parsed = read_realization(io.StringIO(buf.getvalue()))
        assert parsed.n_links == 4
        assert parsed.side_len == 20.0
        assert parsed.seed == 17
        assert np.array_equal(parsed.tx_pos, real.tx_pos)
        assert np.array_equal(parsed.rx_pos, real.rx_pos)
        assert np.array_equal(parsed.gain, real.gain)

    def test_header_line(self):
        cfg = ScenarioConfig(n_links=2, side_len=10.0, seed=3)
        real = sample_realization(cfg, np.random.default_rng(3))
        buf = io.StringIO()
        dump_realization(real, buf)
        header = buf.getvalue().splitlines()[0].split()
        assert header == ["2", "10.0", "3"]


class TestValidation:
    def test_channel_invariants(self):
        with pytest.raises(ValueError):
            ChannelParams(c_los=-1.0)
        with pytest.raises(ValueError):
            ChannelParams(alpha_los=4.0, alpha_nlos=2.0)
        with pytest.raises(ValueError):
            ChannelParams(nakagami_m=0.1)
        with pytest.raises(ValueError):
            ChannelParams(ref_dist_m=0.0)

    def test_scenario_invariants(self):
        with pytest.raises(ValueError):
            ScenarioConfig(n_links=0, side_len=20.0)
        with pytest.raises(ValueError):
            ScenarioConfig(n_links=2, side_len=-1.0)
