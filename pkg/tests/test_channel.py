import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commlearn import channel


class TestNoiseVariance:
    def test_formula_at_4db(self):
        # forced by the convention sigma^2 = 1 / (2 R 10^(EbN0/10))
        got = channel.ebn0_to_noise_variance(4.0, 36 / 63)
        assert got == 1.0 / (2.0 * (36 / 63) * 10.0**0.4)
        assert got == pytest.approx(0.3483437742343101, abs=1e-12)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            channel.ebn0_to_noise_variance(float("inf"), 0.5)
        with pytest.raises(ValueError):
            channel.ebn0_to_noise_variance(4.0, 0.0)
        with pytest.raises(ValueError):
            channel.ebn0_to_noise_variance(4.0, 1.5)


class TestTransmit:
    def test_zero_noise_override_is_exact(self):
        bits = np.array([0, 1, 1, 0])
        frame = channel.transmit(bits, 4.0, 0.5, seed=0, noise_variance=0.0)
        assert np.array_equal(frame.observation, frame.symbols)
        assert np.array_equal(frame.symbols, [1.0, -1.0, -1.0, 1.0])

    def test_empirical_variance(self):
        # sample-statistics oracle over 1e6 samples
        bits = np.zeros(1_000_000, dtype=int)
        frame = channel.transmit(bits, 4.0, 36 / 63, seed=123)
        measured = np.var(frame.observation - frame.symbols)
        assert measured == pytest.approx(frame.noise_variance, rel=0.01)

    def test_deterministic_given_seed(self):
        bits = np.array([0, 1, 0, 1, 1])
        a = channel.transmit(bits, 2.0, 0.5, seed=42)
        b = channel.transmit(bits, 2.0, 0.5, seed=42)
        assert np.array_equal(a.observation, b.observation)

    def test_rejects_non_finite_ebn0(self):
        with pytest.raises(ValueError):
            channel.transmit(np.array([0, 1]), float("nan"), 0.5, seed=0)

    def test_batched_frames(self):
        bits = np.random.default_rng(0).integers(0, 2, size=(8, 15))
        frame = channel.transmit(bits, 3.0, 7 / 15, seed=1)
        assert frame.observation.shape == (8, 15)


class TestChannelLlr:
    def test_zero_observation(self):
        frame = channel.ChannelFrame(
            bits=np.array([0]), symbols=np.array([1.0]),
            observation=np.array([0.0]), noise_variance=0.5,
        )
        assert channel.channel_llr(frame) == pytest.approx([0.0])

    def test_direct_formula(self):
        frame = channel.ChannelFrame(
            bits=np.array([0]), symbols=np.array([1.0]),
            observation=np.array([1.0]), noise_variance=0.5,
        )
        assert channel.channel_llr(frame) == pytest.approx([4.0])

    def test_zero_variance_rejected(self):
        frame = channel.transmit(np.array([0, 1]), 4.0, 0.5, seed=0, noise_variance=0.0)
        with pytest.raises(ValueError):
            channel.channel_llr(frame)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_antipodal_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        y = rng.normal(size=16)
        sigma2 = float(rng.uniform(0.05, 2.0))
        base = dict(bits=np.zeros(16, dtype=int), symbols=np.ones(16))
        pos = channel.ChannelFrame(observation=y, noise_variance=sigma2, **base)
        neg = channel.ChannelFrame(observation=-y, noise_variance=sigma2, **base)
        assert np.array_equal(channel.channel_llr(neg), -channel.channel_llr(pos))

    def test_sign_matches_observation(self):
        rng = np.random.default_rng(7)
        bits = rng.integers(0, 2, size=4096)
        frame = channel.transmit(bits, 1.0, 0.5, seed=8)
        llr = channel.channel_llr(frame)
        assert np.array_equal(np.sign(llr), np.sign(frame.observation))

    def test_density_ratio_histogram(self):
        """Monte-Carlo oracle: binned log density ratios match 2y/sigma^2."""
        rng = np.random.default_rng(99)
        sigma2 = 0.6
        n = 2_000_000
        y0 = 1.0 + rng.normal(0, math.sqrt(sigma2), n)   # bit 0 sent
        y1 = -1.0 + rng.normal(0, math.sqrt(sigma2), n)  # bit 1 sent
        edges = np.linspace(-1.2, 1.2, 49)
        centers = 0.5 * (edges[:-1] + edges[1:])
        h0, _ = np.histogram(y0, edges)
        h1, _ = np.histogram(y1, edges)
        keep = (h0 > 5000) & (h1 > 5000)
        empirical = np.log(h0[keep] / h1[keep])
        theory = 2.0 * centers[keep] / sigma2
        assert np.max(np.abs(empirical - theory)) < 0.15
