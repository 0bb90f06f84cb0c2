"""BPSK over AWGN: modulation, noise injection, and channel LLRs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ChannelFrame", "ebn0_to_noise_variance", "transmit", "channel_llr"]


@dataclass(frozen=True)
class ChannelFrame:
    """One transmit-receive record (or a batch with a leading axis).

    ``symbols`` uses the map bit 0 -> +1, bit 1 -> -1, so a positive LLR
    favors bit 0. ``noise_variance`` is per real dimension; it is 0 only for
    explicitly noise-free frames, in which case LLRs are undefined.
    """

    bits: np.ndarray
    symbols: np.ndarray
    observation: np.ndarray
    noise_variance: float

    def __post_init__(self):
        if not (self.bits.shape == self.symbols.shape == self.observation.shape):
            raise ValueError("bits/symbols/observation shapes disagree")
        if not np.isin(self.bits, (0, 1)).all():
            raise ValueError("bits must be 0 or 1")
        if not (self.noise_variance >= 0 and math.isfinite(self.noise_variance)):
            raise ValueError("noise variance must be finite and >= 0")


def ebn0_to_noise_variance(ebn0_db: float, rate: float) -> float:
    """Noise variance per real dimension for unit-energy BPSK at code rate
    ``rate``: 1 / (2 * rate * 10^(ebn0_db / 10))."""
    if not math.isfinite(ebn0_db):
        raise ValueError("Eb/N0 must be finite")
    if not 0 < rate <= 1:
        raise ValueError("code rate must lie in (0, 1]")
    return 1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))


def transmit(
    bits: np.ndarray,
    ebn0_db: float,
    rate: float,
    seed,
    noise_variance: float | None = None,
) -> ChannelFrame:
    """BPSK-modulate ``bits`` and add white Gaussian noise.

    ``noise_variance`` overrides the Eb/N0-derived value when given; passing
    0.0 produces the exact noise-free observation y = s.
    """
    bits = np.asarray(bits)
    if noise_variance is None:
        sigma2 = ebn0_to_noise_variance(ebn0_db, rate)
    else:
        if noise_variance < 0:
            raise ValueError("noise variance override must be >= 0")
        sigma2 = float(noise_variance)
    symbols = 1.0 - 2.0 * bits.astype(np.float64)
    if sigma2 > 0:
        rng = np.random.default_rng(seed)
        observation = symbols + rng.normal(0.0, math.sqrt(sigma2), size=symbols.shape)
    else:
        observation = symbols.copy()
    return ChannelFrame(bits=bits, symbols=symbols, observation=observation, noise_variance=sigma2)


def channel_llr(frame: ChannelFrame) -> np.ndarray:
    """Channel LLRs 2*y/sigma^2 (positive favors bit 0)."""
    if frame.noise_variance == 0:
        raise ValueError("channel LLR undefined for zero noise variance")
    return 2.0 * frame.observation / frame.noise_variance
