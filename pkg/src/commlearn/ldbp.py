"""Fiber-optic transmission and equalization: split-step simulation of the
nonlinear Schrodinger channel, frequency-domain digital backpropagation,
short-FIR dispersion filter design, and jointly trained time-domain
backpropagation with per-step filters.

Sign convention: the forward dispersion step multiplies the spectrum by
exp(+j * (beta2 / 2) * w^2 * delta) with beta2 < 0 for standard single-mode
fiber; equalizers apply the conjugate response. Transmit waveforms and
matched filtering are circular (FFT-based); the per-step equalizer filters
use zero-padded linear convolution, so evaluations skip a burst margin.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from .grad import LdbpLossPipeline, conv_same, nonlinear_phase

__all__ = [
    "ComplexSignal",
    "FiberParams",
    "FilterBank",
    "LinkConfig",
    "LdbpTrainConfig",
    "default_fiber",
    "default_link",
    "constellation",
    "map_bits",
    "generate_waveform",
    "rrc_taps",
    "receive_symbols",
    "nearest_symbols",
    "resample",
    "ssfm_propagate",
    "dbp_frequency_domain",
    "equalize_linear",
    "design_fir",
    "make_filter_bank",
    "pretrain_cascade_bank",
    "ldbp_apply",
    "train_ldbp",
    "simulate_burst",
    "effective_snr",
    "save_filter_bank",
    "load_filter_bank",
    "save_waveform",
    "load_waveform",
]

_PLANCK = 6.62607015e-34
_LIGHTSPEED = 299792458.0


@dataclass(frozen=True)
class ComplexSignal:
    """Sampled complex baseband waveform."""

    samples: np.ndarray
    sample_rate: float
    symbol_rate: float

    def __post_init__(self):
        object.__setattr__(
            self, "samples", np.asarray(self.samples, dtype=np.complex128)
        )
        if self.oversampling < 2:
            raise ValueError("oversampling must be at least 2")
        if not np.isfinite(self.samples).all():
            raise ValueError("signal contains non-finite samples")

    @property
    def oversampling(self) -> float:
        return self.sample_rate / self.symbol_rate

    def power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))


@dataclass(frozen=True)
class FiberParams:
    """Physical link parameters (SI units; alpha is the power attenuation)."""

    beta2: float  # s^2/m
    gamma_nl: float  # 1/(W m)
    alpha: float  # 1/m
    span_length: float  # m
    num_spans: int
    amp_noise_figure_db: float = 4.5
    amplification: str = "edfa"  # "edfa" | "off"
    carrier_wavelength: float = 1550e-9

    def __post_init__(self):
        if self.span_length <= 0 or self.num_spans < 1 or self.alpha < 0:
            raise ValueError("invalid fiber geometry")
        if self.amplification not in ("edfa", "off"):
            raise ValueError(f"unknown amplification {self.amplification!r}")

    @property
    def total_length(self) -> float:
        return self.span_length * self.num_spans


def default_fiber(num_spans: int = 25, **overrides) -> FiberParams:
    """25 x 80 km standard single-mode fiber with lumped amplification."""
    params = dict(
        beta2=-21.7e-27,
        gamma_nl=1.3e-3,
        alpha=0.2 * math.log(10.0) / 10.0 / 1e3,  # 0.2 dB/km
        span_length=80e3,
        num_spans=num_spans,
        amp_noise_figure_db=4.5,
    )
    params.update(overrides)
    return FiberParams(**params)


@dataclass(frozen=True)
class LinkConfig:
    """Simulation/equalization setup around a fiber."""

    fiber: FiberParams
    modulation: str = "16QAM"
    symbol_rate: float = 10.7e9
    rolloff: float = 0.1
    sim_oversampling: int = 4
    eq_oversampling: int = 2
    sim_steps_per_span: int = 50
    rrc_span_symbols: int = 32

    @property
    def sim_sample_rate(self) -> float:
        return self.symbol_rate * self.sim_oversampling

    @property
    def eq_sample_rate(self) -> float:
        return self.symbol_rate * self.eq_oversampling

    @property
    def signal_bandwidth_fraction(self) -> float:
        """Occupied band as a fraction of the equalizer sample rate."""
        return min((1.0 + self.rolloff) / self.eq_oversampling, 1.0)


def default_link(**overrides) -> LinkConfig:
    cfg = dict(fiber=default_fiber())
    cfg.update(overrides)
    return LinkConfig(**cfg)


# ---------------------------------------------------------------------------
# Modulation and pulse shaping
# ---------------------------------------------------------------------------


def constellation(modulation: str) -> np.ndarray:
    """Unit-average-power constellation points."""
    if modulation.upper() == "QPSK":
        pts = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / math.sqrt(2.0)
    elif modulation.upper() == "16QAM":
        levels = np.array([-3.0, -1.0, 1.0, 3.0])
        pts = (levels[:, None] + 1j * levels[None, :]).ravel() / math.sqrt(10.0)
    else:
        raise ValueError(f"unsupported modulation {modulation!r}")
    return pts


def map_bits(bits: np.ndarray, modulation: str) -> np.ndarray:
    """Map a flat bit array to constellation symbols (index = bit group)."""
    pts = constellation(modulation)
    bits_per_symbol = int(math.log2(len(pts)))
    bits = np.asarray(bits).astype(np.int64)
    if len(bits) % bits_per_symbol:
        raise ValueError("bit count must be a multiple of bits per symbol")
    groups = bits.reshape(-1, bits_per_symbol)
    idx = groups @ (1 << np.arange(bits_per_symbol - 1, -1, -1))
    return pts[idx]


def rrc_taps(rolloff: float, sps: int, span_symbols: int = 32) -> np.ndarray:
    """Unit-energy root-raised-cosine taps spanning ``span_symbols``."""
    if not 0 <= rolloff < 1:
        raise ValueError("rolloff must lie in [0, 1)")
    n = span_symbols * sps
    t = (np.arange(n + 1) - n / 2) / sps
    h = np.zeros(n + 1)
    for i, ti in enumerate(t):
        if abs(ti) < 1e-12:
            h[i] = 1.0 - rolloff + 4.0 * rolloff / math.pi
        elif rolloff > 0 and abs(abs(ti) - 1.0 / (4.0 * rolloff)) < 1e-9:
            h[i] = (rolloff / math.sqrt(2.0)) * (
                (1 + 2 / math.pi) * math.sin(math.pi / (4 * rolloff))
                + (1 - 2 / math.pi) * math.cos(math.pi / (4 * rolloff))
            )
        else:
            num = math.sin(math.pi * ti * (1 - rolloff)) + 4 * rolloff * ti * math.cos(
                math.pi * ti * (1 + rolloff)
            )
            den = math.pi * ti * (1 - (4 * rolloff * ti) ** 2)
            h[i] = num / den
    return h / math.sqrt(float((h**2).sum()))


def _circular_filter(samples: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Circular convolution with an odd-length centered tap vector."""
    n = len(samples)
    kernel = np.zeros(n, dtype=np.complex128)
    half = (len(taps) - 1) // 2
    idx = (np.arange(len(taps)) - half) % n
    np.add.at(kernel, idx, taps.astype(np.complex128))
    return np.fft.ifft(np.fft.fft(samples) * np.fft.fft(kernel))


def generate_waveform(
    data,
    modulation: str,
    rrc_rolloff: float,
    oversampling: int,
    seed=None,
    span_symbols: int = 32,
    symbol_rate: float = 10.7e9,
) -> tuple[ComplexSignal, np.ndarray]:
    """Pulse-shaped transmit burst, normalized to exactly unit average power.

    ``data`` is a symbol count (random symbols drawn with ``seed``), a bit
    array (mapped onto the constellation), or a complex symbol array. Pulse
    shaping is circular, so the burst has no edge transients. Returns the
    waveform and the symbols it carries.
    """
    if oversampling < 2 or int(oversampling) != oversampling:
        raise ValueError("oversampling must be an integer >= 2")
    if isinstance(data, (int, np.integer)):
        rng = np.random.default_rng(seed)
        pts = constellation(modulation)
        symbols = pts[rng.integers(len(pts), size=int(data))]
    else:
        arr = np.asarray(data)
        symbols = map_bits(arr, modulation) if not np.iscomplexobj(arr) else arr.astype(np.complex128)
    sps = int(oversampling)
    up = np.zeros(len(symbols) * sps, dtype=np.complex128)
    up[::sps] = symbols
    shaped = _circular_filter(up, rrc_taps(rrc_rolloff, sps, span_symbols))
    shaped = shaped / math.sqrt(float(np.mean(np.abs(shaped) ** 2)))
    sig = ComplexSignal(shaped, sample_rate=symbol_rate * sps, symbol_rate=symbol_rate)
    return sig, symbols


def receive_symbols(signal: ComplexSignal, rolloff: float, span_symbols: int = 32) -> np.ndarray:
    """Matched filter (circular) and symbol-instant downsampling."""
    sps = signal.oversampling
    if abs(sps - round(sps)) > 1e-9:
        raise ValueError("receiver needs an integer oversampling factor")
    sps = int(round(sps))
    filtered = _circular_filter(signal.samples, rrc_taps(rolloff, sps, span_symbols))
    return filtered[::sps]


def nearest_symbols(estimates: np.ndarray, modulation: str) -> np.ndarray:
    """Power normalization followed by nearest-constellation decisions."""
    pts = constellation(modulation)
    est = np.asarray(estimates, dtype=np.complex128)
    mean_power = float(np.mean(np.abs(est) ** 2))
    if mean_power == 0:
        raise ValueError("degenerate all-zero input")
    normalized = est / math.sqrt(mean_power)
    idx = np.argmin(np.abs(normalized[:, None] - pts[None, :]), axis=1)
    return pts[idx]


def resample(signal: ComplexSignal, new_oversampling: int) -> ComplexSignal:
    """Bandlimited sample-rate change by FFT spectrum truncation/extension."""
    n = len(signal.samples)
    new_rate = signal.symbol_rate * new_oversampling
    n_new = int(round(n * new_rate / signal.sample_rate))
    if abs(n * new_rate / signal.sample_rate - n_new) > 1e-9:
        raise ValueError("resampling requires commensurate burst lengths")
    spec = np.fft.fft(signal.samples)
    out = np.zeros(n_new, dtype=np.complex128)
    half = min(n, n_new) // 2
    out[:half] = spec[:half]
    out[-half:] = spec[-half:]
    samples = np.fft.ifft(out) * (n_new / n)
    return ComplexSignal(samples, sample_rate=new_rate, symbol_rate=signal.symbol_rate)


# ---------------------------------------------------------------------------
# Split-step propagation and frequency-domain backpropagation
# ---------------------------------------------------------------------------


def _effective_length(delta: float, alpha: float) -> float:
    return delta if alpha == 0 else (1.0 - math.exp(-alpha * delta)) / alpha


def _ase_variance(fiber: FiberParams, sample_rate: float) -> float:
    """Complex noise variance added by one amplifier over the simulation band."""
    gain = math.exp(fiber.alpha * fiber.span_length)
    if gain <= 1.0:
        return 0.0
    nf_lin = 10.0 ** (fiber.amp_noise_figure_db / 10.0)
    n_sp = nf_lin / 2.0 * gain / (gain - 1.0)
    nu = _LIGHTSPEED / fiber.carrier_wavelength
    return n_sp * (gain - 1.0) * _PLANCK * nu * sample_rate


def ssfm_propagate(
    signal: ComplexSignal,
    fiber: FiberParams,
    steps_per_span: int,
    seed=None,
) -> ComplexSignal:
    """Split-step propagation: per step a frequency-domain dispersion
    all-pass, amplitude attenuation, then the Kerr phase rotation with the
    step's effective length; per span a lumped amplifier restoring the loss
    and adding seeded ASE noise (when amplification is on)."""
    if steps_per_span < 1:
        raise ValueError("steps_per_span must be >= 1")
    n = len(signal.samples)
    delta = fiber.span_length / steps_per_span
    omega = 2.0 * math.pi * np.fft.fftfreq(n, d=1.0 / signal.sample_rate)
    spread = abs(fiber.beta2) * fiber.total_length * 2.0 * math.pi * signal.sample_rate
    if spread * signal.sample_rate > 0.25 * n:
        warnings.warn(
            "dispersion-induced delay spread exceeds a quarter of the burst; "
            "increase the burst length",
            stacklevel=2,
        )
    disp = np.exp(0.5j * fiber.beta2 * omega**2 * delta)
    att = math.exp(-fiber.alpha * delta / 2.0)
    phi = fiber.gamma_nl * _effective_length(delta, fiber.alpha)
    amp_gain = math.exp(fiber.alpha * fiber.span_length / 2.0)
    noise_var = _ase_variance(fiber, signal.sample_rate) if fiber.amplification == "edfa" else 0.0
    rng = np.random.default_rng(seed)
    u = signal.samples.copy()
    for _ in range(fiber.num_spans):
        for _ in range(steps_per_span):
            u = np.fft.ifft(np.fft.fft(u) * disp)
            u = u * att
            u = nonlinear_phase(u, phi)
        if fiber.amplification == "edfa":
            u = u * amp_gain
            if noise_var > 0:
                sigma = math.sqrt(noise_var / 2.0)
                u = u + sigma * (rng.normal(size=n) + 1j * rng.normal(size=n))
    return replace(signal, samples=u)


def dbp_frequency_domain(
    signal: ComplexSignal, fiber: FiberParams, steps_per_span: int
) -> ComplexSignal:
    """Digital backpropagation: the split-step chain with negated dispersion
    and nonlinearity and gain-compensated attenuation, run in mirrored step
    order so the noiseless forward chain is inverted exactly."""
    if steps_per_span < 1:
        raise ValueError("steps_per_span must be >= 1")
    n = len(signal.samples)
    delta = fiber.span_length / steps_per_span
    omega = 2.0 * math.pi * np.fft.fftfreq(n, d=1.0 / signal.sample_rate)
    disp_inv = np.exp(-0.5j * fiber.beta2 * omega**2 * delta)
    gain = math.exp(fiber.alpha * delta / 2.0)
    phi = fiber.gamma_nl * _effective_length(delta, fiber.alpha)
    amp_inv = math.exp(-fiber.alpha * fiber.span_length / 2.0)
    u = signal.samples.copy()
    for _ in range(fiber.num_spans):
        if fiber.amplification == "edfa":
            u = u * amp_inv
        for _ in range(steps_per_span):
            u = nonlinear_phase(u, -phi)
            u = u * gain
            u = np.fft.ifft(np.fft.fft(u) * disp_inv)
    return replace(signal, samples=u)


def equalize_linear(signal: ComplexSignal, fiber: FiberParams) -> ComplexSignal:
    """Ideal single-filter chromatic dispersion compensation (no nonlinear
    processing); span gains already cancel span losses, so no gain term."""
    n = len(signal.samples)
    omega = 2.0 * math.pi * np.fft.fftfreq(n, d=1.0 / signal.sample_rate)
    response = np.exp(-0.5j * fiber.beta2 * omega**2 * fiber.total_length)
    return replace(signal, samples=np.fft.ifft(np.fft.fft(signal.samples) * response))


# ---------------------------------------------------------------------------
# FIR dispersion filter design
# ---------------------------------------------------------------------------


def _chirp_fourier_integral(lags: np.ndarray, chirp: float, edge: float) -> np.ndarray:
    """(1/2pi) * integral_{-edge}^{edge} exp(j*chirp*w^2) exp(j*n*w) dw for
    each integer lag n, by completing the square (erf closed form)."""
    lags = np.asarray(lags, dtype=np.float64)
    if abs(chirp) < 1e-18:
        out = np.empty(len(lags), dtype=np.complex128)
        for i, nn in enumerate(lags):
            out[i] = edge / math.pi if nn == 0 else math.sin(nn * edge) / (math.pi * nn)
        return out
    a = -1j * chirp
    sqrt_a = np.sqrt(a)
    shift = lags / (2.0 * chirp)
    upper = special.erf(sqrt_a * (edge + shift))
    lower = special.erf(sqrt_a * (-edge + shift))
    gauss = 0.5 * np.sqrt(np.pi / a) * (upper - lower)
    return np.exp(-1j * lags**2 / (4.0 * chirp)) * gauss / (2.0 * math.pi)


def design_fir(
    method: str,
    num_taps: int,
    step_delta: float,
    beta2: float,
    sample_rate: float,
    bandwidth: float = 1.0,
    max_out_of_band_gain: float | None = None,
    fds_grid: int = 4096,
    regularization: float = 1e-12,
) -> np.ndarray:
    """Short FIR approximation of the single-step inverse-dispersion
    response exp(-j*(beta2/2)*step_delta*(w*fs)^2).

    Methods: "LS" minimizes the in-band squared response error over the
    fraction ``bandwidth`` of the sampling band; "LS-CO" additionally keeps
    the out-of-band power response below ``max_out_of_band_gain``; "FDS"
    truncates the inverse FFT of the response sampled on a dense grid.
    """
    if num_taps % 2 == 0 or num_taps < 1:
        raise ValueError("tap count must be odd and positive")
    if not 0 < bandwidth <= 1:
        raise ValueError("bandwidth fraction must lie in (0, 1]")
    chirp = -0.5 * beta2 * step_delta * sample_rate**2  # response exp(j*chirp*w^2)
    delay = (num_taps - 1) // 2
    lags = np.arange(-delay, delay + 1)
    if method == "FDS":
        w = 2.0 * math.pi * np.fft.fftfreq(fds_grid)
        response = np.exp(1j * chirp * w**2)
        impulse = np.fft.ifft(response)
        return np.concatenate([impulse[-delay:], impulse[: delay + 1]]) if delay else impulse[:1]
    diff = lags[:, None] - lags[None, :]
    q_in = bandwidth * np.sinc(diff * bandwidth)
    v = _chirp_fourier_integral(lags, chirp, math.pi * bandwidth)
    if method == "LS":
        taps = np.linalg.solve(q_in + regularization * np.eye(num_taps), v)
        return taps
    if method == "LS-CO":
        if max_out_of_band_gain is None or max_out_of_band_gain <= 0:
            raise ValueError("LS-CO needs a positive out-of-band gain ceiling")
        q_out = np.eye(num_taps) - q_in

        def gain_at(lam: float) -> float:
            taps = np.linalg.solve(q_in + lam * q_out + regularization * np.eye(num_taps), v)
            return float(np.real(np.conj(taps) @ q_out @ taps))

        if bandwidth >= 1.0 or gain_at(0.0) <= max_out_of_band_gain:
            return np.linalg.solve(q_in + regularization * np.eye(num_taps), v)
        lo, hi = 1e-14, 1.0
        while gain_at(hi) > max_out_of_band_gain and hi < 1e8:
            hi *= 10.0
        from scipy import optimize

        lam = optimize.brentq(lambda l: gain_at(l) - max_out_of_band_gain, lo, hi)
        return np.linalg.solve(q_in + lam * q_out + regularization * np.eye(num_taps), v)
    raise ValueError(f"unknown design method {method!r}")


# ---------------------------------------------------------------------------
# Filter banks and the trained time-domain equalizer
# ---------------------------------------------------------------------------


@dataclass
class FilterBank:
    """Per-step complex FIR taps plus the fixed per-step amplitude gains and
    nonlinear phase coefficients of the time-domain backpropagation chain.
    With the symmetric flag, taps are kept exactly palindromic
    (tap[k] == tap[n-1-k]) by projection."""

    taps: np.ndarray  # (steps, taps_per_step) complex
    gains: np.ndarray  # (steps,)
    nl_phase_coeffs: np.ndarray  # (steps,)
    symmetric: bool = True

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=np.complex128)
        self.gains = np.asarray(self.gains, dtype=np.float64)
        self.nl_phase_coeffs = np.asarray(self.nl_phase_coeffs, dtype=np.float64)
        if self.taps.ndim != 2 or self.taps.shape[1] % 2 == 0:
            raise ValueError("taps must be (steps, odd_count)")
        if self.gains.shape != (self.num_steps,) or self.nl_phase_coeffs.shape != (self.num_steps,):
            raise ValueError("per-step gain/nonlinearity arrays must match the step count")
        if self.symmetric:
            self.taps = 0.5 * (self.taps + self.taps[:, ::-1])

    @property
    def num_steps(self) -> int:
        return self.taps.shape[0]

    @property
    def taps_per_step(self) -> int:
        return self.taps.shape[1]

    def pack(self) -> np.ndarray:
        """Interleaved (re, im) flat view of the taps, step-major."""
        return self.taps.reshape(-1).view(np.float64).copy()

    def with_taps_vector(self, theta: np.ndarray) -> "FilterBank":
        taps = np.asarray(theta, dtype=np.float64).view(np.complex128)
        return FilterBank(
            taps=taps.reshape(self.num_steps, self.taps_per_step).copy(),
            gains=self.gains,
            nl_phase_coeffs=self.nl_phase_coeffs,
            symmetric=self.symmetric,
        )


def make_filter_bank(
    fiber: FiberParams,
    steps_per_span: int,
    taps_per_step: int,
    method: str,
    sample_rate: float,
    bandwidth: float = 1.0,
    symmetric: bool = True,
    max_out_of_band_gain: float | None = None,
) -> FilterBank:
    """Backpropagation filter bank initialized with one designed filter used
    in every step. Gains mirror the forward chain's attenuation/amplification
    between the nonlinear points; nonlinear coefficients are the negated
    per-step effective-length Kerr scales."""
    delta = fiber.span_length / steps_per_span
    taps = design_fir(
        method,
        taps_per_step,
        delta,
        fiber.beta2,
        sample_rate,
        bandwidth=bandwidth,
        max_out_of_band_gain=max_out_of_band_gain,
    )
    num_steps = steps_per_span * fiber.num_spans
    bank_taps = np.tile(taps, (num_steps, 1))
    step_gain = math.exp(fiber.alpha * delta / 2.0)
    amp_inv = (
        math.exp(-fiber.alpha * fiber.span_length / 2.0)
        if fiber.amplification == "edfa"
        else 1.0
    )
    gains = np.full(num_steps, step_gain)
    gains[::steps_per_span] *= amp_inv  # first step of each reversed span
    phi = fiber.gamma_nl * _effective_length(delta, fiber.alpha)
    nl = np.full(num_steps, -phi)
    return FilterBank(taps=bank_taps, gains=gains, nl_phase_coeffs=nl, symmetric=symmetric)


def pretrain_cascade_bank(
    fiber: FiberParams,
    steps_per_span: int,
    taps_per_step: int,
    sample_rate: float,
    band_fraction: float = 0.55,
    symmetric: bool = True,
    grid: int = 1024,
    iterations: int = 6000,
    seed: int = 0,
) -> FilterBank:
    """Filter bank whose short per-step filters are jointly pre-fitted so the
    cascade's combined frequency response matches the total inverse
    dispersion over the signal band.

    A single short filter repeated per step piles its truncation error up
    coherently; fitting all taps jointly lets per-step errors cancel. The fit
    runs in two phases on a frequency grid: first the combined-response
    error alone (from a symmetry-broken repeated-filter start, since
    identical filters receive identical gradients and would stay identical),
    then with an added per-step magnitude penalty pulling each response
    toward all-pass, which keeps intermediate signal powers physical so the
    interleaved nonlinear rotations act on realistic states. The result is an
    initializer for :func:`train_ldbp`, which refines the taps against the
    actual channel.
    """
    delta = fiber.span_length / steps_per_span
    num_steps = steps_per_span * fiber.num_spans
    chirp = -0.5 * fiber.beta2 * delta * sample_rate**2
    w = 2.0 * math.pi * np.fft.fftfreq(grid)
    d_total = np.exp(1j * chirp * num_steps * w**2)
    weight = np.where(np.abs(w) <= band_fraction * math.pi, 1.0, 0.02)
    delay = (taps_per_step - 1) // 2
    basis = np.exp(-1j * np.outer(w, np.arange(-delay, delay + 1)))

    base = make_filter_bank(
        fiber, steps_per_span, taps_per_step, "LS", sample_rate, bandwidth=1.0,
        symmetric=symmetric,
    )
    rng = np.random.default_rng(seed)
    pert = 0.02 * (rng.normal(size=base.taps.shape) + 1j * rng.normal(size=base.taps.shape))
    taps = base.taps + 0.5 * (pert + pert[:, ::-1])

    def fit(taps, vstate, iters, lr, allpass_weight):
        for _ in range(iters):
            resp = basis @ taps.T
            pre = np.ones((grid, num_steps + 1), dtype=np.complex128)
            for i in range(num_steps):
                pre[:, i + 1] = pre[:, i] * resp[:, i]
            suf = np.ones((grid, num_steps + 1), dtype=np.complex128)
            for i in range(num_steps - 1, -1, -1):
                suf[:, i] = suf[:, i + 1] * resp[:, i]
            residual = pre[:, -1] - d_total
            g_combined = (weight * residual / grid)[:, None] * np.conj(
                pre[:, :num_steps] * suf[:, 1:]
            )
            if allpass_weight:
                mag2 = np.abs(resp) ** 2
                g_combined = g_combined + allpass_weight * 2.0 * (
                    (mag2 - 1.0) * resp
                ) * weight[:, None] / grid
            g_taps = (basis.conj().T @ g_combined).T
            g_flat = (2.0 * g_taps.reshape(-1)).view(np.float64)
            vstate = 0.9 * vstate + 0.1 * g_flat**2
            theta = taps.reshape(-1).view(np.float64).copy()
            theta -= lr * g_flat / (np.sqrt(vstate) + 1e-8)
            taps = theta.view(np.complex128).reshape(num_steps, taps_per_step)
            if symmetric:
                taps = 0.5 * (taps + taps[:, ::-1])
        return taps, vstate

    vstate = np.zeros(2 * num_steps * taps_per_step)
    taps, vstate = fit(taps, vstate, iterations, 3e-3, 0.0)
    taps, _ = fit(taps, vstate, iterations, 1e-3, 0.5)
    return FilterBank(
        taps=taps, gains=base.gains, nl_phase_coeffs=base.nl_phase_coeffs,
        symmetric=symmetric,
    )


def ldbp_apply(signal: ComplexSignal, bank: FilterBank) -> ComplexSignal:
    """Feed-forward equalizer: per step a same-length linear convolution
    (scaled by the step gain) followed by the fixed nonlinear rotation."""
    u = signal.samples
    for i in range(bank.num_steps):
        u = bank.gains[i] * conv_same(u, bank.taps[i])
        u = nonlinear_phase(u, bank.nl_phase_coeffs[i])
    return replace(signal, samples=u)


# ---------------------------------------------------------------------------
# Burst simulation, training, and metrics
# ---------------------------------------------------------------------------


def simulate_burst(
    link: LinkConfig,
    num_symbols: int,
    launch_power_dbm: float,
    seed,
    steps_per_span: int | None = None,
) -> tuple[np.ndarray, ComplexSignal]:
    """Transmit a random burst and return (symbols, received waveform at the
    equalizer rate, in physical sqrt(W) units)."""
    entropy = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seeds = entropy.spawn(2)
    tx, symbols = generate_waveform(
        num_symbols,
        link.modulation,
        link.rolloff,
        link.sim_oversampling,
        seed=seeds[0],
        span_symbols=link.rrc_span_symbols,
        symbol_rate=link.symbol_rate,
    )
    power_w = 1e-3 * 10.0 ** (launch_power_dbm / 10.0)
    tx = replace(tx, samples=tx.samples * math.sqrt(power_w))
    steps = steps_per_span if steps_per_span is not None else link.sim_steps_per_span
    rx = ssfm_propagate(tx, link.fiber, steps, seed=seeds[1])
    if link.eq_oversampling != link.sim_oversampling:
        rx = resample(rx, link.eq_oversampling)
    return symbols, rx


def _pipeline_for_burst(
    link: LinkConfig, bank: FilterBank, rx: ComplexSignal, symbols: np.ndarray,
    skip_symbols: int,
) -> LdbpLossPipeline:
    sps = int(round(rx.oversampling))
    mf = rrc_taps(link.rolloff, sps, link.rrc_span_symbols)
    count = len(symbols) - 2 * skip_symbols
    if count < 1:
        raise ValueError("burst too short for the requested evaluation margin")
    sym_idx = np.arange(skip_symbols, skip_symbols + count)
    return LdbpLossPipeline(
        y_in=rx.samples,
        num_steps=bank.num_steps,
        taps_per_step=bank.taps_per_step,
        gains=bank.gains,
        nl_coeffs=bank.nl_phase_coeffs,
        mf_taps=mf,
        sample_indices=sym_idx * sps,
        target_symbols=symbols[sym_idx],
    )


@dataclass
class LdbpTrainConfig:
    """Joint tap optimization settings (nonlinearities stay fixed)."""

    iterations: int = 200
    optimizer: str = "rmsprop"
    learning_rate: float = 1e-4
    rmsprop_decay: float = 0.9
    rmsprop_epsilon: float = 1e-8
    burst_symbols: int = 1024
    launch_power_dbm: float = 2.0
    skip_symbols: int = 128
    train_steps_per_span: int | None = None  # None -> link.sim_steps_per_span
    seed: int = 0


def train_ldbp(
    link: LinkConfig, bank_init: FilterBank, cfg: LdbpTrainConfig
) -> tuple[FilterBank, list[float]]:
    """SGD-family optimization of all filter taps jointly against the mean
    squared symbol error on freshly simulated bursts. Deterministic given the
    seed; the symmetric constraint is re-projected after every step."""
    from .train import OptimizerState, optimizer_step

    theta = bank_init.pack()
    bank = bank_init
    state = OptimizerState()
    losses: list[float] = []
    burst_seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.iterations)
    for it in range(cfg.iterations):
        symbols, rx = simulate_burst(
            link,
            cfg.burst_symbols,
            cfg.launch_power_dbm,
            burst_seeds[it],
            steps_per_span=cfg.train_steps_per_span,
        )
        pipe = _pipeline_for_burst(link, bank, rx, symbols, cfg.skip_symbols)
        loss, gradient = pipe.loss_and_grad(theta)
        if not math.isfinite(loss):
            raise FloatingPointError(f"tap training diverged at iteration {it}")
        losses.append(loss)
        theta, state = optimizer_step(theta, gradient, cfg, state)
        if bank.symmetric:
            taps = theta.view(np.complex128).reshape(bank.num_steps, bank.taps_per_step)
            taps = 0.5 * (taps + taps[:, ::-1])
            theta = taps.reshape(-1).view(np.float64).copy()
        bank = bank.with_taps_vector(theta)
    return bank, losses


def evaluate_bank_loss(link: LinkConfig, bank: FilterBank, rx: ComplexSignal,
                       symbols: np.ndarray, skip_symbols: int = 128) -> float:
    """Mean squared symbol error of a bank on a fixed received burst."""
    pipe = _pipeline_for_burst(link, bank, rx, symbols, skip_symbols)
    return pipe.loss(bank.pack())


def effective_snr(recovered: np.ndarray, transmitted: np.ndarray) -> float:
    """Signal-to-distortion ratio in dB after least-squares complex gain
    normalization, capped at the +80 dB sentinel."""
    rec = np.asarray(recovered, dtype=np.complex128)
    ref = np.asarray(transmitted, dtype=np.complex128)
    if rec.shape != ref.shape:
        raise ValueError("recovered/transmitted lengths disagree")
    if len(rec) < 1000:
        raise ValueError("effective SNR needs at least 1000 symbols")
    denom = np.vdot(rec, rec).real
    sig = np.mean(np.abs(ref) ** 2)
    if denom == 0 or sig == 0:
        raise ValueError("degenerate all-zero input")
    a = np.vdot(rec, ref) / denom
    err = np.mean(np.abs(a * rec - ref) ** 2)
    if err <= sig * 1e-8:
        return 80.0
    return min(10.0 * math.log10(sig / err), 80.0)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def save_filter_bank(bank: FilterBank, path) -> None:
    """Structured text: step count, tap count, flags, then per step one gain
    line, one nonlinearity line, and taps as "re im" decimal pairs."""
    with open(path, "w") as fh:
        fh.write("commlearn-filterbank\nversion: 1\n")
        fh.write(f"steps: {bank.num_steps}\n")
        fh.write(f"taps_per_step: {bank.taps_per_step}\n")
        fh.write(f"symmetric: {int(bank.symmetric)}\n")
        for i in range(bank.num_steps):
            fh.write(f"step: {i}\n")
            fh.write(f"gain: {bank.gains[i]!r}\n")
            fh.write(f"nl_phase: {bank.nl_phase_coeffs[i]!r}\n")
            for tap in bank.taps[i]:
                fh.write(f"{tap.real!r} {tap.imag!r}\n")


def load_filter_bank(path) -> FilterBank:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    if lines[0] != "commlearn-filterbank":
        raise ValueError("not a commlearn-filterbank file")
    steps = int(lines[2].split(":")[1])
    tps = int(lines[3].split(":")[1])
    symmetric = bool(int(lines[4].split(":")[1]))
    taps = np.zeros((steps, tps), dtype=np.complex128)
    gains = np.zeros(steps)
    nl = np.zeros(steps)
    i = 5
    for s in range(steps):
        assert lines[i].startswith("step:")
        gains[s] = float(lines[i + 1].split(":")[1])
        nl[s] = float(lines[i + 2].split(":")[1])
        for k in range(tps):
            re, im = lines[i + 3 + k].split()
            taps[s, k] = float(re) + 1j * float(im)
        i += 3 + tps
    return FilterBank(taps=taps, gains=gains, nl_phase_coeffs=nl, symmetric=symmetric)


def save_waveform(signal: ComplexSignal, path) -> None:
    """Binary interleaved float64 (re, im) prefixed by a small text header."""
    header = (
        "commlearn-waveform\nversion: 1\n"
        f"sample_rate: {signal.sample_rate!r}\n"
        f"symbol_rate: {signal.symbol_rate!r}\n"
        f"length: {len(signal.samples)}\n\n"
    )
    interleaved = np.empty(2 * len(signal.samples))
    interleaved[0::2] = signal.samples.real
    interleaved[1::2] = signal.samples.imag
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(interleaved.tobytes())


def load_waveform(path) -> ComplexSignal:
    with open(path, "rb") as fh:
        blob = fh.read()
    head, _, body = blob.partition(b"\n\n")
    fields = dict(
        ln.split(": ", 1) for ln in head.decode("ascii").splitlines() if ": " in ln
    )
    n = int(fields["length"])
    flat = np.frombuffer(body, dtype=np.float64, count=2 * n)
    samples = flat[0::2] + 1j * flat[1::2]
    return ComplexSignal(
        samples,
        sample_rate=float(fields["sample_rate"]),
        symbol_rate=float(fields["symbol_rate"]),
    )
