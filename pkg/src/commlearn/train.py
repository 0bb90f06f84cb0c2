"""Decoder training: loss functions, SGD/RMSProp, gradient clipping,
SNR-sampled data generation, and the mini-batch training loop."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace

import numpy as np

from . import grad
from .codes import TannerGraph, gf2_nullspace
from .wbp import WeightSet

__all__ = [
    "TrainConfig",
    "LossLogRow",
    "single_loss",
    "multi_loss",
    "cross_entropy_loss",
    "optimizer_step",
    "OptimizerState",
    "clip_gradient",
    "sample_minibatch",
    "evaluate_loss",
    "train_decoder",
    "tune_rrd",
    "save_weightset",
    "load_weightset",
    "write_loss_log",
]


# ---------------------------------------------------------------------------
# Losses on soft outputs
# ---------------------------------------------------------------------------


def _logit(o: np.ndarray) -> np.ndarray:
    return np.log(o) - np.log1p(-o)


def single_loss(outputs: np.ndarray, bits: np.ndarray) -> float:
    """Soft bit-error surrogate: mean over bits of
    [1 + (o/(1-o))^(1-2x)]^-1, evaluated through the numerically stable
    logit form sigma((2x-1) * logit(o))."""
    o = np.asarray(outputs, dtype=np.float64)
    x = np.asarray(bits)
    if ((o <= 0) | (o >= 1)).any():
        raise ValueError("soft outputs must lie strictly inside (0, 1)")
    z = (2.0 * x - 1.0) * _logit(o)
    from .wbp import logistic

    return float(logistic(z).mean())


def multi_loss(outputs_per_iteration: np.ndarray, bits: np.ndarray) -> float:
    """Mean of the per-iteration single losses; leading axis is iterations."""
    outs = np.asarray(outputs_per_iteration, dtype=np.float64)
    if outs.ndim < 2:
        raise ValueError("expected a leading iteration axis")
    return float(np.mean([single_loss(outs[t], bits) for t in range(outs.shape[0])]))


def cross_entropy_loss(outputs: np.ndarray, bits: np.ndarray) -> float:
    """Binary cross entropy with o the probability of bit 0; inputs are
    clamped away from {0, 1} by 1e-12."""
    o = np.clip(np.asarray(outputs, dtype=np.float64), 1e-12, 1.0 - 1e-12)
    x = np.asarray(bits).astype(np.float64)
    return float(-np.mean((1.0 - x) * np.log(o) + x * np.log(1.0 - o)))


# ---------------------------------------------------------------------------
# Optimizers and clipping
# ---------------------------------------------------------------------------


@dataclass
class OptimizerState:
    """Accumulators carried between optimizer steps (RMSProp second moment)."""

    square_avg: np.ndarray | None = None


@dataclass
class TrainConfig:
    """Hyperparameters of the decoder training protocol."""

    optimizer: str = "rmsprop"
    learning_rate: float = 1e-3
    rmsprop_decay: float = 0.9
    rmsprop_epsilon: float = 1e-8
    batch_size: int = 100
    minibatches_per_epoch: int = 1000
    epochs: int = 20
    snr_range_db: tuple[float, float] = (1.0, 6.0)
    grad_clip_norm: float = 0.1
    clip_style: str = "norm"  # "norm" (global L2) or "value" (elementwise)
    llr_clip: float = 15.0
    loss_type: str = "modified"  # "modified" | "cross-entropy"
    loss_scope: str = "multi"  # "multi" | "single"
    data_source: str = "random-codewords"  # or "all-zero"
    seed: int = 0

    def __post_init__(self):
        if self.snr_range_db[0] > self.snr_range_db[1]:
            raise ValueError("SNR range must be ordered low..high")
        if min(self.batch_size, self.minibatches_per_epoch) < 1 or self.epochs < 0:
            raise ValueError("counts must be positive (epochs may be 0)")
        if self.grad_clip_norm <= 0 or self.llr_clip <= 0:
            raise ValueError("clip thresholds must be positive")
        if self.optimizer not in ("sgd", "rmsprop"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.data_source not in ("random-codewords", "all-zero"):
            raise ValueError(f"unknown data source {self.data_source!r}")


def clip_gradient(gradient: grad.GradientVector, threshold: float,
                  style: str = "norm") -> grad.GradientVector:
    """Scale the gradient to the threshold when its global L2 norm exceeds it
    (style "norm"), or clamp each entry to +-threshold (style "value")."""
    if threshold <= 0:
        raise ValueError("clip threshold must be positive")
    if style == "norm":
        if gradient.norm <= threshold:
            return gradient
        return grad.GradientVector(gradient.values * (threshold / gradient.norm))
    if style == "value":
        return grad.GradientVector(np.clip(gradient.values, -threshold, threshold))
    raise ValueError(f"unknown clip style {style!r}")


def optimizer_step(params: np.ndarray, gradient: grad.GradientVector,
                   cfg: TrainConfig, state: OptimizerState) -> tuple[np.ndarray, OptimizerState]:
    """One parameter update. SGD: p -= lr * g. RMSProp: second-moment decay
    then p -= lr * g / (sqrt(v) + eps), elementwise."""
    g = gradient.values
    if g.shape != np.shape(params):
        raise ValueError("gradient and parameter shapes disagree")
    if cfg.optimizer == "sgd":
        return params - cfg.learning_rate * g, state
    v = state.square_avg if state.square_avg is not None else np.zeros_like(g)
    v = cfg.rmsprop_decay * v + (1.0 - cfg.rmsprop_decay) * g * g
    update = cfg.learning_rate * g / (np.sqrt(v) + cfg.rmsprop_epsilon)
    return params - update, OptimizerState(square_avg=v)


# ---------------------------------------------------------------------------
# Data generation
# ---------------------------------------------------------------------------


def _generator_rows(graph: TannerGraph) -> np.ndarray:
    gmat = getattr(graph, "_gen_rows_cache", None)
    if gmat is None:
        gmat = gf2_nullspace(graph.to_matrix().bits)
        graph._gen_rows_cache = gmat
    return gmat


def sample_minibatch(graph: TannerGraph, cfg: TrainConfig, rng: np.random.Generator):
    """Draw one mini-batch: per sample an Eb/N0 uniform over the configured
    range, a codeword per the data source, and an AWGN observation.
    Returns (bits, llr) arrays of shape (batch, N)."""
    n = graph.n_vars
    gen = _generator_rows(graph)
    k = gen.shape[0]
    rate = k / n
    ebn0 = rng.uniform(cfg.snr_range_db[0], cfg.snr_range_db[1], size=cfg.batch_size)
    if cfg.data_source == "random-codewords":
        info = rng.integers(0, 2, size=(cfg.batch_size, k))
        bits = (info @ gen) % 2
    else:
        bits = np.zeros((cfg.batch_size, n), dtype=np.int64)
    sigma2 = 1.0 / (2.0 * rate * 10.0 ** (ebn0 / 10.0))
    symbols = 1.0 - 2.0 * bits.astype(np.float64)
    noise = rng.normal(0.0, 1.0, size=(cfg.batch_size, n)) * np.sqrt(sigma2)[:, None]
    observation = symbols + noise
    llr = 2.0 * observation / sigma2[:, None]
    return bits, llr


def evaluate_loss(graph: TannerGraph, weights: WeightSet, bits: np.ndarray,
                  llr: np.ndarray, loss_type: str = "modified",
                  loss_scope: str = "multi") -> float:
    """Loss of a fixed weight set on a fixed batch (no gradients)."""
    pipe = grad.DecoderLossPipeline(graph, weights, llr, bits, loss_type, loss_scope)
    return pipe.loss(weights.pack())


# ---------------------------------------------------------------------------
# Training loop
# ---------------------------------------------------------------------------


@dataclass
class LossLogRow:
    epoch: int
    minibatch: int
    loss: float
    grad_norm_preclip: float


def train_decoder(graph: TannerGraph, initial: WeightSet,
                  cfg: TrainConfig) -> tuple[WeightSet, list[LossLogRow]]:
    """Mini-batch training of the unrolled decoder.

    Per mini-batch: sample transmit-receive pairs, accumulate the batch-mean
    loss gradient through the full unrolled decode, clip, and step. The run
    is deterministic given the config seed; it aborts on a non-finite loss.
    """
    initial = replace(initial, llr_clip=cfg.llr_clip)
    rng = np.random.default_rng(cfg.seed)
    theta = initial.pack()
    opt_state = OptimizerState()
    log: list[LossLogRow] = []
    for epoch in range(cfg.epochs):
        for mb in range(cfg.minibatches_per_epoch):
            bits, llr = sample_minibatch(graph, cfg, rng)
            pipe = grad.DecoderLossPipeline(graph, initial, llr, bits,
                                            cfg.loss_type, cfg.loss_scope)
            loss, gradient = pipe.loss_and_grad(theta)
            if not math.isfinite(loss):
                raise FloatingPointError(
                    f"training diverged at epoch {epoch} minibatch {mb}"
                )
            log.append(LossLogRow(epoch, mb, loss, gradient.norm))
            gradient = clip_gradient(gradient, cfg.grad_clip_norm, cfg.clip_style)
            theta, opt_state = optimizer_step(theta, gradient, cfg, opt_state)
    return initial.replace_trainable(theta), log


def tune_rrd(graph: TannerGraph, weights: WeightSet, mixing_grid, damping_grid,
             bits: np.ndarray, llr: np.ndarray, num_blocks: int,
             permutation_seed: int = 0) -> tuple[float, float]:
    """Pick the (mixing, damping) pair with the lowest bit-error count on a
    fixed validation batch. The permuted-cascade decoder is tuned by direct
    search because it is evaluated, not differentiated."""
    from .wbp import RrdConfig, rrd_decode

    best = None
    for beta in mixing_grid:
        for gamma in damping_grid:
            cfg = RrdConfig(num_blocks=num_blocks, mixing=float(beta),
                            damping=float(gamma), permutation_seed=permutation_seed)
            result = rrd_decode(llr, graph, weights, cfg)
            errors = int((result.hard_decisions != bits).sum())
            key = (errors, float(beta), float(gamma))
            if best is None or key < best:
                best = key
    return best[1], best[2]


# ---------------------------------------------------------------------------
# Checkpoint format (versioned structured text)
# ---------------------------------------------------------------------------

_CKPT_HEADER = "commlearn-weightset"
_CKPT_VERSION = 1


def _write_array(fh: io.TextIOBase, name: str, arr: np.ndarray | None) -> None:
    if arr is None:
        return
    arr = np.asarray(arr, dtype=np.float64)
    fh.write(f"section: {name}\n")
    fh.write("shape: " + (" ".join(str(d) for d in arr.shape) or "scalar") + "\n")
    for v in np.ravel(arr):
        fh.write(repr(float(v)) + "\n")


def save_weightset(weights: WeightSet, path) -> None:
    """Write a decoder checkpoint as versioned, diffable text. Values are
    full-precision decimal reprs, so save/load round-trips exactly."""
    with open(path, "w") as fh:
        fh.write(f"format: {_CKPT_HEADER}\n")
        fh.write(f"version: {_CKPT_VERSION}\n")
        fh.write(f"mode: {weights.mode}\n")
        fh.write(f"iterations: {weights.iterations}\n")
        fh.write(f"temporal_sharing: {int(weights.temporal_sharing)}\n")
        fh.write(f"damping_trainable: {int(weights.damping_trainable)}\n")
        fh.write(f"llr_clip: {weights.llr_clip!r}\n")
        fh.write(f"n_vars: {weights.n_vars if weights.n_vars is not None else -1}\n")
        fh.write(f"n_edges: {weights.n_edges if weights.n_edges is not None else -1}\n")
        _write_array(fh, "channel_weights", weights.channel_weights)
        _write_array(fh, "edge_weights", weights.edge_weights)
        _write_array(fh, "marginal_channel_weights", weights.marginal_channel_weights)
        _write_array(fh, "marginal_edge_weights", weights.marginal_edge_weights)
        _write_array(fh, "damping", weights.damping)
        fh.write("end\n")


def load_weightset(path) -> WeightSet:
    """Read a checkpoint written by :func:`save_weightset`."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    header: dict[str, str] = {}
    i = 0
    while i < len(lines) and not lines[i].startswith(("section:", "end")):
        key, _, value = lines[i].partition(":")
        header[key.strip()] = value.strip()
        i += 1
    if header.get("format") != _CKPT_HEADER:
        raise ValueError(f"not a {_CKPT_HEADER} file")
    if int(header.get("version", -1)) != _CKPT_VERSION:
        raise ValueError(f"unsupported checkpoint version {header.get('version')}")
    arrays: dict[str, np.ndarray] = {}
    while i < len(lines) and lines[i] != "end":
        name = lines[i].split(":", 1)[1].strip()
        shape_txt = lines[i + 1].split(":", 1)[1].strip()
        shape = () if shape_txt == "scalar" else tuple(int(x) for x in shape_txt.split())
        count = int(np.prod(shape, dtype=int)) if shape else 1
        vals = np.array([float(lines[i + 2 + j]) for j in range(count)])
        arrays[name] = vals.reshape(shape)
        i += 2 + count
    n_vars = int(header["n_vars"])
    n_edges = int(header["n_edges"])
    return WeightSet(
        mode=header["mode"],
        iterations=int(header["iterations"]),
        temporal_sharing=bool(int(header["temporal_sharing"])),
        channel_weights=arrays.get("channel_weights"),
        edge_weights=arrays.get("edge_weights"),
        marginal_channel_weights=arrays.get("marginal_channel_weights"),
        marginal_edge_weights=arrays.get("marginal_edge_weights"),
        damping=arrays.get("damping", np.asarray(1.0)),
        damping_trainable=bool(int(header["damping_trainable"])),
        llr_clip=float(header["llr_clip"]),
        n_vars=None if n_vars < 0 else n_vars,
        n_edges=None if n_edges < 0 else n_edges,
    )


def write_loss_log(log: list[LossLogRow], path) -> None:
    """Loss-log CSV with columns (epoch, minibatch, loss, grad_norm_preclip)."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "minibatch", "loss", "grad_norm_preclip"])
        for row in log:
            writer.writerow([row.epoch, row.minibatch, repr(row.loss), repr(row.grad_norm_preclip)])
