"""Weighted, damped belief-propagation decoding on Tanner graphs.

The decoder is the unrolled message-passing recursion: per iteration, a
variable-to-check update (channel-weighted LLR plus weighted incoming
messages), a check-to-variable update (tanh-product rule, magnitude-clipped),
damping of both directions, and a sigmoid marginalization. Leave-one-out
aggregations use ascending-neighbor prefix/suffix schedules, which fixes the
floating-point evaluation order; any implementation following the same
schedule reproduces the messages bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .codes import Permutation, TannerGraph, sample_automorphism

__all__ = [
    "WeightSet",
    "MessageState",
    "RrdConfig",
    "RrdResult",
    "logistic",
    "variable_to_check_pre",
    "check_to_variable_pre",
    "damp",
    "marginalize",
    "decode",
    "rrd_decode",
    "syndrome",
]

_ONE_MINUS_EPS = 1.0 - 2.0**-53


def logistic(x: np.ndarray) -> np.ndarray:
    """Logistic function with the exact flip identity
    logistic(-x) == 1 - logistic(x) and range clamped inside (0, 1)."""
    ax = np.abs(x)
    p = 1.0 / (1.0 + np.exp(-ax))
    p = np.minimum(p, _ONE_MINUS_EPS)
    return np.where(x >= 0, p, 1.0 - p)


# ---------------------------------------------------------------------------
# Trainable parameters
# ---------------------------------------------------------------------------

_MODES = ("plain", "simple-scaled", "fully-weighted")


@dataclass
class WeightSet:
    """All decoder parameters and their sharing metadata.

    Weight shapes by mode (T = iterations, N = variables, E = edges):

    =============== ======================= =======================
    mode            temporally shared        per-iteration
    =============== ======================= =======================
    plain           ``None`` (all 1)         ``None``
    simple-scaled   scalar ``()``            ``(T,)``
    fully-weighted  ``(N,)`` / ``(E,)``      ``(T, N)`` / ``(T, E)``
    =============== ======================= =======================

    ``damping`` has shape ``()`` or ``(T,)`` with values in [0, 1]; during
    training it is reparameterized through a sigmoid so the constraint is
    maintained. ``marginal_channel_weights``/``marginal_edge_weights`` default
    to ``None``, meaning the marginalization reuses the message weights of the
    same iteration.
    """

    mode: str
    iterations: int
    temporal_sharing: bool = True
    channel_weights: np.ndarray | None = None
    edge_weights: np.ndarray | None = None
    damping: np.ndarray = field(default_factory=lambda: np.asarray(1.0))
    damping_trainable: bool = False
    llr_clip: float = 15.0
    n_vars: int | None = None
    n_edges: int | None = None
    marginal_channel_weights: np.ndarray | None = None
    marginal_edge_weights: np.ndarray | None = None

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.iterations < 1:
            raise ValueError("iteration count must be >= 1")
        if self.llr_clip <= 0:
            raise ValueError("LLR clip threshold must be positive")
        self.damping = np.asarray(self.damping, dtype=np.float64)
        if self.damping.ndim not in (0, 1):
            raise ValueError("damping must be a scalar or per-iteration vector")
        if self.damping.ndim == 1 and len(self.damping) != self.iterations:
            raise ValueError("per-iteration damping length must equal iterations")
        if ((self.damping < 0) | (self.damping > 1)).any():
            raise ValueError("damping must lie in [0, 1]")
        if self.mode == "plain":
            if self.channel_weights is not None or self.edge_weights is not None:
                raise ValueError("plain mode keeps all weights at 1")
        else:
            self.channel_weights = np.asarray(self.channel_weights, dtype=np.float64)
            self.edge_weights = np.asarray(self.edge_weights, dtype=np.float64)
            self._check_shape("channel_weights", self.channel_weights, self.n_vars)
            self._check_shape("edge_weights", self.edge_weights, self.n_edges)
        for name in ("marginal_channel_weights", "marginal_edge_weights"):
            w = getattr(self, name)
            if w is not None:
                if self.mode == "plain":
                    raise ValueError("plain mode cannot carry marginal weights")
                setattr(self, name, np.asarray(w, dtype=np.float64))

    def _check_shape(self, name: str, arr: np.ndarray, spatial: int | None):
        if self.mode == "simple-scaled":
            want = () if self.temporal_sharing else (self.iterations,)
        else:
            if spatial is None:
                raise ValueError("fully-weighted mode needs n_vars and n_edges")
            want = (spatial,) if self.temporal_sharing else (self.iterations, spatial)
        if arr.shape != want:
            raise ValueError(f"{name} has shape {arr.shape}, expected {want}")

    # -- constructors ------------------------------------------------------

    @classmethod
    def plain(cls, iterations: int, damping=1.0, damping_trainable=False, llr_clip=15.0):
        return cls(
            mode="plain",
            iterations=iterations,
            damping=np.asarray(damping, dtype=np.float64),
            damping_trainable=damping_trainable,
            llr_clip=llr_clip,
        )

    @classmethod
    def simple_scaled(
        cls,
        iterations: int,
        temporal_sharing: bool = True,
        channel_init: float = 1.0,
        edge_init: float = 1.0,
        damping=1.0,
        damping_trainable: bool = True,
        llr_clip: float = 15.0,
    ):
        shape = () if temporal_sharing else (iterations,)
        return cls(
            mode="simple-scaled",
            iterations=iterations,
            temporal_sharing=temporal_sharing,
            channel_weights=np.full(shape, channel_init),
            edge_weights=np.full(shape, edge_init),
            damping=np.asarray(damping, dtype=np.float64),
            damping_trainable=damping_trainable,
            llr_clip=llr_clip,
        )

    @classmethod
    def fully_weighted(
        cls,
        graph: TannerGraph,
        iterations: int,
        temporal_sharing: bool = True,
        damping=1.0,
        damping_trainable: bool = True,
        llr_clip: float = 15.0,
    ):
        vshape = (graph.n_vars,) if temporal_sharing else (iterations, graph.n_vars)
        eshape = (graph.num_edges,) if temporal_sharing else (iterations, graph.num_edges)
        return cls(
            mode="fully-weighted",
            iterations=iterations,
            temporal_sharing=temporal_sharing,
            channel_weights=np.ones(vshape),
            edge_weights=np.ones(eshape),
            damping=np.asarray(damping, dtype=np.float64),
            damping_trainable=damping_trainable,
            llr_clip=llr_clip,
            n_vars=graph.n_vars,
            n_edges=graph.num_edges,
        )

    # -- per-iteration accessors (scalar or array, broadcastable) ----------

    def channel_weight(self, t: int):
        """Channel-LLR weight of iteration t (1-based)."""
        return self._select(self.channel_weights, t)

    def edge_weight(self, t: int):
        """Message weight of iteration t (1-based)."""
        return self._select(self.edge_weights, t)

    def marginal_channel_weight(self, t: int):
        w = self.marginal_channel_weights
        return self.channel_weight(t) if w is None else self._select(w, t)

    def marginal_edge_weight(self, t: int):
        w = self.marginal_edge_weights
        return self.edge_weight(t) if w is None else self._select(w, t)

    def _select(self, w, t: int):
        if w is None:
            return 1.0
        if self.mode == "simple-scaled":
            return w if self.temporal_sharing else w[t - 1]
        return w if self.temporal_sharing else w[t - 1]

    def damping_at(self, t: int) -> float:
        g = self.damping
        return float(g) if g.ndim == 0 else float(g[t - 1])

    # -- flat trainable-parameter vector -----------------------------------

    def _segments(self) -> list[tuple[str, tuple[int, ...]]]:
        segs = []
        if self.mode != "plain":
            segs.append(("channel_weights", self.channel_weights.shape))
            segs.append(("edge_weights", self.edge_weights.shape))
            if self.marginal_channel_weights is not None:
                segs.append(("marginal_channel_weights", self.marginal_channel_weights.shape))
            if self.marginal_edge_weights is not None:
                segs.append(("marginal_edge_weights", self.marginal_edge_weights.shape))
        if self.damping_trainable:
            segs.append(("damping", self.damping.shape))
        return segs

    @property
    def num_trainable(self) -> int:
        return sum(int(np.prod(s, dtype=int)) for _, s in self._segments())

    def pack(self) -> np.ndarray:
        """Flatten trainable parameters; damping is stored as its logit."""
        parts = []
        for name, _ in self._segments():
            arr = getattr(self, name)
            if name == "damping":
                g = np.clip(arr, 1e-12, 1 - 1e-12)
                arr = np.log(g / (1.0 - g))
            parts.append(np.ravel(arr).astype(np.float64))
        if not parts:
            return np.zeros(0)
        return np.concatenate(parts)

    def replace_trainable(self, vec: np.ndarray) -> "WeightSet":
        """New WeightSet with trainable parameters taken from ``vec``."""
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (self.num_trainable,):
            raise ValueError(f"expected {self.num_trainable} parameters, got {vec.shape}")
        updates = {}
        pos = 0
        for name, shape in self._segments():
            size = int(np.prod(shape, dtype=int))
            chunk = vec[pos : pos + size].reshape(shape)
            if name == "damping":
                chunk = logistic(chunk)
            updates[name] = chunk
            pos += size
        return replace(self, **updates)


# ---------------------------------------------------------------------------
# Padded edge layout (cached per graph)
# ---------------------------------------------------------------------------


class _EdgeLayout:
    """Padded gather/scatter indices for vectorized message passing.

    Check-side slots list each check's edges by ascending variable index;
    variable-side slots list each variable's edges by ascending check index.
    Padded slots point at a sentinel edge that always reads as zero.
    """

    def __init__(self, graph: TannerGraph) -> None:
        self.graph = graph
        e = graph.num_edges
        self.dc_max = max((len(nb) for nb in graph.check_neighbors), default=0)
        self.dv_max = max((len(nb) for nb in graph.var_neighbors), default=0)
        self.cn_edge = np.full((graph.n_checks, self.dc_max), e, dtype=np.int64)
        self.vn_edge = np.full((graph.n_vars, max(self.dv_max, 1)), e, dtype=np.int64)
        edge_ids_by_check: dict[int, list[int]] = {c: [] for c in range(graph.n_checks)}
        edge_ids_by_var: dict[int, list[int]] = {v: [] for v in range(graph.n_vars)}
        for eid, (c, v) in enumerate(zip(graph.edge_check, graph.edge_var)):
            edge_ids_by_check[int(c)].append(eid)
            edge_ids_by_var[int(v)].append(eid)
        for c, ids in edge_ids_by_check.items():
            self.cn_edge[c, : len(ids)] = ids
        for v, ids in edge_ids_by_var.items():
            self.vn_edge[v, : len(ids)] = ids
        self.cn_mask = self.cn_edge < e
        self.vn_mask = self.vn_edge < e
        # edge order within the check-side padding equals global edge order
        self.var_of_edge = graph.edge_var
        self.vn_edge_order = self.vn_edge[self.vn_mask]  # variable-major edge ids

    def pad_edges(self, edge_arr: np.ndarray, index: np.ndarray, fill: float) -> np.ndarray:
        """Gather a (..., E) edge array into the padded (..., nodes, slots) view."""
        padded_src = np.concatenate(
            [edge_arr, np.full(edge_arr.shape[:-1] + (1,), fill)], axis=-1
        )
        return padded_src[..., index]

    def scatter_checks(self, padded: np.ndarray) -> np.ndarray:
        return padded[..., self.cn_mask]

    def scatter_vars(self, padded: np.ndarray) -> np.ndarray:
        out = np.empty(padded.shape[:-2] + (self.graph.num_edges,))
        out[..., self.vn_edge_order] = padded[..., self.vn_mask]
        return out


_LAYOUTS: dict[int, _EdgeLayout] = {}


def _layout_for(graph: TannerGraph) -> _EdgeLayout:
    layout = _LAYOUTS.get(id(graph))
    if layout is None or layout.graph is not graph:
        layout = _EdgeLayout(graph)
        _LAYOUTS[id(graph)] = layout
    return layout


# ---------------------------------------------------------------------------
# Message state
# ---------------------------------------------------------------------------


@dataclass
class MessageState:
    """Per-edge messages plus per-iteration soft outputs.

    ``outputs[t-1]`` is the iteration-t estimate of Pr(bit = 0); ``presigmoid``
    holds the matching posterior LLRs (the sigmoid's argument).
    """

    graph: TannerGraph
    var_to_check: np.ndarray
    check_to_var: np.ndarray
    outputs: np.ndarray
    presigmoid: np.ndarray
    hard_decisions: np.ndarray

    @classmethod
    def initial(cls, graph: TannerGraph, batch_shape: tuple[int, ...] = ()) -> "MessageState":
        e = graph.num_edges
        return cls(
            graph=graph,
            var_to_check=np.zeros(batch_shape + (e,)),
            check_to_var=np.zeros(batch_shape + (e,)),
            outputs=np.zeros((0,) + batch_shape + (graph.n_vars,)),
            presigmoid=np.zeros((0,) + batch_shape + (graph.n_vars,)),
            hard_decisions=np.zeros(batch_shape + (graph.n_vars,), dtype=np.uint8),
        )


# ---------------------------------------------------------------------------
# Elementary updates
# ---------------------------------------------------------------------------


def _leave_one_out_sums(base: np.ndarray, terms: np.ndarray):
    """Leave-one-out sums of ``terms`` (..., slots), each seeded with ``base``.

    Returns (per-slot sums excluding that slot, total including all slots).
    Prefix sums accumulate ascending, suffix sums accumulate descending, so
    the evaluation order is fully determined.
    """
    arr = np.concatenate([base[..., None], terms], axis=-1)
    pre = np.cumsum(arr, axis=-1)
    rev = np.cumsum(arr[..., ::-1], axis=-1)[..., ::-1]
    suffix = np.zeros_like(arr)
    suffix[..., :-1] = rev[..., 1:]
    loo = pre[..., :-1] + suffix[..., 1:]
    return loo, pre[..., -1]


def _leave_one_out_products(t_pad: np.ndarray):
    """Leave-one-out products along the last axis via exclusive prefix and
    suffix cumulative products. Returns (products, prefix, suffix)."""
    cp = np.cumprod(t_pad, axis=-1)
    left = np.ones_like(t_pad)
    left[..., 1:] = cp[..., :-1]
    rcp = np.cumprod(t_pad[..., ::-1], axis=-1)[..., ::-1]
    right = np.ones_like(t_pad)
    right[..., :-1] = rcp[..., 1:]
    return left * right, left, right


def _v2c_pre(layout: _EdgeLayout, llr, lam_hat_prev, w_chan, w_edge):
    """Variable-to-check pre-update for all edges: per-edge weighted channel
    term plus weighted messages from the variable's other checks."""
    w_edge_full = np.broadcast_to(w_edge, lam_hat_prev.shape[-1:])
    weighted = lam_hat_prev * w_edge_full
    terms = layout.pad_edges(weighted, layout.vn_edge, 0.0)
    base = np.broadcast_to(w_chan, llr.shape) * llr
    loo, _ = _leave_one_out_sums(base, terms)
    return layout.scatter_vars(loo)


def _c2v_pre(layout: _EdgeLayout, lam, clip: float):
    """Check-to-variable pre-update: clipped tanh-product rule.

    Returns the clipped per-edge messages plus the intermediates needed by
    the reverse pass (tanh values, leave-one-out products, clip mask).
    """
    half = 0.5 * lam
    tanh_e = np.tanh(half)
    t_pad = layout.pad_edges(tanh_e, layout.cn_edge, 1.0)
    prod, left, right = _leave_one_out_products(t_pad)
    with np.errstate(divide="ignore"):
        pre_pad = 2.0 * np.arctanh(prod)
    pre = layout.scatter_checks(pre_pad)
    clip_mask = np.abs(pre) < clip
    clipped = np.clip(pre, -clip, clip)
    return clipped, tanh_e, t_pad, prod, left, right, clip_mask


def _marginal(layout: _EdgeLayout, llr, lam_hat, w_chan, w_edge):
    """Posterior LLR per variable: weighted channel term plus all weighted
    incoming messages, accumulated ascending."""
    w_edge_full = np.broadcast_to(w_edge, lam_hat.shape[-1:])
    weighted = lam_hat * w_edge_full
    terms = layout.pad_edges(weighted, layout.vn_edge, 0.0)
    base = np.broadcast_to(w_chan, llr.shape) * llr
    _, total = _leave_one_out_sums(base, terms)
    return total


# ---------------------------------------------------------------------------
# Public single-step operations
# ---------------------------------------------------------------------------


def variable_to_check_pre(
    state: MessageState, llr: np.ndarray, weights: WeightSet, t: int
) -> np.ndarray:
    """Per-edge variable-to-check pre-updates for iteration t, reading the
    previous iteration's check-to-variable messages from ``state``."""
    layout = _layout_for(state.graph)
    return _v2c_pre(layout, np.asarray(llr, dtype=np.float64), state.check_to_var,
                    weights.channel_weight(t), weights.edge_weight(t))


def check_to_variable_pre(state: MessageState, weights: WeightSet, t: int) -> np.ndarray:
    """Per-edge check-to-variable pre-updates (clipped) for iteration t,
    reading the current variable-to-check messages from ``state``."""
    layout = _layout_for(state.graph)
    clipped, *_ = _c2v_pre(layout, state.var_to_check, weights.llr_clip)
    return clipped


def damp(previous: np.ndarray, pre_update: np.ndarray, gamma: float) -> np.ndarray:
    """Convex combination (1-gamma)*previous + gamma*pre_update."""
    if not 0 <= gamma <= 1:
        raise ValueError("damping coefficient must lie in [0, 1]")
    previous = np.asarray(previous)
    pre_update = np.asarray(pre_update)
    if previous.shape != pre_update.shape:
        raise ValueError("previous and pre-update shapes disagree")
    return (1.0 - gamma) * previous + gamma * pre_update


def marginalize(state: MessageState, llr: np.ndarray, weights: WeightSet, t: int) -> np.ndarray:
    """Iteration-t soft outputs (probability of bit 0) from the current
    check-to-variable messages."""
    layout = _layout_for(state.graph)
    s = _marginal(layout, np.asarray(llr, dtype=np.float64), state.check_to_var,
                  weights.marginal_channel_weight(t), weights.marginal_edge_weight(t))
    return logistic(s)


# ---------------------------------------------------------------------------
# Full decoder
# ---------------------------------------------------------------------------


def _run_decoder(llr2d: np.ndarray, graph: TannerGraph, weights: WeightSet, record: bool):
    """Batched decode core. ``llr2d`` is (batch, N). Returns the final state
    and, when ``record`` is set, the per-iteration tape for the reverse pass."""
    layout = _layout_for(graph)
    batch, n = llr2d.shape
    if n != graph.n_vars:
        raise ValueError(f"LLR length {n} does not match graph with {graph.n_vars} variables")
    e = graph.num_edges
    lam = np.zeros((batch, e))
    lam_hat = np.zeros((batch, e))
    outputs = np.empty((weights.iterations, batch, n))
    presigmoid = np.empty((weights.iterations, batch, n))
    tape = [] if record else None
    for t in range(1, weights.iterations + 1):
        gamma = weights.damping_at(t)
        lam_prev, lam_hat_prev = lam, lam_hat
        lam_pre = _v2c_pre(layout, llr2d, lam_hat_prev, weights.channel_weight(t),
                           weights.edge_weight(t))
        lam = (1.0 - gamma) * lam_prev + gamma * lam_pre
        lam_hat_pre, tanh_e, t_pad, prod, left, right, clip_mask = _c2v_pre(
            layout, lam, weights.llr_clip
        )
        lam_hat = (1.0 - gamma) * lam_hat_prev + gamma * lam_hat_pre
        s = _marginal(layout, llr2d, lam_hat, weights.marginal_channel_weight(t),
                      weights.marginal_edge_weight(t))
        if not np.isfinite(s).all():
            raise FloatingPointError(f"non-finite marginal at iteration {t}")
        presigmoid[t - 1] = s
        outputs[t - 1] = logistic(s)
        if record:
            tape.append(
                dict(
                    lam_pre=lam_pre,
                    lam=lam,
                    lam_hat_pre=lam_hat_pre,
                    lam_hat=lam_hat,
                    tanh_e=tanh_e,
                    t_pad=t_pad,
                    prod=prod,
                    left=left,
                    right=right,
                    clip_mask=clip_mask,
                )
            )
    hard = (presigmoid[-1] < 0).astype(np.uint8)
    state = MessageState(
        graph=graph,
        var_to_check=lam,
        check_to_var=lam_hat,
        outputs=outputs,
        presigmoid=presigmoid,
        hard_decisions=hard,
    )
    return state, tape


def decode(llr: np.ndarray, graph: TannerGraph, weights: WeightSet) -> MessageState:
    """Run the full unrolled decoder on one frame (N,) or a batch (B, N).

    Messages start at zero; each iteration applies the damped variable and
    check updates and records the marginalized soft output. Hard decisions
    threshold the final output, resolving the tie o = 0.5 to bit 0.
    """
    arr = np.asarray(llr, dtype=np.float64)
    single = arr.ndim == 1
    arr2d = arr[None, :] if single else arr
    if arr2d.ndim != 2:
        raise ValueError("LLR input must be 1-D or 2-D")
    state, _ = _run_decoder(arr2d, graph, weights, record=False)
    if single:
        state = MessageState(
            graph=graph,
            var_to_check=state.var_to_check[0],
            check_to_var=state.check_to_var[0],
            outputs=state.outputs[:, 0],
            presigmoid=state.presigmoid[:, 0],
            hard_decisions=state.hard_decisions[0],
        )
    return state


def syndrome(graph: TannerGraph, hard_bits: np.ndarray) -> np.ndarray:
    """Parity of each check for the given hard decisions (..., N) -> (..., M)."""
    h = getattr(graph, "_h_bits_cache", None)
    if h is None:
        h = graph.to_matrix().bits.astype(np.uint8)
        graph._h_bits_cache = h
    return (hard_bits.astype(np.uint8) @ h.T) % 2


# ---------------------------------------------------------------------------
# Random redundant decoding
# ---------------------------------------------------------------------------


@dataclass
class RrdConfig:
    """Configuration of the permuted-restart decoding cascade.

    Each block runs ``iterations_per_permutation`` decoder iterations; the
    next block's input is the convex combination
    (1 - mixing) * channel LLR + mixing * previous block's posterior LLR,
    after which a fresh code automorphism reorders all per-variable arrays.
    ``damping = None`` uses the WeightSet's damping inside blocks. Early exit
    stops a frame once its hard decision satisfies every check.
    """

    num_blocks: int
    mixing: float
    iterations_per_permutation: int = 2
    damping: float | None = None
    permutation_seed: int | None = 0
    force_identity: bool = False
    early_exit: bool = True

    def __post_init__(self):
        if not 0 <= self.mixing <= 1:
            raise ValueError("mixing coefficient must lie in [0, 1]")
        if self.num_blocks < 1 or self.iterations_per_permutation < 1:
            raise ValueError("block counts must be >= 1")


@dataclass
class RrdResult:
    """Decoder output mapped back to the original bit order."""

    hard_decisions: np.ndarray
    outputs: np.ndarray
    presigmoid: np.ndarray
    blocks_run: np.ndarray


def rrd_decode(
    llr: np.ndarray, graph: TannerGraph, weights: WeightSet, rrd: RrdConfig
) -> RrdResult:
    """Cascade of short decoding blocks with automorphism reordering.

    All per-variable quantities (mixed LLRs and the channel LLRs) are
    permuted after each block; the composite permutation is tracked so the
    returned arrays are in the original index order.
    """
    if weights.iterations != rrd.iterations_per_permutation:
        raise ValueError(
            "WeightSet iterations must equal iterations_per_permutation "
            f"({weights.iterations} != {rrd.iterations_per_permutation})"
        )
    if rrd.damping is not None:
        weights = replace(weights, damping=np.asarray(rrd.damping, dtype=np.float64))
    arr = np.asarray(llr, dtype=np.float64)
    single = arr.ndim == 1
    cur = arr[None, :].copy() if single else arr.copy()
    batch, n = cur.shape
    if n != graph.n_vars:
        raise ValueError("LLR length does not match graph")
    rng = np.random.default_rng(rrd.permutation_seed)
    comp = Permutation.identity(n)
    chan = cur.copy()
    done = np.zeros(batch, dtype=bool)
    final_s = np.zeros((batch, n))
    blocks_run = np.zeros(batch, dtype=np.int64)
    for tau in range(1, rrd.num_blocks + 1):
        state, _ = _run_decoder(cur, graph, weights, record=False)
        s_out = state.presigmoid[-1]
        mapped = s_out[:, comp.map]
        fresh = ~done
        final_s[fresh] = mapped[fresh]
        blocks_run[fresh] = tau
        if rrd.early_exit:
            hard = (s_out < 0).astype(np.uint8)
            ok = ~syndrome(graph, hard).any(axis=-1)
            done |= ok
            if done.all():
                break
        if tau == rrd.num_blocks:
            break
        mixed = (1.0 - rrd.mixing) * chan + rrd.mixing * s_out
        perm = (
            Permutation.identity(n)
            if rrd.force_identity
            else sample_automorphism(n, rng)
        )
        cur = perm.apply(mixed)
        chan = perm.apply(chan)
        comp = perm.compose(comp)
    outputs = logistic(final_s)
    hard = (final_s < 0).astype(np.uint8)
    if single:
        return RrdResult(hard[0], outputs[0], final_s[0], blocks_run[0])
    return RrdResult(hard, outputs, final_s, blocks_run)
