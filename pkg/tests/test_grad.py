import numpy as np
import pytest

from commlearn import codes, grad, wbp
from conftest import awgn_llrs, random_codewords


class QuadraticComputation:
    """Minimal pipeline: loss = sum(theta^2), gradient 2*theta."""

    def loss(self, theta):
        return float(np.sum(theta**2))

    def loss_and_grad(self, theta):
        return self.loss(theta), grad.GradientVector(2.0 * theta)


def toy_pipeline(bch15, seed=3, batch=6, iterations=8, mode="fw", damping=0.6):
    h, g = bch15
    graph = codes.build_tanner(h)
    rng = np.random.default_rng(seed)
    cw = random_codewords(g, batch, rng)
    llr = awgn_llrs(cw, 2.0, 7 / 15, rng)
    if mode == "fw":
        w = wbp.WeightSet.fully_weighted(graph, iterations, damping=damping)
    elif mode == "ss":
        w = wbp.WeightSet.simple_scaled(iterations, temporal_sharing=False, damping=damping)
    else:
        w = wbp.WeightSet.plain(iterations, damping=damping, damping_trainable=True)
    pipe = grad.DecoderLossPipeline(graph, w, llr, cw)
    theta = w.pack() + rng.normal(0, 0.15, size=w.num_trainable)
    return pipe, theta, rng


class TestGradientVector:
    def test_norm_cached(self):
        gv = grad.GradientVector(np.array([3.0, 4.0]))
        assert gv.norm == 5.0

    def test_rejects_non_finite(self):
        with pytest.raises(FloatingPointError):
            grad.GradientVector(np.array([1.0, np.inf]))


class TestFiniteDiffCheck:
    def test_quadratic_is_exact(self):
        report = grad.finite_diff_check(QuadraticComputation(), np.array([2.0, -1.0]))
        assert report.max_rel_error < 1e-9
        assert not report.excluded

    def test_clip_boundary_excluded_not_failed(self, bch15):
        # a degree-2 check forwards w*llr of the other variable; w=0.5 with
        # llr=30 puts that pre-update on the clip threshold 15, so the probe
        # interval straddles the kink
        graph = codes.build_tanner(codes.BinaryMatrix([[1, 1]]))
        w = wbp.WeightSet.simple_scaled(1, channel_init=0.5, edge_init=1.0,
                                        damping=1.0, damping_trainable=False)
        llr = np.array([[30.0, 2.0]])
        bits = np.array([[0, 0]])
        pipe = grad.DecoderLossPipeline(graph, w, llr, bits, loss_scope="single")
        report = grad.finite_diff_check(pipe, w.pack(), indices=[0])
        assert 0 in report.excluded
        assert 0 not in report.errors


class TestDecoderGradients:
    def test_full_multiloss_matches_finite_differences(self, bch15):
        # the acceptance tolerance is 1e-4; typical errors are ~1e-8
        pipe, theta, rng = toy_pipeline(bch15, mode="fw")
        idx = rng.choice(len(theta), size=20, replace=False)
        report = grad.finite_diff_check(pipe, theta, indices=idx)
        assert report.max_rel_error <= 1e-4

    def test_simple_scaled_and_cross_entropy(self, bch15):
        pipe, theta, rng = toy_pipeline(bch15, mode="ss")
        report = grad.finite_diff_check(pipe, theta)
        assert report.max_rel_error <= 1e-4
        ce = grad.DecoderLossPipeline(pipe.graph, pipe.template, pipe.llr, pipe.bits,
                                      loss_type="cross-entropy", loss_scope="single")
        report = grad.finite_diff_check(ce, theta)
        assert report.max_rel_error <= 1e-4

    def test_damping_sigmoid_chain_rule(self, bch15):
        # gradient w.r.t. the logit carries the factor sigma'(0) = 0.25
        pipe, _, _ = toy_pipeline(bch15, mode="plain", damping=0.5)
        theta = pipe.template.pack()
        assert theta.shape == (1,) and theta[0] == pytest.approx(0.0)
        _, gv = pipe.loss_and_grad(theta)
        eps = 1e-6
        losses = {}
        for sign, gamma in (("+", 0.5 + eps), ("-", 0.5 - eps)):
            w = wbp.WeightSet.plain(8, damping=gamma, damping_trainable=False)
            p = grad.DecoderLossPipeline(pipe.graph, w, pipe.llr, pipe.bits)
            losses[sign] = p.loss(np.zeros(0))
        dloss_dgamma = (losses["+"] - losses["-"]) / (2.0 * eps)
        assert gv.values[0] == pytest.approx(0.25 * dloss_dgamma, rel=1e-4)

    def test_gradient_linearity_over_batches(self, bch15):
        h, g = bch15
        graph = codes.build_tanner(h)
        rng = np.random.default_rng(8)
        cw = random_codewords(g, 8, rng)
        llr = awgn_llrs(cw, 2.0, 7 / 15, rng)
        w = wbp.WeightSet.simple_scaled(5, temporal_sharing=False, damping=0.7)
        theta = w.pack() + rng.normal(0, 0.1, size=w.num_trainable)
        g_full = grad.DecoderLossPipeline(graph, w, llr, cw).loss_and_grad(theta)[1]
        g_a = grad.DecoderLossPipeline(graph, w, llr[:4], cw[:4]).loss_and_grad(theta)[1]
        g_b = grad.DecoderLossPipeline(graph, w, llr[4:], cw[4:]).loss_and_grad(theta)[1]
        combined = 0.5 * g_a.values + 0.5 * g_b.values
        assert np.max(np.abs(combined - g_full.values)) <= 1e-12

    def test_damping_gradient_vanishes_at_saturation(self, bch15):
        h, g = bch15
        graph = codes.build_tanner(h)
        rng = np.random.default_rng(9)
        cw = random_codewords(g, 4, rng)
        llr = awgn_llrs(cw, 2.0, 7 / 15, rng)
        w = wbp.WeightSet.plain(5, damping=0.5, damping_trainable=True)
        pipe = grad.DecoderLossPipeline(graph, w, llr, cw)
        mid = np.abs(pipe.loss_and_grad(np.array([0.0]))[1].values[0])
        saturated = np.abs(pipe.loss_and_grad(np.array([25.0]))[1].values[0])
        assert saturated < 1e-8 * max(mid, 1e-30) or saturated < 1e-20

    def test_backward_entry_point(self, bch15):
        pipe, theta, _ = toy_pipeline(bch15, mode="ss")
        gv = grad.backward(pipe, theta)
        assert np.isfinite(gv.values).all()
        assert len(gv) == len(theta)


def random_chain(seed=5, length=256, steps=4, taps=5):
    rng = np.random.default_rng(seed)
    y = 0.3 * (rng.normal(size=length) + 1j * rng.normal(size=length))
    taps0 = np.zeros((steps, taps), dtype=complex)
    taps0[:, taps // 2] = 1.0
    taps0 += 0.05 * (rng.normal(size=(steps, taps)) + 1j * rng.normal(size=(steps, taps)))
    gains = rng.uniform(0.9, 1.1, size=steps)
    nl = rng.uniform(-0.3, 0.3, size=steps)
    mf = np.hanning(9)
    mf /= np.sqrt((mf**2).sum())
    idx = np.arange(8, length - 8, 2)
    target = (rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))) / np.sqrt(2)
    pipe = grad.LdbpLossPipeline(y, steps, taps, gains, nl, mf, idx, target)
    return pipe, taps0.reshape(-1).view(np.float64).copy(), rng


class TestFilterChainGradients:
    def test_matches_finite_differences(self):
        pipe, theta, rng = random_chain()
        idx = rng.choice(len(theta), size=20, replace=False)
        report = grad.finite_diff_check(pipe, theta, indices=idx)
        assert report.max_rel_error <= 1e-4

    def test_gradient_descends(self):
        # line-search property of the conjugate-derivative direction
        pipe, theta, _ = random_chain(seed=6)
        loss0, gv = pipe.loss_and_grad(theta)
        assert any(
            pipe.loss(theta - step * gv.values) < loss0
            for step in (1e-2, 1e-3, 1e-4, 1e-5)
        )

    def test_degenerate_output_rejected(self):
        pipe, theta, _ = random_chain(seed=7)
        with pytest.raises(ValueError):
            pipe.loss(np.zeros_like(theta))
