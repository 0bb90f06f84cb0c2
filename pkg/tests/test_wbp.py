import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commlearn import codes, wbp
from conftest import awgn_llrs, random_codewords
from reference_sumproduct import reference_decode


def star_graph(num_checks):
    """One variable attached to ``num_checks`` degree-1 checks."""
    return codes.build_tanner(codes.BinaryMatrix(np.ones((num_checks, 1), dtype=int)))


def brute_force_posteriors(h_bits, llr):
    """Exact bitwise posteriors by summing over every codeword."""
    h = np.asarray(h_bits)
    n = h.shape[1]
    words = np.array(
        [[(w >> (n - 1 - v)) & 1 for v in range(n)] for w in range(2**n)]
    )
    codewords = words[~((words @ h.T) % 2).any(axis=1)]
    # log Pr(y | word) up to a constant: -sum llr_v * word_v
    log_like = -codewords @ np.asarray(llr)
    log_like -= log_like.max()
    weights = np.exp(log_like)
    p0 = weights @ (1 - codewords) / weights.sum()
    return p0


class TestVariableToCheckPre:
    def test_unit_weights_sum(self):
        graph = star_graph(3)
        state = wbp.MessageState.initial(graph)
        state.check_to_var[:] = [0.0, 2.0, -1.0]
        w = wbp.WeightSet.plain(1)
        pre = wbp.variable_to_check_pre(state, np.array([1.0]), w, 1)
        assert pre[0] == pytest.approx(2.0)  # 1 + 2 + (-1)

    def test_scaled_weights(self):
        graph = star_graph(3)
        state = wbp.MessageState.initial(graph)
        state.check_to_var[:] = [0.0, 2.0, -1.0]
        w = wbp.WeightSet.simple_scaled(1, channel_init=0.5, edge_init=2.0)
        pre = wbp.variable_to_check_pre(state, np.array([1.0]), w, 1)
        assert pre[0] == pytest.approx(2.5)  # 0.5 + 2*(2 - 1)

    def test_degree_one_variable(self):
        graph = star_graph(1)
        state = wbp.MessageState.initial(graph)
        state.check_to_var[:] = [37.0]  # no other checks to hear from
        w = wbp.WeightSet.simple_scaled(1, channel_init=0.7)
        pre = wbp.variable_to_check_pre(state, np.array([3.0]), w, 1)
        assert pre[0] == pytest.approx(0.7 * 3.0)


class TestCheckToVariablePre:
    def test_zero_annihilates(self):
        graph = codes.build_tanner(codes.BinaryMatrix([[1, 1, 1]]))
        state = wbp.MessageState.initial(graph)
        state.var_to_check[:] = [0.0, 5.0, -3.0]
        pre = wbp.check_to_variable_pre(state, wbp.WeightSet.plain(1), 1)
        assert pre[1] == 0.0 and pre[2] == 0.0

    def test_tanh_product_value(self):
        # oracle: high-precision evaluation of 2*atanh(tanh(0.5)*tanh(1.0))
        graph = codes.build_tanner(codes.BinaryMatrix([[1, 1, 1]]))
        state = wbp.MessageState.initial(graph)
        state.var_to_check[:] = [7.0, 1.0, 2.0]
        pre = wbp.check_to_variable_pre(state, wbp.WeightSet.plain(1), 1)
        assert pre[0] == pytest.approx(0.7353256640555192, abs=1e-15)

    def test_clipped_at_threshold(self):
        # the clipping threshold is 15
        graph = codes.build_tanner(codes.BinaryMatrix([[1, 1, 1]]))
        state = wbp.MessageState.initial(graph)
        state.var_to_check[:] = [0.0, 40.0, 40.0]
        pre = wbp.check_to_variable_pre(state, wbp.WeightSet.plain(1), 1)
        assert pre[0] == 15.0


class TestDamp:
    def test_endpoints_and_midpoint(self):
        prev = np.array([2.0])
        pre = np.array([4.0])
        assert wbp.damp(prev, pre, 1.0) == pytest.approx([4.0])
        assert wbp.damp(prev, pre, 0.0) == pytest.approx([2.0])
        assert wbp.damp(prev, pre, 0.5) == pytest.approx([3.0])

    def test_rejects_bad_gamma_or_shapes(self):
        with pytest.raises(ValueError):
            wbp.damp(np.zeros(2), np.zeros(2), 1.5)
        with pytest.raises(ValueError):
            wbp.damp(np.zeros(2), np.zeros(3), 0.5)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0, 1), st.integers(0, 2**31 - 1))
    def test_stays_between_endpoints(self, gamma, seed):
        rng = np.random.default_rng(seed)
        prev, pre = rng.normal(size=8), rng.normal(size=8)
        out = wbp.damp(prev, pre, gamma)
        lo, hi = np.minimum(prev, pre), np.maximum(prev, pre)
        assert ((out >= lo - 1e-12) & (out <= hi + 1e-12)).all()


class TestMarginalize:
    def test_all_zero_is_half(self):
        graph = star_graph(2)
        state = wbp.MessageState.initial(graph)
        out = wbp.marginalize(state, np.array([0.0]), wbp.WeightSet.plain(1), 1)
        assert out[0] == 0.5

    def test_logistic_of_two(self):
        graph = star_graph(1)
        state = wbp.MessageState.initial(graph)
        state.check_to_var[:] = [1.0]
        out = wbp.marginalize(state, np.array([1.0]), wbp.WeightSet.plain(1), 1)
        assert out[0] == pytest.approx(0.8807970779778824, abs=1e-15)

    def test_saturation_direction(self):
        graph = codes.build_tanner(codes.BinaryMatrix([[0, 1], [1, 1]]))
        state = wbp.MessageState.initial(graph)
        out = wbp.marginalize(state, np.array([15.0, 0.0]), wbp.WeightSet.plain(1), 1)
        assert out[0] > 0.999


class TestDecode:
    def test_matches_reference_oracle(self, bch63, graph63):
        h, g = bch63
        rng = np.random.default_rng(21)
        cw = random_codewords(g, 200, rng)
        llr = awgn_llrs(cw, 3.0, 36 / 63, rng)
        state = wbp.decode(llr, graph63, wbp.WeightSet.plain(20))
        ref_post, ref_hard = reference_decode(h.bits, llr, 20)
        assert np.array_equal(state.presigmoid, ref_post)
        assert np.array_equal(state.hard_decisions, ref_hard)

    def test_matches_reference_with_damping(self, bch63, graph63):
        h, g = bch63
        rng = np.random.default_rng(22)
        cw = random_codewords(g, 50, rng)
        llr = awgn_llrs(cw, 4.0, 36 / 63, rng)
        state = wbp.decode(llr, graph63, wbp.WeightSet.plain(8, damping=0.75))
        ref_post, _ = reference_decode(h.bits, llr, 8, gamma=0.75)
        assert np.array_equal(state.presigmoid, ref_post)

    def test_exact_on_cycle_free_graph(self):
        h = codes.BinaryMatrix([[1, 1, 1, 0, 0], [0, 0, 1, 1, 1]])
        graph = codes.build_tanner(h)
        rng = np.random.default_rng(5)
        for _ in range(20):
            llr = rng.uniform(-3, 3, size=5)
            state = wbp.decode(llr, graph, wbp.WeightSet.plain(4))
            exact = brute_force_posteriors(h.bits, llr)
            assert np.max(np.abs(state.outputs[-1] - exact)) <= 1e-9

    def test_codeword_symmetry_exact(self, bch63, graph63):
        _, g = bch63
        rng = np.random.default_rng(9)
        cw = random_codewords(g, 16, rng)
        llr = rng.normal(0, 2, size=cw.shape)
        for weights in [
            wbp.WeightSet.plain(6, damping=0.8),
            wbp.WeightSet.simple_scaled(6, channel_init=0.9, edge_init=1.1, damping=0.7),
        ]:
            base = wbp.decode(llr, graph63, weights)
            twisted = wbp.decode((1.0 - 2.0 * cw) * llr, graph63, weights)
            want = np.where(cw[None, :, :] == 1, 1.0 - base.outputs, base.outputs)
            assert np.array_equal(twisted.outputs, want)

    def test_global_sign_symmetry_exact(self, graph63):
        rng = np.random.default_rng(10)
        llr = rng.normal(0, 2, size=(8, 63))
        w = wbp.WeightSet.fully_weighted(graph63, 5, damping=0.6)
        pos = wbp.decode(llr, graph63, w)
        neg = wbp.decode(-llr, graph63, w)
        assert np.array_equal(neg.presigmoid, -pos.presigmoid)
        assert np.array_equal(neg.outputs, 1.0 - pos.outputs)

    def test_post_clip_bound_under_damping(self, graph63):
        rng = np.random.default_rng(11)
        llr = rng.normal(0, 8, size=(4, 63))
        w = wbp.WeightSet.plain(10, damping=0.55)
        state = wbp.decode(llr, graph63, w)
        assert np.abs(state.check_to_var).max() <= 15.0

    def test_outputs_strictly_inside_unit_interval(self, graph63):
        rng = np.random.default_rng(12)
        llr = rng.normal(0, 20, size=(4, 63))
        state = wbp.decode(llr, graph63, wbp.WeightSet.plain(5))
        assert (state.outputs > 0).all() and (state.outputs < 1).all()

    def test_tie_decodes_to_zero(self):
        graph = star_graph(1)
        state = wbp.decode(np.zeros(1), graph, wbp.WeightSet.plain(1))
        assert state.hard_decisions[0] == 0

    def test_shape_mismatch_rejected(self, graph63):
        with pytest.raises(ValueError):
            wbp.decode(np.zeros(10), graph63, wbp.WeightSet.plain(2))


class TestWeightSet:
    def test_plain_rejects_weights(self):
        with pytest.raises(ValueError):
            wbp.WeightSet(mode="plain", iterations=3, channel_weights=np.ones(3))

    def test_shape_validation(self, graph63):
        with pytest.raises(ValueError):
            wbp.WeightSet(
                mode="simple-scaled", iterations=3, temporal_sharing=False,
                channel_weights=np.ones(4), edge_weights=np.ones(3),
            )

    def test_damping_range_validated(self):
        with pytest.raises(ValueError):
            wbp.WeightSet.plain(3, damping=1.2)

    def test_pack_round_trip(self, graph63):
        w = wbp.WeightSet.fully_weighted(graph63, 4, damping=0.37)
        rng = np.random.default_rng(0)
        theta = w.pack() + rng.normal(0, 0.1, size=w.num_trainable)
        rebuilt = w.replace_trainable(theta)
        packed = rebuilt.pack()
        # weights round-trip exactly; the damping logit only to round-off
        assert np.array_equal(packed[:-1], theta[:-1])
        assert packed[-1] == pytest.approx(theta[-1], abs=1e-12)

    def test_per_iteration_damping(self):
        w = wbp.WeightSet.plain(3, damping=np.array([1.0, 0.5, 0.25]))
        assert w.damping_at(1) == 1.0
        assert w.damping_at(3) == 0.25


class TestRrdDecode:
    def test_reduces_to_decode(self, graph63):
        rng = np.random.default_rng(30)
        llr = rng.normal(0, 2, size=(6, 63))
        w = wbp.WeightSet.plain(2, damping=0.8)
        cfg = wbp.RrdConfig(num_blocks=1, mixing=0.0, force_identity=True,
                            early_exit=False, damping=None)
        got = wbp.rrd_decode(llr, graph63, w, cfg)
        want = wbp.decode(llr, graph63, w)
        assert np.array_equal(got.presigmoid, want.presigmoid[-1])
        assert np.array_equal(got.hard_decisions, want.hard_decisions)

    def test_recovers_codewords_in_original_order(self, bch63, graph63_cr):
        # wrong permutation bookkeeping would return permuted codewords
        _, g = bch63
        rng = np.random.default_rng(31)
        cw = random_codewords(g, 64, rng)
        llr = awgn_llrs(cw, 9.0, 36 / 63, rng)
        cfg = wbp.RrdConfig(num_blocks=6, mixing=0.3, damping=0.9, permutation_seed=5)
        out = wbp.rrd_decode(llr, graph63_cr, wbp.WeightSet.plain(2), cfg)
        assert np.array_equal(out.hard_decisions, cw)

    def test_early_exit_blocks(self, bch63, graph63_cr):
        _, g = bch63
        rng = np.random.default_rng(32)
        cw = random_codewords(g, 32, rng)
        llr = awgn_llrs(cw, 10.0, 36 / 63, rng)
        cfg = wbp.RrdConfig(num_blocks=10, mixing=0.2, damping=0.9, permutation_seed=1)
        out = wbp.rrd_decode(llr, graph63_cr, wbp.WeightSet.plain(2), cfg)
        assert out.blocks_run.max() <= 10
        assert (out.blocks_run == 1).mean() > 0.9  # high SNR: immediate exit

    def test_iteration_count_must_match(self, graph63):
        cfg = wbp.RrdConfig(num_blocks=2, mixing=0.1)
        with pytest.raises(ValueError):
            wbp.rrd_decode(np.zeros(63), graph63, wbp.WeightSet.plain(3), cfg)

    def test_mixing_validated(self):
        with pytest.raises(ValueError):
            wbp.RrdConfig(num_blocks=2, mixing=1.5)
