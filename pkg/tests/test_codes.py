import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commlearn import codes


def gf2_rank_oracle(bits):
    """Independent Gaussian elimination over GF(2), rows as integer bitmasks."""
    rows = [int("".join(str(b) for b in row), 2) for row in bits.tolist()]
    rank = 0
    for col in range(bits.shape[1]):
        mask = 1 << (bits.shape[1] - 1 - col)
        pivot = next((i for i in range(rank, len(rows)) if rows[i] & mask), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i] & mask:
                rows[i] ^= rows[rank]
        rank += 1
    return rank


def count_4cycles_oracle(bits):
    """Brute-force enumeration over row pairs."""
    m = bits.shape[0]
    total = 0
    for r in range(m):
        for rp in range(r + 1, m):
            overlap = int(np.sum(bits[r] & bits[rp]))
            total += overlap * (overlap - 1) // 2
    return total


class TestBinaryMatrix:
    def test_rejects_zero_row(self):
        with pytest.raises(ValueError):
            codes.BinaryMatrix([[1, 0], [0, 0]])

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            codes.BinaryMatrix([[1, 2]])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            codes.BinaryMatrix(np.zeros((0, 3)))

    def test_immutability(self):
        h = codes.BinaryMatrix([[1, 0], [0, 1]])
        with pytest.raises(ValueError):
            h.bits[0, 0] = 0


class TestBuildTanner:
    def test_two_check_example(self):
        graph = codes.build_tanner(codes.BinaryMatrix([[1, 1, 0], [0, 1, 1]]))
        assert graph.var_neighbors[0].tolist() == [0]
        assert graph.var_neighbors[1].tolist() == [0, 1]
        assert graph.var_neighbors[2].tolist() == [1]
        assert graph.num_edges == 4

    def test_identity_matrix(self):
        graph = codes.build_tanner(codes.BinaryMatrix(np.eye(3, dtype=int)))
        assert all(len(nb) == 1 for nb in graph.var_neighbors)
        assert graph.num_edges == 3

    def test_bch_edge_count_is_popcount(self, bch63):
        h, _ = bch63
        graph = codes.build_tanner(h)
        assert graph.num_edges == int(np.sum(h.bits))  # independent popcount

    def test_matrix_round_trip(self, bch63):
        h, _ = bch63
        assert codes.build_tanner(h).to_matrix() == h

    def test_edge_index_row_major(self):
        h = codes.BinaryMatrix([[1, 1, 0], [0, 1, 1]])
        graph = codes.build_tanner(h)
        assert graph.edge_index(0, 0) == 0
        assert graph.edge_index(1, 0) == 1
        assert graph.edge_index(1, 1) == 2
        assert graph.edge_index(2, 1) == 3
        with pytest.raises(KeyError):
            graph.edge_index(0, 1)


class TestBch:
    def test_shape_and_rank(self, bch63):
        h, _ = bch63
        assert (h.rows, h.cols) == (27, 63)
        assert gf2_rank_oracle(h.bits) == 27

    def test_generator_rows_are_codewords(self, bch63):
        h, g = bch63
        assert not ((g.bits @ h.bits.T) % 2).any()

    def test_random_codewords_satisfy_checks(self, bch63):
        h, g = bch63
        rng = np.random.default_rng(11)
        info = rng.integers(0, 2, size=(1000, 36))
        cw = (info @ g.bits) % 2
        assert not ((cw @ h.bits.T) % 2).any()

    def test_other_lengths(self):
        for n, k in [(15, 7), (15, 5), (31, 16), (7, 4)]:
            h = codes.bch_parity_check(n, k)
            g = codes.bch_generator_matrix(n, k)
            assert (h.rows, h.cols) == (n - k, n)
            assert gf2_rank_oracle(h.bits) == n - k
            assert not ((g.bits @ h.bits.T) % 2).any()

    def test_unsupported_pair(self):
        with pytest.raises(ValueError):
            codes.bch_parity_check(63, 40)
        with pytest.raises(ValueError):
            codes.bch_parity_check(64, 36)


class TestCount4Cycles:
    def test_no_cycles(self):
        assert codes.count_4cycles(codes.BinaryMatrix([[1, 1, 0], [0, 1, 1]])) == 0

    def test_single_cycle(self):
        assert codes.count_4cycles(codes.BinaryMatrix([[1, 1], [1, 1]])) == 1

    def test_bch_matches_brute_force(self, bch63):
        h, _ = bch63
        count = codes.count_4cycles(h)
        assert count == count_4cycles_oracle(h.bits)
        assert count > 0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 20), st.integers(2, 40), st.integers(0, 10_000))
    def test_matches_brute_force_random(self, m, n, seed):
        rng = np.random.default_rng(seed)
        bits = rng.integers(0, 2, size=(m, n)).astype(np.uint8)
        bits[bits.sum(axis=1) == 0, 0] = 1  # no vacuous checks
        h = codes.BinaryMatrix(bits)
        assert codes.count_4cycles(h) == count_4cycles_oracle(h.bits)


class TestReduceCycles:
    def test_cycle_free_unchanged(self):
        h = codes.BinaryMatrix(np.eye(4, dtype=int))
        assert codes.reduce_cycles(h, seed=0, budget=50) == h

    def test_bch_strictly_decreases(self, bch63, bch63_cr):
        h, _ = bch63
        assert codes.count_4cycles(bch63_cr) < codes.count_4cycles(h)

    def test_row_space_preserved(self, bch63, bch63_cr):
        h, _ = bch63
        assert bch63_cr.bits.shape == h.bits.shape
        stacked = np.vstack([h.bits, bch63_cr.bits])
        assert gf2_rank_oracle(stacked) == gf2_rank_oracle(h.bits)

    def test_deterministic(self, bch63):
        h, _ = bch63
        a = codes.reduce_cycles(h, seed=3, budget=100)
        b = codes.reduce_cycles(h, seed=3, budget=100)
        assert a == b

    def test_non_increasing_random(self):
        rng = np.random.default_rng(5)
        bits = (rng.random((8, 16)) < 0.4).astype(np.uint8)
        bits[bits.sum(axis=1) == 0, 0] = 1
        h = codes.BinaryMatrix(bits)
        reduced = codes.reduce_cycles(h, seed=1, budget=200)
        assert codes.count_4cycles(reduced) <= codes.count_4cycles(h)


class TestPermutation:
    def test_identity_element(self):
        perm = codes.automorphism(63, shift=0, frobenius_power=0)
        assert np.array_equal(perm.map, np.arange(63))

    def test_rejects_non_bijection(self):
        with pytest.raises(ValueError):
            codes.Permutation(np.array([0, 0, 1]))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_compose_inverse_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        p = codes.sample_automorphism(63, rng)
        q = codes.sample_automorphism(63, rng)
        vec = rng.normal(size=63)
        via_compose = p.compose(q).apply(vec)
        assert np.array_equal(via_compose, p.apply(q.apply(vec)))
        assert np.array_equal(p.inverse().apply(p.apply(vec)), vec)

    def test_cyclic_shift_preserves_code(self, bch63):
        h, g = bch63
        rng = np.random.default_rng(2)
        cw = (rng.integers(0, 2, size=36) @ g.bits) % 2
        shifted = codes.automorphism(63, shift=5, frobenius_power=0).apply(cw)
        assert not ((h.bits @ shifted) % 2).any()  # syndrome oracle

    def test_doubling_preserves_code(self, bch63):
        h, g = bch63
        rng = np.random.default_rng(3)
        cw = (rng.integers(0, 2, size=36) @ g.bits) % 2
        doubled = codes.automorphism(63, shift=0, frobenius_power=1).apply(cw)
        assert not ((h.bits @ doubled) % 2).any()

    def test_sampled_automorphisms_preserve_code(self, bch63):
        h, g = bch63
        rng = np.random.default_rng(4)
        for trial in range(200):
            cw = (rng.integers(0, 2, size=36) @ g.bits) % 2
            perm = codes.sample_automorphism(63, rng)
            assert not ((h.bits @ perm.apply(cw)) % 2).any()

    def test_unsupported_length(self):
        with pytest.raises(ValueError):
            codes.sample_automorphism(64, 0)


class TestAlist:
    def test_round_trip(self, tmp_path, bch63):
        h, _ = bch63
        path = tmp_path / "h.alist"
        codes.write_alist(h, path)
        assert codes.read_alist(path) == h

    def test_layout(self, tmp_path):
        h = codes.BinaryMatrix([[1, 1, 0], [0, 1, 1]])
        path = tmp_path / "small.alist"
        codes.write_alist(h, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "3 2"
        assert lines[1] == "2 2"
        assert lines[2] == "1 2 1"
        assert lines[3] == "2 2"
        assert lines[4] == "1"  # 1-based neighbor lists
        assert lines[5] == "1 2"

    def test_reads_zero_padded_variant(self, tmp_path):
        text = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2 0\n2 3 0\n"
        path = tmp_path / "padded.alist"
        path.write_text(text)
        h = codes.read_alist(path)
        assert np.array_equal(h.bits, [[1, 1, 0], [0, 1, 1]])
