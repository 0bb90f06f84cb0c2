"""Binary parity-check matrices, Tanner graphs, BCH construction, and
matrix transforms (cycle reduction, cyclic-code automorphisms, alist I/O)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BinaryMatrix",
    "TannerGraph",
    "Permutation",
    "build_tanner",
    "bch_parity_check",
    "bch_generator_matrix",
    "count_4cycles",
    "reduce_cycles",
    "automorphism",
    "sample_automorphism",
    "gf2_rank",
    "gf2_nullspace",
    "read_alist",
    "write_alist",
]


class BinaryMatrix:
    """Dense binary matrix over GF(2), stored as uint8 with entries in {0, 1}.

    Rows are parity checks, columns are code symbols. Construction rejects
    empty matrices, non-binary entries, and all-zero rows (vacuous checks).
    The underlying array is frozen after construction.
    """

    def __init__(self, bits) -> None:
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("parity-check matrix must be a nonempty 2-D array")
        if not np.isin(np.asarray(bits), (0, 1)).all():
            raise ValueError("matrix entries must be 0 or 1")
        if (arr.sum(axis=1) == 0).any():
            raise ValueError("matrix has an all-zero row (vacuous check)")
        arr = arr.copy()
        arr.flags.writeable = False
        self.bits = arr

    @property
    def rows(self) -> int:
        return self.bits.shape[0]

    @property
    def cols(self) -> int:
        return self.bits.shape[1]

    @property
    def num_edges(self) -> int:
        """Number of 1-entries (edges of the Tanner graph)."""
        return int(self.bits.sum())

    def rank(self) -> int:
        """Rank over GF(2)."""
        return gf2_rank(self.bits)

    def same_row_space(self, other: "BinaryMatrix") -> bool:
        """True when both matrices span the same GF(2) row space."""
        if self.cols != other.cols:
            return False
        r = gf2_rank(self.bits)
        if r != gf2_rank(other.bits):
            return False
        stacked = np.vstack([self.bits, other.bits])
        return gf2_rank(stacked) == r

    def __eq__(self, other) -> bool:
        return isinstance(other, BinaryMatrix) and np.array_equal(self.bits, other.bits)

    def __repr__(self) -> str:
        return f"BinaryMatrix({self.rows}x{self.cols}, {self.num_edges} ones)"


def gf2_rank(bits) -> int:
    """Rank of a binary matrix over GF(2) by Gaussian elimination."""
    work = np.array(bits, dtype=np.uint8) % 2
    rank = 0
    n_rows, n_cols = work.shape
    for col in range(n_cols):
        pivot = None
        for r in range(rank, n_rows):
            if work[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        work[[rank, pivot]] = work[[pivot, rank]]
        hits = np.nonzero(work[:, col])[0]
        hits = hits[hits != rank]
        work[hits] ^= work[rank]
        rank += 1
        if rank == n_rows:
            break
    return rank


def gf2_nullspace(bits) -> np.ndarray:
    """Basis of the GF(2) null space of ``bits`` as rows of a binary matrix.

    For a parity-check matrix H this is a generator matrix of the code.
    """
    h = np.array(bits, dtype=np.uint8) % 2
    n_rows, n_cols = h.shape
    work = h.copy()
    pivot_cols: list[int] = []
    row = 0
    for col in range(n_cols):
        pivot = None
        for r in range(row, n_rows):
            if work[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        work[[row, pivot]] = work[[pivot, row]]
        hits = np.nonzero(work[:, col])[0]
        hits = hits[hits != row]
        work[hits] ^= work[row]
        pivot_cols.append(col)
        row += 1
        if row == n_rows:
            break
    free_cols = [c for c in range(n_cols) if c not in pivot_cols]
    basis = np.zeros((len(free_cols), n_cols), dtype=np.uint8)
    for i, fc in enumerate(free_cols):
        basis[i, fc] = 1
        for r, pc in enumerate(pivot_cols):
            if work[r, fc]:
                basis[i, pc] = 1
    return basis


class TannerGraph:
    """Bipartite adjacency of a binary parity-check matrix.

    Edges are indexed row-major over the matrix: edge e corresponds to the
    e-th 1-entry when scanning checks top to bottom and, within a check,
    variables left to right. Neighbor lists are sorted and duplicate-free.
    """

    def __init__(self, matrix: BinaryMatrix) -> None:
        bits = matrix.bits
        checks, variables = np.nonzero(bits)
        self.n_checks, self.n_vars = bits.shape
        self.edge_check = checks.astype(np.int64)
        self.edge_var = variables.astype(np.int64)
        self.num_edges = len(self.edge_var)
        self.check_neighbors = [
            self.edge_var[self.edge_check == c] for c in range(self.n_checks)
        ]
        self.var_neighbors = [
            self.edge_check[self.edge_var == v] for v in range(self.n_vars)
        ]
        self._edge_lookup = {
            (int(v), int(c)): e
            for e, (v, c) in enumerate(zip(self.edge_var, self.edge_check))
        }

    def edge_index(self, var: int, check: int) -> int:
        """Edge id of the pair (var, check); KeyError when not adjacent."""
        return self._edge_lookup[(var, check)]

    def to_matrix(self) -> BinaryMatrix:
        """Reconstruct the parity-check matrix (lossless round trip)."""
        bits = np.zeros((self.n_checks, self.n_vars), dtype=np.uint8)
        bits[self.edge_check, self.edge_var] = 1
        return BinaryMatrix(bits)

    def __repr__(self) -> str:
        return f"TannerGraph({self.n_checks} checks, {self.n_vars} vars, {self.num_edges} edges)"


def build_tanner(matrix: BinaryMatrix) -> TannerGraph:
    """Tanner graph of a parity-check matrix."""
    return TannerGraph(matrix)


# ---------------------------------------------------------------------------
# BCH construction over GF(2^m)
# ---------------------------------------------------------------------------

# Primitive polynomials (bit i = coefficient of x^i) for the field sizes the
# cyclic-code tooling supports: lengths n = 2^m - 1.
_PRIMITIVE_POLY = {3: 0b1011, 4: 0b10011, 5: 0b100101, 6: 0b1000011}


def _gf_tables(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Exp/log tables of GF(2^m) for the fixed primitive polynomial."""
    poly = _PRIMITIVE_POLY[m]
    size = 1 << m
    exp = np.zeros(size - 1, dtype=np.int64)
    log = np.zeros(size, dtype=np.int64)
    x = 1
    for i in range(size - 1):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & size:
            x ^= poly
    return exp, log


def _gf_mul(a: int, b: int, exp: np.ndarray, log: np.ndarray) -> int:
    if a == 0 or b == 0:
        return 0
    n = len(exp)
    return int(exp[(log[a] + log[b]) % n])


def _minimal_polynomial(power: int, m: int, exp, log) -> np.ndarray:
    """Coefficients (degree-ascending, values in {0,1}) of the minimal
    polynomial over GF(2) of alpha^power in GF(2^m)."""
    n = (1 << m) - 1
    coset = []
    p = power % n
    while p not in coset:
        coset.append(p)
        p = (2 * p) % n
    # product of (x - alpha^j) over the conjugacy class, computed in GF(2^m)
    poly = [1]
    for j in coset:
        root = int(exp[j % n])
        nxt = [0] * (len(poly) + 1)
        for d, coeff in enumerate(poly):
            nxt[d + 1] ^= coeff
            nxt[d] ^= _gf_mul(coeff, root, exp, log)
        poly = nxt
    coeffs = np.array(poly, dtype=np.int64)
    if not np.isin(coeffs, (0, 1)).all():
        raise AssertionError("minimal polynomial has coefficients outside GF(2)")
    return coeffs.astype(np.uint8)


def _gf2_polymul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (np.convolve(a.astype(np.int64), b.astype(np.int64)) % 2).astype(np.uint8)


def _gf2_polydiv(num: np.ndarray, den: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Quotient and remainder of GF(2) polynomial division (degree-ascending)."""
    num = num.astype(np.uint8).copy()
    dn = len(den) - 1
    while len(den) > 1 and den[-1] == 0:
        den = den[:-1]
        dn -= 1
    quot = np.zeros(max(len(num) - dn, 1), dtype=np.uint8)
    for d in range(len(num) - 1, dn - 1, -1):
        if num[d]:
            quot[d - dn] = 1
            num[d - dn : d + 1] ^= den
    rem = num[:dn] if dn > 0 else np.zeros(1, dtype=np.uint8)
    return quot, rem


def _bch_generator_poly(n: int, k: int) -> np.ndarray:
    """Generator polynomial (degree-ascending coefficients) of the
    narrow-sense binary BCH code with parameters (n, k)."""
    m = {7: 3, 15: 4, 31: 5, 63: 6}.get(n)
    if m is None:
        raise ValueError(f"unsupported BCH length n={n} (need n = 2^m - 1, m in 3..6)")
    exp, log = _gf_tables(m)
    gen = np.array([1], dtype=np.uint8)
    covered: set[int] = set()
    for root_power in range(1, n):
        if root_power in covered:
            if len(gen) - 1 == n - k:
                return gen
            continue
        if len(gen) - 1 == n - k:
            return gen
        if len(gen) - 1 > n - k:
            break
        minpoly = _minimal_polynomial(root_power, m, exp, log)
        coset = set()
        p = root_power
        while p not in coset:
            coset.add(p)
            p = (2 * p) % n
        covered |= coset
        gen = _gf2_polymul(gen, minpoly)
    if len(gen) - 1 == n - k:
        return gen
    raise ValueError(f"unsupported BCH parameter pair (n={n}, k={k})")


def bch_parity_check(n: int, k: int) -> BinaryMatrix:
    """Standard (n-k) x n parity-check matrix of the narrow-sense binary
    BCH(n, k) code.

    Rows are successive shifts of the reversed parity polynomial
    h(x) = (x^n - 1)/g(x); row i has support on columns i..i+k.
    """
    gen = _bch_generator_poly(n, k)
    xn1 = np.zeros(n + 1, dtype=np.uint8)
    xn1[0] = 1
    xn1[n] = 1
    h_poly, rem = _gf2_polydiv(xn1, gen)
    if rem.any():
        raise AssertionError("generator polynomial does not divide x^n - 1")
    h_rev = h_poly[::-1]  # [h_k, ..., h_0]
    bits = np.zeros((n - k, n), dtype=np.uint8)
    for i in range(n - k):
        bits[i, i : i + k + 1] = h_rev
    return BinaryMatrix(bits)


def bch_generator_matrix(n: int, k: int) -> BinaryMatrix:
    """Companion k x n generator matrix: rows are shifts of g(x)."""
    gen = _bch_generator_poly(n, k)
    bits = np.zeros((k, n), dtype=np.uint8)
    for i in range(k):
        bits[i, i : i + n - k + 1] = gen
    return BinaryMatrix(bits)


# ---------------------------------------------------------------------------
# Cycle counting and reduction
# ---------------------------------------------------------------------------


def count_4cycles(matrix: BinaryMatrix) -> int:
    """Number of length-4 cycles in the Tanner graph: sum over unordered row
    pairs of C(overlap, 2) where overlap counts shared support columns."""
    bits = matrix.bits.astype(np.int64)
    overlap = bits @ bits.T
    pairs = overlap[np.triu_indices(matrix.rows, k=1)]
    return int((pairs * (pairs - 1) // 2).sum())


def _pair_cycle_cost(overlap_row: np.ndarray) -> int:
    return int((overlap_row * (overlap_row - 1) // 2).sum())


def reduce_cycles(matrix: BinaryMatrix, seed: int, budget: int = 200) -> BinaryMatrix:
    """Greedy 4-cycle reduction by single row replacements r <- r xor r'.

    Moves are accepted only when the 4-cycle count strictly decreases, which
    preserves the GF(2) row space and the row count. Candidate pairs are
    scanned in a seeded random order; at most ``budget`` moves are accepted.
    Returns the input unchanged when no improving move exists.
    """
    rng = np.random.default_rng(seed)
    bits = matrix.bits.astype(np.uint8).copy()
    m = bits.shape[0]
    overlap = bits.astype(np.int64) @ bits.astype(np.int64).T
    moves = 0
    improved = True
    while improved and moves < budget:
        improved = False
        order = rng.permutation(m * (m - 1))
        for idx in order:
            r, rp = divmod(int(idx), m - 1)
            if rp >= r:
                rp += 1
            new_row = bits[r] ^ bits[rp]
            if not new_row.any():
                continue
            new_overlap_r = bits.astype(np.int64) @ new_row.astype(np.int64)
            new_overlap_r[r] = int(new_row.sum())  # diagonal, excluded from cost
            old_cost = _pair_cycle_cost(np.delete(overlap[r], r))
            new_cost = _pair_cycle_cost(np.delete(new_overlap_r, r))
            if new_cost < old_cost:
                bits[r] = new_row
                overlap[r, :] = new_overlap_r
                overlap[:, r] = new_overlap_r
                overlap[r, r] = int(new_row.sum())
                moves += 1
                improved = True
                if moves >= budget:
                    break
    return BinaryMatrix(bits)


# ---------------------------------------------------------------------------
# Automorphisms of cyclic codes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Permutation:
    """Permutation of variable indices; ``map[i]`` is the image of index i."""

    map: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.map, dtype=np.int64)
        n = len(m)
        if not np.array_equal(np.sort(m), np.arange(n)):
            raise ValueError("permutation map must be a bijection on [0, n)")
        object.__setattr__(self, "map", m)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n, dtype=np.int64))

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Move entry i to position map[i] along the last axis."""
        inv = np.argsort(self.map)
        return np.asarray(vec)[..., inv]

    def compose(self, other: "Permutation") -> "Permutation":
        """Permutation equal to applying ``other`` first, then ``self``."""
        return Permutation(self.map[other.map])

    def inverse(self) -> "Permutation":
        return Permutation(np.argsort(self.map))

    def __len__(self) -> int:
        return len(self.map)


def _multiplicative_order_of_two(n: int) -> int:
    order = 1
    p = 2 % n
    while p != 1:
        p = (2 * p) % n
        order += 1
    return order


def automorphism(n: int, shift: int, frobenius_power: int) -> Permutation:
    """Element i -> 2^f * i + s (mod n) of the cyclic/Frobenius group."""
    if n < 3 or n % 2 == 0:
        raise ValueError(f"unsupported code length n={n} (need odd n >= 3)")
    idx = np.arange(n, dtype=np.int64)
    return Permutation((pow(2, frobenius_power, n) * idx + shift) % n)


def sample_automorphism(n: int, seed) -> Permutation:
    """Uniform sample from the group generated by the cyclic shift
    i -> i+1 and the doubling map i -> 2i (mod n), for odd n.

    Every element has a unique representation (shift, frobenius_power), so
    sampling both uniformly samples the group uniformly. For binary cyclic
    codes both generators map codewords to codewords.
    """
    if n < 3 or n % 2 == 0:
        raise ValueError(f"unsupported code length n={n} (need odd n >= 3)")
    rng = np.random.default_rng(seed)
    order = _multiplicative_order_of_two(n)
    f = int(rng.integers(order))
    s = int(rng.integers(n))
    return automorphism(n, s, f)


# ---------------------------------------------------------------------------
# alist interchange format
# ---------------------------------------------------------------------------


def write_alist(matrix: BinaryMatrix, path) -> None:
    """Write ``matrix`` in alist layout: "N M", max degrees, per-variable and
    per-check degree lists, then 1-based neighbor lists (one line per node,
    no zero padding)."""
    graph = build_tanner(matrix)
    var_deg = [len(nb) for nb in graph.var_neighbors]
    chk_deg = [len(nb) for nb in graph.check_neighbors]
    lines = [
        f"{graph.n_vars} {graph.n_checks}",
        f"{max(var_deg)} {max(chk_deg)}",
        " ".join(str(d) for d in var_deg),
        " ".join(str(d) for d in chk_deg),
    ]
    for nb in graph.var_neighbors:
        lines.append(" ".join(str(c + 1) for c in nb))
    for nb in graph.check_neighbors:
        lines.append(" ".join(str(v + 1) for v in nb))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_alist(path) -> BinaryMatrix:
    """Read an alist file; tolerates the zero-padded variant."""
    with open(path) as fh:
        rows = [line.split() for line in fh if line.strip()]
    n, m = int(rows[0][0]), int(rows[0][1])
    bits = np.zeros((m, n), dtype=np.uint8)
    var_lines = rows[4 : 4 + n]
    for v, entries in enumerate(var_lines):
        for tok in entries:
            c = int(tok)
            if c > 0:
                bits[c - 1, v] = 1
    return BinaryMatrix(bits)
