import numpy as np
import pytest

from commlearn import codes


@pytest.fixture(scope="session")
def bch63():
    """Standard BCH(63,36) parity-check and generator matrices."""
    return codes.bch_parity_check(63, 36), codes.bch_generator_matrix(63, 36)


@pytest.fixture(scope="session")
def bch63_cr(bch63):
    """Cycle-reduced BCH(63,36) matrix (fixed seed and budget)."""
    h, _ = bch63
    return codes.reduce_cycles(h, seed=7, budget=2000)


@pytest.fixture(scope="session")
def graph63(bch63):
    return codes.build_tanner(bch63[0])


@pytest.fixture(scope="session")
def graph63_cr(bch63_cr):
    return codes.build_tanner(bch63_cr)


@pytest.fixture(scope="session")
def bch15():
    return codes.bch_parity_check(15, 7), codes.bch_generator_matrix(15, 7)


def random_codewords(generator: codes.BinaryMatrix, count: int, rng) -> np.ndarray:
    info = rng.integers(0, 2, size=(count, generator.rows))
    return (info @ generator.bits) % 2


def awgn_llrs(codewords: np.ndarray, ebn0_db: float, rate: float, rng) -> np.ndarray:
    sigma2 = 1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))
    symbols = 1.0 - 2.0 * codewords.astype(np.float64)
    y = symbols + rng.normal(0.0, np.sqrt(sigma2), size=symbols.shape)
    return 2.0 * y / sigma2
