import numpy as np
import pytest

from gapseries import ExponentSequence, SeriesSpec


def brute_force_max(spec: SeriesSpec, x: float) -> tuple[float, int]:
    """Direct scan of ln|a_n| + x*lambda_n; ties go to the largest index."""
    values = spec.log_moduli + x * spec.exponents.values
    best = values.max()
    idx = int(np.flatnonzero(values == best)[-1])
    return float(best), idx


def random_spec(rng: np.random.Generator, max_terms: int = 50) -> SeriesSpec:
    """A random finite prefix with strictly increasing exponents."""
    n = int(rng.integers(1, max_terms + 1))
    gaps = rng.uniform(0.05, 3.0, n - 1)
    lam = np.concatenate([[0.0], np.cumsum(gaps)])[:n]
    c = rng.normal(0.0, 4.0, n) - 0.05 * lam**2
    return SeriesSpec(ExponentSequence(lam), c)


def random_entire_spec(rng: np.random.Generator, n_terms: int, decay: float = 0.5) -> SeriesSpec:
    """Random prefix with quadratic coefficient decay (entire-like)."""
    gaps = rng.uniform(0.5, 2.0, n_terms - 1)
    lam = np.concatenate([[0.0], np.cumsum(gaps)])
    c = -decay * lam**2 + rng.uniform(0.0, 1.0, n_terms)
    ph = rng.uniform(0.0, 2 * np.pi, n_terms)
    return SeriesSpec(ExponentSequence(lam), c, ph)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
