import numpy as np
import pytest

from bergman_lab import (MomentTable, QuadSpec, RadialWeight,
                         boundedness_functional, build_coeffs)
from bergman_lab.utils import dyadic_radii


@pytest.fixture(scope="session")
def weights():
    return {
        "std0": RadialWeight.standard(0.0, "std0"),
        "std1": RadialWeight.standard(1.0, "std1"),
        "std2": RadialWeight.standard(2.0, "std2"),
        "std5": RadialWeight.standard(5.0, "std5"),
        "exp11": RadialWeight.exponential(1.0, 1.0, "exp11"),
        "exp21": RadialWeight.exponential(2.0, 1.0, "exp21"),
        "log0": RadialWeight.logarithmic(0.0, "log0"),
    }


@pytest.fixture(scope="session")
def tables(weights):
    return {key: MomentTable(w) for key, w in weights.items()}


@pytest.fixture(scope="session")
def coeffs_std0_n2(tables):
    return build_coeffs(tables["std0"], 2, d_max=1 << 19)


@pytest.fixture(scope="session")
def coeffs_std1_n2(tables):
    return build_coeffs(tables["std1"], 2, d_max=1 << 19)


@pytest.fixture
def tight_spec():
    return QuadSpec(tolerance=1.0e-12, rel_tolerance=1.0e-12)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def functional_profiles(weights, tables):
    """Cached M(r) sweeps over r = 1 - 2^-k, k = 1..12, computed on demand.

    Shared between the analysis invariants and the acceptance suite; the
    deep radii dominate the suite's runtime.
    """
    cache: dict[str, list[tuple[float, float]]] = {}

    def get(key: str, n: int = 2):
        tag = f"{key}-n{n}"
        if tag not in cache:
            k = build_coeffs(tables[key], n, d_max=1 << 19)
            prof = []
            for r in dyadic_radii(12, 1):
                prof.append((float(r),
                             boundedness_functional(k, weights[key], float(r))))
            cache[tag] = prof
        return cache[tag]

    return get
