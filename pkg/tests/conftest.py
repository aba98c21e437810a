import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import gens  # noqa: E402


@pytest.fixture(scope="session")
def mu_corpus():
    """The 20 random mu-systems shared by the fixpoint criteria."""
    rng = random.Random(20240)
    return [gens.random_mu_system(rng, max_vars=2, bits=1) for _ in range(20)]


@pytest.fixture(scope="session")
def small_digraphs_1bit():
    from disto.graphs import enumerate_digraphs
    return list(enumerate_digraphs(3, bits=1, rels=1))


@pytest.fixture(scope="session")
def small_digraphs_unlabeled():
    from disto.graphs import enumerate_digraphs
    return list(enumerate_digraphs(3, bits=0, rels=1))
