import random

import pytest

from matchadapt.core import AdaptQuery, Matching, complete_with_dummies, validate_instance
from matchadapt.gen import random_instance
from matchadapt.oracle import enumerate_stable_matchings
from matchadapt.rotations import build_rotation_poset

EX1_PREFS = {
    "m1": ["w1", "w2", "w3"],
    "m2": ["w2", "w3", "w1"],
    "m3": ["w3", "w1", "w2"],
    "w1": ["m2", "m3", "m1"],
    "w2": ["m3", "m1", "m2"],
    "w3": ["m1", "m2", "m3"],
}

CORPUS_SIZE = 500
CORPUS_SIZES = (4, 6, 8, 10)


def make_sr(prefs):
    return validate_instance("sr", prefs)


def matching_of(instance, *pairs):
    return Matching((instance.index_of(a), instance.index_of(b)) for a, b in pairs)


def sample_query(instance, m1, seed):
    """Seeded random adaptation query: |forced| <= 2, |forbidden| <= 3, k in 0..2n."""
    rng = random.Random(seed)
    pool = list(instance.acceptable_pairs)
    forced = rng.sample(pool, min(rng.randint(0, 2), len(pool)))
    rest = [e for e in pool if e not in forced]
    forbidden = rng.sample(rest, min(rng.randint(0, 3), len(rest)))
    k = rng.randint(0, 2 * instance.n)
    return AdaptQuery.make(m1, forced=forced, forbidden=forbidden, k=k)


def named_pairs(instance, matching):
    return sorted(
        (instance.names[a], instance.names[b]) for a, b in matching.pairs
    )


@pytest.fixture(scope="session")
def ex1():
    return validate_instance(
        "sm", EX1_PREFS, left=["m1", "m2", "m3"], right=["w1", "w2", "w3"]
    )


@pytest.fixture(scope="session")
def ex1_m1(ex1):
    return matching_of(ex1, ("m1", "w1"), ("m2", "w2"), ("m3", "w3"))


@pytest.fixture(scope="session")
def ex1_poset(ex1):
    return build_rotation_poset(ex1)


@pytest.fixture(scope="session")
def sr_corpus():
    """500 seeded complete-list strict roommates instances, n in {4, 6, 8, 10}."""
    return [
        random_instance(CORPUS_SIZES[seed % len(CORPUS_SIZES)], "sr", 0.0, 1.0, seed=seed)
        for seed in range(CORPUS_SIZE)
    ]


@pytest.fixture(scope="session")
def sr_corpus_analyzed(sr_corpus):
    """(instance, oracle matchings, completed instance, poset-or-None) per corpus entry."""
    out = []
    for inst in sr_corpus:
        ms = enumerate_stable_matchings(inst)
        if ms:
            aug, _ = complete_with_dummies(inst, ms[0])
            poset = build_rotation_poset(aug)
        else:
            aug = poset = None
        out.append((inst, ms, aug, poset))
    return out
