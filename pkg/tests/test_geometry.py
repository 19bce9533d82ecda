from itertools import combinations, permutations

import pytest

from crnstrata.geometry import (
    ScaleError,
    SiphonSet,
    check_alpha,
    enumerate_adjacent_orderings,
    enumerate_siphons,
    face_adjacent,
    is_siphon,
    stratum_nonempty,
)
from crnstrata.network import parse_network

import netgen

# 1-based orderings as printed for the two worked examples
EX1_ORDERINGS = {(1, 2, 4, 3), (1, 4, 2, 3), (2, 1, 4, 3), (2, 4, 1, 3), (4, 1, 2, 3), (4, 2, 1, 3)}
EX2_ORDERINGS = {(1, 4, 2, 3), (1, 4, 3, 2), (4, 1, 2, 3), (4, 1, 3, 2), (4, 2, 1, 3)}


def _one_based(orderings):
    return {tuple(i + 1 for i in mu) for mu in orderings}


def test_siphons_example1(ex1):
    sip = enumerate_siphons(ex1)
    assert [(s.one_based(), s.minimal) for s in sip] == [((1, 2), True), ((1, 2, 3), False)]


def test_no_siphon_when_inflow():
    net = parse_network("0 -> A; 1\nA -> B; 1")
    assert enumerate_siphons(net) == []


def _brute_force(net):
    found = []
    for size in range(1, net.m + 1):
        for subset in combinations(range(net.m), size):
            if is_siphon(net, subset):
                found.append(subset)
    return found


def test_siphons_match_definition(rng):
    for m in range(1, 9):
        net = netgen.random_network(rng, m, int(rng.integers(1, 2 * m + 2)), max_coeff=1)
        sip = enumerate_siphons(net)
        assert [s.indices for s in sip] == _brute_force(net)
        all_sets = [set(s.indices) for s in sip]
        for s in sip:
            proper = any(t < set(s.indices) for t in all_sets)
            assert s.minimal == (not proper)


def test_siphon_scale_cap(ex1):
    with pytest.raises(ScaleError):
        enumerate_siphons(ex1, max_species=2)


def test_empty_stratum():
    net = parse_network("0 <-> A1; 1, 1\nA2 <-> A1 + A2; 1, 1")
    assert net.complexes == ((0, 0), (1, 0), (0, 1), (1, 1))
    rec = stratum_nonempty(net, (2, 3, 1, 0))
    assert not rec.nonempty
    assert stratum_nonempty(net, (3, 1, 2, 0)).nonempty


def test_face_adjacency_examples(ex1):
    face = SiphonSet((0, 1))
    assert face_adjacent(ex1, (0, 1, 3, 2), face).adjacent
    res = face_adjacent(ex1, (2, 0, 1, 3), face)
    assert not res.adjacent
    # v is a non-negative combination of the ordering differences with v_I >= 0, v_I != 0
    assert all(lam >= 0 for lam in res.farkas_lambda)
    assert all(res.farkas_v[i] >= 0 for i in face.indices) and any(res.farkas_v)


def test_face_adjacent_rejects_empty_stratum():
    net = parse_network("0 <-> A1; 1, 1\nA2 <-> A1 + A2; 1, 1")
    with pytest.raises(ValueError):
        face_adjacent(net, (2, 3, 1, 0), SiphonSet((0,)))


def test_adjacent_orderings_example1(ex1):
    mus = enumerate_adjacent_orderings(ex1, SiphonSet((0, 1)))
    assert _one_based(mus) == EX1_ORDERINGS


def test_adjacent_orderings_example2(ex2):
    mus = enumerate_adjacent_orderings(ex2, SiphonSet((0, 1)))
    assert _one_based(mus) == EX2_ORDERINGS


def test_pruned_search_equals_full_scan(ex1, ex2, rng):
    nets = [ex1, ex2] + [netgen.random_balanced_network(rng) for _ in range(5)]
    for net in nets:
        for sip in enumerate_siphons(net):
            full = []
            for mu in permutations(range(net.n)):
                rec = stratum_nonempty(net, mu)
                if rec.nonempty and face_adjacent(net, mu, sip, rec).adjacent:
                    full.append(mu)
            assert enumerate_adjacent_orderings(net, sip) == sorted(full)


def test_parallel_enumeration_matches(ex2):
    face = SiphonSet((0, 1))
    assert enumerate_adjacent_orderings(ex2, face, workers=2) == enumerate_adjacent_orderings(ex2, face)


def test_ordering_cap(ex1):
    with pytest.raises(ScaleError):
        enumerate_adjacent_orderings(ex1, SiphonSet((0, 1)), max_complexes=3)


def test_check_alpha(ex1):
    face = SiphonSet((0, 1))
    mus = enumerate_adjacent_orderings(ex1, face)
    assert check_alpha(ex1, (-1, -1, 0), mus, face)
    assert not check_alpha(ex1, (0, -1, 0), mus, face)
    assert not check_alpha(ex1, (-1, -1, 1), mus, face)


def test_strata_partition_random_points(rng):
    # a generic point lies in exactly the stratum given by sorting log monomials
    import numpy as np

    net = parse_network("0 <-> A1; 1, 1\nA2 <-> A1 + A2; 1, 1")
    for _ in range(20):
        y = rng.normal(size=2)
        vals = net.Z @ y
        mu = tuple(int(i) for i in np.argsort(-vals))
        assert stratum_nonempty(net, mu).nonempty
