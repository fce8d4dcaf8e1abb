import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_instance
from distmod.attributes import KernelSpec, mean_pairwise_distance
from distmod.graph import Partition, load_graph
from distmod.engine import CommunityAggregates, apply_move, best_move, modularity, move_gain
from distmod.nullmodels import DistModel, NGModel, SpaModel


def brute_q(A, P, labels):
    n = len(labels)
    two_m = A.sum()
    return sum(A[i, j] - P[i, j] for i in range(n) for j in range(n) if labels[i] == labels[j]) / two_m


def models_for(g, dist, lazy=False):
    cap = 0 if lazy else 20000
    dbar = mean_pairwise_distance(dist)
    return {
        "ng": NGModel(g),
        "spa": SpaModel(g, dist, g.strengths, dbar / 3, dense_cap=cap),
        "dist": DistModel(g, dist, KernelSpec("gaussian", dbar), dense_cap=cap),
    }


def test_two_triangles_q(two_triangles):
    assert modularity(two_triangles, NGModel(two_triangles), [0, 0, 0, 1, 1, 1]) == pytest.approx(0.5, abs=1e-15)


@given(st.integers(0, 5000), st.integers(2, 25))
def test_all_in_one_is_zero(seed, n):
    g, dist, _ = random_instance(seed, n=n)
    for m in models_for(g, dist).values():
        assert abs(modularity(g, m, np.zeros(n, dtype=int))) < 1e-12


@given(st.integers(0, 5000), st.integers(2, 20), st.sampled_from(["ng", "spa", "dist"]))
def test_matches_double_sum(seed, n, kind):
    g, dist, _ = random_instance(seed, n=n, loops=seed % 2 == 0)
    m = models_for(g, dist)[kind]
    labels = np.random.default_rng(seed).integers(0, 3, size=n)
    q = modularity(g, m, labels)
    assert q == pytest.approx(brute_q(g.dense(), m.matrix(), labels), abs=1e-12)
    assert -1.0 <= q <= 1.0


@given(st.integers(0, 5000), st.integers(2, 20))
def test_constant_kernel_equals_ng(seed, n):
    g, dist, _ = random_instance(seed, n=n)
    labels = np.random.default_rng(seed).integers(0, 4, size=n)
    flat = DistModel(g, dist, KernelSpec("constant"))
    assert abs(modularity(g, flat, labels) - modularity(g, NGModel(g), labels)) < 1e-12


def test_bridge_endpoint_returns_home():
    # K4 on 0..3, K4 on 4..7, bridge 3-4; node 3 mislabeled into the right clique
    edges = [(i, j, 1.0) for i in range(4) for j in range(i + 1, 4)]
    edges += [(i, j, 1.0) for i in range(4, 8) for j in range(i + 1, 8)]
    edges.append((3, 4, 1.0))
    g = load_graph(edges)
    m = NGModel(g)
    part = Partition(g, [0, 0, 0, 1, 1, 1, 1, 1])
    aggs = CommunityAggregates(g, m, part)
    gains = {lab: move_gain(g, part, aggs, 3, lab) for lab in (0, 1)}
    assert gains[0] > gains[1] == 0.0
    label, gain = best_move(g, m, part, aggs, 3)
    assert label == 0
    assert gain == pytest.approx(gains[0], abs=1e-12)


def test_fixed_point_and_isolated():
    g = load_graph([(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], n_nodes=4)
    m = NGModel(g)
    part = Partition(g, [0, 0, 0, 3])
    aggs = CommunityAggregates(g, m, part)
    assert best_move(g, m, part, aggs, 0) == (0, 0.0)
    assert best_move(g, m, part, aggs, 3) == (3, 0.0)


@given(st.integers(0, 5000), st.sampled_from(["ng", "spa", "dist"]), st.booleans())
def test_best_move_oracle(seed, kind, lazy):
    n = 12
    g, dist, _ = random_instance(seed, n=n)
    m = models_for(g, dist, lazy)[kind]
    rng = np.random.default_rng(seed)
    part = Partition(g, rng.integers(0, 4, size=n))
    aggs = CommunityAggregates(g, m, part)
    i = int(rng.integers(n))
    q0 = modularity(g, m, part)
    cands = {int(part.labels[i])} | {int(part.labels[j]) for j in g.neighbors(i)[0]}
    full = {}
    for lab in cands:
        trial = part.labels.copy()
        trial[i] = lab
        full[lab] = (modularity(g, m, trial) - q0) * g.two_m
    label, gain = best_move(g, m, part, aggs, i)
    assert gain >= 0
    assert gain == pytest.approx(max(full.values()), abs=1e-9)
    assert full[label] == pytest.approx(max(full.values()), abs=1e-9)


@pytest.mark.parametrize("kind", ["ng", "spa", "dist"])
@pytest.mark.parametrize("lazy", [False, True])
def test_incremental_consistency(kind, lazy):
    g, dist, _ = random_instance(21, n=50, loops=True)
    m = models_for(g, dist, lazy)[kind]
    rng = np.random.default_rng(0)
    part = Partition(g, rng.integers(0, 6, size=g.n))
    aggs = CommunityAggregates(g, m, part)
    q = modularity(g, m, part)
    for _ in range(1000):
        i = int(rng.integers(g.n))
        new = int(rng.integers(g.n))
        q += move_gain(g, part, aggs, i, new) / g.two_m
        apply_move(part, aggs, i, new)
    assert abs(q - modularity(g, m, part)) < 1e-8
    assert aggs.check()


def test_move_then_back_restores():
    g, dist, _ = random_instance(2, n=20)
    m = models_for(g, dist)["dist"]
    part = Partition(g, np.arange(20) % 3)
    aggs = CommunityAggregates(g, m, part)
    before = aggs._table.copy()
    apply_move(part, aggs, 5, 0)
    apply_move(part, aggs, 5, 2)
    np.testing.assert_allclose(aggs._table, before, atol=1e-12)


def test_leaving_singleton_reduces_count():
    g = load_graph([(0, 1, 1.0), (1, 2, 1.0)])
    part = Partition(g, [0, 1, 2])
    aggs = CommunityAggregates(g, NGModel(g), part)
    apply_move(part, aggs, 2, 1)
    assert part.n_communities == 2
