import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpkcore.graph import VertexSubset, from_edge_list, generate
from dpkcore.oracle import (
    CapacityError,
    brute_force_densest,
    degeneracy,
    degeneracy_ordering,
    density,
    exact_core_numbers,
    induced_edge_count,
    orient_and_max_outdegree,
    out_degrees,
)
from helpers import brute_core_numbers, classical_core_numbers, k4_with_pendant, petersen


@st.composite
def small_graphs(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return from_edge_list(chosen, n)


class TestCoreNumbers:
    def test_examples(self):
        assert exact_core_numbers(generate("path", 5)) == [1] * 5
        assert exact_core_numbers(generate("complete", 4)) == [3] * 4
        assert exact_core_numbers(generate("star", 6)) == [1] * 6
        assert exact_core_numbers(petersen()) == [3] * 10
        assert exact_core_numbers(from_edge_list([], 3)) == [0, 0, 0]

    def test_k4_with_pendant(self):
        g = k4_with_pendant()
        assert exact_core_numbers(g) == [3, 3, 3, 3, 1]
        assert brute_core_numbers(g) == [3, 3, 3, 3, 1]

    def test_matches_literal_peel_on_random_graphs(self):
        for i in range(100):
            n = 2 + i % 63
            p = (0.05, 0.1, 0.3, 0.6)[i % 4]
            g = generate("gnp", n, seed=500 + i, p=p)
            assert exact_core_numbers(g) == classical_core_numbers(g), (n, p)

    def test_corpus(self, graph_corpus):
        for name, g in graph_corpus:
            assert exact_core_numbers(g) == classical_core_numbers(g), name

    @settings(max_examples=80)
    @given(small_graphs(max_n=11))
    def test_definition(self, g):
        assert exact_core_numbers(g) == brute_core_numbers(g)

    @settings(max_examples=60)
    @given(small_graphs(max_n=12))
    def test_k_core_is_maximal(self, g):
        core = exact_core_numbers(g)
        adj = [set(a) for a in g.adj]
        for k in range(1, max(core, default=0) + 1):
            s = {v for v in range(g.n) if core[v] >= k}
            assert all(len(adj[v] & s) >= k for v in s)
            # No vertex outside can be added while keeping min degree k.
            for v in set(range(g.n)) - s:
                t = s | {v}
                assert min(len(adj[u] & t) for u in t) < k

    def test_degeneracy_ordering_outdegree(self, graph_corpus):
        for name, g in graph_corpus:
            order = degeneracy_ordering(g)
            assert orient_and_max_outdegree(g, order) == degeneracy(g), name


class TestDensity:
    def test_examples(self):
        g = generate("complete", 4)
        assert density(g, VertexSubset.all(g)) == Fraction(3, 2)
        assert density(g, VertexSubset.of(g, {0, 1})) == Fraction(1, 2)
        assert induced_edge_count(petersen(), frozenset(range(10))) == 15

    def test_empty_subset(self):
        g = generate("path", 3)
        with pytest.raises(ValueError):
            density(g, VertexSubset.of(g, set()))

    def test_brute_force_examples(self):
        r = brute_force_densest(petersen())
        assert r.density == Fraction(3, 2) and len(r.subset) == 10
        r = brute_force_densest(k4_with_pendant())
        assert r.subset.sorted() == [0, 1, 2, 3] and r.density == Fraction(3, 2)
        r = brute_force_densest(from_edge_list([], 3))
        assert r.density == 0 and r.subset.sorted() == [0]

    def test_capacity(self):
        with pytest.raises(CapacityError):
            brute_force_densest(generate("path", 21))

    @settings(max_examples=50)
    @given(small_graphs(max_n=15))
    def test_sandwich(self, g):
        # Max core kmax satisfies kmax/2 <= D* <= kmax.
        kmax = degeneracy(g)
        d = brute_force_densest(g).density
        assert Fraction(kmax, 2) <= d <= kmax

    @settings(max_examples=40)
    @given(small_graphs(max_n=8))
    def test_brute_force_is_max(self, g):
        best = brute_force_densest(g).density
        for r in range(1, g.n + 1):
            for s in itertools.combinations(range(g.n), r):
                assert density(g, VertexSubset.of(g, s)) <= best


class TestOrientation:
    def test_path_order(self):
        g = generate("path", 4)
        assert out_degrees(g, [0, 1, 2, 3]) == [1, 1, 1, 0]
        assert orient_and_max_outdegree(g, [1, 0, 2, 3]) == 2

    @pytest.mark.parametrize("order", [[0, 1, 2], [0, 1, 1, 2], [0, 1, 2, 4]])
    def test_not_a_permutation(self, order):
        with pytest.raises(ValueError):
            orient_and_max_outdegree(generate("path", 4), order)
