import itertools

import numpy as np
import pytest

from bethezeta.bethe import Pseudomarginals
from bethezeta.graph import Graph, build_graph
from bethezeta.lbp import random_interior_point
from bethezeta.model import BinaryPairwiseModel


def path_graph(n):
    return build_graph([(k, k + 1) for k in range(n - 1)])


def cycle_graph(n):
    return build_graph([(min(k, (k + 1) % n), max(k, (k + 1) % n)) for k in range(n)])


def star_graph(n):
    return build_graph([(0, k) for k in range(1, n)])


def complete_graph(n):
    return build_graph([(a, b) for a in range(n) for b in range(a + 1, n)])


def example2_graph():
    # four vertices, five edges, two independent cycles sharing an edge
    return build_graph([(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)])


def example2_model(j=1.0, h=0.0):
    g = example2_graph()
    couplings = np.array([-abs(j), abs(j), abs(j), abs(j), abs(j)])
    fields = np.full(4, h) if np.isscalar(h) else np.asarray(h, float)
    return BinaryPairwiseModel(g, couplings, fields)


def random_connected_graph(rng, n, extra_edges=0):
    order = rng.permutation(n)
    edges = set()
    for k in range(1, n):
        parent = int(order[rng.integers(0, k)])
        a, b = int(order[k]), parent
        edges.add((min(a, b), max(a, b)))
    candidates = [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in edges]
    rng.shuffle(candidates)
    for a, b in candidates[:extra_edges]:
        edges.add((a, b))
    return Graph(n, sorted(edges))


def random_model(rng, g, j_scale=0.5, h_scale=0.3):
    return BinaryPairwiseModel(
        g,
        rng.uniform(-j_scale, j_scale, size=g.n_edges),
        rng.uniform(-h_scale, h_scale, size=g.n_vertices),
    )


def interior_point(rng, g, m_scale=0.7, margin_frac=0.15):
    return random_interior_point(g, rng, m_scale=m_scale, margin_frac=margin_frac)


def brute_force_spanning_trees(g):
    """Count spanning trees by enumerating all (N-1)-edge subsets."""
    n, edges = g.n_vertices, list(g.edges)
    count = 0
    for subset in itertools.combinations(range(len(edges)), n - 1):
        parent = list(range(n))

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        acyclic = True
        for k in subset:
            a, b = edges[k]
            ra, rb = find(a), find(b)
            if ra == rb:
                acyclic = False
                break
            parent[ra] = rb
        if acyclic:
            count += 1
    return count


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def assert_spectra_close(a, b, tol):
    """Greedy multiset matching of two complex spectra."""
    a = sorted(np.asarray(a, complex), key=lambda z: (z.real, z.imag))
    b = list(np.asarray(b, complex))
    assert len(a) == len(b)
    for lam in a:
        dists = [abs(lam - mu) for mu in b]
        k = int(np.argmin(dists))
        assert dists[k] <= tol, f"unmatched eigenvalue {lam}, nearest {b[k]}"
        b.pop(k)


def origin_point(g):
    return Pseudomarginals.zeros(g)
