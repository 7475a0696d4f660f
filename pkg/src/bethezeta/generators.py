"""Named model generators emitting schema-valid model JSON objects."""

from __future__ import annotations

import numpy as np

from .errors import UnknownGenerator

GENERATOR_NAMES = (
    "path",
    "cycle",
    "k4",
    "example2",
    "theta",
    "type4-loops",
    "type5-loops",
    "random-gnm",
)


def _fields(n, h):
    if np.isscalar(h):
        return [float(h)] * n
    h = [float(v) for v in h]
    if len(h) != n:
        raise ValueError(f"expected {n} field values, got {len(h)}")
    return h


def _simple_model(n, edges, couplings, h):
    return {
        "graph": {"vertices": n, "edges": [[a, b] for a, b in edges]},
        "J": {f"{a}-{b}": float(jv) for (a, b), jv in zip(edges, couplings)},
        "h": _fields(n, h),
    }


def _multi_model(n, edges, couplings, h):
    return {
        "graph": {"vertices": n, "edges": [[a, b] for a, b in edges], "multigraph": True},
        "J": [float(v) for v in couplings],
        "h": _fields(n, h),
    }


def builtin_graphs(name, n=4, m=None, j=1.0, h=0.0, seed=0):
    """Model JSON for the named instance family.

    ``example2`` is the four-vertex, five-edge graph with two independent
    cycles and exactly one negative coupling; ``theta`` (two vertices, three
    parallel edges), ``type4-loops`` (two looped vertices joined by a
    bridge) and ``type5-loops`` (one vertex with two self-loops) are the
    reduced shapes that every two-cycle graph collapses to.
    """
    if name == "path":
        if n < 2:
            raise ValueError("path needs n >= 2")
        edges = [(k, k + 1) for k in range(n - 1)]
        return _simple_model(n, edges, [j] * len(edges), h)
    if name == "cycle":
        if n < 3:
            raise ValueError("cycle needs n >= 3")
        edges = [(k, (k + 1) % n) for k in range(n)]
        edges = [(min(a, b), max(a, b)) for a, b in edges]
        return _simple_model(n, edges, [j] * n, h)
    if name == "k4":
        edges = [(a, b) for a in range(4) for b in range(a + 1, 4)]
        return _simple_model(4, edges, [j] * 6, h if not np.isscalar(h) else [h] * 4)
    if name == "example2":
        edges = [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)]
        couplings = [-abs(j), abs(j), abs(j), abs(j), abs(j)]
        return _simple_model(4, edges, couplings, h)
    if name == "theta":
        return _multi_model(2, [(0, 1)] * 3, [j] * 3, h if not np.isscalar(h) else [h] * 2)
    if name == "type4-loops":
        return _multi_model(2, [(0, 0), (0, 1), (1, 1)], [j] * 3, h if not np.isscalar(h) else [h] * 2)
    if name == "type5-loops":
        return _multi_model(1, [(0, 0), (0, 0)], [j] * 2, h if not np.isscalar(h) else [h])
    if name == "random-gnm":
        if m is None:
            m = n
        if m < n - 1 or m > n * (n - 1) // 2:
            raise ValueError(f"random-gnm needs n-1 <= m <= n(n-1)/2, got n={n}, m={m}")
        rng = np.random.default_rng(seed)
        edges = _random_connected_edges(rng, n, m)
        couplings = np.round(rng.uniform(-abs(j), abs(j), size=m), 6)
        fields = np.round(rng.uniform(-0.5, 0.5, size=n), 6)
        return _simple_model(n, edges, couplings, fields if np.isscalar(h) else h)
    raise UnknownGenerator(f"unknown generator {name!r}; choose from {GENERATOR_NAMES}")


def _random_connected_edges(rng, n, m):
    """A uniform-ish random spanning tree plus random extra edges."""
    order = rng.permutation(n)
    edges = set()
    for k in range(1, n):
        parent = order[rng.integers(0, k)]
        a, b = int(order[k]), int(parent)
        edges.add((min(a, b), max(a, b)))
    candidates = [
        (a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in edges
    ]
    extra = m - len(edges)
    if extra:
        chosen = rng.choice(len(candidates), size=extra, replace=False)
        for idx in chosen:
            edges.add(candidates[int(idx)])
    return sorted(edges)
