"""Binary pairwise models, gauge transformations, JSON (de)serialisation.

A model assigns a coupling to every undirected edge and a local field to
every vertex; variables take values in {-1, +1} and the unnormalised weight
of a configuration is ``exp(sum_e J_e x_i x_j + sum_i h_i x_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveTemperature, SchemaError
from .graph import Graph

__all__ = [
    "BinaryPairwiseModel",
    "GaugeTransform",
    "apply_gauge",
    "is_equivalent_to_attractive",
    "temperature_scaled",
    "graph_to_json",
    "graph_from_json",
    "model_to_json",
    "model_from_json",
]


@dataclass(frozen=True, eq=False)
class BinaryPairwiseModel:
    graph: Graph
    couplings: np.ndarray  # one per undirected edge, aligned with graph.edges
    fields: np.ndarray  # one per vertex

    def __post_init__(self):
        couplings = np.asarray(self.couplings, dtype=float).copy()
        fields = np.asarray(self.fields, dtype=float).copy()
        if couplings.shape != (self.graph.n_edges,):
            raise ValueError(f"expected {self.graph.n_edges} couplings, got {couplings.shape}")
        if fields.shape != (self.graph.n_vertices,):
            raise ValueError(f"expected {self.graph.n_vertices} fields, got {fields.shape}")
        if not (np.isfinite(couplings).all() and np.isfinite(fields).all()):
            raise ValueError("couplings and fields must be finite")
        couplings.setflags(write=False)
        fields.setflags(write=False)
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "fields", fields)

    def is_attractive(self):
        return bool(np.all(self.couplings >= 0))


@dataclass(frozen=True, eq=False)
class GaugeTransform:
    """Per-vertex sign flips x_i -> s_i x_i."""

    signs: np.ndarray

    def __post_init__(self):
        signs = np.asarray(self.signs, dtype=np.int64).copy()
        if not np.all(np.abs(signs) == 1):
            raise ValueError("gauge signs must be +1 or -1")
        signs.setflags(write=False)
        object.__setattr__(self, "signs", signs)


def apply_gauge(model, gauge):
    """Model with couplings J_e s_i s_j and fields h_i s_i.

    Gauging is an involution and leaves inference equivalent: marginals of
    the new model are the sign-flipped marginals of the old one.
    """
    s = gauge.signs
    if s.shape != (model.graph.n_vertices,):
        raise ValueError("gauge must assign a sign to every vertex")
    i = np.array([a for a, _ in model.graph.edges], dtype=np.int64)
    j = np.array([b for _, b in model.graph.edges], dtype=np.int64)
    return BinaryPairwiseModel(
        model.graph,
        model.couplings * s[i] * s[j],
        model.fields * s,
    )


def is_equivalent_to_attractive(model):
    """A gauge making every coupling non-negative, or None if frustrated.

    The gauge is fixed along a spanning forest of the non-zero couplings
    (zero couplings impose no constraint) and then every non-zero edge is
    checked; a violated edge closes a cycle with an odd number of negative
    couplings, so no gauge can exist.
    """
    g = model.graph
    n = g.n_vertices
    signs = np.zeros(n, dtype=np.int64)
    adj = [[] for _ in range(n)]
    for k, (a, b) in enumerate(g.edges):
        if model.couplings[k] != 0.0:
            adj[a].append((b, k))
            adj[b].append((a, k))
    for root in range(n):
        if signs[root] != 0:
            continue
        signs[root] = 1
        stack = [root]
        while stack:
            v = stack.pop()
            for w, k in adj[v]:
                if signs[w] == 0:
                    signs[w] = signs[v] * (1 if model.couplings[k] > 0 else -1)
                    stack.append(w)
    for k, (a, b) in enumerate(g.edges):
        if model.couplings[k] * signs[a] * signs[b] < 0:
            return None
    return GaugeTransform(signs)


def temperature_scaled(model, t):
    """Model with all couplings and fields divided by t (> 0)."""
    if not t > 0:
        raise NonPositiveTemperature(f"temperature {t} must be positive")
    return BinaryPairwiseModel(model.graph, model.couplings / t, model.fields / t)


# -- JSON schemas -----------------------------------------------------------
#
# graph: {"vertices": N, "edges": [[i, j], ...]} with optional
#        "multigraph": true to admit self-loops / parallel edges.
# model: {"graph": <graph>, "J": {"i-j": value, ...} or [values], "h": [values]}
#        (multigraphs require the list form of "J").


def graph_to_json(g):
    obj = {"vertices": g.n_vertices, "edges": [[a, b] for a, b in g.edges]}
    if not g.simple:
        obj["multigraph"] = True
    return obj


def graph_from_json(obj):
    try:
        n = int(obj["vertices"])
        edges = [(int(a), int(b)) for a, b in obj["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"invalid graph object: {exc}") from exc
    multi = bool(obj.get("multigraph", False))
    return Graph(n, edges, allow_multi=multi)


def _edge_key(a, b):
    return f"{min(a, b)}-{max(a, b)}"


def model_to_json(model):
    g = model.graph
    if g.simple:
        couplings = {
            _edge_key(a, b): float(model.couplings[k]) for k, (a, b) in enumerate(g.edges)
        }
    else:
        couplings = [float(v) for v in model.couplings]
    return {
        "graph": graph_to_json(g),
        "J": couplings,
        "h": [float(v) for v in model.fields],
    }


def model_from_json(obj):
    try:
        graph = graph_from_json(obj["graph"])
        raw_j = obj["J"]
        h = [float(v) for v in obj["h"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"invalid model object: {exc}") from exc
    if len(h) != graph.n_vertices:
        raise SchemaError(f"expected {graph.n_vertices} field values, got {len(h)}")
    if isinstance(raw_j, dict):
        if not graph.simple:
            raise SchemaError("multigraph models must give J as a list, one entry per edge")
        couplings = []
        for a, b in graph.edges:
            key = _edge_key(a, b)
            if key not in raw_j:
                raise SchemaError(f"missing coupling for edge {key}")
            couplings.append(float(raw_j[key]))
        extra = set(raw_j) - {_edge_key(a, b) for a, b in graph.edges}
        if extra:
            raise SchemaError(f"couplings for unknown edges: {sorted(extra)}")
    else:
        couplings = [float(v) for v in raw_j]
        if len(couplings) != graph.n_edges:
            raise SchemaError(f"expected {graph.n_edges} couplings, got {len(couplings)}")
    return BinaryPairwiseModel(graph, np.array(couplings), np.array(h))
