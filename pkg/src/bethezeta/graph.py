"""Undirected graphs with a directed-edge structure, prime cycles, reductions.

Undirected edge ``k`` joining ``i`` and ``j`` contributes the directed pair
``2k`` (``i -> j``) and ``2k + 1`` (``j -> i``), so the inverse of a directed
edge ``e`` is always ``e ^ 1``.  Input graphs are simple and connected;
cycle-preserving reductions may return graphs with self-loops and parallel
edges, for which all operations here remain valid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DisconnectedGraph,
    DuplicateEdge,
    GraphError,
    LimitExceeded,
    NumericalIntegrityError,
    SelfLoop,
)

DEFAULT_CYCLE_CAP = 200_000
_WALK_BUDGET = 10_000_000


class Graph:
    """Immutable vertex/edge structure with precomputed directed-edge arrays.

    Attributes
    ----------
    n_vertices : int
    edges : tuple of (int, int)
        Undirected edges; pairs are stored as given (normalised so that
        ``i <= j`` for simple graphs).
    origin, terminus : ndarray of int, shape (2M,)
        Endpoints of each directed edge.
    degrees : ndarray of int, shape (N,)
        Number of incident edge slots; a self-loop counts twice.
    simple : bool
        True when the graph has no self-loops or parallel edges.
    """

    def __init__(self, n_vertices, edges, *, allow_multi=False):
        n_vertices = int(n_vertices)
        if n_vertices < 1:
            raise GraphError("graph needs at least one vertex")
        pairs = []
        for a, b in edges:
            a, b = int(a), int(b)
            if not (0 <= a < n_vertices and 0 <= b < n_vertices):
                raise GraphError(f"edge ({a},{b}) outside vertex range 0..{n_vertices - 1}")
            pairs.append((a, b) if a <= b else (b, a))
        if not allow_multi:
            seen = set()
            for a, b in pairs:
                if a == b:
                    raise SelfLoop(f"self-loop at vertex {a}")
                if (a, b) in seen:
                    raise DuplicateEdge(f"duplicate edge ({a},{b})")
                seen.add((a, b))
        self.n_vertices = n_vertices
        self.edges = tuple(pairs)
        self.simple = not allow_multi

        m = len(pairs)
        origin = np.empty(2 * m, dtype=np.int64)
        terminus = np.empty(2 * m, dtype=np.int64)
        for k, (a, b) in enumerate(pairs):
            origin[2 * k], terminus[2 * k] = a, b
            origin[2 * k + 1], terminus[2 * k + 1] = b, a
        degrees = np.zeros(n_vertices, dtype=np.int64)
        np.add.at(degrees, origin, 1)

        self.origin = origin
        self.terminus = terminus
        self.degrees = degrees
        for arr in (self.origin, self.terminus, self.degrees):
            arr.setflags(write=False)
        self._check_connected()

    def _check_connected(self):
        if self.n_vertices == 1:
            return
        adj = [[] for _ in range(self.n_vertices)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        seen = np.zeros(self.n_vertices, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        if not seen.all():
            missing = int(np.flatnonzero(~seen)[0])
            raise DisconnectedGraph(f"vertex {missing} unreachable from vertex 0")

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_directed(self):
        return 2 * len(self.edges)

    @staticmethod
    def inverse(e):
        """Index of the oppositely directed copy of directed edge ``e``."""
        return e ^ 1

    def edge_of(self, e):
        """Undirected edge index of directed edge ``e``."""
        return e // 2

    def incoming(self, i):
        """Directed edges whose terminus is vertex ``i``."""
        return np.flatnonzero(self.terminus == i)

    def __repr__(self):
        kind = "simple" if self.simple else "multi"
        return f"Graph(N={self.n_vertices}, M={self.n_edges}, {kind})"


@dataclass(frozen=True)
class PrimeCycle:
    """Equivalence class of primitive non-backtracking closed walks.

    ``edges`` is the canonical representative: the lexicographically minimal
    rotation of the directed-edge sequence.
    """

    edges: tuple

    @property
    def canonical_form(self):
        return self.edges

    @property
    def length(self):
        return len(self.edges)

    def weight(self, u):
        """Product of the per-directed-edge weights along the cycle."""
        u = np.asarray(u, dtype=float)
        out = 1.0
        for e in self.edges:
            out *= u[e]
        return out


def build_graph(edge_list):
    """Build a simple connected graph from a list of vertex pairs.

    Vertex indices must be contiguous from 0 (the vertex count is inferred
    as ``max index + 1``).  Raises ``SelfLoop``, ``DuplicateEdge`` or
    ``DisconnectedGraph`` on invalid input.
    """
    edge_list = list(edge_list)
    if not edge_list:
        raise GraphError("empty edge list")
    n = 1 + max(max(int(a), int(b)) for a, b in edge_list)
    return Graph(n, edge_list)


def directed_edge_matrix(g):
    """The 2M x 2M non-backtracking 0/1 matrix on directed edges.

    Entry (e, e') is 1 iff e is not the inverse of e' and the origin of e is
    the terminus of e', i.e. e' can be followed by e without backtracking.
    """
    idx = np.arange(g.n_directed)
    feeds = g.origin[:, None] == g.terminus[None, :]
    not_reverse = idx[:, None] != (idx ^ 1)[None, :]
    return (feeds & not_reverse).astype(float)


def nonbacktracking_spectral_radius(g):
    """Spectral radius of the directed-edge matrix (dense eigensolver)."""
    if g.n_edges == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(directed_edge_matrix(g)))))


def enumerate_prime_cycles(g, max_len, cap=DEFAULT_CYCLE_CAP):
    """All prime cycles of length at most ``max_len``, one per class.

    Depth-first search over non-backtracking walks: walks starting at
    directed edge ``s`` may only use edges with index >= s, so each cycle is
    produced from its minimal edge, and a closure is kept only when the walk
    equals its lexicographically minimal rotation and is not a power of a
    shorter period.  Results are sorted by (length, edge sequence).
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    n_dir = g.n_directed
    succ = [
        [int(f) for f in np.flatnonzero(g.terminus == g.origin[e]) if f != (e ^ 1)]
        for e in range(n_dir)
    ]
    cycles = []
    budget = _WALK_BUDGET

    def record(path):
        s = path[0]
        for p in range(1, len(path)):
            if path[p] != s:
                continue
            rot = path[p:] + path[:p]
            if rot <= path:
                return  # non-canonical rotation, or a power of a shorter walk
        cycles.append(PrimeCycle(tuple(path)))
        if len(cycles) > cap:
            raise LimitExceeded(f"more than {cap} prime cycles up to length {max_len}")

    for s in range(n_dir):
        path = [s]
        iters = [iter([f for f in succ[s] if f >= s])]
        while iters:
            budget -= 1
            if budget <= 0:
                raise LimitExceeded("non-backtracking walk budget exhausted")
            f = next(iters[-1], None)
            if f is None:
                iters.pop()
                path.pop()
                continue
            if f == s:
                record(path)
            if len(path) < max_len:
                path.append(f)
                iters.append(iter([x for x in succ[f] if x >= s]))

    cycles.sort(key=lambda c: (c.length, c.edges))
    return cycles


def spanning_tree_count(g):
    """Number of spanning trees via a principal cofactor of the Laplacian.

    The float determinant is rounded to the nearest integer; a deviation
    beyond tolerance raises ``NumericalIntegrityError``.  Self-loops do not
    contribute; parallel edges count with multiplicity.
    """
    n = g.n_vertices
    if n == 1:
        return 1
    lap = np.zeros((n, n))
    for a, b in g.edges:
        if a == b:
            continue
        lap[a, a] += 1.0
        lap[b, b] += 1.0
        lap[a, b] -= 1.0
        lap[b, a] -= 1.0
    det = float(np.linalg.det(lap[1:, 1:]))
    count = round(det)
    if abs(det - count) > 1e-6 * max(1.0, abs(det)):
        raise NumericalIntegrityError(f"spanning-tree determinant {det} is not near an integer")
    if count < 1:
        raise NumericalIntegrityError(f"spanning-tree count {count} < 1 on a connected graph")
    return int(count)


def cycle_rank(g):
    """Number of independent cycles, M - N + 1 for a connected graph."""
    return g.n_edges - g.n_vertices + 1


def reduce_preserving_prime_cycles(g, edge_weights):
    """Shrink a graph without changing its set of prime cycles.

    Repeatedly (a) removes degree-1 vertices together with their pendant
    edge and (b) suppresses degree-2 vertices, merging the two incident
    edges into one whose weight is, per orientation, the product of the
    merged weights.  Neither operation touches any prime cycle, so the edge
    zeta function of the reduction (with the reduced weights) equals that of
    the input.

    Parameters
    ----------
    g : Graph
    edge_weights : array of shape (2M,)
        One weight per directed edge of ``g``.

    Returns
    -------
    (reduced, weights, mapping)
        ``reduced`` may contain self-loops and parallel edges.  ``weights``
        has shape (2 * M_reduced,).  ``mapping[d]`` is the tuple of original
        directed-edge indices composing reduced directed edge ``d``.  A tree
        reduces to a single vertex with no edges.
    """
    w = np.asarray(edge_weights, dtype=float)
    if w.shape != (g.n_directed,):
        raise ValueError(f"expected {g.n_directed} directed-edge weights, got {w.shape}")

    # super-edge id -> (a, b, path a->b, path b->a); paths are original directed edges
    super_edges = {
        k: (a, b, (2 * k,), (2 * k + 1,)) for k, (a, b) in enumerate(g.edges)
    }
    next_id = g.n_edges

    def path_through(eid, v):
        """(other endpoint, path other->v, path v->other) for edge eid at v."""
        a, b, pab, pba = super_edges[eid]
        if v == b:
            return a, pab, pba
        return b, pba, pab

    while True:
        incidence = {}
        for eid, (a, b, _, _) in super_edges.items():
            incidence.setdefault(a, []).append(eid)
            incidence.setdefault(b, []).append(eid)
        # (a) pendant removal
        pendant = sorted(v for v, eids in incidence.items() if len(eids) == 1)
        if pendant:
            del super_edges[incidence[pendant[0]][0]]
            continue
        # (b) degree-2 suppression (skip vertices whose two slots are one self-loop)
        done = True
        for v in sorted(incidence):
            eids = incidence[v]
            if len(eids) != 2 or eids[0] == eids[1]:
                continue
            ea, eb = eids
            x, x_to_v, v_to_x = path_through(ea, v)
            y, y_to_v, v_to_y = path_through(eb, v)
            super_edges[next_id] = (x, y, x_to_v + v_to_y, y_to_v + v_to_x)
            next_id += 1
            del super_edges[ea]
            del super_edges[eb]
            done = False
            break
        if done:
            break

    if not super_edges:
        return Graph(1, []), np.zeros(0), ()

    order = sorted(super_edges)
    used = sorted({v for eid in order for v in super_edges[eid][:2]})
    relabel = {v: i for i, v in enumerate(used)}

    # keep each stored pair in (min, max) order so the directed-index
    # convention of Graph matches the per-orientation paths
    red_edges = []
    weights = np.empty(2 * len(order))
    mapping = []
    for idx, eid in enumerate(order):
        a, b, pab, pba = super_edges[eid]
        ra, rb = relabel[a], relabel[b]
        if ra > rb:
            ra, rb = rb, ra
            pab, pba = pba, pab
        red_edges.append((ra, rb))
        weights[2 * idx] = np.prod(w[list(pab)])
        weights[2 * idx + 1] = np.prod(w[list(pba)])
        mapping.append(tuple(pab))
        mapping.append(tuple(pba))
    reduced = Graph(len(used), red_edges, allow_multi=True)
    return reduced, weights, tuple(mapping)
