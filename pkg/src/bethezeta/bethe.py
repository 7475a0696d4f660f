"""The Bethe free energy in mean/correlation coordinates.

A point q = (m, chi) carries one mean per vertex and one correlation per
undirected edge.  The induced beliefs are

    b_ij(x_i, x_j) = (1 + m_i x_i + m_j x_j + chi_ij x_i x_j) / 4
    b_i(x_i)       = (1 + m_i x_i) / 2

and the admissible domain L(G) is the open polytope where all 4M pair
beliefs are positive.  The free energy splits into an energy part, linear
in the couplings and fields, plus an entropy part depending on q only; its
Hessian therefore never depends on the model parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import OutOfDomain

# points closer to the boundary than this are treated as outside, to keep
# logs and reciprocals of the beliefs well conditioned
DOMAIN_MARGIN_FLOOR = 1e-9


@dataclass(eq=False)
class Pseudomarginals:
    """Means per vertex and correlations per undirected edge."""

    m: np.ndarray
    chi: np.ndarray

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=float).copy()
        self.chi = np.asarray(self.chi, dtype=float).copy()

    @classmethod
    def zeros(cls, g):
        return cls(np.zeros(g.n_vertices), np.zeros(g.n_edges))

    @classmethod
    def from_packed(cls, g, x):
        x = np.asarray(x, dtype=float)
        return cls(x[: g.n_vertices], x[g.n_vertices :])

    def pack(self):
        return np.concatenate([self.m, self.chi])

    def copy(self):
        return Pseudomarginals(self.m, self.chi)


class DomainCheck(NamedTuple):
    inside: bool
    margin: float


def _endpoint_indices(g):
    i = np.fromiter((a for a, _ in g.edges), dtype=np.int64, count=g.n_edges)
    j = np.fromiter((b for _, b in g.edges), dtype=np.int64, count=g.n_edges)
    return i, j


def edge_forms(g, q):
    """The four linear forms 4*b_ij per edge, columns (++, +-, -+, --)."""
    i, j = _endpoint_indices(g)
    mi, mj, chi = q.m[i], q.m[j], q.chi
    return np.column_stack(
        [1 + mi + mj + chi, 1 + mi - mj - chi, 1 - mi + mj - chi, 1 - mi - mj + chi]
    )


def in_domain(g, q):
    """Membership in L(G) together with the distance to the boundary.

    The margin is the minimum of the 4M edge forms (for an edgeless graph,
    of the vertex forms 1 +- m_i); the point is inside iff it is positive.
    """
    vertex_forms = np.concatenate([1 + q.m, 1 - q.m])
    if g.n_edges:
        margin = float(min(edge_forms(g, q).min(), vertex_forms.min()))
    else:
        margin = float(vertex_forms.min())
    return DomainCheck(margin > 0.0, margin)


def require_interior(g, q, floor=DOMAIN_MARGIN_FLOOR):
    check = in_domain(g, q)
    if check.margin < floor:
        raise OutOfDomain(f"margin {check.margin:.3e} below floor {floor:.0e}")
    return check


def free_energy(model, q):
    """Bethe free energy: -(J . chi) - (h . m) plus the Bethe entropy terms."""
    g = model.graph
    require_interior(g, q)
    forms = edge_forms(g, q)
    b_pair = forms / 4.0
    pair_entropy = float(np.sum(b_pair * np.log(b_pair)))
    b_plus = (1 + q.m) / 2.0
    b_minus = (1 - q.m) / 2.0
    vertex_entropy = float(
        np.sum((1 - g.degrees) * (b_plus * np.log(b_plus) + b_minus * np.log(b_minus)))
    )
    energy = -float(model.couplings @ q.chi) - float(model.fields @ q.m)
    return energy + pair_entropy + vertex_entropy


def gradient(model, q):
    """Analytic gradient of the free energy, packed [d/dm | d/dchi].

    d F / d m_i  = -h_i + (1 - d_i) atanh(m_i)
                   + (1/4) sum_{k ~ i} sum_{x_i x_k} x_i log b_ik
    d F / d chi_ij = -J_ij + (1/4) sum_{x_i x_j} x_i x_j log b_ij
    """
    g = model.graph
    require_interior(g, q)
    i, j = _endpoint_indices(g)
    logs = np.log(edge_forms(g, q))  # columns ++, +-, -+, --
    lpp, lpm, lmp, lmm = logs.T
    grad_m = -model.fields + (1 - g.degrees) * np.arctanh(q.m)
    np.add.at(grad_m, i, (lpp + lpm - lmp - lmm) / 4.0)
    np.add.at(grad_m, j, (lpp - lpm + lmp - lmm) / 4.0)
    grad_chi = -model.couplings + (lpp - lpm - lmp + lmm) / 4.0
    return np.concatenate([grad_m, grad_chi])


def _rst(g, q):
    """Per-edge curvature sums r, s (at both endpoints) and t.

    With I_xy = 1 / (4 b_ij(x, y)):
      r    = (I_++ + I_+- + I_-+ + I_--) / 4     (d^2F / dchi^2)
      s_i  = (I_++ - I_+- + I_-+ - I_--) / 4     (d^2F / dm_i dchi)
      s_j  = (I_++ + I_+- - I_-+ - I_--) / 4     (d^2F / dm_j dchi)
      t    = (I_++ - I_+- - I_-+ + I_--) / 4     (d^2F / dm_i dm_j)
    """
    inv = 1.0 / edge_forms(g, q)
    ipp, ipm, imp, imm = inv.T
    r = (ipp + ipm + imp + imm) / 4.0
    s_i = (ipp - ipm + imp - imm) / 4.0
    s_j = (ipp + ipm - imp - imm) / 4.0
    t = (ipp - ipm - imp + imm) / 4.0
    return r, s_i, s_j, t


@dataclass(eq=False)
class BetheHessian:
    """Symmetric (N+M) x (N+M) Hessian, variables packed [means | correlations].

    The correlation block is diagonal with entries ``r``; the whole matrix
    depends on the point q only, never on couplings or fields.
    """

    full: np.ndarray
    r: np.ndarray
    n_vertices: int
    n_edges: int

    @property
    def vv(self):
        return self.full[: self.n_vertices, : self.n_vertices]

    @property
    def ve(self):
        return self.full[: self.n_vertices, self.n_vertices :]

    @property
    def ee(self):
        return self.full[self.n_vertices :, self.n_vertices :]

    def slogdet(self):
        sign, logabs = np.linalg.slogdet(self.full)
        return float(sign), float(logabs)


def hessian(g, q):
    """Analytic Hessian of the Bethe free energy at q."""
    require_interior(g, q)
    n, m = g.n_vertices, g.n_edges
    i, j = _endpoint_indices(g)
    r, s_i, s_j, t = _rst(g, q)

    full = np.zeros((n + m, n + m))
    diag_m = (1 - g.degrees) / (1 - q.m**2)
    np.add.at(diag_m, i, r)
    np.add.at(diag_m, j, r)
    full[np.arange(n), np.arange(n)] = diag_m
    full[i, j] = t
    full[j, i] = t
    cols = n + np.arange(m)
    full[i, cols] = s_i
    full[cols, i] = s_i
    full[j, cols] = s_j
    full[cols, j] = s_j
    full[cols, cols] = r
    return BetheHessian(full=full, r=r, n_vertices=n, n_edges=m)


def y_matrix(g, q):
    """The N x N matrix left after eliminating the correlation block.

    Eliminating the diagonal correlation block of the Hessian by congruence
    (determinant-one row operations) leaves a vertex-indexed matrix Y with

      Y_ii = 1/(1-m_i^2) + sum_k (chi_ik - m_i m_k)^2 / ((1-m_i^2) D_ik)
      Y_ij = -(chi_ij - m_i m_j) / D_ij              (i, j adjacent)

    where D_ij = 1 - m_i^2 - m_j^2 + 2 m_i m_j chi_ij - chi_ij^2.  It
    satisfies det(Hessian) = det(Y) * prod_e r_e.
    """
    if not g.simple:
        raise ValueError("y_matrix requires a simple graph")
    require_interior(g, q)
    i, j = _endpoint_indices(g)
    mi, mj, chi = q.m[i], q.m[j], q.chi
    num = chi - mi * mj
    den = 1 - mi**2 - mj**2 + 2 * mi * mj * chi - chi**2

    y = np.zeros((g.n_vertices, g.n_vertices))
    diag = 1.0 / (1 - q.m**2)
    np.add.at(diag, i, num**2 / ((1 - mi**2) * den))
    np.add.at(diag, j, num**2 / ((1 - mj**2) * den))
    y[np.arange(g.n_vertices), np.arange(g.n_vertices)] = diag
    y[i, j] = -num / den
    y[j, i] = -num / den
    return y
