"""Brute-force exact inference and finite differences for small instances.

Exhaustive enumeration of all 2^N spin configurations, run in log space so
that couplings and fields up to around 50 in magnitude stay finite.  These
routines are the independent ground truth the rest of the package is
tested against; nothing here reuses the belief-propagation or Bethe code
paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bethe
from .bethe import Pseudomarginals
from .errors import OutOfDomain, TooLarge

MAX_ORACLE_VERTICES = 20
_BLOCK = 1 << 16


@dataclass(eq=False)
class ExactInference:
    """Partition function (log form) and exact single/pair marginals.

    ``marginal_plus[i]`` is p_i(+1).  ``pair_tables[k, a, b]`` is the pair
    marginal of edge k with index 0 meaning +1 and 1 meaning -1.
    """

    log_z: float
    marginal_plus: np.ndarray
    pair_tables: np.ndarray

    @property
    def z(self):
        return float(np.exp(self.log_z))

    @property
    def means(self):
        return 2.0 * self.marginal_plus - 1.0

    @property
    def correlations(self):
        t = self.pair_tables
        return t[:, 0, 0] - t[:, 0, 1] - t[:, 1, 0] + t[:, 1, 1]


def _spin_block(n, start, count):
    idx = np.arange(start, start + count, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n)) & 1
    return 2.0 * bits - 1.0  # column i is x_i


def _log_weights(model, spins):
    i = np.fromiter((a for a, _ in model.graph.edges), dtype=np.int64, count=model.graph.n_edges)
    j = np.fromiter((b for _, b in model.graph.edges), dtype=np.int64, count=model.graph.n_edges)
    pair = (spins[:, i] * spins[:, j]) @ model.couplings
    return pair + spins @ model.fields


def exact_inference(model):
    """Exact partition function and marginals by full enumeration."""
    n = model.graph.n_vertices
    if n > MAX_ORACLE_VERTICES:
        raise TooLarge(f"{n} vertices exceeds the 2^{MAX_ORACLE_VERTICES} enumeration cap")
    m = model.graph.n_edges
    total = 1 << n

    shift = -np.inf
    for start in range(0, total, _BLOCK):
        count = min(_BLOCK, total - start)
        shift = max(shift, float(np.max(_log_weights(model, _spin_block(n, start, count)))))

    z = 0.0
    vertex_plus = np.zeros(n)
    pair = np.zeros((m, 2, 2))
    i = np.fromiter((a for a, _ in model.graph.edges), dtype=np.int64, count=m)
    j = np.fromiter((b for _, b in model.graph.edges), dtype=np.int64, count=m)
    for start in range(0, total, _BLOCK):
        count = min(_BLOCK, total - start)
        spins = _spin_block(n, start, count)
        w = np.exp(_log_weights(model, spins) - shift)
        z += float(w.sum())
        vertex_plus += w @ ((spins + 1.0) / 2.0)
        si = spins[:, i]
        sj = spins[:, j]
        for a, xi in enumerate((1.0, -1.0)):
            for b, xj in enumerate((1.0, -1.0)):
                mask = (si == xi) & (sj == xj)
                pair[:, a, b] += mask.T @ w

    return ExactInference(
        log_z=float(np.log(z) + shift),
        marginal_plus=vertex_plus / z,
        pair_tables=pair / z,
    )


def gibbs_free_energy_check(model, q):
    """Gap between the Bethe free energy at q and -log Z.

    Zero (to rounding) on trees evaluated at the exact marginals; the
    signed gap is simply reported for loopy graphs.
    """
    exact = exact_inference(model)
    return bethe.free_energy(model, q) + exact.log_z


def finite_difference(f, g, q, order=1):
    """Central finite differences of a scalar field on the domain.

    order 1: gradient, per-coordinate step eps^(1/3) * max(1, |x|);
    order 2: full Hessian, step eps^(1/4).  The point must be far enough
    from the boundary for all stencil points to stay inside.
    """
    x = q.pack()
    dim = x.size
    eps = float(np.finfo(float).eps)

    def value(vec):
        return float(f(Pseudomarginals.from_packed(g, vec)))

    if order == 1:
        base = eps ** (1.0 / 3.0)
        steps = base * np.maximum(1.0, np.abs(x))
        _check_stencil_margin(g, q, float(steps.max()))
        grad = np.zeros(dim)
        for k in range(dim):
            xp, xm = x.copy(), x.copy()
            xp[k] += steps[k]
            xm[k] -= steps[k]
            grad[k] = (value(xp) - value(xm)) / (2.0 * steps[k])
        return grad

    if order == 2:
        h = eps ** (1.0 / 4.0)
        _check_stencil_margin(g, q, 2.0 * h)
        hess = np.zeros((dim, dim))
        f0 = value(x)
        for k in range(dim):
            xp, xm = x.copy(), x.copy()
            xp[k] += h
            xm[k] -= h
            hess[k, k] = (value(xp) - 2.0 * f0 + value(xm)) / h**2
        for k in range(dim):
            for l in range(k + 1, dim):
                vpp, vpm, vmp, vmm = (x.copy() for _ in range(4))
                vpp[[k, l]] += h
                vpm[k] += h
                vpm[l] -= h
                vmp[k] -= h
                vmp[l] += h
                vmm[[k, l]] -= h
                val = (value(vpp) - value(vpm) - value(vmp) + value(vmm)) / (4.0 * h**2)
                hess[k, l] = hess[l, k] = val
        return hess

    raise ValueError(f"order must be 1 or 2, got {order}")


def fd_jacobian_of_gradient(model, q):
    """Hessian estimate: central differences of the analytic gradient."""
    g = model.graph
    x = q.pack()
    h = float(np.finfo(float).eps ** (1.0 / 3.0))
    _check_stencil_margin(g, q, h)
    dim = x.size
    jac = np.zeros((dim, dim))
    for k in range(dim):
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        gp = bethe.gradient(model, Pseudomarginals.from_packed(g, xp))
        gm = bethe.gradient(model, Pseudomarginals.from_packed(g, xm))
        jac[:, k] = (gp - gm) / (2.0 * h)
    return 0.5 * (jac + jac.T)


def _check_stencil_margin(g, q, step):
    margin = bethe.in_domain(g, q).margin
    if margin <= 10.0 * step:
        raise OutOfDomain(
            f"margin {margin:.3e} too small for finite-difference step {step:.3e}"
        )
