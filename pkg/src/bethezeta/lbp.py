"""The loopy belief propagation dynamical system.

Each directed edge i -> j carries one positive message ratio
eta = mu(+1) / mu(-1); the update is run in log space, where the two-state
sum-product step has the closed form

    log eta_{i->j}  <-  logcosh(theta + J_ij) - logcosh(theta - J_ij),
    theta = h_i + (1/2) * sum over incoming k -> i, k != j, of log eta_{k->i}.

All messages are updated in parallel; damping mixes the previous log
messages into the new ones.  Fixed points of the map are exactly the
stationary points of the Bethe free energy, which is what the Newton
refinement here solves for directly.
"""

from __future__ import annotations

import itertools
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bethe
from .bethe import Pseudomarginals
from .errors import (
    LeftDomain,
    NotConverged,
    NumericalOverflow,
    OutOfDomain,
    SingularHessian,
    TooLarge,
)

LOG_ETA_BOUND = 1e4

logger = logging.getLogger(__name__)


def _logcosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - np.log(2.0)


@dataclass(eq=False)
class MessageState:
    """Messages in log-ratio form, one entry per directed edge."""

    log_eta: np.ndarray

    def __post_init__(self):
        self.log_eta = np.asarray(self.log_eta, dtype=float).copy()

    @property
    def eta(self):
        return np.exp(self.log_eta)

    @classmethod
    def uniform(cls, g):
        return cls(np.zeros(g.n_directed))

    @classmethod
    def from_eta(cls, eta):
        eta = np.asarray(eta, dtype=float)
        if np.any(eta <= 0) or not np.isfinite(eta).all():
            raise ValueError("message ratios must be positive and finite")
        return cls(np.log(eta))


@dataclass(eq=False)
class LbpResult:
    state: MessageState
    converged: bool
    iterations: int
    residual: float
    beliefs: Pseudomarginals


def _update_log(model, x):
    """One parallel sweep of the update map on log messages."""
    g = model.graph
    half = 0.5 * x
    incoming = np.zeros(g.n_vertices)
    np.add.at(incoming, g.terminus, half)
    theta = model.fields[g.origin] + incoming[g.origin] - half[np.arange(g.n_directed) ^ 1]
    j = model.couplings[np.arange(g.n_directed) // 2]
    return _logcosh(theta + j) - _logcosh(theta - j)


def _check_overflow(x):
    worst = float(np.max(np.abs(x))) if x.size else 0.0
    if not np.isfinite(worst) or worst > LOG_ETA_BOUND:
        raise NumericalOverflow(f"|log eta| reached {worst:.3e}")


def lbp_step(model, state):
    """Single undamped parallel update of all messages."""
    _check_overflow(state.log_eta)
    return MessageState(_update_log(model, state.log_eta))


def beliefs_from_messages(model, state):
    """Means and correlations induced by a message state.

    The means come from the vertex beliefs and the correlations from the
    pair beliefs; packing them into (m, chi) makes the marginalisation
    constraint between the induced pair and vertex beliefs hold identically.
    """
    g = model.graph
    x = state.log_eta
    half = 0.5 * x
    incoming = np.zeros(g.n_vertices)
    np.add.at(incoming, g.terminus, half)
    m = np.tanh(model.fields + incoming)
    theta = model.fields[g.origin] + incoming[g.origin] - half[np.arange(g.n_directed) ^ 1]
    th_i, th_j = theta[0::2], theta[1::2]
    chi = np.tanh(
        model.couplings + 0.5 * (_logcosh(th_i + th_j) - _logcosh(th_i - th_j))
    )
    return Pseudomarginals(m, chi)


def lbp_run(model, init=None, damping=0.0, tol=1e-10, max_iter=5000):
    """Iterate the damped update until the log messages stop moving.

    Damping eps in [0, 1) mixes the previous iterate into the new one in log
    space.  Returns the last state with ``converged=False`` when the
    iteration budget runs out (no exception); raises ``NumericalOverflow``
    when messages diverge.
    """
    if not 0.0 <= damping < 1.0:
        raise ValueError("damping must lie in [0, 1)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    g = model.graph
    x = np.zeros(g.n_directed) if init is None else np.asarray(init.log_eta, dtype=float).copy()
    residual = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        _check_overflow(x)
        x_new = (1.0 - damping) * _update_log(model, x) + damping * x
        residual = float(np.max(np.abs(x_new - x))) if x.size else 0.0
        x = x_new
        if residual <= tol:
            break
    state = MessageState(x)
    converged = residual <= tol
    return LbpResult(
        state=state,
        converged=converged,
        iterations=iterations,
        residual=residual,
        beliefs=beliefs_from_messages(model, state),
    )


def refine_fixed_point(model, approx, tol=1e-10, max_iter=100):
    """Newton iteration on the free-energy gradient, starting from approx.

    Steps are backtracked both to stay strictly inside the domain and to
    decrease the gradient norm.  Raises ``SingularHessian`` when the Newton
    system cannot be solved, ``LeftDomain`` when no backtracked step stays
    inside, and ``NotConverged`` when progress stalls.
    """
    g = model.graph
    q = approx.copy()
    grad = bethe.gradient(model, q)
    for _ in range(max_iter):
        if float(np.max(np.abs(grad))) <= tol:
            return q
        hess = bethe.hessian(g, q).full
        try:
            step = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError as exc:
            raise SingularHessian(str(exc)) from exc
        norm = float(np.linalg.norm(grad))
        alpha = 1.0
        accepted = False
        entered_domain = False
        for _ in range(40):
            trial = Pseudomarginals.from_packed(g, q.pack() + alpha * step)
            if bethe.in_domain(g, trial).margin >= bethe.DOMAIN_MARGIN_FLOOR:
                entered_domain = True
                trial_grad = bethe.gradient(model, trial)
                if float(np.linalg.norm(trial_grad)) <= (1.0 - 1e-4 * alpha) * norm:
                    q, grad = trial, trial_grad
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            if not entered_domain:
                raise LeftDomain("no backtracked Newton step stays inside the domain")
            raise NotConverged("Newton line search stalled")
    if float(np.max(np.abs(grad))) <= tol:
        return q
    raise NotConverged(f"gradient norm {np.max(np.abs(grad)):.3e} above {tol:.1e}")


def linearize_update(model, state, damping=0.0):
    """Numerical Jacobian of the log-message update map at ``state``.

    Central finite differences with per-coordinate step
    eps_machine^(1/3) * max(1, |log eta_e|).  With damping eps the map is
    (1-eps) T + eps I, so the Jacobian shifts accordingly.
    """
    x = state.log_eta
    n = x.size
    jac = np.zeros((n, n))
    base_step = float(np.finfo(float).eps ** (1.0 / 3.0))
    for k in range(n):
        h = base_step * max(1.0, abs(x[k]))
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        jac[:, k] = (_update_log(model, xp) - _update_log(model, xm)) / (2.0 * h)
    if damping:
        jac = (1.0 - damping) * jac + damping * np.eye(n)
    return jac


def _annealed_start(model, steps=12, inner_tol=1e-6):
    """Continuation start: follow the fixed point from weak coupling.

    At high temperature the model is nearly independent and Newton from the
    origin converges immediately; lowering the temperature geometrically
    while re-refining tracks a fixed point into the strong-coupling regime,
    where cold Newton starts and plain damped iteration both struggle.
    """
    from .model import temperature_scaled

    g = model.graph
    strength = max(
        float(np.max(np.abs(model.couplings))) if model.couplings.size else 0.0,
        float(np.max(np.abs(model.fields))) if model.fields.size else 0.0,
    )
    t_hi = max(2.0, 2.0 * strength)
    q = Pseudomarginals.zeros(g)
    for t in np.geomspace(t_hi, 1.0, steps):
        try:
            q = refine_fixed_point(temperature_scaled(model, t), q, tol=inner_tol, max_iter=60)
        except (SingularHessian, LeftDomain, NotConverged, OutOfDomain):
            return None
    return q


def _lattice_starts(g, grid_spec, lattice_cap, rng):
    values = np.linspace(-0.6, 0.6, grid_spec) if grid_spec > 1 else np.array([0.0])
    n = g.n_vertices
    total = len(values) ** n
    if total <= lattice_cap:
        assignments = itertools.product(values, repeat=n)
    else:
        uniform = [np.full(n, v) for v in values]
        extra = rng.choice(values, size=(lattice_cap - len(values), n))
        assignments = uniform + list(extra)
    starts = []
    i, j = bethe._endpoint_indices(g)
    for assign in assignments:
        m = np.asarray(assign, dtype=float)
        starts.append(Pseudomarginals(m, m[i] * m[j]))
    return starts


def random_interior_point(g, rng, m_scale=0.85, margin_frac=0.1):
    """A uniformly drawn point of the open pseudomarginal polytope."""
    m = rng.uniform(-m_scale, m_scale, size=g.n_vertices)
    i, j = bethe._endpoint_indices(g)
    low = np.abs(m[i] + m[j]) - 1.0
    high = 1.0 - np.abs(m[i] - m[j])
    pad = margin_frac * (high - low)
    chi = rng.uniform(low + pad, high - pad)
    return Pseudomarginals(m, chi)


def _worker_count():
    raw = os.environ.get("BETHE_ZETA_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def enumerate_fixed_points(
    model,
    n_restarts=200,
    grid_spec=3,
    tol=1e-9,
    seed=0,
    dedup_tol=1e-6,
    size_cap=64,
    lattice_cap=2048,
    newton_max_iter=80,
):
    """Search for all fixed points by Newton refinement from many starts.

    Starts combine a deterministic mean lattice (correlations at the
    independence point), ``n_restarts`` random interior points, the end
    points of damped LBP runs from several message initialisations, and a
    temperature-annealed continuation start that reaches fixed points in
    the strong-coupling regime where the other starts fail.  Refined points
    are deduplicated by max-norm distance and returned as classified
    records, sorted by coordinates.  The search is heuristic; completeness
    is audited downstream through the index sum.
    """
    from .analysis import classify_stability

    g = model.graph
    if g.n_vertices + g.n_edges > size_cap:
        raise TooLarge(f"N + M = {g.n_vertices + g.n_edges} exceeds cap {size_cap}")
    rng = np.random.default_rng(seed)

    starts = _lattice_starts(g, grid_spec, lattice_cap, rng)
    for eps in (0.0, 0.5, 0.8):
        for init_kind in range(3):
            if init_kind == 0:
                init = MessageState.uniform(g)
            else:
                init = MessageState(rng.normal(0.0, 1.0, size=g.n_directed))
            try:
                run = lbp_run(model, init=init, damping=eps, tol=1e-10, max_iter=3000)
            except NumericalOverflow:
                continue
            if run.converged and bethe.in_domain(g, run.beliefs).margin > 0:
                starts.append(run.beliefs)
    annealed = _annealed_start(model)
    if annealed is not None:
        starts.append(annealed)
    starts.extend(random_interior_point(g, rng) for _ in range(n_restarts))

    def refine_one(q0):
        try:
            return refine_fixed_point(model, q0, tol=tol, max_iter=newton_max_iter)
        except (SingularHessian, LeftDomain, NotConverged, OutOfDomain):
            return None

    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            refined = list(pool.map(refine_one, starts))
    else:
        refined = [refine_one(s) for s in starts]
    failures = sum(r is None for r in refined)
    if failures:
        logger.debug("fixed-point search: %d of %d starts failed to refine", failures, len(starts))

    found = []
    for q in sorted((r for r in refined if r is not None), key=lambda p: tuple(p.pack())):
        is_new = all(
            float(np.max(np.abs(q.m - p.m))) + float(np.max(np.abs(q.chi - p.chi))) >= dedup_tol
            for p in found
        )
        if is_new:
            found.append(q)

    records = []
    for q in found:
        grad_norm = float(np.max(np.abs(bethe.gradient(model, q))))
        records.append(classify_stability(model, q, grad_norm=grad_norm))
    records.sort(key=lambda rec: tuple(rec.q.pack()))
    return records
