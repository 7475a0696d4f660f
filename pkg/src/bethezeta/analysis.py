"""Spectral stability, positive-definiteness, index sums, uniqueness.

Everything here revolves around the spectrum of U M, the non-backtracking
matrix weighted by the pseudomarginal-induced edge weights: at a fixed
point it is similar to the linearised update map, its position relative to
the real ray [1, inf) certifies positive definiteness of the Bethe Hessian,
and the sign of det(I - U M) equals the sign of det(Hessian) and hence the
index of the fixed point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import bethe, lbp, zeta
from .bethe import Pseudomarginals
from .errors import (
    ContinuationLost,
    DegenerateFixedPoint,
    LeftDomain,
    NotConverged,
    NumericalIntegrityError,
    PossiblyIncompleteEnumeration,
    SingularHessian,
)
from .graph import cycle_rank, directed_edge_matrix, nonbacktracking_spectral_radius
from .model import is_equivalent_to_attractive, temperature_scaled

EIGENVALUE_BAND = 1e-8
DET_FLOOR = 1e-10


class StabilityClass(str, Enum):
    STABLE_UNDAMPED = "stable_undamped"
    STABLE_WITH_DAMPING = "stable_with_damping"
    UNSTABLE = "unstable"
    INDETERMINATE = "indeterminate"


class CertificateKind(str, Enum):
    TREE_OR_ONE_CYCLE = "tree_or_one_cycle"
    SPECTRAL_CONTRACTION = "spectral_contraction"
    TWO_CYCLE_NON_ATTRACTIVE = "two_cycle_non_attractive"
    NONE = "none"


@dataclass(eq=False)
class SpectralReport:
    eigenvalues: np.ndarray  # complex, sorted by (real, imag)
    spectral_radius: float
    max_real_part: float
    has_real_geq_one: bool


@dataclass(eq=False)
class FixedPointRecord:
    q: Pseudomarginals
    grad_norm: float
    hessian_det_sign: int
    log_abs_hessian_det: float
    index: int
    stability: StabilityClass
    spectrum: SpectralReport


@dataclass(eq=False)
class UniquenessCertificate:
    kind: CertificateKind
    evidence: dict = field(default_factory=dict)


@dataclass(eq=False)
class IndexSumReport:
    records: list
    index_sum: int
    count: int
    passed: bool
    retried: bool


@dataclass(eq=False)
class BetaBoundReport:
    beta: np.ndarray
    coupling_tanh: np.ndarray
    bound_ok: np.ndarray
    sign_ok: np.ndarray

    @property
    def all_ok(self):
        return bool(self.bound_ok.all() and self.sign_ok.all())


@dataclass(eq=False)
class CrossingReport:
    t_grid: np.ndarray
    max_real_eig: np.ndarray
    spectral_radii: np.ndarray
    det_signs: np.ndarray
    log_abs_dets: np.ndarray
    free_energies: np.ndarray
    t_eig_cross: float | None
    t_det_cross: float | None

    @property
    def crossings_coincide(self):
        if self.t_eig_cross is None or self.t_det_cross is None:
            return self.t_eig_cross is None and self.t_det_cross is None
        return abs(self.t_eig_cross - self.t_det_cross) <= 1e-5


def _sorted_complex(values):
    values = np.asarray(values, dtype=complex)
    order = np.lexsort((values.imag, values.real))
    return values[order]


def _same_multiset(a, b, tol):
    a, b = _sorted_complex(a), _sorted_complex(b)
    if a.shape != b.shape:
        return False
    remaining = list(b)
    for lam in a:
        dists = [abs(lam - mu) for mu in remaining]
        k = int(np.argmin(dists))
        if dists[k] > tol:
            return False
        remaining.pop(k)
    return True


def spectrum_um(g, q):
    """Eigenvalues of U M at q (dense), cross-checked against beta weights.

    The symmetrised weights are diagonally similar to the directed ones, so
    both spectra must match; a mismatch flags a numerical problem.
    """
    u = zeta.weights_from_pseudomarginals(g, q)
    m_mat = directed_edge_matrix(g)
    eigs = np.linalg.eigvals(u.u[:, None] * m_mat)
    beta_eigs = np.linalg.eigvals(zeta.beta_directed(g, q).u[:, None] * m_mat)
    scale = 1.0 + float(np.max(np.abs(eigs))) if eigs.size else 1.0
    if not _same_multiset(eigs, beta_eigs, tol=1e-8 * scale):
        raise NumericalIntegrityError("directed and symmetrised spectra disagree")
    eigs = _sorted_complex(eigs)
    radius = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    max_re = float(np.max(eigs.real)) if eigs.size else 0.0
    on_ray = bool(
        np.any((np.abs(eigs.imag) <= 1e-9) & (eigs.real >= 1.0 - 1e-9))
    )
    return SpectralReport(
        eigenvalues=eigs,
        spectral_radius=radius,
        max_real_part=max_re,
        has_real_geq_one=on_ray,
    )


def check_positive_definite_cond(g, q):
    """'certified_pd' when no eigenvalue of U M sits on the real ray [1, inf).

    The certificate is one-directional: 'inconclusive' does not mean the
    Hessian is indefinite, only that this criterion cannot tell.
    """
    report = spectrum_um(g, q)
    return "inconclusive" if report.has_real_geq_one else "certified_pd"


def check_beta_region(g, q):
    """Whether all |beta_e| stay below the reciprocal Perron eigenvalue of M.

    Inside this region the Bethe Hessian is positive definite.  For trees
    the threshold is infinite and for single-cycle graphs it is one, so the
    region is the whole domain there.
    """
    alpha = nonbacktracking_spectral_radius(g)
    if alpha <= 1e-12:
        return True
    beta = zeta.beta_weights(g, q)
    max_beta = float(np.max(np.abs(beta))) if beta.size else 0.0
    return max_beta < 1.0 / alpha


def classify_stability(model, q, grad_norm=None, band=EIGENVALUE_BAND):
    """Build the record for a refined fixed point.

    Stability classes follow the nested spectral conditions on U M: all
    moduli below one (plain updates converge locally), all real parts below
    one (some damping converges), otherwise unstable.  Eigenvalues within
    ``band`` of a boundary yield INDETERMINATE rather than a silent call.
    The index is the sign of the Hessian determinant.
    """
    g = model.graph
    if grad_norm is None:
        grad_norm = float(np.max(np.abs(bethe.gradient(model, q))))
    spectrum = spectrum_um(g, q)
    sign, logabs = bethe.hessian(g, q).slogdet()

    rho, max_re = spectrum.spectral_radius, spectrum.max_real_part
    if rho < 1.0 - band:
        stability = StabilityClass.STABLE_UNDAMPED
    elif rho <= 1.0 + band:
        stability = StabilityClass.INDETERMINATE
    elif max_re < 1.0 - band:
        stability = StabilityClass.STABLE_WITH_DAMPING
    elif max_re <= 1.0 + band:
        stability = StabilityClass.INDETERMINATE
    else:
        stability = StabilityClass.UNSTABLE

    return FixedPointRecord(
        q=q,
        grad_norm=grad_norm,
        hessian_det_sign=int(sign),
        log_abs_hessian_det=logabs,
        index=int(sign),
        stability=stability,
        spectrum=spectrum,
    )


def index_sum_check(
    model,
    n_restarts=200,
    grid_spec=3,
    tol=1e-9,
    seed=0,
    det_floor=DET_FLOOR,
):
    """Sum the fixed-point indices and demand that they add up to one.

    A sum different from one is treated as evidence of an incomplete
    enumeration, never as a failure of the index identity: the search is
    retried once with a denser start set and raises
    ``PossiblyIncompleteEnumeration`` if the sum still differs.  Points with
    |det Hessian| below ``det_floor`` make the check inapplicable
    (``DegenerateFixedPoint``).
    """
    retried = False
    records = lbp.enumerate_fixed_points(
        model, n_restarts=n_restarts, grid_spec=grid_spec, tol=tol, seed=seed
    )
    for attempt in range(2):
        for rec in records:
            if rec.log_abs_hessian_det < math.log(det_floor):
                raise DegenerateFixedPoint(
                    f"|det Hessian| = exp({rec.log_abs_hessian_det:.3e}) below floor"
                )
        index_sum = int(sum(rec.index for rec in records))
        if index_sum == 1:
            return IndexSumReport(
                records=records,
                index_sum=index_sum,
                count=len(records),
                passed=len(records) % 2 == 1,
                retried=retried,
            )
        if attempt == 0:
            retried = True
            records = lbp.enumerate_fixed_points(
                model,
                n_restarts=4 * n_restarts,
                grid_spec=grid_spec + 2,
                tol=tol,
                seed=seed + 1,
            )
    raise PossiblyIncompleteEnumeration(
        f"index sum {index_sum} != 1 over {len(records)} fixed points after retry"
    )


def uniqueness_certificate(model):
    """Try the fixed-point uniqueness conditions in order of strength.

    (a) cycle rank <= 1: the free energy is convex, one stationary point;
    (b) spectral contraction: rho(diag(tanh|J|) M) < 1 forces every index
        to be +1, hence a single fixed point;
    (c) cycle rank exactly 2 with interactions not gauge-equivalent to an
        attractive model: unique regardless of interaction strength.
    """
    g = model.graph
    rank = cycle_rank(g)
    if rank <= 1:
        return UniquenessCertificate(
            CertificateKind.TREE_OR_ONE_CYCLE, {"cycle_rank": rank}
        )
    j_weights = np.tanh(np.abs(model.couplings))[np.arange(g.n_directed) // 2]
    rho = float(np.max(np.abs(np.linalg.eigvals(j_weights[:, None] * directed_edge_matrix(g)))))
    if rho < 1.0:
        return UniquenessCertificate(
            CertificateKind.SPECTRAL_CONTRACTION, {"rho_jm": rho, "cycle_rank": rank}
        )
    if rank == 2 and is_equivalent_to_attractive(model) is None:
        return UniquenessCertificate(
            CertificateKind.TWO_CYCLE_NON_ATTRACTIVE,
            {"cycle_rank": rank, "frustrated": True, "rho_jm": rho},
        )
    return UniquenessCertificate(CertificateKind.NONE, {"rho_jm": rho, "cycle_rank": rank})


def beta_bound_check(model, q, tol=1e-9):
    """Per-edge bounds satisfied by any fixed point's correlation coefficients.

    |beta_e| never exceeds tanh|J_e| and the signs agree (beta vanishes on
    zero-coupling edges); equality holds at symmetric points with no
    effective fields.
    """
    beta = zeta.beta_weights(model.graph, q)
    bound = np.tanh(np.abs(model.couplings))
    bound_ok = np.abs(beta) <= bound + tol
    sign_ok = np.where(
        model.couplings == 0.0,
        np.abs(beta) <= tol,
        np.sign(beta) == np.sign(model.couplings),
    )
    return BetaBoundReport(
        beta=beta, coupling_tanh=bound, bound_ok=bound_ok, sign_ok=sign_ok
    )


def _max_real_eigenvalue(spectrum, imag_tol=1e-8):
    eigs = spectrum.eigenvalues
    real_mask = np.abs(eigs.imag) <= imag_tol
    if np.any(real_mask):
        return float(np.max(eigs.real[real_mask]))
    return float(np.max(eigs.real)) if eigs.size else 0.0


def _track_point(model, t, q_prev, tol=1e-10):
    scaled = temperature_scaled(model, t)
    if q_prev is None:
        run = lbp.lbp_run(scaled, damping=0.5, tol=1e-10, max_iter=8000)
        if not run.converged:
            raise ContinuationLost(f"initial LBP run did not converge at t={t}")
        q_prev = run.beliefs
    try:
        q = lbp.refine_fixed_point(scaled, q_prev, tol=tol)
    except (NotConverged, SingularHessian, LeftDomain) as exc:
        raise ContinuationLost(f"lost the branch at t={t}") from exc
    return scaled, q


def _bisect_crossing(model, ta, qa, tb, qb, indicator, bisections):
    side_a = indicator(model, ta, qa)
    for _ in range(bisections):
        tm = 0.5 * (ta + tb)
        try:
            _, qm = _track_point(model, tm, qa)
        except ContinuationLost:
            _, qm = _track_point(model, tm, qb)
        if indicator(model, tm, qm) == side_a:
            ta, qa = tm, qm
        else:
            tb, qb = tm, qm
    return 0.5 * (ta + tb)


def saddle_crossing_track(model, t_range=(2.0, 1.2), steps=17, bisections=20, tol=1e-10):
    """Follow a fixed point of an attractive family while lowering t.

    At each temperature the tracked point is re-refined from the previous
    one; the sweep records the largest real eigenvalue of U M and the sign
    of det(Hessian).  When the eigenvalue crosses one, the determinant must
    change sign at the same temperature: both crossings are localised by
    bisection and reported.
    """
    if not model.is_attractive():
        raise ValueError("saddle tracking expects an attractive model (all J >= 0)")
    t_hi, t_lo = t_range
    if not t_hi > t_lo > 0:
        raise ValueError("t_range must be decreasing and positive")
    grid = np.linspace(t_hi, t_lo, steps)

    qs, eig_max, radii, det_signs, log_dets, energies = [], [], [], [], [], []
    q = None
    for t in grid:
        scaled, q = _track_point(model, t, q, tol=tol)
        g = scaled.graph
        spectrum = spectrum_um(g, q)
        sign, logabs = bethe.hessian(g, q).slogdet()
        qs.append(q)
        eig_max.append(_max_real_eigenvalue(spectrum))
        radii.append(spectrum.spectral_radius)
        det_signs.append(int(sign))
        log_dets.append(logabs)
        energies.append(bethe.free_energy(scaled, q))

    eig_max = np.array(eig_max)
    det_signs = np.array(det_signs)

    def eig_indicator(base, t, point):
        scaled = temperature_scaled(base, t)
        return _max_real_eigenvalue(spectrum_um(scaled.graph, point)) > 1.0

    def det_indicator(base, t, point):
        sign, _ = bethe.hessian(base.graph, point).slogdet()
        return sign > 0

    t_eig = t_det = None
    for k in range(len(grid) - 1):
        if (eig_max[k] - 1.0) * (eig_max[k + 1] - 1.0) < 0 and t_eig is None:
            t_eig = _bisect_crossing(
                model, grid[k], qs[k], grid[k + 1], qs[k + 1], eig_indicator, bisections
            )
        if det_signs[k] != det_signs[k + 1] and t_det is None:
            t_det = _bisect_crossing(
                model, grid[k], qs[k], grid[k + 1], qs[k + 1], det_indicator, bisections
            )
    return CrossingReport(
        t_grid=grid,
        max_real_eig=eig_max,
        spectral_radii=np.array(radii),
        det_signs=det_signs,
        log_abs_dets=np.array(log_dets),
        free_energies=np.array(energies),
        t_eig_cross=t_eig,
        t_det_cross=t_det,
    )
