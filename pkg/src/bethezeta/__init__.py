"""Loopy belief propagation, the Bethe free energy, and graph edge zeta tools.

The package analyses binary pairwise models on connected graphs: it runs
damped message passing, evaluates the Bethe free energy with analytic
derivatives, evaluates the edge zeta function in determinant, vertex and
prime-cycle form, and verifies the identities tying the two together
(Hessian determinant vs. zeta, spectral stability classes, index sums and
uniqueness certificates).
"""

from . import analysis, bethe, cli, generators, graph, lbp, model, oracle, zeta
from .analysis import (
    CertificateKind,
    FixedPointRecord,
    SpectralReport,
    StabilityClass,
    UniquenessCertificate,
    beta_bound_check,
    check_beta_region,
    check_positive_definite_cond,
    classify_stability,
    index_sum_check,
    saddle_crossing_track,
    spectrum_um,
    uniqueness_certificate,
)
from .bethe import (
    BetheHessian,
    Pseudomarginals,
    free_energy,
    gradient,
    hessian,
    in_domain,
    y_matrix,
)
from .graph import (
    Graph,
    PrimeCycle,
    build_graph,
    cycle_rank,
    directed_edge_matrix,
    enumerate_prime_cycles,
    nonbacktracking_spectral_radius,
    reduce_preserving_prime_cycles,
    spanning_tree_count,
)
from .lbp import (
    LbpResult,
    MessageState,
    beliefs_from_messages,
    enumerate_fixed_points,
    lbp_run,
    lbp_step,
    linearize_update,
    refine_fixed_point,
)
from .model import (
    BinaryPairwiseModel,
    GaugeTransform,
    apply_gauge,
    is_equivalent_to_attractive,
    model_from_json,
    model_to_json,
    temperature_scaled,
)
from .oracle import ExactInference, exact_inference, finite_difference, gibbs_free_energy_check
from .zeta import (
    EdgeWeights,
    ZetaReport,
    beta_weights,
    hashimoto_limit_check,
    verify_main_formula,
    weights_from_pseudomarginals,
    zeta_det,
    zeta_ihara,
    zeta_product_truncated,
)

__version__ = "0.1.0"
