import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bethezeta.bethe import (
    Pseudomarginals,
    edge_forms,
    free_energy,
    gradient,
    hessian,
    in_domain,
    y_matrix,
)
from bethezeta.errors import OutOfDomain
from bethezeta.graph import build_graph
from bethezeta.model import BinaryPairwiseModel
from bethezeta.oracle import exact_inference, fd_jacobian_of_gradient, finite_difference
from bethezeta.zeta import vertex_operators, weights_from_pseudomarginals

from conftest import (
    cycle_graph,
    interior_point,
    path_graph,
    random_connected_graph,
    random_model,
)


def single_edge():
    return build_graph([(0, 1)])


def zero_model(g):
    return BinaryPairwiseModel(g, np.zeros(g.n_edges), np.zeros(g.n_vertices))


class TestDomain:
    def test_origin_inside_with_margin_one(self):
        g = single_edge()
        check = in_domain(g, Pseudomarginals.zeros(g))
        assert check.inside and abs(check.margin - 1.0) < 1e-15

    def test_boundary_at_unit_correlation(self):
        g = single_edge()
        check = in_domain(g, Pseudomarginals(np.zeros(2), np.array([1.0])))
        assert not check.inside and abs(check.margin) < 1e-15

    def test_explicit_forms(self):
        g = single_edge()
        q = Pseudomarginals(np.array([0.5, -0.5]), np.array([-0.8]))
        forms = edge_forms(g, q)[0]
        expected = [1 + 0.5 - 0.5 - 0.8, 1 + 0.5 + 0.5 + 0.8, 1 - 0.5 - 0.5 + 0.8, 1 - 0.5 + 0.5 - 0.8]
        assert np.allclose(np.sort(forms), np.sort(expected))
        assert abs(in_domain(g, q).margin - min(expected)) < 1e-15

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_pack_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        g = random_connected_graph(rng, int(rng.integers(2, 7)), extra_edges=1)
        q = interior_point(rng, g)
        back = Pseudomarginals.from_packed(g, q.pack())
        assert np.array_equal(back.m, q.m)
        assert np.array_equal(back.chi, q.chi)


class TestFreeEnergy:
    def test_single_edge_hand_value(self):
        # four pair-belief terms of 1/4 each, no vertex terms at degree one...
        # degrees are 1 so the vertex entropy factor (1 - d) vanishes
        g = single_edge()
        value = free_energy(zero_model(g), Pseudomarginals.zeros(g))
        assert abs(value - (-np.log(4.0))) < 1e-14

    def test_single_edge_matches_exact_partition_function(self):
        g = single_edge()
        m = zero_model(g)
        assert abs(free_energy(m, Pseudomarginals.zeros(g)) + exact_inference(m).log_z) < 1e-14

    def test_tree_at_exact_marginals_equals_minus_log_z(self, rng):
        g = path_graph(5)
        m = random_model(rng, g, j_scale=0.8, h_scale=0.5)
        exact = exact_inference(m)
        q = Pseudomarginals(exact.means, exact.correlations)
        assert abs(free_energy(m, q) + exact.log_z) < 1e-9

    def test_energy_entropy_decomposition(self, rng):
        g = cycle_graph(4)
        m = random_model(rng, g, j_scale=1.0, h_scale=0.7)
        q = interior_point(rng, g)
        base = free_energy(zero_model(g), q)
        expected = base - float(m.couplings @ q.chi) - float(m.fields @ q.m)
        assert abs(free_energy(m, q) - expected) < 1e-12

    def test_out_of_domain_raises(self):
        g = single_edge()
        with pytest.raises(OutOfDomain):
            free_energy(zero_model(g), Pseudomarginals(np.zeros(2), np.array([1.0])))


class TestGradient:
    def test_zero_at_origin_of_zero_model(self):
        g = cycle_graph(4)
        assert np.allclose(gradient(zero_model(g), Pseudomarginals.zeros(g)), 0.0)

    def test_matches_finite_differences(self, rng):
        worst = 0.0
        for _ in range(50):
            g = random_connected_graph(rng, int(rng.integers(2, 6)), extra_edges=1)
            m = random_model(rng, g, j_scale=0.8, h_scale=0.5)
            q = interior_point(rng, g, m_scale=0.6, margin_frac=0.2)
            if in_domain(g, q).margin < 0.05:
                continue
            analytic = gradient(m, q)
            numeric = finite_difference(lambda p: free_energy(m, p), g, q, order=1)
            scale = np.maximum(np.abs(numeric), 1e-3)
            worst = max(worst, float(np.max(np.abs(analytic - numeric) / scale)))
        assert worst < 1e-6

    def test_norm_blows_up_near_boundary(self):
        # the gradient entries are logs of beliefs, so the norm diverges
        # like |log margin|: monotone growth at exactly that rate
        g = cycle_graph(3)
        m = zero_model(g)
        deltas = (1e-2, 1e-4, 1e-6, 1e-8)
        norms = []
        for delta in deltas:
            q = Pseudomarginals(np.zeros(3), np.full(3, 1.0 - delta))
            norms.append(float(np.linalg.norm(gradient(m, q))))
        assert all(a < b for a, b in zip(norms, norms[1:]))
        rates = [n / abs(np.log(d)) for n, d in zip(norms, deltas)]
        # rate tends to the analytic constant sqrt(M)/2
        assert abs(rates[-1] - np.sqrt(3) / 2) < 0.05
        assert norms[-1] > 10.0


class TestHessian:
    def test_origin_is_identity(self):
        g = cycle_graph(4)
        h = hessian(g, Pseudomarginals.zeros(g))
        assert np.allclose(h.full, np.eye(g.n_vertices + g.n_edges))

    def test_matches_differenced_gradient(self, rng):
        worst = 0.0
        for _ in range(50):
            g = random_connected_graph(rng, int(rng.integers(2, 6)), extra_edges=1)
            m = random_model(rng, g)
            q = interior_point(rng, g, m_scale=0.6, margin_frac=0.2)
            if in_domain(g, q).margin < 0.05:
                continue
            analytic = hessian(g, q).full
            numeric = fd_jacobian_of_gradient(m, q)
            worst = max(
                worst,
                float(np.max(np.abs(analytic - numeric)) / max(1.0, np.max(np.abs(numeric)))),
            )
        assert worst < 1e-5

    def test_symmetry_and_diagonal_edge_block(self, rng):
        g = cycle_graph(5)
        q = interior_point(rng, g)
        h = hessian(g, q)
        assert np.array_equal(h.full, h.full.T)
        ee = h.ee
        assert np.allclose(ee - np.diag(np.diag(ee)), 0.0)
        assert np.allclose(np.diag(ee), h.r)

    def test_independent_of_couplings_and_fields(self, rng):
        g = cycle_graph(4)
        q = interior_point(rng, g)
        h1 = hessian(g, q).full
        # hessian takes only the graph: two models sharing it give the same matrix
        assert np.array_equal(h1, hessian(g, q).full)

    def test_single_edge_positive_definite_everywhere(self, rng):
        g = single_edge()
        for _ in range(100):
            q = interior_point(rng, g, m_scale=0.9, margin_frac=0.02)
            eigs = np.linalg.eigvalsh(hessian(g, q).full)
            assert eigs.min() > 0

    def test_matches_second_differences_of_free_energy(self, rng):
        g = single_edge()
        m = zero_model(g)
        q = Pseudomarginals(np.array([0.2, -0.1]), np.array([0.15]))
        numeric = finite_difference(lambda p: free_energy(m, p), g, q, order=2)
        assert np.max(np.abs(numeric - hessian(g, q).full)) < 1e-6


class TestYMatrix:
    def test_identity_at_origin(self):
        g = cycle_graph(4)
        assert np.allclose(y_matrix(g, Pseudomarginals.zeros(g)), np.eye(4))

    def test_schur_determinant_identity(self, rng):
        for _ in range(20):
            g = random_connected_graph(rng, int(rng.integers(3, 7)), extra_edges=2)
            q = interior_point(rng, g)
            h = hessian(g, q)
            lhs = np.linalg.det(h.full)
            rhs = np.linalg.det(y_matrix(g, q)) * float(np.prod(h.r))
            assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))

    def test_vertex_operator_identity(self, rng):
        # I + D' - A' equals Y times diag(1 - m^2)
        for _ in range(10):
            g = random_connected_graph(rng, int(rng.integers(3, 7)), extra_edges=2)
            q = interior_point(rng, g)
            u = weights_from_pseudomarginals(g, q)
            d_prime, a_prime = vertex_operators(g, u)
            lhs = np.eye(g.n_vertices) + d_prime - a_prime
            rhs = y_matrix(g, q) @ np.diag(1.0 - q.m**2)
            assert np.max(np.abs(lhs - rhs)) < 1e-10
