import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bethezeta.errors import NonPositiveTemperature, SchemaError
from bethezeta.model import (
    BinaryPairwiseModel,
    GaugeTransform,
    apply_gauge,
    is_equivalent_to_attractive,
    model_from_json,
    model_to_json,
    temperature_scaled,
)
from bethezeta.oracle import exact_inference

from conftest import cycle_graph, path_graph, random_connected_graph, random_model


def single_edge_model(j, h0, h1):
    from bethezeta.graph import build_graph

    return BinaryPairwiseModel(build_graph([(0, 1)]), np.array([j]), np.array([h0, h1]))


class TestApplyGauge:
    def test_identity_gauge(self):
        m = single_edge_model(-2.0, 1.0, 0.0)
        out = apply_gauge(m, GaugeTransform(np.array([1, 1])))
        assert np.array_equal(out.couplings, m.couplings)
        assert np.array_equal(out.fields, m.fields)

    def test_sign_algebra(self):
        m = single_edge_model(-2.0, 1.0, 0.0)
        out = apply_gauge(m, GaugeTransform(np.array([1, -1])))
        assert out.couplings[0] == 2.0
        assert np.array_equal(out.fields, np.array([1.0, 0.0]))

    def test_involution(self):
        m = single_edge_model(-0.7, 0.3, -0.4)
        s = GaugeTransform(np.array([-1, 1]))
        twice = apply_gauge(apply_gauge(m, s), s)
        assert np.allclose(twice.couplings, m.couplings)
        assert np.allclose(twice.fields, m.fields)


def exhaustive_gauge_search(model):
    n = model.graph.n_vertices
    for signs in itertools.product((1, -1), repeat=n):
        s = np.array(signs)
        i = np.array([a for a, _ in model.graph.edges])
        j = np.array([b for _, b in model.graph.edges])
        if np.all(model.couplings * s[i] * s[j] >= 0):
            return s
    return None


class TestAttractiveEquivalence:
    def test_already_attractive(self):
        g = cycle_graph(4)
        m = BinaryPairwiseModel(g, np.ones(4), np.zeros(4))
        gauge = is_equivalent_to_attractive(m)
        assert gauge is not None
        assert np.array_equal(gauge.signs, np.ones(4, dtype=int))

    def test_frustrated_triangle(self):
        g = cycle_graph(3)
        m = BinaryPairwiseModel(g, np.array([-1.0, 1.0, 1.0]), np.zeros(3))
        assert is_equivalent_to_attractive(m) is None
        assert exhaustive_gauge_search(m) is None

    def test_paths_never_frustrated(self, rng):
        for n in range(2, 6):
            g = path_graph(n)
            m = BinaryPairwiseModel(g, rng.choice([-1.0, 1.0], size=n - 1), np.zeros(n))
            gauge = is_equivalent_to_attractive(m)
            assert gauge is not None
            out = apply_gauge(m, gauge)
            assert np.all(out.couplings >= 0)

    def test_zero_coupling_edges_are_unconstrained(self):
        # gauge exists although a naive tree fixing through the zero edge fails
        from bethezeta.graph import build_graph

        g = build_graph([(0, 1), (1, 2), (0, 2)])
        m = BinaryPairwiseModel(g, np.array([0.0, 1.0, -1.0]), np.zeros(3))
        gauge = is_equivalent_to_attractive(m)
        assert gauge is not None
        assert np.all(apply_gauge(m, gauge).couplings >= 0)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_agrees_with_exhaustive_search(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 8))
        extra = int(rng.integers(0, max(1, n - 1)))
        g = random_connected_graph(rng, n, extra_edges=extra)
        couplings = rng.choice([-1.0, 0.0, 1.0], size=g.n_edges)
        m = BinaryPairwiseModel(g, couplings, np.zeros(n))
        ours = is_equivalent_to_attractive(m)
        brute = exhaustive_gauge_search(m)
        assert (ours is None) == (brute is None)
        if ours is not None:
            assert np.all(apply_gauge(m, ours).couplings >= 0)

    def test_medium_size_instance(self):
        rng = np.random.default_rng(7)
        g = random_connected_graph(rng, 12, extra_edges=6)
        m = BinaryPairwiseModel(g, rng.choice([-1.0, 1.0], size=g.n_edges), np.zeros(12))
        ours = is_equivalent_to_attractive(m)
        brute = exhaustive_gauge_search(m)
        assert (ours is None) == (brute is None)


def test_gauge_invariance_of_inference(rng):
    g = random_connected_graph(rng, 6, extra_edges=3)
    m = random_model(rng, g, j_scale=0.8, h_scale=0.5)
    signs = rng.choice([-1, 1], size=6)
    gauged = apply_gauge(m, GaugeTransform(signs))
    base = exact_inference(m)
    flipped = exact_inference(gauged)
    assert np.allclose(flipped.means, signs * base.means, atol=1e-12)
    assert abs(flipped.log_z - base.log_z) < 1e-10


class TestTemperatureScaling:
    def test_identity(self):
        m = single_edge_model(1.0, 0.5, 0.0)
        out = temperature_scaled(m, 1.0)
        assert np.array_equal(out.couplings, m.couplings)

    def test_halving(self):
        m = single_edge_model(1.0, 0.5, 0.0)
        out = temperature_scaled(m, 2.0)
        assert out.couplings[0] == 0.5
        assert out.fields[0] == 0.25

    def test_high_temperature_limit(self):
        m = single_edge_model(1.0, 0.5, -0.5)
        out = temperature_scaled(m, 1e12)
        assert np.max(np.abs(out.couplings)) < 1e-11
        assert np.max(np.abs(out.fields)) < 1e-11

    def test_nonpositive_rejected(self):
        m = single_edge_model(1.0, 0.0, 0.0)
        for t in (0.0, -1.0):
            with pytest.raises(NonPositiveTemperature):
                temperature_scaled(m, t)

    def test_commutes_with_gauge(self, rng):
        g = cycle_graph(5)
        m = random_model(rng, g)
        s = GaugeTransform(rng.choice([-1, 1], size=5))
        a = temperature_scaled(apply_gauge(m, s), 2.5)
        b = apply_gauge(temperature_scaled(m, 2.5), s)
        assert np.allclose(a.couplings, b.couplings)
        assert np.allclose(a.fields, b.fields)


class TestJson:
    def test_round_trip(self, rng):
        g = random_connected_graph(rng, 5, extra_edges=2)
        m = random_model(rng, g)
        obj = model_to_json(m)
        text = json.dumps(obj)
        back = model_from_json(json.loads(text))
        assert back.graph.edges == m.graph.edges
        assert np.allclose(back.couplings, m.couplings)
        assert np.allclose(back.fields, m.fields)

    def test_missing_coupling_rejected(self):
        obj = {
            "graph": {"vertices": 2, "edges": [[0, 1]]},
            "J": {},
            "h": [0.0, 0.0],
        }
        with pytest.raises(SchemaError):
            model_from_json(obj)

    def test_list_couplings_accepted(self):
        obj = {
            "graph": {"vertices": 2, "edges": [[0, 1]]},
            "J": [0.5],
            "h": [0.0, 0.0],
        }
        m = model_from_json(obj)
        assert m.couplings[0] == 0.5

    def test_multigraph_round_trip(self):
        obj = {
            "graph": {"vertices": 2, "edges": [[0, 1], [0, 1], [0, 1]], "multigraph": True},
            "J": [0.1, 0.2, 0.3],
            "h": [0.0, 0.0],
        }
        m = model_from_json(obj)
        assert not m.graph.simple
        assert model_to_json(m)["J"] == [0.1, 0.2, 0.3]

    def test_wrong_field_count_rejected(self):
        obj = {"graph": {"vertices": 2, "edges": [[0, 1]]}, "J": {"0-1": 1.0}, "h": [0.0]}
        with pytest.raises(SchemaError):
            model_from_json(obj)
