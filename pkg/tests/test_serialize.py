import json

import numpy as np
import pytest

from corrlog.data import ToySpec, add_bias_column, generate_toy, sample_from_model
from corrlog.errors import DataError, ModelFormatError
from corrlog.inference import predict_map_bp
from corrlog.model import ModelParams
from corrlog.objective import RegularizationConfig
from corrlog.optimizer import TrainConfig, train_corrlog
from corrlog.serialize import export_label_graph, load_model, save_model

from conftest import random_params


class TestModelDocument:
    def test_round_trip_bit_exact(self):
        rng = np.random.default_rng(0)
        params = random_params(rng, 4, 3, density=0.5)
        reg = RegularizationConfig(0.001, 0.002, 1.0)
        doc = save_model(params, reg, {"note": "fixture"})
        loaded = load_model(doc)
        assert np.array_equal(loaded.params.beta, params.beta)
        assert loaded.params.alpha == params.alpha
        assert loaded.reg == reg
        assert loaded.metadata == {"note": "fixture"}

    def test_save_load_save_byte_identical(self):
        rng = np.random.default_rng(1)
        params = random_params(rng, 3, 5, density=0.7)
        reg = RegularizationConfig(0.01, 0.02, 0.5)
        first = save_model(params, reg, {"k": [1, 2, 3]})
        loaded = load_model(first)
        second = save_model(loaded.params, loaded.reg, loaded.metadata)
        assert first == second

    def test_all_zero_model_has_empty_alpha_list(self):
        doc = save_model(ModelParams.zeros(3, 2), RegularizationConfig())
        assert json.loads(doc)["alpha"] == []

    def test_bad_magic_rejected(self):
        doc = save_model(ModelParams.zeros(1, 1), RegularizationConfig())
        broken = doc.replace("corrlog-model", "something-else")
        with pytest.raises(ModelFormatError, match="magic"):
            load_model(broken)

    def test_wrong_version_rejected(self):
        doc = json.loads(save_model(ModelParams.zeros(1, 1), RegularizationConfig()))
        doc["version"] = 99
        with pytest.raises(ModelFormatError, match="version"):
            load_model(json.dumps(doc))

    def test_shape_inconsistency_rejected(self):
        doc = json.loads(save_model(ModelParams.zeros(2, 2), RegularizationConfig()))
        doc["num_features"] = 3
        with pytest.raises(ModelFormatError, match="shape"):
            load_model(json.dumps(doc))

    def test_garbage_rejected(self):
        with pytest.raises(ModelFormatError):
            load_model("not json at all {")

    def test_trained_toy_model_round_trips_behavior(self):
        train, test = generate_toy(ToySpec(n_train=150, n_test=100, seed=2))
        train = add_bias_column(train)
        test = add_bias_column(test)
        reg = RegularizationConfig(0.001, 0.001, 0.0)
        params, _ = train_corrlog(train, TrainConfig(reg=reg, max_iters=5000))
        loaded = load_model(save_model(params, reg)).params
        for inst in test.instances:
            orig, _ = predict_map_bp(params, inst.features)
            back, _ = predict_map_bp(loaded, inst.features)
            assert np.array_equal(orig, back)


class TestLabelGraph:
    def test_zero_alpha_edgeless(self):
        graph = export_label_graph(ModelParams.zeros(3, 2), ("a", "b", "c"))
        assert graph.nodes == ("a", "b", "c")
        assert graph.edges == []
        dot = graph.to_dot()
        assert '"a";' in dot and "--" not in dot

    def test_single_positive_edge(self):
        params = ModelParams(np.zeros((2, 1)), {(0, 1): 0.5}, 2, 1)
        graph = export_label_graph(params, ("x", "y"), threshold=0.0)
        assert len(graph.edges) == 1
        edge = graph.edges[0]
        assert edge["source"] == "x" and edge["target"] == "y"
        assert edge["weight"] == 0.5
        assert edge["sign"] == "positive"
        assert '"x" -- "y"' in graph.to_dot()
        parsed = json.loads(graph.to_json())
        assert parsed["edges"][0]["sign"] == "positive"

    def test_threshold_filters_small_weights(self):
        params = ModelParams(
            np.zeros((3, 1)), {(0, 1): 1e-10, (0, 2): -0.4}, 3, 1
        )
        graph = export_label_graph(params, ("a", "b", "c"))  # default 1e-8
        assert len(graph.edges) == 1
        assert graph.edges[0]["sign"] == "negative"

    def test_label_name_count_checked(self):
        with pytest.raises(DataError):
            export_label_graph(ModelParams.zeros(3, 1), ("a", "b"))

    def test_elastic_net_graph_no_denser_than_quadratic_graph(self):
        rng = np.random.default_rng(42)
        truth = random_params(rng, 5, 3, alpha_scale=0.5, density=0.4)
        ds = sample_from_model(truth, n=200, seed=3)
        graphs = {}
        for eps in (0.0, 1.0):
            reg = RegularizationConfig(0.02, 0.02, eps)
            params, _ = train_corrlog(ds, TrainConfig(reg=reg, max_iters=3000, rel_tol=1e-9))
            graphs[eps] = export_label_graph(params, ds.label_names)
        assert len(graphs[1.0].edges) <= len(graphs[0.0].edges)
        assert len(graphs[0.0].edges) == 10  # quadratic penalty keeps every pair
