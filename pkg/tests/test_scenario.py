import json

import numpy as np
import pytest

from conftest import SCENARIO_DIR
from errors import NotNormalized, ScenarioParseError, ScenarioValidationError
from scenario import build_model, check_seed, load_scenario, parse_scenario
from schemas import CorrelationBlock, DiffusionScenario


def _quantum_block(**overrides):
    block = {"c1": [0.6, 0.0], "c2": [0.8, 0.0], "packet": {"center": 2.0, "width": 0.5},
             "n_steps": 10}
    block.update(overrides)
    return block


class TestParseScenario:
    def test_minimal_diffusion(self, diffusion_document):
        scenario = parse_scenario(json.dumps(diffusion_document))
        assert isinstance(scenario, DiffusionScenario)
        assert scenario.diffusion.dt == 1e-3
        assert scenario.output.formats == ["csv", "json-summary"]

    def test_unnormalized_p0(self, diffusion_document):
        diffusion_document["diffusion"]["p0"] = [0.4, 0.7]
        with pytest.raises(ScenarioValidationError) as info:
            parse_scenario(json.dumps(diffusion_document))
        assert info.value.field == "diffusion.p0"
        assert isinstance(info.value.__cause__, NotNormalized)

    def test_unknown_key(self, diffusion_document):
        diffusion_document["diffusion"]["trajectorys"] = 10
        with pytest.raises(ScenarioParseError) as info:
            parse_scenario(json.dumps(diffusion_document))
        assert "trajectorys" in info.value.detail
        assert info.value.field.endswith("trajectorys")

    def test_missing_key(self):
        with pytest.raises(ScenarioParseError) as info:
            parse_scenario(json.dumps({"kind": "diffusion", "diffusion": {}}))
        assert info.value.field == "diffusion.p0"

    def test_malformed_json(self):
        with pytest.raises(ScenarioParseError) as info:
            parse_scenario('{\n  "kind": "diffusion",\n  "seed": \n')
        assert info.value.line is not None

    def test_unknown_kind(self):
        with pytest.raises(ScenarioParseError) as info:
            parse_scenario(json.dumps({"kind": "teleport"}))
        assert info.value.field == "kind"

    def test_negative_seed(self, diffusion_document):
        diffusion_document["seed"] = -1
        with pytest.raises(ScenarioParseError) as info:
            parse_scenario(json.dumps(diffusion_document))
        assert info.value.field == "seed"

    def test_both_a_and_matrix(self, diffusion_document):
        diffusion_document["diffusion"]["model"] = {"a": 1.0, "matrix": [[0, 1], [1, 0]]}
        with pytest.raises(ScenarioValidationError) as info:
            parse_scenario(json.dumps(diffusion_document))
        assert info.value.field == "diffusion.model.a"

    def test_explicit_step_too_large(self):
        document = {"kind": "fokker-planck",
                    "fokker_planck": {"x0": 0.3, "scheme": "explicit", "dt": 1e-3}}
        with pytest.raises(ScenarioValidationError) as info:
            parse_scenario(json.dumps(document))
        assert info.value.field == "fokker_planck.dt"
        assert info.value.detail.startswith("UnstableStep")

    def test_explicit_step_at_positivity_bound(self):
        # 51 cells at a = 1 allow dt up to 2.563e-4
        document = {"kind": "fokker-planck", "fokker_planck": {
            "x0": 0.3, "n_cells": 51, "scheme": "explicit", "dt": 2.5e-4}}
        assert parse_scenario(json.dumps(document)).fokker_planck.dt == 2.5e-4
        document["fokker_planck"]["dt"] = 2.6e-4
        with pytest.raises(ScenarioValidationError) as info:
            parse_scenario(json.dumps(document))
        assert info.value.field == "fokker_planck.dt"

    def test_unnormalized_coefficients(self):
        document = {"kind": "quantum", "quantum": _quantum_block(c2=[0.6, 0.0])}
        with pytest.raises(ScenarioValidationError) as info:
            parse_scenario(json.dumps(document))
        assert info.value.detail.startswith("UnnormalizedCoefficients")

    def test_mixture_weights_must_sum_to_one(self):
        component = {"source": "synthetic", "p0": [0.5, 0.5], "n_steps": 10}
        document = {"kind": "mixture", "mixture": {"components": [
            {**component, "weight": 0.5}, {**component, "weight": 0.6}]}}
        with pytest.raises(ScenarioValidationError) as info:
            parse_scenario(json.dumps(document))
        assert info.value.field == "mixture.components"

    def test_mixture_component_error_path(self):
        document = {"kind": "mixture", "mixture": {"components": [
            {"source": "synthetic", "weight": 1.0, "p0": [0.5, 0.5], "typo": 1}]}}
        with pytest.raises(ScenarioParseError) as info:
            parse_scenario(json.dumps(document))
        assert info.value.field == "mixture.components.0.typo"

    def test_mixture_channel_counts_must_agree(self):
        document = {"kind": "mixture", "mixture": {"components": [
            {"source": "synthetic", "weight": 0.5, "p0": [0.2, 0.3, 0.5]},
            {"source": "quantum", "weight": 0.5, "quantum": _quantum_block()}]}}
        with pytest.raises(ScenarioValidationError):
            parse_scenario(json.dumps(document))

    def test_bridge_rejects_correlation_window(self):
        document = {"kind": "bridge",
                    "bridge": {"quantum": _quantum_block(correlation_window=2)}}
        with pytest.raises(ScenarioValidationError) as info:
            parse_scenario(json.dumps(document))
        assert info.value.field == "bridge.quantum.correlation_window"


class TestLoadScenario:
    @pytest.mark.parametrize("path", sorted(SCENARIO_DIR.glob("*.json")), ids=lambda p: p.stem)
    def test_shipped_scenarios_are_valid(self, path):
        assert load_scenario(path).kind in path.stem.replace("_", "-")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioParseError):
            load_scenario(tmp_path / "absent.json")


class TestBuildModel:
    def test_default_is_unit_constant(self):
        model = build_model(CorrelationBlock(), 3)
        np.testing.assert_array_equal(model.base, 1.0 - np.eye(3))

    def test_full_matrix(self):
        matrix = [[0.0, 1.0, 2.0], [1.0, 0.0, 3.0], [2.0, 3.0, 0.0]]
        model = build_model(CorrelationBlock(matrix=matrix), 3)
        np.testing.assert_array_equal(model.base, matrix)

    def test_matrix_shape_mismatch(self):
        with pytest.raises(ScenarioValidationError):
            build_model(CorrelationBlock(matrix=[[0.0, 1.0], [1.0, 0.0]]), 3)

    def test_bilinear(self):
        model = build_model(CorrelationBlock(kind="bilinear", gain=2.0), 2)
        assert model.kind == "bilinear"
        assert model.gain == 2.0


class TestCheckSeed:
    @pytest.mark.parametrize("seed", [0, 7, 2**64 - 1])
    def test_accepts_valid_seed(self, seed):
        assert check_seed(seed) == seed

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_rejects_out_of_range(self, seed):
        with pytest.raises(ScenarioValidationError) as info:
            check_seed(seed)
        assert info.value.field == "seed"
