"""Scenario documents: JSON in, validated pydantic models and domain objects out."""
import logging
import re
from pathlib import Path
from typing import Sequence, Tuple

import numpy as np
from pydantic import TypeAdapter, ValidationError

from const import WEIGHT_TOLERANCE
from errors import ScenarioParseError, ScenarioValidationError, SimulationError
from fokker_planck import FpGrid, stable_explicit_dt
from models import CorrelationModel, NormVector
from schemas import (
    SCENARIO_KINDS,
    BridgeScenario,
    CorrelationBlock,
    DiffusionScenario,
    FokkerPlanckScenario,
    MixtureScenario,
    QuantumBlock,
    QuantumScenario,
    Scenario,
    ScenarioBase,
    SyntheticComponentBlock,
)
from simplex_diffusion import new_norm_vector
from track_pattern import (
    CouplingSpec,
    FieldForm,
    GaussianPacket,
    GridSpec,
    Potential,
    TwoChannelState,
    init_state,
)

logger = logging.getLogger(__name__)

_ADAPTER = TypeAdapter(Scenario)
_LINE = re.compile(r"line (\d+)")


def _field_path(loc: Tuple) -> str:
    parts = list(loc)
    # discriminated unions insert the matched tag into the location
    if parts and parts[0] in SCENARIO_KINDS:
        parts = parts[1:]
    if "components" in parts:
        i = parts.index("components") + 2
        if i < len(parts) and parts[i] in ("synthetic", "quantum"):
            parts.pop(i)
    return ".".join(str(p) for p in parts)


def _parse_error(exc: ValidationError) -> ScenarioParseError:
    first = exc.errors()[0]
    kind = first["type"]
    if kind == "json_invalid":
        match = _LINE.search(first["msg"])
        line = int(match.group(1)) if match else None
        return ScenarioParseError(f"Malformed scenario document: {first['msg']}", line=line)
    field = _field_path(first["loc"])
    if kind == "extra_forbidden":
        key = first["loc"][-1]
        return ScenarioParseError(f"Unknown key '{key}' at '{field}'", field=field)
    if kind == "missing":
        return ScenarioParseError(f"Missing required key '{field}'", field=field)
    if kind in ("union_tag_not_found", "union_tag_invalid"):
        return ScenarioParseError(
            f"Scenario kind must be one of {', '.join(SCENARIO_KINDS)}: {first['msg']}",
            field=field or "kind",
        )
    return ScenarioParseError(f"Invalid value at '{field}': {first['msg']}", field=field)


def parse_scenario(text: str) -> Scenario:
    """Parse and fully validate a scenario document."""
    try:
        scenario = _ADAPTER.validate_json(text)
    except ValidationError as exc:
        raise _parse_error(exc) from exc
    validate_scenario(scenario)
    logger.debug(f"Parsed {scenario.kind} scenario, seed={scenario.seed}")
    return scenario


def check_seed(seed: int) -> int:
    """Validate a seed given outside the document (CLI override) against the scenario rules."""
    try:
        return ScenarioBase.model_validate({"seed": seed}).seed
    except ValidationError as exc:
        raise ScenarioValidationError(
            f"Invalid seed {seed}: {exc.errors()[0]['msg']}", field="seed"
        ) from exc


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioParseError(f"Cannot read scenario file {path}: {exc}") from exc
    return parse_scenario(text)


# -------------------------------------------------------------------
# Builders: scenario blocks to domain objects
# -------------------------------------------------------------------

def build_norm_vector(values: Sequence[float]) -> NormVector:
    return new_norm_vector(values)


def build_model(block: CorrelationBlock, n_channels: int) -> CorrelationModel:
    if block.matrix is not None:
        if block.a is not None:
            raise ScenarioValidationError("Give either 'a' or 'matrix', not both", field="a")
        base = np.asarray(block.matrix, dtype=np.float64)
        if base.shape != (n_channels, n_channels):
            raise ScenarioValidationError(
                f"Matrix shape {base.shape} does not match {n_channels} channels", field="matrix"
            )
    else:
        a = 1.0 if block.a is None else block.a
        base = CorrelationModel.constant(n_channels, a).base
    if block.kind == "constant":
        return CorrelationModel("constant", base)
    if block.kind == "bilinear":
        return CorrelationModel("bilinear", base, gain=block.gain)
    return CorrelationModel.time_ramp(base, block.ramp)


def build_grid(block: QuantumBlock) -> GridSpec:
    g = block.grid
    return GridSpec(g.x_min, g.x_max, g.n_points, mass=g.mass, hbar=g.hbar)


def build_coupling(block: QuantumBlock) -> CouplingSpec:
    return CouplingSpec(
        potential=Potential(block.potential.kind, block.potential.omega),
        lambda_x=FieldForm(**block.lambda_x.model_dump()),
        lambda_y=FieldForm(**block.lambda_y.model_dump()),
        lambda_z=FieldForm(**block.lambda_z.model_dump()),
    )


def coefficients(block: QuantumBlock) -> Tuple[complex, complex]:
    return complex(*block.c1), complex(*block.c2)


def build_state(block: QuantumBlock, grid: GridSpec) -> TwoChannelState:
    c1, c2 = coefficients(block)
    packet = GaussianPacket(block.packet.center, block.packet.width, block.packet.momentum)
    return init_state(c1, c2, packet, grid)


# -------------------------------------------------------------------
# Domain validation
# -------------------------------------------------------------------

def _checked(field: str, build, *args):
    try:
        return build(*args)
    except ScenarioValidationError as exc:
        if exc.field is None or not exc.field.startswith(field):
            exc.field = f"{field}.{exc.field}" if exc.field else field
        raise
    except SimulationError as exc:
        raise ScenarioValidationError(f"{type(exc).__name__}: {exc.detail}", field=field) from exc


def _validate_quantum(block: QuantumBlock, field: str) -> None:
    grid = _checked(f"{field}.grid", build_grid, block)
    _checked(field, build_coupling, block)
    _checked(field, build_state, block, grid)


def _validate_synthetic(block: SyntheticComponentBlock, field: str) -> None:
    p0 = _checked(f"{field}.p0", build_norm_vector, block.p0)
    _checked(f"{field}.model", build_model, block.model, p0.n_channels)


def validate_scenario(scenario: Scenario) -> None:
    """Build every domain object the scenario describes; raise ScenarioValidationError on failure."""
    if isinstance(scenario, DiffusionScenario):
        p0 = _checked("diffusion.p0", build_norm_vector, scenario.diffusion.p0)
        _checked("diffusion.model", build_model, scenario.diffusion.model, p0.n_channels)
    elif isinstance(scenario, FokkerPlanckScenario):
        block = scenario.fokker_planck
        if block.scheme == "explicit":
            grid = _checked("fokker_planck", FpGrid.from_correlation, block.a, block.n_cells)
            bound = stable_explicit_dt(grid)
            if block.dt > bound:
                raise ScenarioValidationError(
                    f"UnstableStep: dt={block.dt} exceeds the explicit bound {bound:.3e}",
                    field="fokker_planck.dt",
                )
    elif isinstance(scenario, QuantumScenario):
        _validate_quantum(scenario.quantum, "quantum")
    elif isinstance(scenario, MixtureScenario):
        components = scenario.mixture.components
        total = sum(c.weight for c in components)
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise ScenarioValidationError(
                f"Component weights sum to {total!r}, expected 1", field="mixture.components"
            )
        for i, component in enumerate(components):
            field = f"mixture.components.{i}"
            if component.source == "synthetic":
                _validate_synthetic(component, field)
            else:
                _validate_quantum(component.quantum, f"{field}.quantum")
        channels = {len(c.p0) if c.source == "synthetic" else 2 for c in components}
        if len(channels) > 1:
            raise ScenarioValidationError(
                f"Components disagree on the channel count: {sorted(channels)}",
                field="mixture.components",
            )
    elif isinstance(scenario, BridgeScenario):
        _validate_quantum(scenario.bridge.quantum, "bridge.quantum")
        if scenario.bridge.quantum.correlation_window is not None:
            raise ScenarioValidationError(
                "The bridge estimates correlations itself; set 'window' instead",
                field="bridge.quantum.correlation_window",
            )
