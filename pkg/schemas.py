from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from const import (
    DEFAULT_CELLS,
    DEFAULT_DT,
    DEFAULT_FP_DT,
    DEFAULT_HBAR,
    DEFAULT_MASS,
    DEFAULT_MAX_DEPTH,
    DEFAULT_T_MAX,
    DEFAULT_THETA,
    MASK_FRACTION,
    SUMMARY_SCHEMA_VERSION,
)

SCENARIO_KINDS = ("diffusion", "fokker-planck", "quantum", "mixture", "bridge")
OutputFormat = Literal["csv", "json-summary"]


# Base schema: unknown keys are errors everywhere.
class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class OutputBlock(StrictModel):
    directory: str = "out"
    formats: List[OutputFormat] = ["csv", "json-summary"]


#Diffusion Schema
class CorrelationBlock(StrictModel):
    """Either a uniform coefficient `a` for every pair or a full `matrix`."""
    kind: Literal["constant", "bilinear", "time-ramp"] = "constant"
    a: Optional[float] = Field(None, ge=0)
    matrix: Optional[List[List[float]]] = None
    gain: float = Field(1.0, ge=0)
    ramp: float = Field(1.0, gt=0)


class DiffusionBlock(StrictModel):
    p0: List[float]
    model: CorrelationBlock = CorrelationBlock(a=1.0)
    n_trajectories: int = Field(1000, ge=1)
    dt: float = Field(DEFAULT_DT, gt=0)
    t_max: float = Field(DEFAULT_T_MAX, gt=0)
    theta: float = Field(DEFAULT_THETA, gt=0)
    max_depth: int = Field(DEFAULT_MAX_DEPTH, ge=0, le=40)


class DiffusionAcceptance(StrictModel):
    born_sigma: Optional[float] = Field(None, gt=0)
    mean_hitting_time: Optional[float] = Field(None, gt=0)
    mean_hitting_time_rel_tol: float = Field(0.05, gt=0)
    require_all_absorbed: bool = False


class ScenarioBase(StrictModel):
    seed: int = Field(0, ge=0, lt=2**64)
    output: OutputBlock = OutputBlock()


class DiffusionScenario(ScenarioBase):
    kind: Literal["diffusion"]
    diffusion: DiffusionBlock
    acceptance: DiffusionAcceptance = DiffusionAcceptance()


#Fokker-Planck Schema
class FokkerPlanckBlock(StrictModel):
    x0: float = Field(gt=0, lt=1)
    a: float = Field(1.0, gt=0)
    n_cells: int = Field(DEFAULT_CELLS, ge=16)
    t_end: float = Field(5.0, gt=0)
    dt: float = Field(DEFAULT_FP_DT, gt=0)
    scheme: Literal["implicit", "explicit"] = "implicit"
    n_snapshots: int = Field(50, ge=1)
    compare_trajectories: int = Field(0, ge=0)
    compare_dt: float = Field(DEFAULT_DT, gt=0)


class FokkerPlanckAcceptance(StrictModel):
    split_tolerance: Optional[float] = Field(None, gt=0)
    mass_tolerance: Optional[float] = Field(None, gt=0)
    decay_rate_rel_tol: Optional[float] = Field(None, gt=0)
    cross_sigma: Optional[float] = Field(None, gt=0)


class FokkerPlanckScenario(ScenarioBase):
    kind: Literal["fokker-planck"]
    fokker_planck: FokkerPlanckBlock
    acceptance: FokkerPlanckAcceptance = FokkerPlanckAcceptance()


#Quantum Schema
class GridBlock(StrictModel):
    x_min: float = -20.0
    x_max: float = 20.0
    n_points: int = 1024
    mass: float = DEFAULT_MASS
    hbar: float = DEFAULT_HBAR


class PacketBlock(StrictModel):
    center: float = 0.0
    width: float = 1.0
    momentum: float = 0.0


class PotentialBlock(StrictModel):
    kind: Literal["free", "harmonic"] = "harmonic"
    omega: float = 1.0


class FieldBlock(StrictModel):
    kind: Literal["zero", "constant", "linear", "gaussian", "ramp"] = "zero"
    value: float = 0.0
    slope: float = 0.0
    center: float = 0.0
    width: float = 1.0
    ramp: float = 1.0


class QuantumBlock(StrictModel):
    grid: GridBlock = GridBlock()
    c1: Tuple[float, float] = (1.0, 0.0)  # (re, im)
    c2: Tuple[float, float] = (0.0, 0.0)
    packet: PacketBlock = PacketBlock()
    potential: PotentialBlock = PotentialBlock()
    lambda_x: FieldBlock = FieldBlock()
    lambda_y: FieldBlock = FieldBlock()
    lambda_z: FieldBlock = FieldBlock()
    dt: float = Field(0.01, gt=0)
    n_steps: int = Field(1000, ge=1)
    record_every: int = Field(1, ge=1)
    snapshot_every: Optional[int] = Field(None, ge=1)
    correlation_window: Optional[int] = Field(None, ge=1)
    wkb_threshold_fraction: float = Field(MASK_FRACTION, gt=0, lt=1)


class QuantumAcceptance(StrictModel):
    norm_drift: Optional[float] = Field(None, gt=0)
    pointer_tolerance: Optional[float] = Field(None, gt=0)
    rabi_tolerance: Optional[float] = Field(None, gt=0)


class QuantumScenario(ScenarioBase):
    kind: Literal["quantum"]
    quantum: QuantumBlock
    acceptance: QuantumAcceptance = QuantumAcceptance()


#Mixture Schema
class SyntheticComponentBlock(StrictModel):
    source: Literal["synthetic"]
    weight: float = Field(ge=0)
    p0: List[float]
    model: CorrelationBlock = CorrelationBlock(a=1.0)
    dt: float = Field(1e-4, gt=0)
    n_steps: int = Field(1000, ge=1)


class QuantumComponentBlock(StrictModel):
    source: Literal["quantum"]
    weight: float = Field(ge=0)
    quantum: QuantumBlock


ComponentBlock = Annotated[
    Union[SyntheticComponentBlock, QuantumComponentBlock], Field(discriminator="source")
]


class MixtureBlock(StrictModel):
    components: List[ComponentBlock] = Field(min_length=1)
    variance_dt: Optional[float] = Field(None, gt=0)
    n_trajectories: int = Field(0, ge=0)
    dt_scale: float = Field(1e-3, gt=0)
    t_max_scale: float = Field(1e3, gt=0)


class MixtureAcceptance(StrictModel):
    born_sigma: Optional[float] = Field(None, gt=0)


class MixtureScenario(ScenarioBase):
    kind: Literal["mixture"]
    mixture: MixtureBlock
    acceptance: MixtureAcceptance = MixtureAcceptance()


#Bridge Schema
class BridgeBlock(StrictModel):
    quantum: QuantumBlock
    window: int = Field(1, ge=1)
    n_trajectories: int = Field(10000, ge=1)
    dt_scale: float = Field(1e-3, gt=0)
    t_max_scale: float = Field(1e3, gt=0)
    theta: float = Field(DEFAULT_THETA, gt=0)
    max_depth: int = Field(DEFAULT_MAX_DEPTH, ge=0, le=40)


class BridgeAcceptance(StrictModel):
    born_sigma: Optional[float] = Field(None, gt=0)
    min_correlation_sigma: Optional[float] = Field(None, gt=0)


class BridgeScenario(ScenarioBase):
    kind: Literal["bridge"]
    bridge: BridgeBlock
    acceptance: BridgeAcceptance = BridgeAcceptance()


Scenario = Annotated[
    Union[DiffusionScenario, FokkerPlanckScenario, QuantumScenario, MixtureScenario,
          BridgeScenario],
    Field(discriminator="kind"),
]


#Summary Schema
class ToleranceCheck(BaseModel):
    name: str
    value: Optional[float]
    expected: Optional[float]
    tolerance: Optional[float]
    passed: bool


class RunSummary(BaseModel):
    """Machine-readable run summary; summary_schema.json is its published schema."""
    schema_version: str
    kind: str
    seed: int
    scenario: Dict[str, Any]
    results: Dict[str, Any]
    checks: List[ToleranceCheck]
    passed: bool

    @classmethod
    def build(cls, kind: str, seed: int, scenario: Dict[str, Any], results: Dict[str, Any],
              checks: List[ToleranceCheck]) -> "RunSummary":
        return cls(
            schema_version=SUMMARY_SCHEMA_VERSION,
            kind=kind,
            seed=seed,
            scenario=scenario,
            results=results,
            checks=checks,
            passed=all(check.passed for check in checks),
        )
