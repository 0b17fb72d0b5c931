from const import EXIT_CONFIG, EXIT_RUNTIME


class SimulationError(Exception):
    """Base error. `detail` is the human message, `exit_code` what the CLI returns."""

    exit_code = EXIT_RUNTIME

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InvalidParameter(SimulationError):
    pass


# simplex-diffusion
class NegativeEntry(SimulationError):
    pass


class NotNormalized(SimulationError):
    pass


class NonFiniteIncrement(SimulationError):
    pass


class TrajectoryTimeout(SimulationError):
    pass


# fokker-planck
class UnstableStep(SimulationError):
    pass


class InsufficientDecay(SimulationError):
    pass


# track-pattern-quantum
class UnnormalizedCoefficients(SimulationError):
    pass


class UnresolvablePacket(SimulationError):
    pass


class NormDriftExceeded(SimulationError):
    pass


class SeriesTooShort(SimulationError):
    pass


class EmptyMask(SimulationError):
    pass


# mixture-ensemble
class MismatchedGrids(SimulationError):
    pass


# harness
class ScenarioParseError(SimulationError):
    exit_code = EXIT_CONFIG

    def __init__(self, detail: str, field: str | None = None, line: int | None = None):
        super().__init__(detail)
        self.field = field
        self.line = line


class ScenarioValidationError(SimulationError):
    exit_code = EXIT_CONFIG

    def __init__(self, detail: str, field: str | None = None):
        super().__init__(detail)
        self.field = field


class OutputError(SimulationError):
    pass
