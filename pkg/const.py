SUM_TOLERANCE = 1e-9
WEIGHT_TOLERANCE = 1e-12  # mixture weights must sum to 1

# Adaptive sub-stepping of the simplex diffusion
DEFAULT_THETA = 0.1
DEFAULT_MAX_DEPTH = 12
NORMALS_CHUNK = 4096

DEFAULT_DT = 1e-3
DEFAULT_T_MAX = 1e3

# Fokker-Planck
MIN_CELLS = 16
DEFAULT_CELLS = 505  # odd multiple of 5: 0.1, 0.3, 0.5, ... are cell centers
DEFAULT_FP_DT = 1e-3
POSITIVITY_NOISE = 1e-12

# Track-pattern quantum model
MIN_GRID_POINTS = 256
DEFAULT_HBAR = 1.0
DEFAULT_MASS = 1.0
NORM_DRIFT_TOLERANCE = 1e-8
EDGE_AMPLITUDE_LIMIT = 1e-10
MASK_FRACTION = 1e-6

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SUMMARY_SCHEMA_VERSION = "1.0"
