"""Constants for the spreadcore package."""
import os

__version__ = "0.1.0.dev0"

OUTPUT_DIR = os.environ.get("spreadcore_out", "spreadcore-out")
DEFAULT_JOBS = int(os.environ.get("spreadcore_jobs", 1))

# Grids
DEFAULT_NT = 64
DEFAULT_NX = 64
MIN_CHECK_POINTS = 8
MIN_CELL_POINTS = 16
QUADRATURE_POINTS = 16

# Periodic orbits and spectra
TOL_ORBIT = 1e-8
MAX_ORBIT_PERIODS = 100000
SPECTRAL_TOL = 1e-10
RESIDUAL_TOL = 1e-8
MAX_SPECTRAL_PERIODS = 10000
EXTINCTION_LEVEL = 1e-12

# Sampled hypothesis checks
PERIODICITY_TOL = 1e-9
HYPOTHESIS_TOLERANCE = 1e-9
STABILITY_SAMPLES = 4
STABILITY_PERIODS = 100
STABILITY_GAP = 0.05

# Time stepping
STEP_SAFETY = 0.5
CLAMP_SLACK = 1e-12
CLAMP_LIMIT = 1e-6

# Speeds
MU_GRID_EXPONENTS = tuple(range(-8, 9))
BRACKET_EXPANSIONS = 2
GOLDEN_TOL = 1e-5
C0_CAP = 50.0
C0_RESOLUTION = 0.01
C0_TOL = 1e-6
C0_PHASES = 8

# Fronts
FRONT_CUTOFF = 20.0
FRONT_MARGIN = 1.0
LEVEL_HIGH = 0.99
LEVEL_LOW = 0.01
MIN_R2 = 0.99
MIN_SNAPSHOTS = 10
BOUNDARY_NODES = 5
BEHIND_POSITION = -0.25
BEHIND_FROM = 0.75
BEHIND_TOL = 1e-3

# Output
CSV_SCHEMA_VERSION = 1
REPORT_SCHEMA_VERSION = 1
