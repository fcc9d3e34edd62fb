# --- Resolution Defaults ---
DEFAULT_K = 32  # Fourier mode cutoff
DEFAULT_N = 48  # Chebyshev-Gauss-Lobatto nodes in s
MIN_K = 8
MIN_N = 16
MIN_SERIES_K = 3

# --- Function Space Parameters ---
DEFAULT_GAMMA = 0.75
DEFAULT_M = 4
DEFAULT_SIGMA = 0.2
MAX_NORM_ORDER = 4

# --- Newton Iteration ---
DEFAULT_TOL_RESIDUAL = 1e-9
DEFAULT_MAX_ITER = 60
DEFAULT_DAMPING = 1.0
DEFAULT_CONTINUATION_STEPS = 1
DEFAULT_MAX_HALVINGS = 5
STEP_GROWTH_LIMIT = 4.0  # a full step may raise the residual up to this factor over the recent window
STEP_WINDOW = 5
ROUNDOFF_FLOOR_FACTOR = 4.0  # residual floor ~ factor * eps * (N - 1)^4 * max(1, |h|)
DEFAULT_COKERNEL_TOL = 1e-9
RESONANCE_TOL = 1e-7  # max |L u - f| of a linear solve before the log-resonant warning
DEFAULT_DEGENERACY_TOL = 1e-8
DEFAULT_SEED = 20240601

JACOBIAN_FROZEN = "frozen-reference"
JACOBIAN_FD = "finite-difference-full"
JACOBIAN_MODES = [JACOBIAN_FROZEN, JACOBIAN_FD]
FD_STEP = 1e-7

# --- Reference Flow ---
REFERENCE_VORTICITY = 4.0  # rigid rotation psi = x^2 + y^2

# --- Numerical Floors and Caps ---
AMPLITUDE_FLOOR = 1e-14
MIN_WIDTH_POINTS = 8
NORM_CAP = 1e12
TAYLOR_TOL = 1e-9
STREAM_BISECTION_STEPS = 60
BOUNDARY_CHECK_OVERSAMPLE = 8

# --- Compatibility Root Find ---
COMPAT_SCALE_MIN = 0.5
COMPAT_SCALE_MAX = 2.0
COMPAT_RANGE_TOL = 1e-6
COMPAT_X0 = 1.0
COMPAT_X1 = 1.05

# --- Diagnostics ---
RANDOM_DECAY = 0.5  # coefficients ~ exp(-0.5 k) * N(0, 1)
HARDY_SLACK = 0.05
HARDY_DEGREE = 16
HARDY_ALPHAS = [-1.0, -0.5, 0.0, 0.25, 0.75, 1.0]
HARDY_TRIALS = 100
COKERNEL_TRIALS = 100
COKERNEL_AMPLITUDE = 0.1
COKERNEL_BOUND = 1e-9
LINEAR_TRIALS = 200
LINEAR_K = 16
LINEAR_N = 48
ISOMORPHISM_BOUND = 1e4
ROUNDTRIP_TOL = 1e-8
BOUNDARY_RELATION_TOL = 1e-10
BRANCH_TRIALS = 20
BRANCH_K = 16
BRANCH_N = 32
BRANCH_DEGREE = 8
COKERNEL_K = 32
COKERNEL_N = 16
COKERNEL_MODES = 8
LINEAR_MODES = 8
QUADRATURE_POINTS = 120
HARDY_TAYLOR_CUTOFF = 1e-4

SUITE_HARDY = "hardy"
SUITE_COKERNEL = "cokernel"
SUITE_LINEAR = "linear"
SUITE_BRANCHES = "branches"
SUITE_ALL = "all"

# --- File Formats ---
FORMAT_VERSION = 1
FLOAT_FORMAT = ".17g"
CSV_LINE_TERMINATOR = "\n"
OUTSIDE_SENTINEL = -1.0
MAX_STREAM_RESOLUTION = 2048
DEFAULT_STREAM_RESOLUTION = 64
DEFAULT_LEVELS = [0.25, 0.5, 0.75, 1.0]
OUTPUT_JSON = "json"
OUTPUT_CSV = "csv"

VORTICITY_CONSTANT = "constant"
VORTICITY_SAMPLES = "radial-samples"
VORTICITY_POLYNOMIAL = "polynomial"
BOUNDARY_TRANSLATED_DISK = "translated-disk"
DEFAULT_TAU = 0.5

SWEEP_SCALE = "scale"
SWEEP_VORTICITY_SHIFT = "vorticity_shift"

# --- Exit Codes ---
EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NONCONVERGENCE = 2
