from pathlib import Path

# Root directory of the project (src's parent)
ROOT_DIR = Path(__file__).resolve().parent.parent.parent.parent

CONFIG_FILE_PATH = ROOT_DIR / "config" / "config.yaml"
PARAMS_FILE_PATH = ROOT_DIR / "params.yaml"
SCHEMA_FILE_PATH = ROOT_DIR / "schema.yaml"
SCENARIO_DIR = ROOT_DIR / "scenarios"

# Berry-Esseen constant for sums of independent Bernoulli variables
BERRY_ESSEEN_K = 0.56

# 1 KB chunks, taken as 1024 bytes
DEFAULT_BYTES_PER_CHUNK = 1024

# Weight-ratio bound used when a mixture normalises its components
NORMALIZATION_EPSILON = 1e-4

# Shares of a traffic mix must sum to one within this tolerance
SHARE_TOLERANCE = 1e-9

# Upper limit of the erfc hit-rate integral in v = q*t (e^-40 < 1e-17)
ERFC_TRUNCATION = 40.0

POLICIES = ("LRU_CHE", "RANDOM_FP", "LFU_STATIC", "SIM_LRU", "SIM_RANDOM", "SIM_FIFO")
ANALYTIC_POLICIES = ("LRU_CHE", "RANDOM_FP", "LFU_STATIC")
SIMULATED_POLICIES = {"SIM_LRU": "LRU", "SIM_RANDOM": "RANDOM", "SIM_FIFO": "FIFO"}

# Column layout of every emitted sweep table
SWEEP_COLUMNS = ["capacity", "unit", "policy", "rank", "hit_rate", "ci_halfwidth"]
