"""Application configuration"""

import os

from dotenv import load_dotenv

load_dotenv()

# Logging
LOG_LEVEL = os.getenv("REJECTLAB_LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Run defaults (flags and config files override these)
DEFAULT_SEED = int(os.getenv("REJECTLAB_SEED", "0"))
# unset: each verification check runs its own default trial count
DEFAULT_TRIALS = int(os.environ["REJECTLAB_TRIALS"]) if os.getenv("REJECTLAB_TRIALS") else None
DEFAULT_WORKERS = int(os.getenv("REJECTLAB_WORKERS", "4"))
DEFAULT_LAMBDA = float(os.getenv("REJECTLAB_LAMBDA", "2.0"))
DEFAULT_COST = float(os.getenv("REJECTLAB_COST", "0.5"))
DEFAULT_LOSS = os.getenv("REJECTLAB_LOSS", "modified-log")
DEFAULT_REJECTOR = os.getenv("REJECTLAB_REJECTOR", "marginal")

# Numerical tolerances
PROB_TOLERANCE = 1e-9  # simplex sums
RENORMALIZE_THRESHOLD = 1e-12  # sums closer to 1 than this are left untouched
IDENTITY_TOLERANCE = 1e-12
ORACLE_MATCH_TOLERANCE = 1e-6
ORACLE_OBJECTIVE_TOLERANCE = 1e-8

# Ideal-distribution oracle
ORACLE_MAX_ITERS = 100_000
ORACLE_STEP_SIZE = 0.5
ORACLE_TOLERANCE = 1e-10
ORACLE_MIN_LAMBDA = 1e-6
ORACLE_MAX_INPUTS = 64
ORACLE_MAX_JOINT_SIZE = 256
EXHAUSTIVE_MAX_INPUTS = 20

# Task generation defaults
DEFAULT_N_INPUTS = 8
DEFAULT_N_LABELS = 3
DEFAULT_MARGINAL_CONCENTRATION = 1.0
DEFAULT_POSTERIOR_CONCENTRATION = 1.0
DEFAULT_MODEL_NOISE = 1.0

_TASK_KEYS = ("n_inputs", "n_labels", "marginal_concentration", "posterior_concentration", "model_noise")


def load_settings(config_path=None, overrides=None):
    """Build RunSettings with precedence flags > config file > environment > defaults.

    The config file uses dotenv syntax with one KEY=value line per flag,
    keys spelled like the flags (``TAU_GRID=auto``, ``LAMBDA=2``).
    """
    from dotenv import dotenv_values

    from rejectlab.errors import InvalidInputError
    from rejectlab.models.settings import RunSettings

    merged = {}
    if config_path is not None:
        if not os.path.isfile(config_path):
            raise InvalidInputError(f"config file not found: {config_path}")
        for key, value in dotenv_values(config_path).items():
            if value is not None:
                key = key.strip().lower().replace("-", "_")
                merged["lambda_" if key == "lambda" else key] = value
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value

    task = {key: merged.pop(key) for key in _TASK_KEYS if key in merged}
    task["seed"] = merged.get("seed", DEFAULT_SEED)
    merged["task"] = task
    return RunSettings.model_validate(merged)
