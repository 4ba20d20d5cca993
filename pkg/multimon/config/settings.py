import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()

# Paths
PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent
PACKAGE_ROOT = Path(__file__).resolve().parent.parent

# Server settings
HOST = os.getenv("HOST", "0.0.0.0")
PORT = int(os.getenv("PORT", "8000"))
DEBUG = os.getenv("DEBUG", "False").lower() == "true"

# Job storage
DATA_DIR = os.getenv("MULTIMON_DATA_DIR", os.path.join(PROJECT_ROOT, "data"))
RESULTS_DIR = os.path.join(DATA_DIR, "results")
DB_PATH = os.getenv("MULTIMON_DB_PATH", os.path.join(DATA_DIR, "jobs.db"))

# Worker pool
WORKER_COUNT = int(os.getenv("WORKER_COUNT", "2"))
POLL_INTERVAL = float(os.getenv("POLL_INTERVAL", "1.0"))
STALE_TIMEOUT = int(os.getenv("STALE_TIMEOUT", "3600"))  # simulations can run long
STALE_CHECK_INTERVAL = int(os.getenv("STALE_CHECK_INTERVAL", "60"))

SUPPORTED_COMMANDS = ["analyze", "sweep", "optimize", "compile", "simulate"]


class SolverSettings(BaseSettings):
    """Numeric defaults; override with MULTIMON_<FIELD> environment variables."""

    model_config = SettingsConfigDict(env_prefix="MULTIMON_", extra="ignore")

    zero_mode_tolerance: float = 1e-6
    degeneracy_tolerance: float = 1e-8
    near_resonance_mhz: float = 1.0
    dispersive_ratio_warn: float = 10.0
    kerr_ratio_warn: float = 0.05
    quarter_flux: float = 0.25
    integrator_step_ns: float = 0.1
    mle_dilution: float = 0.5
    mle_tolerance: float = 1e-10
    mle_max_iterations: int = 5000
    optimizer_budget: int = 2000
    separation_weight: float = 10.0
    stability_margin: float = 1.5
    cavity_linewidth_mhz: float = 1.0


solver_settings = SolverSettings()
