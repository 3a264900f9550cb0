import os
from dotenv import load_dotenv

load_dotenv()

# Output Settings: values come from environment variables, with local defaults.
# Set these in a .env file (gitignored) or in the shell.
OUTPUT_DIR = os.getenv("WFPP_OUTPUT_DIR", "output")
PRESETS_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data/presets")

# Simulation Settings
VERTEX_CAP = int(os.getenv("WFPP_VERTEX_CAP", str(50_000_000)))
DEFAULT_THREADS = int(os.getenv("WFPP_THREADS", "1"))
BOOTSTRAP_RESAMPLES = int(os.getenv("WFPP_BOOTSTRAP_RESAMPLES", "200"))

# Logging
LOG_LEVEL = os.getenv("WFPP_LOG_LEVEL", "INFO").upper()

# HTTP Settings
PORT = int(os.getenv("PORT", "10000"))
ENVIRONMENT = os.getenv("ENVIRONMENT", "development").lower()
DEBUG = os.getenv("DEBUG", "false").lower() in {"1", "true", "yes"}

if DEFAULT_THREADS < 1:
    print("⚠️  WFPP_THREADS must be >= 1, falling back to a single worker.")
    DEFAULT_THREADS = 1
