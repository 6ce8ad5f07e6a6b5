import logging

# Configure logging
logger = logging.getLogger(__name__)

# Computation parameters come from command-line flags only; these are the
# defaults the flags fall back to. Nothing is read from the environment.

# Series Configuration
DEFAULT_NMAX = 20
DEFAULT_KMAX = 12

# Verification Configuration
DEFAULT_BUDGET_MS = 60000
MAX_WORKERS = 4
ORS_MAX_V = 6
ORS_NMAX = 20
DURFEE_KMAX = 12
DURFEE_NMAX = 24
PLANE_V = 10
PLANE_NMAX = 20
WDP_MAX_V = 4
WDP_NMAX = 12
VERTICAL_XYV_MAX_V = 4
VERTICAL_X2YV_MAX_V = 3
VERTICAL_NMAX = 14
OVERLAP_NMAX = 20

# Logging Configuration
LOG_LEVEL = "INFO"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


# Function to get configuration as a dictionary
def get_config():
    return {
        "series": {
            "nmax": DEFAULT_NMAX,
            "kmax": DEFAULT_KMAX,
        },
        "verification": {
            "budget_ms": DEFAULT_BUDGET_MS,
            "max_workers": MAX_WORKERS,
            "ors": {"max_v": ORS_MAX_V, "nmax": ORS_NMAX},
            "durfee": {"kmax": DURFEE_KMAX, "nmax": DURFEE_NMAX},
            "plane": {"v": PLANE_V, "nmax": PLANE_NMAX},
            "wdp": {"max_v": WDP_MAX_V, "nmax": WDP_NMAX},
            "vertical": {
                "xyv_max_v": VERTICAL_XYV_MAX_V,
                "x2yv_max_v": VERTICAL_X2YV_MAX_V,
                "nmax": VERTICAL_NMAX,
            },
            "overlaps": {"nmax": OVERLAP_NMAX},
        },
        "logging": {
            "level": LOG_LEVEL,
        },
    }
