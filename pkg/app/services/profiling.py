import logging
import threading
import time
from collections import defaultdict
from contextlib import contextmanager
from typing import Dict

# Configure logging
logger = logging.getLogger(__name__)

_lock = threading.Lock()
_totals: Dict[str, float] = defaultdict(float)


@contextmanager
def phase(name: str):
    """
    Accumulate the wall-clock time spent inside the block under ``name``.
    """
    start = time.perf_counter()
    try:
        yield
    finally:
        elapsed = time.perf_counter() - start
        with _lock:
            _totals[name] += elapsed


def snapshot() -> Dict[str, int]:
    """
    Per-phase totals in milliseconds, sorted by phase name.
    """
    with _lock:
        return {name: int(round(seconds * 1000)) for name, seconds in sorted(_totals.items())}


def reset():
    with _lock:
        _totals.clear()
