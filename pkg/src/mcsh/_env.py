"""Process-level knobs.

MCSH_THREADS caps worker parallelism (FFT workers and probe sweeps).
Results are bit-identical regardless of the setting: parallel work is
partitioned deterministically and each partition owns its seed.
"""

from __future__ import annotations

import os


def worker_count() -> int:
    """Number of workers to use, from MCSH_THREADS (default 1)."""
    raw = os.environ.get("MCSH_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)
