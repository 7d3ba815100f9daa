import os


def max_workers(default: int = 1) -> int:
    """Internal parallelism cap from ``QUEUEWAIT_THREADS`` (minimum 1)."""
    raw = os.environ.get("QUEUEWAIT_THREADS")
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default
