"""Small shared helpers: exact float formatting, hashing, bounded parallel map."""

from __future__ import annotations

import concurrent.futures
import hashlib
import math
import os
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

WORKERS_ENV_VAR = "PARARANK_WORKERS"


def format_float(x: float) -> str:
    """Shortest decimal string that parses back to exactly the same float64."""
    return repr(float(x))


def parse_float(s: str) -> float:
    return float(s)


def require_finite(x: float, what: str) -> float:
    if not math.isfinite(x):
        raise ValueError(f"{what} must be finite, got {x!r}")
    return x


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV_VAR, "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def parallel_map(fn: Callable[[T], R], items: Iterable[T],
                 workers: int | None = None) -> list[R]:
    """Order-preserving map, optionally threaded.

    Results always come back in input order, so parallel runs are
    indistinguishable from serial ones.
    """
    if workers is None:
        workers = default_workers()
    seq: Sequence[T] = list(items)
    if workers <= 1 or len(seq) <= 1:
        return [fn(x) for x in seq]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seq))
