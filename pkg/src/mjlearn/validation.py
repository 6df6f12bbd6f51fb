"""Input checks shared by the estimator and the command line."""

from __future__ import annotations

import numbers
from pathlib import Path

import numpy as np

from .grid import WILDCARD_CHAR, Alphabet


def check_rows(X) -> list[str]:
    """Normalise a sample to a list of equal-length row strings.

    Accepts a newline-joined string, a sequence of strings or a 2-D array of
    single characters. Paths are not read here; use the tilemap loader.
    """
    if isinstance(X, Path):
        raise TypeError("got a path; load it with mjlearn.tilemap.load_tilemap first")
    if isinstance(X, str):
        rows = X.splitlines()
    elif isinstance(X, np.ndarray):
        if X.ndim != 2:
            raise ValueError(f"expected a 2-D array, got {X.ndim}-D")
        rows = ["".join(str(c) for c in row) for row in X]
    else:
        try:
            rows = [r if isinstance(r, str) else "".join(r) for r in X]
        except TypeError:
            raise TypeError(f"cannot read a tile grid from {type(X).__name__}") from None
    while rows and rows[-1] == "":
        rows.pop()
    if not rows or not rows[0]:
        raise ValueError("empty sample")
    width = len(rows[0])
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ValueError(f"row {i} has {len(row)} cells, expected {width}")
        if WILDCARD_CHAR in row:
            raise ValueError(f"row {i} contains the reserved wildcard {WILDCARD_CHAR!r}")
    return rows


def check_grid(X, alphabet: Alphabet) -> np.ndarray:
    """Encode ``X`` with a fixed alphabet; unknown symbols are an error."""
    rows = check_rows(X)
    foreign = sorted(set("".join(rows)) - set(alphabet.symbols))
    if foreign:
        raise ValueError(f"symbols {''.join(foreign)!r} are not in the alphabet {''.join(alphabet.symbols)!r}")
    return alphabet.encode(rows)


def check_windows(windows, shape: tuple[int, int] | None = None) -> tuple[int, ...]:
    if isinstance(windows, numbers.Integral):
        windows = (windows,)
    out = tuple(int(n) for n in windows)
    if not out:
        raise ValueError("need at least one window size")
    if any(n < 1 for n in out):
        raise ValueError(f"window sizes must be >= 1, got {out}")
    if shape is not None and max(out) > min(shape):
        raise ValueError(f"window {max(out)} exceeds grid {shape[0]}x{shape[1]}")
    return out


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_seed(seed) -> int:
    """Return a non-negative int seed; ``None`` draws a fresh one."""
    if seed is None:
        return int(np.random.SeedSequence().entropy % (2**63))
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise TypeError("seed must be an integer or None")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return int(seed)


def check_probability(value, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")
    return value
