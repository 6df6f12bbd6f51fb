"""Symbol grids, alphabets and window scanning.

Grids are plain 2-D ``numpy`` integer arrays of interned symbol ids,
row-major with a top-left origin. Pattern and rule grids may additionally
hold :data:`WILDCARD`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

WILDCARD = -1
WILDCARD_CHAR = "*"
DTYPE = np.int16


@dataclass(frozen=True)
class Alphabet:
    """Ordered symbol characters; a symbol's id is its index."""

    symbols: tuple[str, ...]
    neutral: frozenset[int] = frozenset()

    def __post_init__(self):
        if not self.symbols:
            raise ValueError("empty sample")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("duplicate symbols in alphabet")
        for s in self.symbols:
            if len(s) != 1 or s == WILDCARD_CHAR or not s.isprintable():
                raise ValueError(f"invalid symbol {s!r}")
        if any(i < 0 or i >= len(self.symbols) for i in self.neutral):
            raise ValueError("neutral id outside alphabet")

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, char) -> bool:
        return char in self.symbols

    def id_of(self, char: str) -> int:
        if char == WILDCARD_CHAR:
            return WILDCARD
        try:
            return self.symbols.index(char)
        except ValueError:
            raise ValueError(f"symbol {char!r} is not in the alphabet") from None

    def char_of(self, sid: int) -> str:
        return WILDCARD_CHAR if sid == WILDCARD else self.symbols[sid]

    def with_neutral(self, ids: Iterable[int]) -> "Alphabet":
        return Alphabet(self.symbols, frozenset(int(i) for i in ids))

    @property
    def neutral_chars(self) -> list[str]:
        return [self.symbols[i] for i in sorted(self.neutral)]

    def encode(self, rows: Sequence[str], allow_wildcard: bool = False) -> np.ndarray:
        """Convert text rows to an id array."""
        grid = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=DTYPE)
        lookup = {c: i for i, c in enumerate(self.symbols)}
        if allow_wildcard:
            lookup[WILDCARD_CHAR] = WILDCARD
        for r, row in enumerate(rows):
            if len(row) != grid.shape[1]:
                raise ValueError(f"row {r} has length {len(row)}, expected {grid.shape[1]}")
            for c, ch in enumerate(row):
                if ch not in lookup:
                    raise ValueError(f"symbol {ch!r} is not in the alphabet")
                grid[r, c] = lookup[ch]
        return grid

    def decode(self, grid: np.ndarray) -> list[str]:
        return ["".join(self.char_of(int(v)) for v in row) for row in grid]


def _as_rows(sample) -> list[str]:
    if isinstance(sample, str):
        rows = sample.splitlines()
    elif isinstance(sample, np.ndarray):
        if sample.ndim != 2:
            raise ValueError("sample must be 2-D")
        rows = ["".join(str(c) for c in row) for row in sample]
    else:
        rows = ["".join(row) if not isinstance(row, str) else row for row in sample]
    while rows and rows[-1] == "":
        rows.pop()
    return rows


def infer_alphabet(sample) -> Alphabet:
    """Alphabet of the distinct characters in ``sample``, sorted.

    ``sample`` may be a newline-joined string, a sequence of row strings or
    a 2-D array of single characters. The neutral set starts empty.
    """
    rows = _as_rows(sample)
    if not rows or not any(rows):
        raise ValueError("empty sample")
    chars = sorted(set("".join(rows)))
    if WILDCARD_CHAR in chars:
        raise ValueError(f"{WILDCARD_CHAR!r} is reserved for the wildcard")
    return Alphabet(tuple(chars))


def symbol_counts(grid: np.ndarray, alphabet: Alphabet) -> np.ndarray:
    return np.bincount(grid.ravel(), minlength=len(alphabet))


@dataclass(frozen=True, eq=False)
class Pattern:
    """A fixed-shape sub-grid. Identity is shape and cells only."""

    cells: tuple[tuple[int, ...], ...]
    occurrences: tuple[tuple[int, int], ...] = field(default=(), compare=False)

    @classmethod
    def from_array(cls, arr: np.ndarray, occurrences=()) -> "Pattern":
        return cls(tuple(tuple(int(v) for v in row) for row in arr), tuple(occurrences))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.cells), len(self.cells[0])

    def array(self) -> np.ndarray:
        return np.array(self.cells, dtype=DTYPE)

    def __eq__(self, other):
        return isinstance(other, Pattern) and self.cells == other.cells

    def __hash__(self):
        return hash(self.cells)


def check_window(grid: np.ndarray, n: int) -> None:
    if n < 1:
        raise ValueError("window must be >= 1")
    if n > min(grid.shape):
        raise ValueError(f"window exceeds grid ({n} > {min(grid.shape)})")


def windows(grid: np.ndarray, n: int) -> np.ndarray:
    """All n×n windows as an array of shape (H-n+1, W-n+1, n, n)."""
    check_window(grid, n)
    return np.lib.stride_tricks.sliding_window_view(grid, (n, n))


def scan_patterns(grid: np.ndarray, n: int) -> list[Pattern]:
    """Distinct n×n sub-grids with their occurrence lists.

    Patterns are ordered by their first occurrence (row-major); occurrences
    are row-major too. Windows never wrap.
    """
    view = windows(grid, n)
    found: dict[bytes, list] = {}
    for r in range(view.shape[0]):
        for c in range(view.shape[1]):
            win = view[r, c]
            key = win.tobytes()
            if key in found:
                found[key][1].append((r, c))
            else:
                found[key] = [win, [(r, c)]]
    return [Pattern.from_array(win, occ) for win, occ in found.values()]


def _check_fits(grid: np.ndarray, shape, pos) -> None:
    r, c = pos
    h, w = shape
    if r < 0 or c < 0 or r + h > grid.shape[0] or c + w > grid.shape[1]:
        raise IndexError(f"pattern of shape {shape} does not fit at {pos}")


def match_at(grid: np.ndarray, pattern, pos) -> bool:
    """True iff every non-wildcard cell of ``pattern`` equals the grid at ``pos``."""
    arr = pattern.array() if isinstance(pattern, Pattern) else np.asarray(pattern)
    _check_fits(grid, arr.shape, pos)
    r, c = pos
    sub = grid[r:r + arr.shape[0], c:c + arr.shape[1]]
    mask = arr != WILDCARD
    return bool(np.all(sub[mask] == arr[mask]))


def match_mask(grid: np.ndarray, arr: np.ndarray) -> np.ndarray:
    """Boolean map of positions where ``arr`` matches; shape (H-h+1, W-w+1)."""
    h, w = arr.shape
    H, W = grid.shape
    if h > H or w > W:
        return np.zeros((0, 0), dtype=bool)
    mask = np.ones((H - h + 1, W - w + 1), dtype=bool)
    for (dr, dc), v in np.ndenumerate(arr):
        if v != WILDCARD:
            mask &= grid[dr:dr + H - h + 1, dc:dc + W - w + 1] == v
    return mask


def find_occurrences(grid: np.ndarray, pattern) -> list[tuple[int, int]]:
    arr = pattern.array() if isinstance(pattern, Pattern) else np.asarray(pattern)
    return [(int(r), int(c)) for r, c in np.argwhere(match_mask(grid, arr))]
