"""Text tile maps, palettes and PNG rendering."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .grid import WILDCARD_CHAR, Alphabet, infer_alphabet

# Cycled when no palette is given; any fixed, distinguishable set works.
DEFAULT_COLORS = [
    (235, 235, 235), (34, 139, 34), (220, 20, 60), (255, 215, 0), (30, 144, 255),
    (139, 69, 19), (128, 0, 128), (255, 140, 0), (0, 128, 128), (105, 105, 105),
    (0, 0, 0), (255, 192, 203), (154, 205, 50), (70, 130, 180), (210, 180, 140),
]


def read_rows(path) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    rows = text.split("\n")
    if rows and rows[-1] == "":
        rows.pop()
    rows = [r[:-1] if r.endswith("\r") else r for r in rows]
    if not rows or not any(rows):
        raise ValueError(f"{path}: empty tile map")
    width = len(rows[0])
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ValueError(f"{path}: line {i} has {len(row)} cells, expected {width}")
    return rows


def load_tilemap(path, alphabet: Alphabet | None = None) -> tuple[np.ndarray, Alphabet]:
    """Read a rectangular text tile map; infers the alphabet unless one is given."""
    rows = read_rows(path)
    alphabet = alphabet or infer_alphabet(rows)
    return alphabet.encode(rows), alphabet


def format_tilemap(grid: np.ndarray, alphabet: Alphabet) -> str:
    rows = alphabet.decode(grid)
    if any(WILDCARD_CHAR in r for r in rows):
        raise ValueError("tile maps cannot contain wildcards")
    return "\n".join(rows) + "\n"


def save_tilemap(grid: np.ndarray, alphabet: Alphabet, path) -> None:
    Path(path).write_text(format_tilemap(grid, alphabet), encoding="utf-8")


def _parse_color(value) -> tuple[int, int, int]:
    if isinstance(value, str):
        v = value.lstrip("#")
        if len(v) != 6:
            raise ValueError(f"bad color {value!r}")
        return tuple(int(v[i:i + 2], 16) for i in (0, 2, 4))
    r, g, b = value
    return int(r), int(g), int(b)


def load_palette(path) -> dict[str, tuple[int, int, int]]:
    """JSON object mapping symbol characters to ``#rrggbb`` or [r, g, b]."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    palette = {}
    for key, value in data.items():
        if len(key) != 1:
            raise ValueError(f"palette key {key!r} is not a single character")
        palette[key] = _parse_color(value)
    return palette


def default_palette(alphabet: Alphabet) -> dict[str, tuple[int, int, int]]:
    return {s: DEFAULT_COLORS[i % len(DEFAULT_COLORS)] for i, s in enumerate(alphabet.symbols)}


def render(grid: np.ndarray, alphabet: Alphabet, palette: dict, cell_px: int = 8) -> Image.Image:
    if cell_px < 1:
        raise ValueError("cell_px must be >= 1")
    lut = np.zeros((len(alphabet), 3), dtype=np.uint8)
    for i, s in enumerate(alphabet.symbols):
        if s not in palette:
            raise KeyError(f"palette has no color for symbol {s!r}")
        lut[i] = palette[s]
    pixels = lut[grid].repeat(cell_px, axis=0).repeat(cell_px, axis=1)
    return Image.fromarray(pixels)


def render_png(grid: np.ndarray, alphabet: Alphabet, palette: dict, cell_px: int, path) -> None:
    render(grid, alphabet, palette, cell_px).save(path, format="PNG")
