"""Learn wide samples chunk by chunk and stitch the outputs back together."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .evolution import derive_seed
from .grid import Alphabet
from .interpreter import ExecutionBudget, Node, execute_grammar
from .pipeline import LearnParams, LearnResult, learn_grammar
from .rules import InitSpec

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_WIDTH = 16


@dataclass(frozen=True)
class ChunkPlan:
    chunk_width: int
    boundaries: tuple[tuple[int, int], ...]
    height: int
    init: str = "floor"

    @property
    def widths(self) -> list[int]:
        return [b - a for a, b in self.boundaries]


def plan_chunks(shape: tuple[int, int], chunk_width: int, init: str = "floor",
                min_width: int = 1) -> ChunkPlan:
    height, width = shape
    if not 1 <= chunk_width <= width:
        raise ValueError(f"chunk_width must be in [1, {width}]")
    bounds = tuple((a, min(a + chunk_width, width)) for a in range(0, width, chunk_width))
    plan = ChunkPlan(chunk_width, bounds, height, init)
    narrow = [w for w in plan.widths if w < min_width]
    if narrow:
        raise ValueError(f"chunk of width {narrow[0]} is narrower than the largest window "
                         f"({min_width}); pick a chunk width that divides {width} more evenly")
    return plan


def chunk(sample: np.ndarray, chunk_width: int) -> list[np.ndarray]:
    """Full-height slices of ``chunk_width`` columns, left to right; the last may be narrower."""
    plan = plan_chunks(sample.shape, chunk_width)
    return [sample[:, a:b].copy() for a, b in plan.boundaries]


def stitch(outputs: list[np.ndarray]) -> np.ndarray:
    if not outputs:
        raise ValueError("nothing to stitch")
    heights = {o.shape[0] for o in outputs}
    if len(heights) != 1:
        raise ValueError(f"chunk heights differ: {sorted(heights)}")
    return np.hstack(outputs)


def _learn_one(args) -> LearnResult:
    index, grid, alphabet, params, seed = args
    logger.info("chunk %d: learning %dx%d", index, *grid.shape)
    res = learn_grammar(grid, alphabet, params, seed)
    # keep results light for inter-process transfer; only the grammar and history matter
    res.pool = res.relations = None
    res.best.output = None
    return res


def resolve_jobs(requested: int | None = None) -> int:
    """Worker count: ``requested`` (default: CPU count), capped by ``MS_THREADS``."""
    jobs = requested or os.cpu_count() or 1
    cap = os.environ.get("MS_THREADS")
    if cap:
        try:
            jobs = min(jobs, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"MS_THREADS must be an integer, got {cap!r}") from None
    return max(1, jobs)


def learn_chunks(chunks: list[np.ndarray], alphabet: Alphabet, params: LearnParams,
                 master_seed: int, n_jobs: int | None = None, init: str = "floor") -> list[LearnResult]:
    """Independent learning run per chunk; ordered like ``chunks``.

    Chunk ``i`` is seeded from ``(master_seed, i)`` only, so results do not
    depend on other chunks or on ``n_jobs``.
    """
    largest = max([params.window, *params.windows])
    for i, c in enumerate(chunks):
        if min(c.shape) < largest:
            raise ValueError(f"chunk {i} ({c.shape[1]} wide) is smaller than window {largest}")
    params = replace(params, init=init)
    jobs = [(i, c, alphabet, params, derive_seed(master_seed, i)) for i, c in enumerate(chunks)]
    n_jobs = min(resolve_jobs(n_jobs), len(jobs))
    if n_jobs <= 1:
        return [_learn_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(_learn_one, jobs))


def generate_chunks(grammars: list[Node], inits: list[InitSpec], plan: ChunkPlan, alphabet: Alphabet,
                    seed: int, max_steps: int = 10_000) -> tuple[np.ndarray, list[np.ndarray]]:
    """Run each chunk grammar on its own initial environment and stitch."""
    outputs = []
    for i, (root, init, width) in enumerate(zip(grammars, inits, plan.widths)):
        env = init.build(plan.height, width, alphabet)
        outputs.append(execute_grammar(env, root, ExecutionBudget(max_steps, derive_seed(seed, i))))
    return stitch(outputs), outputs


def replace_chunk_grammar(results: list, index: int, replacement) -> list:
    """Copy of ``results`` with entry ``index`` swapped for ``replacement``."""
    if not 0 <= index < len(results):
        raise IndexError(f"chunk index {index} out of range (0..{len(results) - 1})")
    out = list(results)
    out[index] = replacement
    return out
