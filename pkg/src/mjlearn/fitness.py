"""Pattern distributions, smoothed KL divergence and the coherence fitness."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .grid import windows

DEFAULT_WINDOWS = (2, 3, 4)
DEFAULT_W = 0.9
DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class PatternDistribution:
    """Window counts keyed by the window's raw bytes.

    ``counts`` may also hold plain probabilities; only ratios matter before
    smoothing.
    """

    window: int
    counts: Mapping[bytes, float]

    @property
    def total(self) -> float:
        return float(sum(self.counts.values()))

    @property
    def probs(self) -> dict[bytes, float]:
        total = self.total
        return {k: v / total for k, v in self.counts.items()}

    def smoothed(self, support: Sequence, epsilon: float) -> np.ndarray:
        """Probabilities over ``support`` with ``epsilon`` added to every count."""
        c = np.array([self.counts.get(k, 0.0) for k in support], dtype=float) + epsilon
        return c / c.sum()


def pattern_distribution(grid: np.ndarray, n: int) -> PatternDistribution:
    view = windows(grid, n)
    flat = np.ascontiguousarray(view.reshape(-1, n * n))
    keys = flat.view(np.dtype((np.void, flat.dtype.itemsize * n * n))).ravel()
    uniq, counts = np.unique(keys, return_counts=True)
    return PatternDistribution(n, {u.tobytes(): int(c) for u, c in zip(uniq, counts)})


def kl_divergence(p: PatternDistribution, q: PatternDistribution,
                  epsilon: float = DEFAULT_EPSILON) -> float:
    """D_KL(p || q) in nats over the union support, with additive smoothing."""
    if p.window != q.window:
        raise ValueError(f"window mismatch: {p.window} vs {q.window}")
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    support = sorted(set(p.counts) | set(q.counts))
    ps = p.smoothed(support, epsilon)
    qs = q.smoothed(support, epsilon)
    return max(0.0, float(np.sum(ps * np.log(ps / qs))))


@dataclass(frozen=True)
class FitnessConfig:
    windows: tuple[int, ...] = DEFAULT_WINDOWS
    w: float = DEFAULT_W
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        object.__setattr__(self, "windows", tuple(int(n) for n in self.windows))
        if not self.windows:
            raise ValueError("at least one fitness window is required")
        if not 0 <= self.w <= 1:
            raise ValueError("w must be in [0, 1]")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")


class Scorer:
    """Fitness against a fixed sample, caching the sample's distributions."""

    def __init__(self, sample: np.ndarray, config: FitnessConfig | None = None):
        self.config = config or FitnessConfig()
        self.sample = sample
        self._dists = {n: pattern_distribution(sample, n) for n in self.config.windows}

    def report(self, output: np.ndarray) -> dict:
        cfg = self.config
        per_window = []
        for n in cfg.windows:
            p = self._dists[n]
            q = pattern_distribution(output, n)
            forward = kl_divergence(p, q, cfg.epsilon)
            backward = kl_divergence(q, p, cfg.epsilon)
            per_window.append({
                "window": n,
                "kl_sample_output": forward,
                "kl_output_sample": backward,
                "fitness": 0.0 - (cfg.w * forward + (1 - cfg.w) * backward),
            })
        return {
            "windows": per_window,
            "w": cfg.w,
            "epsilon": cfg.epsilon,
            "fitness": float(np.mean([r["fitness"] for r in per_window])),
        }

    def __call__(self, output: np.ndarray) -> float:
        return self.report(output)["fitness"]


def fitness(sample: np.ndarray, output: np.ndarray, config: FitnessConfig | None = None) -> float:
    """Mean over windows of -(w*KL(sample||output) + (1-w)*KL(output||sample))."""
    return Scorer(sample, config)(output)
