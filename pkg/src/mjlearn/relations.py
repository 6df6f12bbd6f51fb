"""Distance and positioning relations between extracted patterns."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .grid import Alphabet, Pattern

logger = logging.getLogger(__name__)


def distance(q, p) -> float:
    """Euclidean distance between two top-left coordinates."""
    return math.hypot(q[0] - p[0], q[1] - p[1])


def offset(q, p) -> tuple[int, int]:
    return (q[0] - p[0], q[1] - p[1])


class Relation(NamedTuple):
    """One Q-occurrence paired with one of its nearest P-occurrences."""

    source: int  # index of Q
    target: int  # index of P
    q: tuple[int, int]
    p: tuple[int, int]
    distance: float
    offset: tuple[int, int]


@dataclass
class RelationTable:
    patterns: list[Pattern]
    top_k: int
    max_distance: float
    relations: dict[tuple[int, int], list[Relation]] = field(default_factory=dict)

    def __len__(self):
        return sum(len(v) for v in self.relations.values())

    def __iter__(self):
        for key in sorted(self.relations):
            yield from self.relations[key]

    def index(self, pattern: Pattern) -> int:
        return self.patterns.index(pattern)

    def offsets(self) -> dict[tuple[int, tuple[int, int]], dict[int, float]]:
        """Map (Q, offset) to the P patterns seen there and their distance."""
        out: dict = {}
        for rel in self:
            out.setdefault((rel.source, rel.offset), {})[rel.target] = rel.distance
        return out

    def merge(self, other: "RelationTable") -> "RelationTable":
        """Union of two tables, usually from different grids; patterns are unified by cells."""
        patterns = list(self.patterns)
        lookup = {p: i for i, p in enumerate(patterns)}
        remap = {}
        for j, p in enumerate(other.patterns):
            if p not in lookup:
                lookup[p] = len(patterns)
                patterns.append(p)
            remap[j] = lookup[p]
        merged = {k: list(v) for k, v in self.relations.items()}
        for rels in other.relations.values():
            for rel in rels:
                rel = rel._replace(source=remap[rel.source], target=remap[rel.target])
                merged.setdefault((rel.source, rel.target), []).append(rel)
        return RelationTable(patterns, max(self.top_k, other.top_k),
                             max(self.max_distance, other.max_distance), merged)

    def to_json(self, alphabet: Alphabet) -> dict:
        return {
            "top_k": self.top_k,
            "max_distance": self.max_distance,
            "patterns": [alphabet.decode(p.array()) for p in self.patterns],
            "relations": [
                {"from": r.source, "to": r.target, "q": list(r.q), "p": list(r.p),
                 "distance": r.distance, "offset": list(r.offset)}
                for r in self
            ],
        }


def build_relation_table(patterns: Sequence[Pattern], top_k: int = 1,
                         max_distance: float = 4.0) -> RelationTable:
    """Relate every Q-occurrence to its ``top_k`` nearest P-occurrences.

    Runs over all ordered pattern pairs including Q == P, where the identical
    coordinate is skipped. Ties in distance go to the row-major earlier
    P-occurrence. Relations farther than ``max_distance`` are dropped.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    if max_distance <= 0:
        raise ValueError("max_distance must be > 0")
    patterns = list(patterns)
    table = RelationTable(patterns, top_k, max_distance)
    coords = []
    for i, pat in enumerate(patterns):
        if not pat.occurrences:
            logger.warning("pattern %d has no occurrences; skipped", i)
            coords.append(None)
            continue
        # row-major so a stable sort on distance keeps the tie order
        coords.append(np.array(sorted(pat.occurrences), dtype=np.int64))

    for qi, qc in enumerate(coords):
        if qc is None:
            continue
        for pi, pc in enumerate(coords):
            if pc is None:
                continue
            rels = []
            for q in qc:
                d2 = (pc[:, 0] - q[0]) ** 2 + (pc[:, 1] - q[1]) ** 2
                order = np.argsort(d2, kind="stable")
                taken = 0
                for j in order:
                    if taken == top_k:
                        break
                    if qi == pi and d2[j] == 0:
                        continue
                    taken += 1
                    qq = (int(q[0]), int(q[1]))
                    pp = (int(pc[j, 0]), int(pc[j, 1]))
                    dist = distance(qq, pp)
                    if dist <= max_distance:
                        rels.append(Relation(qi, pi, qq, pp, dist, offset(qq, pp)))
            if rels:
                table.relations[(qi, pi)] = rels
    return table


def classify_neutral(alphabet: Alphabet, neutral: Sequence[str] | None = None,
                     sample: np.ndarray | None = None) -> Alphabet:
    """Flag neutral symbols from a user list, or the most frequent sample symbol."""
    if neutral:
        ids = []
        for ch in neutral:
            if ch not in alphabet:
                raise ValueError(f"neutral symbol {ch!r} is not in the alphabet")
            ids.append(alphabet.id_of(ch))
        return alphabet.with_neutral(ids)
    if sample is None:
        raise ValueError("a sample is needed to infer the neutral symbol")
    counts = np.bincount(sample.ravel(), minlength=len(alphabet))
    return alphabet.with_neutral([int(np.argmax(counts))])
