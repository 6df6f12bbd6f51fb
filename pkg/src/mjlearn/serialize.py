"""JSON documents for grammars and chunk bundles.

Rule grids are stored as lists of strings with ``*`` for the wildcard. A
grammar document also carries the alphabet, neutral symbols and the
initial-environment recipe, so it can be executed without the sample.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .grid import Alphabet
from .interpreter import MARKOV, RULE, SEQUENCE, Node, Rule
from .rules import InitSpec

GRAMMAR_FORMAT = "mjlearn-grammar/1"
BUNDLE_FORMAT = "mjlearn-bundle/1"
ONE_POLICY = "uniform"


def node_to_dict(node: Node, alphabet: Alphabet) -> dict:
    if node.kind == RULE:
        return {
            "kind": RULE,
            "mode": node.rule.mode,
            "in": alphabet.decode(node.rule.antecedent),
            "out": alphabet.decode(node.rule.consequent),
        }
    out = {"kind": node.kind}
    if node.kind == SEQUENCE:
        out["iterations"] = node.iterations
    out["children"] = [node_to_dict(c, alphabet) for c in node.children]
    return out


def node_from_dict(data: dict, alphabet: Alphabet) -> Node:
    kind = data["kind"]
    if kind == RULE:
        rule = Rule(alphabet.encode(data["in"], allow_wildcard=True),
                    alphabet.encode(data["out"], allow_wildcard=True), data.get("mode", "one"))
        return Node.leaf(rule)
    if kind not in (SEQUENCE, MARKOV):
        raise ValueError(f"unknown node kind {kind!r}")
    children = [node_from_dict(c, alphabet) for c in data.get("children", [])]
    return Node(kind, children, int(data.get("iterations", 1)))


def alphabet_to_dict(alphabet: Alphabet) -> dict:
    return {"symbols": "".join(alphabet.symbols), "neutral": "".join(alphabet.neutral_chars)}


def alphabet_from_dict(data: dict) -> Alphabet:
    alphabet = Alphabet(tuple(data["symbols"]))
    return alphabet.with_neutral(alphabet.id_of(c) for c in data.get("neutral", ""))


def init_to_dict(init: InitSpec, alphabet: Alphabet) -> dict:
    return {"policy": init.policy,
            "template": alphabet.decode(np.array(init.template, dtype=np.int16).reshape(len(init.template), -1))
            if init.template else []}


def init_from_dict(data: dict, alphabet: Alphabet) -> InitSpec:
    tpl = data.get("template") or []
    rows = tuple(tuple(int(v) for v in row) for row in alphabet.encode(tpl)) if tpl else ()
    return InitSpec(data.get("policy", "blank"), rows)


def grammar_document(root: Node, alphabet: Alphabet, init: InitSpec | None = None, **meta) -> dict:
    doc = {
        "format": GRAMMAR_FORMAT,
        "one_policy": ONE_POLICY,
        "alphabet": alphabet_to_dict(alphabet),
        "init": init_to_dict(init or InitSpec(), alphabet),
        "grammar": node_to_dict(root, alphabet),
    }
    doc.update(meta)
    return doc


def parse_grammar(doc: dict) -> tuple[Node, Alphabet, InitSpec]:
    if doc.get("format") != GRAMMAR_FORMAT:
        raise ValueError(f"not a grammar document (format {doc.get('format')!r})")
    if doc.get("one_policy", ONE_POLICY) != ONE_POLICY:
        raise ValueError(f"unsupported one-mode policy {doc['one_policy']!r}")
    alphabet = alphabet_from_dict(doc["alphabet"])
    return node_from_dict(doc["grammar"], alphabet), alphabet, init_from_dict(doc["init"], alphabet)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def save(doc: dict, path) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def load(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def bundle_document(chunks: list[dict], boundaries, height: int, chunk_width: int,
                    alphabet: Alphabet, **meta) -> dict:
    """Per-chunk grammars plus the column plan; each entry in ``chunks`` needs
    ``grammar`` (a Node) and ``init`` (an InitSpec) and may carry extra keys."""
    entries = []
    for c in chunks:
        entry = {"init": init_to_dict(c["init"], alphabet), "grammar": node_to_dict(c["grammar"], alphabet)}
        entry.update({k: v for k, v in c.items() if k not in ("init", "grammar")})
        entries.append(entry)
    doc = {
        "format": BUNDLE_FORMAT,
        "one_policy": ONE_POLICY,
        "alphabet": alphabet_to_dict(alphabet),
        "plan": {"chunk_width": chunk_width, "height": height,
                 "boundaries": [list(b) for b in boundaries]},
        "chunks": entries,
    }
    doc.update(meta)
    return doc


def parse_bundle(doc: dict):
    """Returns (grammars, inits, boundaries, height, chunk_width, alphabet)."""
    if doc.get("format") != BUNDLE_FORMAT:
        raise ValueError(f"not a bundle document (format {doc.get('format')!r})")
    alphabet = alphabet_from_dict(doc["alphabet"])
    plan = doc["plan"]
    grammars = [node_from_dict(c["grammar"], alphabet) for c in doc["chunks"]]
    inits = [init_from_dict(c["init"], alphabet) for c in doc["chunks"]]
    boundaries = [tuple(b) for b in plan["boundaries"]]
    if len(boundaries) != len(grammars):
        raise ValueError("bundle plan and chunk list disagree in length")
    return grammars, inits, boundaries, int(plan["height"]), int(plan["chunk_width"]), alphabet
