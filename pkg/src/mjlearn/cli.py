"""Command line: learn, generate, evaluate, render, inspect.

Exit status is 0 on success, 1 on usage errors and 2 when a command fails
at run time (bad files, unlearnable samples and so on).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .chunks import ChunkPlan, generate_chunks, learn_chunks, plan_chunks
from .fitness import FitnessConfig, Scorer
from .grid import infer_alphabet
from .interpreter import RULE, SEQUENCE, ExecutionBudget, Node, execute_grammar
from .pipeline import LearnParams, learn_grammar, prepare
from .relations import classify_neutral
from .serialize import (BUNDLE_FORMAT, bundle_document, dumps, grammar_document, load,
                        parse_bundle, parse_grammar)
from .tilemap import default_palette, format_tilemap, load_palette, read_rows, render_png
from .validation import check_seed, check_windows

logger = logging.getLogger("mjlearn")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _windows(text) -> tuple[int, ...]:
    if isinstance(text, str):
        try:
            text = [int(t) for t in text.split(",") if t.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    return tuple(int(n) for n in text)


# Built-in defaults per verb; argparse defaults are None so that a config
# file can fill whatever the command line leaves out.
_FITNESS_DEFAULTS = {"windows": (2, 3, 4), "w": 0.9, "epsilon": 1e-6}
DEFAULTS = {
    "learn": {
        "window": 2, "top_k": 1, "max_distance": None, "wildcard_rate": 0.05, "max_rules": 5000,
        "init": None, "floor_rows": 1, "neutral": None, "population_size": 32, "n_pairs": 16,
        "max_generations": 200, "target_fitness": -0.05, "elitism_threshold": 0.8, "n_evals": 1,
        "max_steps": 10_000, "seed": None, "chunk_width": None, "jobs": None,
        "dump_relations": None, "output": None, **_FITNESS_DEFAULTS,
    },
    "generate": {"height": None, "width": None, "seed": None, "max_steps": 10_000,
                 "output": None, "bundle": None},
    "evaluate": {"chunk_width": None, "output": None, **_FITNESS_DEFAULTS},
    "render": {"palette": None, "cell_px": 8, "output": None},
    "inspect": {"output": None},
}
_TYPES = {"windows": _windows}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mjlearn", description="Learn rewrite grammars from one example tile map.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = parser.add_subparsers(dest="verb", metavar="VERB", parser_class=_Parser)
    sub.required = True

    def common(p):
        p.add_argument("--config", help="JSON file whose keys mirror the long flags (flags win)")
        p.add_argument("-o", "--output", help="output path (default: stdout)")

    def fitness_flags(p):
        p.add_argument("--windows", type=_windows, help="comma-separated pattern sizes (default 2,3,4)")
        p.add_argument("--w", "--novelty-weight", dest="w", type=float,
                       help="weight of KL(sample||output) (default 0.9)")
        p.add_argument("--epsilon", type=float, help="count smoothing (default 1e-6)")

    p = sub.add_parser("learn", help="evolve a grammar (or a chunk bundle) from a sample")
    p.add_argument("sample", help="text tile map")
    common(p)
    p.add_argument("--seed", type=int, help="master seed; drawn and printed when omitted")
    p.add_argument("--window", type=int, help="pattern size for relations and rules (default 2)")
    p.add_argument("--top-k", dest="top_k", type=int, help="nearest neighbours kept per pattern pair")
    p.add_argument("--max-distance", dest="max_distance", type=float, help="relation cutoff (default 2*window)")
    p.add_argument("--wildcard-rate", dest="wildcard_rate", type=float)
    p.add_argument("--max-rules", dest="max_rules", type=int)
    p.add_argument("--init", choices=["blank", "floor", "copy-border"],
                   help="initial environment (default blank, floor when chunking)")
    p.add_argument("--floor-rows", dest="floor_rows", type=int)
    p.add_argument("--neutral", help="neutral symbols (default: most frequent symbol)")
    p.add_argument("--population-size", dest="population_size", type=int)
    p.add_argument("--n-pairs", dest="n_pairs", type=int)
    p.add_argument("--max-generations", dest="max_generations", type=int)
    p.add_argument("--target-fitness", dest="target_fitness", type=float)
    p.add_argument("--elitism-threshold", dest="elitism_threshold", type=float)
    p.add_argument("--n-evals", dest="n_evals", type=int, help="executions averaged per fitness")
    p.add_argument("--max-steps", dest="max_steps", type=int)
    fitness_flags(p)
    p.add_argument("--chunk-width", dest="chunk_width", type=int, help="learn per column chunk; writes a bundle")
    p.add_argument("--jobs", type=int, help="parallel chunk workers (capped by MS_THREADS)")
    p.add_argument("--dump-relations", dest="dump_relations", help="write the relation table as JSON")

    p = sub.add_parser("generate", help="run a grammar or bundle to produce a tile map")
    p.add_argument("grammar", nargs="?", help="grammar (or bundle) JSON")
    common(p)
    p.add_argument("--bundle", help="chunk bundle JSON")
    p.add_argument("--height", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--seed", type=int, help="drawn and printed when omitted")
    p.add_argument("--max-steps", dest="max_steps", type=int)

    p = sub.add_parser("evaluate", help="fitness report of an output against a sample")
    p.add_argument("sample")
    p.add_argument("generated")
    common(p)
    fitness_flags(p)
    p.add_argument("--chunk-width", dest="chunk_width", type=int, help="also report per column chunk")

    p = sub.add_parser("render", help="tile map to PNG")
    p.add_argument("tilemap")
    common(p)
    p.add_argument("--palette", help="JSON symbol -> color map")
    p.add_argument("--cell-px", dest="cell_px", type=int)

    p = sub.add_parser("inspect", help="readable dump of a grammar or bundle")
    p.add_argument("grammar")
    common(p)
    return parser


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options from --config, then from the built-in defaults."""
    defaults = DEFAULTS[args.verb]
    config = {}
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not valid JSON: {exc}") from None
        if not isinstance(config, dict):
            raise UsageError("config must be a JSON object")
        unknown = sorted(set(config) - set(defaults))
        if unknown:
            raise UsageError(f"unknown config keys for {args.verb}: {', '.join(unknown)}")
    for key, default in defaults.items():
        if getattr(args, key, None) is None:
            value = config.get(key, default)
            if key in _TYPES and value is not None:
                try:
                    value = _TYPES[key](value)
                except (argparse.ArgumentTypeError, TypeError, ValueError) as exc:
                    raise UsageError(f"config key {key}: {exc}") from None
            setattr(args, key, value)
    return args


def _emit(text: str, path) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _seed(args) -> int:
    if args.seed is None:
        seed = check_seed(None)
        print(f"seed: {seed}", file=sys.stderr)
        return seed
    return check_seed(args.seed)


def _learn_params(args) -> LearnParams:
    fields = LearnParams.__dataclass_fields__
    return LearnParams(**{k: getattr(args, k) for k in fields if getattr(args, k, None) is not None})


def cmd_learn(args) -> int:
    rows = read_rows(args.sample)
    alphabet = infer_alphabet(rows)
    sample = alphabet.encode(rows)
    alphabet = classify_neutral(alphabet, list(args.neutral) if args.neutral else None, sample)
    seed = _seed(args)
    chunked = args.chunk_width is not None
    if args.init is None:
        args.init = "floor" if chunked else "blank"
    params = _learn_params(args)
    check_windows(params.windows, sample.shape)

    if not chunked:
        result = learn_grammar(sample, alphabet, params, seed)
        doc = grammar_document(result.grammar, alphabet, result.init, shape=list(sample.shape),
                               seed=seed, fitness=result.fitness, history=result.history.to_list())
        if args.dump_relations:
            Path(args.dump_relations).write_text(dumps(result.relations.to_json(alphabet)), encoding="utf-8")
        print(f"best fitness {result.fitness:.6f} after {len(result.history)} generations",
              file=sys.stderr)
    else:
        plan = plan_chunks(sample.shape, args.chunk_width, params.init,
                           min_width=max(params.window, *params.windows))
        pieces = [sample[:, a:b] for a, b in plan.boundaries]
        results = learn_chunks(pieces, alphabet, params, seed, n_jobs=args.jobs, init=params.init)
        entries = [{"grammar": r.grammar, "init": r.init, "columns": list(bounds), "seed": r.seed,
                    "fitness": r.fitness, "history": r.history.to_list()}
                   for r, bounds in zip(results, plan.boundaries)]
        doc = bundle_document(entries, plan.boundaries, plan.height, plan.chunk_width, alphabet,
                              shape=list(sample.shape), seed=seed)
        if args.dump_relations:
            tables = [prepare(piece, alphabet, params, r.seed)[2].to_json(alphabet)
                      for piece, r in zip(pieces, results)]
            Path(args.dump_relations).write_text(dumps({"chunks": tables}), encoding="utf-8")
        for i, r in enumerate(results):
            print(f"chunk {i}: best fitness {r.fitness:.6f} after {len(r.history)} generations",
                  file=sys.stderr)
    _emit(dumps(doc), args.output)
    return 0


def cmd_generate(args) -> int:
    source = args.bundle or args.grammar
    if not source or (args.bundle and args.grammar):
        raise UsageError("generate needs exactly one of GRAMMAR or --bundle")
    doc = load(source)
    if doc.get("format") == BUNDLE_FORMAT:
        if args.height is not None or args.width is not None:
            raise UsageError("bundles fix their own size; drop --height/--width")
        grammars, inits, boundaries, height, chunk_width, alphabet = parse_bundle(doc)
        seed = _seed(args)
        plan = ChunkPlan(chunk_width, tuple(boundaries), height)
        out, _ = generate_chunks(grammars, inits, plan, alphabet, seed, args.max_steps)
    else:
        root, alphabet, init = parse_grammar(doc)
        shape = doc.get("shape") or [None, None]
        height = args.height or shape[0]
        width = args.width or shape[1]
        if not height or not width:
            raise UsageError("grammar has no stored size; pass --height and --width")
        seed = _seed(args)
        out = execute_grammar(init.build(height, width, alphabet), root, ExecutionBudget(args.max_steps, seed))
    _emit(format_tilemap(out, alphabet), args.output)
    return 0


def evaluation_report(sample_rows, output_rows, config: FitnessConfig, chunk_width=None) -> dict:
    alphabet = infer_alphabet(list(sample_rows) + list(output_rows))
    sample, output = alphabet.encode(sample_rows), alphabet.encode(output_rows)
    for grid in (sample, output):
        check_windows(config.windows, grid.shape)
    report = Scorer(sample, config).report(output)
    if chunk_width is not None:
        if sample.shape != output.shape:
            raise ValueError(f"per-chunk scores need equal shapes, got {sample.shape} and {output.shape}")
        plan = plan_chunks(sample.shape, chunk_width, min_width=max(config.windows))
        report["chunks"] = []
        for a, b in plan.boundaries:
            sub = Scorer(sample[:, a:b], config).report(output[:, a:b])
            report["chunks"].append({"columns": [a, b], **sub})
    return report


def cmd_evaluate(args) -> int:
    config = FitnessConfig(tuple(args.windows), args.w, args.epsilon)
    report = evaluation_report(read_rows(args.sample), read_rows(args.generated), config, args.chunk_width)
    _emit(json.dumps(report, indent=2) + "\n", args.output)
    return 0


def cmd_render(args) -> int:
    if not args.output:
        raise UsageError("render needs -o/--output for the PNG")
    rows = read_rows(args.tilemap)
    alphabet = infer_alphabet(rows)
    palette = load_palette(args.palette) if args.palette else default_palette(alphabet)
    render_png(alphabet.encode(rows), alphabet, palette, args.cell_px, args.output)
    return 0


def dump_tree(root: Node, alphabet, indent: int = 0) -> list[str]:
    pad = "  " * indent
    if root.kind == RULE:
        rule = root.rule
        h, w = rule.shape
        lines = [f"{pad}rule {rule.mode} {h}x{w}"]
        for a, b in zip(alphabet.decode(rule.antecedent), alphabet.decode(rule.consequent)):
            lines.append(f"{pad}  {a}  ->  {b}")
        return lines
    head = f"{pad}{root.kind}"
    if root.kind == SEQUENCE:
        head += f" iterations={root.iterations}"
    lines = [head]
    for child in root.children:
        lines.extend(dump_tree(child, alphabet, indent + 1))
    return lines


def cmd_inspect(args) -> int:
    doc = load(args.grammar)
    lines = []
    if doc.get("format") == BUNDLE_FORMAT:
        grammars, inits, boundaries, _, _, alphabet = parse_bundle(doc)
        lines.append(f"alphabet: {''.join(alphabet.symbols)} (neutral: {''.join(alphabet.neutral_chars)})")
        for i, (root, init, (a, b)) in enumerate(zip(grammars, inits, boundaries)):
            lines.append(f"chunk {i} columns {a}..{b} init={init.policy}")
            lines.extend(dump_tree(root, alphabet, 1))
    else:
        root, alphabet, init = parse_grammar(doc)
        lines.append(f"alphabet: {''.join(alphabet.symbols)} (neutral: {''.join(alphabet.neutral_chars)})")
        lines.append(f"init: {init.policy}")
        if "fitness" in doc:
            lines.append(f"fitness: {doc['fitness']:.6f}")
        lines.extend(dump_tree(root, alphabet))
    _emit("\n".join(lines) + "\n", args.output)
    return 0


COMMANDS = {"learn": cmd_learn, "generate": cmd_generate, "evaluate": cmd_evaluate,
            "render": cmd_render, "inspect": cmd_inspect}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = resolve(parser.parse_args(argv))
        logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.verb](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, TypeError, OSError, IndexError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
