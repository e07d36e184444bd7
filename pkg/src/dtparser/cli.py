"""Command-line interface.

Commands::

    dtparser classes  TREEBANK -o CLASSES      build vocabulary class trees
    dtparser train    TREEBANK -o MODEL        train tag/label/extension models
    dtparser parse    MODEL [INPUT]            parse one sentence per line
    dtparser eval     GOLD TEST                bracket-scoring report (CSV)
    dtparser report   GOLD TEST                eval plus a per-length profile

Shared flags: ``--format`` (treebank format), ``--seed``, ``--config``
(key=value file; command-line flags win).  Exit codes: 0 success, 1 usage,
2 data error (bad input files, malformed trees, model mismatches), 3
internal error.
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import corpus, models, parseval, search
from .config import Config, load_config
from .corpus import read_treebank, split_corpus
from .errors import AlignmentMismatch, DTParserError, EmptyCorpus
from .headfinder import default_head_rules, load_head_rules
from .modelfile import (load_classes, load_model_set, save_classes,
                        save_model_set)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _build_parser():
    parser = _ArgumentParser(prog="dtparser",
                             description="decision-tree treebank parser")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def common(p):
        p.add_argument("--format", choices=corpus.FORMATS, default=None,
                       help="treebank format (default underscore)")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for the corpus split")
        p.add_argument("--config", metavar="PATH", default=None,
                       help="key=value settings file")

    p = sub.add_parser("classes", help="build class trees from a treebank")
    common(p)
    p.add_argument("treebank")
    p.add_argument("-o", "--out", required=True, help="classes file to write")
    p.add_argument("--export-text", metavar="DIR", default=None,
                   help="also write symbol/bitstring text tables here")
    p.add_argument("--unk-threshold", type=int, default=None)

    p = sub.add_parser("train", help="train models from a treebank")
    common(p)
    p.add_argument("treebank")
    p.add_argument("-o", "--out", required=True, help="model file to write")
    p.add_argument("--classes", metavar="PATH", default=None,
                   help="classes file from a `classes` run (rebuilt if absent)")
    p.add_argument("--head-rules", metavar="PATH", default=None,
                   help="head rule table (default: rightmost child heads)")
    p.add_argument("--grow-fraction", type=float, default=None,
                   help="fraction of trees used for growing (rest smooths)")
    p.add_argument("--unk-threshold", type=int, default=None)
    p.add_argument("--u-max", type=int, default=None,
                   help="unary chain cap (default: longest observed)")

    p = sub.add_parser("parse", help="parse sentences, one per line")
    common(p)
    p.add_argument("model")
    p.add_argument("input", nargs="?", default=None,
                   help="sentence file (default stdin)")
    p.add_argument("-o", "--out", default=None, help="output file (default stdout)")
    p.add_argument("--max-length", type=int, default=None,
                   help="skip sentences longer than this (default 40)")
    p.add_argument("--beam-width", type=int, default=None)
    p.add_argument("--switch-threshold", type=float, default=None)
    p.add_argument("--max-hypotheses", type=int, default=None)
    p.add_argument("--workers", type=int, default=None,
                   help="parse sentences in parallel (output keeps input order)")

    for name, extra in (("eval", "bracket-score a test treebank against gold"),
                        ("report", "eval plus a per-sentence-length profile")):
        p = sub.add_parser(name, help=extra)
        common(p)
        p.add_argument("gold")
        p.add_argument("test")
        p.add_argument("-o", "--out", default=None,
                       help="aggregate CSV file (default stdout)")
        p.add_argument("--sentences", metavar="PATH", default=None,
                       help="also write a per-sentence TSV here")
        p.add_argument("--ranges", default=None,
                       help="length ranges, e.g. 4:40,4:25,10:20")
        p.add_argument("--no-root", action="store_true",
                       help="exclude the root constituent from scoring")
        p.add_argument("--unique", action="store_true",
                       help="count duplicated constituents once")
    return parser


def _load_settings(args):
    """Defaults, overlaid by --config, overlaid by explicit flags."""
    config = Config()
    if args.config:
        config = load_config(args.config, base=config)
    overrides = {}
    for key in ("format", "seed", "unk_threshold", "grow_fraction", "u_max",
                "max_length", "beam_width", "switch_threshold",
                "max_hypotheses", "workers"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "no_root", False):
        overrides["include_root"] = False
    if getattr(args, "unique", False):
        overrides["multiset"] = False
    return config.replace(**overrides)


# --- classes ---

def cmd_classes(args, out):
    config = _load_settings(args)
    trees = read_treebank(args.treebank, config.format)
    if not trees:
        raise EmptyCorpus(f"{args.treebank}: no trees")
    vocab = corpus.build_vocabularies(trees, config.unk_threshold)
    class_trees = models.build_class_trees(trees, vocab, config)
    save_classes(vocab, class_trees, args.out)
    if args.export_text:
        os.makedirs(args.export_text, exist_ok=True)
        for kind, tree in class_trees.items():
            with open(os.path.join(args.export_text, f"{kind}.classes"),
                      "w", encoding="utf-8") as fh:
                fh.write(tree.export_text())
    print(f"trees: {len(trees)}", file=out)
    print(f"vocabulary: {len(vocab.words) - 1} of {len(vocab.word_counts)} "
          f"distinct words kept (plus the unknown-word symbol), "
          f"{len(vocab.tags)} tags, {len(vocab.labels)} labels", file=out)
    for kind in ("word", "tag", "label", "extension"):
        tree = class_trees[kind]
        note = " (truncated)" if tree.truncated else ""
        print(f"{kind} classes: {len(tree.codes)} symbols, depth {tree.depth} "
              f"of {tree.budget} bits{note}", file=out)
    return EXIT_OK


# --- train ---

def cmd_train(args, out):
    config = _load_settings(args)
    trees = read_treebank(args.treebank, config.format)
    if not trees:
        raise EmptyCorpus(f"{args.treebank}: no trees")
    vocab = class_trees = None
    if args.classes:
        vocab, class_trees = load_classes(args.classes)
    heads = (load_head_rules(args.head_rules) if args.head_rules
             else default_head_rules())

    grow_trees, smooth_trees = split_corpus(trees, config.grow_fraction,
                                            config.seed)
    model_set = models.train(grow_trees, smooth_trees, config, heads=heads,
                             vocab=vocab, class_trees=class_trees)
    save_model_set(model_set, config, args.out)

    n_leaves = sum(len(corpus.leaves(t)) for t in trees)
    n_internal = sum(len(corpus.internal_nodes(t)) for t in trees)
    print(f"trees: {len(trees)} ({len(grow_trees)} grow, "
          f"{len(smooth_trees)} heldout)", file=out)
    print(f"tag events: {n_leaves}", file=out)
    print(f"label events: {n_internal}", file=out)
    print(f"extension events: {n_leaves + n_internal}", file=out)
    for kind in ("tag", "label", "extension"):
        model = model_set.models[kind]
        note = "" if model.heldout_used else " (fixed lambdas: no heldout events)"
        print(f"{kind} model: {len(model.nodes)} nodes, "
              f"{len(model.bucket_lambdas)} lambda buckets{note}", file=out)
    print(f"unary chain cap: {model_set.u_max}", file=out)
    return EXIT_OK


# --- parse ---

SKIP_MARKER = "SKIP"
NOPARSE_MARKER = "NOPARSE"

_worker_state = {}


def _worker_init(model_path, config):
    _worker_state["model"] = load_model_set(model_path)
    _worker_state["config"] = config


def _worker_parse(job):
    lineno, words = job
    return lineno, _parse_line(_worker_state["model"], words,
                               _worker_state["config"])


def _parse_line(model_set, words, config):
    """One output line for one sentence (never raises on parse failures)."""
    if not words:
        return f"{SKIP_MARKER}\t\tempty line"
    if len(words) > config.max_length:
        return (f"{SKIP_MARKER}\t\t{len(words)} words exceed the "
                f"{config.max_length}-word limit")
    result = search.parse(model_set, words, config)
    if result.tree is None:
        return f"{NOPARSE_MARKER}\t\t{result.status}"
    text = corpus.format_tree(result.tree, config.format)
    return f"{text}\t{result.logprob:.6f}\t{result.status}"


def cmd_parse(args, out):
    config = _load_settings(args)
    if args.input and args.input != "-":
        with open(args.input, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    else:
        lines = sys.stdin.read().splitlines()
    jobs = [(i, line.split()) for i, line in enumerate(lines)]

    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers,
                                 initializer=_worker_init,
                                 initargs=(args.model, config)) as pool:
            results = list(pool.map(_worker_parse, jobs, chunksize=8))
        results.sort(key=lambda item: item[0])
        for _, line in results:
            print(line, file=out)
    else:
        model_set = load_model_set(args.model)
        for _, words in jobs:
            print(_parse_line(model_set, words, config), file=out)
    return EXIT_OK


# --- eval / report ---

def _parse_ranges(text):
    ranges = []
    for part in text.split(","):
        lo, sep, hi = part.strip().partition(":")
        try:
            if not sep:
                raise ValueError(part)
            ranges.append((int(lo), int(hi)))
        except ValueError:
            raise DTParserError(
                f"bad length range {part.strip()!r}; expected LO:HI") from None
    return tuple(ranges)


def _score_treebanks(args, config):
    gold = read_treebank(args.gold, config.format)
    test = read_treebank(args.test, config.format)
    if len(gold) != len(test):
        raise AlignmentMismatch(
            min(len(gold), len(test)),
            f"gold has {len(gold)} trees, test has {len(test)}")
    scores = []
    for i, (g, t) in enumerate(zip(gold, test)):
        try:
            scores.append(parseval.score_pair(
                g, t, include_root=config.include_root,
                multiset=config.multiset))
        except DTParserError as exc:
            raise AlignmentMismatch(i, str(exc)) from exc
    return scores


def _write_sentence_tsv(scores, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("sentence\tlength\tgold\ttest\tcorrect\tcorrect_labelled"
                 "\tcrossings\ttags_correct\n")
        for i, s in enumerate(scores):
            fh.write(f"{i}\t{s.length}\t{s.gold_constituents}"
                     f"\t{s.test_constituents}\t{s.correct_unlabelled}"
                     f"\t{s.correct_labelled}\t{s.crossings}"
                     f"\t{s.tags_correct}\n")


def cmd_eval(args, out, with_lengths=False):
    config = _load_settings(args)
    scores = _score_treebanks(args, config)
    ranges = (_parse_ranges(args.ranges) if args.ranges
              else parseval.DEFAULT_RANGES)
    if args.sentences:
        _write_sentence_tsv(scores, args.sentences)
    report = parseval.aggregate(scores, ranges)
    out.write(parseval.render_csv(report))
    if with_lengths:
        out.write("\nLength,Crossings Per Sentence,Precision,Recall,Frequency\n")
        for length, freq, crossings, precision, recall in \
                parseval.per_length_rows(scores):
            out.write(f"{length},{crossings:.2f},{precision:.1f}%,"
                      f"{recall:.1f}%,{freq}\n")
    return EXIT_OK


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")

    commands = {
        "classes": cmd_classes,
        "train": cmd_train,
        "parse": cmd_parse,
        "eval": cmd_eval,
        "report": lambda a, o: cmd_eval(a, o, with_lengths=True),
    }
    try:
        out_path = getattr(args, "out", None)
        needs_file = args.command in ("parse", "eval", "report") and out_path
        if needs_file:
            with open(out_path, "w", encoding="utf-8") as fh:
                return commands[args.command](args, fh)
        return commands[args.command](args, sys.stdout)
    except (DTParserError, OSError) as exc:
        print(f"dtparser {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:  # pragma: no cover - defensive
        import traceback
        traceback.print_exc()
        print(f"dtparser {args.command}: internal error", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
