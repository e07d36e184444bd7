"""Model persistence.

A model file is a JSON envelope with a magic string, a format version
and named sections (vocabularies, class trees, head rules, the three
decision-tree models, configuration echo).  Every section carries a
SHA-256 checksum of its canonical serialization, verified on load.
Probabilities and interpolation weights are stored as C99 hex float
literals, so loading reproduces every probability bit for bit; a version
mismatch or checksum failure is a hard error.
"""

import hashlib
import json

import numpy as np

from . import derivation, dtm
from .classtree import BitString, ClassTree
from .config import Config
from .corpus import Vocabularies
from .errors import ModelFileError
from .headfinder import HeadRuleTable, parse_head_rules
from .models import ModelSet, make_schema

MAGIC = "dtparser-model"
CLASSES_MAGIC = "dtparser-classes"
FORMAT_VERSION = 1


def _canonical(data):
    return json.dumps(data, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _checksum(data):
    return hashlib.sha256(_canonical(data)).hexdigest()


def _vocab_data(vocab):
    return {
        "words": [[w, vocab.word_counts.get(w, 0)] for w in vocab.words],
        "tags": vocab.tags,
        "labels": vocab.labels,
        "unk_threshold": vocab.unk_threshold,
    }


def _vocab_from(data):
    return Vocabularies(words=[w for w, _ in data["words"]],
                        word_counts={w: c for w, c in data["words"] if c},
                        tags=list(data["tags"]), labels=list(data["labels"]),
                        unk_threshold=data["unk_threshold"])


def _classtree_data(tree):
    return {
        "budget": tree.budget,
        "depth": tree.depth,
        "truncated": tree.truncated,
        "fallback": tree.fallback,
        "codes": {sym: code.bits for sym, code in tree.codes.items()},
    }


def _classtree_from(data):
    codes = {sym: BitString(bits=bits, width=data["budget"])
             for sym, bits in data["codes"].items()}
    return ClassTree(codes=codes, budget=data["budget"], depth=data["depth"],
                     truncated=data["truncated"], fallback=data["fallback"])


def _head_rules_data(heads):
    return {
        "default_direction": heads.default_direction,
        "rules": [[r.parent, r.direction, list(r.priorities)]
                  for r in heads.rules.values()],
    }


def _head_rules_from(data):
    text = "\n".join(" ".join([parent, direction] + children)
                     for parent, direction, children in data["rules"])
    table = parse_head_rules(text, default_direction=data["default_direction"])
    return table


def _model_data(model):
    nodes = []
    for node in model.nodes:
        q = node.question
        entry = {
            "q": [q.slot, q.kind, q.arg] if q else None,
            "counts": {str(i): int(c) for i, c in enumerate(node.counts) if c},
        }
        if node.is_leaf:
            entry["p"] = [float(x).hex() for x in model.smoothed[node.node_id]]
        nodes.append(entry)
    return {
        "kind": model.schema.kind,
        "nodes": nodes,
        "lambdas": {str(b): lam.hex() for b, lam in model.bucket_lambdas.items()},
        "heldout_used": model.heldout_used,
    }


def _model_from(data, schema):
    n_futures = len(schema.futures)
    entries = data["nodes"]

    def build(pos):
        entry = entries[pos]
        counts = np.zeros(n_futures, dtype=np.int64)
        for i, c in entry["counts"].items():
            counts[int(i)] = c
        node = dtm.DTNode(counts)
        node.node_id = pos
        nxt = pos + 1
        if entry["q"] is not None:
            slot, kind, arg = entry["q"]
            node.question = dtm.Question(slot=slot, kind=kind, arg=arg)
            node.yes, nxt = build(nxt)
            node.no, nxt = build(nxt)
        return node, nxt

    root, used = build(0)
    if used != len(entries):
        raise ModelFileError("model section has trailing nodes")
    bucket_lambdas = {int(b): float.fromhex(lam)
                      for b, lam in data["lambdas"].items()}
    model = dtm.SmoothedModel.__new__(dtm.SmoothedModel)
    model.schema = schema
    model.root = root
    model.nodes = list(dtm.iter_nodes(root))
    model.bucket_lambdas = bucket_lambdas
    model.heldout_used = data["heldout_used"]
    model.em_log = []
    model.node_lambdas = np.array(
        [bucket_lambdas[dtm._bucket(n)] for n in model.nodes])
    # Leaf distributions come back exactly as stored; internal nodes'
    # smoothed distributions are only needed during training.
    model.smoothed = [None] * len(model.nodes)
    for pos, entry in enumerate(entries):
        if entry["q"] is None:
            model.smoothed[pos] = np.array([float.fromhex(x) for x in entry["p"]])
    return model


def save_model_set(model_set, config, path):
    sections = {
        "vocabularies": _vocab_data(model_set.vocab),
        "class_trees": {kind: _classtree_data(tree)
                        for kind, tree in model_set.class_trees.items()},
        "head_rules": _head_rules_data(model_set.heads),
        "models": {kind: _model_data(model)
                   for kind, model in model_set.models.items()},
        "settings": {
            "u_max": model_set.u_max,
            "renormalize": model_set.renormalize,
            "schema_version": model_set.schema_version,
            "config": {k: repr(v) for k, v in config.as_dict().items()},
        },
    }
    envelope = {
        "magic": MAGIC,
        "version": FORMAT_VERSION,
        "sections": {name: {"sha256": _checksum(data), "data": data}
                     for name, data in sections.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(envelope, fh, sort_keys=True)
        fh.write("\n")


def _read_json(path, magic, what):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFileError(f"{path}: not a {what}: {exc}") from exc
    if not isinstance(data, dict) or data.get("magic") != magic:
        raise ModelFileError(f"{path}: bad magic; not a {what}")
    if data.get("version") != FORMAT_VERSION:
        raise ModelFileError(
            f"{path}: format version {data.get('version')!r} unsupported "
            f"(expected {FORMAT_VERSION})")
    return data


def save_classes(vocab, class_trees, path):
    """Write vocabularies plus class trees alone (the `classes` artifact)."""
    data = {
        "magic": CLASSES_MAGIC,
        "version": FORMAT_VERSION,
        "vocabularies": _vocab_data(vocab),
        "class_trees": {kind: _classtree_data(tree)
                        for kind, tree in class_trees.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, sort_keys=True)
        fh.write("\n")


def load_classes(path):
    data = _read_json(path, CLASSES_MAGIC, "classes file")
    vocab = _vocab_from(data["vocabularies"])
    class_trees = {kind: _classtree_from(entry)
                   for kind, entry in data["class_trees"].items()}
    return vocab, class_trees


def load_model_set(path):
    envelope = _read_json(path, MAGIC, "model file")

    sections = {}
    for name, wrapped in envelope["sections"].items():
        if _checksum(wrapped["data"]) != wrapped["sha256"]:
            raise ModelFileError(f"{path}: section {name!r} fails its checksum")
        sections[name] = wrapped["data"]
    for required in ("vocabularies", "class_trees", "head_rules", "models",
                     "settings"):
        if required not in sections:
            raise ModelFileError(f"{path}: section {required!r} missing")

    vocab = _vocab_from(sections["vocabularies"])
    class_trees = {kind: _classtree_from(data)
                   for kind, data in sections["class_trees"].items()}
    heads = _head_rules_from(sections["head_rules"])
    models = {}
    for kind in derivation.KINDS:
        schema = make_schema(kind, vocab, class_trees)
        models[kind] = _model_from(sections["models"][kind], schema)
    settings = sections["settings"]
    return ModelSet(vocab=vocab, heads=heads, class_trees=class_trees,
                    models=models, u_max=settings["u_max"],
                    renormalize=settings["renormalize"],
                    schema_version=settings["schema_version"])
