"""The three linked decision-tree models and the training pipeline.

Training encodes every grow tree into its derivation events and routes
them by decision kind: word-tagging events train the tag model (one per
word), constituent-labelling events the label model (one per internal
node), and attachment events the extension model (one per node).  Each
model is grown on the grow split and interpolation-smoothed on the
held-out split.

The three future vocabularies are the tag set, the label set and the
five extensions.  Histories are encoded through class trees built from
training co-occurrence: adjacent words (rare words folded into the
unknown symbol), adjacent tags, and adjacent sibling constituent symbols
(word-level siblings count as the reserved tag pseudo-label).  The five
extensions use a small fixed code since they have no useful statistics
to cluster.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field

from . import classtree, derivation, dtm
from .corpus import UNK, build_vocabularies, leaves, sentence_tags
from .errors import DTParserError, IllegalAction
from .headfinder import default_head_rules

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_U_MAX = 4


@dataclass
class ModelSet:
    """Everything a trained parser needs, frozen after training."""

    vocab: object
    heads: object
    class_trees: dict              # value kind -> ClassTree
    models: dict                   # decision kind -> SmoothedModel
    u_max: int
    renormalize: bool = False
    schema_version: int = SCHEMA_VERSION
    _ctx: object = field(default=None, repr=False)

    def context(self):
        if self._ctx is None:
            self._ctx = derivation.DerivationContext(
                tags=tuple(self.vocab.tags), labels=tuple(self.vocab.labels),
                heads=self.heads, u_max=self.u_max)
        return self._ctx


def make_schema(kind, vocab, class_trees):
    futures = {
        derivation.KIND_TAG: vocab.tags,
        derivation.KIND_LABEL: vocab.labels,
        derivation.KIND_EXTENSION: derivation.EXTENSIONS,
    }[kind]
    return dtm.ModelSchema(kind=kind, slots=derivation.slot_layout(kind),
                           encoders=class_trees, futures=futures)


def build_class_trees(trees, vocab, config):
    """Word, tag, label and extension class trees from training bigrams."""
    word_bigrams = Counter()
    tag_bigrams = Counter()
    label_bigrams = Counter()
    for tree in trees:
        words = [vocab.word_symbol(leaf.word) for leaf in leaves(tree)]
        for a, b in zip(words, words[1:]):
            word_bigrams[a, b] += 1
        tags = sentence_tags(tree)
        for a, b in zip(tags, tags[1:]):
            tag_bigrams[a, b] += 1
        stack = [tree]
        while stack:
            node = stack.pop()
            symbols = []
            for child in node.children:
                if hasattr(child, "children"):
                    symbols.append(child.label)
                    stack.append(child)
                else:
                    symbols.append(derivation.TAG_LABEL)
            for a, b in zip(symbols, symbols[1:]):
                label_bigrams[a, b] += 1
    window = config.cluster_window
    return {
        "word": classtree.build_class_tree(
            vocab.words, word_bigrams, config.word_bits, window=window,
            fallback=UNK),
        "tag": classtree.build_class_tree(
            vocab.tags, tag_bigrams, config.tag_bits, window=window),
        "label": classtree.build_class_tree(
            vocab.labels + [derivation.TAG_LABEL], label_bigrams,
            config.label_bits, window=window),
        "extension": classtree.fixed_class_tree(
            derivation.EXTENSIONS, config.extension_bits),
    }


def observed_u_max(trees):
    longest = max((derivation.max_unary_chain(t) for t in trees), default=0)
    return longest if longest > 0 else DEFAULT_U_MAX


def _encode_corpus(trees, ctx, what):
    routed = {kind: [] for kind in derivation.KINDS}
    for index, tree in enumerate(trees):
        try:
            for event in derivation.encode(tree, ctx):
                routed[event.kind].append(event)
        except DTParserError as exc:
            raise type(exc)(f"{what} sentence {index}: {exc}") from exc
    return routed


def train(grow_trees, smooth_trees, config, heads=None, vocab=None,
          class_trees=None):
    """Train tag/label/extension models from an already split corpus.

    Vocabularies and class trees are built from the union of both splits
    unless supplied (e.g. preserved from a `classes` run).
    """
    all_trees = list(grow_trees) + list(smooth_trees)
    if vocab is None:
        vocab = build_vocabularies(all_trees, config.unk_threshold)
    if class_trees is None:
        class_trees = build_class_trees(all_trees, vocab, config)
    if heads is None:
        heads = default_head_rules()
    u_max = config.u_max if config.u_max > 0 else observed_u_max(all_trees)

    ctx = derivation.DerivationContext(tags=tuple(vocab.tags),
                                       labels=tuple(vocab.labels),
                                       heads=heads, u_max=u_max)
    grow_events = _encode_corpus(grow_trees, ctx, "grow")
    heldout_events = _encode_corpus(smooth_trees, ctx, "heldout")

    models = {}
    for kind in derivation.KINDS:
        schema = make_schema(kind, vocab, class_trees)
        log.info("growing %s model from %d events", kind, len(grow_events[kind]))
        root = dtm.grow(grow_events[kind], schema, config)
        models[kind] = dtm.smooth(root, heldout_events[kind], schema, config)
        log.info("%s model: %d nodes, %d lambda buckets%s", kind,
                 len(models[kind].nodes), len(models[kind].bucket_lambdas),
                 "" if models[kind].heldout_used else " (no held-out data)")
    return ModelSet(vocab=vocab, heads=heads, class_trees=class_trees,
                    models=models, u_max=u_max, renormalize=config.renormalize)


def action_scores(model_set, state):
    """The pending decision kind and each legal value's probability.

    Probabilities come straight from the decision-tree model; values made
    illegal by the derivation rules are dropped without renormalising, so
    a partial derivation's probability never understates its completions.
    (Set `renormalize` to rescale the legal ones to sum to 1 instead.)
    """
    kind, candidates = derivation.legal_actions(state)  # may raise DeadEnd
    model = model_set.models[kind]
    history = derivation.extract_history(state, kind)
    probs = model.predict(history)
    scored = [(value, float(probs[model.schema.future_index[value]]))
              for value in candidates]
    if model_set.renormalize:
        mass = sum(p for _, p in scored)
        scored = [(value, p / mass) for value, p in scored]
    return kind, scored


def score_action(model_set, state, action):
    """P(action | state); the action must be legal here."""
    kind, value = action
    legal_kind, scored = action_scores(model_set, state)
    if kind != legal_kind:
        raise IllegalAction(f"pending decision is {legal_kind}, not {kind}")
    for candidate, p in scored:
        if candidate == value:
            return p
    raise IllegalAction(f"{value!r} is not legal here")


def derivation_logprob(model_set, tree):
    """Natural-log probability the models assign to `tree`'s derivation."""
    ctx = model_set.context()
    events = derivation.encode(tree, ctx)
    state = derivation.initial_state([l.word for l in leaves(tree)], ctx)
    total = 0.0
    for event in events:
        total += math.log(score_action(model_set, state, (event.kind, event.future)))
        state = derivation.apply_action(state, (event.kind, event.future),
                                        validate=False)
    return total
