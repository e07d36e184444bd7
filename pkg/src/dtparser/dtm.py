"""Decision-tree conditional models.

A model estimates P(future | history) by walking a binary question tree
to a leaf and reading off a smoothed distribution.  Histories are fixed
slot tuples; every question asks one yes/no fact about one slot:

* ``isnull``  -- is the slot value missing?
* ``bit b``   -- is bit b of the slot's class-tree code set?  (Missing
  values answer no: they carry the reserved all-null pseudo-code.)
* ``le t``    -- is the numeric slot value <= t?

Trees are grown by recursive greedy splitting on the question with the
largest reduction in future entropy, and smoothed by interpolating every
node's relative-frequency distribution with its parent's smoothed
distribution,

    P~(f | node) = lambda_node * P_emp(f | node) + (1 - lambda_node) * P~(f | parent),

with the uniform distribution standing in as the root's parent so every
future keeps nonzero probability.  The lambdas are tied across nodes in
buckets of floor(log2(training count)) and fit by expectation
maximisation on held-out events.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import NoEvents, SlotLayoutMismatch

log = logging.getLogger(__name__)

SIZE_THRESHOLDS = (1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 40)
CATEGORICAL_KINDS = ("word", "tag", "label", "extension")
NUMERIC_KINDS = ("count", "width")

# Count bucket b covers training counts in [2^b, 2^(b+1)).  Without held-out
# data the lambda of bucket b falls back to this fixed schedule.
_FALLBACK_PIVOT = 8.0


@dataclass(frozen=True)
class Question:
    slot: int
    kind: str  # "isnull" | "bit" | "le"
    arg: int = 0

    def answer_array(self, slot_vals, slot_nulls):
        if self.kind == "isnull":
            return slot_nulls.copy()
        if self.kind == "bit":
            return ((slot_vals >> self.arg) & 1).astype(bool) & ~slot_nulls
        return (slot_vals <= self.arg) & ~slot_nulls

    def answer(self, value, null):
        if self.kind == "isnull":
            return bool(null)
        if null:
            return False
        if self.kind == "bit":
            return bool((value >> self.arg) & 1)
        return value <= self.arg

    def describe(self, schema):
        name = schema.slots[self.slot][0]
        if self.kind == "isnull":
            return f"{name} is null?"
        if self.kind == "bit":
            return f"{name} bit {self.arg}?"
        return f"{name} <= {self.arg}?"


class ModelSchema:
    """Slot layout, value encoders and future vocabulary of one model."""

    def __init__(self, kind, slots, encoders, futures,
                 thresholds=SIZE_THRESHOLDS):
        self.kind = kind
        self.slots = tuple(slots)  # (name, value kind) pairs
        self.encoders = dict(encoders)  # value kind -> ClassTree
        self.futures = list(futures)
        self.future_index = {f: i for i, f in enumerate(self.futures)}
        self.thresholds = tuple(thresholds)

    def questions(self):
        """Every candidate question, in the canonical (slot, kind) order
        used for deterministic tie-breaking."""
        out = []
        for slot, (_, vkind) in enumerate(self.slots):
            out.append(Question(slot, "isnull"))
            if vkind in CATEGORICAL_KINDS:
                for b in range(self.encoders[vkind].budget):
                    out.append(Question(slot, "bit", b))
            else:
                for t in self.thresholds:
                    out.append(Question(slot, "le", t))
        return out

    def encode_value(self, vkind, value):
        if value is None:
            return 0, True
        if vkind in CATEGORICAL_KINDS:
            return self.encoders[vkind].encode(value).bits, False
        return int(value), False

    def encode_history(self, history):
        if len(history) != len(self.slots):
            raise SlotLayoutMismatch(
                f"history has {len(history)} slots, schema expects {len(self.slots)}")
        vals = np.zeros(len(self.slots), dtype=np.int64)
        nulls = np.zeros(len(self.slots), dtype=bool)
        for i, ((_, vkind), value) in enumerate(zip(self.slots, history)):
            vals[i], nulls[i] = self.encode_value(vkind, value)
        return vals, nulls

    def encode_events(self, events):
        vals = np.zeros((len(events), len(self.slots)), dtype=np.int64)
        nulls = np.zeros((len(events), len(self.slots)), dtype=bool)
        futures = np.zeros(len(events), dtype=np.int64)
        for e, event in enumerate(events):
            vals[e], nulls[e] = self.encode_history(event.history)
            futures[e] = self.future_index[event.future]
        return vals, nulls, futures


class DTNode:
    __slots__ = ("question", "yes", "no", "counts", "total", "node_id")

    def __init__(self, counts):
        self.question = None
        self.yes = None
        self.no = None
        self.counts = counts
        self.total = int(counts.sum())
        self.node_id = -1

    @property
    def is_leaf(self):
        return self.question is None

    def empirical(self):
        if self.total == 0:
            return np.zeros_like(self.counts, dtype=float)
        return self.counts / self.total


def iter_nodes(root):
    """Preorder traversal; node_id equals the position in this order."""
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        if not node.is_leaf:
            stack.append(node.no)
            stack.append(node.yes)


def _assign_ids(root):
    nodes = list(iter_nodes(root))
    for i, node in enumerate(nodes):
        node.node_id = i
    return nodes


def _entropy_bits(counts):
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def grow(events, schema, config):
    """CART-style tree growing by entropy reduction.

    Splitting stops when a node holds fewer than `config.min_events`
    events, sits at `config.max_depth`, or no question gains at least
    `config.min_gain` bits.  Gain ties break toward the earliest question
    in the canonical order, so growing is deterministic.
    """
    if not events:
        raise NoEvents(f"no events to grow a {schema.kind} model from")
    vals, nulls, futures = schema.encode_events(events)
    questions = schema.questions()
    answers = [None] * len(questions)
    n_futures = len(schema.futures)

    def answer(qi):
        if answers[qi] is None:
            q = questions[qi]
            answers[qi] = q.answer_array(vals[:, q.slot], nulls[:, q.slot])
        return answers[qi]

    def build(idx, depth):
        counts = np.bincount(futures[idx], minlength=n_futures)
        node = DTNode(counts)
        if len(idx) < config.min_events or depth >= config.max_depth:
            return node
        here = _entropy_bits(counts)
        if here == 0.0:
            return node
        best_gain = 0.0
        best_qi = None
        best_mask = None
        for qi in range(len(questions)):
            mask = answer(qi)[idx]
            n_yes = int(mask.sum())
            if n_yes == 0 or n_yes == len(idx):
                continue
            yes_counts = np.bincount(futures[idx[mask]], minlength=n_futures)
            no_counts = counts - yes_counts
            gain = here - (n_yes * _entropy_bits(yes_counts)
                           + (len(idx) - n_yes) * _entropy_bits(no_counts)) / len(idx)
            if gain > best_gain:
                best_gain = gain
                best_qi = qi
                best_mask = mask
        if best_qi is None or best_gain < config.min_gain:
            return node
        node.question = questions[best_qi]
        node.yes = build(idx[best_mask], depth + 1)
        node.no = build(idx[~best_mask], depth + 1)
        return node

    root = build(np.arange(len(events)), 0)
    _assign_ids(root)
    return root


def as_forced_order_tree(schema, questions, events):
    """Split on the given questions in exactly the given order.

    Every leaf then holds the events sharing one full answer pattern, so
    its relative frequencies are exactly the empirical conditional table
    for that history; the question order cannot change them.  Branches no
    event reaches stay unexpanded (zero-count leaves).
    """
    if not events:
        raise NoEvents(f"no events for a forced-order {schema.kind} model")
    vals, nulls, futures = schema.encode_events(events)
    n_futures = len(schema.futures)

    def build(idx, qpos):
        node = DTNode(np.bincount(futures[idx], minlength=n_futures))
        if qpos == len(questions) or len(idx) == 0:
            return node
        q = questions[qpos]
        mask = q.answer_array(vals[idx, q.slot], nulls[idx, q.slot])
        node.question = q
        node.yes = build(idx[mask], qpos + 1)
        node.no = build(idx[~mask], qpos + 1)
        return node

    root = build(np.arange(len(events)), 0)
    _assign_ids(root)
    return root


def walk(root, schema, history):
    """Follow the questions from the root; the reached node (a leaf unless
    the tree is a pruned forced-order tree)."""
    vals, nulls = schema.encode_history(history)
    node = root
    while not node.is_leaf:
        q = node.question
        node = node.yes if q.answer(int(vals[q.slot]), bool(nulls[q.slot])) else node.no
        if node is None:  # unexpanded branch of a forced-order tree
            raise KeyError("history was never observed")
    return node


class SmoothedModel:
    """A grown tree with per-node interpolation weights; the predictor."""

    def __init__(self, schema, root, bucket_lambdas, heldout_used, em_log):
        self.schema = schema
        self.root = root
        self.nodes = _assign_ids(root)
        self.bucket_lambdas = dict(bucket_lambdas)
        self.heldout_used = heldout_used
        self.em_log = list(em_log)  # held-out log-likelihood per iteration
        self.node_lambdas = np.array(
            [self.bucket_lambdas[_bucket(n)] for n in self.nodes])
        self.smoothed = self._compute_smoothed()
        self._check()

    def _compute_smoothed(self):
        uniform = np.full(len(self.schema.futures), 1.0 / len(self.schema.futures))
        smoothed = [None] * len(self.nodes)

        def fill(node, parent_dist):
            lam = self.node_lambdas[node.node_id]
            smoothed[node.node_id] = lam * node.empirical() + (1.0 - lam) * parent_dist
            if not node.is_leaf:
                fill(node.yes, smoothed[node.node_id])
                fill(node.no, smoothed[node.node_id])

        fill(self.root, uniform)
        return smoothed

    def _check(self):
        for dist in self.smoothed:
            assert abs(dist.sum() - 1.0) <= 1e-9, "smoothed mass must be 1"
            assert dist.min() > 0.0, "smoothed distributions must be positive"

    def leaf_for(self, history):
        return walk(self.root, self.schema, history)

    def predict(self, history):
        """Probabilities over `schema.futures` (read-only array)."""
        return self.smoothed[self.leaf_for(history).node_id]

    def distribution(self, history):
        """(future, probability) pairs, most probable first; ties break on
        the future symbol so the order is a total one."""
        probs = self.predict(history)
        return sorted(zip(self.schema.futures, probs.tolist()),
                      key=lambda item: (-item[1], item[0]))


def _bucket(node):
    return node.total.bit_length() - 1 if node.total > 0 else 0


def _fallback_lambdas(buckets):
    return {b: (2.0 ** b) / (2.0 ** b + _FALLBACK_PIVOT) for b in buckets}


def smooth(root, heldout_events, schema, config):
    """Fit bucketed interpolation weights on held-out events by EM.

    With no held-out events the lambdas fall back to a fixed
    count-based schedule and the model is flagged (`heldout_used`).
    The held-out log-likelihood is non-decreasing across iterations;
    this is asserted.
    """
    nodes = _assign_ids(root)
    buckets = sorted({_bucket(n) for n in nodes})
    if not heldout_events:
        log.warning("no held-out events for the %s model; using the fixed "
                    "lambda schedule", schema.kind)
        return SmoothedModel(schema, root, _fallback_lambdas(buckets),
                             heldout_used=False, em_log=[])

    parent = [-1] * len(nodes)
    for node in nodes:
        if not node.is_leaf:
            parent[node.yes.node_id] = node.node_id
            parent[node.no.node_id] = node.node_id

    def path_ids(leaf_id):
        path = [leaf_id]
        while parent[path[-1]] != -1:
            path.append(parent[path[-1]])
        return path[::-1]  # root .. leaf

    # Group held-out events by (leaf, future); EM cost then scales with the
    # number of distinct groups, not events.
    groups = {}
    for event in heldout_events:
        leaf = walk(root, schema, event.history)
        key = (leaf.node_id, schema.future_index[event.future])
        groups[key] = groups.get(key, 0) + 1

    leaf_paths = {}
    leaf_emp = {}
    leaf_buckets = {}
    for leaf_id, _ in groups:
        if leaf_id in leaf_paths:
            continue
        path = path_ids(leaf_id)
        leaf_paths[leaf_id] = np.array(path)
        leaf_emp[leaf_id] = np.stack([nodes[i].empirical() for i in path])
        leaf_buckets[leaf_id] = np.array([_bucket(nodes[i]) for i in path])

    bucket_pos = {b: i for i, b in enumerate(buckets)}
    lam = np.full(len(buckets), 0.5)
    uniform = 1.0 / len(schema.futures)
    em_log = []
    for _ in range(config.em_max_iterations):
        num = np.zeros(len(buckets))
        den = np.zeros(len(buckets))
        ll = 0.0
        for (leaf_id, future), count in groups.items():
            slots = np.array([bucket_pos[b] for b in leaf_buckets[leaf_id]])
            lam_path = lam[slots]
            one_minus = 1.0 - lam_path
            suffix = np.cumprod(one_minus[::-1])[::-1]  # prod_{i>=j}(1-lam)
            deeper = np.append(suffix[1:], 1.0)         # prod_{i>j}(1-lam)
            weights = lam_path * deeper
            emp = leaf_emp[leaf_id][:, future]
            contrib = weights * emp
            mix = contrib.sum() + suffix[0] * uniform
            ll += count * math.log(mix)
            resp = contrib / mix
            resp_uniform = suffix[0] * uniform / mix
            visited = resp_uniform + np.cumsum(resp)
            np.add.at(num, slots, count * resp)
            np.add.at(den, slots, count * visited)
        if em_log:
            assert ll >= em_log[-1] - 1e-9 * max(1.0, abs(em_log[-1])), \
                "EM held-out log-likelihood decreased"
        done = bool(em_log) and \
            abs(ll - em_log[-1]) <= config.em_tolerance * max(1.0, abs(em_log[-1]))
        em_log.append(ll)
        lam = np.where(den > 0, np.clip(num / np.maximum(den, 1e-300), 0.0,
                                        config.lambda_max), lam)
        if done:
            break
    bucket_lambdas = {b: float(lam[bucket_pos[b]]) for b in buckets}
    return SmoothedModel(schema, root, bucket_lambdas, heldout_used=True,
                         em_log=em_log)


def dump_tree(root, schema):
    """`node_id question|LEAF lambda_bucket sparse-counts` lines."""
    lines = []
    for node in iter_nodes(root):
        what = node.question.describe(schema) if not node.is_leaf else "LEAF"
        sparse = " ".join(f"{schema.futures[i]}:{int(c)}"
                          for i, c in enumerate(node.counts) if c)
        lines.append(f"{node.node_id}\t{what}\t{_bucket(node)}\t{sparse}")
    return "\n".join(lines) + "\n"
