"""Bottom-up, left-to-right derivations of parse trees.

A parse tree is built by a unique sequence of decisions over an *active
list* of nodes covering the sentence.  Initially the active nodes are the
untagged words.  The decision point is always the leftmost active node
with an unset feature; a word is assigned its tag and then its extension,
a freshly built constituent its label and then its extension.  The
extension says how a node attaches to its parent:

* ``right`` -- the node is the first child of a constituent,
* ``left``  -- the node is the last child of a constituent,
* ``up``    -- the node is neither the first nor the last child,
* ``unary`` -- the node is the only child of a unary constituent,
* ``root``  -- the node is the root of the tree.

Assigning ``left`` closes the pending constituent: the new parent takes
the maximal chain of ``up`` nodes plus one ``right`` node immediately to
the left, which always exists for a legal action.  Assigning ``unary``
builds a one-child parent on the spot.  The parent's head word and head
tag are copied from the head child, which the head rules pick once the
parent's label is known.

Every decision is recorded as a DerivationEvent carrying the decision
kind, the conditioning history and the chosen value, so a tree and its
event sequence determine each other exactly.

History slot layout
-------------------

All three decision kinds share one layout: for each queried node, in the
order current, first/second active node to the left, first/second active
node to the right, first/second child of the current node from the left,
first/second child from the right, the six values

    word, tag, label, extension, child count, span width

giving 54 slots.  Tag decisions append four more: the surface word and
assigned tag at sentence positions i-1 and i-2 (58 slots).  Unset and
out-of-range values are None.  Untagged words right of the decision point
expose only their surface word; their tag/label/extension read None.
Word nodes reached by the derivation carry the reserved pseudo-label
``TAG_LABEL`` in label slots.
"""

from dataclasses import dataclass

from .corpus import RawLeaf, RawTree
from .errors import (DeadEnd, EmptyInput, IllegalAction, NonContiguousTree,
                     UnaryChainTooLong)

EXTENSIONS = ("right", "left", "up", "unary", "root")
KIND_TAG = "tag"
KIND_LABEL = "label"
KIND_EXTENSION = "extension"
KINDS = (KIND_TAG, KIND_LABEL, KIND_EXTENSION)

TAG_LABEL = "<tag>"  # reserved pseudo-label of word-level nodes

_QUERIED_NODES = ("cur", "l1", "l2", "r1", "r2", "cl1", "cl2", "cr1", "cr2")
_FEATURES = (("word", "word"), ("tag", "tag"), ("label", "label"),
             ("ext", "extension"), ("nch", "count"), ("width", "width"))
_TAG_EXTRAS = (("w-1.word", "word"), ("w-1.tag", "tag"),
               ("w-2.word", "word"), ("w-2.tag", "tag"))


def slot_layout(kind):
    """The (name, value kind) pairs of every history slot, in order."""
    slots = [(f"{node}.{feat}", vkind)
             for node in _QUERIED_NODES
             for feat, vkind in _FEATURES]
    if kind == KIND_TAG:
        slots.extend(_TAG_EXTRAS)
    return tuple(slots)


@dataclass(frozen=True, slots=True)
class Node:
    """One active node: a (possibly still featureless) subtree."""

    word: str          # head word; surface word at word nodes
    tag: object        # str or None
    label: object      # str or None; word nodes stay None
    extension: object  # str or None
    start: int         # first covered word index, 0-based
    end: int           # last covered word index, inclusive
    children: tuple    # of Node, empty for word nodes
    unary_chain: int   # consecutive unary constituents built below

    @property
    def is_leaf(self):
        return not self.children

    @property
    def width(self):
        return self.end - self.start + 1


@dataclass(frozen=True, slots=True)
class DerivationContext:
    """Per-corpus constants shared by every state: inventories, head rules
    and the unary chain cap."""

    tags: tuple
    labels: tuple
    heads: object  # HeadRuleTable
    u_max: int


@dataclass(frozen=True, slots=True)
class DerivationState:
    ctx: DerivationContext
    words: tuple
    stack: tuple   # built active nodes, left to right
    tagged: tuple  # tags assigned so far, one per covered word
    complete: bool


@dataclass(frozen=True)
class DerivationEvent:
    kind: str
    history: tuple
    future: str


def initial_state(words, ctx):
    if not words:
        raise EmptyInput("cannot derive an empty sentence")
    return DerivationState(ctx=ctx, words=tuple(words), stack=(), tagged=(),
                           complete=False)


def _decision(state):
    """The pending decision: (kind, node-or-word-index), or None."""
    if state.complete:
        return None
    if state.stack:
        top = state.stack[-1]
        if top.children and top.label is None:
            return KIND_LABEL, top
        if top.extension is None:
            return KIND_EXTENSION, top
    nxt = len(state.tagged)
    if nxt < len(state.words):
        return KIND_TAG, nxt
    return None


def decision_kind(state):
    dec = _decision(state)
    return dec[0] if dec else None


def legal_actions(state):
    """The pending decision kind and its legal candidate values.

    Raises DeadEnd when the state is live but no action is legal (or no
    decision point exists), which marks a prunable hypothesis.
    """
    dec = _decision(state)
    if dec is None:
        if state.complete:
            raise IllegalAction("derivation already complete")
        raise DeadEnd("no decision point left in an incomplete derivation")
    kind, target = dec
    if kind == KIND_TAG:
        return kind, tuple(state.ctx.tags)
    if kind == KIND_LABEL:
        return kind, tuple(state.ctx.labels)

    node = target
    whole = node.start == 0 and node.end == len(state.words) - 1
    left = state.stack[-2] if len(state.stack) >= 2 else None
    candidates = []
    if not whole:
        candidates.append("right")
    if left is not None and left.extension in ("right", "up"):
        candidates.append("left")
        candidates.append("up")
    if node.unary_chain < state.ctx.u_max:
        candidates.append("unary")
    # The root must be a labelled constituent covering the whole sentence.
    if whole and len(state.stack) == 1 and not node.is_leaf:
        candidates.append("root")
    if not candidates:
        raise DeadEnd("no legal extension")
    return kind, tuple(candidates)


def apply_action(state, action, validate=True):
    """The successor state after one (kind, value) decision."""
    kind, value = action
    if validate:
        legal_kind, candidates = legal_actions(state)  # may raise DeadEnd
        if kind != legal_kind or value not in candidates:
            raise IllegalAction(f"action {action!r} not legal here "
                                f"(expected {legal_kind} in {candidates})")
    if kind == KIND_TAG:
        i = len(state.tagged)
        leaf = Node(word=state.words[i], tag=value, label=None, extension=None,
                    start=i, end=i, children=(), unary_chain=0)
        return DerivationState(ctx=state.ctx, words=state.words,
                               stack=state.stack + (leaf,),
                               tagged=state.tagged + (value,), complete=False)

    top = state.stack[-1]
    if kind == KIND_LABEL:
        symbols = [c.label if not c.is_leaf else c.tag for c in top.children]
        head = top.children[state.ctx.heads.head_child(value, symbols)]
        node = Node(word=head.word, tag=head.tag, label=value, extension=None,
                    start=top.start, end=top.end, children=top.children,
                    unary_chain=top.unary_chain)
        return DerivationState(ctx=state.ctx, words=state.words,
                               stack=state.stack[:-1] + (node,),
                               tagged=state.tagged, complete=False)

    node = Node(word=top.word, tag=top.tag, label=top.label, extension=value,
                start=top.start, end=top.end, children=top.children,
                unary_chain=top.unary_chain)
    if value in ("right", "up"):
        stack = state.stack[:-1] + (node,)
        return DerivationState(ctx=state.ctx, words=state.words, stack=stack,
                               tagged=state.tagged, complete=False)
    if value == "root":
        return DerivationState(ctx=state.ctx, words=state.words,
                               stack=state.stack[:-1] + (node,),
                               tagged=state.tagged, complete=True)

    if value == "unary":
        children = (node,)
        chain = node.unary_chain + 1
        base = len(state.stack) - 1
    else:  # left: absorb the chain of up-nodes and the opening right-node
        chain_nodes = [node]
        i = len(state.stack) - 2
        while i >= 0 and state.stack[i].extension == "up":
            chain_nodes.append(state.stack[i])
            i -= 1
        assert i >= 0 and state.stack[i].extension == "right", \
            "legal 'left' always closes back to a 'right' node"
        chain_nodes.append(state.stack[i])
        children = tuple(reversed(chain_nodes))
        chain = 0
        base = i
    parent = Node(word=None, tag=None, label=None, extension=None,
                  start=children[0].start, end=children[-1].end,
                  children=children, unary_chain=chain)
    return DerivationState(ctx=state.ctx, words=state.words,
                           stack=state.stack[:base] + (parent,),
                           tagged=state.tagged, complete=False)


# --- history extraction ---

_NULL_SLOTS = (None, None, None, None, None, None)


def _node_slots(node):
    label = node.label if not node.is_leaf else TAG_LABEL
    return (node.word, node.tag, label, node.extension,
            len(node.children), node.width)


def _untagged_slots(state, i):
    # Word not yet reached by the derivation: only its surface form is known.
    if 0 <= i < len(state.words):
        return (state.words[i], None, None, None, 0, 1)
    return _NULL_SLOTS


def extract_history(state, kind=None):
    """The conditioning history for the pending decision, as a slot tuple.

    See the module docstring for the layout.  `kind` is only checked
    against the actual pending decision when given.
    """
    dec = _decision(state)
    if dec is None:
        raise IllegalAction("no pending decision to condition on")
    actual_kind, target = dec
    if kind is not None and kind != actual_kind:
        raise IllegalAction(f"pending decision is {actual_kind}, not {kind}")

    stack = state.stack
    if actual_kind == KIND_TAG:
        i = target
        cur = (state.words[i], None, TAG_LABEL, None, 0, 1)
        lefts = [stack[-1] if len(stack) >= 1 else None,
                 stack[-2] if len(stack) >= 2 else None]
        right_at = i + 1
        children = (None, None, None, None)
    else:
        node = target
        if actual_kind == KIND_LABEL:
            # Head word and tag are unknown until the label picks the head.
            cur = (None, None, None, None, len(node.children), node.width)
        else:
            cur = _node_slots(node)
        lefts = [stack[-2] if len(stack) >= 2 else None,
                 stack[-3] if len(stack) >= 3 else None]
        right_at = node.end + 1
        kids = node.children
        children = (kids[0] if len(kids) >= 1 else None,
                    kids[1] if len(kids) >= 2 else None,
                    kids[-1] if len(kids) >= 1 else None,
                    kids[-2] if len(kids) >= 2 else None)

    slots = list(cur)
    for nb in lefts:
        slots.extend(_node_slots(nb) if nb is not None else _NULL_SLOTS)
    slots.extend(_untagged_slots(state, right_at))
    slots.extend(_untagged_slots(state, right_at + 1))
    for kid in children:
        slots.extend(_node_slots(kid) if kid is not None else _NULL_SLOTS)

    if actual_kind == KIND_TAG:
        i = target
        for back in (1, 2):
            if i - back >= 0:
                slots.append(state.words[i - back])
                slots.append(state.tagged[i - back])
            else:
                slots.extend((None, None))
    return tuple(slots)


def format_event(event):
    """One-line dump: `kind TAB future TAB slot=value,...` (non-null slots)."""
    names = [name for name, _ in slot_layout(event.kind)]
    shown = ",".join(f"{name}={value}" for name, value
                     in zip(names, event.history) if value is not None)
    return f"{event.kind}\t{event.future}\t{shown}"


# --- encoding trees to events and back ---

class _GoldNode:
    __slots__ = ("raw", "label", "tag", "extension", "parent", "children")

    def __init__(self, raw):
        self.raw = raw
        self.parent = None
        self.extension = None
        if isinstance(raw, RawLeaf):
            self.label = None
            self.tag = raw.tag
            self.children = []
        else:
            if not raw.children:
                raise NonContiguousTree("internal node with no children")
            self.label = raw.label
            self.tag = None
            self.children = [_GoldNode(c) for c in raw.children]
            for pos, child in enumerate(self.children):
                child.parent = self
                if len(self.children) == 1:
                    child.extension = "unary"
                elif pos == 0:
                    child.extension = "right"
                elif pos == len(self.children) - 1:
                    child.extension = "left"
                else:
                    child.extension = "up"


def _gold_leaves(gold):
    if not gold.children:
        return [gold]
    out = []
    for child in gold.children:
        out.extend(_gold_leaves(child))
    return out


def encode(tree, ctx):
    """The unique event sequence whose replay reconstructs `tree`.

    Returns a list of DerivationEvent.  Raises UnaryChainTooLong when the
    tree stacks more unary constituents than the context allows.
    """
    if isinstance(tree, RawLeaf):
        raise NonContiguousTree("a bare tagged word is not a tree")
    gold_root = _GoldNode(tree)
    gold_root.extension = "root"
    gold_leaves = _gold_leaves(gold_root)
    words = [g.raw.word for g in gold_leaves]

    state = initial_state(words, ctx)
    gold_stack = []  # parallel to state.stack
    events = []
    while not state.complete:
        dec = _decision(state)
        assert dec is not None, "gold replay cannot dead-end"
        kind, target = dec
        if kind == KIND_TAG:
            value = gold_leaves[target].tag
        elif kind == KIND_LABEL:
            value = gold_stack[-1].label
        else:
            value = gold_stack[-1].extension
            if value == "unary" and target.unary_chain >= ctx.u_max:
                raise UnaryChainTooLong(
                    f"tree stacks {target.unary_chain + 1} unary constituents, "
                    f"cap is {ctx.u_max}")
        events.append(DerivationEvent(kind=kind,
                                      history=extract_history(state, kind),
                                      future=value))
        state = apply_action(state, (kind, value))
        if kind == KIND_TAG:
            gold_stack.append(gold_leaves[target])
        elif kind == KIND_EXTENSION and value in ("left", "unary"):
            consumed = len(state.stack[-1].children)
            merged, gold_stack = gold_stack[-consumed:], gold_stack[:-consumed]
            if len({id(g.parent) for g in merged}) != 1:
                raise NonContiguousTree("reduction crosses constituents")
            gold_stack.append(merged[0].parent)
    return events


def replay(words, actions, ctx):
    """Run a (kind, value) action sequence from scratch; the final state."""
    state = initial_state(words, ctx)
    for action in actions:
        state = apply_action(state, action)
    return state


def decode(words, events, ctx):
    """Rebuild the tree encoded by `events` over `words`."""
    state = replay(words, [(e.kind, e.future) for e in events], ctx)
    if not state.complete:
        raise IllegalAction("event sequence does not complete a tree")
    return to_raw_tree(state.stack[0])


def to_raw_tree(node):
    """Strip derivation bookkeeping from a completed constituent."""
    if node.is_leaf:
        return RawLeaf(word=node.word, tag=node.tag)
    return RawTree(label=node.label,
                   children=tuple(to_raw_tree(c) for c in node.children))


def max_unary_chain(tree):
    """Most deeply stacked unary constituents anywhere in `tree`."""
    best = 0

    def depth(node):
        nonlocal best
        if isinstance(node, RawLeaf):
            return 0
        kids = [depth(c) for c in node.children]
        mine = kids[0] + 1 if len(node.children) == 1 else 0
        best = max(best, mine)
        return mine

    depth(tree)
    return best
