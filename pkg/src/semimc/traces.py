"""Trace fragments and the behaviours defined on them.

A trace fragment is a finite tree over the signature's labels, possibly
cut short by top leaves (written "T"); a completed trace has every branch
ending in a nullary label.  Fragment text uses the formula-like syntax
``a(b(T), *)`` with nullary labels written bare.

Three state-indexed behaviours are computed by structural recursion, which
yields the unique fixpoint of the defining one-step operators because every
value depends only on structurally smaller fragments:

* ``lt``         linear-time behaviour: top leaves are worth the state's
                 greatest extent, nodes multiply the transition weights into
                 the children and offset by the state's scalar;
* ``finite_tr``  completed-trace behaviour (plain models only);
* ``tr_approx``  depth-n approximant of the maximal-trace behaviour, with
                 tr^0 constant one (plain models only).

``equiv_upto`` is a depth-bounded equivalence semi-decision returning the
first distinguishing fragment as a witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Literal

from ._lex import TokenStream, tokenize
from .errors import OffsetUnsupported, ParseError, SizingError, ValidationError
from .evaluator import EvalConfig, Predicate, nu_extent
from .logic import Formula, Modal, TOP
from .model import Model, Signature
from .semiring import UNDEFINED


@dataclass(frozen=True)
class TopLeaf:
    def __repr__(self):
        return "T"


@dataclass(frozen=True)
class TraceNode:
    label: str
    children: tuple["TraceFragment", ...]


TraceFragment = TopLeaf | TraceNode

TOP_LEAF = TopLeaf()


def depth(b: TraceFragment) -> int:
    if isinstance(b, TopLeaf):
        return 0
    return 1 + max((depth(c) for c in b.children), default=0)


def is_completed(b: TraceFragment) -> bool:
    """True when no branch is cut by a top leaf."""
    if isinstance(b, TopLeaf):
        return False
    return all(is_completed(c) for c in b.children) if b.children else True


def check_fragment(b: TraceFragment, signature: Signature):
    if isinstance(b, TopLeaf):
        return
    if not signature.has(b.label):
        raise ValidationError(f"unknown label {b.label!r} in fragment")
    if signature.arity(b.label) != len(b.children):
        raise ValidationError(f"arity mismatch on label {b.label!r} in fragment")
    for c in b.children:
        check_fragment(c, signature)


def parse_fragment(text: str, signature: Signature) -> TraceFragment:
    """Parse ``a(b(T), *)``-style fragment text against a signature."""
    ts = TokenStream(tokenize(text))
    frag = _parse_frag(ts, signature)
    ts.expect_eof()
    return frag


def _parse_frag(ts: TokenStream, signature: Signature) -> TraceFragment:
    if ts.at_ident("T"):
        ts.next()
        return TOP_LEAF
    name_tok = ts.expect_label_name()
    if not signature.has(name_tok.text):
        raise ParseError(f"unknown label {name_tok.text!r}", name_tok.line, name_tok.col)
    arity = signature.arity(name_tok.text)
    children: list[TraceFragment] = []
    if ts.at_symbol("("):
        ts.next()
        children.append(_parse_frag(ts, signature))
        while ts.at_symbol(","):
            ts.next()
            children.append(_parse_frag(ts, signature))
        ts.expect_symbol(")")
    if len(children) != arity:
        raise ParseError(
            f"label {name_tok.text!r} has arity {arity}, got {len(children)} child(ren)",
            name_tok.line, name_tok.col)
    return TraceNode(name_tok.text, tuple(children))


def render_fragment(b: TraceFragment) -> str:
    if isinstance(b, TopLeaf):
        return "T"
    if not b.children:
        return b.label
    return f"{b.label}(" + ", ".join(render_fragment(c) for c in b.children) + ")"


def fragment_to_formula(b: TraceFragment) -> Formula:
    """Top leaves become T, nodes become single-disjunct modalities; the
    result is modal-only and qualitative."""
    if isinstance(b, TopLeaf):
        return TOP
    return Modal(((b.label, tuple(fragment_to_formula(c) for c in b.children)),))


def enumerate_fragments(signature: Signature, max_depth: int,
                        cap: int | None = None) -> Iterator[TraceFragment]:
    """All trace fragments of depth at most max_depth, breadth-first
    (shallow fragments first, stable label order within each depth)."""
    count = 0
    by_depth: list[list[TraceFragment]] = [[TOP_LEAF]]
    yield TOP_LEAF
    count += 1
    for d in range(1, max_depth + 1):
        pool = [f for level in by_depth for f in level]  # depth < d
        level: list[TraceFragment] = []
        for label in signature.labels:
            for combo in _tuples(pool, label.arity):
                if label.arity and max(depth(c) for c in combo) != d - 1:
                    continue  # at least one child must reach depth d-1
                frag = TraceNode(label.name, combo)
                if label.arity == 0 and d > 1:
                    continue  # nullary nodes exist only at depth 1
                count += 1
                if cap is not None and count > cap:
                    raise SizingError(
                        f"fragment enumeration exceeds cap {cap} at depth {d}")
                level.append(frag)
                yield frag
        by_depth.append(level)


def _tuples(pool, n):
    if n == 0:
        yield ()
        return
    for head in pool:
        for rest in _tuples(pool, n - 1):
            yield (head,) + rest


def truncations(signature: Signature, n: int, cap: int | None = None) -> Iterator[TraceFragment]:
    """Depth-n truncations of maximal traces: every top leaf under exactly
    n nodes, nullary completions allowed earlier."""
    count = 0
    for frag in _truncs(signature, n):
        count += 1
        if cap is not None and count > cap:
            raise SizingError(f"truncation enumeration exceeds cap {cap} at depth {n}")
        yield frag


def _truncs(signature: Signature, n: int) -> Iterator[TraceFragment]:
    if n == 0:
        yield TOP_LEAF
        return
    for label in signature.labels:
        if label.arity == 0:
            yield TraceNode(label.name, ())
        else:
            for combo in _combos([list(_truncs(signature, n - 1))] * label.arity):
                yield TraceNode(label.name, combo)


def _combos(pools):
    if not pools:
        yield ()
        return
    for head in pools[0]:
        for rest in _combos(pools[1:]):
            yield (head,) + rest


def _require_plain(model: Model, op: str):
    if not model.is_plain:
        raise OffsetUnsupported(f"{op} requires a model without offsets")


def lt(model: Model, state: str, fragment: TraceFragment,
       cfg: EvalConfig | None = None, _extent: Predicate | None = None):
    """Linear-time behaviour of `state` on `fragment`."""
    cfg = cfg or EvalConfig()
    check_fragment(fragment, model.signature)
    ext = _extent if _extent is not None else nu_extent(model, cfg)
    semiring = model.semiring
    memo: dict = {}

    def go(c: str, b: TraceFragment):
        key = (c, b)
        if key in memo:
            return memo[key]
        if isinstance(b, TopLeaf):
            v = ext[c]
        else:
            terms = []
            for t in model.transitions[c]:
                if t.label != b.label:
                    continue
                w = t.weight
                for succ, child in zip(t.successors, b.children):
                    w = semiring.times(w, go(succ, child))
                terms.append(w)
            total = semiring.sum(terms)
            if total is UNDEFINED:
                raise ValidationError(f"behaviour sum undefined at state {c!r}")
            v = semiring.oslash(total, model.offsets[c])
        memo[key] = v
        return v

    return go(state, fragment)


def finite_tr(model: Model, state: str, trace: TraceFragment):
    """Completed-trace behaviour; requires a plain model and a completed
    trace (no top leaves)."""
    _require_plain(model, "finite_tr")
    check_fragment(trace, model.signature)
    if not is_completed(trace):
        raise ValidationError("finite_tr needs a completed trace (no T leaves)")
    semiring = model.semiring
    memo: dict = {}

    def go(c: str, b: TraceNode):
        key = (c, b)
        if key in memo:
            return memo[key]
        terms = []
        for t in model.transitions[c]:
            if t.label != b.label:
                continue
            w = t.weight
            for succ, child in zip(t.successors, b.children):
                w = semiring.times(w, go(succ, child))
            terms.append(w)
        total = semiring.sum(terms)
        if total is UNDEFINED:
            raise ValidationError(f"behaviour sum undefined at state {c!r}")
        memo[key] = total
        return total

    return go(state, trace)


def _check_truncation(b: TraceFragment, n: int, signature: Signature):
    # top leaves under exactly n nodes; nodes only above the cut
    if isinstance(b, TopLeaf):
        if n != 0:
            raise ValidationError("top leaf above the truncation depth")
        return
    if n == 0:
        raise ValidationError("fragment deeper than the truncation depth")
    for c in b.children:
        _check_truncation(c, n - 1, signature)


def tr_approx(model: Model, state: str, truncation: TraceFragment, n: int):
    """Depth-n approximant of the maximal-trace behaviour.

    `truncation` must be a depth-n truncation: top leaves sit under exactly
    n nodes and branches may complete earlier through nullary labels.  The
    base approximant is constant one.
    """
    _require_plain(model, "tr_approx")
    check_fragment(truncation, model.signature)
    _check_truncation(truncation, n, model.signature)
    semiring = model.semiring
    memo: dict = {}

    def go(c: str, b: TraceFragment, k: int):
        if k == 0:
            return semiring.one
        key = (c, b, k)
        if key in memo:
            return memo[key]
        assert isinstance(b, TraceNode)
        terms = []
        for t in model.transitions[c]:
            if t.label != b.label:
                continue
            w = t.weight
            for succ, child in zip(t.successors, b.children):
                w = semiring.times(w, go(succ, child, k - 1))
            terms.append(w)
        total = semiring.sum(terms)
        if total is UNDEFINED:
            raise ValidationError(f"behaviour sum undefined at state {c!r}")
        memo[key] = total
        return total

    return go(state, truncation, n)


@dataclass
class EquivResult:
    equivalent: bool
    witness: TraceFragment | None = None
    left_value: object = None
    right_value: object = None
    fragments_checked: int = 0


def equiv_upto(model: Model, c: str, d: str, max_depth: int,
               kind: Literal["lt", "tr"] = "lt",
               cfg: EvalConfig | None = None) -> EquivResult:
    """Compare two states on every fragment up to `max_depth`.

    kind "lt" ranges over all trace fragments; kind "tr" ranges over
    depth-n truncations for each n up to `max_depth` and compares the
    matching approximants (plain models only).  Values are compared
    exactly on finite carriers and up to cfg.epsilon on probabilistic
    models (both sides share one extent table, so equal behaviours agree
    exactly there too).
    """
    cfg = cfg or EvalConfig()
    semiring = model.semiring
    checked = 0

    def differ(a, b) -> bool:
        if semiring.kind == "probabilistic":
            return abs(a - b) >= cfg.epsilon
        return a != b

    if kind == "lt":
        ext = nu_extent(model, cfg)
        for frag in enumerate_fragments(model.signature, max_depth, cfg.enum_cap):
            checked += 1
            va = lt(model, c, frag, cfg, _extent=ext)
            vb = lt(model, d, frag, cfg, _extent=ext)
            if differ(va, vb):
                return EquivResult(False, frag, va, vb, checked)
        return EquivResult(True, None, None, None, checked)

    _require_plain(model, "equiv_upto(kind='tr')")
    for n in range(max_depth + 1):
        for frag in truncations(model.signature, n, cfg.enum_cap):
            checked += 1
            va = tr_approx(model, c, frag, n)
            vb = tr_approx(model, d, frag, n)
            if differ(va, vb):
                return EquivResult(False, frag, va, vb, checked)
    return EquivResult(True, None, None, None, checked)
