"""Independent path-based semantics by brute-force cylinder enumeration.

A path fragment records the states actually visited: leaves at the cut
depth carry just a state, inner nodes carry a state, a label and one child
per label argument.  The uniform-depth fragments from a state have
pairwise disjoint cylinders that jointly cover all maximal paths from it,
so summing cylinder measures over any uniform depth recovers the state's
extent, and summing over the satisfying fragments of a modal formula
computes the formula's value without ever touching the step-wise
evaluator's recursion.

``compare_semantics`` runs both computations on the fixpoint-free
approximant of a formula and reports the per-state discrepancy, which the
two-semantics equivalence pins at zero on exact semirings and within a
certificate-derived tolerance on probabilistic models.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import EvaluationError, SizingError, ValidationError
from .evaluator import (EvalConfig, KleeneReport, Predicate, eval_formula,
                        nu_extent_result)
from .logic import (Formula, Modal, Top, WeightedSum, classify,
                    modal_depth, unroll)
from .model import Model
from .semiring import INF, UNDEFINED, render_scalar


@dataclass(frozen=True)
class StateLeaf:
    state: str


@dataclass(frozen=True)
class PathNode:
    state: str
    label: str
    children: tuple["PathFragment", ...]


PathFragment = StateLeaf | PathNode


def root_state(q: PathFragment) -> str:
    return q.state


def enum_fragments(model: Model, state: str, depth: int, cap: int | None = None):
    """Uniform-depth path fragments from `state`: state leaves exactly at
    the cut depth, branches may complete earlier through nullary labels.
    Depth 0 yields just the state leaf.  The cap is checked against the
    exact fragment count before anything is materialised; enumerated
    fragments share their sub-fragments."""
    if cap is not None:
        n = count_fragments(model, state, depth)
        if n > cap:
            raise SizingError(
                f"{n} path fragments at depth {depth} exceed cap {cap}")
    memo: dict = {}

    def pool(c: str, d: int) -> list:
        key = (c, d)
        if key in memo:
            return memo[key]
        if d == 0:
            out = [StateLeaf(c)]
        else:
            out = []
            for t in model.transitions[c]:
                if not t.successors:
                    out.append(PathNode(c, t.label, ()))
                    continue
                pools = [pool(s, d - 1) for s in t.successors]
                for combo in _product(pools):
                    out.append(PathNode(c, t.label, combo))
        memo[key] = out
        return out

    yield from pool(state, depth)


def _product(pools):
    if not pools:
        yield ()
        return
    for head in pools[0]:
        for rest in _product(pools[1:]):
            yield (head,) + rest


def count_fragments(model: Model, state: str, depth: int) -> int:
    """Number of uniform-depth fragments from `state`, without enumerating."""
    counts = {s: 1 for s in model.states}  # depth 0: the state leaf
    for _ in range(depth):
        nxt = {}
        for s in model.states:
            total = 0
            for t in model.transitions[s]:
                prod = 1
                for succ in t.successors:
                    prod *= counts[succ]
                total += prod
            nxt[s] = total
        counts = nxt
    return counts[state]


def cyl_measure(model: Model, q: PathFragment, cfg: EvalConfig | None = None,
                _extent: Predicate | None = None, _memo: dict | None = None):
    """Measure of the cylinder of `q`: extents at state leaves, transition
    weights multiplied through the children and offset per visited state.

    `_memo`, keyed by fragment identity, lets bulk callers reuse values of
    shared sub-fragments; the caller must keep the fragments alive.
    """
    cfg = cfg or EvalConfig()
    ext = _extent if _extent is not None else nu_extent_result(model, cfg).values
    semiring = model.semiring
    memo = _memo if _memo is not None else {}

    def go(frag: PathFragment):
        key = id(frag)
        if key in memo:
            return memo[key]
        if isinstance(frag, StateLeaf):
            v = ext[frag.state]
        else:
            roots = tuple(root_state(c) for c in frag.children)
            w = model.transition_weight(frag.state, frag.label, roots)
            if w is None:
                raise ValidationError(
                    f"fragment uses missing transition {frag.state} -{frag.label}-> {roots}")
            v = w
            for c in frag.children:
                v = semiring.times(v, go(c))
            v = semiring.oslash(v, model.offsets[frag.state])
        memo[key] = v
        return v

    return go(q)


def frag_sat(q: PathFragment, psi: Formula) -> bool:
    """Qualitative satisfaction of a fixpoint-free formula on a fragment.

    The formula's modal depth must not exceed the fragment's cut depth, so
    the recursion never asks a modal question at a state leaf.
    """
    if isinstance(psi, Top):
        return True
    if isinstance(psi, WeightedSum):
        if psi.terms:
            raise EvaluationError("path satisfaction is defined for the qualitative fragment only")
        return False
    if isinstance(psi, Modal):
        if isinstance(q, StateLeaf):
            raise EvaluationError("formula deeper than the fragment cut")
        for lbl, args in psi.disjuncts:
            if lbl == q.label:
                return all(frag_sat(c, a) for c, a in zip(q.children, args))
        return False
    raise EvaluationError("path satisfaction needs a fixpoint-free formula")


def oracle_eval(model: Model, psi: Formula, state: str, depth: int,
                cfg: EvalConfig | None = None, _extent: Predicate | None = None):
    """Path-based value of a fixpoint-free qualitative formula at a state:
    the total measure of the depth-`depth` fragments satisfying it."""
    cfg = cfg or EvalConfig()
    cls = classify(psi)
    if not (cls.modal_only and cls.qualitative):
        raise EvaluationError("oracle_eval needs a fixpoint-free qualitative formula")
    if depth < cls.modal_depth:
        raise EvaluationError("enumeration depth below the formula's modal depth")
    ext = _extent if _extent is not None else nu_extent_result(model, cfg).values
    semiring = model.semiring
    fragments = list(enum_fragments(model, state, depth, cfg.enum_cap))
    memo: dict = {}
    terms = [cyl_measure(model, q, cfg, _extent=ext, _memo=memo)
             for q in fragments if frag_sat(q, psi)]
    total = semiring.sum(terms)
    if total is UNDEFINED:
        raise EvaluationError(
            "cylinder sum undefined; the enumerated cylinders no longer "
            "partition a set of bounded measure")
    return total


@dataclass
class StateComparison:
    state: str
    stepwise: object
    oracle: object
    difference: object
    verdict: str  # 'ok' | 'mismatch'


@dataclass
class ComparisonReport:
    """Per-state comparison of the step-wise and path-based values of a
    fixpoint-free approximant, plus a non-contractual diagnostic distance
    between the approximant and the original fixpoint formula."""

    semiring: str
    unroll_depth: int
    enum_depth: int
    tolerance: object
    rows: list[StateComparison] = field(default_factory=list)
    max_discrepancy: object = 0
    approximant_distance: object = 0
    certificate: KleeneReport | None = None

    @property
    def ok(self) -> bool:
        return all(r.verdict == "ok" for r in self.rows)

    def to_dict(self, descriptor) -> dict:
        return {
            "semiring": self.semiring,
            "unroll": self.unroll_depth,
            "depth": self.enum_depth,
            "tolerance": _render_diff(self.tolerance),
            "max_discrepancy": _render_diff(self.max_discrepancy),
            "approximant_distance": _render_diff(self.approximant_distance),
            "ok": self.ok,
            "rows": [
                {"state": r.state,
                 "stepwise": render_scalar(r.stepwise, descriptor),
                 "oracle": render_scalar(r.oracle, descriptor),
                 "difference": _render_diff(r.difference),
                 "verdict": r.verdict}
                for r in self.rows
            ],
        }

    def to_text(self, descriptor) -> str:
        lines = [f"semantics cross-check (unroll {self.unroll_depth}, depth {self.enum_depth}, "
                 f"tolerance {_render_diff(self.tolerance)})"]
        for r in self.rows:
            lines.append(f"  {r.state}: stepwise={render_scalar(r.stepwise, descriptor)} "
                         f"oracle={render_scalar(r.oracle, descriptor)} "
                         f"diff={_render_diff(r.difference)} {r.verdict}")
        lines.append(f"  max discrepancy: {_render_diff(self.max_discrepancy)}")
        lines.append(f"  approximant vs fixpoint distance (diagnostic): "
                     f"{_render_diff(self.approximant_distance)}")
        return "\n".join(lines)


def _render_diff(d) -> str:
    if d == INF:
        return "inf"
    if isinstance(d, Fraction):
        return str(d) if d.denominator < 1000 else f"{float(d):.3e}"
    return str(d)


def certificate_tolerance(report: KleeneReport | None, depth: int, n_states: int) -> Fraction:
    """Bound on the step-wise/oracle discrepancy induced by an epsilon-
    converged extent: each enumeration level applies one more unfolding to
    the extent residual, which the certificate bounds."""
    if report is None or report.last_delta is None:
        return Fraction(0)
    residual = report.tail_bound if report.tail_bound is not None else report.last_delta
    return (residual + report.last_delta) * (depth + 2) * max(1, n_states) * 4


def compare_semantics(model: Model, phi: Formula, k: int,
                      cfg: EvalConfig | None = None) -> ComparisonReport:
    """Check the two semantics against each other at unrolling depth k.

    phi must be closed and qualitative.  psi = unroll(phi, k) is evaluated
    step-wise and through the path oracle at the matching enumeration
    depth; on boolean and tropical-family models any nonzero discrepancy
    is a mismatch, on probabilistic models the tolerance comes from the
    extent's convergence certificate.
    """
    cfg = cfg or EvalConfig()
    cls = classify(phi)
    if not (cls.closed and cls.qualitative):
        raise EvaluationError("compare_semantics needs a closed qualitative formula")
    semiring = model.semiring
    psi = unroll(phi, k)
    depth = modal_depth(psi)

    ext_res = nu_extent_result(model, cfg)
    stepwise = eval_formula(model, psi, cfg=cfg)
    tolerance = Fraction(0)
    if semiring.kind == "probabilistic":
        tolerance = certificate_tolerance(ext_res.report, depth, len(model.states))

    report = ComparisonReport(
        semiring=model.descriptor.short_name, unroll_depth=k, enum_depth=depth,
        tolerance=tolerance, certificate=ext_res.report)
    worst = 0
    for state in model.states:
        o = oracle_eval(model, psi, state, depth, cfg, _extent=ext_res.values)
        d = semiring.distance(stepwise[state], o)
        verdict = "ok" if (d == 0 or (semiring.kind == "probabilistic" and d <= tolerance)) \
            else "mismatch"
        report.rows.append(StateComparison(state, stepwise[state], o, d, verdict))
        if d == INF or d > worst:
            worst = d if d != INF else INF
    report.max_discrepancy = worst

    full = eval_formula(model, phi, cfg=cfg)
    report.approximant_distance = max(
        (semiring.distance(full[s], stepwise[s]) for s in model.states),
        key=lambda v: (v == INF, v), default=0)
    return report
