"""Step-wise formula evaluation and extent computation.

Predicates are plain dicts from state name to semiring scalar, defined on
exactly the model's state set.  Fixpoints are computed by Kleene iteration
with a per-semiring stop rule:

* boolean / bounded tropical: exact stabilisation (finite carriers);
* probabilistic: stop once the estimated distance to the limit (per-step
  change scaled by the measured contraction ratio) certifies epsilon
  accuracy, recording a convergence certificate (iteration count, last
  delta, tail bound);
* tropical: exact stabilisation, with any state that grows past
  ``promote_bound`` while still strictly changing promoted to infinity.
  Promotion only arises on chains that increase towards the numeric
  supremum; decreasing chains over the naturals stabilise on their own.

The constant T denotes the greatest-extent predicate, so greatest
fixpoints of formulas are seeded at the interpretation of T, while the
extent computation itself is seeded at the constant-one predicate (the
lattice top).  Both are computed through different code paths: the
dedicated extent routines below, and the Modal evaluation pipeline for
formulas.

Everything here is pure; a shared Model can serve concurrent evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Literal

from .errors import EvaluationError, NonConvergence, NonMonotoneChain
from .logic import Formula, Modal, Mu, Nu, Top, Var, WeightedSum, size
from .model import Model
from .semiring import INF, Semiring, UNDEFINED

Predicate = dict


@dataclass
class EvalConfig:
    """Convergence controls; exactness per semiring is chosen automatically."""

    epsilon: Fraction = Fraction(1, 10**9)
    max_iterations: int = 10**6
    promote_bound: int | None = None  # derived from the model when absent
    enum_cap: int = 200_000

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class KleeneReport:
    iterations: int
    last_delta: Fraction | None = None  # probabilistic stop rule only
    tail_bound: Fraction | None = None  # estimated distance to the limit
    promoted: tuple[str, ...] = ()


@dataclass
class KleeneResult:
    values: Predicate
    report: KleeneReport


def _delta(semiring: Semiring, prev: Predicate, cur: Predicate):
    worst = Fraction(0)
    for k, v in cur.items():
        d = abs(v - prev[k])
        if d > worst:
            worst = d
    return worst


# Probabilistic iterates are kept on a fixed denominator grid once they get
# finer than this; otherwise slowly-mixing chains accumulate denominators of
# thousands of digits and exact arithmetic dominates the runtime.  Rounding
# is directional (towards the start of the chain), so iterates stay monotone
# and on the safe side of the limit; the error per step is below 2^-128,
# orders of magnitude under any epsilon in use.
_DENOM_CAP = 1 << 128
_GRID_ERROR = Fraction(1, 1 << 100)


def _snap_to_grid(v: Fraction, direction: str) -> Fraction:
    if v.denominator <= _DENOM_CAP:
        return v
    scaled = v.numerator * _DENOM_CAP
    n = scaled // v.denominator
    if direction == "gfp" and n * v.denominator != scaled:
        n += 1  # round up: stay above the decreasing chain's limit
    return Fraction(n, _DENOM_CAP)


def kleene(semiring: Semiring,
           operator: Callable[[Predicate], Predicate],
           start: Predicate,
           direction: Literal["lfp", "gfp"],
           cfg: EvalConfig,
           promote_bound: int | None = None,
           force_exact: bool = False) -> KleeneResult:
    """Iterate a monotone operator from `start` until the stop rule fires.

    Chains are checked to stay monotone in the induced order (increasing
    for lfp, decreasing for gfp); a violation raises NonMonotoneChain.
    Raises NonConvergence after cfg.max_iterations, reporting the final
    two iterates.

    With `force_exact`, probabilistic chains run to exact stabilisation on
    the denominator grid instead of the epsilon stop.  Fixpoints nested
    inside another running fixpoint need this: their stopping noise would
    otherwise swamp the enclosing chain's progress and defeat its
    contraction estimate.
    """
    promoting = semiring.kind == "tropical" and direction == "gfp"
    if promoting and promote_bound is None:
        promote_bound = cfg.promote_bound if cfg.promote_bound is not None else 10**6
    # the epsilon stop targets the distance to the limit, estimated from
    # the measured contraction ratio
    margin = cfg.epsilon / 64

    cur = dict(start)
    prev: Predicate | None = None
    promoted: set[str] = set()
    prev_delta: Fraction | None = None
    gridded = False
    for i in range(1, cfg.max_iterations + 1):
        nxt = operator(cur)
        if promoting:
            for s, v in nxt.items():
                if v != INF and v > promote_bound and v != cur[s]:
                    nxt[s] = INF
                    promoted.add(s)
        if semiring.kind == "probabilistic":
            for s, v in nxt.items():
                snapped = _snap_to_grid(v, direction)
                if snapped is not v:
                    gridded = True
                    # directional rounding can overshoot the previous
                    # iterate by one grid step when that iterate sits off
                    # the grid; clamp to keep the chain monotone
                    if direction == "gfp" and snapped > cur[s]:
                        snapped = cur[s]
                    elif direction == "lfp" and snapped < cur[s]:
                        snapped = cur[s]
                    nxt[s] = snapped
        for s in nxt:
            a, b = (cur[s], nxt[s]) if direction == "lfp" else (nxt[s], cur[s])
            if not semiring.leq(a, b):
                raise NonMonotoneChain(
                    f"fixpoint chain left the {direction} direction at state {s!r} "
                    f"(step {i}); seed the iteration below the extent")
        if nxt == cur:
            zero = Fraction(0) if semiring.kind == "probabilistic" else None
            tail = (_GRID_ERROR if gridded else zero)
            return KleeneResult(nxt, KleeneReport(i, zero, tail, tuple(sorted(promoted))))
        if semiring.kind == "probabilistic" and not force_exact:
            d = _delta(semiring, cur, nxt)
            if prev_delta is not None and 0 < d < prev_delta:
                ratio = d / prev_delta
                tail = d * ratio / (1 - ratio)
                if d < margin and tail < margin:
                    return KleeneResult(nxt, KleeneReport(i, d, tail, ()))
            if d < cfg.epsilon ** 2:  # fallback for erratic ratios
                return KleeneResult(nxt, KleeneReport(i, d, d, ()))
            prev_delta = d
        prev, cur = cur, nxt
    raise NonConvergence(
        f"no fixpoint after {cfg.max_iterations} iterations",
        last=cur, previous=prev, iterations=cfg.max_iterations)


def default_promote_bound(model: Model, formula_size: int = 0) -> int:
    """Divergence cutoff for tropical chains: any finite fixpoint value is
    witnessed by a bounded unfolding, so values past this keep growing.

    The witnessing unfolding is a tree, not a path: with labels of arity
    up to A its minimal completed form can hold on the order of A^states
    nodes, so the cutoff carries that branching factor.
    """
    n = max(1, len(model.states))
    max_arity = max((l.arity for l in model.signature.labels), default=1)
    branching = max(1, max_arity) ** min(n, 6)
    return n * (1 + model.max_finite_weight()) * (1 + formula_size) * branching


def _extent_step(model: Model, semiring: Semiring) -> Callable[[Predicate], Predicate]:
    """One unfolding of the transition structure: weighted sum over all
    transitions of the product of successor values, offset by the state's
    own scalar."""
    def step(p: Predicate) -> Predicate:
        out = {}
        for c in model.states:
            terms = []
            for t in model.transitions[c]:
                v = t.weight
                for s in t.successors:
                    v = semiring.times(v, p[s])
                terms.append(v)
            total = semiring.sum(terms)
            if total is UNDEFINED:
                raise EvaluationError(f"transition sum undefined at state {c!r}")
            out[c] = semiring.oslash(total, model.offsets[c])
        return out
    return step


def nu_extent_result(model: Model, cfg: EvalConfig | None = None) -> KleeneResult:
    cfg = cfg or EvalConfig()
    semiring = model.semiring
    start = {c: semiring.one for c in model.states}
    bound = cfg.promote_bound if cfg.promote_bound is not None else default_promote_bound(model)
    return kleene(semiring, _extent_step(model, semiring), start, "gfp", cfg, bound)


def mu_extent_result(model: Model, cfg: EvalConfig | None = None) -> KleeneResult:
    cfg = cfg or EvalConfig()
    semiring = model.semiring
    start = {c: semiring.zero for c in model.states}
    bound = cfg.promote_bound if cfg.promote_bound is not None else default_promote_bound(model)
    return kleene(semiring, _extent_step(model, semiring), start, "lfp", cfg, bound)


def nu_extent(model: Model, cfg: EvalConfig | None = None) -> Predicate:
    """Greatest fixpoint of the one-step extent operator, seeded at one."""
    return nu_extent_result(model, cfg).values


def mu_extent(model: Model, cfg: EvalConfig | None = None) -> Predicate:
    """Least fixpoint of the one-step extent operator, seeded at zero."""
    return mu_extent_result(model, cfg).values


@dataclass
class _EvalContext:
    model: Model
    semiring: Semiring
    cfg: EvalConfig
    promote_bound: int  # for fixpoints of the formula under evaluation
    top_bound: int  # for the embedded extent; matches the dedicated routine
    top: Predicate | None = None
    top_report: KleeneReport | None = None
    fix_depth: int = 0  # number of enclosing fixpoint iterations running


def _run_fixpoint(ctx: _EvalContext, operator, start, direction, bound) -> KleeneResult:
    """Run one fixpoint with body evaluations marked as nested; fixpoints
    already inside a running iteration stabilise exactly on the grid."""
    force_exact = ctx.fix_depth > 0

    def op(p: Predicate) -> Predicate:
        ctx.fix_depth += 1
        try:
            return operator(p)
        finally:
            ctx.fix_depth -= 1

    return kleene(ctx.semiring, op, start, direction, ctx.cfg, bound,
                  force_exact=force_exact)


def _top_predicate(ctx: _EvalContext) -> Predicate:
    """Interpretation of T, computed through the Modal pipeline as the
    greatest fixpoint of the one-step unfolding modality over the full
    signature, seeded at the constant-one predicate."""
    if ctx.top is not None:
        return ctx.top
    var = "@top"
    unfold = Modal(tuple(
        (l.name, tuple(Var(var) for _ in range(l.arity)))
        for l in ctx.model.signature.labels))
    start = {c: ctx.semiring.one for c in ctx.model.states}
    res = _run_fixpoint(ctx, lambda p: _eval(ctx, unfold, {var: p}), start,
                        "gfp", ctx.top_bound)
    ctx.top = res.values
    ctx.top_report = res.report
    return ctx.top


def _eval(ctx: _EvalContext, f: Formula, env: dict) -> Predicate:
    model, semiring = ctx.model, ctx.semiring
    if isinstance(f, Top):
        return _top_predicate(ctx)
    if isinstance(f, Var):
        if f.name not in env:
            raise EvaluationError(f"unbound variable {f.name!r}")
        return env[f.name]
    if isinstance(f, WeightedSum):
        parts = [(c, _eval(ctx, op, env)) for c, op in f.terms]
        out = {}
        for state in model.states:
            total = semiring.sum([semiring.times(c, p[state]) for c, p in parts])
            if total is UNDEFINED:
                raise EvaluationError(f"weighted sum undefined at state {state!r}")
            out[state] = total
        return out
    if isinstance(f, Modal):
        args = {lbl: [_eval(ctx, a, env) for a in arglist] for lbl, arglist in f.disjuncts}
        out = {}
        for state in model.states:
            terms = []
            for t in model.transitions[state]:
                if t.label not in args:
                    continue
                v = t.weight
                for pred, succ in zip(args[t.label], t.successors):
                    v = semiring.times(v, pred[succ])
                terms.append(v)
            total = semiring.sum(terms)
            if total is UNDEFINED:
                raise EvaluationError(f"modal sum undefined at state {state!r}")
            out[state] = semiring.oslash(total, model.offsets[state])
        return out
    if isinstance(f, (Mu, Nu)):
        direction = "lfp" if isinstance(f, Mu) else "gfp"
        if direction == "lfp":
            start = {c: semiring.zero for c in model.states}
        else:
            start = _top_predicate(ctx)

        def op(p: Predicate) -> Predicate:
            inner = dict(env)
            inner[f.var] = p
            return _eval(ctx, f.body, inner)

        return _run_fixpoint(ctx, op, start, direction, ctx.promote_bound).values
    raise TypeError(f"not a formula: {f!r}")


def _check_valuation(model: Model, valuation: dict[str, Predicate] | None):
    for name, pred in (valuation or {}).items():
        if set(pred) != set(model.states):
            raise EvaluationError(
                f"valuation for {name!r} is not a total map over the states")


def _context_for(model: Model, formula: Formula, cfg: EvalConfig) -> _EvalContext:
    if cfg.promote_bound is not None:
        formula_bound = top_bound = cfg.promote_bound
    elif model.descriptor.kind != "tropical":
        formula_bound = top_bound = 0  # promotion never applies
    else:
        formula_bound = default_promote_bound(model, size(formula))
        top_bound = default_promote_bound(model)
    return _EvalContext(model, model.semiring, cfg, formula_bound, top_bound)


def eval_formula(model: Model, formula: Formula,
                 valuation: dict[str, Predicate] | None = None,
                 cfg: EvalConfig | None = None) -> Predicate:
    """Denotation of `formula` on `model` as a predicate over its states.

    `valuation` must cover the free variables.  Greatest fixpoints are
    seeded at the interpretation of T; least fixpoints at constant zero.
    """
    cfg = cfg or EvalConfig()
    _check_valuation(model, valuation)
    ctx = _context_for(model, formula, cfg)
    return _eval(ctx, formula, dict(valuation or {}))


def eval_with_certificate(model: Model, formula: Formula,
                          valuation: dict[str, Predicate] | None = None,
                          cfg: EvalConfig | None = None) -> tuple[Predicate, KleeneReport | None]:
    """Like eval_formula, also returning the convergence certificate of the
    embedded extent computation (None when T never had to be computed)."""
    cfg = cfg or EvalConfig()
    _check_valuation(model, valuation)
    ctx = _context_for(model, formula, cfg)
    values = _eval(ctx, formula, dict(valuation or {}))
    return values, ctx.top_report


def leq_pointwise(semiring: Semiring, p: Predicate, q: Predicate) -> bool:
    return all(semiring.leq(p[k], q[k]) for k in p)
