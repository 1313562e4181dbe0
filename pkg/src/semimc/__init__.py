"""Semiring-parametric model checking for quantitative linear-time logics.

Models are finite weighted transition systems over a branching semiring
(boolean, probabilistic, tropical or bounded tropical) with per-state
offsets; formulas form a linear-time fixpoint logic with weighted sums and
disjunctive modalities.  The step-wise evaluator computes denotations by
Kleene iteration, and an independent path-based oracle cross-checks them
through cylinder enumeration.
"""

from .errors import (CarrierError, EvaluationError, NonConvergence,
                     NonMonotoneChain, OffsetUnsupported, ParseError,
                     SemimcError, SizingError, ValidationError)
from .evaluator import (EvalConfig, KleeneReport, KleeneResult, eval_formula,
                        eval_with_certificate, kleene, mu_extent,
                        mu_extent_result, nu_extent, nu_extent_result)
from .logic import (BOT, TOP, Formula, FormulaClass, Modal, Mu, Nu, Top, Var,
                    WeightedSum, alpha_equal, classify, fnd, modal_depth,
                    parse_formula, render_formula, substitute, unroll)
from .model import (Diagnostic, Label, Model, Signature, Transition,
                    parse_model, render_model, validate)
from .path_oracle import (ComparisonReport, PathFragment, PathNode, StateLeaf,
                          compare_semantics, cyl_measure, enum_fragments,
                          frag_sat, oracle_eval)
from .semiring import (INF, UNDEFINED, SemiringDescriptor, parse_scalar,
                       render_scalar, semiring_for, simplest_in_interval)
from .traces import (TOP_LEAF, EquivResult, TopLeaf, TraceFragment, TraceNode,
                     enumerate_fragments, equiv_upto, finite_tr,
                     fragment_to_formula, lt, parse_fragment, render_fragment,
                     tr_approx, truncations)

__version__ = "0.1.0"
