"""End-to-end solution of tester optimization problems.

``solve`` builds the standard-form program, runs the interior-point core on
the real embedding, maps the result back to complex operators, and returns a
validated tester together with a scalar-times-comb certificate: a pair
(lambda, R) with R a valid comb and lambda * R dominating every payoff
operator, which upper-bounds the payoff of *every* admissible strategy.

The certificate comes from the dual chain: the raw dual satisfies its chain
conditions as inequalities, and a mixing correction (add the spread, averaged
over a maximally mixed state on each output) turns them into exact equalities
without breaking positivity.  After that correction the top-level dual
operator divided by the dual objective is a normalized comb.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import (BadParameter, DimensionCap, InvalidComb,
                      NormalizationViolation, NotPSD, NumericalFailure,
                      ShapeMismatch)
from ..estimation import EstimationProblem, payoff_operators
from ..networks import (QuantumComb, Tester, comb_of_state, validate_comb,
                        validate_tester)
from ..operators import LabeledOperator, identity_on, min_eig
from .ipm import SolverOptions, solve_ipm
from .standard_form import (DualState, build_primal, commutant_project,
                            dual_from_y, unembed, y_from_dual, _kron_into_last)


@dataclass(frozen=True)
class CertificateReport:
    """Margins of lambda * R - G_est, one per candidate estimate."""

    lambda_: float
    labels_x: tuple
    margins: tuple
    min_margin: float
    tol: float
    certified: bool
    gamma_bound: float   # equals lambda_: a bound on the stored-payoff optimum
    payoff_shift: float  # subtract from the bound to reach the unshifted score


@dataclass(frozen=True)
class SdpSolution:
    """Optimal tester, matching dual certificate, and convergence data.

    gamma_primal and gamma_dual are reported on the caller's original score
    scale (payoff_shift already subtracted); lambda_ stays on the stored
    nonnegative scale, so lambda_ == gamma_dual + payoff_shift.
    """

    gamma_primal: float
    gamma_dual: float
    tester: Tester
    lambda_: float
    comb_certificate: QuantumComb
    dual: DualState
    gap: float
    rel_gap: float
    iterations: int
    status: str
    payoff_shift: float
    certificate: CertificateReport
    feas_primal: float
    feas_dual: float


def _prefix_factors(space, j: int) -> tuple:
    facs = []
    for i in range(j):
        s = space.steps[i]
        facs.extend([s.out_sys, s.in_sys])
    return tuple(facs)


def slater_point(problem: EstimationProblem) -> DualState:
    """A strictly feasible dual chain of scaled identities.

    The top level dominates every payoff operator with definite margin; each
    step down doubles the traced-out scale, which keeps the chain inequalities
    strict regardless of the step dimensions.
    """
    space = problem.space
    gops = payoff_operators(problem)
    lam_max = max(float(np.linalg.eigvalsh(g.data)[-1]) for g in gops.operators)
    c = max(problem.g_max(), 1.5 * lam_max, 1.0)
    scales = [c]
    for step in reversed(space.steps):
        c = 2.0 * step.out_sys.dim * step.in_sys.dim * c
        scales.append(c)
    scales.reverse()  # scales[j] multiplies the level-j identity, j = 0..N
    ops = []
    for j in range(1, space.num_steps + 1):
        facs = _prefix_factors(space, j)
        ops.append(identity_on(facs) * scales[j])
    return DualState(scales[0], tuple(ops))


def tighten_dual(problem: EstimationProblem, dual: DualState) -> DualState:
    """Promote the chain inequalities to exact equalities, keeping positivity.

    Level by level, the shortfall delta = prev (x) I_in - Tr_out[S] is
    reinstated as (I_out / d_out) (x) delta.  Deltas are PSD for a feasible
    dual, so each corrected level still dominates the original one.
    """
    space = problem.space
    ops = []
    prev = np.array([[dual.s0]], dtype=complex)
    for n in range(1, space.num_steps + 1):
        step = space.steps[n - 1]
        d_out, d_in = step.out_sys.dim, step.in_sys.dim
        sn = dual.operators[n - 1].data
        pre = sn.shape[0] // (d_out * d_in)
        t = sn.reshape(pre, d_out, d_in, pre, d_out, d_in)
        traced = np.trace(t, axis1=1, axis2=4).reshape(pre * d_in, pre * d_in)
        grown = np.kron(prev, np.eye(d_in))
        delta = grown - traced
        corrected = sn + _kron_into_last(delta, d_out, d_in) / d_out
        ops.append(dual.operators[n - 1].with_data(corrected))
        prev = corrected
    return DualState(dual.s0, tuple(ops))


def certify_dual(lambda_: float, comb: QuantumComb, problem: EstimationProblem,
                 tol: float = 1e-7) -> CertificateReport:
    """Check lambda * R >= G_est for all estimates; report per-estimate margins.

    Any pair passing this check proves that no admissible strategy can exceed
    an expected payoff of lambda on the stored scale.
    """
    if lambda_ < 0:
        raise BadParameter("certificate scalar must be nonnegative")
    try:
        comb = validate_comb(comb, max(tol, 1e-8))
    except (NotPSD, NormalizationViolation, ShapeMismatch) as exc:
        raise InvalidComb(str(exc)) from exc
    gops = payoff_operators(problem)
    order = problem.space.factor_ids()
    op = comb.op
    if op.label_ids() != order:
        raise ShapeMismatch("comb factors %r do not match problem space %r"
                            % (op.label_ids(), order))
    margins = []
    for g in gops.operators:
        margins.append(min_eig(g.with_data(lambda_ * op.data - g.data)))
    min_margin = float(min(margins))
    return CertificateReport(float(lambda_), problem.labels_x, tuple(margins),
                             min_margin, tol, min_margin >= -tol,
                             float(lambda_), problem.payoff_shift)


def mixed_comb(space) -> QuantumComb:
    """The maximally mixed valid comb: identity over the product of out dims."""
    factors = space.factors()
    d_out_total = int(np.prod(space.out_dims(), dtype=np.int64))
    op = identity_on(factors) * (1.0 / d_out_total)
    return validate_comb(QuantumComb(space, op))


def _post_project(blocks):
    return [commutant_project(B) for B in blocks]


def solve(problem: EstimationProblem,
          options: Optional[SolverOptions] = None) -> SdpSolution:
    """Optimize a tester for the problem and certify the result.

    Raises DimensionCap when the total block dimension exceeds the configured
    cap, MaxIterations / NumericalFailure when the interior-point loop cannot
    reach the requested tolerance.
    """
    opts = options if options is not None else SolverOptions()
    problem.validated()
    space = problem.space

    total = 0
    d = 1
    for step in space.steps:
        total += 2 * d * step.in_sys.dim
        d *= step.in_sys.dim * step.out_sys.dim
    total += 2 * d * problem.num_params
    if total > opts.dimension_cap:
        raise DimensionCap("total SDP dimension %d exceeds cap %d"
                           % (total, opts.dimension_cap))

    sdp = build_primal(problem)
    X0 = sdp.primal_start()
    y0 = y_from_dual(sdp, slater_point(problem))
    res = solve_ipm(sdp.cmap, sdp.C, sdp.b, X0, y0, opts,
                    post_step=_post_project)

    factors = space.factors()
    outcomes = []
    for k, label in enumerate(problem.labels_x):
        mat = unembed(res.X[sdp.outcome_block(k)])
        mat = (mat + mat.conj().T) / 2.0
        outcomes.append((label, LabeledOperator(factors, mat)))
    check_tol = 10.0 * opts.tol
    dual_raw = dual_from_y(sdp, res.y)
    dual = tighten_dual(problem, dual_raw)
    lambda_ = dual.s0
    top = dual.operators[-1].data
    top = (top + top.conj().T) / 2.0
    try:
        tester = validate_tester(Tester(space, tuple(outcomes)), check_tol)
        comb = validate_comb(
            QuantumComb(space, LabeledOperator(factors, top / lambda_)),
            check_tol)
        report = certify_dual(lambda_, comb, problem, tol=check_tol)
    except (NotPSD, NormalizationViolation, InvalidComb) as exc:
        raise NumericalFailure(
            "converged point failed validation: %s" % exc,
            {"rel_gap": res.rel_gap, "iterations": res.iterations}) from exc
    if not report.certified:
        raise NumericalFailure(
            "dual certificate margin %.3e below -%.1e"
            % (report.min_margin, check_tol),
            {"rel_gap": res.rel_gap, "iterations": res.iterations})

    shift = problem.payoff_shift
    gamma_primal = -res.pobj - shift
    gamma_dual = -res.dobj - shift
    return SdpSolution(gamma_primal, gamma_dual, tester, lambda_, comb, dual,
                       abs(gamma_dual - gamma_primal), res.rel_gap,
                       res.iterations, res.status, shift, report,
                       res.feas_primal, res.feas_dual)


@dataclass(frozen=True)
class YklResult:
    """Minimum-error discrimination: success probability, POVM, and witness.

    The witness operator dominates every weighted state, its trace equals the
    success probability, and the slack reports how far the POVM is from
    complementary slackness with it.
    """

    p_succ: float
    povm: tuple
    witness: LabeledOperator
    slack: float
    solution: SdpSolution


def yuen_kennedy_lax(states: Sequence[LabeledOperator],
                     priors: Sequence[float],
                     options: Optional[SolverOptions] = None) -> YklResult:
    """Best success probability for discriminating the given states.

    Solves the tester program for the preparation combs with the hit-or-miss
    payoff, then reads the measurement and the dual witness off the solution.
    """
    if len(states) < 1:
        raise BadParameter("need at least one state")
    label = states[0].factors[0]
    for s in states:
        if len(s.factors) != 1 or s.factors[0] != label:
            raise ShapeMismatch("states must share a single common system")
    priors = np.asarray(priors, dtype=float)
    combs = tuple(comb_of_state(s) for s in states)
    space = combs[0].space
    n = len(states)
    problem = EstimationProblem(space, tuple(range(n)), priors, combs,
                                np.eye(n))
    sol = solve(problem, options)

    povm = []
    for m, op in sol.tester.outcomes:
        povm.append(LabeledOperator((label,), op.data))
    witness = LabeledOperator((label,), sol.dual.operators[-1].data)
    resid = np.zeros((label.dim, label.dim), dtype=complex)
    for k in range(n):
        gap_op = witness.data - priors[k] * states[k].data
        resid += povm[k].data @ gap_op
    slack = float(np.linalg.norm(resid, 2))
    return YklResult(sol.gamma_primal, tuple(povm), witness, slack, sol)
