"""Group-covariant problems: twirling, invariant-domination programs, phases.

For a finite group acting on the parameter set, with a payoff that only
depends on group-relative displacement and process operators forming an
orbit, the full tester optimization collapses to a much smaller question:
how large a multiple of the weighted seed operator fits under an invariant
state (or comb).  ``covariant_gamma`` runs that reduced program and returns
gamma_max = gamma_0 / q_max together with the invariant optimizer.

The phase-estimation helpers cover the standard cyclic-group instances:
single-phase optima on d levels, the correlated two-phase payoff, and the
entangled-versus-product cost of estimating a sum of phases.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import (BadDimension, BadParameter, NotLeftInvariant,
                     ShapeMismatch)
from .estimation import EstimationProblem, problem_from_raw_payoff
from .networks import (CombSpace, QuantumComb, choi_of_channel,
                       comb_of_memoryless_sequence, validate_comb)
from .operators import LabeledOperator, SystemLabel
from .sdp.ipm import BlockConstraintMap, ConstraintEntry, SolverOptions, solve_ipm
from .sdp.standard_form import (coords_from_hermitian, embed, embed_stack,
                                hermitian_basis_stack, unembed)

HOMOMORPHISM_TOL = 1e-10
INVARIANCE_TOL = 1e-10


@dataclass
class FiniteGroupAction:
    """A finite group with a (projective) unitary action on labeled factors.

    table[i, j] is the index of elements[i] * elements[j].  rep maps a label
    id to one unitary per element; labels absent from rep are acted on
    trivially.  Labels listed in `conjugated` use the entrywise conjugate of
    their representative (the natural action on input factors of Choi
    operators).
    """

    elements: tuple
    table: np.ndarray
    rep: Mapping
    conjugated: frozenset = frozenset()

    def __post_init__(self):
        self.elements = tuple(self.elements)
        n = len(self.elements)
        table = np.asarray(self.table, dtype=int)
        if table.shape != (n, n) or table.min() < 0 or table.max() >= n:
            raise BadParameter("composition table is not an %d x %d index table" % (n, n))
        self.table = table
        self.conjugated = frozenset(self.conjugated)
        ident = None
        for e in range(n):
            if np.array_equal(table[e], np.arange(n)) and \
                    np.array_equal(table[:, e], np.arange(n)):
                ident = e
                break
        if ident is None:
            raise BadParameter("table has no identity element")
        self.identity_index = ident
        for lid, mats in self.rep.items():
            for g in range(n):
                u = np.asarray(mats[self.elements[g]], dtype=complex)
                d = u.shape[0]
                if u.shape != (d, d) or \
                        np.max(np.abs(u.conj().T @ u - np.eye(d))) > HOMOMORPHISM_TOL:
                    raise BadParameter("rep[%r][%r] is not unitary" % (lid, self.elements[g]))
            for g in range(n):
                for h in range(n):
                    ug = np.asarray(mats[self.elements[g]], dtype=complex)
                    uh = np.asarray(mats[self.elements[h]], dtype=complex)
                    ugh = np.asarray(mats[self.elements[table[g, h]]], dtype=complex)
                    prod = ugh.conj().T @ (ug @ uh)
                    d = prod.shape[0]
                    phase = np.trace(prod) / d
                    if abs(abs(phase) - 1.0) > HOMOMORPHISM_TOL or \
                            np.max(np.abs(prod - phase * np.eye(d))) > 1e-9:
                        raise BadParameter(
                            "rep[%r] is not a homomorphism up to phase at (%r, %r)"
                            % (lid, self.elements[g], self.elements[h]))

    @property
    def size(self) -> int:
        return len(self.elements)

    def index_of(self, element) -> int:
        return self.elements.index(element)

    def compose(self, a, b):
        return self.elements[self.table[self.index_of(a), self.index_of(b)]]

    def unitary_for(self, element, factors: Sequence[SystemLabel]) -> np.ndarray:
        """Kronecker product of the per-factor representatives."""
        u = np.eye(1, dtype=complex)
        for f in factors:
            if f.id in self.rep:
                m = np.asarray(self.rep[f.id][element], dtype=complex)
                if m.shape != (f.dim, f.dim):
                    raise ShapeMismatch(
                        "rep[%r] has shape %r for dim-%d factor" % (f.id, m.shape, f.dim))
                if f.id in self.conjugated:
                    m = m.conj()
            else:
                m = np.eye(f.dim, dtype=complex)
            u = np.kron(u, m)
        return u


def act(action: FiniteGroupAction, element, op: LabeledOperator) -> LabeledOperator:
    u = action.unitary_for(element, op.factors)
    return op.with_data(u @ op.data @ u.conj().T)


def twirl(op: LabeledOperator, action: FiniteGroupAction) -> LabeledOperator:
    """Group average of the conjugation action; idempotent, trace preserving."""
    acc = np.zeros_like(np.asarray(op.data, dtype=complex))
    for element in action.elements:
        u = action.unitary_for(element, op.factors)
        acc += u @ op.data @ u.conj().T
    return op.with_data(acc / action.size)


def is_invariant(op: LabeledOperator, action: FiniteGroupAction,
                 tol: float = INVARIANCE_TOL) -> bool:
    scale = 1.0 + float(np.max(np.abs(op.data)))
    for element in action.elements:
        u = action.unitary_for(element, op.factors)
        if np.max(np.abs(u @ op.data @ u.conj().T - op.data)) > tol * scale:
            return False
    return True


def cyclic_group(n: int) -> Tuple[tuple, np.ndarray]:
    elements = tuple(range(n))
    table = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    return elements, table


def product_group(ea, ta, eb, tb) -> Tuple[tuple, np.ndarray]:
    """Direct product; elements are (a, b) pairs in itertools.product order."""
    elements = tuple(itertools.product(ea, eb))
    na, nb = len(ea), len(eb)
    table = np.zeros((na * nb, na * nb), dtype=int)
    for i, (a1, b1) in enumerate(elements):
        for j, (a2, b2) in enumerate(elements):
            a = ta[ea.index(a1), ea.index(a2)]
            b = tb[eb.index(b1), eb.index(b2)]
            table[i, j] = a * nb + b
    return elements, table


# ---------------------------------------------------------------------------
# invariant-domination programs (q_max)
# ---------------------------------------------------------------------------


def traceless_hermitian_basis_stack(d: int) -> np.ndarray:
    """Orthonormal Hermitian basis of the traceless subspace, (d^2-1, d, d)."""
    full = hermitian_basis_stack(d)
    mats = [full[k] for k in range(d, d * d)]  # off-diagonal part is traceless
    for k in range(1, d):
        h = np.zeros((d, d), dtype=complex)
        h[np.diag_indices(d)[0][:k], np.diag_indices(d)[1][:k]] = 1.0
        h[k, k] = -k
        mats.append(h / np.sqrt(k * (k + 1)))
    return np.stack(mats)


@dataclass(frozen=True)
class CovariantResult:
    """Reduced covariant optimum: gamma_max * q_max = gamma_0."""

    gamma_max: float
    q_max: float
    gamma_0: float
    invariant_op: LabeledOperator
    gap: float
    iterations: int


def _comb_structure_rows(space: CombSpace):
    """Constraint tensors expressing 'R is a valid comb' on the full space.

    One overall trace row (value prod of input dims), then for each step n a
    block of rows pairing a full basis of the step prefix with a traceless
    basis of the step input: those inner products vanish exactly when the
    partial trace over the step output factorizes with an identity input.
    """
    d_in = space.in_dims()
    d_out = space.out_dims()
    n_steps = space.num_steps
    D = space.total_dim()
    prefix = [1]
    for j in range(n_steps):
        prefix.append(prefix[-1] * d_out[j] * d_in[j])
    tensors = []
    row_counts = []
    for n in range(1, n_steps + 1):
        q = d_in[n - 1]
        if q == 1:
            continue
        pre_basis = hermitian_basis_stack(prefix[n - 1])
        tl_basis = traceless_hermitian_basis_stack(q)
        o = d_out[n - 1]
        rest = D // (prefix[n - 1] * o * q)
        later_in = int(np.prod(d_in[n:], dtype=np.int64))
        # coefficient (E_pre (x) I_out (x) F_in (x) I_rest) / later_in
        p = prefix[n - 1]
        grown = np.einsum("aij,kl->aikjl", pre_basis,
                          np.eye(o, dtype=complex)).reshape(len(pre_basis),
                                                            p * o, p * o)
        paired = np.einsum("aij,bkl->abikjl", grown, tl_basis).reshape(
            len(pre_basis) * len(tl_basis), p * o * q, p * o * q)
        full = np.einsum("xij,kl->xikjl", paired,
                         np.eye(rest, dtype=complex)).reshape(
                             paired.shape[0], D, D)
        tensors.append(full / later_in)
        row_counts.append(full.shape[0])
    return tensors, row_counts


def _qmax_solve(space: CombSpace, seed: np.ndarray, action: FiniteGroupAction,
                options: Optional[SolverOptions] = None):
    """max t such that R is a comb, M >= 0, twirl(R) - t*seed = M.

    Blocks are (R, M, t); all equality rows are exact at the feasible start
    (mixed comb, small t), so the interior-point core runs in feasible mode.
    """
    opts = options if options is not None else SolverOptions()
    factors = space.factors()
    D = space.total_dim()
    in_total = space.total_in_dim()
    out_total = D // in_total

    struct_tensors, struct_counts = _comb_structure_rows(space)
    n_struct = sum(struct_counts)
    basis = hermitian_basis_stack(D)
    m = 1 + n_struct + D * D

    twirled = np.zeros_like(basis)
    for element in action.elements:
        u = action.unitary_for(element, factors)
        twirled += np.einsum("ij,ajk,kl->ail", u, basis, u.conj().T)
    twirled /= action.size

    entries = []
    eyeD = np.eye(D, dtype=complex)[None, :, :]
    entries.append(ConstraintEntry(0, 1, 0, embed_stack(eyeD)))
    off = 1
    for t in struct_tensors:
        entries.append(ConstraintEntry(off, off + t.shape[0], 0, embed_stack(t)))
        off += t.shape[0]
    entries.append(ConstraintEntry(off, m, 0, embed_stack(twirled)))
    entries.append(ConstraintEntry(off, m, 1, embed_stack(basis, scale=-0.5)))
    seed_coords = coords_from_hermitian(seed)
    t_tensor = np.zeros((D * D, 2, 2))
    t_tensor[:, 0, 0] = -seed_coords / 2.0
    t_tensor[:, 1, 1] = -seed_coords / 2.0
    entries.append(ConstraintEntry(off, m, 2, t_tensor))

    cmap = BlockConstraintMap(m, (2 * D, 2 * D, 2), entries)
    b = np.zeros(m)
    b[0] = float(in_total)
    C = (np.zeros((2 * D, 2 * D)), np.zeros((2 * D, 2 * D)),
         -0.5 * np.eye(2))

    mixed = np.eye(D) / out_total
    lam_seed = float(np.linalg.eigvalsh((seed + seed.conj().T) / 2.0)[-1])
    if lam_seed <= 0:
        raise BadParameter("seed operator has no positive part")
    t0 = 0.5 / (out_total * lam_seed)
    M0 = mixed - t0 * seed  # twirl(mixed) = mixed
    X0 = [embed(mixed), embed(M0), t0 * np.eye(2)]
    y0 = np.zeros(m)
    y0[0] = -4.0 / in_total
    y0[off:] = coords_from_hermitian((2.0 / in_total) * np.eye(D))

    def project(blocks):
        return [embed(unembed(B)) for B in blocks[:2]] + \
            [np.eye(2) * (float(np.trace(blocks[2])) / 2.0)]

    res = solve_ipm(cmap, C, b, X0, y0, opts, post_step=project)
    q = -res.pobj
    r_data = unembed(res.X[0])
    r_data = (r_data + r_data.conj().T) / 2.0
    inv = twirl(LabeledOperator(factors, r_data), action)
    return q, inv, res


def qmax_state(rho0: LabeledOperator, action: FiniteGroupAction,
               options: Optional[SolverOptions] = None):
    """Largest q with q * rho0 dominated by an invariant state.

    Returns (q_max, rho) with rho the invariant optimizer.  For the
    hit-or-miss payoff with a uniform prior over the orbit, the best success
    probability is 1 / (orbit size * q_max).
    """
    if len(rho0.factors) != 1:
        raise ShapeMismatch("expected a single-factor state")
    out_sys = rho0.factors[0]
    if abs(float(np.trace(rho0.data).real) - 1.0) > 1e-8:
        raise BadParameter("seed state trace deviates from 1")
    in_sys = SystemLabel(out_sys.id + "#src", 1)
    space = CombSpace(((in_sys, out_sys),))
    q, inv, _res = _qmax_solve(space, np.asarray(rho0.data, dtype=complex),
                               action, options)
    rho = LabeledOperator((out_sys,), inv.data)
    return q, rho


def qmax_comb(comb0: QuantumComb, action: FiniteGroupAction,
              options: Optional[SolverOptions] = None):
    """Comb version of qmax_state: domination within invariant combs."""
    comb0 = validate_comb(comb0)
    q, inv, _res = _qmax_solve(comb0.space, np.asarray(comb0.op.data, dtype=complex),
                               action, options)
    opts = options if options is not None else SolverOptions()
    comb = validate_comb(QuantumComb(comb0.space, inv), 100.0 * opts.tol)
    return q, comb


def covariant_gamma(problem: EstimationProblem, action: FiniteGroupAction,
                    options: Optional[SolverOptions] = None) -> CovariantResult:
    """Optimal payoff of a covariant problem via the reduced invariant program.

    Requires parameter labels equal to the group elements, a uniform prior, a
    left-invariant payoff, and combs forming an orbit of the action; verifies
    all four and raises NotLeftInvariant / BadParameter otherwise.
    """
    if problem.labels_x != action.elements:
        raise BadParameter("problem labels %r must equal the group elements"
                           % (problem.labels_x,))
    n = action.size
    if np.max(np.abs(problem.prior - 1.0 / n)) > 1e-9:
        raise BadParameter("covariant reduction requires a uniform prior")
    g = problem.payoff
    for y in range(n):
        shuffled = g[np.ix_(action.table[y], action.table[y])]
        if np.max(np.abs(shuffled - g)) > 1e-9:
            raise NotLeftInvariant(
                "payoff changes under left translation by %r" % (action.elements[y],))
    order = problem.space.factor_ids()
    mats = []
    for c in problem.combs:
        op = c.op
        if op.label_ids() != order:
            raise ShapeMismatch("comb out of canonical factor order")
        mats.append(np.asarray(op.data, dtype=complex))
    factors = problem.space.factors()
    scale = 1.0 + max(float(np.max(np.abs(r))) for r in mats)
    for gi in range(n):
        u = action.unitary_for(action.elements[gi], factors)
        for x in range(n):
            moved = u @ mats[x] @ u.conj().T
            if np.max(np.abs(moved - mats[action.table[gi, x]])) > 1e-8 * scale:
                raise NotLeftInvariant(
                    "combs do not form an orbit of the action (element %r)"
                    % (action.elements[gi],))

    e = action.identity_index
    weights = g[e] / n
    gamma_0 = float(weights.sum())
    if gamma_0 <= 1e-14:
        raise BadParameter("payoff row at the identity is all zero")
    seed = sum(w * r for w, r in zip(weights, mats)) / gamma_0
    seed = (seed + seed.conj().T) / 2.0
    q, inv, res = _qmax_solve(problem.space, seed, action, options)
    return CovariantResult(gamma_0 / q, q, gamma_0, inv,
                           res.gap, res.iterations)


# ---------------------------------------------------------------------------
# cyclic phase instances
# ---------------------------------------------------------------------------


def phase_action(out_sys: SystemLabel, in_sys: Optional[SystemLabel],
                 grid: int) -> FiniteGroupAction:
    """Cyclic phase group diag(1, w, w^2, ...) with w = exp(2 pi i / grid).

    The output factor carries the representation; the input factor, when
    given, is acted on trivially (phases are applied after the process).
    """
    elements, table = cyclic_group(grid)
    levels = np.arange(out_sys.dim)
    rep_out = {}
    for j in range(grid):
        rep_out[j] = np.diag(np.exp(2 * np.pi * 1j * j * levels / grid))
    return FiniteGroupAction(elements, table, {out_sys.id: rep_out})


def phase_grid_problem(levels: int, grid: Optional[int] = None
                       ) -> Tuple[EstimationProblem, FiniteGroupAction]:
    """Discretized phase estimation on `levels` levels with payoff 1 + cos.

    The cyclic grid defaults to 2*levels + 2; anything at least twice the
    top level plus two reproduces the continuous optimum exactly because the
    payoff has frequency support {-1, 0, 1}.
    """
    if levels < 2:
        raise BadDimension("need at least 2 levels, got %d" % levels)
    if grid is None:
        grid = 2 * levels + 2
    if grid < 2 * levels:
        raise BadParameter("grid %d is below the alias-free minimum %d"
                           % (grid, 2 * levels))
    in_sys = SystemLabel("ph_in", levels)
    out_sys = SystemLabel("ph_out", levels)
    combs = []
    for j in range(grid):
        u = np.diag(np.exp(2 * np.pi * 1j * j * np.arange(levels) / grid))
        combs.append(comb_of_memoryless_sequence(
            [choi_of_channel([u], in_sys, out_sys)]))
    prior = np.full(grid, 1.0 / grid)
    payoff = 1.0 + np.cos(2 * np.pi * (np.arange(grid)[:, None]
                                       - np.arange(grid)[None, :]) / grid)
    problem = EstimationProblem(combs[0].space, tuple(range(grid)), prior,
                                tuple(combs), payoff, payoff_shift=1.0)
    return problem, phase_action(out_sys, in_sys, grid)


@dataclass(frozen=True)
class PhaseOptimum:
    """Best expected cos(error) and minimal cost 2(1 - cos) on d levels.

    quoted_value carries the frequently quoted closed form 4 sin^2(pi/(2d));
    it agrees with c_min only asymptotically (the exact value is
    4 sin^2(pi / (2(d+1)))), so it is reported and flagged, never asserted.
    """

    levels: int
    cos_max: float
    c_min: float
    coefficients: np.ndarray
    quoted_value: float
    quoted_matches: bool


def phase_estimation_optimum(levels: int) -> PhaseOptimum:
    """Oracle optimum: top of the tridiagonal matrix with 1/2 off-diagonal."""
    if levels < 2:
        raise BadDimension("need at least 2 levels, got %d" % levels)
    vals, vecs = eigh_tridiagonal(np.zeros(levels), np.full(levels - 1, 0.5),
                                  select="i",
                                  select_range=(levels - 1, levels - 1))
    cos_max = float(vals[0])
    e = vecs[:, 0]
    if e.sum() < 0:
        e = -e
    c_min = 2.0 * (1.0 - cos_max)
    quoted = float(4.0 * np.sin(np.pi / (2 * levels)) ** 2)
    return PhaseOptimum(levels, cos_max, c_min, e, quoted,
                        abs(quoted - c_min) <= 1e-9)


@dataclass(frozen=True)
class TwoPhaseOptimum:
    """Best payoff for the correlated two-phase score and its input state."""

    p: float
    gamma_max: float
    state: np.ndarray  # amplitudes on |00>, |01>, |10>, |11>
    degenerate: bool


def two_phase_correlated(p: float) -> TwoPhaseOptimum:
    """Closed-form optimum max{p, 1-p}/2 of the correlated two-phase payoff.

    The optimizer is the even Bell state for p > 1/2 and the odd one for
    p < 1/2; at p = 1/2 the optimum is degenerate and a product state does
    as well, so that representative is returned with the degenerate flag.
    """
    if not 0.0 <= p <= 1.0:
        raise BadParameter("p must lie in [0, 1], got %r" % (p,))
    gamma = max(p, 1.0 - p) / 2.0
    if p > 0.5:
        state = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0)
        degenerate = False
    elif p < 0.5:
        state = np.array([0.0, 1.0, 1.0, 0.0]) / np.sqrt(2.0)
        degenerate = False
    else:
        state = np.full(4, 0.5)
        degenerate = True
    return TwoPhaseOptimum(p, gamma, state, degenerate)


def two_phase_payoff_matrix(p: float) -> np.ndarray:
    """The 4x4 quadratic form whose top eigenvalue is the two-phase optimum."""
    g = np.zeros((4, 4))
    g[0, 3] = g[3, 0] = p / 2.0
    g[1, 2] = g[2, 1] = (1.0 - p) / 2.0
    return g


def two_phase_problem(p: float, d_grid: int = 8
                      ) -> Tuple[EstimationProblem, FiniteGroupAction]:
    """Two independent phase channels scored by the correlated cos payoff.

    Parameters are pairs (j, k) on a Z_d_grid x Z_d_grid grid; the stored
    payoff is 1 + p cos(da + db) + (1 - p) cos(da - db) with the unit shift
    recorded, so solver outputs land back on the +/- cos scale.
    """
    if not 0.0 <= p <= 1.0:
        raise BadParameter("p must lie in [0, 1], got %r" % (p,))
    if d_grid < 4:
        raise BadParameter("phase grid must have at least 4 points")
    in_sys = SystemLabel("tp_in", 4)
    out_sys = SystemLabel("tp_out", 4)
    angles = 2 * np.pi * np.arange(d_grid) / d_grid
    combs = []
    labels = []
    for j in range(d_grid):
        ua = np.diag([1.0, np.exp(1j * angles[j])])
        for k in range(d_grid):
            ub = np.diag([1.0, np.exp(1j * angles[k])])
            combs.append(comb_of_memoryless_sequence(
                [choi_of_channel([np.kron(ua, ub)], in_sys, out_sys)]))
            labels.append((j, k))
    n = d_grid * d_grid
    raw = np.zeros((n, n))
    for ih, (jh, kh) in enumerate(labels):
        for i, (j, k) in enumerate(labels):
            da = angles[(jh - j) % d_grid]
            db = angles[(kh - k) % d_grid]
            raw[ih, i] = p * np.cos(da + db) + (1.0 - p) * np.cos(da - db)
    problem = problem_from_raw_payoff(combs[0].space, tuple(labels),
                                      np.full(n, 1.0 / n), tuple(combs), raw)

    ea, ta = cyclic_group(d_grid)
    elements, table = product_group(ea, ta, ea, ta)
    rep_out = {}
    for (j, k) in elements:
        rep_out[(j, k)] = np.kron(np.diag([1.0, np.exp(1j * angles[j])]),
                                  np.diag([1.0, np.exp(1j * angles[k])]))
    action = FiniteGroupAction(elements, table, {out_sys.id: rep_out})
    return problem, action


@dataclass(frozen=True)
class SumOfPhases:
    """Cost of estimating a sum of independent phases: joint vs per-system."""

    levels: int
    copies: int
    c_entangled: float
    c_product: float
    ratio: float


def sum_of_phases(levels: int, copies: int) -> SumOfPhases:
    """Entangled versus product cost for the sum of `copies` phases.

    A joint probe confined to the equal-level subspace sees the sum as a
    single phase, so its cost is the one-system optimum, independent of K.
    Independent probes compound: the expected cosine of a sum of independent
    symmetric errors is the product of the individual expected cosines.
    """
    if copies < 1:
        raise BadParameter("copies must be >= 1, got %d" % copies)
    single = phase_estimation_optimum(levels)
    c_ent = single.c_min
    lam = single.cos_max
    c_prod = 2.0 * (1.0 - lam ** copies)
    return SumOfPhases(levels, copies, c_ent, c_prod, c_prod / c_ent)
