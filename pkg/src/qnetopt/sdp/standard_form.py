"""Tester optimization as a block-diagonal SDP in standard form.

Variable blocks are the tester chain operators Xi^(1)..Xi^(N) followed by one
outcome operator per candidate estimate.  The equality constraints are the
tester normalization recursion, written level by level:

    level 0:      Tr_in1[Xi^(1)] = 1
    level j:      Tr_in(j+1)[Xi^(j+1)] - I_out(j) (x) Xi^(j) = 0     (1 <= j < N)
    level N:      sum_est T_est - I_out(N) (x) Xi^(N) = 0

and the objective is  max sum_est <G_est, T_est>.

Complex Hermitian blocks are embedded as real symmetric blocks
[[Re, -Im], [Im, Re]]; inner products double under the embedding, so objective
and constraint coefficients are halved to keep all row values and objective
numbers on the original complex scale.  Constraint rows are indexed by a
complex Hermitian basis of each level's operator space only, which keeps the
row count at 1 + sum_j D_j^2 and the Schur complement positive definite.

Chain operators use the factor order (out_1, in_1, ..., out_{j-1}, in_{j-1},
in_j); with that choice every coefficient is either a basis element, a basis
element with an identity appended, or a partial trace of one, and no factor
permutations appear in the hot path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..errors import ShapeMismatch
from ..estimation import EstimationProblem, PayoffOperators, payoff_operators
from ..operators import LabeledOperator
from .ipm import BlockConstraintMap, ConstraintEntry

# ---------------------------------------------------------------------------
# real embedding of complex Hermitian matrices
# ---------------------------------------------------------------------------


def embed(h: np.ndarray) -> np.ndarray:
    """Complex (n, n) -> real (2n, 2n) via [[Re, -Im], [Im, Re]]."""
    h = np.asarray(h, dtype=complex)
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def unembed(m: np.ndarray) -> np.ndarray:
    """Left inverse of embed; averages the two copies."""
    n = m.shape[0] // 2
    return (m[:n, :n] + m[n:, n:]) / 2.0 + 1j * (m[n:, :n] - m[:n, n:]) / 2.0


def commutant_project(m: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto the image of embed (a PSD-preserving average)."""
    return embed(unembed(m))


_basis_cache = {}


def hermitian_basis_stack(d: int) -> np.ndarray:
    """Orthonormal Hermitian basis of C^{d x d}, stacked as a (d^2, d, d) array.

    Order: diagonal units, then (e_ij + e_ji)/sqrt2 for i<j, then
    i(e_ij - e_ji)/sqrt2 for i<j.
    """
    if d in _basis_cache:
        return _basis_cache[d]
    mats = np.zeros((d * d, d, d), dtype=complex)
    k = 0
    for i in range(d):
        mats[k, i, i] = 1.0
        k += 1
    r = 1.0 / np.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            mats[k, i, j] = r
            mats[k, j, i] = r
            k += 1
    for i in range(d):
        for j in range(i + 1, d):
            mats[k, i, j] = 1j * r
            mats[k, j, i] = -1j * r
            k += 1
    mats.setflags(write=False)
    _basis_cache[d] = mats
    return mats


def hermitian_from_coords(coords: np.ndarray, d: int) -> np.ndarray:
    return np.tensordot(np.asarray(coords), hermitian_basis_stack(d), axes=1)


def coords_from_hermitian(h: np.ndarray) -> np.ndarray:
    d = h.shape[0]
    stack = hermitian_basis_stack(d)
    return np.tensordot(stack.conj(), h, axes=([1, 2], [0, 1])).real


def embed_stack(mats: np.ndarray, scale: float = 0.5) -> np.ndarray:
    """Embed a (r, n, n) complex stack into a (r, 2n, 2n) real tensor, scaled."""
    r, n, _ = mats.shape
    out = np.zeros((r, 2 * n, 2 * n))
    out[:, :n, :n] = mats.real
    out[:, n:, n:] = mats.real
    out[:, n:, :n] = mats.imag
    out[:, :n, n:] = -mats.imag
    return out * scale


def trace_middle(mats: np.ndarray, pre: int, mid: int, post: int) -> np.ndarray:
    """Partial trace of a (r, pre*mid*post, ...) stack over the middle factor."""
    r = mats.shape[0]
    t = mats.reshape(r, pre, mid, post, pre, mid, post)
    return np.trace(t, axis1=2, axis2=5).reshape(r, pre * post, pre * post)


# ---------------------------------------------------------------------------
# the tester SDP
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StandardSdp:
    """Block structure, objective, constraint map, and right-hand side."""

    problem: EstimationProblem
    payoff_ops: PayoffOperators
    cdims: tuple          # complex side of each variable block
    block_dims: tuple     # embedded real side of each variable block
    level_dims: tuple     # complex side of each constraint level space, 1..N
    level_offsets: tuple  # row offset of each level, level 0 at offset 0
    xi_factors: tuple     # factor tuples for Xi^(1)..Xi^(N)
    cmap: BlockConstraintMap
    C: tuple              # real objective blocks (min <C, X> convention)
    b: np.ndarray

    @property
    def num_steps(self) -> int:
        return self.problem.space.num_steps

    @property
    def num_outcomes(self) -> int:
        return self.problem.num_params

    def xi_block(self, j: int) -> int:
        """Variable-block index of Xi^(j), 1-based j."""
        return j - 1

    def outcome_block(self, k: int) -> int:
        return self.num_steps + k

    def level_rows(self, j: int) -> slice:
        start = self.level_offsets[j]
        stop = self.level_offsets[j + 1] if j + 1 < len(self.level_offsets) \
            else self.cmap.m
        return slice(start, stop)

    def primal_start(self) -> List[np.ndarray]:
        """The uniform tester chain: strictly feasible, all equalities exact."""
        space = self.problem.space
        blocks = []
        c = 1.0
        for j in range(1, self.num_steps + 1):
            c = c / space.steps[j - 1].in_sys.dim
            blocks.append(c * np.eye(self.block_dims[self.xi_block(j)]))
        t_val = c / self.num_outcomes
        for k in range(self.num_outcomes):
            blocks.append(t_val * np.eye(self.block_dims[self.outcome_block(k)]))
        return blocks


def build_primal(problem: EstimationProblem) -> StandardSdp:
    """Assemble blocks, objective, and the structured constraint map."""
    space = problem.space
    n_steps = space.num_steps
    d_in = space.in_dims()
    d_out = space.out_dims()

    # prefix dims D_j = prod_{i<=j} d_out_i * d_in_i, D_0 = 1
    prefix = [1]
    for j in range(n_steps):
        prefix.append(prefix[-1] * d_out[j] * d_in[j])

    cdims = []
    xi_factors = []
    for j in range(1, n_steps + 1):
        facs = []
        for i in range(j - 1):
            s = space.steps[i]
            facs.extend([s.out_sys, s.in_sys])
        facs.append(space.steps[j - 1].in_sys)
        xi_factors.append(tuple(facs))
        cdims.append(prefix[j - 1] * d_in[j - 1])
    for _ in range(problem.num_params):
        cdims.append(prefix[n_steps])
    block_dims = [2 * c for c in cdims]

    level_dims = tuple(prefix[1:])
    offsets = [0, 1]
    for j in range(1, n_steps):
        offsets.append(offsets[-1] + prefix[j] ** 2)
    m = offsets[-1] + prefix[n_steps] ** 2

    entries = []
    # level 0: full trace of Xi^(1)
    eye0 = np.eye(cdims[0], dtype=complex)[None, :, :]
    entries.append(ConstraintEntry(0, 1, 0, embed_stack(eye0)))
    # levels 1..N-1: Tr_in(j+1)[Xi^(j+1)] - I_out(j) (x) Xi^(j)
    for j in range(1, n_steps):
        rows = slice(offsets[j], offsets[j] + prefix[j] ** 2)
        basis = hermitian_basis_stack(prefix[j])
        grown = np.einsum("rab,cd->racbd", basis,
                          np.eye(d_in[j], dtype=complex)).reshape(
                              prefix[j] ** 2, prefix[j] * d_in[j],
                              prefix[j] * d_in[j])
        entries.append(ConstraintEntry(rows.start, rows.stop, j,
                                       embed_stack(grown)))
        shrunk = trace_middle(basis, prefix[j - 1], d_out[j - 1], d_in[j - 1])
        entries.append(ConstraintEntry(rows.start, rows.stop, j - 1,
                                       embed_stack(shrunk, scale=-0.5)))
    # level N: sum_est T_est - I_out(N) (x) Xi^(N)
    rows = slice(offsets[n_steps], m)
    basis = hermitian_basis_stack(prefix[n_steps])
    t_tensor = embed_stack(basis)  # one ndarray shared by every outcome block
    for k in range(problem.num_params):
        entries.append(ConstraintEntry(rows.start, rows.stop, n_steps + k,
                                       t_tensor))
    shrunk = trace_middle(basis, prefix[n_steps - 1], d_out[n_steps - 1],
                          d_in[n_steps - 1])
    entries.append(ConstraintEntry(rows.start, rows.stop, n_steps - 1,
                                   embed_stack(shrunk, scale=-0.5)))

    cmap = BlockConstraintMap(m, block_dims, entries)
    b = np.zeros(m)
    b[0] = 1.0

    gops = payoff_operators(problem)
    C = [np.zeros((n, n)) for n in block_dims[:n_steps]]
    order = space.factor_ids()
    for k in range(problem.num_params):
        g = gops.operators[k]
        if g.label_ids() != order:
            raise ShapeMismatch("payoff operator out of canonical order")
        C.append(embed_stack(g.data[None, :, :], scale=-0.5)[0])

    return StandardSdp(problem, gops, tuple(cdims), tuple(block_dims),
                       level_dims, tuple(offsets), tuple(xi_factors), cmap,
                       tuple(C), b)


# ---------------------------------------------------------------------------
# the dual program, in operator form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DualState:
    """Dual variables: a scalar S^(0) and one Hermitian S^(j) per level."""

    s0: float
    operators: tuple  # LabeledOperator for S^(1)..S^(N) on the step prefixes


@dataclass(frozen=True)
class DualProgram:
    """Inequality blocks of the dual: evaluable residuals M_1..M_N, M_est."""

    sdp: StandardSdp

    def level_factors(self, j: int) -> tuple:
        facs = []
        for i in range(j):
            s = self.sdp.problem.space.steps[i]
            facs.extend([s.out_sys, s.in_sys])
        return tuple(facs)

    def chain_residuals(self, dual: DualState) -> List[LabeledOperator]:
        """M_j = S^(j-1) (x) I_in(j) - Tr_out(j)[S^(j)] on the Xi^(j) factors."""
        space = self.sdp.problem.space
        out = []
        for j in range(1, space.num_steps + 1):
            step = space.steps[j - 1]
            sj = dual.operators[j - 1].data
            pre = int(np.prod([f.dim for f in self.level_factors(j - 1)],
                              dtype=np.int64)) if j > 1 else 1
            traced = trace_middle(sj[None, :, :], pre, step.out_sys.dim,
                                  step.in_sys.dim)[0]
            if j == 1:
                prev = np.array([[dual.s0]], dtype=complex)
            else:
                prev = dual.operators[j - 2].data
            grown = np.kron(prev, np.eye(step.in_sys.dim))
            out.append(LabeledOperator(self.sdp.xi_factors[j - 1],
                                       grown - traced))
        return out

    def outcome_residuals(self, dual: DualState) -> List[LabeledOperator]:
        """M_est = S^(N) - G_est on the full comb factors."""
        sN = dual.operators[-1]
        out = []
        for g in self.sdp.payoff_ops.operators:
            out.append(LabeledOperator(g.factors, sN.data - g.data))
        return out

    def objective(self, dual: DualState) -> float:
        return dual.s0


def build_dual(problem: EstimationProblem) -> DualProgram:
    return DualProgram(build_primal(problem))


def dual_from_y(sdp: StandardSdp, y: np.ndarray) -> DualState:
    """Recover the operator-form dual variables from the row multipliers."""
    dual_ops = []
    prog = DualProgram(sdp)
    for j in range(1, sdp.num_steps + 1):
        rows = sdp.level_rows(j)
        d = sdp.level_dims[j - 1]
        mat = hermitian_from_coords(-y[rows], d)
        dual_ops.append(LabeledOperator(prog.level_factors(j), mat))
    return DualState(float(-y[0]), tuple(dual_ops))


def y_from_dual(sdp: StandardSdp, dual: DualState) -> np.ndarray:
    y = np.zeros(sdp.cmap.m)
    y[0] = -dual.s0
    for j in range(1, sdp.num_steps + 1):
        rows = sdp.level_rows(j)
        y[rows] = -coords_from_hermitian(dual.operators[j - 1].data)
    return y


def structural_row_values(sdp: StandardSdp, xi_ops: Sequence[np.ndarray],
                          t_ops: Sequence[np.ndarray]) -> np.ndarray:
    """The constraint values computed with explicit partial traces.

    Independent of the coefficient tensors; used to cross-check the
    constraint map (same numbers, two routes).
    """
    space = sdp.problem.space
    n_steps = space.num_steps
    vals = np.zeros(sdp.cmap.m)
    vals[0] = float(np.trace(xi_ops[0]).real)
    for j in range(1, n_steps + 1):
        rows = sdp.level_rows(j)
        if j < n_steps:
            d_next = space.steps[j].in_sys.dim
            pre = sdp.cdims[j] // d_next
            t = xi_ops[j].reshape(pre, d_next, pre, d_next)
            traced = np.trace(t, axis1=1, axis2=3)
        else:
            traced = sum(t_ops)
        step = space.steps[j - 1]
        grown = _kron_into_last(xi_ops[j - 1], step.out_sys.dim,
                                step.in_sys.dim)
        resid = traced - grown
        d = sdp.level_dims[j - 1]
        vals[rows] = coords_from_hermitian(resid.reshape(d, d))
    return vals


def _kron_into_last(xi: np.ndarray, d_out: int, d_in: int) -> np.ndarray:
    """I_out (x) Xi, with the identity inserted before the trailing input factor."""
    pre = xi.shape[0] // d_in
    t = xi.reshape(pre, d_in, pre, d_in)
    grown = np.einsum("aibj,cd->acibdj", t, np.eye(d_out, dtype=complex))
    n = pre * d_out * d_in
    return grown.reshape(n, n)
