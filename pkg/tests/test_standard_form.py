"""Real embedding and the assembled constraint tensors.

The heavy check here is the dual route for the constraint matrix: row
values produced by the assembled coefficient tensors must agree with the
same rows computed directly from partial traces, for arbitrary (not
necessarily feasible) Hermitian block values.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import helstrom_problem, seeds, state_problems
from qnetopt.instances import random_channel_problem
from qnetopt.sdp.standard_form import (build_primal, commutant_project,
                                       coords_from_hermitian, dual_from_y,
                                       embed, hermitian_basis_stack,
                                       hermitian_from_coords, trace_middle,
                                       unembed, y_from_dual)


def rand_herm(g, d):
    m = g.normal(size=(d, d)) + 1j * g.normal(size=(d, d))
    return m + m.conj().T


def test_basis_order_is_the_documented_one():
    s = hermitian_basis_stack(2)
    np.testing.assert_allclose(s[0], np.diag([1.0, 0.0]))
    np.testing.assert_allclose(s[1], np.diag([0.0, 1.0]))
    r = 1.0 / np.sqrt(2.0)
    np.testing.assert_allclose(s[2], np.array([[0, r], [r, 0]]), atol=1e-15)
    np.testing.assert_allclose(s[3], np.array([[0, 1j * r], [-1j * r, 0]]),
                               atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_basis_is_orthonormal_and_hermitian(d):
    s = hermitian_basis_stack(d)
    assert s.shape == (d * d, d, d)
    gram = np.einsum("aij,bij->ab", s.conj(), s)
    np.testing.assert_allclose(gram, np.eye(d * d), atol=1e-12)
    np.testing.assert_allclose(s, np.conj(np.transpose(s, (0, 2, 1))), atol=1e-14)


def test_coords_round_trip(rng):
    h = rand_herm(rng, 3)
    c = coords_from_hermitian(h)
    assert np.max(np.abs(c.imag)) < 1e-12
    np.testing.assert_allclose(hermitian_from_coords(c.real, 3), h, atol=1e-12)


def test_embed_round_trip_and_inner_product(rng):
    a, b = rand_herm(rng, 3), rand_herm(rng, 3)
    ea, eb = embed(a), embed(b)
    np.testing.assert_allclose(unembed(ea), a, atol=1e-13)
    # the embedding doubles Hilbert-Schmidt inner products
    assert np.tensordot(ea, eb) == pytest.approx(2.0 * np.tensordot(a.conj(), b).real,
                                                 abs=1e-10)


def test_embed_doubles_spectrum(rng):
    a = rand_herm(rng, 3)
    w = np.linalg.eigvalsh(a)
    we = np.linalg.eigvalsh(embed(a))
    np.testing.assert_allclose(we, np.sort(np.concatenate([w, w])), atol=1e-10)


def test_commutant_projection_is_idempotent(rng):
    m = rng.normal(size=(6, 6))
    m = m + m.T
    p1 = commutant_project(m)
    np.testing.assert_allclose(commutant_project(p1), p1, atol=1e-12)
    h = rand_herm(rng, 3)
    np.testing.assert_allclose(commutant_project(embed(h)), embed(h), atol=1e-12)


def test_trace_middle_matches_loop(rng):
    mats = rng.normal(size=(5, 24, 24)) + 1j * rng.normal(size=(5, 24, 24))
    got = trace_middle(mats, 2, 3, 4)
    view = mats.reshape(5, 2, 3, 4, 2, 3, 4)
    expect = np.zeros((5, 8, 8), dtype=complex)
    for j in range(3):
        expect += view[:, :, j, :, :, j, :].reshape(5, 8, 8)
    np.testing.assert_allclose(got, expect, atol=1e-12)


def test_block_layout_and_row_partition():
    sdp = build_primal(helstrom_problem())
    n = sdp.num_steps
    assert len(sdp.block_dims) == n + sdp.num_outcomes
    covered = []
    for j in range(n + 1):
        sl = sdp.level_rows(j)
        covered.extend(range(sl.start, sl.stop))
    assert covered == list(range(sdp.cmap.m))


def test_primal_start_is_feasible():
    for problem in (helstrom_problem(),
                    random_channel_problem(np.random.default_rng(5), 2,
                                           [(2, 2), (2, 2)], memory=True)):
        sdp = build_primal(problem)
        x0 = sdp.primal_start()
        np.testing.assert_allclose(sdp.cmap.apply_A(x0), sdp.b, atol=1e-12)
        for blk in x0:
            assert np.linalg.eigvalsh(blk)[0] > 0


def test_objective_blocks_encode_payoff():
    problem = helstrom_problem()
    sdp = build_primal(problem)
    for k, op in enumerate(sdp.payoff_ops.operators):
        np.testing.assert_allclose(sdp.C[sdp.outcome_block(k)],
                                   -0.5 * embed(op.data), atol=1e-13)
    for j in range(1, sdp.num_steps + 1):
        assert np.max(np.abs(sdp.C[sdp.xi_block(j)])) == 0.0


@settings(max_examples=60, deadline=None)
@given(problem=state_problems(max_states=3, max_dim=3), seed=seeds)
def test_adjoint_identity_states(problem, seed):
    _assert_rows_agree(build_primal(problem), np.random.default_rng(seed))


@settings(max_examples=40, deadline=None)
@given(seed=seeds, pseed=seeds, memory=st.booleans())
def test_adjoint_identity_channels(seed, pseed, memory):
    problem = random_channel_problem(np.random.default_rng(pseed), 2,
                                     [(2, 2), (2, 2)], memory=memory)
    _assert_rows_agree(build_primal(problem), np.random.default_rng(seed))


def _assert_rows_agree(sdp, g):
    from qnetopt.sdp.standard_form import structural_row_values
    n = sdp.num_steps
    xi_ops = [rand_herm(g, sdp.cdims[sdp.xi_block(j)]) for j in range(1, n + 1)]
    t_ops = [rand_herm(g, sdp.cdims[sdp.outcome_block(k)])
             for k in range(sdp.num_outcomes)]
    direct = structural_row_values(sdp, xi_ops, t_ops)
    blocks = [embed(h) for h in xi_ops + t_ops]
    assembled = sdp.cmap.apply_A(blocks)
    np.testing.assert_allclose(assembled, direct, atol=1e-10)


def test_dual_vector_round_trip(rng):
    sdp = build_primal(helstrom_problem())
    y = rng.normal(size=sdp.cmap.m)
    back = y_from_dual(sdp, dual_from_y(sdp, y))
    np.testing.assert_allclose(back, y, atol=1e-12)
