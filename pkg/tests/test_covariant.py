"""Group actions, invariant reductions, and the phase-estimation family."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnetopt.covariant import (FiniteGroupAction, act, covariant_gamma,
                               cyclic_group, is_invariant, phase_action,
                               phase_estimation_optimum, phase_grid_problem,
                               product_group, qmax_comb, qmax_state,
                               sum_of_phases, twirl, two_phase_correlated,
                               two_phase_payoff_matrix, two_phase_problem)
from qnetopt.errors import (BadDimension, BadParameter, NotLeftInvariant,
                            ShapeMismatch)
from qnetopt.estimation import EstimationProblem
from qnetopt.instances import random_unitary
from qnetopt.networks import comb_of_memoryless_sequence, choi_of_channel
from qnetopt.operators import LabeledOperator, SystemLabel
from qnetopt.sdp import solve

Q = SystemLabel("q", 2)
X_MAT = np.array([[0.0, 1.0], [1.0, 0.0]])


def flip_action():
    elements, table = cyclic_group(2)
    return FiniteGroupAction(elements, table, {"q": {0: np.eye(2), 1: X_MAT}})


def test_group_table_checked():
    with pytest.raises(BadParameter):
        FiniteGroupAction((0, 1), np.array([[0, 1], [1, 2]]), {})


def test_rep_must_be_unitary():
    bad = {"q": {0: np.eye(2), 1: 2.0 * X_MAT}}
    elements, table = cyclic_group(2)
    with pytest.raises(BadParameter):
        FiniteGroupAction(elements, table, bad)


def test_rep_must_compose():
    # a non-homomorphic assignment: both non-identity elements map to
    # rotations that do not close under the table
    elements, table = cyclic_group(3)
    r = np.array([[0.0, -1.0], [1.0, 0.0]])
    bad = {"q": {0: np.eye(2), 1: r, 2: r}}
    with pytest.raises(BadParameter):
        FiniteGroupAction(elements, table, bad)


def test_act_identity_is_identity(rng):
    action = flip_action()
    m = rng.normal(size=(2, 2))
    op = LabeledOperator((Q,), m + m.T)
    np.testing.assert_allclose(act(action, 0, op).data, op.data, atol=1e-12)
    np.testing.assert_allclose(act(action, 1, op).data,
                               X_MAT @ op.data @ X_MAT, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_twirl_is_an_invariant_projection(seed):
    g = np.random.default_rng(seed)
    action = flip_action()
    m = g.normal(size=(2, 2)) + 1j * g.normal(size=(2, 2))
    op = LabeledOperator((Q,), m + m.conj().T)
    avg = twirl(op, action)
    assert is_invariant(avg, action)
    np.testing.assert_allclose(twirl(avg, action).data, avg.data, atol=1e-11)
    # trace is preserved by averaging over unitaries
    assert np.trace(avg.data) == pytest.approx(np.trace(op.data), abs=1e-10)


def test_product_group_structure():
    ea, ta = cyclic_group(2)
    eb, tb = cyclic_group(3)
    elements, table = product_group(ea, ta, eb, tb)
    assert len(elements) == 6
    assert elements[0] == (0, 0)
    for row in table:
        assert sorted(row) == list(range(6))


def test_qmax_orthogonal_orbit():
    rho0 = LabeledOperator((Q,), np.diag([1.0, 0.0]))
    q, rho = qmax_state(rho0, flip_action())
    assert q == pytest.approx(0.5, abs=1e-7)
    np.testing.assert_allclose(rho.data, np.eye(2) / 2.0, atol=1e-6)
    # hit-or-miss success over the orbit: 1 / (|X| q) = 1
    assert 1.0 / (2 * q) == pytest.approx(1.0, abs=1e-6)


def test_qmax_invariant_seed_is_one():
    rho0 = LabeledOperator((Q,), np.eye(2) / 2.0)
    q, _ = qmax_state(rho0, flip_action())
    assert q == pytest.approx(1.0, abs=1e-7)


def test_qmax_comb_trivial_action():
    lab_i, lab_o = SystemLabel("ci", 2), SystemLabel("co", 2)
    comb = comb_of_memoryless_sequence([choi_of_channel([np.eye(2)], lab_i, lab_o)])
    elements, table = cyclic_group(2)
    action = FiniteGroupAction(elements, table, {})  # acts trivially
    q, inv = qmax_comb(comb, action)
    assert q == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_allclose(inv.op.data, comb.op.data, atol=1e-5)


def test_covariant_gamma_matches_direct_solve():
    problem, action = phase_grid_problem(2)
    direct = solve(problem)
    red = covariant_gamma(problem, action)
    stored_gamma = direct.gamma_primal + problem.payoff_shift
    assert red.gamma_max == pytest.approx(stored_gamma, abs=1e-6)
    assert red.gamma_max * red.q_max == pytest.approx(red.gamma_0, abs=1e-8)


def test_covariant_gamma_requires_uniform_prior():
    problem, action = phase_grid_problem(2)
    prior = problem.prior.copy()
    prior[0] += 0.01
    prior[1] -= 0.01
    skew = EstimationProblem(problem.space, problem.labels_x, prior,
                             problem.combs, problem.payoff,
                             problem.payoff_shift)
    with pytest.raises(BadParameter, match="uniform"):
        covariant_gamma(skew, action)


def test_covariant_gamma_requires_invariant_payoff():
    problem, action = phase_grid_problem(2)
    payoff = problem.payoff.copy()
    payoff[0, 1] += 0.3
    skew = EstimationProblem(problem.space, problem.labels_x, problem.prior,
                             problem.combs, payoff, problem.payoff_shift)
    with pytest.raises(NotLeftInvariant):
        covariant_gamma(skew, action)


def test_covariant_gamma_requires_orbit_combs(rng):
    problem, action = phase_grid_problem(2)
    u = random_unitary(rng, 2)
    in_sys, out_sys = problem.space.steps[0].in_sys, problem.space.steps[0].out_sys
    stray = comb_of_memoryless_sequence([choi_of_channel([u], in_sys, out_sys)])
    combs = (problem.combs[0],) + (stray,) + problem.combs[2:]
    skew = EstimationProblem(problem.space, problem.labels_x, problem.prior,
                             combs, problem.payoff, problem.payoff_shift)
    with pytest.raises(NotLeftInvariant):
        covariant_gamma(skew, action)


def test_phase_oracle_small_dimensions():
    o2 = phase_estimation_optimum(2)
    assert o2.cos_max == pytest.approx(np.cos(np.pi / 3.0), abs=1e-12)
    assert o2.c_min == pytest.approx(1.0, abs=1e-12)
    o3 = phase_estimation_optimum(3)
    assert o3.c_min == pytest.approx(2.0 - np.sqrt(2.0), abs=1e-12)
    for d in range(2, 7):
        o = phase_estimation_optimum(d)
        assert o.cos_max == pytest.approx(np.cos(np.pi / (d + 1)), abs=1e-10)
        assert np.all(o.coefficients > 0)
        assert np.linalg.norm(o.coefficients) == pytest.approx(1.0, abs=1e-10)


def test_phase_quoted_shorthand_is_reported_not_asserted():
    for d in (2, 3, 4, 5):
        o = phase_estimation_optimum(d)
        assert o.quoted_value == pytest.approx(
            4.0 * np.sin(np.pi / (2.0 * d)) ** 2, abs=1e-12)
        assert not o.quoted_matches  # the shorthand misses the exact optimum


def test_phase_grid_problem_guards():
    with pytest.raises(BadDimension):
        phase_grid_problem(1)
    with pytest.raises(BadParameter):
        phase_grid_problem(3, grid=5)


def test_phase_grid_problem_shape():
    problem, action = phase_grid_problem(3)
    assert problem.num_params == 8
    assert problem.payoff_shift == 1.0
    assert problem.payoff.min() >= 0.0
    assert len(action.elements) == 8


def test_phase_grid_solve_matches_oracle():
    problem, _ = phase_grid_problem(2)
    sol = solve(problem)
    c = 2.0 * (1.0 - sol.gamma_primal)
    assert c == pytest.approx(1.0, abs=1e-6)


def test_two_phase_payoff_matrix_spectrum():
    for p in (0.3, 0.5, 0.7):
        w = np.linalg.eigvalsh(two_phase_payoff_matrix(p))
        assert w[-1] == pytest.approx(max(p, 1.0 - p) / 2.0, abs=1e-12)
        expected = sorted([p / 2.0, -p / 2.0, (1 - p) / 2.0, -(1 - p) / 2.0])
        np.testing.assert_allclose(np.sort(w), expected, atol=1e-12)


def test_two_phase_closed_form():
    hi = two_phase_correlated(0.7)
    assert hi.gamma_max == pytest.approx(0.35)
    np.testing.assert_allclose(hi.state,
                               np.array([1, 0, 0, 1]) / np.sqrt(2), atol=1e-12)
    lo = two_phase_correlated(0.2)
    np.testing.assert_allclose(lo.state,
                               np.array([0, 1, 1, 0]) / np.sqrt(2), atol=1e-12)
    assert two_phase_correlated(0.5).degenerate
    with pytest.raises(BadParameter):
        two_phase_correlated(1.2)


def test_two_phase_problem_is_shifted_by_one():
    problem, action = two_phase_problem(0.7)
    assert problem.payoff_shift == 1.0
    assert problem.num_params == 64
    assert len(action.elements) == 64
    assert problem.payoff.min() >= -1e-12


def test_sum_of_phases_frozen_ratios():
    rep = sum_of_phases(8, 2)
    lam = np.cos(np.pi / 9.0)
    assert rep.ratio == pytest.approx(1.0 + lam, abs=1e-12)  # (1-x^2)/(1-x)
    assert rep.c_entangled == pytest.approx(2.0 * (1.0 - lam), abs=1e-12)
    r3 = sum_of_phases(8, 3)
    assert r3.ratio == pytest.approx((1.0 - lam ** 3) / (1.0 - lam), abs=1e-12)
    assert r3.ratio == pytest.approx(2.8227148423, abs=1e-9)


def test_sum_of_phases_ratio_approaches_copies():
    prev = 0.0
    for d in (8, 16, 32):
        r = sum_of_phases(d, 2).ratio
        assert prev < r < 2.0
        prev = r
