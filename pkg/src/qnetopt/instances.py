"""Random and named problem instances for tests and corpus runs.

All generators take a ``numpy.random.Generator`` so corpora are reproducible
from a seed.  Channels come out of isometric dilations and are therefore
trace preserving by construction; comb validity and tester validity are
still re-checked by the callers' validators rather than trusted.
"""

from __future__ import annotations

import itertools
from typing import Optional, Sequence

import numpy as np

from .estimation import EstimationProblem
from .networks import (CombSpace, QuantumComb, Tester, choi_of_channel,
                       comb_of_state, validate_comb, validate_tester)
from .operators import LabeledOperator, SystemLabel, permute_systems

_counter = itertools.count()


def _fresh(tag: str) -> str:
    return "%s%d" % (tag, next(_counter))


def random_pure_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(rng: np.random.Generator, dim: int,
                   rank: Optional[int] = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_isometry(rng: np.random.Generator, d_from: int, d_to: int) -> np.ndarray:
    """Haar-ish isometry with d_to >= d_from, columns orthonormal."""
    if d_to < d_from:
        raise ValueError("isometry needs d_to >= d_from")
    return random_unitary(rng, d_to)[:, :d_from]


def random_channel_choi(rng: np.random.Generator, d_in: int, d_out: int,
                        d_env: int = 2) -> np.ndarray:
    """Choi matrix of a random channel via a dilated isometry."""
    v = random_isometry(rng, d_in, d_out * d_env)
    kraus = v.reshape(d_out, d_env, d_in)
    choi = np.zeros((d_out * d_in, d_out * d_in), dtype=complex)
    for e in range(d_env):
        w = kraus[:, e, :].reshape(-1)
        choi += np.outer(w, w.conj())
    return choi


def random_prior(rng: np.random.Generator, n: int) -> np.ndarray:
    w = rng.uniform(0.2, 1.0, size=n)
    return w / w.sum()


def random_payoff(rng: np.random.Generator, n: int, delta: bool) -> np.ndarray:
    if delta:
        return np.eye(n)
    return rng.uniform(0.0, 1.0, size=(n, n))


def random_state_problem(rng: np.random.Generator, n_states: int, dim: int,
                         delta: bool = True, pure: bool = False
                         ) -> EstimationProblem:
    """Discrimination-style problem over random states on one fresh system."""
    lab = SystemLabel(_fresh("s"), dim)
    combs = []
    for _ in range(n_states):
        if pure:
            v = random_pure_state(rng, dim)
            rho = np.outer(v, v.conj())
        else:
            rho = random_density(rng, dim)
        combs.append(comb_of_state(LabeledOperator((lab,), rho)))
    labels = tuple(range(n_states))
    return EstimationProblem(combs[0].space, labels, random_prior(rng, n_states),
                             tuple(combs), random_payoff(rng, n_states, delta))


def random_memory_comb(rng: np.random.Generator, space: CombSpace,
                       d_mem: int = 2, d_env: int = 2) -> QuantumComb:
    """Random strategy comb from chained step isometries with memory.

    Step s maps (memory x in_s) isometrically into (out_s x memory x env_s);
    all environments and the final memory are traced out.  One step reduces
    to a plain random channel.
    """
    steps = space.steps
    n = len(steps)
    if n == 1:
        return random_sequence_comb(rng, space, d_env)
    t = np.ones((1, 1, 1), dtype=complex)  # (kept legs, memory, input legs)
    kept_dims = []  # interleaved (out_s, env_s)
    in_dims = []
    m_prev = 1
    for s, step in enumerate(steps):
        m_next = d_mem if s < n - 1 else 1
        # environment large enough for the dilation to be an isometry
        e_dim = max(d_env, -(-m_prev * step.in_sys.dim
                             // (step.out_sys.dim * m_next)))
        v = random_isometry(rng, m_prev * step.in_sys.dim,
                            step.out_sys.dim * m_next * e_dim)
        v5 = v.reshape(step.out_sys.dim, m_next, e_dim, m_prev, step.in_sys.dim)
        t = np.einsum("pnq,omeni->poemqi", t, v5)
        t = t.reshape(-1, m_next, t.shape[4] * t.shape[5])
        kept_dims.extend([step.out_sys.dim, e_dim])
        in_dims.append(step.in_sys.dim)
        m_prev = m_next
    full = t.reshape(tuple(kept_dims) + tuple(in_dims))
    n_keep = len(kept_dims)  # final memory is trivial, already dropped
    out_axes = list(range(0, n_keep, 2))
    env_axes = list(range(1, n_keep, 2))
    in_axes = list(range(n_keep, n_keep + n))
    full = full.transpose(out_axes + env_axes + in_axes)
    d_out_tot = int(np.prod([kept_dims[a] for a in out_axes], dtype=np.int64))
    d_in_tot = int(np.prod(in_dims, dtype=np.int64))
    w = full.reshape(d_out_tot, -1, d_in_tot)
    r = np.einsum("aei,bej->aibj", w, w.conj()).reshape(d_out_tot * d_in_tot, -1)
    outs = tuple(s.out_sys for s in steps)
    ins = tuple(s.in_sys for s in steps)
    op = permute_systems(LabeledOperator(outs + ins, r), space.factor_ids())
    return validate_comb(QuantumComb(space, op))


def random_sequence_comb(rng: np.random.Generator, space: CombSpace,
                         d_env: int = 2) -> QuantumComb:
    """Random no-memory strategy comb: an independent channel per step."""
    chois = []
    for step in space.steps:
        c = random_channel_choi(rng, step.in_sys.dim, step.out_sys.dim, d_env)
        chois.append(LabeledOperator((step.out_sys, step.in_sys), c))
    mats = [c.data for c in chois]
    acc = mats[0]
    for m in mats[1:]:
        acc = np.kron(acc, m)
    return validate_comb(QuantumComb(space, LabeledOperator(space.factors(), acc)))


def random_channel_problem(rng: np.random.Generator, n_params: int,
                           dims: Sequence[tuple], delta: bool = True,
                           memory: bool = False) -> EstimationProblem:
    """Random channel-sequence discrimination problem.

    `dims` lists (d_in, d_out) per step; each parameter gets an independent
    random comb on the shared fresh space, memoryful when asked.
    """
    steps = []
    for (d_in, d_out) in dims:
        steps.append((SystemLabel(_fresh("i"), d_in), SystemLabel(_fresh("o"), d_out)))
    space = CombSpace(tuple(steps))
    if memory:
        combs = tuple(random_memory_comb(rng, space) for _ in range(n_params))
    else:
        combs = tuple(random_sequence_comb(rng, space) for _ in range(n_params))
    labels = tuple(range(n_params))
    return EstimationProblem(space, labels, random_prior(rng, n_params), combs,
                             random_payoff(rng, n_params, delta))


def random_problem(rng: np.random.Generator) -> EstimationProblem:
    """Mixed corpus draw: random states or a short random channel sequence."""
    if rng.uniform() < 0.5:
        n = int(rng.integers(2, 5))
        d = int(rng.integers(2, 5))
        return random_state_problem(rng, n, d, delta=bool(rng.uniform() < 0.7))
    n = int(rng.integers(2, 4))
    if rng.uniform() < 0.5:
        dims = [(2, 2)]
    else:
        dims = [(2, 2), (2, 2)]
    return random_channel_problem(rng, n, dims, delta=bool(rng.uniform() < 0.7),
                                  memory=bool(rng.uniform() < 0.5))


def random_povm(rng: np.random.Generator, dim: int, n_outcomes: int) -> list:
    """Random informationally unstructured POVM via S^(-1/2) conjugation."""
    raws = []
    for _ in range(n_outcomes):
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        raws.append(g @ g.conj().T)
    s = np.sum(raws, axis=0)
    vals, vecs = np.linalg.eigh(s)
    inv_sqrt = (vecs * (1.0 / np.sqrt(vals))) @ vecs.conj().T
    return [inv_sqrt @ a @ inv_sqrt for a in raws]


def random_product_tester(rng: np.random.Generator, space: CombSpace,
                          n_outcomes: int) -> Tester:
    """Random causal tester without memory: fresh input states per step and
    one POVM measuring all outputs jointly."""
    d_out = int(np.prod(space.out_dims(), dtype=np.int64))
    povm = random_povm(rng, d_out, n_outcomes)
    in_part = np.array([[1.0]])
    for step in space.steps:
        in_part = np.kron(in_part, random_density(rng, step.in_sys.dim).T)
    outs = [s.out_sys for s in space.steps]
    ins = [s.in_sys for s in space.steps]
    order = tuple(f.id for f in space.factors())
    outcomes = []
    for m, p in enumerate(povm):
        op = LabeledOperator(tuple(outs) + tuple(ins), np.kron(p, in_part))
        outcomes.append((str(m), permute_systems(op, order)))
    return validate_tester(Tester(space, tuple(outcomes)))


def random_product_pair(rng: np.random.Generator) -> tuple:
    """Two independent problems on disjoint systems, for product-rule runs."""
    a = random_state_problem(rng, int(rng.integers(2, 4)), int(rng.integers(2, 4)),
                             delta=bool(rng.uniform() < 0.7))
    if rng.uniform() < 0.3:
        b = random_channel_problem(rng, 2, [(2, 2)], delta=True)
    else:
        b = random_state_problem(rng, int(rng.integers(2, 4)),
                                 int(rng.integers(2, 4)),
                                 delta=bool(rng.uniform() < 0.7))
    return a, b
