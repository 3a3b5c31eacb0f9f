"""Dense complex linear algebra over labeled tensor-product spaces.

A LabeledOperator is a square complex matrix together with an ordered list of
SystemLabel factors.  The matrix basis is ordered lexicographically by the
declared factor order (row-major), so kron() of the raw matrices matches
tensor() of the operators.  All operations are pure; operators are immutable
after construction.

Dimensions are capped (default 4096 total) to keep everything dense and
desk-scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (BadPermutation, DimensionCap, DuplicateLabel,
                     NotHermitian, ShapeMismatch, UnknownLabel)

#: Hard cap on the total dimension of any single operator.
DIMENSION_CAP = 4096

#: Default relative scale for the Hermiticity check.
HERM_TOL = 1e-10

#: Default reconstruction tolerance for eigendecompositions.
EIG_TOL = 1e-10


@dataclass(frozen=True)
class SystemLabel:
    """An elementary tensor factor: an opaque id plus its dimension."""

    id: str
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionCap("label %r has dim %d < 1" % (self.id, self.dim))


def _total_dim(factors: Sequence[SystemLabel]) -> int:
    n = 1
    for f in factors:
        n *= f.dim
    return n


@dataclass(frozen=True)
class LabeledOperator:
    """Square complex matrix over an ordered list of labeled factors."""

    factors: tuple
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        factors = tuple(self.factors)
        object.__setattr__(self, "factors", factors)
        ids = [f.id for f in factors]
        if len(set(ids)) != len(ids):
            raise DuplicateLabel("repeated label ids: %r" % (ids,))
        n = _total_dim(factors)
        if n > DIMENSION_CAP:
            raise DimensionCap("total dimension %d exceeds cap %d" % (n, DIMENSION_CAP))
        data = np.asarray(self.data, dtype=complex)
        if data.shape != (n, n):
            raise ShapeMismatch(
                "matrix shape %r does not match factor dims (side %d)" % (data.shape, n))
        data = data.copy()
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    # -- small conveniences used throughout the package ------------------

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def dims(self) -> tuple:
        return tuple(f.dim for f in self.factors)

    def label_ids(self) -> tuple:
        return tuple(f.id for f in self.factors)

    def with_data(self, data: np.ndarray) -> "LabeledOperator":
        return LabeledOperator(self.factors, data)

    def __add__(self, other: "LabeledOperator") -> "LabeledOperator":
        _require_same_structure(self, other)
        return LabeledOperator(self.factors, self.data + other.data)

    def __sub__(self, other: "LabeledOperator") -> "LabeledOperator":
        _require_same_structure(self, other)
        return LabeledOperator(self.factors, self.data - other.data)

    def __mul__(self, scalar) -> "LabeledOperator":
        return LabeledOperator(self.factors, self.data * scalar)

    __rmul__ = __mul__


def _require_same_structure(a: LabeledOperator, b: LabeledOperator):
    if a.factors != b.factors:
        raise ShapeMismatch(
            "factor structures differ: %r vs %r" % (a.label_ids(), b.label_ids()))


def identity(label: SystemLabel) -> LabeledOperator:
    return LabeledOperator((label,), np.eye(label.dim))


def identity_on(factors: Iterable[SystemLabel]) -> LabeledOperator:
    factors = tuple(factors)
    return LabeledOperator(factors, np.eye(_total_dim(factors)))


def scalar_op(value=1.0) -> LabeledOperator:
    """A 1x1 operator on no factors (the empty tensor product)."""
    return LabeledOperator((), np.array([[value]], dtype=complex))


def is_hermitian(a: LabeledOperator, rel: float = HERM_TOL) -> bool:
    d = a.data
    scale = 1.0 + (float(np.max(np.abs(d))) if d.size else 0.0)
    return float(np.max(np.abs(d - d.conj().T))) <= rel * scale if d.size else True


def require_hermitian(a: LabeledOperator, rel: float = HERM_TOL):
    if not is_hermitian(a, rel):
        resid = float(np.max(np.abs(a.data - a.data.conj().T)))
        raise NotHermitian("matrix is not Hermitian (residual %.3e)" % resid)


def tensor(a: LabeledOperator, b: LabeledOperator) -> LabeledOperator:
    """Kronecker product; a's factors first, then b's.  Labels must be disjoint."""
    overlap = set(a.label_ids()) & set(b.label_ids())
    if overlap:
        raise DuplicateLabel("labels occur on both operands: %r" % sorted(overlap))
    return LabeledOperator(a.factors + b.factors, np.kron(a.data, b.data))


def tensor_all(ops: Sequence[LabeledOperator]) -> LabeledOperator:
    out = scalar_op(1.0)
    for op in ops:
        out = tensor(out, op)
    return out


def _positions(a: LabeledOperator, ids) -> list:
    index = {f.id: i for i, f in enumerate(a.factors)}
    out = []
    for lid in ids:
        if lid not in index:
            raise UnknownLabel("label %r not present on %r" % (lid, a.label_ids()))
        out.append(index[lid])
    return out


def partial_trace(a: LabeledOperator, over) -> LabeledOperator:
    """Trace out the named factors; remaining factors keep their order.

    `over` may contain SystemLabel objects or bare id strings.  Tracing over
    every factor returns a scalar LabeledOperator on no factors.
    """
    ids = [f.id if isinstance(f, SystemLabel) else f for f in over]
    if len(set(ids)) != len(ids):
        raise UnknownLabel("repeated labels in trace set: %r" % (ids,))
    _positions(a, ids)  # raises UnknownLabel early
    data = a.data
    factors = list(a.factors)
    for lid in ids:
        pos = [f.id for f in factors].index(lid)
        dims = [f.dim for f in factors]
        d = dims[pos]
        pre = int(np.prod(dims[:pos], dtype=np.int64)) if pos else 1
        post = int(np.prod(dims[pos + 1:], dtype=np.int64)) if pos + 1 < len(dims) else 1
        t = data.reshape(pre, d, post, pre, d, post)
        data = np.trace(t, axis1=1, axis2=4).reshape(pre * post, pre * post)
        del factors[pos]
    return LabeledOperator(tuple(factors), data)


def permute_systems(a: LabeledOperator, order) -> LabeledOperator:
    """Reorder the tensor factors.  `order` is a permutation of a's labels."""
    ids = [f.id if isinstance(f, SystemLabel) else f for f in order]
    if sorted(ids) != sorted(a.label_ids()):
        raise BadPermutation(
            "order %r is not a permutation of %r" % (ids, a.label_ids()))
    perm = _positions(a, ids)
    k = len(a.factors)
    dims = a.dims
    t = a.data.reshape(dims + dims)
    t = np.transpose(t, axes=[*perm, *[p + k for p in perm]])
    new_factors = tuple(a.factors[p] for p in perm)
    n = a.dim
    return LabeledOperator(new_factors, t.reshape(n, n))


def embed_identity(a: LabeledOperator, new: SystemLabel, position: int) -> LabeledOperator:
    """Tensor an identity on `new` into the stated factor position."""
    if new.id in a.label_ids():
        raise DuplicateLabel("label %r already present" % new.id)
    if not 0 <= position <= len(a.factors):
        raise BadPermutation("position %d out of range" % position)
    grown = tensor(a, identity(new))
    order = list(a.label_ids())
    order.insert(position, new.id)
    return permute_systems(grown, order)


def eig_hermitian(a: LabeledOperator, rel: float = HERM_TOL):
    """Eigenvalues (descending) and matching eigenvector columns."""
    require_hermitian(a, rel)
    vals, vecs = np.linalg.eigh((a.data + a.data.conj().T) / 2.0)
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def min_eig(a: LabeledOperator, rel: float = HERM_TOL) -> float:
    require_hermitian(a, rel)
    return float(np.linalg.eigvalsh((a.data + a.data.conj().T) / 2.0)[0])


def is_psd(a: LabeledOperator, tol: float = 1e-8) -> bool:
    """True iff the smallest eigenvalue is >= -tol * max(1, max-entry norm)."""
    scale = max(1.0, float(np.max(np.abs(a.data))) if a.data.size else 1.0)
    return min_eig(a) >= -tol * scale


def hs_inner(a: LabeledOperator, b: LabeledOperator) -> complex:
    """Hilbert-Schmidt inner product Tr[a^dagger b]."""
    _require_same_structure(a, b)
    return complex(np.vdot(a.data, b.data))


def max_entry_norm(a: LabeledOperator) -> float:
    return float(np.max(np.abs(a.data))) if a.data.size else 0.0
