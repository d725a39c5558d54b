"""Matrix Lie algebras: brackets, closures, series, and classification.

A subalgebra of n-by-n real matrices is carried around as a ``MatrixBasis``:
an orthonormal spanning set under the trace inner product <A, B> = tr(A^T B).
Orthonormality makes span-membership a cheap projection and keeps dimension
decisions stable under the configured tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GuardError, ValidationError
from .linalg import as_square_matrix

DEFAULT_TOL = 1e-9


def bracket(a, b) -> np.ndarray:
    """Matrix commutator [a, b] = ab - ba."""
    a = as_square_matrix(a, "a")
    b = as_square_matrix(b, "b")
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


@dataclass(frozen=True)
class MatrixBasis:
    """Orthonormal basis of a subspace of n-by-n matrices.

    ``mats`` are mutually orthogonal with unit Frobenius norm; ``tol`` is the
    relative threshold below which a residual is treated as zero when testing
    span membership.
    """

    dim_ambient: int
    mats: tuple = ()
    tol: float = DEFAULT_TOL

    @property
    def dim(self) -> int:
        return len(self.mats)

    def project_residual(self, m: np.ndarray) -> np.ndarray:
        """Component of ``m`` orthogonal to the span (two-pass Gram-Schmidt)."""
        r = np.asarray(m, dtype=float).copy()
        for _ in range(2):
            for b in self.mats:
                r -= np.sum(b * r) * b
        return r

    def contains(self, m) -> bool:
        m = np.asarray(m, dtype=float)
        scale = max(1.0, float(np.linalg.norm(m, "fro")))
        return float(np.linalg.norm(self.project_residual(m), "fro")) <= self.tol * scale


def span_append(basis: MatrixBasis, m) -> tuple[MatrixBasis, bool]:
    """Append ``m``'s normalized out-of-span component, if it is significant.

    Returns the (possibly unchanged) basis and whether an append happened.
    The residual is kept only when its norm exceeds ``tol * max(1, ||m||)``.
    """
    m = as_square_matrix(m, "appended matrix")
    if m.shape[0] != basis.dim_ambient:
        raise ValidationError(
            f"ambient dimension mismatch: basis is {basis.dim_ambient}, matrix is {m.shape[0]}"
        )
    residual = basis.project_residual(m)
    res_norm = float(np.linalg.norm(residual, "fro"))
    if res_norm <= basis.tol * max(1.0, float(np.linalg.norm(m, "fro"))):
        return basis, False
    new = MatrixBasis(basis.dim_ambient, basis.mats + (residual / res_norm,), basis.tol)
    return new, True


def basis_from_matrices(mats, n: int | None = None, tol: float = DEFAULT_TOL) -> MatrixBasis:
    """Orthonormalize a list of matrices into a MatrixBasis (order-dependent)."""
    mats = [as_square_matrix(m, "generator") for m in mats]
    if n is None:
        if not mats:
            raise ValidationError("need at least one matrix or an explicit ambient dimension")
        n = mats[0].shape[0]
    basis = MatrixBasis(n, tol=tol)
    for m in mats:
        basis, _ = span_append(basis, m)
    return basis


def lie_closure(generators, cap: int | None = None, tol: float = DEFAULT_TOL) -> MatrixBasis:
    """Smallest bracket-closed subspace containing the generators.

    Breadth-first: every round brackets all ordered pairs of current basis
    elements and appends whatever falls outside the span; stops at a fixpoint.
    ``cap`` (default n^2) bounds the dimension; exceeding it signals an
    ill-conditioned input rather than silently truncating.
    """
    gens = list(generators)
    if not gens:
        raise ValidationError("lie_closure needs a nonempty generator list")
    basis = basis_from_matrices(gens, tol=tol)
    n = basis.dim_ambient
    if cap is None:
        cap = n * n
    while True:
        appended_any = False
        current = basis.mats
        for a in current:
            for b in current:
                basis, appended = span_append(basis, a @ b - b @ a)
                appended_any = appended_any or appended
                if basis.dim > cap:
                    raise GuardError(
                        f"Lie closure dimension exceeded cap {cap}; "
                        "input is runaway or ill-conditioned"
                    )
        if not appended_any:
            return basis


def _bracket_span(left: MatrixBasis, right: MatrixBasis) -> MatrixBasis:
    """Span of [a, b] over basis pairs, as a fresh orthonormal basis."""
    out = MatrixBasis(left.dim_ambient, tol=left.tol)
    for a in left.mats:
        for b in right.mats:
            out, _ = span_append(out, a @ b - b @ a)
    return out


def _series(basis: MatrixBasis, step) -> list[MatrixBasis]:
    """Iterate ``step`` until the dimension hits zero or stabilizes."""
    members = [basis]
    while True:
        nxt = step(members[-1])
        members.append(nxt)
        if nxt.dim == 0 or nxt.dim == members[-2].dim:
            return members


def derived_series(basis: MatrixBasis) -> list[MatrixBasis]:
    """g, [g, g], [[g, g], [g, g]], ... down to zero or stabilization.

    Expects ``basis`` bracket-closed (e.g. from lie_closure).
    """
    return _series(basis, lambda g: _bracket_span(g, g))


def lower_central_series(basis: MatrixBasis) -> list[MatrixBasis]:
    """g, [g, g], [g, [g, g]], ... down to zero or stabilization."""
    return _series(basis, lambda g: _bracket_span(basis, g))


@dataclass(frozen=True)
class AlgebraReport:
    """Classification summary of a bracket-closed matrix algebra."""

    dim: int
    class_label: str  # abelian | nilpotent | solvable | non_solvable
    derived_length: int | None
    nilpotency_class: int | None
    derived_dims: list[int] = field(default_factory=list)
    lower_central_dims: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "class_label": self.class_label,
            "derived_length": self.derived_length,
            "nilpotency_class": self.nilpotency_class,
            "derived_dims": list(self.derived_dims),
            "lower_central_dims": list(self.lower_central_dims),
        }


def classify(basis: MatrixBasis) -> AlgebraReport:
    """Classify a bracket-closed algebra as abelian/nilpotent/solvable or not.

    Derived length is the first vanishing index of the derived series,
    nilpotency class the first vanishing index of the lower central series;
    a derived series that stabilizes at nonzero dimension means non-solvable.
    """
    derived = derived_series(basis)
    lower = lower_central_series(basis)
    derived_dims = [g.dim for g in derived]
    lower_dims = [g.dim for g in lower]

    solvable = derived_dims[-1] == 0
    nilpotent = lower_dims[-1] == 0
    derived_length = derived_dims.index(0) if solvable else None
    nilpotency_class = lower_dims.index(0) if nilpotent else None

    if not solvable:
        label = "non_solvable"
    elif nilpotency_class == 1:
        label = "abelian"
    elif nilpotent:
        label = "nilpotent"
    else:
        label = "solvable"
    return AlgebraReport(
        dim=basis.dim,
        class_label=label,
        derived_length=derived_length,
        nilpotency_class=nilpotency_class,
        derived_dims=derived_dims,
        lower_central_dims=lower_dims,
    )


def is_bracket_closed(basis: MatrixBasis) -> bool:
    """True when every pairwise bracket of basis elements stays in the span."""
    for a in basis.mats:
        for b in basis.mats:
            if not basis.contains(a @ b - b @ a):
                return False
    return True
