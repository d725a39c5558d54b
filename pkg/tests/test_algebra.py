import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from liessm import (
    GuardError,
    MatrixBasis,
    ValidationError,
    bracket,
    classify,
    derived_series,
    lie_closure,
    lower_central_series,
    span_append,
)
from liessm.algebra import basis_from_matrices, is_bracket_closed
from liessm.catalog import elementary, upper_triangular_basis

E12 = elementary(2, 0, 1)
E21 = elementary(2, 1, 0)

bounded = arrays(np.float64, (3, 3), elements=st.floats(min_value=-2.0, max_value=2.0))


def test_bracket_elementary_pair():
    np.testing.assert_array_equal(bracket(E12, E21), np.diag([1.0, -1.0]))


def test_bracket_identity_commutes(rng):
    a = rng.normal(size=(3, 3))
    np.testing.assert_array_equal(bracket(np.eye(3), a), np.zeros((3, 3)))


def test_bracket_self_is_zero(rng):
    a = rng.normal(size=(4, 4))
    np.testing.assert_array_equal(bracket(a, a), np.zeros((4, 4)))


def test_bracket_dimension_mismatch():
    with pytest.raises(ValidationError):
        bracket(np.eye(2), np.eye(3))


@settings(max_examples=50, deadline=None)
@given(bounded, bounded)
def test_bracket_antisymmetry(a, b):
    total = bracket(a, b) + bracket(b, a)
    scale = np.linalg.norm(a) * np.linalg.norm(b)
    assert np.linalg.norm(total) <= 1e-14 * max(scale, 1e-30)


@settings(max_examples=100, deadline=None)
@given(bounded, bounded, bounded)
def test_jacobi_identity(a, b, c):
    # [[a,b],c] = [a,[b,c]] - [b,[a,c]]
    lhs = bracket(bracket(a, b), c)
    rhs = bracket(a, bracket(b, c)) - bracket(b, bracket(a, c))
    scale = max(np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(c), 1e-30)
    assert np.linalg.norm(lhs - rhs) <= 1e-10 * scale


class TestSpanAppend:
    def test_rejects_already_in_span(self):
        basis = basis_from_matrices([E12])
        out, appended = span_append(basis, 3.0 * E12)
        assert not appended and out.dim == 1

    def test_rejects_zero(self):
        basis = basis_from_matrices([E12])
        _, appended = span_append(basis, np.zeros((2, 2)))
        assert not appended

    def test_appends_orthogonal_direction(self):
        basis = basis_from_matrices([E12])
        out, appended = span_append(basis, E21)
        assert appended and out.dim == 2
        # elementary matrices are orthogonal under the trace inner product
        assert abs(np.sum(out.mats[0] * out.mats[1])) < 1e-14

    def test_rejects_non_finite(self):
        basis = MatrixBasis(2)
        with pytest.raises(ValidationError):
            span_append(basis, np.array([[np.inf, 0.0], [0.0, 0.0]]))


class TestLieClosure:
    def test_sl2_has_dimension_three(self):
        basis = lie_closure([E12, E21])
        assert basis.dim == 3
        assert is_bracket_closed(basis)
        assert basis.contains(np.diag([1.0, -1.0]))

    def test_commuting_diagonals_stay_two_dimensional(self):
        basis = lie_closure([np.diag([1.0, 2.0]), np.diag([3.0, -1.0])])
        assert basis.dim == 2
        assert is_bracket_closed(basis)

    def test_nilpotent_pair_adds_corner(self):
        basis = lie_closure([elementary(3, 0, 1), elementary(3, 1, 2)])
        assert basis.dim == 3
        assert basis.contains(elementary(3, 0, 2))

    def test_cap_trips_guard(self):
        with pytest.raises(GuardError):
            lie_closure([E12, E21], cap=2)

    def test_empty_generators_rejected(self):
        with pytest.raises(ValidationError):
            lie_closure([])


class TestSeries:
    def test_abelian_derived_dims(self):
        basis = lie_closure([np.diag([1.0, 2.0]), np.diag([3.0, -1.0])])
        assert [g.dim for g in derived_series(basis)] == [2, 0]

    def test_upper_triangular_2x2_derived(self):
        basis = basis_from_matrices(upper_triangular_basis(2))
        assert [g.dim for g in derived_series(basis)] == [3, 1, 0]

    def test_sl2_derived_stabilizes(self):
        basis = lie_closure([E12, E21])
        dims = [g.dim for g in derived_series(basis)]
        assert dims[-1] == dims[-2] == 3

    def test_strict_upper_3x3_lower_central(self):
        basis = basis_from_matrices(
            [elementary(3, 0, 1), elementary(3, 0, 2), elementary(3, 1, 2)]
        )
        assert [g.dim for g in lower_central_series(basis)] == [3, 1, 0]

    def test_upper_triangular_lower_central_never_dies(self):
        basis = basis_from_matrices(upper_triangular_basis(2))
        dims = [g.dim for g in lower_central_series(basis)]
        assert dims[0] == 3 and dims[-1] == dims[-2] == 1

    def test_series_members_are_nested(self):
        basis = basis_from_matrices(upper_triangular_basis(3))
        for series in (derived_series(basis), lower_central_series(basis)):
            for prev, cur in zip(series, series[1:]):
                assert all(prev.contains(m) for m in cur.mats)


class TestClassify:
    def test_diagonal_is_abelian(self):
        report = classify(lie_closure([np.diag([1.0, 2.0, -1.0]), np.diag([0.5, 0.5, 2.0])]))
        assert report.class_label == "abelian"
        assert report.nilpotency_class == 1
        assert report.derived_length == 1

    def test_strict_upper_3x3(self):
        report = classify(basis_from_matrices(
            [elementary(3, 0, 1), elementary(3, 0, 2), elementary(3, 1, 2)]
        ))
        assert report.class_label == "nilpotent"
        assert report.nilpotency_class == 2
        assert report.derived_length == 2

    def test_strict_upper_4x4_full(self):
        strict = [elementary(4, i, j) for i in range(4) for j in range(i + 1, 4)]
        report = classify(basis_from_matrices(strict))
        assert report.class_label == "nilpotent"
        assert report.nilpotency_class == 3
        assert report.derived_length == 2
        # nilpotency bounds derived length: ceil(log2(3)) + 1 = 3
        assert report.derived_length <= int(np.ceil(np.log2(report.nilpotency_class))) + 1

    def test_upper_triangular_2x2_solvable(self):
        report = classify(basis_from_matrices(upper_triangular_basis(2)))
        assert report.class_label == "solvable"
        assert report.derived_length == 2
        assert report.nilpotency_class is None

    def test_sl2_not_solvable(self):
        report = classify(lie_closure([E12, E21]))
        assert report.class_label == "non_solvable"
        assert report.derived_length is None

    def test_hierarchy_is_consistent(self):
        # abelian => nilpotent => solvable, encoded in the label ordering
        cases = [
            lie_closure([np.diag([1.0, 2.0])]),
            basis_from_matrices([elementary(3, 0, 1), elementary(3, 1, 2), elementary(3, 0, 2)]),
            basis_from_matrices(upper_triangular_basis(3)),
            lie_closure([E12, E21]),
        ]
        for basis in cases:
            report = classify(basis)
            if report.class_label == "abelian":
                assert report.nilpotency_class == 1
            if report.nilpotency_class is not None:
                assert report.derived_length is not None
            if report.class_label != "non_solvable":
                assert report.derived_dims[-1] == 0
                descending = report.derived_dims
                assert all(a > b for a, b in zip(descending, descending[1:]))
            assert all(
                a >= b
                for a, b in zip(report.lower_central_dims, report.lower_central_dims[1:])
            )
