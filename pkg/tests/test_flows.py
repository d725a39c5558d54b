import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liessm import (
    GuardError,
    PiecewisePath,
    ValidationError,
    commutator_mass,
    generator_mass,
    logm_principal,
    magnus_terms,
    permute_segments,
    reverse_path,
    split_path,
    spectral_norm,
    transition_matrix,
    truncated_flow,
)
from liessm.catalog import diagonal_generators, so3_generators
from liessm.flows import expm, scale_path
from conftest import random_path
from oracles import omega2_quadrature, omega3_quadrature, rk4_transition

J = so3_generators()
DIAG = diagonal_generators()

path_strategy = st.lists(
    st.tuples(st.integers(0, 2), st.floats(min_value=0.05, max_value=0.5)),
    min_size=1,
    max_size=5,
).map(lambda segs: PiecewisePath(tuple(segs)))


class TestPiecewisePath:
    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            PiecewisePath(())

    def test_rejects_nonpositive_duration(self):
        with pytest.raises(ValidationError):
            PiecewisePath(((0, 0.0),))

    def test_total_duration(self):
        assert PiecewisePath(((0, 1.0), (1, 2.0))).total_duration == 3.0

    def test_reverse(self):
        p = PiecewisePath(((0, 1.0), (1, 2.0)))
        assert reverse_path(p).segments == ((1, 2.0), (0, 1.0))

    @settings(max_examples=50, deadline=None)
    @given(path_strategy)
    def test_reverse_is_involution(self, p):
        assert reverse_path(reverse_path(p)).segments == p.segments

    def test_split_inside_segment(self):
        p = PiecewisePath(((0, 1.0), (1, 1.0)))
        left, right = split_path(p, 0.25)
        assert left.segments == ((0, 0.25),)
        assert right.segments == ((0, 0.75), (1, 1.0))

    def test_split_at_boundary(self):
        p = PiecewisePath(((0, 1.0), (1, 1.0)))
        left, right = split_path(p, 1.0)
        assert left.segments == ((0, 1.0),)
        assert right.segments == ((1, 1.0),)


class TestTransitionMatrix:
    def test_single_segment(self):
        p = PiecewisePath(((1, 0.7),))
        np.testing.assert_allclose(transition_matrix(J, p), expm(J[1] * 0.7), rtol=1e-14)

    def test_semigroup_within_symbol(self):
        whole = PiecewisePath(((0, 0.9),))
        pieces = PiecewisePath(((0, 0.4), (0, 0.5)))
        np.testing.assert_allclose(
            transition_matrix(J, whole), transition_matrix(J, pieces), atol=1e-14
        )

    def test_matches_rk4_oracle(self, rng):
        for _ in range(5):
            p = random_path(rng, 3)
            phi = transition_matrix(J, p)
            oracle = rk4_transition(J, p, step=1e-5)
            assert spectral_norm(phi - oracle) <= 1e-8

    def test_invalid_symbol(self):
        with pytest.raises(ValidationError):
            transition_matrix(J, PiecewisePath(((7, 1.0),)))

    def test_cocycle_property(self, rng):
        for _ in range(20):
            p = random_path(rng, 3, min_segments=2)
            total = p.total_duration
            at = float(rng.uniform(0.2, 0.8)) * total
            left, right = split_path(p, at)
            whole = transition_matrix(J, p)
            composed = transition_matrix(J, right) @ transition_matrix(J, left)
            assert spectral_norm(whole - composed) <= 1e-10 * spectral_norm(whole)

    def test_liouville_determinant(self, rng):
        gens = np.stack([rng.normal(size=(3, 3)) for _ in range(2)])
        for _ in range(10):
            p = random_path(rng, 2)
            phi = transition_matrix(gens, p)
            trace_integral = sum(np.trace(gens[s]) * d for s, d in p.segments)
            np.testing.assert_allclose(
                np.linalg.det(phi), np.exp(trace_integral), rtol=1e-8
            )

    def test_abelian_permutation_invariance(self, rng):
        for _ in range(20):
            p = random_path(rng, 2, min_segments=3, max_segments=6)
            perm = rng.permutation(len(p.segments)).tolist()
            a = transition_matrix(DIAG, p)
            b = transition_matrix(DIAG, permute_segments(p, perm))
            assert spectral_norm(a - b) <= 1e-10 * spectral_norm(a)


class TestMagnusTerms:
    def test_omega1_is_weighted_sum(self):
        p = PiecewisePath(((0, 0.3), (2, 0.6)))
        res = magnus_terms(J, p, order=1)
        np.testing.assert_allclose(res.omega1, 0.3 * J[0] + 0.6 * J[2], rtol=1e-15)
        assert res.omega2 is None and res.omega3 is None

    def test_two_segment_omega2_closed_form(self):
        s, total = 0.3, 1.0
        p = PiecewisePath(((0, s), (1, total - s)))
        res = magnus_terms(J, p, order=2)
        closed = 0.5 * s * (total - s) * (J[1] @ J[0] - J[0] @ J[1])
        assert np.abs(res.omega2 - closed).max() <= 1e-12

    def test_commuting_family_kills_higher_terms(self, rng):
        p = random_path(rng, 2, min_segments=3)
        res = magnus_terms(DIAG, p, order=3)
        assert spectral_norm(res.omega2) <= 1e-12
        assert spectral_norm(res.omega3) <= 1e-12

    def test_omega2_matches_quadrature(self, rng):
        for _ in range(10):
            p = random_path(rng, 3)
            res = magnus_terms(J, p, order=2)
            oracle = omega2_quadrature(J, p)
            assert np.abs(res.omega2 - oracle).max() <= 1e-12

    def test_omega3_matches_quadrature(self, rng):
        for _ in range(10):
            p = random_path(rng, 3, min_segments=3)
            res = magnus_terms(J, p, order=3)
            oracle = omega3_quadrature(J, p)
            scale = max(np.abs(oracle).max(), 1e-30)
            assert np.abs(res.omega3 - oracle).max() <= 1e-8 * scale

    def test_omega2_flips_under_reversal(self, rng):
        for _ in range(10):
            p = random_path(rng, 3)
            om = magnus_terms(J, p, order=2).omega2
            omr = magnus_terms(J, reverse_path(p), order=2).omega2
            assert np.abs(om + omr).max() <= 1e-12

    def test_reversal_preserves_commutator_mass(self, rng):
        p = random_path(rng, 3)
        np.testing.assert_allclose(
            commutator_mass(J, p), commutator_mass(J, reverse_path(p)), rtol=1e-10
        )

    def test_unsupported_order(self):
        with pytest.raises(ValidationError):
            magnus_terms(J, PiecewisePath(((0, 1.0),)), order=4)

    def test_generator_mass_accumulates_norms(self):
        p = PiecewisePath(((0, 0.25), (1, 0.5)))
        assert generator_mass(J, p) == pytest.approx(0.75, rel=1e-10)


class TestTruncatedFlow:
    def test_commuting_truncation_is_exact(self, rng):
        gens = DIAG * 0.2
        p = random_path(rng, 2)
        phi = transition_matrix(gens, p)
        for order in (1, 2, 3):
            assert spectral_norm(truncated_flow(gens, p, order) - phi) <= 1e-10

    def test_mass_guard(self):
        p = PiecewisePath(((0, 2.0),))
        with pytest.raises(GuardError):
            truncated_flow(J, p, 2)

    def test_error_improves_with_order(self):
        p = PiecewisePath(((0, 0.35), (1, 0.25), (2, 0.25)))
        phi = transition_matrix(J, p)
        errors = [spectral_norm(truncated_flow(J, p, c) - phi) for c in (1, 2, 3)]
        assert errors[0] > errors[1] > errors[2]


class TestReversalResidual:
    def test_log_residual_shrinks_at_fourth_order(self):
        base = PiecewisePath(((0, 0.4), (1, 0.35), (2, 0.25)))
        horizons = np.geomspace(1e-3, 1e-1, 7)
        residuals = []
        for total in horizons:
            p = scale_path(base, float(total))
            om = logm_principal(transition_matrix(J, p))
            omr = logm_principal(transition_matrix(J, reverse_path(p)))
            om2 = magnus_terms(J, p, order=2).omega2
            residuals.append(spectral_norm(om - omr - 2.0 * om2))
        slope = np.polyfit(np.log(horizons), np.log(residuals), 1)[0]
        assert slope == pytest.approx(4.0, abs=0.3)

    def test_lower_bound_inequality_on_so3(self, rng):
        for _ in range(25):
            p = random_path(rng, 3, min_duration=0.05, max_duration=0.2)
            pr = reverse_path(p)
            phi, phir = transition_matrix(J, p), transition_matrix(J, pr)
            om, omr = logm_principal(phi), logm_principal(phir)
            lhs = spectral_norm(phi - phir)
            rhs = np.exp(-max(spectral_norm(om), spectral_norm(omr))) * spectral_norm(om - omr)
            assert lhs >= rhs - 1e-14
