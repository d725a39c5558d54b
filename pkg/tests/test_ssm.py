import numpy as np
import pytest

from liessm import (
    DeepSSMSpec,
    GuardError,
    PiecewisePath,
    SSMSpec,
    ValidationError,
    bracket,
    deep_simulate,
    estimate_sim_error,
    four_path_probe,
    homogenize,
    is_restricted,
    lift,
    project_lifted,
    simulate_state,
    transition_matrix,
)
from liessm.catalog import (
    abelian3_ssm,
    affine_so3_ssm,
    restricted_affine_ssm,
    so3_generators,
    so3_ssm,
)
from conftest import random_path
from oracles import rk4_affine_state


def affine_example():
    gens = np.stack([
        np.array([[0.0, 0.5], [-0.5, 0.1]]),
        np.array([[0.2, 0.0], [0.3, -0.4]]),
    ])
    b = np.array([[0.1, -0.2], [0.0, 0.3]])
    return SSMSpec(A=gens, b=b, h0=np.array([1.0, -0.5]), alphabet=("u", "v"))


class TestSpecValidation:
    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            SSMSpec(A=np.zeros((2, 2, 2)), b=np.zeros((2, 3)), h0=np.zeros(2))

    def test_non_finite(self):
        with pytest.raises(ValidationError):
            SSMSpec(A=np.full((1, 2, 2), np.nan), b=np.zeros((1, 2)), h0=np.zeros(2))

    def test_symbol_lookup(self):
        ssm = affine_example()
        assert ssm.symbol_index("v") == 1
        with pytest.raises(ValidationError):
            ssm.symbol_index("w")


class TestHomogenize:
    def test_block_layout(self):
        ssm = affine_example()
        hom = homogenize(ssm)
        assert hom.n == 3 and hom.is_homogeneous
        np.testing.assert_array_equal(hom.A[0][:2, :2], ssm.A[0])
        np.testing.assert_array_equal(hom.A[0][:2, 2], ssm.b[0])
        np.testing.assert_array_equal(hom.A[0][2], np.zeros(3))
        np.testing.assert_array_equal(hom.h0, [1.0, -0.5, 1.0])

    def test_affine_bracket_block(self):
        # abelian generators: the commutator of homogenized blocks carries
        # A(x) b(y) - A(y) b(x) in the translation column and zero elsewhere
        gens = np.stack([np.diag([0.3, -0.2]), np.diag([0.1, 0.4])])
        b = np.array([[1.0, 2.0], [-0.5, 0.25]])
        ssm = SSMSpec(A=gens, b=b, h0=np.zeros(2))
        hom = homogenize(ssm)
        comm = bracket(hom.A[0], hom.A[1])
        expected_col = gens[0] @ b[1] - gens[1] @ b[0]
        np.testing.assert_allclose(comm[:2, 2], expected_col, atol=1e-15)
        np.testing.assert_allclose(comm[:2, :2], np.zeros((2, 2)), atol=1e-15)
        np.testing.assert_allclose(comm[2], np.zeros(3), atol=1e-15)

    def test_simulation_commutes_with_homogenization(self, rng):
        ssm = affine_example()
        hom = homogenize(ssm)
        for _ in range(5):
            p = random_path(rng, 2)
            direct = simulate_state(ssm, p)
            lifted = simulate_state(hom, p)
            np.testing.assert_allclose(direct, lifted[:2], atol=1e-10)
            assert lifted[2] == pytest.approx(1.0)


class TestSimulateState:
    def test_pure_integration(self):
        gens = np.zeros((2, 2, 2))
        b = np.array([[1.0, 0.0], [0.0, 2.0]])
        ssm = SSMSpec(A=gens, b=b, h0=np.array([0.5, 0.5]))
        p = PiecewisePath(((0, 0.5), (1, 0.25)))
        np.testing.assert_allclose(
            simulate_state(ssm, p), [0.5 + 0.5, 0.5 + 0.5], atol=1e-14
        )

    def test_homogeneous_single_segment(self):
        ssm = so3_ssm(1.0)
        p = PiecewisePath(((1, 0.8),))
        from liessm.flows import expm

        np.testing.assert_allclose(
            simulate_state(ssm, p), expm(ssm.A[1] * 0.8) @ ssm.h0, atol=1e-13
        )

    def test_matches_rk4_oracle(self, rng):
        ssm = affine_example()
        for _ in range(5):
            p = random_path(rng, 2, min_segments=2, max_segments=3)
            ref = rk4_affine_state(ssm, p, step=1e-5)
            np.testing.assert_allclose(simulate_state(ssm, p), ref, atol=1e-8)

    def test_invalid_symbol(self):
        with pytest.raises(ValidationError):
            simulate_state(affine_example(), PiecewisePath(((5, 1.0),)))


class TestRestricted:
    def test_diagonal_with_translations(self):
        assert is_restricted(restricted_affine_ssm())

    def test_sl2_not_restricted(self):
        gens = np.zeros((2, 2, 2))
        gens[0, 0, 1] = 1.0
        gens[1, 1, 0] = 1.0
        ssm = SSMSpec(A=gens, b=np.zeros((2, 2)), h0=np.zeros(2))
        assert not is_restricted(ssm)

    def test_single_symbol_always_restricted(self):
        ssm = SSMSpec(A=so3_generators()[:1], b=np.zeros((1, 3)), h0=np.zeros(3))
        assert is_restricted(ssm)


class TestLift:
    def test_scalar_lift_is_same_system(self):
        ssm = SSMSpec.homogeneous(np.array([[[0.3]], [[-0.2]]]), h0=[2.0])
        lifted = lift(ssm)
        assert lifted.n == 1
        np.testing.assert_array_equal(lifted.A, ssm.A)

    def test_requires_homogeneous(self):
        with pytest.raises(ValidationError):
            lift(affine_example())

    def test_lifted_state_is_transition_matrix(self, rng):
        ssm = so3_ssm(1.0)
        lifted = lift(ssm)
        for _ in range(5):
            p = random_path(rng, 3)
            z = simulate_state(lifted, p)
            phi = transition_matrix(ssm, p)
            np.testing.assert_allclose(z.reshape(3, 3, order="F"), phi, atol=1e-10)
            np.testing.assert_allclose(
                project_lifted(z, 3, ssm.h0), simulate_state(ssm, p), atol=1e-10
            )


class TestDeepSimulate:
    def test_single_layer_identity_coupling(self, rng):
        ssm = affine_example()
        deep = DeepSSMSpec(layers=(ssm,), couplings=(None,))
        p = random_path(rng, 2, min_duration=0.2)
        out = deep_simulate(deep, p, step=1e-3)
        np.testing.assert_allclose(out[0], simulate_state(ssm, p), atol=1e-8)

    def test_zero_coupling_makes_upper_layer_autonomous(self, rng):
        lower = affine_example()
        upper = SSMSpec(
            A=np.stack([np.diag([-0.3, 0.2])]),
            b=np.array([[0.0, 0.0]]),
            h0=np.array([1.0, 2.0]),
            alphabet=("a",),
        )
        coupling = np.zeros((1, lower.n + 2))
        deep = DeepSSMSpec(layers=(lower, upper), couplings=(None, coupling))
        p = random_path(rng, 2, min_duration=0.2)
        out = deep_simulate(deep, p, step=1e-3)
        # zero input coefficients freeze the upper layer entirely
        np.testing.assert_allclose(out[1], upper.h0, atol=1e-12)

    def test_driven_stack_converges_at_fourth_order(self):
        lower = affine_example()
        upper = SSMSpec(
            A=np.stack([np.diag([-0.3, 0.2]), np.array([[0.0, 0.4], [-0.4, 0.0]])]),
            b=np.array([[0.0, 0.1], [0.2, 0.0]]),
            h0=np.array([1.0, 0.0]),
            alphabet=("a", "b"),
        )
        coupling = np.array([[0.5, -0.2, 0.3, 0.0], [0.1, 0.4, 0.0, 0.1]])
        deep = DeepSSMSpec(layers=(lower, upper), couplings=(None, coupling))
        p = PiecewisePath(((0, 0.4), (1, 0.6)))
        coarse = deep_simulate(deep, p, step=0.04)[1]
        mid = deep_simulate(deep, p, step=0.02)[1]
        fine = deep_simulate(deep, p, step=0.01)[1]
        ratio = np.linalg.norm(coarse - mid) / np.linalg.norm(mid - fine)
        assert 10.0 <= ratio <= 24.0

    def test_step_must_fit_segments(self):
        deep = DeepSSMSpec(layers=(affine_example(),), couplings=(None,))
        with pytest.raises(ValidationError):
            deep_simulate(deep, PiecewisePath(((0, 0.05),)), step=0.1)

    def test_coupling_shape_validated(self):
        lower = affine_example()
        with pytest.raises(ValidationError):
            DeepSSMSpec(layers=(lower, lower), couplings=(None, np.zeros((2, 3))))


class TestEstimateSimError:
    def test_self_simulation_is_exact(self):
        target = so3_ssm()
        report = estimate_sim_error(target, target, 2.0, 50, seed=4)
        assert report.delta_hat <= 1e-10
        np.testing.assert_allclose(report.P, np.eye(3), atol=1e-8)

    def test_sample_count_precondition(self):
        target = so3_ssm()
        with pytest.raises(ValidationError):
            estimate_sim_error(target, target, 1.0, 2, seed=0)

    def test_alphabet_mismatch(self):
        with pytest.raises(ValidationError):
            estimate_sim_error(so3_ssm(), affine_so3_ssm(), 1.0, 50, seed=0)

    def test_nonabelian_gap_grows_with_horizon(self):
        target, approx = so3_ssm(), abelian3_ssm()
        deltas = [
            estimate_sim_error(target, approx, T, 120, seed=0).delta_hat
            for T in (1.0, 2.0, 4.0, 8.0)
        ]
        assert deltas[0] > 0.0
        assert all(a <= b for a, b in zip(deltas, deltas[1:]))

    def test_sup_is_monotone_for_fixed_readout(self):
        target, approx = so3_ssm(), abelian3_ssm()
        report = estimate_sim_error(target, approx, 2.0, 100, seed=0)
        assert report.residuals[:50].max() <= report.delta_hat

    def test_nested_samples_do_not_shrink_much(self):
        target, approx = so3_ssm(), abelian3_ssm()
        small = estimate_sim_error(target, approx, 2.0, 60, seed=0)
        big = estimate_sim_error(target, approx, 2.0, 120, seed=0)
        # per-index seeding nests the path sets; only the refit can move delta
        assert big.delta_hat >= small.delta_hat - 0.05 * small.delta_hat

    def test_degenerate_fit_guard(self):
        # approximant whose endpoint cloud is rank deficient
        gens = np.zeros((3, 2, 2))
        flat = SSMSpec(A=gens, b=np.zeros((3, 2)), h0=np.array([1.0, 0.0]))
        with pytest.raises(GuardError):
            estimate_sim_error(so3_ssm(), flat, 1.0, 20, seed=0)


class TestFourPathProbe:
    def prefixes(self):
        p1 = PiecewisePath(((0, 0.5), (1, 0.5)))
        p2 = PiecewisePath(((1, 0.6), (0, 0.4)))
        xy = PiecewisePath(((0, 0.5), (1, 0.5)))
        return p1, p2, xy

    def test_restricted_system_vanishes(self):
        p1, p2, xy = self.prefixes()
        report = four_path_probe(restricted_affine_ssm(), p1, p2, xy)
        assert report.suffix_gap_norm <= 1e-12
        assert report.diff_norm <= 1e-12
        assert report.residual <= 1e-12

    def test_general_system_identity_holds(self):
        p1, p2, xy = self.prefixes()
        report = four_path_probe(affine_so3_ssm(), p1, p2, xy)
        assert report.diff_norm > 1e-4  # genuinely order sensitive
        assert report.residual <= 1e-10

    def test_equal_prefixes_zero_both_sides(self):
        p1, _, xy = self.prefixes()
        report = four_path_probe(affine_so3_ssm(), p1, p1, xy)
        assert report.diff_norm <= 1e-12
        assert np.linalg.norm(report.prefix_state_gap) <= 1e-12

    def test_prefix_duration_mismatch(self):
        p1, _, xy = self.prefixes()
        longer = PiecewisePath(((0, 0.5), (1, 0.75)))
        with pytest.raises(ValidationError):
            four_path_probe(affine_so3_ssm(), p1, longer, xy)

    def test_suffix_needs_two_segments(self):
        p1, p2, _ = self.prefixes()
        with pytest.raises(ValidationError):
            four_path_probe(affine_so3_ssm(), p1, p2, PiecewisePath(((0, 1.0),)))
