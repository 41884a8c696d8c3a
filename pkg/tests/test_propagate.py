"""Propagation-route tests.

The central check is three independent computations of W^2(k) agreeing:
exact mixture pushing, the n x n moment recursion, and the lifted n^2
product. Derived expectations use explicit enumeration and Kronecker
oracles computed inline.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from jumpstab.matkit import NumericalError, unvec, vec
from jumpstab.propagate import (
    GammaState,
    gamma_product,
    lifted_step_matrix,
    mog_propagate,
    mog_step,
    moment_step,
    w2_trajectory,
)
from jumpstab.sysmodel import (
    GaussianMixture,
    IIDSwitching,
    JumpLinearSystem,
    MarkovSwitching,
    ScheduleSwitching,
    SecondMomentState,
    SequenceSwitching,
)
from jumpstab.wasserstein import synthetic_gaussian


def random_system(rng, m, n, scale=0.9):
    mats = []
    for _ in range(m):
        a = rng.standard_normal((n, n))
        a *= scale / max(np.max(np.abs(np.linalg.eigvals(a))), 1e-6)
        mats.append(a)
    return JumpLinearSystem(modes=mats)


def random_mixture(rng, n, q):
    w = rng.random(q) + 0.1
    w /= w.sum()
    means = rng.standard_normal((q, n))
    covs = np.empty((q, n, n))
    for i in range(q):
        g = rng.standard_normal((n, n)) * 0.5
        covs[i] = g @ g.T
    return GaussianMixture(weights=w, means=means, covs=covs)


def point_mass(x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    return GaussianMixture.from_components([(1.0, x, np.zeros((n, n)))])


class TestLiftedStepMatrix:
    def test_single_mode_is_self_kron(self):
        a = np.array([[0.5, 0.1], [0.0, 0.3]])
        sys = JumpLinearSystem(modes=[a])
        assert_allclose(lifted_step_matrix(sys, [1.0]), np.kron(a, a))

    def test_acts_as_moment_update(self):
        rng = np.random.default_rng(79)
        sys = random_system(rng, m=3, n=3)
        pi = np.array([0.2, 0.5, 0.3])
        phi = rng.standard_normal((3, 3))
        phi = phi @ phi.T
        lifted = lifted_step_matrix(sys, pi) @ vec(phi)
        direct = sum(
            pi[j] * sys.modes[j] @ phi @ sys.modes[j].T for j in range(3)
        )
        assert_allclose(unvec(lifted, 3), direct, atol=1e-12)


class TestMogStep:
    def test_component_count_and_weights(self):
        rng = np.random.default_rng(83)
        sys = random_system(rng, m=2, n=2)
        mix = random_mixture(rng, n=2, q=2)
        pi = np.array([0.3, 0.7])
        out = mog_step(sys, pi, mix)
        assert out.q == 4
        expected = np.outer(pi, mix.weights).reshape(-1)
        assert_allclose(out.weights, expected, atol=1e-15)

    def test_scalar_pushforward(self):
        sys = JumpLinearSystem(modes=[[[2.0]]])
        mix = GaussianMixture.from_components([(1.0, [1.0], [[1.0]])])
        out = mog_step(sys, [1.0], mix)
        assert out.q == 1
        assert_allclose(out.means, [[2.0]])
        assert_allclose(out.covs, [[[4.0]]])

    def test_second_moment_recursion_oracle(self):
        rng = np.random.default_rng(89)
        sys = random_system(rng, m=2, n=2)
        mix = random_mixture(rng, n=2, q=3)
        pi = np.array([0.4, 0.6])
        out = mog_step(sys, pi, mix)
        mean_in, cov_in = synthetic_gaussian(mix)
        phi_in = np.outer(mean_in, mean_in) + cov_in
        mean_out, cov_out = synthetic_gaussian(out)
        phi_out = np.outer(mean_out, mean_out) + cov_out
        oracle = sum(
            pi[j] * sys.modes[j] @ phi_in @ sys.modes[j].T for j in range(2)
        )
        assert_allclose(phi_out, oracle, atol=1e-12)

    def test_zero_probability_modes_dropped(self):
        sys = JumpLinearSystem(modes=[[[2.0]], [[3.0]]])
        mix = point_mass([1.0])
        out = mog_step(sys, [1.0, 0.0], mix)
        assert out.q == 1
        assert_allclose(out.means, [[2.0]])

    def test_weight_floor_prunes_and_renormalizes(self):
        sys = JumpLinearSystem(modes=[[[1.0]], [[2.0]]])
        mix = point_mass([1.0])
        out = mog_step(sys, [0.99, 0.01], mix, weight_floor=0.05)
        assert out.q == 1
        assert_allclose(out.weights, [1.0])
        assert_allclose(out.means, [[1.0]])

    def test_floor_pruning_everything_rejected(self):
        sys = JumpLinearSystem(modes=[[[1.0]], [[2.0]]])
        mix = point_mass([1.0])
        with pytest.raises(ValueError, match="prunes every"):
            mog_step(sys, [0.5, 0.5], mix, weight_floor=0.9)

    def test_dimension_mismatch(self):
        sys = JumpLinearSystem(modes=[np.eye(2)])
        with pytest.raises(ValueError, match="dimension"):
            mog_step(sys, [1.0], point_mass([1.0, 2.0, 3.0]))


class TestMogPropagate:
    def test_zero_steps_returns_init(self):
        rng = np.random.default_rng(97)
        sys = random_system(rng, m=2, n=2)
        mix = random_mixture(rng, n=2, q=2)
        out = mog_propagate(sys, IIDSwitching([0.5, 0.5]), mix, 0)
        assert out is mix

    def test_geometric_component_count(self):
        rng = np.random.default_rng(101)
        sys = random_system(rng, m=2, n=2)
        mix = random_mixture(rng, n=2, q=1)
        out = mog_propagate(sys, IIDSwitching([0.5, 0.5]), mix, 3)
        assert out.q == 8

    def test_two_step_means_enumerate_mode_pairs(self):
        rng = np.random.default_rng(103)
        sys = random_system(rng, m=2, n=2)
        mu0 = rng.standard_normal(2)
        mix = point_mass(mu0)
        pi = np.array([0.3, 0.7])
        out = mog_propagate(sys, IIDSwitching(pi), mix, 2)
        # mode-major: output index i = 2*j2 + j1 carries A_{j2} A_{j1} mu0
        a = sys.modes
        for j2 in range(2):
            for j1 in range(2):
                i = 2 * j2 + j1
                assert_allclose(
                    out.means[i], a[j2] @ a[j1] @ mu0, atol=1e-13
                )
                assert out.weights[i] == pytest.approx(
                    pi[j2] * pi[j1], rel=1e-12
                )

    def test_cap_error_names_count(self):
        rng = np.random.default_rng(107)
        sys = random_system(rng, m=3, n=2)
        mix = random_mixture(rng, n=2, q=2)
        with pytest.raises(ValueError, match=r"3\^11\*2 = 354294"):
            mog_propagate(sys, IIDSwitching([1 / 3] * 3), mix, 11, cap=1000)

    def test_invalid_inputs_rejected(self):
        sys = JumpLinearSystem(modes=[np.eye(2), np.eye(2)])
        mix = point_mass([1.0, 0.0])
        with pytest.raises(ValueError, match="probability sum"):
            mog_propagate(sys, IIDSwitching([0.6, 0.6]), mix, 2)


class TestMomentStep:
    def test_scalar_modes(self):
        sys = JumpLinearSystem(modes=[[[2.0]], [[0.1]]])
        state = SecondMomentState(phi=[[1.0]], k=0)
        out = moment_step(sys, [0.5, 0.5], state)
        assert out.k == 1
        assert out.phi[0, 0] == pytest.approx(2.005, rel=1e-14)

    def test_identity_mode_fixes_phi(self):
        sys = JumpLinearSystem(modes=[np.eye(3)])
        phi = np.diag([1.0, 2.0, 3.0])
        out = moment_step(sys, [1.0], SecondMomentState(phi=phi, k=4))
        assert_allclose(out.phi, phi)
        assert out.k == 5

    def test_kronecker_lift_oracle(self):
        rng = np.random.default_rng(109)
        sys = random_system(rng, m=2, n=3)
        pi = np.array([0.25, 0.75])
        phi = rng.standard_normal((3, 3))
        phi = phi @ phi.T
        out = moment_step(sys, pi, SecondMomentState(phi=phi, k=0))
        oracle = unvec(lifted_step_matrix(sys, pi) @ vec(phi), 3)
        assert_allclose(out.phi, oracle, atol=1e-12)


class TestGammaProduct:
    def test_zero_steps_identity(self):
        sys = JumpLinearSystem(modes=[np.eye(2), np.eye(2)])
        state = gamma_product(sys, IIDSwitching([0.5, 0.5]), 0)
        assert_allclose(state.gamma, np.eye(4))
        assert state.k == 0
        assert not state.diverged

    def test_single_factor_iid(self):
        rng = np.random.default_rng(113)
        sys = random_system(rng, m=2, n=2)
        pi = np.array([0.3, 0.7])
        state = gamma_product(sys, IIDSwitching(pi), 1)
        assert_allclose(state.gamma, lifted_step_matrix(sys, pi))

    def test_dual_path_against_moment_recursion(self):
        rng = np.random.default_rng(127)
        for _ in range(5):
            sys = random_system(rng, m=2, n=2)
            law = IIDSwitching([0.4, 0.6])
            phi0 = rng.standard_normal((2, 2))
            phi0 = phi0 @ phi0.T
            state = SecondMomentState(phi=phi0, k=0)
            for k in range(1, 11):
                state = moment_step(sys, [0.4, 0.6], state)
                gs = gamma_product(sys, law, k)
                lhs = vec(np.eye(2)) @ gs.gamma @ vec(phi0)
                assert lhs == pytest.approx(
                    np.trace(state.phi), rel=1e-10
                )

    def test_sequence_product_is_kron_square(self):
        rng = np.random.default_rng(131)
        for _ in range(3):
            sys = random_system(rng, m=2, n=2)
            seq = tuple(int(i) for i in rng.integers(1, 3, size=6))
            state = gamma_product(sys, SequenceSwitching(seq), 6)
            prod = np.eye(2)
            for i in seq:
                prod = sys.modes[i - 1] @ prod
            assert_allclose(state.gamma, np.kron(prod, prod), atol=1e-10)

    def test_divergence_flag(self):
        sys = JumpLinearSystem(modes=[[[2.0]]])
        state = gamma_product(sys, IIDSwitching([1.0]), 300)
        assert state.diverged
        assert state.k < 300
        assert np.all(np.isfinite(state.gamma))
        # the returned product is the last one under the guard
        assert abs(state.gamma[0, 0]) <= 1e150


class TestW2Trajectory:
    def test_scalar_geometric_decay(self):
        sys = JumpLinearSystem(modes=[[[0.5]]])
        recs = w2_trajectory(sys, IIDSwitching([1.0]), point_mass([1.0]), 6)
        assert [r.k for r in recs] == list(range(7))
        for r in recs:
            assert r.w2 == pytest.approx(0.25**r.k, rel=1e-12)

    def test_scalar_iid_growth(self):
        sys = JumpLinearSystem(modes=[[[2.0]], [[0.1]]])
        recs = w2_trajectory(
            sys, IIDSwitching([0.5, 0.5]), point_mass([1.0]), 10
        )
        for r in recs:
            assert r.w2 == pytest.approx(2.005**r.k, rel=1e-12)

    @pytest.mark.parametrize("law_kind", ["iid", "markov", "schedule"])
    def test_three_methods_agree(self, law_kind):
        rng = np.random.default_rng(137)
        for trial in range(3):
            sys = random_system(rng, m=2, n=2, scale=1.05)
            mix = random_mixture(rng, n=2, q=2)
            if law_kind == "iid":
                law = IIDSwitching([0.35, 0.65])
            elif law_kind == "markov":
                law = MarkovSwitching(
                    P=[[0.2, 0.8], [0.6, 0.4]], pi0=[0.5, 0.5]
                )
            else:
                law = ScheduleSwitching(
                    [[0.9, 0.1], [0.1, 0.9], [0.5, 0.5]]
                )
            results = {
                method: w2_trajectory(sys, law, mix, 8, method=method)
                for method in ("moment", "gamma", "exact_mog")
            }
            base = results["moment"]
            for method in ("gamma", "exact_mog"):
                for r_base, r_other in zip(base, results[method]):
                    assert r_other.w2 == pytest.approx(
                        r_base.w2, rel=1e-9
                    ), f"{law_kind} trial {trial} k={r_base.k} {method}"

    def test_exact_mog_internal_consistency(self):
        rng = np.random.default_rng(139)
        sys = random_system(rng, m=2, n=2)
        mix = random_mixture(rng, n=2, q=2)
        recs = w2_trajectory(
            sys, IIDSwitching([0.5, 0.5]), mix, 5, method="exact_mog"
        )
        for r in recs:
            assert r.component_count == 2 * 2**r.k
            assert r.phi_trace == pytest.approx(r.w2, rel=1e-12)

    def test_moment_methods_have_no_component_count(self):
        sys = JumpLinearSystem(modes=[[[0.5]]])
        recs = w2_trajectory(sys, IIDSwitching([1.0]), point_mass([1.0]), 3)
        assert all(r.component_count is None for r in recs)

    def test_sequence_law_trajectory(self):
        sys = JumpLinearSystem(modes=[[[2.0]], [[0.1]]])
        law = SequenceSwitching((1, 2))
        recs = w2_trajectory(sys, law, point_mass([1.0]), 4)
        # x alternates: 2, 0.2, 0.4, 0.04; squared: 4, 0.04, 0.16, 0.0016
        expected = [1.0, 4.0, 0.04, 0.16, 0.0016]
        for r, e in zip(recs, expected):
            assert r.w2 == pytest.approx(e, rel=1e-12)

    def test_phi_stays_psd_along_trajectory(self):
        rng = np.random.default_rng(149)
        sys = random_system(rng, m=3, n=3, scale=1.1)
        mix = random_mixture(rng, n=3, q=2)
        law = IIDSwitching([0.2, 0.3, 0.5])
        mean, cov = synthetic_gaussian(mix)
        phi = np.outer(mean, mean) + cov
        state = SecondMomentState(phi=phi, k=0)
        for k in range(20):
            state = moment_step(sys, law.pi, state)
            scale = max(np.max(np.abs(state.phi)), 1e-30)
            assert np.min(np.linalg.eigvalsh(state.phi)) >= -1e-9 * scale

    def test_zero_initial_mass_stays_zero(self):
        rng = np.random.default_rng(151)
        sys = random_system(rng, m=2, n=2, scale=1.3)
        mix = point_mass([0.0, 0.0])
        for method in ("moment", "gamma", "exact_mog"):
            recs = w2_trajectory(
                sys, IIDSwitching([0.5, 0.5]), mix, 10, method=method
            )
            assert all(r.w2 == pytest.approx(0.0, abs=1e-300) for r in recs)

    def test_k_zero_single_record(self):
        sys = JumpLinearSystem(modes=[[[0.5]]])
        recs = w2_trajectory(sys, IIDSwitching([1.0]), point_mass([3.0]), 0)
        assert len(recs) == 1
        assert recs[0].w2 == pytest.approx(9.0)

    def test_unknown_method(self):
        sys = JumpLinearSystem(modes=[[[0.5]]])
        with pytest.raises(ValueError, match="unknown method"):
            w2_trajectory(
                sys, IIDSwitching([1.0]), point_mass([1.0]), 3, method="mc"
            )

    def test_divergence_raises_numerical_error(self):
        sys = JumpLinearSystem(modes=[[[2.0]]])
        with pytest.raises(NumericalError, match="diverged at k="):
            w2_trajectory(sys, IIDSwitching([1.0]), point_mass([1.0]), 600)

    def test_gamma_divergence_raises_too(self):
        sys = JumpLinearSystem(modes=[[[2.0]]])
        with pytest.raises(NumericalError, match="diverged"):
            w2_trajectory(
                sys, IIDSwitching([1.0]), point_mass([1.0]), 600,
                method="gamma",
            )

    def test_validation_failures_surface(self):
        sys = JumpLinearSystem(modes=[np.eye(2), np.eye(2)])
        with pytest.raises(ValueError, match="probability sum"):
            w2_trajectory(
                sys, IIDSwitching([0.6, 0.6]), point_mass([1.0, 0.0]), 3
            )
