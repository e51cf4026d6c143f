import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sensordrop.exceptions import InvalidInputError, NotPositiveDefiniteError, NumericError
from sensordrop.gp import (
    LOG_2PI_E,
    KernelParams,
    NoiseParams,
    UncertainLocation,
    assemble_covariances,
    cholesky_factor,
    expected_cov_entry,
    expected_cov_matrix,
    gaussian_entropy,
    gp_posterior,
    log_det,
    mutual_information,
    se_gram,
    se_kernel,
)


def mc_expected_kernel(a, b, kernel, n=1_000_000, seed=0):
    """Sample mean of the SE kernel over independent draws of both locations."""
    rng = np.random.default_rng(seed)
    xa = rng.multivariate_normal(a.mean, a.covariance, size=n)
    xb = rng.multivariate_normal(b.mean, b.covariance, size=n)
    d = (xa - xb) / np.asarray(kernel.length_scales)
    return kernel.signal_variance * np.mean(np.exp(-0.5 * np.sum(d * d, axis=1)))


def random_drops(rng, n, spread=60.0, max_var=400.0):
    out = []
    for _ in range(n):
        A = rng.normal(size=(2, 2))
        cov = A @ A.T
        cov *= rng.uniform(0.0, max_var) / np.trace(cov)
        out.append(UncertainLocation(rng.uniform(0, spread, 2), cov))
    return out


class TestKernel:
    def test_zero_distance(self):
        k = KernelParams(2.5, (3.0, 7.0))
        assert se_kernel([1.0, 2.0], [1.0, 2.0], k) == 2.5

    def test_one_length_scale_apart(self):
        k = KernelParams(1.0, (10.0, 10.0))
        val = se_kernel([10.0, 0.0], [0.0, 0.0], k)
        # second route: Gram-matrix implementation
        gram = se_gram(np.array([[10.0, 0.0]]), np.array([[0.0, 0.0]]), k)[0, 0]
        assert val == pytest.approx(np.exp(-0.5), rel=1e-15)
        assert gram == pytest.approx(val, rel=1e-15)
        assert val == pytest.approx(0.6065306597126334, rel=1e-12)

    @given(st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=4))
    def test_symmetric_and_bounded(self, xs):
        k = KernelParams(1.7, (12.0, 30.0))
        a, b = xs[:2], xs[2:]
        assert se_kernel(a, b, k) == se_kernel(b, a, k)
        assert se_kernel(a, b, k) <= 1.7

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidInputError):
            se_kernel([np.nan, 0.0], [0.0, 0.0], KernelParams(1.0))

    def test_bad_params(self):
        with pytest.raises(InvalidInputError):
            KernelParams(0.0)
        with pytest.raises(InvalidInputError):
            KernelParams(1.0, (1.0, -2.0))
        with pytest.raises(InvalidInputError):
            KernelParams(1.0, (1.0, 2.0, 3.0))


class TestExpectedCovariance:
    def test_same_point_is_signal_variance(self):
        k = KernelParams(0.3, (5.0, 9.0))
        a = UncertainLocation([1.0, 2.0], [[40.0, 5.0], [5.0, 20.0]])
        assert expected_cov_entry(a, a, True, k) == 0.3

    def test_zero_uncertainty_reduces_to_kernel(self):
        k = KernelParams(1.3, (20.0, 35.0))
        a, b = UncertainLocation.certain([3.0, -4.0]), UncertainLocation.certain([25.0, 11.0])
        assert expected_cov_entry(a, b, False, k) == pytest.approx(se_kernel(a.mean, b.mean, k), rel=1e-14)

    def test_hand_value(self):
        k = KernelParams(1.0, (10.0, 10.0))
        a = UncertainLocation([10.0, 0.0], 50.0 * np.eye(2))
        b = UncertainLocation([0.0, 0.0], 50.0 * np.eye(2))
        assert expected_cov_entry(a, b, False, k) == pytest.approx(np.exp(-0.25) / 2, rel=1e-14)
        assert expected_cov_entry(a, b, False, k) == pytest.approx(0.38940039153570244, rel=1e-12)

    def test_hand_value_monte_carlo(self):
        k = KernelParams(1.0, (10.0, 10.0))
        a = UncertainLocation([10.0, 0.0], 50.0 * np.eye(2))
        b = UncertainLocation([0.0, 0.0], 50.0 * np.eye(2))
        assert mc_expected_kernel(a, b, k) == pytest.approx(expected_cov_entry(a, b, False, k), rel=0.01)

    @pytest.mark.parametrize("seed", range(3))
    def test_random_inputs_monte_carlo(self, seed):
        rng = np.random.default_rng(100 + seed)
        k = KernelParams(rng.uniform(0.5, 2.0), tuple(rng.uniform(10.0, 40.0, 2)))
        a, b = random_drops(rng, 2, spread=40.0)
        assert mc_expected_kernel(a, b, k, seed=seed) == pytest.approx(expected_cov_entry(a, b, False, k), rel=0.01)

    def test_vectorized_matches_scalar(self, rng):
        k = KernelParams(0.8, (15.0, 25.0))
        drops = random_drops(rng, 6)
        means = np.array([d.mean for d in drops])
        covs = np.array([d.covariance for d in drops])
        M = expected_cov_matrix(means, covs, means, covs, k)
        for i in range(6):
            for j in range(6):
                if i != j:
                    assert M[i, j] == pytest.approx(expected_cov_entry(drops[i], drops[j], False, k), rel=1e-12)

    @given(st.floats(0.0, 1e3), st.floats(0.0, 1e3), st.floats(0.0, 1.0), st.floats(0.0, 2 * np.pi))
    def test_shrinks_with_uncertainty_near_diagonal(self, s1, s2, r, theta):
        # d/ds log E[k] = |d|^2 / (2 (w + s)^2) - 1 / (w + s): nonpositive while |d|^2 <= 2 (w + s)
        w = 400.0
        k = KernelParams(1.0, (20.0, 20.0))
        lo, hi = min(s1, s2), max(s1, s2)
        d = r * np.sqrt(2 * (w + 2 * lo)) * np.array([np.cos(theta), np.sin(theta)])
        a_lo, b_lo = UncertainLocation(d, lo * np.eye(2)), UncertainLocation([0, 0], lo * np.eye(2))
        a_hi, b_hi = UncertainLocation(d, hi * np.eye(2)), UncertainLocation([0, 0], hi * np.eye(2))
        val_hi = expected_cov_entry(a_hi, b_hi, False, k)
        assert 0.0 <= val_hi <= expected_cov_entry(a_lo, b_lo, False, k) * (1 + 1e-12)

    def test_far_pairs_gain_covariance_from_spread(self):
        # beyond |d|^2 = 2 (w + s) extra spread moves mass toward the other point
        k = KernelParams(1.0, (20.0, 20.0))
        a0, b0 = UncertainLocation.certain([60.0, 0.0]), UncertainLocation.certain([0.0, 0.0])
        a1, b1 = UncertainLocation([60.0, 0.0], 100 * np.eye(2)), UncertainLocation([0.0, 0.0], 100 * np.eye(2))
        assert expected_cov_entry(a1, b1, False, k) > expected_cov_entry(a0, b0, False, k)
        assert mc_expected_kernel(a1, b1, k, n=200_000) > expected_cov_entry(a0, b0, False, k)


class TestAssemble:
    def test_empty_drops(self):
        k = KernelParams(1.0, (10.0, 10.0))
        pois = np.array([[0.0, 0.0], [5.0, 5.0]])
        c = assemble_covariances(pois, [], k, NoiseParams(0.1))
        assert c.sigma_qq.shape == (0, 0) and c.sigma_uq.shape == (2, 0)
        np.testing.assert_array_equal(c.sigma_uu, se_gram(pois, pois, k))

    def test_one_by_one(self):
        k = KernelParams(2.0, (10.0, 10.0))
        c = assemble_covariances([[1.0, 1.0]], [UncertainLocation.certain([1.0, 1.0])], k, NoiseParams(0.25))
        assert c.sigma_uu.tolist() == [[2.0]]
        assert c.sigma_qq.tolist() == [[2.25]]
        assert c.sigma_uq.tolist() == [[2.0]]

    def test_uncertain_drops_shrink_off_diagonals(self, rng):
        k = KernelParams(1.0, (45.0, 45.0))
        pois = rng.uniform(0, 100, (3, 2))
        drops = [UncertainLocation(m, 900.0 * np.eye(2)) for m in ([10.0, 20.0], [50.0, 40.0])]
        c = assemble_covariances(pois, drops, k, NoiseParams(0.01))
        plain = se_kernel(drops[0].mean, drops[1].mean, k)
        assert c.sigma_qq[0, 1] < plain
        assert c.sigma_qq[0, 1] == pytest.approx(expected_cov_entry(drops[0], drops[1], False, k), rel=1e-12)
        for i in range(3):
            for j in range(2):
                poi = UncertainLocation.certain(pois[i])
                assert c.sigma_uq[i, j] == pytest.approx(expected_cov_entry(poi, drops[j], False, k), rel=1e-12)

    def test_joint_symmetric(self, rng):
        k = KernelParams(1.0, (30.0, 30.0))
        c = assemble_covariances(rng.uniform(0, 60, (4, 2)), random_drops(rng, 5), k, NoiseParams(0.01))
        np.testing.assert_array_equal(c.joint, c.joint.T)

    def test_jitter_bound(self):
        with pytest.raises(InvalidInputError):
            assemble_covariances([[0.0, 0.0]], [], KernelParams(1.0), NoiseParams(0.0, jitter=1e-3))

    def test_requires_poi(self):
        with pytest.raises(InvalidInputError):
            assemble_covariances(np.zeros((0, 2)), [], KernelParams(1.0), NoiseParams())


class TestEntropy:
    def test_unit_scalar(self):
        assert gaussian_entropy([[1.0]]) == pytest.approx(1.4189385332046727, rel=1e-14)
        assert gaussian_entropy([[1.0]]) == pytest.approx(0.5 * LOG_2PI_E, rel=1e-15)

    def test_identity3(self):
        assert gaussian_entropy(np.eye(3)) == pytest.approx(4.256815599614018, rel=1e-14)

    def test_scaled_2x2(self):
        cov = 2.0 * np.eye(2)
        naive = 0.5 * np.log(np.linalg.det(2 * np.pi * np.e * cov))
        assert gaussian_entropy(cov) == pytest.approx(naive, rel=1e-13)
        assert gaussian_entropy(cov) == pytest.approx(2 * (0.5 * LOG_2PI_E + 0.5 * np.log(2.0)), rel=1e-14)
        assert gaussian_entropy(cov) == pytest.approx(3.5310242469692907, rel=1e-12)

    def test_log_det_matches_slogdet(self, rng):
        A = rng.normal(size=(6, 6))
        S = A @ A.T + 6 * np.eye(6)
        assert log_det(S) == pytest.approx(np.linalg.slogdet(S)[1], rel=1e-12)

    def test_not_pd_names_minor(self):
        a = np.diag([1.0, 1.0, -1.0, 1.0])
        with pytest.raises(NotPositiveDefiniteError) as exc:
            cholesky_factor(a)
        assert exc.value.minor == 3
        assert "3" in str(exc.value)

    def test_jitter_rescues_semidefinite(self):
        # rank-1 matrix: singular, fixed by the first jitter retry
        v = np.array([1.0, 2.0, 3.0])
        c = cholesky_factor(np.outer(v, v))
        assert np.all(np.isfinite(c))


class TestMutualInformation:
    def test_empty(self):
        assert mutual_information([[0.0, 0.0]], [], KernelParams(1.0), NoiseParams(0.1)) == 0.0

    def test_single_drop_on_poi(self):
        mi = mutual_information([[3.0, 4.0]], [UncertainLocation.certain([3.0, 4.0])], KernelParams(1.0), NoiseParams(0.1))
        assert mi == pytest.approx(0.5 * np.log(11.0), rel=1e-12)
        assert mi == pytest.approx(1.1989476363991853, rel=1e-12)

    def test_permutation_invariant(self, rng):
        k = KernelParams(1.0, (30.0, 30.0))
        pois = rng.uniform(0, 60, (3, 2))
        drops = random_drops(rng, 5)
        a = mutual_information(pois, drops, k, NoiseParams(0.01))
        b = mutual_information(pois, drops[::-1], k, NoiseParams(0.01))
        assert a == pytest.approx(b, abs=1e-12)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_entropy_decomposition(self, seed):
        rng = np.random.default_rng(seed)
        k = KernelParams(rng.uniform(0.1, 2.0), (30.0, 30.0))
        n = NoiseParams(rng.uniform(1e-3, 0.1) * k.signal_variance)
        pois = rng.uniform(0, 60, (3, 2))
        drops = random_drops(rng, 4)
        c = assemble_covariances(pois, drops, k, n)
        via_h = gaussian_entropy(c.sigma_uu) + gaussian_entropy(c.sigma_qq) - gaussian_entropy(c.joint)
        assert mutual_information(pois, drops, k, n) == pytest.approx(via_h, abs=1e-9)

    def test_matches_conditional_variance_for_certain_sensors(self, rng):
        # textbook GP: I(f_U; y) = H(f_U) - H(f_U | y)
        k = KernelParams(1.0, (25.0, 25.0))
        n = NoiseParams(0.05)
        pois = rng.uniform(0, 60, (2, 2))
        pts = rng.uniform(0, 60, (3, 2))
        post_mean, post_cov = gp_posterior(pts, np.zeros(3), n, k, pois)
        expected = 0.5 * (np.linalg.slogdet(se_gram(pois, pois, k))[1] - np.linalg.slogdet(post_cov)[1])
        mi = mutual_information(pois, [UncertainLocation.certain(p) for p in pts], k, n)
        assert mi == pytest.approx(expected, rel=1e-8)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_monotone(self, seed):
        rng = np.random.default_rng(seed)
        k = KernelParams(1.0, (30.0, 30.0))
        n = NoiseParams(0.01)
        pois = rng.uniform(0, 60, (3, 2))
        drops = random_drops(rng, int(rng.integers(1, 6)))
        A = drops[:-1]
        assert mutual_information(pois, drops, k, n) >= mutual_information(pois, A, k, n) - 1e-9

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_submodular_for_conditionally_independent_sensors(self, seed):
        # Sensors placed exactly on PoIs with no landing spread observe single
        # latent values; the gain of a sensor then shrinks as the set grows.
        rng = np.random.default_rng(seed)
        k = KernelParams(1.0, (30.0, 30.0))
        n = NoiseParams(0.05)
        pois = rng.uniform(0, 80, (5, 2))
        order = rng.permutation(5)
        nb = int(rng.integers(0, 4))
        na = int(rng.integers(0, nb + 1))
        v = UncertainLocation.certain(pois[order[4]])
        B = [UncertainLocation.certain(pois[i]) for i in order[:nb]]
        A = B[:na]

        def mi(s):
            return mutual_information(pois, s, k, n)

        assert mi(A + [v]) - mi(A) >= mi(B + [v]) - mi(B) - 1e-9

    def test_nonneg_clamp_and_error(self, monkeypatch):
        import sensordrop.gp as gp

        k = KernelParams(1.0, (10.0, 10.0))
        drops = [UncertainLocation.certain([0.0, 0.0])]
        monkeypatch.setattr(gp, "log_det", lambda a, s=None: {1: 0.0}.get(a.shape[0], 5e-10 if a.shape[0] == 2 else 0.0))
        assert gp.mutual_information([[0.0, 0.0]], drops, k, NoiseParams(0.1)) == 0.0
        monkeypatch.setattr(gp, "log_det", lambda a, s=None: 1.0 if a.shape[0] == 2 else 0.0)
        with pytest.raises(NumericError):
            gp.mutual_information([[0.0, 0.0]], drops, k, NoiseParams(0.1))


class TestPosterior:
    def test_prior_without_data(self):
        k = KernelParams(1.5, (10.0, 10.0))
        q = np.array([[0.0, 0.0], [3.0, 4.0]])
        mean, cov = gp_posterior(np.zeros((0, 2)), [], NoiseParams(0.1), k, q)
        np.testing.assert_array_equal(mean, 0.0)
        np.testing.assert_array_equal(cov, se_gram(q, q, k))

    def test_interpolation_limit(self):
        k = KernelParams(1.0, (10.0, 10.0))
        mean, cov = gp_posterior([[1.0, 2.0], [30.0, 5.0]], [0.7, -0.2], NoiseParams(1e-10), k, [[1.0, 2.0]])
        assert mean[0] == pytest.approx(0.7, abs=1e-6)
        assert cov[0, 0] == pytest.approx(0.0, abs=1e-6)

    def test_scalar_closed_form(self):
        k = KernelParams(1.0, (10.0, 10.0))
        c = se_kernel([0.0, 0.0], [6.0, 8.0], k)
        mean, cov = gp_posterior([[0.0, 0.0]], [2.0], NoiseParams(0.1), k, [[6.0, 8.0]])
        assert mean[0] == pytest.approx(c * 2.0 / 1.1, rel=1e-12)
        assert cov[0, 0] == pytest.approx(1.0 - c * c / 1.1, rel=1e-12)

    def test_covariance_psd(self, rng):
        k = KernelParams(1.0, (15.0, 15.0))
        X = rng.uniform(0, 50, (8, 2))
        _, cov = gp_posterior(X, rng.normal(size=8), NoiseParams(1e-4), k, rng.uniform(0, 50, (12, 2)))
        np.testing.assert_array_equal(cov, cov.T)
        assert np.linalg.eigvalsh(cov).min() >= -1e-8

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            gp_posterior([[0.0, 0.0]], [1.0, 2.0], NoiseParams(0.1), KernelParams(1.0), [[0.0, 0.0]])
