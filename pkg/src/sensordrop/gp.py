"""Gaussian-process primitives for sensors with uncertain locations.

All information quantities are in nats.  The squared-exponential kernel is
parameterized by a signal variance and per-axis length scales; ``W`` denotes
the diagonal matrix of squared length scales.

For a sensor whose ground position is Gaussian, ``N(mean, cov)``, the
expected kernel value between two such sensors has a closed form::

    E[k(a, b)] = s2 * exp(-0.5 * d^T (W + Ca + Cb)^-1 d) / sqrt(det(I + W^-1 (Ca + Cb)))

with ``d = mean_a - mean_b``.  A Point of Interest is a location with zero
covariance, so the same expression gives the PoI/sensor cross covariance.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve
from scipy.linalg.lapack import dpotrf

from ._validation import check_finite_array, check_points, check_positive, check_psd
from .exceptions import InvalidInputError, NotPositiveDefiniteError, NumericError

LOG_2PI_E = float(np.log(2.0 * np.pi * np.e))
MI_NEGATIVE_TOL = 1e-9
# Diagonal jitter schedule (relative to the signal variance) tried after a failed factorization.
JITTER_SCHEDULE = (1e-9, 1e-6)


@dataclass(frozen=True)
class KernelParams:
    """Squared-exponential kernel hyperparameters."""

    signal_variance: float
    length_scales: tuple = (1.0, 1.0)

    def __post_init__(self):
        check_positive(self.signal_variance, "signal_variance")
        ls = tuple(float(v) for v in np.atleast_1d(self.length_scales))
        if len(ls) != 2:
            raise InvalidInputError(f"length_scales must have 2 entries, got {len(ls)}")
        for i, v in enumerate(ls):
            check_positive(v, f"length_scales[{i}]")
        object.__setattr__(self, "signal_variance", float(self.signal_variance))
        object.__setattr__(self, "length_scales", ls)

    @property
    def W(self):
        return np.diag(np.square(self.length_scales))


@dataclass(frozen=True)
class NoiseParams:
    """Additive sensor noise variance and the diagonal stabilizing jitter."""

    measurement_variance: float = 0.0
    jitter: float = 0.0

    def __post_init__(self):
        check_positive(self.measurement_variance, "measurement_variance", strict=False)
        check_positive(self.jitter, "jitter", strict=False)
        object.__setattr__(self, "measurement_variance", float(self.measurement_variance))
        object.__setattr__(self, "jitter", float(self.jitter))

    def check_against(self, kernel):
        if self.jitter > 1e-6 * kernel.signal_variance:
            raise InvalidInputError(
                f"jitter {self.jitter!r} exceeds 1e-6 * signal_variance ({kernel.signal_variance!r})"
            )


@dataclass(eq=False)
class UncertainLocation:
    """Gaussian ground position: mean (2,) in meters and covariance (2, 2) in m^2."""

    mean: np.ndarray
    covariance: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))

    def __post_init__(self):
        self.mean = check_finite_array(self.mean, "mean", shape=(2,))
        cov = check_finite_array(self.covariance, "covariance", shape=(2, 2))
        self.covariance = check_psd(cov, "covariance")

    @classmethod
    def certain(cls, point):
        return cls(np.asarray(point, dtype=float), np.zeros((2, 2)))


@dataclass(eq=False)
class CovTriple:
    """Blocks of the joint PoI/sensor covariance used by the surrogate objective."""

    sigma_uu: np.ndarray
    sigma_qq: np.ndarray
    sigma_uq: np.ndarray

    @property
    def joint(self):
        return np.block([[self.sigma_uu, self.sigma_uq], [self.sigma_uq.T, self.sigma_qq]])


# ---------------------------------------------------------------------------
# kernels


def se_kernel(p, q, kernel):
    """Squared-exponential covariance between two points."""
    p = check_finite_array(p, "p", shape=(2,))
    q = check_finite_array(q, "q", shape=(2,))
    d = (p - q) / np.asarray(kernel.length_scales)
    return kernel.signal_variance * float(np.exp(-0.5 * np.dot(d, d)))


def se_gram(X, Y, kernel):
    """Cross-covariance matrix ``k(X[i], Y[j])`` for point arrays of shape (n, 2), (m, 2)."""
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    Y = np.asarray(Y, dtype=float).reshape(-1, 2)
    ls = np.asarray(kernel.length_scales)
    d = (X[:, None, :] - Y[None, :, :]) / ls
    return kernel.signal_variance * np.exp(-0.5 * np.einsum("ijk,ijk->ij", d, d))


def expected_cov_entry(a, b, same_point, kernel):
    """Expected SE covariance between two Gaussian-distributed locations.

    ``same_point`` marks the diagonal (a sensor with itself), where the value
    is exactly the signal variance.
    """
    if same_point:
        return kernel.signal_variance
    W = kernel.W
    S = a.covariance + b.covariance
    M = W + S
    d = a.mean - b.mean
    try:
        x = np.linalg.solve(M, d)
    except np.linalg.LinAlgError:
        raise NumericError("W + Sigma_a + Sigma_b is singular") from None
    denom = np.linalg.det(np.eye(2) + np.linalg.solve(W, S))
    if not denom > 0:
        raise NumericError(f"non-positive determinant {denom!r} in expected covariance")
    return kernel.signal_variance * float(np.exp(-0.5 * d @ x)) / float(np.sqrt(denom))


def expected_cov_matrix(means_a, covs_a, means_b, covs_b, kernel):
    """Vectorized off-diagonal expected covariance for every (a, b) pair.

    Every pair is treated as distinct points; callers overwrite self-pairs.
    """
    means_a = np.asarray(means_a, dtype=float).reshape(-1, 2)
    means_b = np.asarray(means_b, dtype=float).reshape(-1, 2)
    covs_a = np.asarray(covs_a, dtype=float).reshape(-1, 2, 2)
    covs_b = np.asarray(covs_b, dtype=float).reshape(-1, 2, 2)
    w = np.square(np.asarray(kernel.length_scales))
    S = covs_a[:, None] + covs_b[None, :]
    m00 = w[0] + S[..., 0, 0]
    m11 = w[1] + S[..., 1, 1]
    m01 = S[..., 0, 1]
    m10 = S[..., 1, 0]
    det_m = m00 * m11 - m01 * m10
    if np.any(det_m <= 0):
        raise NumericError("W + Sigma_a + Sigma_b is singular")
    d = means_a[:, None, :] - means_b[None, :, :]
    dx, dy = d[..., 0], d[..., 1]
    quad = (m11 * dx * dx - (m01 + m10) * dx * dy + m00 * dy * dy) / det_m
    # det(I + W^-1 S) = det(W + S) / det(W)
    denom = det_m / (w[0] * w[1])
    return kernel.signal_variance * np.exp(-0.5 * quad) / np.sqrt(denom)


def _stack(drops):
    if len(drops) == 0:
        return np.zeros((0, 2)), np.zeros((0, 2, 2))
    return (np.array([d.mean for d in drops]), np.array([d.covariance for d in drops]))


def covariance_blocks(pois, means, covs, kernel, noise):
    """Array form of :func:`assemble_covariances`."""
    noise.check_against(kernel)
    pois = check_points(pois, "pois")
    if len(pois) == 0:
        raise InvalidInputError("at least one point of interest is required")
    means = np.asarray(means, dtype=float).reshape(-1, 2)
    covs = np.asarray(covs, dtype=float).reshape(-1, 2, 2)
    n_u, n_q = len(pois), len(means)
    s2 = kernel.signal_variance
    sigma_uu = se_gram(pois, pois, kernel)
    sigma_uu[np.diag_indices(n_u)] = s2 + noise.jitter
    if n_q == 0:
        return CovTriple(sigma_uu, np.zeros((0, 0)), np.zeros((n_u, 0)))
    sigma_qq = expected_cov_matrix(means, covs, means, covs, kernel)
    sigma_qq = 0.5 * (sigma_qq + sigma_qq.T)
    sigma_qq[np.diag_indices(n_q)] = s2 + noise.measurement_variance + noise.jitter
    sigma_uq = expected_cov_matrix(pois, np.zeros((n_u, 2, 2)), means, covs, kernel)
    return CovTriple(sigma_uu, sigma_qq, sigma_uq)


def assemble_covariances(pois, drops, kernel, noise):
    """Build the PoI block, sensor block and cross block for a list of drops.

    Sensor noise is added to the sensor diagonal only; PoIs are latent values.
    """
    means, covs = _stack(drops)
    return covariance_blocks(pois, means, covs, kernel, noise)


# ---------------------------------------------------------------------------
# determinants and information


def cholesky_factor(a, jitter_scale=None):
    """Lower Cholesky factor, retrying with diagonal jitter on failure.

    ``jitter_scale`` is the magnitude the jitter schedule is relative to;
    defaults to the mean diagonal entry.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if jitter_scale is None:
        jitter_scale = float(np.mean(np.diag(a))) if n else 1.0
    c, info = dpotrf(a, lower=1, clean=1)
    if info == 0:
        return c
    if info < 0:
        raise NumericError(f"dpotrf argument {-info} invalid")
    first_minor = info
    for rel in JITTER_SCHEDULE:
        c, info = dpotrf(a + rel * jitter_scale * np.eye(n), lower=1, clean=1)
        if info == 0:
            return c
    raise NotPositiveDefiniteError(first_minor, n)


def log_det(a, jitter_scale=None):
    """Log-determinant of a symmetric positive definite matrix via Cholesky."""
    if np.shape(a)[0] == 0:
        return 0.0
    c = cholesky_factor(a, jitter_scale)
    return 2.0 * float(np.sum(np.log(np.diag(c))))


def gaussian_entropy(cov, jitter_scale=None):
    """Differential entropy of ``N(0, cov)`` in nats."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if cov.shape[0] != cov.shape[1]:
        raise InvalidInputError(f"covariance must be square, got {cov.shape}")
    n = cov.shape[0]
    if n == 0:
        return 0.0
    return 0.5 * (n * LOG_2PI_E + log_det(cov, jitter_scale))


def _mi_from_blocks(blocks, scale):
    ld_uu = log_det(blocks.sigma_uu, scale)
    ld_qq = log_det(blocks.sigma_qq, scale)
    ld_joint = log_det(blocks.joint, scale)
    mi = 0.5 * (ld_uu + ld_qq - ld_joint)
    if mi < 0.0:
        if mi < -MI_NEGATIVE_TOL:
            raise NumericError(f"mutual information evaluated to {mi!r} < 0")
        mi = 0.0
    return mi


def surrogate_mi(pois, means, covs, kernel, noise):
    """Array form of :func:`mutual_information` (means (n, 2), covs (n, 2, 2))."""
    if len(means) == 0:
        return 0.0
    blocks = covariance_blocks(pois, means, covs, kernel, noise)
    return _mi_from_blocks(blocks, kernel.signal_variance)


def mutual_information(pois, drops, kernel, noise):
    """Surrogate MI between PoI values and measurements from uncertain drops.

    Computed as ``0.5 * (logdet S_UU + logdet S_QQ - logdet S_joint)``.  An
    empty drop list gives exactly 0.
    """
    means, covs = _stack(drops)
    return surrogate_mi(pois, means, covs, kernel, noise)


# ---------------------------------------------------------------------------
# regression


def gp_posterior(train_points, observations, noise, kernel, queries):
    """Zero-mean GP posterior mean and covariance at ``queries``."""
    X = check_points(train_points, "train_points")
    y = check_finite_array(np.asarray(observations, dtype=float).reshape(-1), "observations")
    Xq = check_points(queries, "queries")
    if len(X) != len(y):
        raise InvalidInputError(f"{len(X)} training points but {len(y)} observations")
    k_qq = se_gram(Xq, Xq, kernel)
    if len(X) == 0:
        return np.zeros(len(Xq)), k_qq
    K = se_gram(X, X, kernel)
    K[np.diag_indices(len(X))] += noise.measurement_variance + noise.jitter
    L = cholesky_factor(K, kernel.signal_variance)
    k_xq = se_gram(X, Xq, kernel)
    mean = k_xq.T @ cho_solve((L, True), y)
    v = cho_solve((L, True), k_xq)
    cov = k_qq - k_xq.T @ v
    return mean, 0.5 * (cov + cov.T)
