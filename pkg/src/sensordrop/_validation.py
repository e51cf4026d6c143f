"""Input validation helpers used across the package."""

import numpy as np

from .exceptions import InvalidInputError, NumericError

PSD_TOL = 1e-12


def check_finite_array(x, name, shape=None, ndim=None):
    """Return ``x`` as a float ndarray, raising InvalidInputError on bad input."""
    try:
        arr = np.asarray(x, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name} is not numeric: {exc}") from None
    if ndim is not None and arr.ndim != ndim:
        raise InvalidInputError(f"{name} must have {ndim} dimensions, got shape {arr.shape}")
    if shape is not None:
        if arr.shape != tuple(shape):
            raise InvalidInputError(f"{name} must have shape {tuple(shape)}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def check_points(x, name, dim=2):
    """Coerce to an ``(n, dim)`` array; an empty sequence yields shape ``(0, dim)``."""
    arr = np.asarray(x, dtype=float)
    if arr.size == 0:
        return np.zeros((0, dim))
    if arr.ndim == 1 and arr.shape[0] == dim:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise InvalidInputError(f"{name} must be an (n, {dim}) array of points, got shape {arr.shape}")
    return check_finite_array(arr, name)


def check_positive(value, name, strict=True):
    v = float(value)
    if not np.isfinite(v):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")
    if strict and v <= 0:
        raise InvalidInputError(f"{name} must be > 0, got {value!r}")
    if not strict and v < 0:
        raise InvalidInputError(f"{name} must be >= 0, got {value!r}")
    return v


def check_psd(cov, name, tol=PSD_TOL):
    """Validate a symmetric positive semidefinite matrix and return it symmetrized."""
    cov = check_finite_array(cov, name, ndim=2)
    if cov.shape[0] != cov.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {cov.shape}")
    if not np.allclose(cov, cov.T, rtol=0.0, atol=tol):
        raise InvalidInputError(f"{name} is not symmetric")
    eig = np.linalg.eigvalsh(cov)
    if eig.size and eig[0] < -tol * max(1.0, float(np.abs(eig).max())):
        raise NumericError(f"{name} is not positive semidefinite (min eigenvalue {eig[0]:.3e})")
    return 0.5 * (cov + cov.T)


def as_generator(rng):
    """Accept None, an int seed, a sequence of ints, or a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
