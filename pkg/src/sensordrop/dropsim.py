"""Wind-drift descent of a dropped sensor and its landing distribution.

Vertical motion is a quadratic-drag fall from rest,
``dvz/dt = -g + (rho * kappa / (2 m)) * vz**2``, integrated with explicit
Euler.  Horizontally the sensor has no inertia: it moves with the local wind
plus an isotropic Gaussian gust perturbation drawn every step.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_generator, check_finite_array, check_positive
from .exceptions import InvalidInputError, NumericError
from .gp import UncertainLocation

GRAVITY = 9.81
AIR_DENSITY = 1.225
DEFAULT_DT = 0.05


@dataclass(eq=False)
class WindField:
    """Wind velocities on a regular lattice, queried by bilinear interpolation.

    ``values`` has shape (ny, nx, 2); node (iy, ix) sits at
    ``origin + (ix, iy) * cell_size``.  Gust std per step is
    ``gust_std + gust_speed_ratio * |local wind|``.
    """

    values: np.ndarray
    origin: tuple = (0.0, 0.0)
    cell_size: float = 1.0
    gust_std: float = 0.0
    gust_speed_ratio: float = 0.0

    def __post_init__(self):
        self.values = check_finite_array(self.values, "wind values", ndim=3)
        if self.values.shape[2] != 2 or self.values.shape[0] < 1 or self.values.shape[1] < 1:
            raise InvalidInputError(f"wind values must have shape (ny, nx, 2), got {self.values.shape}")
        self.origin = tuple(check_finite_array(self.origin, "wind origin", shape=(2,)))
        self.cell_size = check_positive(self.cell_size, "cell_size")
        self.gust_std = check_positive(self.gust_std, "gust_std", strict=False)
        self.gust_speed_ratio = check_positive(self.gust_speed_ratio, "gust_speed_ratio", strict=False)

    @classmethod
    def uniform(cls, velocity, gust_std=0.0, gust_speed_ratio=0.0):
        vals = np.broadcast_to(np.asarray(velocity, dtype=float), (1, 1, 2)).copy()
        return cls(vals, gust_std=gust_std, gust_speed_ratio=gust_speed_ratio)

    @property
    def stochastic(self):
        return self.gust_std > 0 or self.gust_speed_ratio > 0


@dataclass(frozen=True)
class SensorBody:
    mass: float = 10.0
    surface_coefficient: float = 1.0
    air_density: float = AIR_DENSITY

    def __post_init__(self):
        check_positive(self.mass, "mass")
        check_positive(self.surface_coefficient, "surface_coefficient")
        check_positive(self.air_density, "air_density")

    @property
    def drag_factor(self):
        return self.air_density * self.surface_coefficient / (2.0 * self.mass)

    @property
    def terminal_speed(self):
        return float(np.sqrt(GRAVITY / self.drag_factor))


def wind_at(field, p):
    """Bilinear wind interpolation at points ``p`` of shape (2,) or (n, 2).

    Points outside the lattice are clamped to its boundary.
    """
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    pts = p.reshape(-1, 2)
    ny, nx = field.values.shape[:2]
    gx = np.clip((pts[:, 0] - field.origin[0]) / field.cell_size, 0.0, nx - 1)
    gy = np.clip((pts[:, 1] - field.origin[1]) / field.cell_size, 0.0, ny - 1)
    ix = np.minimum(np.floor(gx).astype(int), max(nx - 2, 0))
    iy = np.minimum(np.floor(gy).astype(int), max(ny - 2, 0))
    fx = (gx - ix)[:, None]
    fy = (gy - iy)[:, None]
    ix1 = np.minimum(ix + 1, nx - 1)
    iy1 = np.minimum(iy + 1, ny - 1)
    v = field.values
    out = ((1 - fx) * (1 - fy) * v[iy, ix] + fx * (1 - fy) * v[iy, ix1]
           + (1 - fx) * fy * v[iy1, ix] + fx * fy * v[iy1, ix1])
    return out[0] if single else out


def fall_profile(height, body, dt=DEFAULT_DT):
    """Altitudes and vertical speeds of an Euler fall from rest, until z <= 0.

    Returns ``(z, vz)`` arrays of equal length whose last altitude is <= 0.
    """
    height = check_positive(height, "release height")
    dt = check_positive(dt, "dt")
    c = body.drag_factor
    z, vz = [height], [0.0]
    while z[-1] > 0:
        zc, vc = z[-1], vz[-1]
        z.append(zc + dt * vc)
        vz.append(vc + dt * (-GRAVITY + c * vc * vc))
        if len(z) > 10_000_000:
            raise NumericError("descent did not reach the ground")
    return np.array(z), np.array(vz)


def _advect(release_xy, field, dt, gusts):
    """Horizontal Euler advection for a batch; gusts has shape (batch, steps, 2).

    Returns positions before and after the final step, each (batch, 2).
    """
    x = np.broadcast_to(np.asarray(release_xy, dtype=float), (gusts.shape[0], 2)).copy()
    prev = x
    for s in range(gusts.shape[1]):
        w = wind_at(field, x)
        if field.gust_speed_ratio > 0:
            scale = field.gust_std + field.gust_speed_ratio * np.linalg.norm(w, axis=1, keepdims=True)
        else:
            scale = field.gust_std
        prev = x
        x = x + dt * (w + scale * gusts[:, s])
    return prev, x


def _touchdown_fraction(z):
    # fraction of the last step taken before z reaches 0
    z0, z1 = z[-2], z[-1]
    return z0 / (z0 - z1)


def simulate_descent(release, field, body=SensorBody(), dt=DEFAULT_DT, rng=None):
    """Ground contact point (x, y) of a sensor released at rest from ``release``.

    With ``rng=None`` no gusts are applied and the result is deterministic.
    """
    release = check_finite_array(release, "release", shape=(3,))
    if not dt > 0:
        raise InvalidInputError(f"dt must be > 0, got {dt!r}")
    z, _ = fall_profile(release[2], body, dt)
    steps = len(z) - 1
    if rng is None or not field.stochastic:
        gusts = np.zeros((1, steps, 2))
    else:
        gusts = as_generator(rng).standard_normal((steps, 2))[None]
    prev, last = _advect(release[:2], field, dt, gusts)
    frac = _touchdown_fraction(z)
    return (prev + frac * (last - prev))[0]


def fall_time(height, body=SensorBody(), dt=DEFAULT_DT):
    """Time to ground contact, consistent with the interpolated touchdown."""
    z, _ = fall_profile(height, body, dt)
    return (len(z) - 2 + _touchdown_fraction(z)) * dt


def sample_seed(seed, index):
    """Per-sample stream seed derived from (master seed, sample index)."""
    return np.random.SeedSequence([int(seed), int(index)])


def estimate_landing_distribution(release, field, body=SensorBody(), dt=DEFAULT_DT, n_samples=200, seed=0):
    """Moment-matched Gaussian of ``n_samples`` gust-perturbed landings.

    Sample ``i`` draws its gusts from the stream ``sample_seed(seed, i)``, so
    results are reproducible and independent of batch order.
    """
    release = check_finite_array(release, "release", shape=(3,))
    if int(n_samples) < 2:
        raise InvalidInputError(f"n_samples must be >= 2, got {n_samples}")
    if not dt > 0:
        raise InvalidInputError(f"dt must be > 0, got {dt!r}")
    n_samples = int(n_samples)
    z, _ = fall_profile(release[2], body, dt)
    steps = len(z) - 1
    if field.stochastic:
        gusts = np.stack([
            np.random.default_rng(sample_seed(seed, i)).standard_normal((steps, 2))
            for i in range(n_samples)
        ])
    else:
        gusts = np.zeros((n_samples, steps, 2))
    prev, last = _advect(release[:2], field, dt, gusts)
    pts = prev + _touchdown_fraction(z) * (last - prev)
    mean = pts.mean(axis=0)
    cov = np.cov(pts, rowvar=False, ddof=1)
    cov = 0.5 * (cov + cov.T)
    evals, evecs = np.linalg.eigh(cov)
    if np.any(evals < 0):
        cov = (evecs * np.clip(evals, 0.0, None)) @ evecs.T
        cov = 0.5 * (cov + cov.T)
    return UncertainLocation(mean, cov)


def sample_landing(dist, rng):
    """One draw from ``N(dist.mean, dist.covariance)`` via the symmetric square root."""
    rng = as_generator(rng)
    cov = np.asarray(dist.covariance, dtype=float)
    evals, evecs = np.linalg.eigh(cov)
    scale = max(1.0, float(np.abs(evals).max())) if evals.size else 1.0
    if evals.size and evals[0] < -1e-12 * scale:
        raise NumericError(f"landing covariance is not PSD (min eigenvalue {evals[0]:.3e})")
    root = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.T
    return dist.mean + root @ rng.standard_normal(2)
