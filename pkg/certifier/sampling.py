"""
Deterministic quasi-random sample sets: unit-sphere points and box points around the origin
"""
import numpy as np
from scipy.stats import norm, qmc

ORIGIN_RADIUS = 1e-12


def halton_points(n_vars: int, count: int, seed: int = 7) -> np.ndarray:
    """Scrambled Halton points in the open unit cube, fixed by `seed`."""
    if count <= 0:
        return np.zeros((0, n_vars))
    sampler = qmc.Halton(d=n_vars, scramble=True, seed=seed)
    points = sampler.random(count)
    return np.clip(points, 1e-12, 1.0 - 1e-12)


def sphere_points(n_vars: int, count: int, seed: int = 7) -> np.ndarray:
    # Gaussian images of Halton points, normalized onto the sphere
    gaussian = norm.ppf(halton_points(n_vars, count, seed))
    norms = np.linalg.norm(gaussian, axis=1)
    keep = norms > ORIGIN_RADIUS
    return gaussian[keep] / norms[keep, None]


def box_points(n_vars: int, count: int, radius: float = 3.0, seed: int = 7) -> np.ndarray:
    points = (2.0 * halton_points(n_vars, count, seed + 1) - 1.0) * radius
    return points[np.linalg.norm(points, axis=1) > ORIGIN_RADIUS]


def sample_points(n_vars: int, n_samples: int = 1000, radius: float = 3.0, seed: int = 7) -> np.ndarray:
    """
    Half sphere points, half points of the box [-radius, radius]^n, origin excluded.

    The same arguments always give the same array.
    """
    n_sphere = n_samples // 2
    return np.vstack([
        sphere_points(n_vars, n_sphere, seed),
        box_points(n_vars, n_samples - n_sphere, radius, seed),
    ])
