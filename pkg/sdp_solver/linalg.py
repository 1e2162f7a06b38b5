"""
Dense symmetric linear algebra helpers
"""
import numpy as np
from scipy.linalg import LinAlgError, cholesky, eigvalsh, solve_triangular

SYMMETRY_TOL = 1e-10


def min_eigenvalue(matrix) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    M = np.atleast_2d(np.asarray(matrix, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    if M.size == 0:
        raise ValueError("matrix is empty")
    scale = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M - M.T)) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric")
    return float(eigvalsh((M + M.T) / 2.0)[0])


def symmetrize(M: np.ndarray) -> np.ndarray:
    return (M + M.T) / 2.0


def nt_scaling(X: np.ndarray, S: np.ndarray) -> np.ndarray:
    """
    Nesterov-Todd scaling point W with W S W = X.

    With X = L L^T, S = R R^T and R^T L = U D V^T, W = G G^T for G = L V D^(-1/2).
    Raises LinAlgError when X or S is not positive definite.
    """
    L = cholesky(X, lower=True)
    R = cholesky(S, lower=True)
    _, d, Vt = np.linalg.svd(R.T @ L)
    if np.min(d) <= 0:
        raise LinAlgError("degenerate scaling")
    G = (L @ Vt.T) / np.sqrt(d)
    return symmetrize(G @ G.T)


def max_step(X: np.ndarray, dX: np.ndarray) -> float:
    """Largest alpha with X + alpha*dX positive semidefinite (inf if unbounded)."""
    L = cholesky(X, lower=True)
    left = solve_triangular(L, dX, lower=True)
    scaled = solve_triangular(L, left.T, lower=True)
    lowest = eigvalsh(symmetrize(scaled))[0]
    return np.inf if lowest >= 0 else -1.0 / lowest


def spd_inverse(S: np.ndarray) -> np.ndarray:
    R = cholesky(S, lower=True)
    R_inv = solve_triangular(R, np.eye(S.shape[0]), lower=True)
    return R_inv.T @ R_inv


def is_positive_definite(blocks) -> bool:
    try:
        for M in blocks:
            cholesky(M, lower=True)
    except LinAlgError:
        return False
    return True
