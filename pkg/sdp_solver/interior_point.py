"""
Infeasible-start primal-dual path following for block SDPs in standard form

    primal:  min <C, X>  s.t.  <A_k, X> = b_k,  X PSD
    dual:    max b^T y   s.t.  S = C - sum_k y_k A_k PSD

Search directions use Nesterov-Todd scaling; the centering parameter comes from a
predictor step. Blocks are dense; A is stored per block with shape (m, n, n).
"""
from dataclasses import dataclass
from typing import Iterator, List

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .linalg import max_step, nt_scaling, spd_inverse, symmetrize


@dataclass
class IpmState:
    iteration: int
    X: List[np.ndarray]
    y: np.ndarray
    S: List[np.ndarray]
    primal_objective: float
    dual_objective: float
    primal_infeasibility: float
    dual_infeasibility: float
    relative_gap: float
    dual_residual: float = 0.0
    converged: bool = False
    failure: str = ""


class InteriorPointMethod:
    def __init__(self, C: List[np.ndarray], A: List[np.ndarray], b: np.ndarray,
                 tol: float = 1e-9, step_fraction: float = 0.95, max_iterations: int = 200):
        self.C = [np.asarray(c, dtype=float) for c in C]
        self.A = [np.asarray(a, dtype=float) for a in A]
        self.b = np.asarray(b, dtype=float)
        self.m = self.b.shape[0]
        self.tol = tol
        self.step_fraction = step_fraction
        self.max_iterations = max_iterations
        self.sizes = [c.shape[0] for c in self.C]
        self.n_total = sum(self.sizes)
        self._flat = [a.reshape(self.m, -1) for a in self.A]

    def apply(self, X: List[np.ndarray]) -> np.ndarray:
        """A(X)"""
        total = np.zeros(self.m)
        for flat, x in zip(self._flat, X):
            total += flat @ x.ravel()
        return total

    def adjoint(self, y: np.ndarray) -> List[np.ndarray]:
        """A*(y)"""
        return [np.tensordot(y, a, axes=1) for a in self.A]

    def _starting_point(self):
        n = self.n_total
        row_norms = np.sqrt(sum(np.sum(f * f, axis=1) for f in self._flat)) if self.m else np.zeros(0)
        c_norm = np.sqrt(sum(np.sum(c * c) for c in self.C))
        xi = max(10.0, np.sqrt(n))
        if self.m:
            xi = max(xi, n * float(np.max((1.0 + np.abs(self.b)) / (1.0 + row_norms))))
        eta = max(10.0, np.sqrt(n), c_norm, float(np.max(row_norms)) if self.m else 0.0)
        X = [xi * np.eye(s) for s in self.sizes]
        S = [eta * np.eye(s) for s in self.sizes]
        return X, np.zeros(self.m), S

    def _schur(self, W: List[np.ndarray]) -> np.ndarray:
        M = np.zeros((self.m, self.m))
        for a, flat, w in zip(self.A, self._flat, W):
            scaled = np.matmul(np.matmul(w, a), w)
            M += flat @ scaled.reshape(self.m, -1).T
        return symmetrize(M)

    @staticmethod
    def _factor(M: np.ndarray):
        try:
            factor = cho_factor(M, lower=True)
            return lambda rhs: cho_solve(factor, rhs)
        except LinAlgError:
            shift = 1e-12 * max(1.0, float(np.trace(M)) / max(M.shape[0], 1))
            try:
                factor = cho_factor(M + shift * np.eye(M.shape[0]), lower=True)
                return lambda rhs: cho_solve(factor, rhs)
            except LinAlgError:
                return lambda rhs: np.linalg.lstsq(M, rhs, rcond=None)[0]

    def iterate(self) -> Iterator[IpmState]:
        """Yield the state before every step; stops on convergence, failure or the iteration limit."""
        X, y, S = self._starting_point()
        b_norm = 1.0 + np.linalg.norm(self.b)
        c_norm = 1.0 + np.sqrt(sum(np.sum(c * c) for c in self.C))

        for iteration in range(self.max_iterations + 1):
            Rp = self.b - self.apply(X)
            AtY = self.adjoint(y)
            Rd = [c - s - aty for c, s, aty in zip(self.C, S, AtY)]
            pobj = float(sum(np.sum(c * x) for c, x in zip(self.C, X)))
            dobj = float(self.b @ y)
            gap = float(sum(np.sum(x * s) for x, s in zip(X, S)))
            mu = gap / self.n_total
            pinf = float(np.linalg.norm(Rp)) / b_norm
            dual_residual = float(np.sqrt(sum(np.sum(r * r) for r in Rd)))
            dinf = dual_residual / c_norm
            relgap = gap / (1.0 + abs(pobj) + abs(dobj))
            state = IpmState(iteration, X, y, S, pobj, dobj, pinf, dinf, relgap, dual_residual)
            if max(relgap, pinf, dinf) < self.tol:
                state.converged = True
                yield state
                return
            if iteration == self.max_iterations:
                state.failure = "iteration limit reached"
                yield state
                return
            yield state

            try:
                W = [nt_scaling(x, s) for x, s in zip(X, S)]
                S_inv = [spd_inverse(s) for s in S]
            except LinAlgError:
                state.failure = "lost positive definiteness"
                yield state
                return
            solve = self._factor(self._schur(W))
            WRdW = [w @ r @ w for w, r in zip(W, Rd)]
            base = Rp + self.apply(WRdW)

            def direction(sigma: float):
                Rc = [sigma * mu * si - x for si, x in zip(S_inv, X)]
                dy = solve(base - self.apply(Rc))
                dS = [r - aty for r, aty in zip(Rd, self.adjoint(dy))]
                dX = [symmetrize(rc - w @ ds @ w) for rc, w, ds in zip(Rc, W, dS)]
                return dX, dy, dS

            def step_lengths(dX, dS, fraction: float):
                try:
                    alpha_p = min(max_step(x, dx) for x, dx in zip(X, dX))
                    alpha_d = min(max_step(s, ds) for s, ds in zip(S, dS))
                except LinAlgError:
                    return 0.0, 0.0
                return min(1.0, fraction * alpha_p), min(1.0, fraction * alpha_d)

            dX, dy, dS = direction(0.0)
            alpha_p, alpha_d = step_lengths(dX, dS, 1.0)
            predicted = sum(np.sum((x + alpha_p * dx) * (s + alpha_d * ds))
                            for x, dx, s, ds in zip(X, dX, S, dS)) / self.n_total
            sigma = float(np.clip((predicted / mu) ** 3, 0.0, 1.0)) if mu > 0 else 0.0
            if max(pinf, dinf) > 1e-2:
                sigma = max(sigma, 0.1)

            dX, dy, dS = direction(sigma)
            alpha_p, alpha_d = step_lengths(dX, dS, self.step_fraction)
            if alpha_p < 1e-10 and alpha_d < 1e-10:
                state.failure = "step length collapsed"
                yield state
                return
            X = [symmetrize(x + alpha_p * dx) for x, dx in zip(X, dX)]
            y = y + alpha_d * dy
            S = [symmetrize(s + alpha_d * ds) for s, ds in zip(S, dS)]
