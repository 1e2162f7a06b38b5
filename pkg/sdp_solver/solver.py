"""
Margin-maximizing feasibility solver for compiled SOS programs

    maximize lambda  s.t.  Q_b - lambda*I PSD,  equalities,  sum_b tr(Q_b) <= tau

Free scalars are eliminated by projecting the equalities onto the left nullspace of
their columns and recovered afterwards by least squares. With S_b = Q_b - lambda*I and
a trace slack s, lambda = (tau - s - sum tr S_b)/N, which leaves a standard-form SDP
in (S, s) whose objective is min sum tr S_b + s.
"""
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import null_space

from sos_compiler.models import SdpProblem
from .interior_point import InteriorPointMethod
from .linalg import is_positive_definite, symmetrize
from .models import DimensionCapError, SdpSolution, SolverSettings, SolveStatus

SQRT2 = np.sqrt(2.0)
# the dual bound carries a residual term, so iterations continue past ipm_tol while the verdict is open
DUAL_REFINEMENT = 1e-3


def _triangle_index(n: int, i: int, j: int) -> int:
    return i * n - i * (i - 1) // 2 + (j - i)


class _Layout:
    """Positions of upper-triangle Gram entries in one flat vector"""

    def __init__(self, blocks: List[int]):
        self.blocks = blocks
        self.offsets = []
        total = 0
        for n in blocks:
            self.offsets.append(total)
            total += n * (n + 1) // 2
        self.size = total
        weights = np.ones(total)
        diagonal = np.zeros(total, dtype=bool)
        for b, n in enumerate(blocks):
            rows, cols = np.triu_indices(n)
            span = slice(self.offsets[b], self.offsets[b] + len(rows))
            weights[span] = np.where(rows == cols, 1.0, 1.0 / SQRT2)
            diagonal[span] = rows == cols
        self.weights = weights
        self.diagonal = diagonal

    def index(self, block: int, i: int, j: int) -> int:
        return self.offsets[block] + _triangle_index(self.blocks[block], i, j)

    def to_matrices(self, scaled: np.ndarray) -> List[np.ndarray]:
        """Unpack a vector in scaled coordinates (off-diagonals times sqrt 2) into symmetric blocks."""
        natural = scaled * self.weights
        matrices = []
        for b, n in enumerate(self.blocks):
            rows, cols = np.triu_indices(n)
            M = np.zeros((n, n))
            M[rows, cols] = natural[self.offsets[b]:self.offsets[b] + len(rows)]
            matrices.append(M + np.triu(M, 1).T)
        return matrices

    def from_matrices(self, matrices: List[np.ndarray]) -> np.ndarray:
        scaled = np.zeros(self.size)
        for b, n in enumerate(self.blocks):
            rows, cols = np.triu_indices(n)
            scaled[self.offsets[b]:self.offsets[b] + len(rows)] = matrices[b][rows, cols]
        return scaled / self.weights

    def row_matrices(self, rows_scaled: np.ndarray, block: int) -> np.ndarray:
        """Symmetric matrices F_k with <F_k, Q> = row_k . svec(Q) for one block."""
        n = self.blocks[block]
        rows, cols = np.triu_indices(n)
        values = rows_scaled[:, self.offsets[block]:self.offsets[block] + len(rows)] * self.weights[
            self.offsets[block]:self.offsets[block] + len(rows)]
        F = np.zeros((rows_scaled.shape[0], n, n))
        F[:, rows, cols] = values
        F = F + np.transpose(F, (0, 2, 1))
        diag = np.arange(n)
        F[:, diag, diag] /= 2.0
        return F


class SdpSolver:
    """Embedded dense solver deciding strict feasibility of block SDPs"""

    def __init__(self, settings: Optional[SolverSettings] = None):
        self.settings = settings or SolverSettings()
        self.log_callback = None
        self.run_id = None

    def _log(self, details: dict):
        if self.log_callback and self.run_id:
            self.log_callback(self.run_id, "sdp_solver", details)

    def _assemble(self, problem: SdpProblem, layout: _Layout) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        m = len(problem.constraints)
        E = np.zeros((m, layout.size))
        G = np.zeros((m, problem.n_free))
        r = np.zeros(m)
        for k, row in enumerate(problem.constraints):
            for e in row.gram:
                factor = 1.0 if e.row == e.col else 2.0
                E[k, layout.index(e.block, e.row, e.col)] += factor * e.value
            for e in row.free:
                G[k, e.index] += e.value
            r[k] = row.rhs
        return E, G, r

    def solve(self, problem: SdpProblem) -> SdpSolution:
        """
        Decide strict feasibility by margin maximization.

        Returns:
            Feasible (strict when margin > margin_tol, boundary otherwise), Infeasible when the
            dual bound on the optimal margin is below -margin_tol, or Indeterminate
        """
        s = self.settings
        if problem.total_dimension > s.dimension_cap:
            raise DimensionCapError(problem.total_dimension, s.dimension_cap)

        nonempty = [b for b, n in enumerate(problem.blocks) if n > 0]
        layout = _Layout([problem.blocks[b] for b in nonempty])
        block_map = {b: k for k, b in enumerate(nonempty)}
        remapped = problem.model_copy(update={
            "blocks": [problem.blocks[b] for b in nonempty],
            "block_labels": [problem.block_labels[b] for b in nonempty],
            "constraints": [c.model_copy(update={"gram": [e.model_copy(update={"block": block_map[e.block]})
                                                          for e in c.gram]})
                            for c in problem.constraints],
        })
        E, G, r = self._assemble(remapped, layout)
        scale = max(1.0, float(np.max(np.abs(r)))) if r.size else 1.0

        if layout.size == 0:
            return self._free_only(problem, G, r)

        # eliminate free scalars
        if problem.n_free and r.size:
            P = null_space(G.T)
            E1, r1 = P.T @ E, P.T @ r
        else:
            E1, r1 = E, r

        # orthonormal rows in scaled Gram coordinates
        Es = E1 * layout.weights[None, :]
        rank = 0
        if E1.shape[0]:
            U, sv, Vt = np.linalg.svd(Es, full_matrices=False)
            if sv.size and sv[0] > 0:
                rank = int(np.sum(sv > 1e-10 * sv[0]))
            U, sv, Vt = U[:, :rank], sv[:rank], Vt[:rank]
            residual = r1 - U @ (U.T @ r1)
            if residual.size and float(np.max(np.abs(residual))) > s.eq_tol:
                return self._finish(problem, SolveStatus.INFEASIBLE, [np.zeros((n, n)) for n in layout.blocks],
                                    E, G, r, nonempty, note="equality constraints are inconsistent",
                                    iterations=0, tau=s.trace_cap)
            E_hat = Vt
            r_hat = (U.T @ r1) / sv
        else:
            E_hat = np.zeros((0, layout.size))
            r_hat = np.zeros(0)

        N = sum(layout.blocks)
        least_norm = E_hat.T @ r_hat
        tau = max(s.trace_cap, 10.0 * abs(float(np.sum(least_norm[layout.diagonal]))) + 1.0)

        if rank == 0:
            grams = [(tau / N) * np.eye(n) for n in layout.blocks]
            return self._finish(problem, None, grams, E, G, r, nonempty, iterations=0, tau=tau)

        tau_s = tau / scale
        r_s = r_hat / scale
        traces = np.array([np.sum(E_hat[:, layout.diagonal], axis=1)]).ravel()
        C = [np.eye(n) for n in layout.blocks] + [np.ones((1, 1))]
        A = []
        for b, n in enumerate(layout.blocks):
            F = layout.row_matrices(E_hat, b)
            A.append(F - (traces / N)[:, None, None] * np.eye(n)[None, :, :])
        A.append((-traces / N)[:, None, None])
        b_vec = r_s - traces * tau_s / N

        ipm = InteriorPointMethod(C, A, b_vec, tol=s.ipm_tol * DUAL_REFINEMENT, step_fraction=s.step_fraction,
                                  max_iterations=s.max_iterations)
        last = best = None
        certified_infeasible = False
        pinned = False
        margin_bound = None
        # a primal feasible X has trace at most tau_s + N*margin_tol/scale whenever its margin is >= -margin_tol
        trace_bound = tau_s + N * s.margin_tol / scale
        for state in ipm.iterate():
            last = state
            if is_positive_definite(state.X):
                best = state
            lam_upper = scale * (tau_s - state.dual_objective + state.dual_residual * trace_bound) / N
            lam_primal = scale * (tau_s - state.primal_objective) / N
            margin_bound = lam_upper if margin_bound is None else min(margin_bound, lam_upper)
            if margin_bound < -s.margin_tol:
                certified_infeasible = True
                break
            if state.primal_infeasibility <= s.ipm_tol:
                if lam_primal >= -s.margin_tol and margin_bound - lam_primal < s.margin_tol:
                    pinned = True
                    break
                if s.early_stop_margin is not None and lam_primal > s.early_stop_margin:
                    break

        final = best if best is not None else last
        S_blocks = final.X[:-1]
        slack = float(final.X[-1][0, 0])
        lam_s = (tau_s - slack - sum(float(np.trace(x)) for x in S_blocks)) / N
        q_scaled = layout.from_matrices([x + lam_s * np.eye(x.shape[0]) for x in S_blocks])
        q_scaled = q_scaled - E_hat.T @ (E_hat @ q_scaled - r_s)
        grams = [scale * g for g in layout.to_matrices(q_scaled)]

        status = SolveStatus.INFEASIBLE if certified_infeasible else None
        note = "dual bound on the margin is negative" if certified_infeasible else last.failure
        return self._finish(problem, status, grams, E, G, r, nonempty, iterations=last.iteration, tau=tau,
                            note=note, margin_bound=margin_bound, dual_point=list(map(float, last.y)),
                            converged=pinned or max(last.relative_gap, last.primal_infeasibility,
                                                    last.dual_infeasibility) < s.ipm_tol)

    def _free_only(self, problem: SdpProblem, G: np.ndarray, r: np.ndarray) -> SdpSolution:
        free = np.linalg.lstsq(G, r, rcond=None)[0] if problem.n_free and r.size else np.zeros(problem.n_free)
        violation = float(np.max(np.abs(G @ free - r))) if r.size else 0.0
        status = SolveStatus.FEASIBLE if violation <= self.settings.eq_tol else SolveStatus.INFEASIBLE
        solution = SdpSolution(
            status=status, strict=status == SolveStatus.FEASIBLE,
            block_values=[[] for _ in problem.blocks], free_values=list(map(float, free)),
            max_eq_violation=violation, trace_cap=self.settings.trace_cap,
            note="no Gram blocks" if status == SolveStatus.FEASIBLE else "equality constraints are inconsistent",
        )
        self._log({"status": solution.status.value, "note": solution.note})
        return solution

    def _finish(self, problem: SdpProblem, status: Optional[SolveStatus], grams: List[np.ndarray],
                E: np.ndarray, G: np.ndarray, r: np.ndarray, nonempty: List[int], iterations: int,
                tau: float, note: str = "", margin_bound: Optional[float] = None,
                dual_point: Optional[List[float]] = None, converged: bool = True) -> SdpSolution:
        s = self.settings
        grams = [symmetrize(g) for g in grams]
        layout = _Layout([g.shape[0] for g in grams])
        q_natural = layout.from_matrices(grams) * layout.weights if grams else np.zeros(0)
        gram_part = E @ q_natural if E.size else np.zeros(len(r))
        free = np.zeros(problem.n_free)
        if problem.n_free and r.size:
            free = np.linalg.lstsq(G, r - gram_part, rcond=None)[0]
        violation = float(np.max(np.abs(gram_part + G @ free - r))) if r.size else 0.0

        eigenvalues = [float(np.linalg.eigvalsh(g)[0]) for g in grams]
        margin = min(eigenvalues) if eigenvalues else None
        psd_ok = all(ev >= -s.psd_tol * max(1.0, float(np.trace(g))) for ev, g in zip(eigenvalues, grams))
        eq_ok = violation <= s.eq_tol

        strict = False
        if status is None:
            if eq_ok and margin is not None and margin > s.margin_tol:
                status, strict = SolveStatus.FEASIBLE, True
                note = ""
            elif margin_bound is not None and margin_bound < -s.margin_tol:
                status = SolveStatus.INFEASIBLE
                note = "dual bound on the margin is negative"
            elif eq_ok and psd_ok and margin is not None and margin >= -s.margin_tol:
                status = SolveStatus.FEASIBLE
                note = "boundary point: margin within tolerance of zero"
            else:
                status = SolveStatus.INDETERMINATE
                if not note:
                    note = "margin not separated from zero" if converged else "no convergence"

        block_values: List[List[List[float]]] = [[] for _ in problem.blocks]
        for k, b in enumerate(nonempty):
            block_values[b] = grams[k].tolist()
        solution = SdpSolution(
            status=status,
            strict=strict,
            margin=margin,
            margin_bound=margin_bound,
            block_values=block_values,
            free_values=list(map(float, free)),
            max_eq_violation=violation,
            min_eigenvalue=margin,
            objective_value=problem.evaluate_objective(
                [np.array(v) if v else np.zeros((0, 0)) for v in block_values], free),
            iterations=iterations,
            trace_cap=tau,
            dual_point=dual_point if status == SolveStatus.INFEASIBLE and dual_point else [],
            note=note,
        )
        self._log({
            "status": solution.status.value, "strict": strict, "margin": margin,
            "iterations": iterations, "blocks": problem.blocks, "constraints": len(problem.constraints),
            "max_eq_violation": violation, "note": note,
        })
        return solution


def solve(problem: SdpProblem, settings: Optional[SolverSettings] = None) -> SdpSolution:
    return SdpSolver(settings).solve(problem)
