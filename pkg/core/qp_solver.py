"""
Dense Active-Set QP Solver

Primal active-set method for min 0.5 z'Hz + f'z s.t. Gz <= g with a single
Cholesky factorization of H, a cached Schur matrix G H^-1 G', warm starts,
an L1 projection (scipy's linprog) for cold starts and slack relaxation of
soft rows.
"""

import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import LinAlgError, block_diag, cho_factor, cho_solve
from scipy.optimize import linprog

from models import KktResiduals, QpProblem, QpSolution, QpStatus, WarmStart
from .errors import DimensionMismatch, NonFinite, NotPositiveDefinite

# Rows whose residual after projection onto the working rows is below this
# fraction of their norm are treated as linearly dependent.
INDEPENDENCE_TOL = 1e-9


class ActiveSetSolver:
    """Primal active-set QP solver with range-space (Schur complement) steps."""

    def __init__(self, tol: float = 1e-8, max_iter: int = 200):
        """Initialize the solver.

        Args:
            tol: Optimality and feasibility tolerance
            max_iter: Iteration limit of one active-set solve; a relaxed solve
                gets two more iterations per soft row
        """
        self.tol = tol
        self.max_iter = max_iter
        self.logger = logging.getLogger(__name__)

    def solve(self, problem: QpProblem, warm_start: Optional[WarmStart] = None) -> QpSolution:
        """Solve a QP, relaxing soft rows when the full row set is infeasible.

        Args:
            problem: QP data
            warm_start: Starting point and candidate working set

        Returns:
            QpSolution; status infeasible when the hard rows admit no point
        """
        H, f, G, g = self._validate(problem)
        chol = self._factor(H)
        z_free = -cho_solve(chol, f)

        if G.shape[0] == 0:
            return QpSolution(z=z_free, status=QpStatus.OPTIMAL,
                              kkt=self._residuals(H, f, G, g, z_free, np.zeros(0)),
                              iterations=0, active_set=[], multipliers=np.zeros(0))

        warm_z = self._warm_point(warm_start, f.shape[0])
        candidates = list(warm_start.active_set) if warm_start is not None else []
        z0 = self._initial_point(G, g, warm_z, z_free)
        if z0 is None:
            if not problem.soft_rows:
                self.logger.warning("QP infeasible and no soft rows to relax")
                return self._infeasible(problem)
            return self._solve_relaxed(problem, H, f, G, g, warm_z, z_free, candidates)

        return self._iterate(H, chol, f, G, g, z0, candidates, self.max_iter)

    # Setup
    def _validate(self, problem: QpProblem) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        H = np.asarray(problem.H, dtype=float)
        f = np.asarray(problem.f, dtype=float).ravel()
        G = np.asarray(problem.G, dtype=float)
        g = np.asarray(problem.g, dtype=float).ravel()
        n = f.shape[0]
        if G.size == 0:
            G = G.reshape(0, n)
        if H.shape != (n, n) or G.ndim != 2 or G.shape[1] != n or G.shape[0] != g.shape[0]:
            raise DimensionMismatch(f"QP shapes H {H.shape}, f {f.shape}, G {G.shape}, g {g.shape}")
        for name, arr in (("H", H), ("f", f), ("G", G), ("g", g)):
            if not np.all(np.isfinite(arr)):
                raise NonFinite(f"QP {name} contains non-finite entries")
        asym = np.max(np.abs(H - H.T)) if n else 0.0
        if asym > 1e-10 * max(1.0, np.max(np.abs(H))):
            raise NotPositiveDefinite(f"Hessian is not symmetric (max asymmetry {asym:.3e})")
        return 0.5 * (H + H.T), f, G, g

    def _factor(self, H: np.ndarray):
        try:
            return cho_factor(H, lower=True)
        except LinAlgError as e:
            raise NotPositiveDefinite(f"Cholesky factorization of the Hessian failed: {e}") from e

    def _scale(self, g: np.ndarray) -> float:
        return max(1.0, float(np.max(np.abs(g), initial=0.0)))

    def _feasible(self, G: np.ndarray, g: np.ndarray, z: np.ndarray) -> bool:
        return bool(np.all(G @ z <= g + self.tol * self._scale(g)))

    @staticmethod
    def _warm_point(warm_start: Optional[WarmStart], n: int) -> Optional[np.ndarray]:
        if warm_start is None or warm_start.z is None:
            return None
        z = np.asarray(warm_start.z, dtype=float)
        if z.shape != (n,) or not np.all(np.isfinite(z)):
            return None
        return z.copy()

    def _phase_one(self, G: np.ndarray, g: np.ndarray) -> Optional[np.ndarray]:
        """Any point with Gz <= g, or None when the rows are infeasible."""
        n = G.shape[1]
        result = linprog(np.zeros(n), A_ub=G, b_ub=g, bounds=[(None, None)] * n, method="highs")
        if result.status != 0 or result.x is None:
            return None
        return np.asarray(result.x, dtype=float)

    def _project(self, G: np.ndarray, g: np.ndarray, anchor: np.ndarray) -> Optional[np.ndarray]:
        """Feasible point nearest to anchor in the 1-norm, or None when the rows are infeasible.

        Solved as an LP over (z, t) with |z - anchor| <= t; the vertex it returns
        already sits on the rows that separate anchor from the feasible set.
        """
        rows, n = G.shape
        eye = np.eye(n)
        A_ub = np.block([[eye, -eye], [-eye, -eye], [G, np.zeros((rows, n))]])
        b_ub = np.concatenate([anchor, -anchor, g])
        cost = np.concatenate([np.zeros(n), np.ones(n)])
        result = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * n + [(0.0, None)] * n,
                         method="highs")
        if result.status == 0 and result.x is not None:
            return np.asarray(result.x[:n], dtype=float)
        if result.status == 2:
            return None
        self.logger.debug(f"L1 projection ended with linprog status {result.status}; falling back to phase one")
        return self._phase_one(G, g)

    def _initial_point(self, G: np.ndarray, g: np.ndarray, warm_z: Optional[np.ndarray],
                       z_free: np.ndarray) -> Optional[np.ndarray]:
        if warm_z is not None and self._feasible(G, g, warm_z):
            return warm_z
        if self._feasible(G, g, z_free):
            return z_free.copy()
        return self._project(G, g, warm_z if warm_z is not None else z_free)

    # Active-set iterations
    def _initial_working_set(self, G: np.ndarray, g: np.ndarray, z: np.ndarray,
                             candidates: Sequence[int]) -> List[int]:
        """Every row active at z, warm-start candidates first, kept linearly independent."""
        rows, n = G.shape
        slack = g - G @ z
        active_tol = max(10.0 * self.tol, 1e-12) * self._scale(g)
        active = np.flatnonzero(slack <= active_tol)
        order = [int(r) for r in candidates if 0 <= r < rows and slack[r] <= active_tol]
        order += [int(r) for r in active[np.argsort(slack[active], kind="stable")]]

        working: List[int] = []
        seen = set()
        basis = np.zeros((0, n))
        for row in order:
            if row in seen:
                continue
            seen.add(row)
            a = G[row]
            norm = np.linalg.norm(a)
            if norm == 0.0:
                continue
            r = a - basis.T @ (basis @ a)
            r = r - basis.T @ (basis @ r)
            r_norm = np.linalg.norm(r)
            if r_norm > INDEPENDENCE_TOL * norm:
                basis = np.vstack([basis, r / r_norm])
                working.append(row)
                if len(working) == n:
                    break
        return working

    def _iterate(self, H: np.ndarray, chol, f: np.ndarray, G: np.ndarray, g: np.ndarray, z: np.ndarray,
                 candidates: Sequence[int], budget: int) -> QpSolution:
        Hinv_Gt = cho_solve(chol, G.T)
        Hinv_f = cho_solve(chol, f)
        schur_all = G @ Hinv_Gt
        G_Hinv_f = G @ Hinv_f
        row_norms = np.linalg.norm(G, axis=1)

        working = self._initial_working_set(G, g, z, candidates)
        in_working = np.zeros(G.shape[0], dtype=bool)
        in_working[working] = True
        lam_w = np.zeros(0)

        for iteration in range(1, budget + 1):
            if working:
                idx = np.asarray(working)
                lam_w = self._solve_schur(schur_all[np.ix_(idx, idx)], -g[idx] - G_Hinv_f[idx])
                z_eq = -Hinv_f - Hinv_Gt[:, idx] @ lam_w
            else:
                lam_w = np.zeros(0)
                z_eq = -Hinv_f

            p = z_eq - z
            step = float(np.max(np.abs(p)))
            if step > self.tol * max(1.0, float(np.max(np.abs(z)))):
                Gp = G @ p
                blocking = np.flatnonzero((Gp > 1e-12 * row_norms * step) & ~in_working)
                if blocking.size:
                    slack = np.maximum(g[blocking] - G[blocking] @ z, 0.0)
                    ratios = slack / Gp[blocking]
                    j = int(np.argmin(ratios))
                    if ratios[j] < 1.0:
                        z = z + float(ratios[j]) * p
                        row = int(blocking[j])
                        working.append(row)
                        in_working[row] = True
                        continue
                z = z_eq

            # z minimizes the objective on the working rows
            dual_tol = self.tol * max(1.0, float(np.max(np.abs(lam_w), initial=0.0)))
            if lam_w.size == 0 or float(np.min(lam_w)) >= -dual_tol:
                return self._finish(H, f, G, g, z, working, lam_w, QpStatus.OPTIMAL, iteration)
            row = working.pop(int(np.argmin(lam_w)))
            in_working[row] = False

        self.logger.warning(f"Active-set solver hit the iteration limit ({budget})")
        lam_w = lam_w if lam_w.size == len(working) else np.zeros(len(working))
        return self._finish(H, f, G, g, z, working, lam_w, QpStatus.MAX_ITER, budget)

    @staticmethod
    def _solve_schur(schur: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        try:
            return np.linalg.solve(schur, rhs)
        except np.linalg.LinAlgError:
            return np.linalg.lstsq(schur, rhs, rcond=None)[0]

    def _finish(self, H, f, G, g, z, working, lam_w, status, iterations) -> QpSolution:
        lam = np.zeros(G.shape[0])
        if working:
            lam[working] = lam_w
        return QpSolution(z=z, status=status, kkt=self._residuals(H, f, G, g, z, lam),
                          iterations=iterations, active_set=sorted(int(i) for i in working), multipliers=lam)

    @staticmethod
    def _residuals(H, f, G, g, z, lam) -> KktResiduals:
        """Scaled infinity-norm KKT residuals."""
        grad = H @ z + f
        scale = max(1.0, np.max(np.abs(f), initial=0.0), np.max(np.abs(H @ z), initial=0.0))
        stationarity = np.max(np.abs(grad + G.T @ lam), initial=0.0) / scale
        g_scale = max(1.0, np.max(np.abs(g), initial=0.0))
        slack = g - G @ z
        primal = max(0.0, -np.min(slack, initial=0.0)) / g_scale
        complementarity = np.max(np.abs(lam * slack), initial=0.0) / (g_scale * max(1.0, np.max(np.abs(lam), initial=0.0)))
        return KktResiduals(stationarity=float(stationarity), primal=float(primal),
                            complementarity=float(complementarity))

    # Infeasibility handling
    def _infeasible(self, problem: QpProblem) -> QpSolution:
        n = problem.n
        return QpSolution(z=np.zeros(n), status=QpStatus.INFEASIBLE,
                          kkt=KktResiduals(np.inf, np.inf, np.inf), iterations=0)

    def _solve_relaxed(self, problem: QpProblem, H: np.ndarray, f: np.ndarray, G: np.ndarray, g: np.ndarray,
                       warm_z: Optional[np.ndarray], z_free: np.ndarray, candidates: Sequence[int]) -> QpSolution:
        """Re-solve with a nonnegative slack on every soft row.

        The slack s enters the rows as G_soft z - s <= g_soft and is penalized by
        0.5 * w * s's + w * sum(s). Every satisfied soft row starts with its
        s >= 0 bound active and every violated one with the row itself active.
        """
        n = problem.n
        soft = sorted(set(int(i) for i in problem.soft_rows))
        soft_set = set(soft)
        hard = [i for i in range(G.shape[0]) if i not in soft_set]
        G_h, g_h = G[hard], g[hard]

        anchor = warm_z if warm_z is not None else z_free
        if not hard or self._feasible(G_h, g_h, anchor):
            z_start = anchor.copy()
        elif self._feasible(G_h, g_h, z_free):
            z_start = z_free.copy()
        else:
            z_start = self._project(G_h, g_h, anchor)
        if z_start is None:
            self.logger.warning("QP hard rows infeasible; relaxation not possible")
            return self._infeasible(problem)

        ns = len(soft)
        w = problem.slack_weight
        H_aug = block_diag(H, w * np.eye(ns))
        f_aug = np.concatenate([f, w * np.ones(ns)])
        G_aug = np.vstack([
            np.hstack([G_h, np.zeros((len(hard), ns))]),
            np.hstack([G[soft], -np.eye(ns)]),
            np.hstack([np.zeros((ns, n)), -np.eye(ns)]),
        ])
        g_aug = np.concatenate([g_h, g[soft], np.zeros(ns)])
        s_start = np.maximum(G[soft] @ z_start - g[soft], 0.0)

        position = {row: i for i, row in enumerate(hard)}
        position.update({row: len(hard) + i for i, row in enumerate(soft)})
        aug_candidates = [position[r] for r in candidates if r in position]

        chol = self._factor(H_aug)
        inner = self._iterate(H_aug, chol, f_aug, G_aug, g_aug, np.concatenate([z_start, s_start]),
                              aug_candidates, self.max_iter + 2 * ns)
        status = QpStatus.RELAXED_OPTIMAL if inner.status is QpStatus.OPTIMAL else inner.status
        slack = inner.z[n:]
        self.logger.warning(f"QP relaxed {int(np.sum(slack > self.tol))} soft rows "
                            f"(max slack {np.max(slack, initial=0.0):.3e})")

        lam = np.zeros(G.shape[0])
        lam[hard] = inner.multipliers[:len(hard)]
        lam[soft] = inner.multipliers[len(hard):len(hard) + ns]
        active = sorted(([hard[i] for i in inner.active_set if i < len(hard)]
                         + [soft[i - len(hard)] for i in inner.active_set if len(hard) <= i < len(hard) + ns]))
        return QpSolution(z=inner.z[:n], status=status, kkt=inner.kkt, iterations=inner.iterations,
                          active_set=active, multipliers=lam, slack=slack)


def shift_increments(z: Optional[np.ndarray], m: int) -> Optional[np.ndarray]:
    """Drop the first input block of a stacked increment vector and append a zero block."""
    if z is None:
        return None
    return np.concatenate([z[m:], np.zeros(m)])


def solve(problem: QpProblem, tol: float = 1e-8, max_iter: int = 200,
          warm_start: Optional[WarmStart] = None) -> QpSolution:
    return ActiveSetSolver(tol=tol, max_iter=max_iter).solve(problem, warm_start)


def dump_problem(problem: QpProblem, path: Union[str, Path], label: str = "") -> Path:
    """Write H, f, G, g and the soft rows as flat decimal text.

    Layout: a header line, then sections `H n n`, `f n`, `G rows n`, `g rows`,
    `soft k`, each followed by its entries row-major, one matrix row per line.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    G = np.asarray(problem.G, dtype=float).reshape(-1, problem.n)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# qp {label} n={problem.n} rows={G.shape[0]} slack_weight={problem.slack_weight!r}\n")
        fh.write(f"H {problem.n} {problem.n}\n")
        np.savetxt(fh, np.atleast_2d(problem.H), fmt="%.17g")
        fh.write(f"f {problem.n}\n")
        np.savetxt(fh, np.atleast_2d(problem.f), fmt="%.17g")
        fh.write(f"G {G.shape[0]} {problem.n}\n")
        if G.shape[0]:
            np.savetxt(fh, G, fmt="%.17g")
        fh.write(f"g {G.shape[0]}\n")
        if G.shape[0]:
            np.savetxt(fh, np.atleast_2d(problem.g), fmt="%.17g")
        fh.write(f"soft {len(problem.soft_rows)}\n")
        if problem.soft_rows:
            fh.write(" ".join(str(int(i)) for i in problem.soft_rows) + "\n")
    return path
