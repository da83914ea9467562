"""Bounded-variable primal simplex with Bland's rule.

Problems have the form::

    maximize / minimize   c^T x
    subject to            row_lo <= A x <= row_hi
                          var_lo <= x   <= var_hi

Infinite bounds are allowed. The solver appends one slack per row
(``A x - s = 0`` with ``s`` carrying the row bounds) and, where the starting
point violates a row, one artificial variable; phase 1 drives the
artificials to zero.

The same code runs on float64 or on exact :class:`fractions.Fraction`
values (numpy object arrays); in exact mode all tolerances are zero.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ShapeError

log = logging.getLogger(__name__)

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11
COST_TOL = 1e-11
PIVOT_REL_TOL = 1e-9
MAX_ITER = 10**6
REFACTOR_EVERY = 64
DEGENERATE_SWITCH = 50

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration-limit"


class KronPowerOperator:
    """``mat^{(x) k}`` as a matrix-free linear operator.

    Products cost ``O(k * n**(k+1))`` via mode products; only the requested
    columns are ever materialized.
    """

    def __init__(self, mat: np.ndarray, k: int):
        self.mat = np.asarray(mat)
        self.k = k
        n = self.mat.shape[0]
        self.shape = (n**k, n**k)
        self.dtype = self.mat.dtype

    def matvec(self, x: np.ndarray) -> np.ndarray:
        from .commutant import kron_apply

        return kron_apply(self.mat, x, self.k)

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        from .commutant import kron_apply

        return kron_apply(self.mat.T, y, self.k)

    def column(self, j: int) -> np.ndarray:
        n = self.mat.shape[0]
        col = self.mat[:, j % n]
        j //= n
        for _ in range(self.k - 1):
            col = np.kron(self.mat[:, j % n], col)
            j //= n
        return col

    def toarray(self) -> np.ndarray:
        out = self.mat
        for _ in range(self.k - 1):
            out = np.kron(out, self.mat)
        return out


def _as_operator(a):
    if isinstance(a, np.ndarray):
        return _DenseOperator(a)
    return a


class _DenseOperator:
    def __init__(self, a: np.ndarray):
        self.a = a
        self.shape = a.shape
        self.dtype = a.dtype

    def matvec(self, x):
        return self.a @ x

    def rmatvec(self, y):
        return y @ self.a

    def column(self, j):
        return self.a[:, j]

    def toarray(self):
        return self.a


@dataclass
class StandardLp:
    """Bounded-variable LP. ``constraint_matrix`` is a dense array or any
    object with ``shape``, ``matvec``, ``rmatvec`` and ``column``."""

    objective: np.ndarray
    constraint_matrix: object
    var_lo: np.ndarray
    var_hi: np.ndarray
    row_lo: np.ndarray
    row_hi: np.ndarray
    sense: str = "maximize"
    name: str = "lp"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m, n = self.constraint_matrix.shape
        if self.sense not in ("maximize", "minimize"):
            raise ValueError(f"unknown sense {self.sense!r}")
        for label, vec, size in (
            ("objective", self.objective, n),
            ("var_lo", self.var_lo, n),
            ("var_hi", self.var_hi, n),
            ("row_lo", self.row_lo, m),
            ("row_hi", self.row_hi, m),
        ):
            if len(vec) != size:
                raise ShapeError(f"{label} has length {len(vec)}, expected {size}")
        if np.any(self.var_lo > self.var_hi) or np.any(self.row_lo > self.row_hi):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def shape(self) -> tuple[int, int]:
        return self.constraint_matrix.shape

    @property
    def exact(self) -> bool:
        return np.asarray(self.objective).dtype == object

    def objective_at(self, x: np.ndarray):
        return (self.objective * x).sum()

    def max_violation(self, x: np.ndarray) -> float:
        """Largest bound or row violation at ``x`` (0 when feasible)."""
        ax = _as_operator(self.constraint_matrix).matvec(x)
        worst = 0.0
        for val, lo, hi in ((x, self.var_lo, self.var_hi), (ax, self.row_lo, self.row_hi)):
            worst = max(worst, float(np.max(np.maximum(lo - val, 0), initial=0)))
            worst = max(worst, float(np.max(np.maximum(val - hi, 0), initial=0)))
        return worst


@dataclass
class LpSolution:
    value: object
    point: np.ndarray
    status: str
    iterations: int
    row_duals: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _is_finite(v) -> bool:
    return not (isinstance(v, float) and math.isinf(v))


def solve_lp(lp: StandardLp, max_iter: int = MAX_ITER, pricing: str = "hybrid") -> LpSolution:
    """Solve ``lp`` with the two-phase bounded simplex.

    ``pricing="bland"`` uses Bland's lowest-index rule throughout.  The
    default ``"hybrid"`` prices by largest reduced cost and falls back to
    Bland's rule after ``DEGENERATE_SWITCH`` consecutive degenerate pivots,
    returning to Dantzig pricing after the next nondegenerate one; cycling
    needs an unbroken run of degenerate pivots, so this keeps Bland's
    termination guarantee.  Both rules are deterministic.

    ``row_duals`` holds the simplex multipliers of the rows for the
    maximization form of the problem (negated back for ``minimize``).
    """
    return _Simplex(lp, max_iter, pricing).run()


class _Simplex:
    def __init__(self, lp: StandardLp, max_iter: int, pricing: str):
        if pricing not in ("bland", "hybrid"):
            raise ValueError(f"unknown pricing rule {pricing!r}")
        self.pricing = pricing
        self.bland = pricing == "bland"
        self.degenerate_run = 0
        self.lp = lp
        self.A = _as_operator(lp.constraint_matrix)
        self.m, self.n = self.A.shape
        self.exact = lp.exact
        self.max_iter = max_iter
        if self.exact:
            self.zero, self.one = Fraction(0), Fraction(1)
            self.feas_tol = self.piv_tol = self.cost_tol = 0
            self.dtype = object
        else:
            self.zero, self.one = 0.0, 1.0
            self.feas_tol, self.piv_tol, self.cost_tol = FEAS_TOL, PIVOT_TOL, COST_TOL
            self.dtype = float
        self.iterations = 0

    # -- columns of the extended matrix [A, -I, diag(sign)] ------------------

    def column(self, j: int) -> np.ndarray:
        n, m = self.n, self.m
        if j < n:
            return np.asarray(self.A.column(j), dtype=self.dtype)
        col = np.array([self.zero] * m, dtype=self.dtype)
        if j < n + m:
            col[j - n] = -self.one
        else:
            col[j - n - m] = self.art_sign[j - n - m]
        return col

    def residual(self) -> np.ndarray:
        n, m = self.n, self.m
        x = self.x
        return self.A.matvec(x[:n]) - x[n : n + m] + self.art_sign * x[n + m :]

    def refactor(self) -> None:
        if self.exact:
            return
        basis_mat = np.column_stack([self.column(j) for j in self.basis])
        self.binv = np.linalg.inv(basis_mat)
        self.x[self.basis] -= self.binv @ self.residual()

    # -- setup --------------------------------------------------------------

    def setup(self) -> None:
        lp, n, m = self.lp, self.n, self.m
        inf = float("inf")
        self.lo = np.concatenate(
            [np.asarray(lp.var_lo, dtype=self.dtype), np.asarray(lp.row_lo, dtype=self.dtype),
             np.array([self.zero] * m, dtype=self.dtype)]
        )
        self.hi = np.concatenate(
            [np.asarray(lp.var_hi, dtype=self.dtype), np.asarray(lp.row_hi, dtype=self.dtype),
             np.array([inf] * m, dtype=self.dtype)]
        )
        x = np.array([self.zero] * (n + 2 * m), dtype=self.dtype)
        for j in range(n):
            if _is_finite(self.lo[j]):
                x[j] = self.lo[j]
            elif _is_finite(self.hi[j]):
                x[j] = self.hi[j]
        ax = self.A.matvec(x[:n])
        self.art_sign = np.array([self.one] * m, dtype=self.dtype)
        self.basis = []
        binv_diag = []
        for i in range(m):
            lo, hi, v = self.lo[n + i], self.hi[n + i], ax[i]
            if lo - self.feas_tol <= v <= hi + self.feas_tol:
                x[n + i] = v
                self.basis.append(n + i)
                binv_diag.append(-self.one)
                self.hi[n + m + i] = self.zero
            else:
                s = lo if v < lo else hi
                x[n + i] = s
                sign = self.one if s - v > 0 else -self.one
                self.art_sign[i] = sign
                x[n + m + i] = abs(s - v)
                self.basis.append(n + m + i)
                binv_diag.append(sign)
        self.x = x
        self.binv = np.diag(np.array(binv_diag, dtype=self.dtype))
        if self.exact:
            self.binv = np.array(self.binv, dtype=object)
            self.binv[self.binv == 0] = self.zero
        self.is_basic = np.zeros(n + 2 * m, dtype=bool)
        self.is_basic[self.basis] = True

    # -- one phase ----------------------------------------------------------

    def reduced_costs(self, cost: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        n, m = self.n, self.m
        pi = cost[self.basis] @ self.binv
        d = np.empty(n + 2 * m, dtype=self.dtype)
        d[:n] = cost[:n] - self.A.rmatvec(pi)
        d[n : n + m] = cost[n : n + m] + pi
        d[n + m :] = cost[n + m :] - pi * self.art_sign
        return d, pi

    def entering(self, d: np.ndarray) -> tuple[int, int]:
        """Pick the entering variable and its direction (+1 up, -1 down).

        Bland mode takes the lowest eligible index; otherwise the largest
        reduced cost wins (Dantzig), lowest index on ties.
        """
        tol = self.cost_tol
        can_up = (d > tol) & (self.x < self.hi) & ~self.is_basic
        can_down = (d < -tol) & (self.x > self.lo) & ~self.is_basic
        eligible = can_up | can_down
        cand = np.flatnonzero(eligible)
        if cand.size == 0:
            return -1, 0
        if self.bland:
            q = int(cand[0])
        else:
            score = np.abs(d[cand]).astype(float)
            q = int(cand[int(np.argmax(score))])
        return q, (1 if can_up[q] else -1)

    def ratio_test(self, q: int, direction: int, alpha: np.ndarray):
        """Return ``(theta, leaving_row, leaving_to_upper)``; row -1 means the
        entering variable flips to its other bound.

        Ties in the minimum ratio go to the lowest variable index (Bland).
        """
        flip = self.hi[q] - self.lo[q]
        cands = []
        mags = np.abs(alpha)
        tol = self.piv_tol
        if not self.exact and mags.size:
            tol = max(tol, PIVOT_REL_TOL * float(mags.max()))
        for r in np.flatnonzero(mags > tol):
            b = self.basis[r]
            delta = -direction * alpha[r]
            if delta < 0:
                if not _is_finite(self.lo[b]):
                    continue
                t, upper = (self.x[b] - self.lo[b]) / -delta, False
            else:
                if not _is_finite(self.hi[b]):
                    continue
                t, upper = (self.hi[b] - self.x[b]) / delta, True
            cands.append((max(t, self.zero), b, int(r), upper))
        if not cands:
            return flip, -1, False
        tmin = min(c[0] for c in cands)
        if _is_finite(flip) and flip <= tmin:
            return flip, -1, False
        window = tmin if self.exact else tmin + 1e-12 * max(1.0, abs(tmin))
        ties = [c for c in cands if c[0] <= window]
        if self.bland:
            _, _, r, upper = min(ties, key=lambda c: c[1])
        else:
            # largest pivot among near-ties, for a well-conditioned basis
            _, _, r, upper = max(ties, key=lambda c: (abs(float(alpha[c[2]])), -c[1]))
        return tmin, r, upper

    def phase(self, cost: np.ndarray) -> str:
        since_refactor = 0
        while True:
            if self.iterations >= self.max_iter:
                return ITERATION_LIMIT
            d, _ = self.reduced_costs(cost)
            q, direction = self.entering(d)
            if q < 0:
                return OPTIMAL
            alpha = self.binv @ self.column(q)
            theta, r, to_upper = self.ratio_test(q, direction, alpha)
            if not _is_finite(theta):
                return UNBOUNDED
            self.iterations += 1
            if self.pricing == "hybrid":
                if theta <= (0 if self.exact else 1e-12):
                    self.degenerate_run += 1
                    if self.degenerate_run >= DEGENERATE_SWITCH:
                        self.bland = True
                else:
                    self.degenerate_run = 0
                    self.bland = False
            step = direction * theta
            self.x[q] = self.x[q] + step
            self.x[self.basis] = self.x[self.basis] - step * alpha
            if r < 0:
                self.x[q] = self.hi[q] if direction > 0 else self.lo[q]
                continue
            leaving = self.basis[r]
            self.x[leaving] = self.hi[leaving] if to_upper else self.lo[leaving]
            piv = alpha[r]
            self.binv[r] = self.binv[r] / piv
            others = np.arange(self.m) != r
            self.binv[others] -= np.outer(alpha[others], self.binv[r])
            self.basis[r] = q
            self.is_basic[leaving] = False
            self.is_basic[q] = True
            since_refactor += 1
            if since_refactor >= REFACTOR_EVERY:
                self.refactor()
                since_refactor = 0

    def run(self) -> LpSolution:
        lp, n, m = self.lp, self.n, self.m
        self.setup()
        sign = 1 if lp.sense == "maximize" else -1

        if any(b >= n + m for b in self.basis):
            cost1 = np.array([self.zero] * (n + 2 * m), dtype=self.dtype)
            cost1[n + m :] = -self.one
            status = self.phase(cost1)
            self.refactor()
            infeas = sum(self.x[n + m :])
            if status == ITERATION_LIMIT:
                return self._result(ITERATION_LIMIT, None)
            if infeas > self.feas_tol * max(1, m):
                return self._result(INFEASIBLE, None)
        # artificials are pinned at zero for phase 2
        self.hi[n + m :] = self.zero
        self.x[n + m :] = self.zero

        cost2 = np.array([self.zero] * (n + 2 * m), dtype=self.dtype)
        cost2[:n] = sign * np.asarray(lp.objective, dtype=self.dtype)
        status = self.phase(cost2)
        self.refactor()
        _, pi = self.reduced_costs(cost2)
        return self._result(status, sign * pi)

    def _result(self, status: str, pi) -> LpSolution:
        point = self.x[: self.n].copy()
        value = self.lp.objective_at(point)
        log.debug("simplex %s: %s after %d pivots", self.lp.name, status, self.iterations)
        return LpSolution(value=value, point=point, status=status,
                          iterations=self.iterations, row_duals=pi)
