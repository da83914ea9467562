"""Closed-form decay rate mu_d, its spectral ingredients, and derived bounds.

The parity-state PPT norm obeys ``(1/2)||rho_1 - rho_0|| <= 2 mu_d**k``.
Everything here is a pure function of ``d`` (and ``k``, ``eps``, ``q``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .commutant import pt_matrix, r_vectors
from .errors import PreconditionError, ResourceLimitError, ShapeError, check_dim

SQRT_3_8 = math.sqrt(3 / 8)
ORACLE_MAX_K = 12
D_MAX_DEFAULT = 200


def mu(d: int) -> float:
    """Decay rate ``mu_d``; the radicand is clamped at 0 (exact zero at d=2)."""
    d = check_dim(d)
    inner = 1 - 2 / (d + 4 / d)
    num = 5 / 8 + (1 / d) * (
        1 / 4 + 2 / d + 9 / d**2 - 6 / d**3
        - math.sqrt(2) * (9 / 4 + 3 / d + 1 / d**2) * math.sqrt(inner)
    )
    den = 1 + 2 / d + 4 / d**2
    return math.sqrt(max(1 - num / den, 0.0))


# -- singular value decomposition of W_d ------------------------------------


@dataclass(frozen=True)
class SpectralData:
    d: int
    s: float
    singular_values: np.ndarray
    u: np.ndarray  # rows are u_1..u_4
    v: np.ndarray  # rows are v_1..v_4 = u_1, u_2, u_4, u_3

    def reconstruct(self) -> np.ndarray:
        return sum(sv * np.outer(a, b) for sv, a, b in zip(self.singular_values, self.u, self.v))


def _radicand(d: int) -> int:
    return 64 + 32 * d**2 + 8 * d**4 + d**6


def _small_s(d: int) -> float:
    # (A - (d-2)R) / 4d^2 cancels badly for large d; multiply through by the
    # conjugate so the numerator is an exact integer.
    a = 16 - 8 * d + 4 * d**2 - 2 * d**3 + d**4
    r = math.sqrt(_radicand(d))
    num = a * a - (d - 2) ** 2 * _radicand(d)
    return num / (4 * d**2 * (a + (d - 2) * r))


def _unit(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    return v if v[0] > 0 else -v


def spectral(d: int) -> SpectralData:
    """Singular values ``(1, 1, sqrt(s), 1/sqrt(s))`` and vectors of ``W_d``.

    ``u_3`` and ``u_4`` are normalized with a positive first entry.
    """
    d = check_dim(d)
    rad = _radicand(d)
    r = math.sqrt(rad)
    a = 8 + 4 * d + 4 * d**2 + d**3 + d**4
    b = 8 + 4 * d + d**3
    u1 = np.array([0.0, 0.0, 1.0, 1.0]) / math.sqrt(2)
    u2 = np.array([1.0, d + 1.0, -1.0, 1.0]) / math.sqrt(3 + (d + 1) ** 2)
    u3 = _unit(np.array([a + (d + 1) * r, -(b + r), -4.0 * d, 4.0 * d]))
    # a - (d+1)R and R - b, rationalized
    first = (a * a - (d + 1) ** 2 * rad) / (a + (d + 1) * r)
    second = (rad - b * b) / (r + b)
    u4 = _unit(np.array([first, second, -4.0 * d, 4.0 * d]))
    s = _small_s(d)
    u = np.stack([u1, u2, u3, u4])
    v = np.stack([u1, u2, u4, u3])
    sv = np.array([1.0, 1.0, math.sqrt(s), 1 / math.sqrt(s)])
    return SpectralData(d, s, sv, u, v)


@dataclass(frozen=True)
class CCoeffs:
    c2: float
    c3: float
    c4: float

    def mu_from_coeffs(self) -> float:
        return 2 * math.sqrt(self.c2 + 2 * math.sqrt(self.c3 * self.c4))


def c_coeffs(d: int) -> CCoeffs:
    """Squared overlaps of ``rbar_d`` with the left singular vectors."""
    sp = spectral(d)
    _, rbar = r_vectors(sp.d)
    ov = sp.u @ rbar
    return CCoeffs(float(ov[0] ** 2 + ov[1] ** 2), float(ov[2] ** 2), float(ov[3] ** 2))


# -- Tikhonov ------------------------------------------------------------------


def jacobi_svd(a: np.ndarray, tol: float = 1e-15, max_sweeps: int = 60):
    """One-sided (Hestenes) Jacobi SVD of a square matrix.

    Rotates column pairs of ``A V`` until they are mutually orthogonal,
    which diagonalizes ``A^T A`` implicitly.  Returns ``(U, sigma, V)`` with
    ``A = U diag(sigma) V^T``; columns of ``U`` for zero singular values
    are left at zero.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ShapeError(f"expected a square matrix, got {a.shape}")
    v = np.eye(n)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = a[:, p] @ a[:, p]
                beta = a[:, q] @ a[:, q]
                gamma = a[:, p] @ a[:, q]
                if abs(gamma) <= tol * math.sqrt(alpha * beta) or gamma == 0:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1 + zeta * zeta))
                c = 1 / math.sqrt(1 + t * t)
                sn = c * t
                for m in (a, v):
                    mp, mq = m[:, p].copy(), m[:, q].copy()
                    m[:, p] = c * mp - sn * mq
                    m[:, q] = sn * mp + c * mq
        if not rotated:
            break
    sigma = np.linalg.norm(a, axis=0)
    u = np.zeros_like(a)
    nz = sigma > 0
    u[:, nz] = a[:, nz] / sigma[nz]
    return u, sigma, v


def tikhonov_value(a: np.ndarray, b: np.ndarray) -> float:
    """``min_x ||x||^2 + ||b - A x||^2`` in closed form.

    Written as ``||b||^2 - sum sigma^2/(1+sigma^2) (u^T b)^2`` so that
    rank-deficient ``A`` needs no basis completion.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or b.shape != (a.shape[0],):
        raise ShapeError(f"need square A and matching b, got {a.shape} and {b.shape}")
    u, sigma, _ = jacobi_svd(a)
    proj = u.T @ b
    return float(b @ b - np.sum(sigma**2 / (1 + sigma**2) * proj**2))


# -- Sanov-type tail -------------------------------------------------------------


def _check_q(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (3,):
        raise ShapeError(f"q must be a probability 3-vector, got shape {q.shape}")
    if np.any(q < 0) or abs(q.sum() - 1) > 1e-12:
        raise PreconditionError(f"q must be a probability vector, got {q.tolist()}")
    return q


def _check_k(k: int) -> int:
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    return int(k)


def sanov_bound(q, k: int) -> float:
    """``(q1 + 2 sqrt(q2 q3))**k``, bounding ``Pr[#2 >= #3]`` when ``q2 < q3``."""
    q = _check_q(q)
    k = _check_k(k)
    if not q[1] < q[2]:
        raise PreconditionError(f"need q2 < q3, got q2={q[1]}, q3={q[2]}")
    return float((q[0] + 2 * math.sqrt(q[1] * q[2])) ** k)


def empirical_tail_oracle(q, k: int) -> float:
    """Exact ``Pr[#2 >= #3]`` over i.i.d. length-k strings, by enumeration."""
    q = _check_q(q)
    k = _check_k(k)
    if k > ORACLE_MAX_K:
        raise ResourceLimitError(f"enumeration of 3**{k} strings exceeds k <= {ORACLE_MAX_K}")
    strings = np.indices((3,) * k).reshape(k, -1)
    probs = np.prod(q[strings], axis=0)
    mask = (strings == 1).sum(axis=0) >= (strings == 2).sum(axis=0)
    return float(np.sum(probs[mask]))


# -- parity bound and dimension search ---------------------------------------


def parity_upper_bound(d: int, k: int) -> float:
    return 2 * mu(d) ** _check_k(k)


@dataclass(frozen=True)
class DimResult:
    """Smallest ``d**k`` with ``2 mu_d**k <= eps``.

    ``d_exponent`` minimizes ``log d / log(1/mu_d)``, the rate that governs
    the closed bound ``40 (2/eps)**10``; ``exponent`` is that minimum.
    """

    eps: float
    d_star: int
    k_star: int
    D: int
    closed_bound: float
    converse: float
    d_exponent: int
    exponent: float
    checks: dict = field(default_factory=dict)


def _k_for(d: int, eps: float) -> int:
    m = mu(d)
    k = max(1, math.ceil(math.log(2 / eps) / math.log(1 / m)))
    while 2 * m**k > eps:
        k += 1
    return k


def dim_for_eps(eps: float, d_max: int = D_MAX_DEFAULT) -> DimResult:
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if d_max < 3:
        raise ValueError(f"d_max must be at least 3, got {d_max}")
    best = None
    best_rate = None
    for d in range(3, d_max + 1):
        k = _k_for(d, eps)
        D = d**k
        if best is None or D < best[2]:
            best = (d, k, D)
        rate = math.log(d) / -math.log(mu(d))
        if best_rate is None or rate < best_rate[1]:
            best_rate = (d, rate)
    d_star, k_star, D = best
    closed = 40 * (2 / eps) ** 10
    converse = 0.5 + 1 / (2 * eps)
    checks = {
        "bound_le_eps": 2 * mu(d_star) ** k_star <= eps,
        "D_le_closed_bound": D <= closed,
        "D_ge_converse": D >= converse,
        "exponent_le_10": math.log(40) / -math.log(mu(40)) <= 10,
    }
    return DimResult(eps, d_star, k_star, D, closed, converse, best_rate[0], best_rate[1], checks)


@dataclass(frozen=True)
class BoundReport:
    d: int
    k: int
    mu: float
    upper: float
    ppt_value: float | None = None
    locc_lower: float | None = None
    witness: float | None = None

    @property
    def consistent(self) -> bool:
        return self.ppt_value is None or self.ppt_value <= self.upper + 1e-9


def bound_report(d: int, k: int, ppt_value: float | None = None) -> BoundReport:
    d = check_dim(d)
    k = _check_k(k)
    m = mu(d)
    at_one = k == 1
    return BoundReport(
        d, k, m, 2 * m**k, ppt_value,
        0.5 - 1 / d if at_one else None,
        0.5 + 1 / d if at_one else None,
    )


# -- mu table ------------------------------------------------------------------


@dataclass(frozen=True)
class MuTable:
    rows: list[tuple[int, float]]
    violations: list[int]  # d where mu_d >= mu_{d-1}

    def write_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["d", "mu"])
        for d, m in self.rows:
            w.writerow([d, format(m, ".17g")])


def fig1_data(d_min: int, d_max: int) -> MuTable:
    d_min = check_dim(d_min)
    if d_max < d_min:
        raise ValueError(f"need d_min <= d_max, got {d_min} > {d_max}")
    rows = [(d, mu(d)) for d in range(d_min, d_max + 1)]
    bad = [rows[i][0] for i in range(1, len(rows)) if rows[i][1] >= rows[i - 1][1]]
    return MuTable(rows, bad)


__all__ = [
    "BoundReport", "CCoeffs", "DimResult", "MuTable", "SpectralData", "bound_report",
    "c_coeffs", "dim_for_eps", "empirical_tail_oracle", "fig1_data", "jacobi_svd", "mu",
    "parity_upper_bound", "sanov_bound", "spectral", "tikhonov_value",
]
