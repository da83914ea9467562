"""Explicit d^2 x d^2 matrices for small d.

These are the independent cross-checks for the coordinate arithmetic in
:mod:`orthohide.commutant`: projector algebra, brute-force twirling over the
signed-permutation group, the PPT witness, and partial transposition.
Basis ordering is ``|i>|j> -> i*d + j``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from . import commutant
from .errors import ResourceLimitError, ShapeError, check_dim

DENSE_CUTOFF = 12
GROUP_CUTOFF = 5
PSD_FLOOR = 1e-8


def _check_dense(d: int, cutoff: int = DENSE_CUTOFF) -> int:
    d = check_dim(d)
    if d > cutoff:
        raise ResourceLimitError(f"d={d} exceeds the dense cutoff {cutoff}")
    return d


def _dim_of(x: np.ndarray) -> int:
    n = x.shape[0]
    d = math.isqrt(n)
    if x.shape != (n, n) or d * d != n:
        raise ShapeError(f"expected a square d^2 x d^2 matrix, got shape {x.shape}")
    return d


def max_entangled(d: int) -> np.ndarray:
    """``Phi = |Psi><Psi|`` with ``|Psi> = sum_i |ii> / sqrt(d)``."""
    d = _check_dense(d)
    psi = np.eye(d).reshape(-1) / math.sqrt(d)
    return np.outer(psi, psi)


def correlated_projector(d: int) -> np.ndarray:
    """``P = sum_i |ii><ii|``."""
    d = _check_dense(d)
    return np.diag(np.eye(d).reshape(-1))


def flip(d: int) -> np.ndarray:
    """Swap operator ``F |ij> = |ji>``."""
    d = _check_dense(d)
    f = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            f[j * d + i, i * d + j] = 1.0
    return f


def build_projectors(d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Theta_0..Theta_3 as dense matrices."""
    phi, p, f = max_entangled(d), correlated_projector(d), flip(d)
    one = np.eye(d * d)
    return phi, p - phi, (one + f - 2 * p) / 2, (one - f) / 2


def from_coords(coeffs, d: int) -> np.ndarray:
    """Dense matrix of a single-factor commutant operator."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (4,):
        raise ShapeError("dense reconstruction needs exactly 4 coordinates (k=1)")
    thetas = build_projectors(d)
    return sum(c * t for c, t in zip(coeffs, thetas))


def from_commutant(x: commutant.CommutantOp) -> np.ndarray:
    """Dense matrix of ``x`` on ``(A1 B1)(A2 B2)...`` ordering."""
    thetas = build_projectors(x.d)
    n = x.d * x.d
    out = np.zeros((n**x.k, n**x.k))
    for flat, c in enumerate(np.asarray(x.coeffs, dtype=float)):
        if c == 0:
            continue
        digits = np.base_repr(flat, 4).zfill(x.k) if x.k > 0 else ""
        term = np.ones((1, 1))
        for ch in digits:
            term = np.kron(term, thetas[int(ch)])
        out += c * term
    return out


def build_states(d: int) -> tuple[np.ndarray, np.ndarray]:
    s0, s1 = commutant.sigma_pair(d)
    return from_coords(s0.coeffs, d), from_coords(s1.coeffs, d)


def partial_transpose(x: np.ndarray) -> np.ndarray:
    """Transpose on the second tensor factor: ``((i,j),(i',j')) -> ((i,j'),(i',j))``."""
    d = _dim_of(x)
    return x.reshape(d, d, d, d).transpose(0, 3, 2, 1).reshape(d * d, d * d)


@dataclass(frozen=True)
class GroupElement:
    """``U = U_perm V_signs``, i.e. ``U |i> = signs[i] |perm[i]>``."""

    perm: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"{self.perm} is not a permutation")
        if len(self.signs) != len(self.perm) or any(s not in (-1, 1) for s in self.signs):
            raise ValueError(f"bad sign vector {self.signs}")

    def matrix(self) -> np.ndarray:
        d = len(self.perm)
        u = np.zeros((d, d))
        for i, (p, s) in enumerate(zip(self.perm, self.signs)):
            u[p, i] = s
        return u

    def trace(self) -> int:
        return sum(s for i, (p, s) in enumerate(zip(self.perm, self.signs)) if p == i)


def enumerate_group(d: int) -> Iterator[GroupElement]:
    """All ``d! * 2**d`` signed permutations, in a fixed order."""
    d = _check_dense(d, GROUP_CUTOFF)
    for perm in itertools.permutations(range(d)):
        for signs in itertools.product((1, -1), repeat=d):
            yield GroupElement(perm, signs)


def twirl_exact(x: np.ndarray) -> np.ndarray:
    """Group average of ``(U (x) U) X (U (x) U)^T`` by full enumeration."""
    d = _dim_of(x)
    terms = []
    for g in enumerate_group(d):
        uu = np.kron(g.matrix(), g.matrix())
        terms.append(uu @ x @ uu.T)
    # np.sum over the stacked axis uses pairwise summation; order is fixed.
    return np.sum(np.stack(terms), axis=0) / len(terms)


def twirl_closed_form(x: np.ndarray) -> np.ndarray:
    """``sum_i Tr[X Theta_i] / Tr[Theta_i] * Theta_i``."""
    d = _dim_of(x)
    out = np.zeros_like(x, dtype=float)
    for t in build_projectors(d):
        out += np.trace(x @ t) / np.trace(t) * t
    return out


def character_sum(d: int) -> Fraction:
    """Group average of ``(Tr U)**4``; equals the commutant dimension, 4."""
    total = 0
    count = 0
    for g in enumerate_group(d):
        total += g.trace() ** 4
        count += 1
    return Fraction(total, count)


def jacobi_eigenvalues(x: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by the cyclic Jacobi method.

    Sweeps over all off-diagonal pairs, rotating each to zero, until the
    off-diagonal Frobenius norm drops below ``tol * ||X||_F``.
    """
    a = np.array(x, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ShapeError(f"expected a square matrix, got {a.shape}")
    if n == 1:
        return a.diagonal().copy()
    scale = np.linalg.norm(a)
    if scale == 0:
        return np.zeros(n)
    a = (a + a.T) / 2
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(a.diagonal() ** 2), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * apq)
                if abs(theta) > 1e150:
                    t = 1 / (2 * theta)
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
    return np.sort(a.diagonal())


def min_eigenvalue(x: np.ndarray) -> float:
    return float(jacobi_eigenvalues(x)[0])


def is_psd(x: np.ndarray, floor: float = PSD_FLOOR) -> bool:
    """PSD test with a floor scaled by the largest entry."""
    scale = max(float(np.max(np.abs(x))), 1.0) if x.size else 1.0
    return min_eigenvalue(x) >= -floor * scale


def witness(d: int) -> np.ndarray:
    """``E = P - Phi + (2/d) Q_-``."""
    _, t1, _, t3 = build_projectors(d)
    return t1 + (2 / d) * t3


def witness_value(d: int) -> tuple[float, bool]:
    """``Tr[E (sigma_1 - sigma_0)]`` and whether ``(E, 1-E)`` is a valid PPT
    measurement (``0 <= E <= 1``, ``E^Gamma >= 0``, ``(1-E)^Gamma >= 0``)."""
    e = witness(d)
    s0, s1 = build_states(d)
    one = np.eye(d * d)
    checks = (e, one - e, partial_transpose(e), partial_transpose(one - e))
    return float(np.trace(e @ (s1 - s0))), all(is_psd(c) for c in checks)


def basis_measurement_bias(d: int) -> float:
    """Bias of measuring both sides in the computational basis and guessing
    sigma_1 when the outcomes coincide; an LOCC lower bound."""
    s0, s1 = build_states(d)
    return float(np.trace(correlated_projector(d) @ (s1 - s0)))


def product_state_inputs(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Product states ``|e><e| (x) |e><e|`` and ``|+><+| (x) |-><-|`` whose
    twirls give sigma_0 and sigma_1."""
    d = _check_dense(d)
    e = np.ones(d) / math.sqrt(d)
    plus = np.zeros(d)
    minus = np.zeros(d)
    plus[[0, 1]] = 1 / math.sqrt(2)
    minus[0], minus[1] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    ee = np.kron(e, e)
    pm = np.kron(plus, minus)
    return np.outer(ee, ee), np.outer(pm, pm)
