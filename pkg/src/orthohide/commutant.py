"""Coordinate arithmetic in the commutant of the signed-permutation twirl.

A twirl-invariant operator on ``(C^d (x) C^d)^{(x) k}`` is stored as its
``4**k`` coefficients in the basis ``Theta_{i1} (x) ... (x) Theta_{ik}``.
Multi-indices are flattened big-endian in base 4::

    i = i1 * 4**(k-1) + i2 * 4**(k-2) + ... + ik

so ``np.kron`` of per-factor vectors gives the same ordering.  The four
projectors are

    Theta_0 = Phi, Theta_1 = P - Phi, Theta_2 = Q_+, Theta_3 = Q_-

(maximally entangled, rest of the maximally correlated subspace, symmetric
part off the diagonal, antisymmetric subspace).

Every function takes ``exact=True`` to work over :class:`fractions.Fraction`
(numpy object arrays) instead of float64.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ResourceLimitError, ShapeError, check_dim

DEFAULT_MAX_COORDS = 2**26


def _num(exact: bool):
    return Fraction if exact else float


def check_budget(k: int, max_coords: int = DEFAULT_MAX_COORDS) -> int:
    """Validate ``k`` and make sure ``4**k`` coordinates fit the budget."""
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ShapeError(f"number of tensor factors must be a positive integer, got {k!r}")
    k = int(k)
    if 4**k > max_coords:
        raise ResourceLimitError(
            f"4**{k} = {4**k} coordinates exceeds the budget of {max_coords}"
        )
    return k


def theta_ranks(d: int) -> tuple[int, int, int, int]:
    """Ranks of Theta_0..Theta_3; they sum to ``d**2``."""
    d = check_dim(d)
    half = d * (d - 1) // 2
    return (1, d - 1, half, half)


def pt_matrix(d: int, exact: bool = False) -> np.ndarray:
    """4x4 matrix ``W`` with ``Theta_i^Gamma = sum_j W[i, j] Theta_j``.

    ``W`` is an involution and every column sums to one.
    """
    d = check_dim(d)
    F = _num(exact)
    one, inv = F(1), F(1) / d
    half = F(1) / 2
    rows = [
        [inv, inv, inv, -inv],
        [one - inv, one - inv, -inv, inv],
        [F(d - 1) / 2, -half, half, half],
        [-F(d - 1) / 2, half, half, half],
    ]
    return np.array(rows, dtype=object if exact else float)


def r_vectors(d: int, exact: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(r, rbar)``: coordinates of ``sigma_0 - sigma_1`` weighted by
    the projector ranks, and ``rbar = r / 2``.

    ``rbar`` sums to zero and is a fixed point of ``pt_matrix(d)``.
    """
    d = check_dim(d)
    F = _num(exact)
    r = np.array(
        [F(1) / d, -F(1) / 2, F(1) - F(1) / d, -F(1) / 2],
        dtype=object if exact else float,
    )
    return r, r / 2


@dataclass(frozen=True)
class CommutantOp:
    """Operator ``sum_i coeffs[i] Theta_{i1} (x) ... (x) Theta_{ik}``.

    The represented operator is PSD iff every coefficient is nonnegative,
    since the tensor products of the Theta's are mutually orthogonal
    projectors.
    """

    d: int
    k: int
    coeffs: np.ndarray

    def __post_init__(self):
        check_dim(self.d)
        if len(self.coeffs) != 4**self.k:
            raise ShapeError(
                f"expected {4**self.k} coefficients for k={self.k}, got {len(self.coeffs)}"
            )

    @property
    def exact(self) -> bool:
        return self.coeffs.dtype == object

    def trace(self):
        return trace_pair(self, identity(self.d, self.k, exact=self.exact))

    def __add__(self, other: "CommutantOp") -> "CommutantOp":
        _check_same(self, other)
        return CommutantOp(self.d, self.k, self.coeffs + other.coeffs)

    def __sub__(self, other: "CommutantOp") -> "CommutantOp":
        _check_same(self, other)
        return CommutantOp(self.d, self.k, self.coeffs - other.coeffs)

    def scale(self, factor) -> "CommutantOp":
        return CommutantOp(self.d, self.k, self.coeffs * factor)


def _check_same(x: CommutantOp, y: CommutantOp) -> None:
    if (x.d, x.k) != (y.d, y.k):
        raise ShapeError(f"operands live on different spaces: (d,k)={x.d, x.k} vs {y.d, y.k}")


def identity(d: int, k: int = 1, exact: bool = False) -> CommutantOp:
    F = _num(exact)
    return CommutantOp(d, k, tensor_pow(np.array([F(1)] * 4, dtype=object if exact else float), k))


def tensor_pow(v, k: int, max_coords: int = DEFAULT_MAX_COORDS) -> np.ndarray:
    """Big-endian Kronecker power ``v (x) v (x) ... (x) v`` (``k`` factors)."""
    k = check_budget(k, max_coords)
    v = np.asarray(v)
    out = v
    for _ in range(k - 1):
        out = np.kron(out, v)
    return out


def kron_apply(mat: np.ndarray, vec: np.ndarray, k: int) -> np.ndarray:
    """Compute ``mat^{(x) k} @ vec`` by ``k`` successive mode products.

    Costs ``O(k * n**(k+1))`` for an ``n x n`` factor and never forms the
    Kronecker power.
    """
    n = mat.shape[0]
    if vec.shape != (n**k,):
        raise ShapeError(f"vector of length {vec.shape} does not match {n}**{k}")
    t = vec.reshape((n,) * k)
    for axis in range(k):
        t = np.moveaxis(np.tensordot(mat, t, axes=([1], [axis])), 0, axis)
    return t.reshape(-1)


def sigma_pair(d: int, exact: bool = False) -> tuple[CommutantOp, CommutantOp]:
    """The two orthogonal, PT-invariant states ``(sigma_0, sigma_1)``."""
    d = check_dim(d)
    F = _num(exact)
    z = F(0)
    dtype = object if exact else float
    s0 = np.array([F(1) / d, z, F(2) / d**2, z], dtype=dtype)
    s1 = np.array([z, F(1) / (2 * (d - 1)), z, F(1) / (d * (d - 1))], dtype=dtype)
    return CommutantOp(d, 1, s0), CommutantOp(d, 1, s1)


def even_odd(
    d: int, k: int, exact: bool = False, max_coords: int = DEFAULT_MAX_COORDS
) -> tuple[CommutantOp, CommutantOp]:
    """Even- and odd-parity mixtures ``(rho_0, rho_1)`` of k-fold products.

    Uses ``rho_{0/1} = [(s0 + s1)^{(x)k} +/- (s0 - s1)^{(x)k}] / 2**k``.
    """
    k = check_budget(k, max_coords)
    s0, s1 = sigma_pair(d, exact)
    plus = tensor_pow(s0.coeffs + s1.coeffs, k, max_coords)
    minus = tensor_pow(s0.coeffs - s1.coeffs, k, max_coords)
    scale = Fraction(1, 2**k) if exact else 0.5**k
    return CommutantOp(d, k, (plus + minus) * scale), CommutantOp(d, k, (plus - minus) * scale)


def apply_pt(x: CommutantOp) -> CommutantOp:
    """Partial transpose on the second party of every factor.

    In coordinates this is ``(W^T)^{(x) k} c``.
    """
    w = pt_matrix(x.d, exact=x.exact)
    if x.exact:
        return CommutantOp(x.d, x.k, kron_apply(w.T, x.coeffs, x.k))
    # entries of W grow like d/2, so k mode products amplify rounding;
    # accumulate in extended precision
    wl = pt_matrix(x.d, exact=True).T.astype(np.longdouble)
    out = kron_apply(wl, x.coeffs.astype(np.longdouble), x.k)
    return CommutantOp(x.d, x.k, out.astype(float))


def rank_weights(d: int, k: int, exact: bool = False) -> np.ndarray:
    ranks = theta_ranks(d)
    v = np.array(ranks, dtype=object) if exact else np.array(ranks, dtype=float)
    return tensor_pow(v, k)


def trace_pair(x: CommutantOp, y: CommutantOp):
    """``Tr[X Y]`` of the represented operators."""
    _check_same(x, y)
    w = rank_weights(x.d, x.k, exact=x.exact or y.exact)
    return (x.coeffs * y.coeffs * w).sum()
