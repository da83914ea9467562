"""PPT norm between the even and odd parity states as a linear program.

Twirl symmetry reduces the PPT measurement to ``4**k`` coordinates ``c``::

    (1/2)||rho_1 - rho_0||_PPT = 2**(1-k) max  c . r^{(x)k}
                                  s.t. 0 <= c <= 1,  0 <= (W^T)^{(x)k} c <= 1

whose dual collapses to an l1 problem::

    min_x  ||x||_1 + ||rbar^{(x)k} - W^{(x)k} x||_1

Both are built here and solved with :func:`orthohide.simplex.solve_lp`;
their agreement is the duality-gap certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import TextIO

import numpy as np

from .commutant import (
    DEFAULT_MAX_COORDS,
    check_budget,
    kron_apply,
    pt_matrix,
    r_vectors,
    tensor_pow,
)
from .errors import PreconditionError, ResourceLimitError, ShapeError, SolverError, check_dim
from .simplex import KronPowerOperator, LpSolution, StandardLp, solve_lp

DENSE_MAX_K = 4
DUAL_MAX_K = 4
EXACT_MAX_K = 2
EXACT_MAX_D = 10
GAP_TOL = 1e-7


def _ensure_exact_ok(d: int, k: int) -> None:
    if k > EXACT_MAX_K or d > EXACT_MAX_D:
        raise ResourceLimitError(
            f"rational mode is limited to k <= {EXACT_MAX_K}, d <= {EXACT_MAX_D}"
        )


def _full(value, n: int, exact: bool) -> np.ndarray:
    if exact:
        return np.array([value] * n, dtype=object)
    return np.full(n, float(value))


def build_primal(
    d: int, k: int, exact: bool = False, max_coords: int = DEFAULT_MAX_COORDS
) -> StandardLp:
    """Box-constrained primal over commutant coordinates of the POVM element."""
    d = check_dim(d)
    k = check_budget(k, max_coords)
    if exact:
        _ensure_exact_ok(d, k)
    n = 4**k
    w = pt_matrix(d, exact=exact)
    r, _ = r_vectors(d, exact=exact)
    scale = Fraction(1, 2 ** (k - 1)) if exact else 0.5 ** (k - 1)
    objective = tensor_pow(r, k, max_coords) * scale
    op = KronPowerOperator(w.T, k)
    matrix = op.toarray() if k <= DENSE_MAX_K else op
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    return StandardLp(
        objective=objective,
        constraint_matrix=matrix,
        var_lo=_full(zero, n, exact),
        var_hi=_full(one, n, exact),
        row_lo=_full(zero, n, exact),
        row_hi=_full(one, n, exact),
        sense="maximize",
        name=f"primal_d{d}_k{k}",
        meta={"d": d, "k": k, "which": "primal"},
    )


def factor_orbits(k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Group the ``4**k`` multi-indices by their symbol counts.

    Returns ``(orbit_of, reps, sizes)``: the orbit id of every flat index, a
    representative flat index per orbit and the orbit sizes.  Orbits are the
    classes of multi-indices related by permuting the ``k`` tensor factors.
    """
    digits = np.indices((4,) * k).reshape(k, -1)
    counts = np.stack([(digits == s).sum(axis=0) for s in range(4)])
    key = ((counts[0] * (k + 1) + counts[1]) * (k + 1) + counts[2]) * (k + 1) + counts[3]
    _, reps, orbit_of, sizes = np.unique(key, return_index=True, return_inverse=True,
                                         return_counts=True)
    return orbit_of.reshape(-1), reps, sizes


def build_primal_symmetric(
    d: int, k: int, exact: bool = False, max_coords: int = DEFAULT_MAX_COORDS
) -> StandardLp:
    """Primal restricted to coordinates invariant under permuting the factors.

    Objective and constraints are invariant under those permutations, so
    averaging an optimal ``c`` over them keeps it optimal; the restricted
    problem has one variable and one pair of row bounds per orbit and the
    same optimal value.
    """
    d = check_dim(d)
    k = check_budget(k, max_coords)
    if exact:
        _ensure_exact_ok(d, k)
    orbit_of, reps, sizes = factor_orbits(k)
    n_orb = len(reps)
    wt = pt_matrix(d, exact=exact).T
    r, _ = r_vectors(d, exact=exact)
    scale = Fraction(1, 2 ** (k - 1)) if exact else 0.5 ** (k - 1)
    full_obj = tensor_pow(r, k, max_coords) * scale
    objective = full_obj[reps] * sizes
    dtype = object if exact else float
    matrix = np.zeros((n_orb, n_orb), dtype=dtype)
    for a, rep in enumerate(reps):
        row = np.ones(1, dtype=dtype)
        for digit in np.base_repr(int(rep), 4).zfill(k):
            row = np.kron(row, wt[int(digit)])
        np.add.at(matrix[a], orbit_of, row)
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    return StandardLp(
        objective=objective,
        constraint_matrix=matrix,
        var_lo=_full(zero, n_orb, exact),
        var_hi=_full(one, n_orb, exact),
        row_lo=_full(zero, n_orb, exact),
        row_hi=_full(one, n_orb, exact),
        sense="maximize",
        name=f"primal_sym_d{d}_k{k}",
        meta={"d": d, "k": k, "which": "primal-symmetric"},
    )


def expand_symmetric(values: np.ndarray, k: int, per_element: bool = False) -> np.ndarray:
    """Spread orbit values back to all ``4**k`` coordinates.

    With ``per_element=True`` each orbit value is divided evenly among its
    members (used for row multipliers); otherwise it is copied.
    """
    orbit_of, _, sizes = factor_orbits(k)
    values = np.asarray(values)
    if per_element:
        values = values / sizes
    return values[orbit_of]


def slater_point(k: int) -> np.ndarray:
    """``c = 1/2`` everywhere; strictly feasible for every ``d``."""
    return np.full(4**k, 0.5)


def build_dual_l1(
    d: int, k: int, exact: bool = False, max_coords: int = DEFAULT_MAX_COORDS
) -> StandardLp:
    """l1 form with variables ``[x (free), t >= |x|, u >= |rbar - W x|]``."""
    d = check_dim(d)
    k = check_budget(k, max_coords)
    if exact:
        _ensure_exact_ok(d, k)
    if k > DUAL_MAX_K:
        raise ResourceLimitError(f"dense dual LP is limited to k <= {DUAL_MAX_K}")
    n = 4**k
    _, rbar = r_vectors(d, exact=exact)
    b = tensor_pow(rbar, k, max_coords)
    wk = KronPowerOperator(pt_matrix(d, exact=exact), k).toarray()
    dtype = object if exact else float
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    eye = np.eye(n, dtype=int).astype(dtype)
    if exact:
        eye = np.where(eye == 1, one, zero).astype(object)
    nil = eye * zero
    matrix = np.block([
        [eye, eye, nil],
        [-eye, eye, nil],
        [wk, nil, eye],
        [-wk, nil, eye],
    ]).astype(dtype)
    inf = float("inf")
    row_lo = np.concatenate([_full(zero, 2 * n, exact), b, -b])
    objective = np.concatenate([_full(zero, n, exact), _full(one, 2 * n, exact)])
    var_lo = np.concatenate([_full(-inf, n, False).astype(dtype), _full(zero, 2 * n, exact)])
    return StandardLp(
        objective=objective,
        constraint_matrix=matrix,
        var_lo=var_lo,
        var_hi=np.array([inf] * (3 * n), dtype=dtype),
        row_lo=row_lo,
        row_hi=np.array([inf] * (4 * n), dtype=dtype),
        sense="minimize",
        name=f"dual_d{d}_k{k}",
        meta={"d": d, "k": k, "which": "dual"},
    )


def l1_objective(x, d: int, k: int):
    """``||x||_1 + ||rbar^{(x)k} - W^{(x)k} x||_1``; an upper bound on the
    PPT norm for any ``x``."""
    d = check_dim(d)
    x = np.asarray(x)
    if x.shape != (4**k,):
        raise ShapeError(f"x must have length 4**{k} = {4**k}, got {x.shape}")
    exact = x.dtype == object
    _, rbar = r_vectors(d, exact=exact)
    resid = tensor_pow(rbar, k) - kron_apply(pt_matrix(d, exact=exact), x, k)
    return np.abs(x).sum() + np.abs(resid).sum()


def ansatz_x0(d: int, exact: bool = False) -> np.ndarray:
    """Optimal k=1 point ``((3d-2)/(4d(d-1)), 0, (d-2)/(4d), 0)``."""
    d = check_dim(d)
    F = Fraction if exact else float
    return np.array(
        [F(3 * d - 2) / (4 * d * (d - 1)), F(0), F(d - 2) / (4 * d), F(0)],
        dtype=object if exact else float,
    )


def dual_certificate(primal: LpSolution, k: int | None = None, symmetric: bool = False) -> np.ndarray:
    """Feasible point of the l1 problem recovered from the primal multipliers.

    With row multipliers ``y`` of the primal, ``x = y / 2`` attains the
    primal value in the l1 objective at optimality.  For the symmetric
    primal the orbit multipliers are split evenly over the orbit members.
    """
    if primal.row_duals is None:
        raise PreconditionError("primal solution carries no row multipliers")
    y = primal.row_duals
    if symmetric:
        y = expand_symmetric(y, k, per_element=True)
    return y / 2


@dataclass
class PptResult:
    d: int
    k: int
    value: object
    primal: object
    dual: object
    duality_gap: object
    status: str
    dual_method: str
    iterations: int


def ppt_norm(
    d: int,
    k: int,
    exact: bool = False,
    dual: str = "auto",
    max_coords: int = DEFAULT_MAX_COORDS,
) -> PptResult:
    """``(1/2)||rho_1 - rho_0||_PPT`` from the primal LP, certified by a dual.

    For ``k >= 4`` the primal is solved in factor-permutation-symmetric
    coordinates (same optimum, far fewer variables).

    ``dual`` selects how the upper side is obtained: ``"lp"`` solves the l1
    LP independently, ``"certificate"`` evaluates the l1 objective at the
    primal multipliers, ``"auto"`` uses the LP when ``k <= 3``.
    """
    d = check_dim(d)
    k = check_budget(k, max_coords)
    if dual not in ("auto", "lp", "certificate"):
        raise ValueError(f"unknown dual method {dual!r}")
    method = ("lp" if k <= 3 else "certificate") if dual == "auto" else dual
    symmetric = k > 3

    builder = build_primal_symmetric if symmetric else build_primal
    primal = solve_lp(builder(d, k, exact=exact, max_coords=max_coords))
    if primal.status != "optimal":
        if primal.status in ("infeasible", "unbounded"):
            raise SolverError(f"primal LP reported {primal.status}; it is feasible and bounded")
        return PptResult(d, k, primal.value, primal.value, None, None, primal.status,
                         method, primal.iterations)
    iterations = primal.iterations
    if method == "lp":
        sol = solve_lp(build_dual_l1(d, k, exact=exact, max_coords=max_coords))
        if sol.status in ("infeasible", "unbounded"):
            raise SolverError(f"dual LP reported {sol.status}; it is feasible and bounded")
        dual_value = sol.value
        iterations += sol.iterations
        status = sol.status
    else:
        dual_value = l1_objective(dual_certificate(primal, k, symmetric), d, k)
        status = "optimal"
    value = primal.value
    if not exact:
        value, dual_value = float(value), float(dual_value)
    gap = abs(dual_value - value)
    if not exact and status == "optimal" and gap > GAP_TOL:
        status = "gap-exceeded"
    return PptResult(d, k, value, value, dual_value, gap, status, method, iterations)


# -- plain-text LP exchange format -----------------------------------------


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    v = float(v)
    if v == float("inf"):
        return "inf"
    if v == float("-inf"):
        return "-inf"
    return format(v, ".17g")


def write_lp(lp: StandardLp, out: TextIO) -> None:
    """Write ``lp`` in a line-oriented text format.

    Layout::

        name <name>
        sense <maximize|minimize>
        shape <rows> <cols>
        objective <c_0> ... <c_{n-1}>
        var <j> <lo> <hi>            (one line per variable)
        row <i> <lo> <hi> <a_i0> ... (one line per constraint row)

    Floats use 17 significant digits, so identical inputs give identical bytes.
    """
    m, n = lp.shape
    a = lp.constraint_matrix
    dense = a if isinstance(a, np.ndarray) else a.toarray()
    out.write(f"name {lp.name}\n")
    out.write(f"sense {lp.sense}\n")
    out.write(f"shape {m} {n}\n")
    out.write("objective " + " ".join(_fmt(v) for v in lp.objective) + "\n")
    for j in range(n):
        out.write(f"var {j} {_fmt(lp.var_lo[j])} {_fmt(lp.var_hi[j])}\n")
    for i in range(m):
        coeffs = " ".join(_fmt(v) for v in dense[i])
        out.write(f"row {i} {_fmt(lp.row_lo[i])} {_fmt(lp.row_hi[i])} {coeffs}\n")


def read_lp(text: str) -> StandardLp:
    """Parse the format produced by :func:`write_lp` (float mode)."""
    name, sense, m, n = "lp", "maximize", 0, 0
    objective = None
    var_lo = var_hi = row_lo = row_hi = matrix = None
    for line in text.splitlines():
        if not line.strip():
            continue
        tag, *rest = line.split()
        if tag == "name":
            name = rest[0]
        elif tag == "sense":
            sense = rest[0]
        elif tag == "shape":
            m, n = int(rest[0]), int(rest[1])
            var_lo, var_hi = np.empty(n), np.empty(n)
            row_lo, row_hi = np.empty(m), np.empty(m)
            matrix = np.empty((m, n))
        elif tag == "objective":
            objective = np.array([float(Fraction(v)) if "/" in v else float(v) for v in rest])
        elif tag == "var":
            j = int(rest[0])
            var_lo[j], var_hi[j] = _parse(rest[1]), _parse(rest[2])
        elif tag == "row":
            i = int(rest[0])
            row_lo[i], row_hi[i] = _parse(rest[1]), _parse(rest[2])
            matrix[i] = [_parse(v) for v in rest[3:]]
        else:
            raise ValueError(f"unknown record {tag!r}")
    return StandardLp(objective, matrix, var_lo, var_hi, row_lo, row_hi, sense=sense, name=name)


def _parse(tok: str) -> float:
    return float(Fraction(tok)) if "/" in tok else float(tok)
