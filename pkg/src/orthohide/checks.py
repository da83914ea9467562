"""Invariant suites behind ``orthohide verify``.

Each suite is a list of named checks; a check records whether it passed and
the worst observed deviation.  Random inputs come from fixed seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import bounds, commutant, dense, ppt_lp

SEED = 20240611


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    worst: float | None = None
    detail: str = ""


def _within(name: str, errors, tol: float, detail: str = "") -> Check:
    # np.max propagates NaN, which then fails the comparison
    worst = float(np.max(errors)) if len(errors) else 0.0
    return Check(name, bool(worst <= tol), worst, detail or f"tol {tol:g}")


def _dims(d: int | None, default: range) -> list[int]:
    return [d] if d is not None else list(default)


# -- commutant algebra ---------------------------------------------------------


def pt_roundtrip_excess(x: commutant.CommutantOp) -> float:
    """How far ``PT(PT(x)) - x`` exceeds what float64 storage allows.

    ``PT(x)`` is stored rounded, so each entry carries up to ``eps |y_i|``
    error, which the second transpose maps through ``|W^T|^{(x)k}``.
    Returns ``max(err - allowance)`` with allowance ``max(1e-10, that bound)``;
    a nonpositive value passes.
    """
    y = commutant.apply_pt(x)
    err = np.abs(commutant.apply_pt(y).coeffs - x.coeffs)
    wt = np.abs(commutant.pt_matrix(x.d).T)
    bound = np.finfo(float).eps * commutant.kron_apply(wt, np.abs(y.coeffs), x.k)
    return float(np.max(err - np.maximum(1e-10, bound)))


def algebra_suite(d: int | None = None) -> list[Check]:
    rng = np.random.default_rng(SEED)
    out = []
    errs = []
    for dd in _dims(d, range(2, 201)):
        w = commutant.pt_matrix(dd)
        errs.append(np.max(np.abs(w @ w - np.eye(4))))
        errs.append(np.max(np.abs(w.sum(axis=0) - 1)))
    out.append(_within("pt_matrix involution and column sums", errs, 1e-12))

    errs = []
    for dd in _dims(d, (2, 3, 7, 20, 50)):
        for k in range(1, 6):
            x = commutant.CommutantOp(dd, k, rng.normal(size=4**k))
            errs.append(pt_roundtrip_excess(x))
    out.append(_within("apply_pt is an involution (float, within rounding bound)", errs, 0.0,
                       "error <= max(1e-10, eps |W^T|^k |PT(x)|)"))
    exact_ok = True
    for dd in _dims(d, (2, 3, 7, 20, 50)):
        for k in (1, 2, 3):
            c = np.array([Fraction(int(v), 7) for v in rng.integers(-20, 20, size=4**k)], dtype=object)
            x = commutant.CommutantOp(dd, k, c)
            exact_ok &= list(commutant.apply_pt(commutant.apply_pt(x)).coeffs) == list(c)
    out.append(Check("apply_pt is an involution (rational, exact)", bool(exact_ok)))

    errs = []
    for dd in _dims(d, (2, 3, 5, 10)):
        s0, s1 = commutant.sigma_pair(dd)
        for k in range(1, 5):
            r0, r1 = commutant.even_odd(dd, k)
            half = commutant.tensor_pow((s0.coeffs - s1.coeffs) / 2, k)
            errs.append(np.max(np.abs((r0.coeffs - r1.coeffs) / 2 - half)))
            errs.append(abs(r0.trace() - 1))
            errs.append(abs(r1.trace() - 1))
            errs.append(max(0.0, -min(r0.coeffs.min(), r1.coeffs.min())))
    out.append(_within("even/odd states: trace, positivity, difference identity", errs, 1e-12))

    errs = []
    for dd in _dims(d, range(2, 6)):
        if dd > 5:
            continue
        for k in (1, 2):
            x = commutant.CommutantOp(dd, k, rng.normal(size=4**k))
            y = commutant.CommutantOp(dd, k, rng.normal(size=4**k))
            ref = np.trace(dense.from_commutant(x) @ dense.from_commutant(y))
            errs.append(abs(commutant.trace_pair(x, y) - ref))
    out.append(_within("trace_pair matches dense trace", errs, 1e-9))

    exact_ok = True
    errs = []
    for dd in _dims(d, range(2, 11)):
        s0, s1 = commutant.sigma_pair(dd, exact=True)
        exact_ok &= commutant.trace_pair(s0, s1) == 0
        f0, f1 = commutant.sigma_pair(dd)
        errs.append(abs(commutant.trace_pair(f0, f1)))
    out.append(Check("sigma_0, sigma_1 orthogonal", bool(exact_ok and max(errs) <= 1e-14),
                     float(max(errs)), "exact in rational mode"))
    return out


# -- dense operators -----------------------------------------------------------


def dense_suite(d: int | None = None) -> list[Check]:
    rng = np.random.default_rng(SEED + 1)
    out = []
    errs = []
    for dd in _dims(d, range(2, 9)):
        thetas = dense.build_projectors(dd)
        ranks = commutant.theta_ranks(dd)
        for i, t in enumerate(thetas):
            errs.append(np.max(np.abs(t @ t - t)))
            errs.append(abs(np.trace(t) - ranks[i]))
            for j in range(i + 1, 4):
                errs.append(np.max(np.abs(t @ thetas[j])))
        errs.append(np.max(np.abs(sum(thetas) - np.eye(dd * dd))))
    out.append(_within("projector algebra", errs, 1e-12))

    errs = []
    for dd in _dims(d, range(2, 9)):
        for _ in range(5):
            x = commutant.CommutantOp(dd, 1, rng.normal(size=4))
            lhs = dense.from_commutant(commutant.apply_pt(x))
            errs.append(np.max(np.abs(lhs - dense.partial_transpose(dense.from_commutant(x)))))
        for s in commutant.sigma_pair(dd):
            m = dense.from_commutant(s)
            errs.append(np.max(np.abs(dense.partial_transpose(m) - m)))
    out.append(_within("partial transpose matches W_d action; sigmas PT-fixed", errs, 1e-10))

    dims = [dd for dd in _dims(d, range(2, 5)) if dd <= 4]
    if dims:
        sums = {dd: dense.character_sum(dd) for dd in dims}
        out.append(Check("character sum equals 4", all(v == 4 for v in sums.values()), None,
                         ", ".join(f"d={k}: {v}" for k, v in sums.items())))

    errs = []
    psd = True
    for dd in _dims(d, range(2, 9)):
        value, ok = dense.witness_value(dd)
        psd &= ok
        errs.append(abs(value - (0.5 + 1 / dd)))
        errs.append(abs(dense.basis_measurement_bias(dd) - (0.5 - 1 / dd)))
    w = _within("witness value, PSD certificates, basis bias", errs, 1e-10)
    out.append(Check(w.name, bool(w.passed and psd), w.worst, f"psd certificates {'ok' if psd else 'FAILED'}"))

    errs = []
    for dd in _dims(d, range(2, 6)):
        if dd > dense.GROUP_CUTOFF:
            continue
        e_in, pm_in = dense.product_state_inputs(dd)
        s0, s1 = dense.build_states(dd)
        errs.append(np.max(np.abs(dense.twirl_exact(e_in) - s0)))
        errs.append(np.max(np.abs(dense.twirl_exact(pm_in) - s1)))
        for _ in range(3 if d is None else 20):
            a = rng.normal(size=(dd * dd, dd * dd))
            a = (a + a.T) / 2
            errs.append(np.max(np.abs(dense.twirl_exact(a) - dense.twirl_closed_form(a))))
    if errs:
        out.append(_within("group twirl: sigma_0/sigma_1 and closed form", errs, 1e-10))
    return out


# -- analytic bounds -----------------------------------------------------------


def tikhonov_oracle(a: np.ndarray, b: np.ndarray) -> float:
    x = np.linalg.solve(a.T @ a + np.eye(a.shape[0]), a.T @ b)
    return float(x @ x + np.sum((b - a @ x) ** 2))


def random_tikhonov_errors(n_cases: int = 100, seed: int = SEED + 2) -> list[float]:
    rng = np.random.default_rng(seed)
    errs = []
    for _ in range(n_cases):
        n = int(rng.integers(2, 7))
        a, b = rng.normal(size=(n, n)), rng.normal(size=n)
        ref = tikhonov_oracle(a, b)
        errs.append(abs(bounds.tikhonov_value(a, b) - ref) / max(abs(ref), 1e-300))
    return errs


def random_sanov_margins(n_cases: int = 50, seed: int = SEED + 3, k_max: int = 10) -> list[float]:
    """``oracle - bound`` for random admissible ``q``, every ``k`` in 1..k_max."""
    rng = np.random.default_rng(seed)
    out = []
    cases = 0
    while cases < n_cases:
        q = rng.dirichlet(np.ones(3))
        if q[1] > q[2]:
            q[1], q[2] = q[2], q[1]
        if not q[1] < q[2]:
            continue
        cases += 1
        for k in range(1, k_max + 1):
            out.append(bounds.empirical_tail_oracle(q, k) - bounds.sanov_bound(q, k))
    return out


def bounds_suite(d: int | None = None) -> list[Check]:
    out = []
    dims = _dims(d, range(2, 101))
    svd, wwt, chain, fixed = [], [], [], []
    for dd in dims:
        sp = bounds.spectral(dd)
        w = commutant.pt_matrix(dd)
        svd.append(np.max(np.abs(sp.reconstruct() - w)))
        svd.append(np.max(np.abs(sp.u @ sp.u.T - np.eye(4))))
        ref = sum(x * np.outer(u, u) for x, u in zip((1, 1, sp.s, 1 / sp.s), sp.u))
        wwt.append(np.max(np.abs(w @ w.T - ref)))
        c = bounds.c_coeffs(dd)
        chain.append(abs(sp.s - c.c3 / c.c4) / sp.s)
        chain.append(abs(bounds.mu(dd) ** 2 - 4 * (c.c2 + 2 * math.sqrt(c.c3 * c.c4))))
        _, rbar = commutant.r_vectors(dd)
        chain.append(abs(c.c2 + c.c3 + c.c4 - rbar @ rbar))
        fixed.append(np.max(np.abs(w @ rbar - rbar)))
    out.append(_within("SVD of W_d reconstructs, u orthonormal", svd, 1e-10))
    out.append(_within("W W^T spectral form", wwt, 1e-10))
    out.append(_within("identity chain s = c3/c4, mu^2 = 4(c2 + 2 sqrt(c3 c4))", chain, 1e-10))
    out.append(_within("W_d rbar = rbar", fixed, 1e-12))
    out.append(_within("Tikhonov closed form vs normal equations", random_tikhonov_errors(), 1e-9))
    margins = random_sanov_margins()
    out.append(Check("Sanov bound dominates exact tail", bool(max(margins) <= 0), float(max(margins))))
    table = bounds.fig1_data(2, 1000)
    out.append(Check("mu_d strictly decreasing on [2, 1000]", not table.violations, None,
                     f"violations at {table.violations}" if table.violations else ""))
    return out


# -- PPT linear programs ---------------------------------------------------------


def lp_suite(d: int | None = None) -> list[Check]:
    out = []
    errs = []
    exact_ok = True
    for dd in _dims(d, range(2, 31)):
        errs.append(abs(ppt_lp.ppt_norm(dd, 1).value - (0.5 + 1 / dd)))
        if dd <= ppt_lp.EXACT_MAX_D:
            exact_ok &= ppt_lp.ppt_norm(dd, 1, exact=True).value == Fraction(1, 2) + Fraction(1, dd)
    c = _within("k=1 value is 1/2 + 1/d", errs, 1e-9)
    out.append(Check(c.name, bool(c.passed and exact_ok), c.worst, "exact in rational mode for d <= 10"))

    gaps = []
    for dd in _dims(d, (2, 3, 5, 10)):
        for k in (1, 2, 3):
            gaps.append(ppt_lp.ppt_norm(dd, k, dual="lp").duality_gap)
    out.append(_within("primal and dual LP values agree", gaps, 1e-7))

    excess = []
    for dd in _dims(d, range(3, 13)):
        for k in range(1, 5):
            excess.append(ppt_lp.ppt_norm(dd, k).value - bounds.parity_upper_bound(dd, k))
    out.append(_within("PPT norm <= 2 mu_d^k", excess, 1e-9))

    decay = []
    for dd in _dims(d, (3, 5, 10)):
        if dd >= 3:
            decay.append(ppt_lp.ppt_norm(dd, 3).value < ppt_lp.ppt_norm(dd, 1).value)
    out.append(Check("k=3 value below k=1 value", all(decay), None, "regression property"))

    errs = []
    for dd in _dims(d, range(2, 31)):
        errs.append(abs(ppt_lp.l1_objective(ppt_lp.ansatz_x0(dd), dd, 1) - ppt_lp.ppt_norm(dd, 1).value))
    out.append(_within("ansatz x0 attains the k=1 optimum", errs, 1e-9))
    return out


SUITES: dict[str, Callable[[int | None], list[Check]]] = {
    "algebra": algebra_suite,
    "dense": dense_suite,
    "bounds": bounds_suite,
    "lp": lp_suite,
}


def run_suites(names: list[str], d: int | None = None) -> dict[str, list[Check]]:
    return {name: SUITES[name](d) for name in names}
