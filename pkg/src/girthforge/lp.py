"""Exact rational LP feasibility for 0/1 column systems  A w = b, lo <= w <= hi.

A floating-point solve (HiGHS dual simplex via scipy) proposes a vertex;
the exact answer is then rebuilt over the rationals and checked without
tolerance.  Infeasibility comes with a dual vector y such that
sup over the box of y.A w is < y.b, which any caller can re-check.
A small exact simplex (Bland's rule) covers cases where rounding fails.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import flint
import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csc_matrix

from .errors import SearchFailure

TOL = 1e-7
EXACT_SIMPLEX_MAX = 400


@dataclass
class LPResult:
    feasible: bool
    x: list | None = None  # Fractions per column
    y: list | None = None  # certificate per row
    method: str = ""
    value: float | None = None  # float objective (max-min mode)


def _matrix(cols, m):
    data, rows, ptr = [], [], [0]
    for col in cols:
        rows.extend(col)
        data.extend([1.0] * len(col))
        ptr.append(len(rows))
    return csc_matrix((np.array(data), np.array(rows, dtype=np.int64), np.array(ptr, dtype=np.int64)),
                      shape=(m, len(cols)))


def _to_frac(v):
    return Fraction(int(v.p), int(v.q)) if hasattr(v, "p") else Fraction(v)


def certificate_holds(cols, m, rhs, y, lo=None, hi=None) -> bool:
    """Exact check that y certifies infeasibility of A w = rhs over the box."""
    y = [Fraction(v) for v in y]
    if len(y) != m:
        return False
    bound = Fraction(0)
    for c, col in enumerate(cols):
        a = sum((y[r] for r in col), Fraction(0))
        l = Fraction(0) if lo is None else Fraction(lo[c])
        h = None if hi is None else hi[c]
        if a > 0:
            if h is None:
                return False
            bound += a * Fraction(h)
        else:
            bound += a * l
    return bound < sum((y[r] * Fraction(rhs[r]) for r in range(m)), Fraction(0))


def solution_holds(cols, m, rhs, x, lo=None, hi=None) -> bool:
    tot = [Fraction(0)] * m
    for c, col in enumerate(cols):
        v = x[c]
        l = Fraction(0) if lo is None else lo[c]
        if v < l or (hi is not None and hi[c] is not None and v > hi[c]):
            return False
        if v:
            for r in col:
                tot[r] += v
    return all(tot[r] == rhs[r] for r in range(m))


def _exact_from_float(cols, m, rhs, xf, lo, hi):
    """Fix near-bound columns at their bound, solve the rest exactly."""
    k = len(cols)
    fixed = {}
    free = []
    for c in range(k):
        l = Fraction(0) if lo is None else lo[c]
        h = None if hi is None else hi[c]
        if abs(xf[c] - float(l)) < TOL:
            fixed[c] = l
        elif h is not None and abs(xf[c] - float(h)) < TOL:
            fixed[c] = h
        else:
            free.append(c)
    resid = [Fraction(v) for v in rhs]
    for c, v in fixed.items():
        if v:
            for r in cols[c]:
                resid[r] -= v
    x = [fixed.get(c, Fraction(0)) for c in range(k)]
    if free:
        rows_used = sorted({r for c in free for r in cols[c]})
        pos = {r: i for i, r in enumerate(rows_used)}
        nf = len(free)
        M = flint.fmpq_mat(len(rows_used), nf + 1)
        for j, c in enumerate(free):
            for r in cols[c]:
                M[pos[r], j] = 1
        for r in rows_used:
            M[pos[r], nf] = flint.fmpq(resid[r].numerator, resid[r].denominator)
        R, rank = M.rref()
        for i in range(rank):
            lead = next(j for j in range(nf + 1) if R[i, j] != 0)
            if lead == nf:
                return None
            x[free[lead]] = _to_frac(R[i, nf])
        for r in range(m):
            if r not in pos and resid[r] != 0:
                return None
    elif any(resid):
        return None
    return x if solution_holds(cols, m, rhs, x, lo, hi) else None


def _round_certificate(cols, m, rhs, yf, lo, hi):
    scale = max(1e-12, max(abs(v) for v in yf)) if len(yf) else 1.0
    for den in (1, 2, 3, 4, 6, 12, 60, 10 ** 3, 10 ** 6, 10 ** 9):
        y = [Fraction(v / scale).limit_denominator(den) for v in yf]
        if certificate_holds(cols, m, rhs, y, lo, hi):
            return y
    return None


def _float_solve(cols, m, rhs, lo, hi, cost=None):
    k = len(cols)
    A = _matrix(cols, m)
    b = np.array([float(v) for v in rhs])
    bounds = [(0.0 if lo is None else float(lo[c]), None if hi is None or hi[c] is None else float(hi[c]))
              for c in range(k)]
    c = np.zeros(k) if cost is None else np.asarray(cost, float)
    return linprog(c, A_eq=A, b_eq=b, bounds=bounds, method="highs-ds")


def _phase_one_dual(cols, m, rhs, lo, hi):
    k = len(cols)
    ext = list(cols) + [[r] for r in range(m)] + [[r] for r in range(m)]
    A = _matrix(ext, m)
    A = A.tolil()
    for r in range(m):
        A[r, k + m + r] = -1.0
    A = A.tocsc()
    bounds = [(0.0 if lo is None else float(lo[c]), None if hi is None or hi[c] is None else float(hi[c]))
              for c in range(k)] + [(0.0, None)] * (2 * m)
    cost = np.concatenate([np.zeros(k), np.ones(2 * m)])
    res = linprog(cost, A_eq=A, b_eq=np.array([float(v) for v in rhs]), bounds=bounds, method="highs-ds")
    if res.status != 0:
        return None, None
    return res.fun, list(res.eqlin.marginals)


def feasible_point(cols, m, rhs, lo=None, hi=None, cost=None) -> LPResult:
    """Exact feasibility of A w = rhs inside the box (lo default 0, hi default none)."""
    rhs = [Fraction(v) for v in rhs]
    if lo is not None:
        lo = [Fraction(v) for v in lo]
    if hi is not None:
        hi = [None if v is None else Fraction(v) for v in hi]
    if m == 0:
        return LPResult(True, [Fraction(0) if lo is None else lo[c] for c in range(len(cols))], method="trivial")
    if not cols:
        y = [Fraction(1) if v > 0 else Fraction(-1) if v < 0 else Fraction(0) for v in rhs]
        if certificate_holds(cols, m, rhs, y, lo, hi):
            return LPResult(False, y=y, method="no-columns")
    res = _float_solve(cols, m, rhs, lo, hi, cost)
    if res.status == 0:
        x = _exact_from_float(cols, m, rhs, list(res.x), lo, hi)
        if x is not None:
            return LPResult(True, x, method="highs+exact")
    elif res.status == 2:
        val, yf = _phase_one_dual(cols, m, rhs, lo, hi)
        if yf is not None:
            # phase-one duals have the opposite sign to our certificate
            for cand in (yf, [-v for v in yf]):
                y = _round_certificate(cols, m, rhs, cand, lo, hi)
                if y is not None:
                    return LPResult(False, y=y, method="highs+rounded-dual")
    if len(cols) <= EXACT_SIMPLEX_MAX:
        return exact_simplex(cols, m, rhs, lo, hi)
    raise SearchFailure("floating-point LP result could not be made exact", {"status": int(res.status)})


def max_min_point(cols, m, rhs) -> LPResult:
    """Maximize the smallest weight, then return an exact point whose
    smallest weight is within rounding of the float optimum."""
    k = len(cols)
    if k == 0:
        return feasible_point(cols, m, rhs)
    A = _matrix(cols, m)
    # variables w (k) and t; w_c - t >= 0
    from scipy.sparse import hstack, identity, csc_matrix as _csc

    A_eq = hstack([A, _csc((m, 1))]).tocsc()
    A_ub = hstack([-identity(k, format="csc"), _csc(np.ones((k, 1)))]).tocsc()
    cost = np.zeros(k + 1)
    cost[-1] = -1.0
    res = linprog(cost, A_ub=A_ub, b_ub=np.zeros(k), A_eq=A_eq, b_eq=np.array([float(v) for v in rhs]),
                  bounds=[(0, None)] * (k + 1), method="highs-ds")
    if res.status != 0:
        return feasible_point(cols, m, rhs)
    t = float(res.x[-1])
    tries = [Fraction(t).limit_denominator(d) for d in (100, 10 ** 4, 10 ** 6)]
    tries += [Fraction(t * (1 - s)).limit_denominator(10 ** 9) for s in (1e-9, 1e-6, 1e-3)]
    seen = set()
    for t0 in tries:
        t0 = max(t0, Fraction(0))
        if t0 in seen or float(t0) > t + 1e-9:
            continue
        seen.add(t0)
        try:
            out = feasible_point(cols, m, rhs, lo=[t0] * k)
        except SearchFailure:
            continue
        if out.feasible:
            out.value = t
            out.method += "+max-min"
            return out
    out = feasible_point(cols, m, rhs)
    out.value = t
    return out


def exact_simplex(cols, m, rhs, lo=None, hi=None) -> LPResult:
    """Dense two-phase-free phase-one simplex over Fractions with Bland's rule.

    Boxes are handled by shifting lower bounds and adding upper-bound rows."""
    k = len(cols)
    lo_v = [Fraction(0)] * k if lo is None else [Fraction(v) for v in lo]
    rows = []
    b = []
    for r in range(m):
        row = [Fraction(0)] * k
        rows.append(row)
        b.append(Fraction(rhs[r]))
    for c, col in enumerate(cols):
        for r in col:
            rows[r][c] += 1
    for r in range(m):
        b[r] -= sum((rows[r][c] * lo_v[c] for c in range(k)), Fraction(0))
    n_orig = k
    ub_rows = []
    if hi is not None:
        for c in range(k):
            if hi[c] is not None:
                ub_rows.append((c, Fraction(hi[c]) - lo_v[c]))
    n_slack = len(ub_rows)
    total_rows = m + n_slack
    width = n_orig + n_slack
    T = []
    for r in range(m):
        T.append(rows[r] + [Fraction(0)] * n_slack)
    for i, (c, u) in enumerate(ub_rows):
        row = [Fraction(0)] * width
        row[c] = Fraction(1)
        row[n_orig + i] = Fraction(1)
        T.append(row)
        b.append(u)
    for r in range(total_rows):
        if b[r] < 0:
            T[r] = [-v for v in T[r]]
            b[r] = -b[r]
    # artificials
    nv = width + total_rows
    tab = []
    for r in range(total_rows):
        art = [Fraction(0)] * total_rows
        art[r] = Fraction(1)
        tab.append(T[r] + art + [b[r]])
    basis = list(range(width, nv))
    obj = [Fraction(0)] * (nv + 1)
    for r in range(total_rows):
        for j in range(nv + 1):
            obj[j] -= tab[r][j]
    for j in range(width, nv):
        obj[j] += 1
    # minimize sum of artificials: reduced costs in obj
    while True:
        enter = next((j for j in range(nv) if obj[j] < 0), None)
        if enter is None:
            break
        best = None
        for r in range(total_rows):
            a = tab[r][enter]
            if a > 0:
                ratio = tab[r][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[r] < basis[best[1]]):
                    best = (ratio, r)
        if best is None:
            break
        r = best[1]
        piv = tab[r][enter]
        tab[r] = [v / piv for v in tab[r]]
        for i in range(total_rows):
            if i != r and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [a - f * bb for a, bb in zip(tab[i], tab[r])]
        f = obj[enter]
        obj = [a - f * bb for a, bb in zip(obj, tab[r])]
        basis[r] = enter
    if -obj[-1] == 0:
        x = [Fraction(0)] * nv
        for r, j in enumerate(basis):
            x[j] = tab[r][-1]
        w = [x[c] + lo_v[c] for c in range(k)]
        if not solution_holds(cols, m, rhs, w, lo, hi):
            raise SearchFailure("exact simplex produced an invalid point")
        return LPResult(True, w, method="exact-simplex")
    # duals of the phase-one problem: y_r = -(reduced cost of artificial r) + 1
    ysys = [obj[width + r] - 1 for r in range(total_rows)]
    y_full = [-v for v in ysys]
    # fold back row negations and bound rows into a box certificate on the original rows
    y = []
    for r in range(m):
        sign = 1 if Fraction(rhs[r]) - sum((rows[r][c] * lo_v[c] for c in range(k)), Fraction(0)) >= 0 else -1
        y.append(sign * y_full[r])
    for cand in (y, [-v for v in y]):
        if certificate_holds(cols, m, rhs, cand, lo, hi):
            return LPResult(False, y=cand, method="exact-simplex")
    raise SearchFailure("exact simplex could not certify infeasibility")
