"""Compiled inner loops for the k-support prox and norm.

Everything here works in the sorted frame or on row batches and does no
validation; callers in :mod:`ksupport.prox` and :mod:`ksupport.solver` own
the checks.  Indices in comments follow the 1-based convention of the
formulas (``z_1 >= ... >= z_d``); arrays are 0-based.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _search(z, k, L, eps):
    # eps == 0: conditions verbatim; eps > 0: every comparison loosened by eps
    # (in units of z) and the strict ones made weak
    d = z.shape[0]
    Lp1 = L + 1.0
    strict = eps == 0.0
    # block sums are accumulated directly (not as prefix-sum differences) so
    # that T keeps full relative accuracy when the block holds small entries
    Tk = 0.0
    for r in range(k):
        head = k - r - 1
        if r == 0:
            Tk = z[k - 1]
        else:
            Tk += z[head]
        T = Tk
        for ell in range(k, d + 1):
            if ell > k:
                T += z[ell - 1]
            den = ell - k + Lp1 * r + Lp1
            tol = eps * den
            # right half of the tail condition: T / den >= z_{ell+1}
            if ell < d and T < z[ell] * den - tol:
                continue
            # the first ell passing the right half is the only candidate
            if strict:
                ok = z[ell - 1] * den > T
            else:
                ok = z[ell - 1] * den >= T - tol
            if ok:
                if head == 0:
                    left = True
                elif strict:
                    left = z[head - 1] * den > Lp1 * T
                else:
                    left = z[head - 1] * den >= Lp1 * (T - tol)
                if left and Lp1 * (T + tol) >= z[head] * den:
                    return r, ell, T
            break
    return -1, -1, 0.0


@njit(cache=True)
def prox_sorted(z, k, L, out):
    """Prox of ``(1/2L) ||.||_k^2`` at a nonincreasing nonnegative `z`.

    Writes the sorted-frame result into `out` and returns ``(r, ell, T)``;
    ``r == -1`` signals that no split pair exists.
    """
    d = z.shape[0]
    r, ell, T = _search(z, k, L, 0.0)
    if r < 0:
        # ties, exact zeros and rounding can defeat the strict inequalities
        r, ell, T = _search(z, k, L, 1e-12 * z[0])
    if r < 0:
        return r, ell, T
    Lp1 = L + 1.0
    shift = T / (ell - k + Lp1 * r + Lp1)
    scale = L / Lp1
    for i in range(d):
        if i < k - r - 1:
            out[i] = scale * z[i]
        elif i < ell:
            q = z[i] - shift
            out[i] = q if q > 0.0 else 0.0
        else:
            out[i] = 0.0
    return r, ell, T


@njit(cache=True)
def prox_rows(V, ks, Ls, out):
    """Row-wise prox for a batch; returns the index of a failing row or -1."""
    n, d = V.shape
    z = np.empty(d)
    q = np.empty(d)
    for b in range(n):
        v = V[b]
        a = np.abs(v)
        order = np.argsort(-a, kind="mergesort")
        for j in range(d):
            z[j] = a[order[j]]
        if z[0] == 0.0:
            for j in range(d):
                out[b, j] = 0.0
            continue
        r, ell, T = prox_sorted(z, ks[b], Ls[b], q)
        if r < 0:
            return b
        for j in range(d):
            i = order[j]
            out[b, i] = -q[j] if v[i] < 0.0 else q[j]
    return -1


@njit(cache=True)
def norm_sq_rows(W, ks):
    """Squared k-support norm of every row; NaN marks a failed split search."""
    n, d = W.shape
    res = np.empty(n)
    z = np.empty(d)
    for b in range(n):
        a = np.abs(W[b])
        order = np.argsort(-a)
        for j in range(d):
            z[j] = a[order[j]]
        k = ks[b]
        # tail sum A_r built up from the smallest entries
        A = 0.0
        for j in range(k - 1, d):
            A += z[j]
        res[b] = np.nan
        eps = 0.0
        for attempt in range(2):
            Ar = A
            for r in range(k):
                head = k - r - 1
                if r > 0:
                    Ar += z[head]
                avg = Ar / (r + 1)
                if (head == 0 or z[head - 1] > avg - eps) and avg >= z[head] - eps:
                    e = 0.0
                    for j in range(head):
                        e += z[j] * z[j]
                    res[b] = e + Ar * Ar / (r + 1)
                    break
            if not np.isnan(res[b]):
                break
            # entries tied up to rounding: loosen both comparisons slightly
            eps = 1e-12 * z[0]
    return res
