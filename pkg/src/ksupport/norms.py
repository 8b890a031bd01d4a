"""Exact evaluation of the k-support norm, its dual and the elastic-net norm.

All functions are pure and accept anything convertible to a finite 1-D
float array.  Integer ``k`` is required by the k-support functions; the
elastic-net functions also accept real ``k`` in ``[1, d]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._common import InconsistencyError, as_vector, check_k, check_real_k

__all__ = [
    "SortedAbsView",
    "NormBreakdown",
    "sort_abs_desc",
    "ksup_norm",
    "ksup_dual_norm",
    "elastic_norm",
    "elastic_dual_norm",
    "ksup_norm_oracle",
]


@dataclass(frozen=True)
class SortedAbsView:
    """Magnitudes of a vector in nonincreasing order plus the map back.

    ``magnitudes[j] == abs(w[permutation[j]])`` and
    ``signs[j] == sign(w[permutation[j]])`` (zeros get sign +1).
    """

    magnitudes: np.ndarray
    permutation: np.ndarray
    signs: np.ndarray

    def restore(self, sorted_values):
        """Undo the sort: place ``signs * sorted_values`` at the original positions."""
        out = np.empty_like(self.magnitudes)
        out[self.permutation] = self.signs * np.asarray(sorted_values, dtype=np.float64)
        return out


@dataclass(frozen=True)
class NormBreakdown:
    value: float
    r: int
    head_energy: float
    tail_sum: float

    def __float__(self):
        return self.value


def sort_abs_desc(w):
    """Sort ``|w|`` in nonincreasing order, ties broken by ascending index.

    >>> v = sort_abs_desc([-3.0, 1.0, 2.0])
    >>> v.magnitudes.tolist(), v.signs.tolist()
    ([3.0, 2.0, 1.0], [-1.0, 1.0, 1.0])
    """
    w = as_vector(w)
    mags = np.abs(w)
    # stable sort of the negated magnitudes keeps tied entries in index order
    perm = np.argsort(-mags, kind="stable")
    signs = np.where(w[perm] < 0, -1.0, 1.0)
    return SortedAbsView(magnitudes=mags[perm], permutation=perm, signs=signs)


def _split_candidates(z, k, slack=0.0):
    """Tail sums A_r and the mask of r values meeting both split conditions.

    With ``slack > 0`` both comparisons are loosened by ``slack * z[0]``; this
    only matters for entries tied to within rounding, where the exact test
    can miss the boundary on both sides.
    """
    tail = np.cumsum(z[::-1])[::-1]
    r = np.arange(k)
    first_tail = k - r - 1  # 0-based position of |w|_{k-r}
    A = tail[first_tail]
    avg = A / (r + 1)
    eps = slack * z[0]
    # |w|_0 = +inf: the r = k-1 case has no left neighbour to compare against
    left = np.ones(k, dtype=bool)
    has_left = first_tail > 0
    left[has_left] = z[first_tail[has_left] - 1] > avg[has_left] - eps
    right = avg >= z[first_tail] - eps
    return A, left & right


def ksup_norm(w, k):
    """k-support norm of `w` with the split index that realises it.

    The magnitudes are sorted once; ``r`` is the unique integer in
    ``{0, ..., k-1}`` for which the (k-r-1)-th largest magnitude strictly
    exceeds the average of the remaining tail, which in turn is at least the
    (k-r)-th largest magnitude.  The norm squared is then the energy of the
    head plus the squared tail sum divided by ``r + 1``.

    Parameters
    ----------
    w : array_like, shape (d,)
    k : int
        Sparsity level, ``1 <= k <= d``.

    Returns
    -------
    NormBreakdown

    Raises
    ------
    InconsistencyError
        If no split index satisfies the conditions, even after allowing a
        relative slack of 1e-12 for ties broken by rounding.
    """
    w = as_vector(w)
    k = check_k(k, w.size)
    z = sort_abs_desc(w).magnitudes
    A, ok = _split_candidates(z, k)
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        A, ok = _split_candidates(z, k, slack=1e-12)
        hits = np.flatnonzero(ok)
    if hits.size == 0:
        raise InconsistencyError(f"no valid split index for k={k}")
    r = int(hits[0])
    head = z[: k - r - 1]
    head_energy = float(head @ head)
    tail_sum = float(A[r])
    # scale by the largest magnitude so tiny or huge inputs neither under- nor overflow
    s = z[0] if z[0] > 0 else 1.0
    hs = head / s
    value = s * math.sqrt(float(hs @ hs) + (tail_sum / s) ** 2 / (r + 1))
    return NormBreakdown(value=value, r=r, head_energy=head_energy, tail_sum=tail_sum)


def ksup_dual_norm(u, k):
    """Euclidean norm of the `k` largest-magnitude entries of `u`.

    The squares are accumulated with :func:`math.fsum`, so the result does not
    depend on the order in which the top entries are selected.
    """
    u = as_vector(u, "u")
    k = check_k(k, u.size)
    sq = u * u
    if k < u.size:
        sq = np.partition(sq, u.size - k)[u.size - k :]
    return math.sqrt(math.fsum(sq.tolist()))


def elastic_norm(w, k):
    """``max(||w||_2, ||w||_1 / sqrt(k))`` for real ``k`` in ``[1, d]``."""
    w = as_vector(w)
    k = check_real_k(k, w.size)
    l1 = math.fsum(np.abs(w).tolist())
    return max(float(np.linalg.norm(w)), l1 / math.sqrt(k))


def elastic_dual_norm(u, k, tol=1e-10):
    """Dual of :func:`elastic_norm`: ``inf_a ||a||_2 + sqrt(k) ||u - a||_inf``.

    For a fixed threshold ``t = ||u - a||_inf`` the best ``a`` soft-thresholds
    ``|u|`` at ``t``, which leaves the convex scalar problem

        phi(t) = ||soft(|u|, t)||_2 + sqrt(k) * t,   t in [0, max |u|].

    The minimiser is bracketed between consecutive sorted magnitudes by the
    sign of the right derivative of ``phi`` at each breakpoint, then located
    to absolute accuracy `tol` by bisection on the derivative inside that
    bracket (where the active set is fixed and phi is smooth).
    """
    u = as_vector(u, "u")
    k = check_real_k(k, u.size)
    if not tol > 0:
        raise ValueError("tol must be positive")
    z = sort_abs_desc(u).magnitudes
    if z[0] == 0.0:
        return 0.0
    sk = math.sqrt(k)

    def slope(t):
        # right derivative of phi at t
        s = z[z > t] - t
        if s.size == 0:
            return sk
        return sk - float(np.sum(s)) / math.sqrt(float(s @ s))

    def phi(t):
        s = np.maximum(z - t, 0.0)
        return math.sqrt(float(s @ s)) + sk * t

    breaks = np.unique(np.concatenate(([0.0], z)))
    if slope(0.0) >= 0.0:
        return phi(0.0)
    # slope is nondecreasing and positive at the last breakpoint (max |u|);
    # find the last breakpoint where it is still negative
    lo_i, hi_i = 0, breaks.size - 1
    while hi_i - lo_i > 1:
        mid = (lo_i + hi_i) // 2
        if slope(breaks[mid]) < 0.0:
            lo_i = mid
        else:
            hi_i = mid
    lo, hi = float(breaks[lo_i]), float(breaks[hi_i])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if slope(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return min(phi(lo), phi(hi))


def ksup_norm_oracle(w, k, points=21, passes=6):
    """Brute-force k-support norm for tiny `d` (testing aid only).

    Maximises ``sum_i a_i |w|_(i) - 0.5 * sum_{i<=k} a_i**2`` over the cone
    ``a_1 >= ... >= a_d >= 0`` by grid search on a box of side ``||w||_1``,
    then repeatedly re-grids a window of +-2 cells around the incumbent.  With
    the defaults the final cell size is below ``1e-3`` of the initial box.
    The norm is ``sqrt(2 * max)``.
    """
    w = as_vector(w)
    d = w.size
    if d > 4:
        raise ValueError("oracle is exponential in d; use d <= 4")
    k = check_k(k, d)
    z = np.sort(np.abs(w))[::-1]
    box = float(np.sum(z))
    if box == 0.0:
        return 0.0
    quad = np.zeros(d)
    quad[:k] = 0.5

    lo = np.zeros(d)
    hi = np.full(d, box)
    best_val, best = -np.inf, None
    for _ in range(passes):
        axes = [np.linspace(lo[i], hi[i], points) for i in range(d)]
        grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        cone = np.all(np.diff(grid, axis=1) <= 0.0, axis=1)
        grid = grid[cone]
        vals = grid @ z - (grid * grid) @ quad
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val, best = float(vals[j]), grid[j]
        step = (hi - lo) / (points - 1)
        lo = np.clip(best - 2 * step, 0.0, box)
        hi = np.clip(best + 2 * step, 0.0, box)
    return math.sqrt(2.0 * max(best_val, 0.0))

