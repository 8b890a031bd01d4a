"""Proximity operators used by the solver.

``prox_ksup_sq`` is the exact prox of the squared k-support norm; the other
two are the textbook soft-thresholding maps for the Lasso and elastic-net
baselines.  The ``*_rows`` variants apply the same maps to each row of a 2-D
batch with per-row parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._common import InconsistencyError, as_vector, check_k
from .norms import sort_abs_desc

__all__ = [
    "ProxSearchResult",
    "prox_ksup_sq",
    "prox_ksup_search",
    "prox_l1",
    "prox_elastic",
    "prox_ksup_sq_rows",
    "prox_l1_rows",
    "prox_elastic_rows",
]


@dataclass(frozen=True)
class ProxSearchResult:
    """Split pair found by the prox search.

    ``ell`` uses the 1-based convention: entries ``k-r .. ell`` of the sorted
    magnitudes are soft-thresholded and those after ``ell`` are zeroed.
    """

    r: int
    ell: int
    T_rl: float


def _check_beta(beta):
    beta = float(beta)
    if not (beta > 0 and np.isfinite(beta)):
        raise ValueError(f"beta must be positive and finite, got {beta}")
    return beta


def prox_ksup_search(v, k, beta):
    """Return the sorted-frame prox and the split pair for ``prox_ksup_sq``."""
    v = as_vector(v, "v")
    k = check_k(k, v.size)
    beta = _check_beta(beta)
    view = sort_abs_desc(v)
    q = np.zeros(v.size)
    if view.magnitudes[0] == 0.0:
        return q, ProxSearchResult(k - 1, v.size, 0.0)
    r, ell, T = _kernels.prox_sorted(view.magnitudes, k, 1.0 / beta, q)
    if r < 0:
        raise InconsistencyError(f"no valid (r, ell) pair for k={k}, beta={beta}")
    return q, ProxSearchResult(int(r), int(ell), float(T))


def prox_ksup_sq(v, k, beta):
    """``argmin_q 0.5 ||q - v||^2 + (beta / 2) ||q||_k^2``.

    Parameters
    ----------
    v : array_like, shape (d,)
    k : int
        Sparsity level, ``1 <= k <= d``.
    beta : float
        Positive weight on half the squared norm.  The search itself is
        phrased in terms of ``L = 1 / beta``: the largest ``k - r - 1``
        magnitudes shrink by ``L / (L + 1)``, the next block down to position
        ``ell`` is shifted down by a common amount, and the rest become zero.

    Returns
    -------
    numpy.ndarray
        Same signs and ordering as `v`.
    """
    v = as_vector(v, "v")
    view = sort_abs_desc(v)
    if view.magnitudes[0] == 0.0:
        check_k(k, v.size)
        _check_beta(beta)
        return np.zeros(v.size)
    q, _ = prox_ksup_search(v, k, beta)
    return view.restore(q)


def prox_l1(v, tau):
    """Soft-thresholding ``sign(v) * max(|v| - tau, 0)``."""
    v = as_vector(v, "v")
    if not tau > 0:
        raise ValueError("tau must be positive")
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def prox_elastic(v, tau1, tau2):
    """Prox of ``tau1 ||.||_1 + tau2 ||.||_2^2``: soft-threshold, then scale."""
    v = as_vector(v, "v")
    if tau1 < 0 or tau2 < 0 or (tau1 == 0 and tau2 == 0):
        raise ValueError("need tau1, tau2 >= 0, not both zero")
    return np.sign(v) * np.maximum(np.abs(v) - tau1, 0.0) / (1.0 + 2.0 * tau2)


def prox_ksup_sq_rows(V, ks, betas):
    """Apply ``prox_ksup_sq`` to each row of `V` with its own ``k`` and ``beta``."""
    V = np.ascontiguousarray(V, dtype=np.float64)
    n = V.shape[0]
    ks = np.broadcast_to(np.asarray(ks, dtype=np.int64), (n,)).copy()
    Ls = 1.0 / np.broadcast_to(np.asarray(betas, dtype=np.float64), (n,))
    out = np.empty_like(V)
    bad = _kernels.prox_rows(V, ks, np.ascontiguousarray(Ls), out)
    if bad >= 0:
        raise InconsistencyError(f"no valid (r, ell) pair in row {bad}")
    return out


def prox_l1_rows(V, taus):
    taus = np.asarray(taus, dtype=np.float64).reshape(-1, 1)
    return np.sign(V) * np.maximum(np.abs(V) - taus, 0.0)


def prox_elastic_rows(V, taus1, taus2):
    taus1 = np.asarray(taus1, dtype=np.float64).reshape(-1, 1)
    taus2 = np.asarray(taus2, dtype=np.float64).reshape(-1, 1)
    return np.sign(V) * np.maximum(np.abs(V) - taus1, 0.0) / (1.0 + 2.0 * taus2)
