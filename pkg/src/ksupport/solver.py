"""Accelerated proximal gradient for penalised least squares.

The objective is ``0.5 * ||X w - y||^2 + penalty(w)`` with one of three
penalties:

* ``KSupport(k, lam)``: ``(lam / 2) * ||w||_k^2`` (squared k-support norm)
* ``Lasso(lam)``: ``lam * ||w||_1``
* ``ElasticNet(lam1, lam2)``: ``lam1 * ||w||_1 + lam2 * ||w||_2^2``

:func:`fista` is generic over gradient/prox callbacks.  :func:`fit_batch`
runs many penalties on the same data at once by stacking the iterates as
rows; rows that meet the stopping rule are frozen and dropped from further
work, so each row's result is the same as a standalone fit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from . import _kernels
from ._common import DivergenceError, InconsistencyError, as_vector, check_k
from .prox import prox_elastic_rows, prox_ksup_sq_rows, prox_l1_rows

__all__ = [
    "KSupport",
    "Lasso",
    "ElasticNet",
    "FitConfig",
    "SolverOptions",
    "FitResult",
    "lipschitz_estimate",
    "fista",
    "squared_loss_grad",
    "objective",
    "fit",
    "fit_batch",
]

STALL_WINDOW = 5


@dataclass(frozen=True)
class KSupport:
    k: int
    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")


@dataclass(frozen=True)
class Lasso:
    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")


@dataclass(frozen=True)
class ElasticNet:
    lam1: float
    lam2: float

    def __post_init__(self):
        if self.lam1 < 0 or self.lam2 < 0:
            raise ValueError("lam1 and lam2 must be nonnegative")


Penalty = Union[KSupport, Lasso, ElasticNet]


@dataclass(frozen=True)
class FitConfig:
    """Solver settings.

    ``step_L=None`` means the step constant is estimated from the design
    matrix by power iteration.  The run stops when the relative change of the
    objective stays below `rel_tol` for 5 consecutive iterations, or after
    `max_iters` iterations.
    """

    penalty: Penalty
    max_iters: int = 50_000
    rel_tol: float = 1e-8
    step_L: Optional[float] = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.step_L is not None and not self.step_L > 0:
            raise ValueError("step_L must be positive")


@dataclass(frozen=True)
class SolverOptions:
    """Penalty-independent solver settings shared by the cells of a grid."""

    max_iters: int = 50_000
    rel_tol: float = 1e-8
    step_L: Optional[float] = None

    def config(self, penalty):
        return FitConfig(penalty, self.max_iters, self.rel_tol, self.step_L)


@dataclass
class FitResult:
    w: np.ndarray
    objective_trace: np.ndarray
    iterations: int
    converged: bool
    L_used: float
    elapsed: float = 0.0

    @property
    def best_objective(self):
        return float(np.min(self.objective_trace)) if self.objective_trace.size else math.nan


def lipschitz_estimate(X, min_iters=50, max_iters=2000, tol=1e-8, safety=1.01):
    """Upper estimate of the largest eigenvalue of ``X^T X``.

    Power iteration from a fixed pseudo-random start vector, run for at least
    `min_iters` steps and until the Rayleigh quotient changes by less than
    `tol` (relative), then multiplied by `safety`.
    """
    d = X.shape[1]
    v = np.random.default_rng(0).standard_normal(d)
    v /= np.linalg.norm(v)
    est = 0.0
    for it in range(max_iters):
        u = X.T @ (X @ v)
        new = float(v @ u)
        nu = np.linalg.norm(u)
        if nu == 0.0:
            if it == 0:
                raise ValueError("design matrix is zero (or annihilates the start vector)")
            break
        v = u / nu
        if it >= min_iters and abs(new - est) <= tol * abs(new):
            est = new
            break
        est = new
    if est <= 0.0:
        raise ValueError("design matrix is zero")
    return safety * est


def squared_loss_grad(X, y, w):
    """Gradient ``X^T (X w - y)`` of the squared loss."""
    X, y, w = _conform(X, y, w)
    return np.asarray(X.T @ (X @ w - y)).ravel()


def _conform(X, y, w):
    if not sp.issparse(X):
        X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or w.ndim != 1:
        raise ValueError("expected X 2-D, y and w 1-D")
    if X.shape[0] != y.shape[0] or X.shape[1] != w.shape[0]:
        raise ValueError(f"shape mismatch: X {X.shape}, y {y.shape}, w {w.shape}")
    return X, y, w


def penalty_value(w, penalty):
    """Value of `penalty` at a single coefficient vector."""
    return float(_Penalties([penalty]).value(np.atleast_2d(w), np.arange(1))[0])


def objective(X, y, w, cfg):
    """``0.5 ||X w - y||^2`` plus the penalty of ``cfg`` (a FitConfig or penalty)."""
    X, y, w = _conform(X, y, w)
    penalty = cfg.penalty if isinstance(cfg, FitConfig) else cfg
    r = X @ w - y
    return 0.5 * float(r @ r) + penalty_value(w, penalty)


class _Penalties:
    """Parameters of a homogeneous batch of penalties, one per row."""

    def __init__(self, penalties: Sequence[Penalty]):
        kinds = {type(p) for p in penalties}
        if len(kinds) != 1:
            raise ValueError("a batch must hold penalties of a single kind")
        self.kind = kinds.pop()
        if self.kind is KSupport:
            self.k = np.array([p.k for p in penalties], dtype=np.int64)
            self.lam = np.array([p.lam for p in penalties], dtype=np.float64)
        elif self.kind is Lasso:
            self.lam = np.array([p.lam for p in penalties], dtype=np.float64)
        elif self.kind is ElasticNet:
            self.lam1 = np.array([p.lam1 for p in penalties], dtype=np.float64)
            self.lam2 = np.array([p.lam2 for p in penalties], dtype=np.float64)
        else:
            raise TypeError(f"unknown penalty {self.kind!r}")

    def value(self, W, rows):
        if self.kind is KSupport:
            sq = _kernels.norm_sq_rows(np.ascontiguousarray(W), self.k[rows])
            if np.any(np.isnan(sq)):
                raise InconsistencyError("no valid split index in k-support norm")
            return 0.5 * self.lam[rows] * sq
        l1 = np.abs(W).sum(axis=1)
        if self.kind is Lasso:
            return self.lam[rows] * l1
        return self.lam1[rows] * l1 + self.lam2[rows] * np.einsum("ij,ij->i", W, W)

    def prox(self, V, rows, L):
        """Prox of ``penalty / L`` for each row."""
        if self.kind is KSupport:
            lam = self.lam[rows]
            out = np.where(lam[:, None] > 0, 0.0, V)
            pos = lam > 0
            if np.any(pos):
                out[pos] = prox_ksup_sq_rows(V[pos], self.k[rows][pos], lam[pos] / L)
            return out
        if self.kind is Lasso:
            return prox_l1_rows(V, self.lam[rows] / L)
        return prox_elastic_rows(V, self.lam1[rows] / L, self.lam2[rows] / L)


def _fista_rows(grad, prox, obj, W1, L, max_iters, rel_tol):
    """Row-batched FISTA.  Callbacks take ``(W, rows)`` with W the active rows.

    Without `obj` every row runs `max_iters` iterations and the last iterate
    is returned; the traces are then empty.
    """
    W = np.array(W1, dtype=np.float64)
    n = W.shape[0]
    A = W.copy()
    all_rows = np.arange(n)
    track = obj is not None
    if track:
        F = obj(W, all_rows)
        if not np.all(np.isfinite(F)):
            raise DivergenceError(0)
        best_F = F.copy()
        best_W = W.copy()
        chunks = [(all_rows, F.copy())]
    else:
        chunks = []
    stall = np.zeros(n, dtype=np.int64)
    iters = np.zeros(n, dtype=np.int64)
    converged = np.zeros(n, dtype=bool)
    active = all_rows
    theta = 1.0
    for t in range(1, max_iters + 1):
        theta_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
        Aa = A[active]
        Wn = prox(Aa - grad(Aa, active) / L, active)
        A[active] = Wn + ((theta - 1.0) / theta_next) * (Wn - W[active])
        W[active] = Wn
        iters[active] = t
        theta = theta_next
        if not track:
            continue
        Fn = obj(Wn, active)
        if not np.all(np.isfinite(Fn)):
            raise DivergenceError(t)
        chunks.append((active, Fn))
        improved = Fn < best_F[active]
        if np.any(improved):
            idx = active[improved]
            best_F[idx] = Fn[improved]
            best_W[idx] = Wn[improved]
        Fp = F[active]
        change = np.abs(Fn - Fp) / np.maximum(np.abs(Fp), np.finfo(float).tiny)
        F[active] = Fn
        stall[active] = np.where(change < rel_tol, stall[active] + 1, 0)
        done = stall[active] >= STALL_WINDOW
        if np.any(done):
            converged[active[done]] = True
            active = active[~done]
            if active.size == 0:
                break
    traces = [[] for _ in range(n)]
    for rows, vals in chunks:
        for i, f in zip(rows.tolist(), vals.tolist()):
            traces[i].append(f)
    return (best_W if track else W), [np.array(tr) for tr in traces], iters, converged


def fista(grad: Callable, prox: Callable, w1, L: float, cfg: FitConfig,
          objective: Optional[Callable] = None) -> FitResult:
    """Minimise ``f + g`` with FISTA.

    Parameters
    ----------
    grad : callable
        ``grad(w)`` returns the gradient of the smooth part `f`.
    prox : callable
        ``prox(v)`` returns ``argmin_u 0.5 ||u - v||^2 + g(u) / L``.
    w1 : array_like
        Starting point (also the first extrapolation point).
    L : float
        Lipschitz constant of `grad` (or any upper bound).
    cfg : FitConfig
        Only ``max_iters`` and ``rel_tol`` are used here.
    objective : callable, optional
        ``objective(w)`` returns ``f(w) + g(w)``; used for the stopping rule
        and to pick the best iterate.  Without it the run always lasts
        ``max_iters`` iterations and the last iterate is returned.

    Returns
    -------
    FitResult
        The lowest-objective iterate seen (FISTA is not monotone).

    Raises
    ------
    DivergenceError
        If the objective becomes NaN or infinite; ``.iteration`` says when.
    """
    start = time.perf_counter()
    w1 = as_vector(w1, "w1")
    if not L > 0:
        raise ValueError("L must be positive")
    obj = None
    if objective is not None:
        obj = lambda W, rows: np.array([float(objective(W[0]))])  # noqa: E731
    W, traces, iters, conv = _fista_rows(
        lambda W, rows: np.atleast_2d(grad(W[0])),
        lambda V, rows: np.atleast_2d(prox(V[0])),
        obj, w1[None, :], float(L), cfg.max_iters, cfg.rel_tol,
    )
    return FitResult(
        w=W[0], objective_trace=traces[0], iterations=int(iters[0]),
        converged=bool(conv[0]), L_used=float(L), elapsed=time.perf_counter() - start,
    )


def fit_batch(X, y, penalties: Sequence[Penalty], max_iters=50_000, rel_tol=1e-8,
              step_L=None, record_trace=True):
    """Fit one model per penalty on shared data; all penalties of one kind.

    Returns a list of :class:`FitResult` in the order of `penalties`.
    """
    start = time.perf_counter()
    if not sp.issparse(X):
        X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError(f"shape mismatch: X {X.shape}, y {y.shape}")
    d = X.shape[1]
    for p in penalties:
        if isinstance(p, KSupport):
            check_k(p.k, d)
    pen = _Penalties(penalties)
    L = float(step_L) if step_L is not None else lipschitz_estimate(X)
    Xt = X.T
    yc = y[:, None]

    def grad(W, rows):
        R = X @ W.T - yc
        return np.asarray(Xt @ R).T

    def obj(W, rows):
        R = X @ W.T - yc
        return 0.5 * np.einsum("ij,ij->j", R, R) + pen.value(W, rows)

    W, traces, iters, conv = _fista_rows(
        grad, lambda V, rows: pen.prox(V, rows, L), obj,
        np.zeros((len(penalties), d)), L, max_iters, rel_tol,
    )
    elapsed = time.perf_counter() - start
    return [
        FitResult(w=W[i], objective_trace=traces[i] if record_trace else traces[i][-1:],
                  iterations=int(iters[i]), converged=bool(conv[i]), L_used=L,
                  elapsed=elapsed)
        for i in range(len(penalties))
    ]


def fit(dataset, cfg: FitConfig) -> FitResult:
    """Fit a single penalised least-squares model starting from ``w = 0``.

    `dataset` is a :class:`ksupport.data.Dataset` or an ``(X, y)`` pair.
    """
    X, y = (dataset.X, dataset.y) if hasattr(dataset, "X") else dataset
    return fit_batch(X, y, [cfg.penalty], max_iters=cfg.max_iters,
                     rel_tol=cfg.rel_tol, step_L=cfg.step_L)[0]
