"""Batched damped Newton (Gauss–Newton, minimum-norm steps) for small systems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True, eq=False)
class NewtonResult:
    X: np.ndarray
    residual: np.ndarray     # (N, m)
    converged: np.ndarray    # (N,) bool
    iterations: int


def fd_jacobian(fun: Callable[[np.ndarray], np.ndarray], X: np.ndarray,
                rel_step: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian of a batched residual; shape (N, m, n)."""
    N, n = X.shape
    h = rel_step * np.maximum(np.sqrt(np.sum(X * X, axis=1)), 1e-12)
    cols = []
    for j in range(n):
        E = np.zeros_like(X)
        E[:, j] = h
        cols.append((fun(X + E) - fun(X - E)) / (2.0 * h)[:, None])
    return np.stack(cols, axis=2)


def _rnorm(R: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(R * R, axis=1))


def damped_newton(fun: Callable[[np.ndarray], np.ndarray], X0: np.ndarray,
                  jac: Callable[[np.ndarray], np.ndarray] | None = None,
                  tol: float | np.ndarray = 1e-12, max_iter: int = 25,
                  max_halvings: int = 10, rcond: float | None = None) -> NewtonResult:
    """Drive fun(X) → 0 row by row.

    ``fun`` maps (N, n) points to (N, m) residuals; ``jac`` returns (N, m, n) or,
    when omitted, central differences are used. A step is halved while it fails
    to reduce the residual norm; a point that cannot be improved stays put.
    ``rcond`` truncates small singular values of J in the minimum-norm step;
    the default is 1e-12 for an exact Jacobian and 1e-6 for a differenced one,
    whose noise floor would otherwise produce huge steps along null directions.
    """
    if rcond is None:
        rcond = 1e-12 if jac is not None else 1e-6
    X = np.array(X0, dtype=float, copy=True)
    N = X.shape[0]
    tol = np.broadcast_to(np.asarray(tol, dtype=float), (N,))
    R = fun(X)
    r = _rnorm(R)
    done = (r <= tol) | ~np.isfinite(r)
    it = 0
    for it in range(1, max_iter + 1):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        Xa = X[act]
        J = jac(Xa) if jac is not None else fd_jacobian(fun, Xa)
        J = np.where(np.isfinite(J), J, 0.0)
        step = np.einsum("inm,im->in", np.linalg.pinv(J, rcond=rcond), R[act])
        alpha = np.ones(act.size)
        best_X, best_R, best_r = Xa.copy(), R[act].copy(), r[act].copy()
        pending = np.ones(act.size, dtype=bool)
        for _ in range(max_halvings + 1):
            idx = np.flatnonzero(pending)
            if idx.size == 0:
                break
            trial = Xa[idx] - alpha[idx, None] * step[idx]
            Rt = fun(trial)
            rt = _rnorm(Rt)
            good = np.isfinite(rt) & (rt < r[act][idx])
            gi = idx[good]
            best_X[gi], best_R[gi], best_r[gi] = trial[good], Rt[good], rt[good]
            pending[gi] = False
            alpha[idx[~good]] *= 0.5
        stalled = pending
        X[act], R[act], r[act] = best_X, best_R, best_r
        done[act] = (best_r <= tol[act]) | stalled
    conv = _rnorm(R) <= tol
    return NewtonResult(X, R, conv, it)
