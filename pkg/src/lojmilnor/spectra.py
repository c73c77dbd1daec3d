"""Singular-value spectra of gradient frames, Ł-weights, and the matrix inequalities
that control them under composition.

Singular values come from the Gram matrix M = AᵀA: closed-form eigenvalues when
k = 2, cyclic Jacobi otherwise. The Jacobi sweep is run one-sided, rotating the
columns of A directly; each column rotation is exactly a Jacobi rotation of M,
but the small singular values keep their relative accuracy instead of bottoming
out at √ε·σ₁.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _numerics as nx
from .analytic import GradientFrame
from .errors import InputError, PreconditionError

ZERO_TRACE = 1e-300
ZERO_EIG = 1e-300
SLACK = 1e-9

__all__ = [
    "GradientFrame", "SingularSpectrum", "RhoValue",
    "singular_values", "singular_values_batch", "jacobi_eigenvalues",
    "sigma_min_oracle", "rho", "rho_batch", "rho_f_angle",
    "check_prodsv", "check_trace_sandwich", "check_slw_bound", "check_geom_mean",
]


@dataclass(frozen=True)
class SingularSpectrum:
    sigmas: tuple[float, ...]
    trace: float
    det_gram: float

    @property
    def sigma_max(self) -> float:
        return self.sigmas[0]

    @property
    def sigma_min(self) -> float:
        return self.sigmas[-1]


@dataclass(frozen=True)
class RhoValue:
    rho: float
    defined: bool


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise InputError(f"expected a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError("matrix entries must be finite")
    return A


# --------------------------------------------------------------------------
# eigen/singular values


def _closed_form_two(A: np.ndarray) -> np.ndarray:
    """Singular values of (..., n, 2) matrices from the 2×2 Gram eigenvalues."""
    u, v = A[..., :, 0], A[..., :, 1]
    a, b, c = nx.sqnorm(u), nx.sqnorm(v), nx.dot(u, v)
    # det M = |u ∧ v|² (Lagrange identity): no cancellation for nearly parallel columns
    n = A.shape[-2]
    det = np.zeros(a.shape)
    for i in range(n):
        for j in range(i + 1, n):
            w = u[..., i] * v[..., j] - u[..., j] * v[..., i]
            det = det + w * w
    lam1 = 0.5 * ((a + b) + np.sqrt((a - b) * (a - b) + 4.0 * c * c))
    with np.errstate(invalid="ignore", divide="ignore"):
        lam2 = np.where(lam1 > 0, det / np.where(lam1 > 0, lam1, 1.0), 0.0)
    lam2 = np.minimum(lam2, lam1)
    return np.stack([np.sqrt(lam1), np.sqrt(lam2)], axis=-1)


def _one_sided_jacobi(A: np.ndarray, tol: float = 1e-15, max_sweeps: int = 60) -> np.ndarray:
    """Column norms of A after cyclic Jacobi orthogonalisation; shape (N, k).

    Convergence is tracked per matrix and finished matrices are frozen, so a
    matrix gets bit-identical results alone or inside any batch.
    """
    U = np.array(A, dtype=float, copy=True)
    N, _, k = U.shape
    done = np.zeros(N, dtype=bool)
    prev = nx.norm(np.swapaxes(U, 1, 2))
    for _ in range(max_sweeps):
        rotated = np.zeros(N, dtype=bool)
        for i in range(k - 1):
            for j in range(i + 1, k):
                ui, uj = U[:, :, i].copy(), U[:, :, j].copy()
                a, b, c = nx.sqnorm(ui), nx.sqnorm(uj), nx.dot(ui, uj)
                active = ~done & (np.abs(c) > tol * np.sqrt(a * b))
                if not active.any():
                    continue
                safe_c = np.where(active, c, 1.0)
                zeta = (b - a) / (2.0 * safe_c)
                with np.errstate(over="ignore"):
                    t = np.sign(zeta) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                t = np.where(zeta == 0.0, 1.0, t)
                cs = 1.0 / np.sqrt(1.0 + t * t)
                sn = cs * t
                cs = np.where(active, cs, 1.0)
                sn = np.where(active, sn, 0.0)
                # a rotation by less than an ulp leaves U unchanged; don't count it
                rotated |= np.abs(sn) > 2.2e-16
                U[:, :, i] = cs[:, None] * ui - sn[:, None] * uj
                U[:, :, j] = sn[:, None] * ui + cs[:, None] * uj
        norms = nx.norm(np.swapaxes(U, 1, 2))
        # roundoff-level rotations can go on forever; a matrix is finished once
        # a sweep leaves every one of its column norms bit-identical
        done |= ~rotated | np.all(norms == prev, axis=1)
        prev = norms
        if done.all():
            break
    return prev


def singular_values_batch(A) -> np.ndarray:
    """Descending singular values for a stack of matrices of shape (N, n, k)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 3:
        raise InputError(f"expected shape (N, n, k), got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError("matrix entries must be finite")
    k = A.shape[2]
    if A.shape[0] == 0:
        return np.zeros((0, k))
    if k == 1:
        return nx.norm(A[:, :, 0])[:, None]
    if k == 2:
        s = _closed_form_two(A)
    else:
        s = _one_sided_jacobi(A)
    return -np.sort(-s, axis=1)


def singular_values(A) -> SingularSpectrum:
    A = _as_matrix(A)
    s = singular_values_batch(A[None])[0]
    trace = 0.0
    for col in A.T:
        trace += float(nx.sqnorm(col))
    det = 1.0
    for v in s:
        det *= float(v) * float(v)
    return SingularSpectrum(tuple(float(v) for v in s), trace, det)


def jacobi_eigenvalues(M, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues (descending) of a symmetric matrix by classical cyclic Jacobi.

    Stops once the off-diagonal Frobenius norm is ≤ 1e-13·tr|M|.
    """
    M = np.array(M, dtype=float, copy=True)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError("jacobi_eigenvalues needs a square matrix")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix entries must be finite")
    k = M.shape[0]
    scale = float(np.abs(np.diag(M)).sum())
    for _ in range(max_sweeps):
        off = np.sqrt(sum(M[i, j] ** 2 for i in range(k) for j in range(k) if i != j))
        if off <= 1e-13 * scale or off == 0.0:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                if M[p, q] == 0.0:
                    continue
                theta = (M[q, q] - M[p, p]) / (2.0 * M[p, q])
                t = np.sign(theta) / (abs(theta) + math.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                J = np.eye(k)
                J[p, p] = J[q, q] = c
                J[p, q], J[q, p] = s, -s
                M = J.T @ M @ J
                M[p, q] = M[q, p] = 0.0
    return np.sort(np.diag(M))[::-1]


def sigma_min_oracle(A, directions: int = 100_000, seed: int = 0) -> float:
    """Brute-force min of |A t| over unit vectors t; an upper bound on σ_k.

    Uses ``directions`` seeded uniform unit vectors plus every ±basis vector.
    """
    A = _as_matrix(A)
    if directions < 100:
        raise InputError("sigma_min_oracle needs at least 100 directions")
    k = A.shape[1]
    rng = np.random.default_rng(seed % 2**64)
    T = rng.standard_normal((directions, k))
    T /= np.linalg.norm(T, axis=1, keepdims=True)
    eye = np.eye(k)
    T = np.vstack([T, eye, -eye])
    return float(np.min(np.linalg.norm(T @ A.T, axis=1)))


# --------------------------------------------------------------------------
# Ł-weight


def _geo_mean_of_eigs(lams: np.ndarray) -> np.ndarray:
    """(Π λᵢ)^{1/k} along the last axis, as exp(mean log λ); zero if any λ < 1e-300."""
    k = lams.shape[-1]
    zero = np.any(lams < ZERO_EIG, axis=-1)
    safe = np.where(lams < ZERO_EIG, 1.0, lams)
    logs = np.log(safe[..., 0])
    for i in range(1, k):
        logs = logs + np.log(safe[..., i])
    return np.where(zero, 0.0, np.exp(logs / k))


def rho_batch(A: np.ndarray, sigmas: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """ρ for a stack of frames; returns (rho, trace). ρ is NaN where tr M ≤ 1e-300."""
    A = np.asarray(A, dtype=float)
    if sigmas is None:
        sigmas = singular_values_batch(A)
    k = A.shape[2]
    trace = nx.sqnorm(A[:, :, 0])
    for i in range(1, k):
        trace = trace + nx.sqnorm(A[:, :, i])
    gm = _geo_mean_of_eigs(sigmas * sigmas)
    defined = trace > ZERO_TRACE
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(defined, k * gm / np.where(defined, trace, 1.0), np.nan)
    return r, trace


def rho(frame: GradientFrame) -> RhoValue:
    r, _ = rho_batch(frame.A[None])
    if np.isnan(r[0]):
        return RhoValue(0.0, False)
    return RhoValue(float(r[0]), True)


def rho_f_angle(frame: GradientFrame) -> float:
    """ρ_f for k = 2 through the angle between ∇g and ∇h."""
    if frame.k != 2:
        raise InputError(f"rho_f_angle needs k = 2, got k = {frame.k}")
    gg, gh = frame.A[:, 0], frame.A[:, 1]
    ng, nh = float(nx.norm(gg)), float(nx.norm(gh))
    tr = ng * ng + nh * nh
    if tr <= ZERO_TRACE:
        raise PreconditionError("rho_f_angle needs tr M > 0")
    if ng == 0.0 or nh == 0.0:
        return 0.0
    # sin η from the wedge |∇g ∧ ∇h| (Lagrange identity) rather than √(1 − cos²η):
    # the latter loses half the digits when the gradients are nearly parallel
    wedge = 0.0
    for i in range(len(gg) - 1):
        for j in range(i + 1, len(gg)):
            w = gg[i] * gh[j] - gg[j] * gh[i]
            wedge += w * w
    sin = min(1.0, math.sqrt(wedge) / (ng * nh))
    return 2.0 * ng * nh * sin / tr


# --------------------------------------------------------------------------
# inequality checks


def _conform(A, B) -> tuple[np.ndarray, np.ndarray]:
    A, B = _as_matrix(A), _as_matrix(B)
    if B.shape[1] != A.shape[0]:
        raise InputError(f"shapes do not conform: B is {B.shape}, A is {A.shape}")
    return A, B


def _sv(A: np.ndarray) -> np.ndarray:
    return singular_values_batch(A[None])[0]


@dataclass(frozen=True)
class ProdSVRecord:
    sigma_k_BA: float
    lower: float          # σ_n(B)·σ_k(A)
    det_root: float       # det(AᵀBᵀBA)^{1/k}
    holds: bool


def check_prodsv(A, B) -> ProdSVRecord:
    """σ_k(BA) ≥ σ_n(B)σ_k(A), and det^{1/k} ≥ σ_k²(BA) ≥ σ_n²(B)σ_k²(A)."""
    A, B = _conform(A, B)
    C = nx.matmul(B, A)
    sC, sA, sB = _sv(C), _sv(A), _sv(B)
    sk = float(sC[-1])
    lower = float(sB[-1] * sA[-1])
    det_root = float(_geo_mean_of_eigs(sC * sC))
    scale = max(1.0, det_root, sk * sk)
    holds = (sk >= lower - SLACK * max(1.0, lower)
             and det_root >= sk * sk - SLACK * scale
             and sk * sk >= lower * lower - SLACK * scale)
    return ProdSVRecord(sk, lower, det_root, bool(holds))


@dataclass(frozen=True)
class TraceSandwichRecord:
    lower: float
    trace: float
    upper: float
    holds: bool


def check_trace_sandwich(A, B) -> TraceSandwichRecord:
    """n σ_n²(Aᵀ) σ_n²(B) ≤ tr(AᵀBᵀBA) ≤ n σ₁²(A) σ₁²(B)."""
    A, B = _conform(A, B)
    n = A.shape[0]
    C = nx.matmul(B, A)
    trace = float(sum(float(nx.sqnorm(col)) for col in C.T))
    sAt, sA, sB = _sv(A.T), _sv(A), _sv(B)
    lower = float(n * sAt[-1] ** 2 * sB[-1] ** 2)
    upper = float(n * sA[0] ** 2 * sB[0] ** 2)
    slack = SLACK * max(1.0, upper)
    holds = lower <= trace + slack and trace <= upper + slack
    return TraceSandwichRecord(lower, trace, upper, bool(holds))


@dataclass(frozen=True)
class SlwRecord:
    weight: float   # k det^{1/k} / tr of the product frame
    bound: float    # k σ_n²(B) σ_k²(A) / (n σ₁²(B) σ₁²(A))
    holds: bool


def check_slw_bound(A, B) -> SlwRecord:
    A, B = _conform(A, B)
    n, k = A.shape
    C = nx.matmul(B, A)
    r, trace = rho_batch(C[None])
    if not trace[0] > ZERO_TRACE:
        raise PreconditionError("check_slw_bound needs BA != 0")
    sA, sB = _sv(A), _sv(B)
    bound = float(k * sB[-1] ** 2 * sA[-1] ** 2 / (n * sB[0] ** 2 * sA[0] ** 2))
    weight = float(r[0])
    return SlwRecord(weight, bound, bool(weight >= bound - SLACK * max(1.0, bound)))


@dataclass(frozen=True)
class GeomMeanRecord:
    geometric: float   # k det(M)^{1/k}
    trace: float
    holds: bool
    equal_means: bool
    equal_eigenvalues: bool

    @property
    def characterization_holds(self) -> bool:
        return self.equal_means == self.equal_eigenvalues


def check_geom_mean(M, tol: float = 1e-8) -> GeomMeanRecord:
    """k det(M)^{1/k} ≤ tr M, with equality iff all eigenvalues agree."""
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise InputError("check_geom_mean needs a square matrix")
    if not np.allclose(M, M.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(M).max(initial=0.0)))):
        raise InputError("check_geom_mean needs a symmetric matrix")
    k = M.shape[0]
    lams = jacobi_eigenvalues(M)
    trace = float(np.trace(M))
    lams = np.where(lams < 0.0, np.where(lams >= -1e-12 * max(trace, 0.0), 0.0, lams), lams)
    geo = float(k * _geo_mean_of_eigs(lams))
    scale = max(trace, ZERO_TRACE)
    equal_means = (trace - geo) <= tol * scale
    equal_eigs = (lams[0] - lams[-1]) <= tol * max(abs(lams[0]), ZERO_TRACE)
    holds = geo <= trace + SLACK * max(1.0, trace)
    return GeomMeanRecord(geo, trace, bool(holds), bool(equal_means), bool(equal_eigs))
