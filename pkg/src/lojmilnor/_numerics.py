"""Small reductions with a fixed left-to-right summation order.

numpy's pairwise summation may reorder additions depending on array layout,
which would make batched and single-point results differ in the last bit.
Every reduction over the (small) ambient or codomain axis goes through here.
"""

import numpy as np


def dot(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Inner product over the last axis, summed left to right."""
    s = u[..., 0] * v[..., 0]
    for i in range(1, u.shape[-1]):
        s = s + u[..., i] * v[..., i]
    return s


def sqnorm(u: np.ndarray) -> np.ndarray:
    return dot(u, u)


def norm(u: np.ndarray) -> np.ndarray:
    return np.sqrt(sqnorm(u))


def gram(A: np.ndarray) -> np.ndarray:
    """AᵀA for A of shape (..., n, k)."""
    k = A.shape[-1]
    M = np.empty(A.shape[:-2] + (k, k))
    for i in range(k):
        for j in range(i, k):
            M[..., i, j] = dot(A[..., :, i], A[..., :, j])
            M[..., j, i] = M[..., i, j]
    return M


def matmul(B: np.ndarray, A: np.ndarray) -> np.ndarray:
    """B @ A with a fixed summation order, batched over leading axes."""
    m, n = B.shape[-2:]
    k = A.shape[-1]
    C = np.empty(np.broadcast_shapes(B.shape[:-2], A.shape[:-2]) + (m, k))
    for i in range(m):
        for j in range(k):
            C[..., i, j] = dot(B[..., i, :], A[..., :, j])
    return C
