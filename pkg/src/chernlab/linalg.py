"""Small linear-algebra helpers for the g-inner product on (1,0)-vectors.

The Hermitian pairing used throughout is
    <u, v>_g = sum_{ij} g_{i jbar} u^i conj(v^j),
linear in u and conjugate-linear in v.  In terms of the standard form this
is w^H g w with w = conj(u), which is how the generalized eigenproblems
below are phrased.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = [
    "g_inner",
    "g_norm",
    "g_orthonormalize",
    "subspace_angle",
    "hermitize",
    "hermitian_form_min",
]


def g_inner(u: np.ndarray, v: np.ndarray, g: np.ndarray) -> complex:
    return complex(u @ g @ np.conj(v))


def g_norm(u: np.ndarray, g: np.ndarray) -> float:
    return float(np.sqrt(max(g_inner(u, u, g).real, 0.0)))


def g_orthonormalize(basis: np.ndarray, g: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Modified Gram-Schmidt in the g-inner product; drops dependent columns.

    `basis` has vectors as columns, shape (n, k); returns (n, k') with
    k' <= k.
    """
    basis = np.atleast_2d(np.asarray(basis, dtype=np.complex128))
    if basis.shape[0] != g.shape[0]:
        basis = basis.T
    out = []
    for j in range(basis.shape[1]):
        v = basis[:, j].copy()
        for u in out:
            v -= g_inner(v, u, g) * u
        for u in out:  # second pass for numerical orthogonality
            v -= g_inner(v, u, g) * u
        nrm = g_norm(v, g)
        if nrm > tol:
            out.append(v / nrm)
    if not out:
        return np.zeros((g.shape[0], 0), dtype=np.complex128)
    return np.stack(out, axis=1)


def subspace_angle(b1: np.ndarray, b2: np.ndarray, g: np.ndarray) -> float:
    """Largest principal angle (radians) between two subspaces, g-metric.

    Subspaces of different dimension are maximally apart (pi/2).
    """
    u1 = g_orthonormalize(b1, g)
    u2 = g_orthonormalize(b2, g)
    if u1.shape[1] != u2.shape[1]:
        return float(np.pi / 2)
    if u1.shape[1] == 0:
        return 0.0
    # gram[a, b] = <u1_a, u2_b>_g
    gram = np.einsum("ia,ij,jb->ab", u1, g, np.conj(u2))
    s = np.linalg.svd(gram, compute_uv=False)
    s = np.clip(s, -1.0, 1.0)
    return float(np.arccos(np.min(s)))


def hermitize(m: np.ndarray) -> tuple[np.ndarray, float]:
    """Symmetrize (..., n, n) to exact Hermitian; return the pre-symmetrization residual."""
    adj = np.conj(np.swapaxes(m, -1, -2))
    res = float(np.max(np.abs(m - adj))) if m.size else 0.0
    return 0.5 * (m + adj), res


def hermitian_form_min(m: np.ndarray, g: np.ndarray):
    """Minimize sum m_{ij} x^i conj(x^j) over |x|_g = 1.

    Returns (min value, argmin vector x with |x|_g = 1).  Uses the
    substitution w = conj(x), under which both forms become standard
    Hermitian quadratic forms w^H m w and w^H g w.
    """
    vals, vecs = scipy.linalg.eigh(m, g)
    x = np.conj(vecs[:, 0])
    return float(vals[0]), x
