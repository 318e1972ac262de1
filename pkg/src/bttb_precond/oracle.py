"""Slow dense reference implementations used as test oracles.

Nothing in the solve pipeline imports this module.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficiencyMismatch, TooLarge
from .spectral import BCCBPreconditioner, Fill, TruncatedSpectrum
from .structured import BTTBOperator, Circulant, SkewCirculant, SymToeplitz

__all__ = [
    "MAX_DENSE",
    "dense_materialize",
    "brute_force_closest_circulant",
    "dense_solve",
    "dense_pinv",
    "dense_svd",
    "random_rank_matrix",
    "Prop1Result",
    "prop1_check",
    "prop1_sweep",
]

MAX_DENSE = 4096
RANK_TOL = 1e-10


def _offsets(n):
    i = np.arange(n)
    return i[:, None] - i[None, :]


def _spectral_dense(ts: TruncatedSpectrum, mode: Fill):
    n = ts.n
    F = np.exp(-2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n)
    eff = ts.with_mode(mode).effective
    return (F.conj().T @ np.diag(eff) @ F) / n


def dense_materialize(op, mode: Fill = Fill.UNIT) -> np.ndarray:
    """Explicit matrix of any structured operator, built from its definition."""
    n = op.shape[0] if hasattr(op, "shape") else op.size
    if isinstance(op, BCCBPreconditioner):
        n = op.size
    if n > MAX_DENSE:
        raise TooLarge(f"refusing to materialize a {n}x{n} matrix")
    if isinstance(op, SymToeplitz):
        return op.t[np.abs(_offsets(op.n))]
    if isinstance(op, Circulant):
        return op.c[_offsets(op.n) % op.n]
    if isinstance(op, SkewCirculant):
        d = _offsets(op.n)
        return np.where(d >= 0, op.s[d % op.n], -op.s[d % op.n])
    if isinstance(op, BTTBOperator):
        return op.alpha * np.kron(dense_materialize(op.t1), dense_materialize(op.t2))
    if isinstance(op, TruncatedSpectrum):
        return _spectral_dense(op, op.mode)
    if isinstance(op, BCCBPreconditioner):
        return np.kron(_spectral_dense(op.f1, mode), _spectral_dense(op.f2, mode))
    raise TypeError(f"cannot materialize {type(op).__name__}")


def brute_force_closest_circulant(T: SymToeplitz) -> Circulant:
    """Frobenius projection of ``dense(T)`` onto the circulant subspace.

    The circulant basis matrices ``P^j`` (cyclic shifts) are mutually
    orthogonal with squared norm ``n``, so the projection coefficient of each
    is the mean of the entries of ``T`` on the corresponding wrapped diagonal.
    """
    if T.n > 64:
        raise TooLarge("brute-force projection limited to n <= 64")
    A = dense_materialize(T)
    n = T.n
    d = _offsets(n) % n
    c = np.array([A[d == j].sum() / n for j in range(n)])
    return Circulant(c)


def dense_solve(A, b):
    A = np.asarray(A)
    if max(A.shape) > MAX_DENSE:
        raise TooLarge("matrix too large for the dense oracle")
    return np.linalg.solve(A, b)


def dense_svd(A):
    A = np.asarray(A)
    if max(A.shape) > MAX_DENSE:
        raise TooLarge("matrix too large for the dense oracle")
    return np.linalg.svd(A)


def _pinv_from_svd(U, s, Vh, tol):
    keep = s > tol * s[0] if s.size and s[0] > 0 else np.zeros_like(s, dtype=bool)
    return (Vh[keep].conj().T / s[keep]) @ U[:, keep].conj().T, s[keep]


def dense_pinv(A, tol=RANK_TOL):
    U, s, Vh = dense_svd(A)
    return _pinv_from_svd(U, s, Vh, tol)[0]


def random_rank_matrix(rng, n, q, smin=1e-2, smax=1.0):
    """``U diag(sigma_1..sigma_q, 0..0) V^T`` with random orthogonal factors."""
    U, _ = np.linalg.qr(rng.standard_normal((n, n)))
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    sig = np.zeros(n)
    sig[:q] = np.sort(np.exp(rng.uniform(np.log(smin), np.log(smax), q)))[::-1]
    return (U * sig) @ V.T


@dataclass
class Prop1Result:
    lhs: float
    rhs: float
    holds: bool
    nu: float
    kappa: float


def prop1_check(A, dA, beta, dbeta, q) -> Prop1Result:
    """Evaluate both sides of the pseudoinverse perturbation bound.

    With ``xi = pinv(A) beta`` and
    ``dxi = pinv(A + dA) (-dA xi + dbeta)``, checks

        ||dxi|| / ||xi|| <= nu * kappa(A) * (||dA|| / ||A|| + ||dbeta|| / ||beta||)

    where ``kappa(M) = ||M|| ||pinv(M)||`` and ``nu`` is the ratio of the
    smallest nonzero singular value of ``A`` to that of ``A + dA``.  Numerical
    rank is decided at ``1e-10 * sigma_max``.  ``holds`` allows a relative
    rounding slack of 1e-12.
    """
    A = np.asarray(A)
    U, s, Vh = dense_svd(A)
    rank = int(np.sum(s > RANK_TOL * s[0])) if s[0] > 0 else 0
    if rank != q:
        raise RankDeficiencyMismatch(f"numerical rank {rank} != {q}")
    A_pinv, s_A = _pinv_from_svd(U, s, Vh, RANK_TOL)
    Ub, sb, Vbh = dense_svd(A + dA)
    B_pinv, s_B = _pinv_from_svd(Ub, sb, Vbh, RANK_TOL)

    xi = A_pinv @ beta
    dxi = B_pinv @ (-dA @ xi + dbeta)
    lhs = np.linalg.norm(dxi) / np.linalg.norm(xi)
    normA = s[0]
    kappa = normA / s_A[-1]
    nu = s_A[-1] / s_B[-1]
    rhs = nu * kappa * (np.linalg.norm(dA, 2) / normA + np.linalg.norm(dbeta) / np.linalg.norm(beta))
    return Prop1Result(float(lhs), float(rhs), bool(lhs <= rhs * (1 + 1e-12)), float(nu), float(kappa))


def prop1_sweep(count=500, seed=0, max_n=10):
    """Random rank-controlled instances of :func:`prop1_check`.

    Perturbation norms are at most ``0.1 * sigma_q(A)``.  Returns the list of
    results.
    """
    rng = np.random.default_rng(seed)
    results = []
    for _ in range(count):
        n = int(rng.integers(1, max_n + 1))
        q = int(rng.integers(1, n + 1))
        A = random_rank_matrix(rng, n, q)
        sq = np.linalg.svd(A, compute_uv=False)[q - 1]
        beta = A @ rng.standard_normal(n)
        if np.linalg.norm(beta) == 0:
            beta = A[:, 0].copy()
        dA = rng.standard_normal((n, n))
        dA *= rng.uniform(0, 0.1) * sq / np.linalg.norm(dA, 2)
        dbeta = rng.standard_normal(n)
        dbeta *= rng.uniform(0, 0.1) * sq / np.linalg.norm(dbeta)
        results.append(prop1_check(A, dA, beta, dbeta, q))
    return results
