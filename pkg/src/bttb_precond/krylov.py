"""Range-restricted GMRES and the discrepancy-principle solve pipelines."""
from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import spectral
from .spectral import BCCBPreconditioner, _as_preconditioner
from .structured import matvec

__all__ = [
    "ProblemInstance",
    "ArnoldiDecomposition",
    "KrylovInfo",
    "SolveReport",
    "rrgmres",
    "solve_preconditioned",
    "solve_unpreconditioned",
    "solve_preconditioned_zero_start",
    "default_kmax",
]

log = logging.getLogger(__name__)

BREAKDOWN_TOL = 1e-14


@dataclass
class ProblemInstance:
    """Linear system ``op x = b`` with noisy data and a noise-norm bound ``eps``."""

    op: object
    b: np.ndarray
    eps: float
    gamma: float = 1.0
    x_true: np.ndarray | None = None
    b_clean: np.ndarray | None = None

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        n = self.op.shape[0]
        if self.b.shape != (n,):
            raise ValueError(f"b has shape {self.b.shape}, operator needs ({n},)")
        if self.gamma < 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if self.eps < 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")
        for name in ("x_true", "b_clean"):
            v = getattr(self, name)
            if v is not None and np.shape(v) != (n,):
                raise ValueError(f"{name} has the wrong length")
        if self.eps > np.linalg.norm(self.b):
            warnings.warn("noise bound exceeds the norm of the data", stacklevel=2)

    @property
    def threshold(self) -> float:
        return self.gamma * self.eps

    @property
    def n(self) -> int:
        return self.b.size


@dataclass
class ArnoldiDecomposition:
    """``A V[:, :k] = V @ H`` with ``V[:, 0]`` proportional to ``A^ell r0``."""

    V: np.ndarray
    H: np.ndarray
    ell: int


@dataclass
class KrylovInfo:
    k: int
    residual_history: list
    converged: bool
    breakdown: bool
    arnoldi: ArnoldiDecomposition


@dataclass
class SolveReport:
    mode: str
    k: int
    residual_history: list
    threshold: float
    converged: bool
    p1: int | None = None
    p2: int | None = None
    q1: int | None = None
    q2: int | None = None
    breakdown: bool = False
    residual_true: float = float("nan")
    residual_final: float = float("nan")
    rel_error: float | None = None
    imag_discarded: float = 0.0
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def p(self):
        return self.p1


def default_kmax(n: int) -> int:
    return min(n, 200)


def _givens(a, b):
    """Rotation ``(c, s)`` with ``[[c, s], [-conj(s), c]] @ [a, b] = [r, 0]``."""
    if b == 0:
        return 1.0, 0.0
    if a == 0:
        return 0.0, np.conj(b) / abs(b)
    r = np.hypot(abs(a), abs(b))
    c = abs(a) / r
    s = (a / abs(a)) * np.conj(b) / r
    return c, s


def rrgmres(apply_A, r0, ell=1, threshold=0.0, k_max=None):
    """Range-restricted GMRES.

    Computes ``y_k`` minimizing ``||A y - r0||`` over the shifted Krylov
    subspace ``K_k(A, A^ell r0)`` for k = 1, 2, ... and stops at the first k
    whose residual is at most ``threshold`` (discrepancy principle).

    Because ``r0`` need not lie in the Krylov basis, the residual has two
    orthogonal parts: the component of ``r0`` outside ``span(V_{k+1})``,
    tracked as an explicit vector, and the least-squares residual of the
    projected problem, read off the Givens-rotated right-hand side.

    Parameters
    ----------
    apply_A : callable
        ``v -> A v``.
    r0 : array
        Right-hand side of the correction equation.
    ell : int
        Shift exponent, at least 1.
    threshold : float
        Stopping level ``gamma * eps``.
    k_max : int, optional
        Iteration cap; defaults to ``min(n, 200)``.

    Returns
    -------
    y : array
    info : KrylovInfo
        ``info.residual_history[j]`` is the residual after j iterations
        (entry 0 is ``||r0||``).
    """
    r0 = np.asarray(r0)
    n = r0.size
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if k_max is None:
        k_max = default_kmax(n)
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    k_max = min(k_max, n)

    beta0 = np.linalg.norm(r0)
    empty = ArnoldiDecomposition(np.zeros((n, 0), r0.dtype), np.zeros((0, 0), r0.dtype), ell)
    if beta0 == 0:
        return np.zeros_like(r0), KrylovInfo(0, [0.0], True, False, empty)
    if beta0 <= threshold:
        return np.zeros_like(r0), KrylovInfo(0, [float(beta0)], True, False, empty)

    w = r0
    for _ in range(ell):
        w = apply_A(w)
    dtype = np.result_type(r0.dtype, w.dtype)
    r0 = r0.astype(dtype, copy=False)
    beta = np.linalg.norm(w)
    if beta == 0:
        log.debug("A^ell r0 vanishes; nothing to iterate on")
        return np.zeros_like(r0), KrylovInfo(0, [float(beta0)], False, True, empty)

    V = np.zeros((n, k_max + 1), dtype)
    H = np.zeros((k_max + 1, k_max), dtype)
    R = np.zeros((k_max + 1, k_max), dtype)
    rots = []
    V[:, 0] = w / beta
    g = [np.vdot(V[:, 0], r0)]
    r_perp = r0 - g[0] * V[:, 0]
    history = [float(beta0)]
    converged = breakdown = False

    k = 0
    while k < k_max:
        u = apply_A(V[:, k]).astype(dtype, copy=False)
        for _ in range(2):
            h = V[:, : k + 1].conj().T @ u
            u = u - V[:, : k + 1] @ h
            H[: k + 1, k] += h
        h_next = np.linalg.norm(u)
        k += 1
        col = H[: k + 1, k - 1].copy()
        if h_next < BREAKDOWN_TOL * beta:
            breakdown = True
            col[k] = 0.0
            H[k, k - 1] = 0.0
            g_new = 0.0
        else:
            H[k, k - 1] = h_next
            col[k] = h_next
            V[:, k] = u / h_next
            g_new = np.vdot(V[:, k], r_perp)
            r_perp = r_perp - g_new * V[:, k]
        for i, (c, s) in enumerate(rots):
            a, b = col[i], col[i + 1]
            col[i] = c * a + s * b
            col[i + 1] = -np.conj(s) * a + c * b
        c, s = _givens(col[k - 1], col[k])
        rots.append((c, s))
        col[k - 1] = c * col[k - 1] + s * col[k]
        col[k] = 0.0
        R[:k, k - 1] = col[:k]
        gk, g_last = g[k - 1], g_new
        g[k - 1] = c * gk + s * g_last
        g.append(-np.conj(s) * gk + c * g_last)

        res = float(np.sqrt(np.linalg.norm(r_perp) ** 2 + abs(g[k]) ** 2))
        history.append(res)
        if res <= threshold:
            converged = True
            break
        if breakdown:
            break

    Rk = R[:k, :k]
    rhs = np.asarray(g[:k])
    diag = np.abs(np.diag(Rk))
    if diag.min() > BREAKDOWN_TOL * diag.max():
        z = solve_triangular(Rk, rhs)
    else:
        z = np.linalg.lstsq(Rk, rhs, rcond=None)[0]
    y = V[:, :k] @ z
    m = k if breakdown else k + 1
    arnoldi = ArnoldiDecomposition(V[:, :m].copy(), H[:m, :k].copy(), ell)
    return y, KrylovInfo(k, history, converged, breakdown, arnoldi)


def _rel_error(x, x_true):
    if x_true is None:
        return None
    nt = np.linalg.norm(x_true)
    return float(np.linalg.norm(x - x_true) / nt) if nt > 0 else float(np.linalg.norm(x))


def _finish(prob, x, info, mode, t0, prec=None, y_resid=None, imag=0.0):
    report = SolveReport(
        mode=mode,
        k=info.k,
        residual_history=info.residual_history,
        threshold=prob.threshold,
        converged=info.converged,
        breakdown=info.breakdown,
        residual_true=float(y_resid) if y_resid is not None else float("nan"),
        residual_final=float(np.linalg.norm(matvec(prob.op, x) - prob.b)),
        rel_error=_rel_error(x, prob.x_true),
        imag_discarded=float(imag),
    )
    if prec is not None:
        report.p1, report.p2, report.q1, report.q2 = prec.p1, prec.p2, prec.q1, prec.q2
        if prec.n2 == 1 and prec.n1 == prob.n:
            report.p2 = report.q2 = None
    if not info.converged:
        log.warning("%s: discrepancy not met after %d iterations", mode, info.k)
    report.wall_time = time.perf_counter() - t0
    return report


def _preconditioned(prob, prec, x0, mode, ell, k_max):
    t0 = time.perf_counter()
    prec = _as_preconditioner(prec)
    if prec.size != prob.n:
        raise ValueError("preconditioner does not match the problem size")

    def A(v):
        return matvec(prob.op, spectral.apply_inverse(prec, v))

    r0 = prob.b - matvec(prob.op, x0)
    y, info = rrgmres(A, r0, ell=ell, threshold=prob.threshold, k_max=k_max)
    resid = np.linalg.norm(A(y) - r0) if info.k else np.linalg.norm(r0)
    x = x0 + spectral.apply_inverse(prec, y) if info.k else np.asarray(x0)
    imag = 0.0
    if np.iscomplexobj(x):
        nx = np.linalg.norm(x)
        imag = np.linalg.norm(x.imag) / nx if nx else 0.0
        x = x.real.copy()
    return x, _finish(prob, x, info, mode, t0, prec, resid, imag)


def solve_preconditioned(prob: ProblemInstance, prec, ell=1, k_max=None):
    """Solve ``T C^{-1} y = r0`` by RRGMRES starting from ``x0 = pinv(C~) b``.

    The approximate solution is ``x_k = x0 + C^{-1} y_k``.  If ``x0`` already
    satisfies the discrepancy principle it is returned with ``k = 0``.

    When the truncation splits a conjugate eigenvalue pair the preconditioner
    is complex; iterations then run in complex arithmetic and the real part
    of ``x_k`` is returned (``report.imag_discarded`` holds the relative size
    of what was dropped, which can only lower the true residual).
    """
    prec = _as_preconditioner(prec)
    x0 = spectral.apply_pseudoinverse(prec, prob.b)
    return _preconditioned(prob, prec, x0, "precond", ell, k_max)


def solve_preconditioned_zero_start(prob: ProblemInstance, prec, ell=1, k_max=None):
    prec = _as_preconditioner(prec)
    return _preconditioned(prob, prec, np.zeros(prob.n), "zerostart", ell, k_max)


def solve_unpreconditioned(prob: ProblemInstance, ell=1, k_max=None):
    t0 = time.perf_counter()
    if np.linalg.norm(prob.b) == 0:
        raise ValueError("right-hand side has zero norm")

    def A(v):
        return matvec(prob.op, v)

    y, info = rrgmres(A, prob.b, ell=ell, threshold=prob.threshold, k_max=k_max)
    resid = np.linalg.norm(A(y) - prob.b)
    return y, _finish(prob, y, info, "noprecond", t0, None, resid)
