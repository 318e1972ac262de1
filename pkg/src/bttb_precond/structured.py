"""Compact symmetric Toeplitz, circulant, skew-circulant and BTTB operators.

All matrices are stored by their first column.  Products are computed with
unnormalized forward FFTs (so the eigenvalues of a circulant are literally the
DFT of its first column) and an inverse FFT carrying the ``1/n`` factor.

Vectors that represent images use the column-major convention: an image ``X``
of shape ``(n2, n1)`` is stored as ``x = vec(X) = X.ravel(order="F")``, so that
``(T1 kron T2) x = vec(T2 @ X @ T1.T)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

__all__ = [
    "SymToeplitz",
    "Circulant",
    "SkewCirculant",
    "BTTBOperator",
    "vec",
    "unvec",
    "closest_circulant",
    "split_circulant_skew",
    "circulant_apply",
    "skew_circulant_apply",
    "toeplitz_apply",
    "bttb_apply",
    "matvec",
]

# relative bound on the imaginary residue of an inverse FFT that is expected
# to be real
IMAG_RESIDUE_TOL = 1e-12


def _column(values, name):
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SymToeplitz:
    """Symmetric Toeplitz matrix with ``T[i, j] = t[|i - j|]``."""

    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", _column(self.t, "t"))

    @property
    def n(self) -> int:
        return self.t.size

    @property
    def shape(self):
        return (self.n, self.n)

    def __matmul__(self, x):
        return toeplitz_apply(self, x)


@dataclass(frozen=True, eq=False)
class Circulant:
    """Circulant matrix with ``C[i, j] = c[(i - j) mod n]``."""

    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c", _column(self.c, "c"))

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def shape(self):
        return (self.n, self.n)

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.c[1:], self.c[1:][::-1]))

    def eigenvalues(self) -> np.ndarray:
        return np.fft.fft(self.c)

    def __matmul__(self, x):
        return circulant_apply(self, x)


@dataclass(frozen=True, eq=False)
class SkewCirculant:
    """Skew-circulant matrix.

    ``S[i, j] = s[i - j]`` on and below the diagonal and ``-s[n + i - j]``
    above it.  It is diagonalized by the Fourier matrix after modulation with
    ``diag(exp(1j * pi * k / n))``.
    """

    s: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "s", _column(self.s, "s"))

    @property
    def n(self) -> int:
        return self.s.size

    @property
    def shape(self):
        return (self.n, self.n)

    def modulation(self) -> np.ndarray:
        return np.exp(1j * np.pi * np.arange(self.n) / self.n)

    def eigenvalues(self) -> np.ndarray:
        return np.fft.fft(self.modulation() * self.s)

    def __matmul__(self, x):
        return skew_circulant_apply(self, x)


@dataclass(frozen=True, eq=False)
class BTTBOperator:
    """Scaled Kronecker product ``alpha * (T1 kron T2)`` of symmetric Toeplitz factors.

    Operands are column-stacked images of shape ``(n2, n1)``.  A factor of
    order one turns this into a plain (scaled) Toeplitz operator.
    """

    t1: SymToeplitz
    t2: SymToeplitz
    alpha: float = 1.0

    def __post_init__(self):
        if not isinstance(self.t1, SymToeplitz) or not isinstance(self.t2, SymToeplitz):
            raise TypeError("BTTBOperator factors must be SymToeplitz instances")
        alpha = float(self.alpha)
        if not np.isfinite(alpha):
            raise ValueError("alpha must be finite")
        object.__setattr__(self, "alpha", alpha)

    @property
    def n1(self) -> int:
        return self.t1.n

    @property
    def n2(self) -> int:
        return self.t2.n

    @property
    def image_shape(self):
        return (self.n2, self.n1)

    @property
    def size(self) -> int:
        return self.n1 * self.n2

    @property
    def shape(self):
        return (self.size, self.size)

    @classmethod
    def from_toeplitz(cls, t: SymToeplitz, alpha: float = 1.0) -> "BTTBOperator":
        return cls(t, SymToeplitz([1.0]), alpha)

    def __matmul__(self, x):
        return bttb_apply(self, x)


def vec(image) -> np.ndarray:
    """Stack the columns of ``image`` into one vector."""
    return np.asarray(image).ravel(order="F")


def unvec(x, shape) -> np.ndarray:
    """Inverse of :func:`vec`."""
    x = np.asarray(x)
    if x.size != shape[0] * shape[1]:
        raise DimensionMismatch(f"vector of length {x.size} cannot hold an image of shape {shape}")
    return x.reshape(shape, order="F")


def _as_real_if(z, real, scale):
    """Drop the imaginary part of ``z`` when a real result is expected."""
    if not real:
        return z
    if __debug__ and z.size:
        residue = np.max(np.abs(z.imag))
        assert residue <= IMAG_RESIDUE_TOL * max(scale, np.finfo(float).tiny), (
            f"imaginary residue {residue:.3e} exceeds tolerance")
    return z.real.copy()


def _check_len(x, n, axis=0):
    if x.shape[axis] != n:
        raise DimensionMismatch(f"expected length {n} along axis {axis}, got {x.shape[axis]}")


def _circulant_along(eig, x, axis):
    shape = [1] * x.ndim
    shape[axis] = -1
    return np.fft.ifft(np.fft.fft(x, axis=axis) * eig.reshape(shape), axis=axis)


def _skew_along(eig, mod, x, axis):
    shape = [1] * x.ndim
    shape[axis] = -1
    mod = mod.reshape(shape)
    return np.conj(mod) * _circulant_along(eig, mod * x, axis)


def closest_circulant(T: SymToeplitz) -> Circulant:
    """Return the circulant nearest to ``T`` in the Frobenius norm (T. Chan's choice).

    Each wrapped diagonal of the circulant is the average of the Toeplitz
    entries lying on it: ``c[j] = ((n - j) t[j] + j t[n - j]) / n``.
    """
    t = T.t
    n = t.size
    j = np.arange(1, n)
    c = t.copy()
    c[1:] = ((n - j) * t[1:] + j * t[n - j]) / n
    return Circulant(c)


def split_circulant_skew(T: SymToeplitz):
    """Split ``T`` into a circulant plus a skew-circulant, ``T = C0 + Cpi``."""
    t = T.t
    c0 = t.copy()
    s = np.zeros_like(t)
    if t.size > 1:
        wrap = t[1:][::-1]
        c0[1:] = (t[1:] + wrap) / 2
        s[1:] = (t[1:] - wrap) / 2
    return Circulant(c0), SkewCirculant(s)


def circulant_apply(C: Circulant, x) -> np.ndarray:
    x = np.asarray(x)
    _check_len(x, C.n)
    eig = C.eigenvalues()
    y = _circulant_along(eig, x, 0)
    real = not np.iscomplexobj(x)
    return _as_real_if(y, real, np.linalg.norm(x) * np.abs(eig).max())


def skew_circulant_apply(S: SkewCirculant, x) -> np.ndarray:
    x = np.asarray(x)
    _check_len(x, S.n)
    eig = S.eigenvalues()
    y = _skew_along(eig, S.modulation(), x, 0)
    real = not np.iscomplexobj(x)
    return _as_real_if(y, real, np.linalg.norm(x) * np.abs(eig).max())


def _toeplitz_along(T: SymToeplitz, x, axis):
    """Apply ``T`` along one axis through the circulant/skew-circulant split."""
    if T.n == 1:
        return T.t[0] * x
    c0, cpi = split_circulant_skew(T)
    y = _circulant_along(c0.eigenvalues(), x, axis)
    y += _skew_along(cpi.eigenvalues(), cpi.modulation(), x, axis)
    return y


def toeplitz_apply(T: SymToeplitz, x) -> np.ndarray:
    """``T @ x`` in O(n log n) operations."""
    x = np.asarray(x)
    if x.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {x.shape}")
    _check_len(x, T.n)
    y = _toeplitz_along(T, x, 0)
    real = not np.iscomplexobj(x)
    return _as_real_if(y, real, np.linalg.norm(x) * np.abs(T.t).sum() * 2)


def bttb_apply(op: BTTBOperator, x) -> np.ndarray:
    """``alpha * (T1 kron T2) @ x`` computed as ``vec(T2 X T1^T)``."""
    x = np.asarray(x)
    if x.ndim != 1 or x.size != op.size:
        raise DimensionMismatch(f"expected a vector of length {op.size}, got shape {x.shape}")
    X = unvec(x, op.image_shape)
    Y = _toeplitz_along(op.t2, X, 0)
    Y = _toeplitz_along(op.t1, Y, 1)
    Y = op.alpha * Y
    real = not np.iscomplexobj(x)
    bound = np.linalg.norm(x) * abs(op.alpha) * 4 * np.abs(op.t1.t).sum() * np.abs(op.t2.t).sum()
    return vec(_as_real_if(np.asarray(Y), real, bound))


def matvec(op, x) -> np.ndarray:
    """Apply either a :class:`SymToeplitz` or a :class:`BTTBOperator`."""
    if isinstance(op, BTTBOperator):
        return bttb_apply(op, x)
    if isinstance(op, SymToeplitz):
        return toeplitz_apply(op, x)
    raise TypeError(f"unsupported operator type {type(op).__name__}")
