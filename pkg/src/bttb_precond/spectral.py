"""Truncated circulant and BCCB preconditioners with noise-adaptive truncation.

The eigenvalues of the optimal circulant approximation of each Toeplitz factor
are ranked by decreasing magnitude.  The ``p`` largest are kept; the rest are
replaced by one (``Fill.UNIT``, the preconditioner) or by zero
(``Fill.ZERO``, used for the initial guess through its pseudoinverse).  The
index ``p`` is chosen from the noise ratio ``eta = eps / ||b||``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import AllZeroSpectrum, DimensionMismatch, RuleMismatch, SingularRetainedEigenvalue
from .structured import (
    IMAG_RESIDUE_TOL,
    BTTBOperator,
    Circulant,
    SymToeplitz,
    closest_circulant,
    unvec,
    vec,
)

__all__ = [
    "Fill",
    "CirculantSpectrum",
    "TruncatedSpectrum",
    "BCCBPreconditioner",
    "Rule",
    "noise_ratio",
    "spectrum",
    "q_objective_1d",
    "q_objective_kron_equal",
    "q_objective_pair",
    "select_q_1d",
    "select_q_kron_equal",
    "select_q_pair",
    "shrink",
    "shrink_pair",
    "build_preconditioner_1d",
    "build_preconditioner_bttb",
    "apply",
    "apply_inverse",
    "apply_pseudoinverse",
]

_EPS = np.finfo(float).eps


class Fill(enum.Enum):
    UNIT = "unit"
    ZERO = "zero"


class Rule(enum.Enum):
    KRON_EQUAL = "kron_equal"
    PAIR = "pair"


@dataclass(frozen=True, eq=False)
class CirculantSpectrum:
    """Eigenvalues of a circulant, indexed by Fourier frequency.

    ``perm[i]`` is the frequency of the eigenvalue of magnitude rank ``i``
    (rank 0 is the largest).  Ties go to the lower frequency.
    """

    lam: np.ndarray
    perm: np.ndarray

    @property
    def n(self) -> int:
        return self.lam.size

    @property
    def magnitudes(self) -> np.ndarray:
        """Magnitudes in decreasing order."""
        return np.abs(self.lam[self.perm])

    @property
    def rank(self) -> np.ndarray:
        """Inverse of ``perm``: the magnitude rank of every frequency."""
        r = np.empty_like(self.perm)
        r[self.perm] = np.arange(self.n)
        return r


@dataclass(frozen=True, eq=False)
class TruncatedSpectrum:
    base: CirculantSpectrum
    p: int
    mode: Fill = Fill.UNIT

    def __post_init__(self):
        p = int(self.p)
        if not 1 <= p <= self.base.n:
            raise ValueError(f"truncation index p={p} outside [1, {self.base.n}]")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "mode", Fill(self.mode))

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def kept(self) -> np.ndarray:
        """Boolean mask over frequencies of the retained eigenvalues."""
        return self.base.rank < self.p

    @property
    def effective(self) -> np.ndarray:
        fill = 1.0 if self.mode is Fill.UNIT else 0.0
        return np.where(self.kept, self.base.lam, fill)

    def with_mode(self, mode: Fill) -> "TruncatedSpectrum":
        return replace(self, mode=Fill(mode))

    def is_conjugate_symmetric(self) -> bool:
        """True when the truncated circulant is a real matrix."""
        eff = self.effective
        return bool(np.array_equal(eff, np.conj(np.roll(eff[::-1], 1))))


def noise_ratio(eps: float, b) -> float:
    nb = float(np.linalg.norm(b))
    if nb <= 0:
        raise ValueError("right-hand side has zero norm")
    if eps < 0 or not np.isfinite(eps):
        raise ValueError(f"noise bound must be finite and nonnegative, got {eps}")
    return eps / nb


def spectrum(C: Circulant) -> CirculantSpectrum:
    lam = np.fft.fft(C.c)
    if C.is_symmetric():
        # real eigenvalues with lam[k] == lam[n - k] bit for bit, so that
        # conjugate pairs tie exactly and stay adjacent in the ordering
        lam = lam.real.copy()
        if lam.size > 1:
            lam[1:] = 0.5 * (lam[1:] + lam[1:][::-1])
        lam = lam.astype(complex)
    n = lam.size
    perm = np.lexsort((np.arange(n), -np.abs(lam)))
    lam.flags.writeable = False
    perm.flags.writeable = False
    return CirculantSpectrum(lam, perm)


def _ratio_terms(s: CirculantSpectrum):
    """Return ``(|lam_q|, |lam_{q+1}|, valid)`` for the candidates q = 1..n-1.

    Candidates whose magnitude is negligible relative to the largest one are
    marked invalid.  A factor of order one offers the single candidate q = 1
    with a unit ratio, so it contributes only a constant to the objective.
    """
    mags = s.magnitudes
    top = mags[0]
    if top == 0:
        raise AllZeroSpectrum("largest eigenvalue magnitude is zero")
    if s.n == 1:
        return mags[:1] / top, mags[:1] / top, np.array([True])
    cur = mags[:-1] / top
    nxt = mags[1:] / top
    return cur, nxt, cur > _EPS


def q_objective_1d(s: CirculantSpectrum, eta: float) -> np.ndarray:
    """Objective values for q = 1..n-1 (index q - 1); ``inf`` where excluded.

    Magnitudes are normalized by the largest one, which leaves the minimizer
    unchanged.
    """
    cur, nxt, ok = _ratio_terms(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        obj = (nxt + eta) / cur
    return np.where(ok, obj, np.inf)


def q_objective_kron_equal(s: CirculantSpectrum, eta: float) -> np.ndarray:
    cur, nxt, ok = _ratio_terms(s)
    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        obj = (nxt**2 + eta) / cur**2
    return np.where(ok, obj, np.inf)


def q_objective_pair(s1: CirculantSpectrum, s2: CirculantSpectrum, eta: float) -> np.ndarray:
    """Objective grid; entry ``[q1 - 1, q2 - 1]``."""
    c1, n1, ok1 = _ratio_terms(s1)
    c2, n2, ok2 = _ratio_terms(s2)
    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        obj = (np.outer(n1, n2) + eta) / np.outer(c1, c2)
    return np.where(np.outer(ok1, ok2), obj, np.inf)


def _argmin_index(obj):
    # np.argmin returns the first occurrence, i.e. the smallest index
    # (lexicographically smallest pair for a 2-D grid in C order)
    return np.unravel_index(int(np.argmin(obj)), obj.shape)


def select_q_1d(s: CirculantSpectrum, eta: float) -> int:
    return int(_argmin_index(q_objective_1d(s, eta))[0]) + 1


def select_q_kron_equal(s: CirculantSpectrum, eta: float) -> int:
    return int(_argmin_index(q_objective_kron_equal(s, eta))[0]) + 1


def select_q_pair(s1: CirculantSpectrum, s2: CirculantSpectrum, eta: float):
    i, j = _argmin_index(q_objective_pair(s1, s2, eta))
    return int(i) + 1, int(j) + 1


def shrink(q: int) -> int:
    """Back off from ``q`` to ``max(1, floor(3q/4))`` to avoid over-preconditioning."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    return max(1, (3 * int(q)) // 4)


def shrink_pair(q):
    return shrink(q[0]), shrink(q[1])


@dataclass(frozen=True, eq=False)
class BCCBPreconditioner:
    """Kronecker product of two truncated circulants, ``C_p1 kron C_p2``.

    ``f1`` acts along the image rows (length ``n1``), ``f2`` along the
    columns (length ``n2``).  The unit-filled spectra define the
    preconditioner and its inverse; the zero-filled companions define the
    pseudoinverse used for the initial guess.  ``q1, q2`` are the raw
    minimizers before shrinking, kept for reporting.
    """

    f1: TruncatedSpectrum
    f2: TruncatedSpectrum
    q1: int | None = None
    q2: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "f1", self.f1.with_mode(Fill.UNIT))
        object.__setattr__(self, "f2", self.f2.with_mode(Fill.UNIT))

    @property
    def p1(self) -> int:
        return self.f1.p

    @property
    def p2(self) -> int:
        return self.f2.p

    @property
    def n1(self) -> int:
        return self.f1.n

    @property
    def n2(self) -> int:
        return self.f2.n

    @property
    def image_shape(self):
        return (self.n2, self.n1)

    @property
    def size(self) -> int:
        return self.n1 * self.n2

    @property
    def is_real(self) -> bool:
        """Whether the truncation keeps conjugate eigenvalue pairs together.

        When it does not, the preconditioner is a complex Hermitian matrix and
        maps real vectors to complex ones.
        """
        return self.f1.is_conjugate_symmetric() and self.f2.is_conjugate_symmetric()

    @classmethod
    def from_1d(cls, unit: TruncatedSpectrum, q: int | None = None) -> "BCCBPreconditioner":
        """Wrap a 1-D truncated circulant with a trivial second factor."""
        trivial = TruncatedSpectrum(spectrum(Circulant([1.0])), 1)
        return cls(unit, trivial, q, None if q is None else 1)

    def spectrum_grid(self, mode: Fill = Fill.UNIT) -> np.ndarray:
        """Effective eigenvalues on the 2-D frequency grid, shape ``(n2, n1)``."""
        e1 = self.f1.with_mode(mode).effective
        e2 = self.f2.with_mode(mode).effective
        return np.outer(e2, e1)

    def condition_number(self) -> float:
        m = np.abs(self.spectrum_grid())
        return float(m.max() / m.min())


def build_preconditioner_1d(T: SymToeplitz, b, eps: float):
    """Return the unit-filled and zero-filled truncated circulants for ``T``.

    See :func:`build_preconditioner_1d_with_q` for the raw minimizer ``q``.
    """
    unit, zero, _ = build_preconditioner_1d_with_q(T, b, eps)
    return unit, zero


def build_preconditioner_1d_with_q(T: SymToeplitz, b, eps: float):
    eta = noise_ratio(eps, b)
    s = spectrum(closest_circulant(T))
    q = select_q_1d(s, eta)
    p = shrink(q)
    return TruncatedSpectrum(s, p, Fill.UNIT), TruncatedSpectrum(s, p, Fill.ZERO), q


def build_preconditioner_bttb(op: BTTBOperator, b, eps: float, rule=None) -> BCCBPreconditioner:
    """Assemble the BCCB preconditioner for ``op`` from the data ``b`` and bound ``eps``.

    ``rule`` defaults to ``Rule.KRON_EQUAL`` when both factors are equal and
    ``Rule.PAIR`` otherwise.
    """
    same = op.t1.n == op.t2.n and np.array_equal(op.t1.t, op.t2.t)
    if rule is None:
        rule = Rule.KRON_EQUAL if same else Rule.PAIR
    rule = Rule(rule)
    eta = noise_ratio(eps, b)
    s1 = spectrum(closest_circulant(op.t1))
    if rule is Rule.KRON_EQUAL:
        if not same:
            raise RuleMismatch("equal-factor rule requires identical Toeplitz factors")
        q1 = q2 = select_q_kron_equal(s1, eta)
        s2 = s1
    else:
        s2 = spectrum(closest_circulant(op.t2))
        q1, q2 = select_q_pair(s1, s2, eta)
    p1, p2 = shrink_pair((q1, q2))
    return BCCBPreconditioner(TruncatedSpectrum(s1, p1), TruncatedSpectrum(s2, p2), q1, q2)


def _as_preconditioner(prec):
    if isinstance(prec, BCCBPreconditioner):
        return prec
    if isinstance(prec, TruncatedSpectrum):
        return BCCBPreconditioner.from_1d(prec)
    if isinstance(prec, tuple) and prec and isinstance(prec[0], TruncatedSpectrum):
        return BCCBPreconditioner.from_1d(prec[0])
    raise TypeError(f"not a preconditioner: {type(prec).__name__}")


def _spectral_apply(prec: BCCBPreconditioner, x, diag, conj_symmetric):
    x = np.asarray(x)
    if x.ndim != 1 or x.size != prec.size:
        raise DimensionMismatch(f"expected a vector of length {prec.size}, got shape {x.shape}")
    X = unvec(x, prec.image_shape)
    Y = np.fft.ifft2(np.fft.fft2(X) * diag)
    if np.iscomplexobj(x) or not conj_symmetric:
        return vec(Y)
    if __debug__ and Y.size:
        scale = np.linalg.norm(x) * max(np.abs(diag).max(), 1.0)
        assert np.abs(Y.imag).max() <= IMAG_RESIDUE_TOL * max(scale, np.finfo(float).tiny)
    return vec(Y.real.copy())


def apply(prec, x) -> np.ndarray:
    """``C_{p1,p2} @ x``.

    Real input gives real output when :attr:`BCCBPreconditioner.is_real`;
    otherwise the exact complex product is returned.
    """
    prec = _as_preconditioner(prec)
    return _spectral_apply(prec, x, prec.spectrum_grid(Fill.UNIT), prec.is_real)


def apply_inverse(prec, y) -> np.ndarray:
    prec = _as_preconditioner(prec)
    grid = prec.spectrum_grid(Fill.UNIT)
    if np.any(grid == 0):
        raise SingularRetainedEigenvalue("a retained eigenvalue is exactly zero")
    return _spectral_apply(prec, y, 1.0 / grid, prec.is_real)


def apply_pseudoinverse(prec, b) -> np.ndarray:
    """Moore-Penrose pseudoinverse of the zero-filled companion applied to ``b``."""
    prec = _as_preconditioner(prec)
    grid = prec.spectrum_grid(Fill.ZERO)
    nz = grid != 0
    inv = np.zeros_like(grid)
    inv[nz] = 1.0 / grid[nz]
    return _spectral_apply(prec, b, inv, prec.is_real)
