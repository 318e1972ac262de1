"""Test problems: Gaussian blur, 1-D gravity surveying, and noise injection.

The constructions follow the ``blur`` and ``gravity`` problems of Hansen's
Regularization Tools.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .structured import BTTBOperator, SymToeplitz, bttb_apply, toeplitz_apply, vec

__all__ = [
    "BlurSpec",
    "GravitySpec",
    "NoisyData",
    "blur_problem",
    "blur_test_image",
    "portrait_image",
    "gravity_problem",
    "add_noise",
]


@dataclass(frozen=True)
class BlurSpec:
    n: int = 64
    band: int = 10
    sigma: float = math.sqrt(5)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 1 <= self.band <= self.n:
            raise ValueError(f"band must lie in [1, n], got {self.band}")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class GravitySpec:
    n: int = 256
    d: float = 0.25

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not self.d > 0:
            raise ValueError("depth d must be positive")


@dataclass(frozen=True, eq=False)
class NoisyData:
    b: np.ndarray
    e: np.ndarray
    eps: float
    level: float
    seed: int


def blur_problem(spec: BlurSpec) -> BTTBOperator:
    """Symmetric BTTB Gaussian blur with zero boundary conditions.

    Each factor is the banded Toeplitz matrix with first column
    ``exp(-j^2 / (2 sigma^2))`` for ``j < band``; the normalization
    ``1 / (2 pi sigma^2)`` is carried by ``alpha``.
    """
    z = np.zeros(spec.n)
    j = np.arange(spec.band)
    z[: spec.band] = np.exp(-(j**2) / (2 * spec.sigma**2))
    t = SymToeplitz(z)
    return BTTBOperator(t, t, 1.0 / (2 * np.pi * spec.sigma**2))


def _mround(v):
    # MATLAB round: half away from zero (arguments here are positive)
    return int(math.floor(v + 0.5))


def _quarter_ellipse(rows, cols, radius2):
    i = np.arange(1, rows + 1)[:, None] / rows
    j = np.arange(1, cols + 1)[None, :] / cols
    q = (i**2 + j**2 < radius2).astype(float)
    q = np.hstack([np.fliplr(q), q])
    return np.vstack([np.flipud(q), q])


def blur_test_image(n: int = 64) -> np.ndarray:
    """Piecewise-constant test image: two nested ellipses, a triangle and a cross.

    Values range over {0, 1, 2, 3, 4}.  The layout follows the image shipped
    with the ``blur`` test problem.
    """
    n2, n3, n6, n12 = _mround(n / 2), _mround(n / 3), _mround(n / 6), _mround(n / 12)
    m = 2 * n6 + 1
    big = n + 2 * n + m
    x = np.zeros((big, big))

    x[2 : 2 + 2 * n6, n3 - 1 : n3 - 1 + 2 * n3] = _quarter_ellipse(n6, n3, 1.0)
    x[n6 : n6 + 2 * n6, n3 - 1 : n3 - 1 + 2 * n3] += 2 * _quarter_ellipse(n6, n3, 0.6)
    x[x == 3] = 2

    x[n3 + n12 : n3 + n12 + n3, 1 : 1 + n3] = 3 * np.triu(np.ones((n3, n3)))

    cross = np.zeros((m, m))
    cross[n6, :] = 1
    cross[:, n6] = 1
    x[n2 + n12 : n2 + n12 + m, n2 : n2 + m] = 4 * cross
    return x[:n, :n].copy()


def portrait_image(n: int = 136) -> np.ndarray:
    """Smooth synthetic head-and-shoulders image in [0, 1].

    Stand-in for a photograph when no image file is supplied.
    """
    u = (np.arange(n) + 0.5) / n
    Y, X = np.meshgrid(u, u, indexing="ij")
    img = 0.25 + 0.15 * X

    def blob(cy, cx, ry, rx, sharp=40.0):
        r = ((Y - cy) / ry) ** 2 + ((X - cx) / rx) ** 2
        return 1.0 / (1.0 + np.exp(np.minimum(sharp * (r - 1.0), 700.0)))

    shoulders = blob(1.05, 0.5, 0.3, 0.45)
    head = blob(0.42, 0.5, 0.3, 0.22)
    img = img * (1 - shoulders) + 0.45 * shoulders
    img = img * (1 - head) + (0.75 - 0.2 * (Y - 0.42)) * head
    hair = blob(0.2, 0.5, 0.14, 0.24) * (Y < 0.3)
    img = img * (1 - hair) + 0.12 * hair
    for cx in (0.41, 0.59):
        img -= 0.45 * blob(0.4, cx, 0.03, 0.05)
    img -= 0.3 * blob(0.58, 0.5, 0.025, 0.09)
    img -= 0.1 * blob(0.49, 0.5, 0.06, 0.025, sharp=8.0)
    return np.clip(img, 0.0, 1.0)


def gravity_problem(spec: GravitySpec):
    """One-dimensional gravity surveying problem.

    Midpoint quadrature on [0, 1] of the kernel ``d (d^2 + (s - t)^2)^(-3/2)``
    with the source ``sin(pi t) + 0.5 sin(2 pi t)``.  The data ``b_clean`` is
    defined as ``T @ x_true``, so the noise-free system is consistent.

    Returns
    -------
    T : SymToeplitz
    x_true, b_clean : ndarray
    """
    n, d = spec.n, spec.d
    t = (np.arange(n) + 0.5) / n
    col = (1.0 / n) * d / (d**2 + (np.arange(n) / n) ** 2) ** 1.5
    T = SymToeplitz(col)
    x = np.sin(np.pi * t) + 0.5 * np.sin(2 * np.pi * t)
    return T, x, toeplitz_apply(T, x)


def add_noise(b_clean, level: float, seed: int) -> NoisyData:
    """Add Gaussian noise of relative norm ``level`` to ``b_clean``.

    ``e = level * ||b_clean|| * g / ||g||`` with ``g`` standard normal from
    ``numpy.random.default_rng(seed)``.
    """
    b_clean = np.asarray(b_clean, dtype=float)
    if level < 0:
        raise ValueError("noise level must be nonnegative")
    nb = np.linalg.norm(b_clean)
    if nb == 0:
        raise ValueError("clean data has zero norm")
    g = np.random.default_rng(seed).standard_normal(b_clean.size)
    e = (level * nb / np.linalg.norm(g)) * g
    return NoisyData(b_clean + e, e, float(np.linalg.norm(e)), float(level), int(seed))


def blurred(op: BTTBOperator, image) -> np.ndarray:
    """Data vector ``op @ vec(image)``."""
    image = np.asarray(image, dtype=float)
    if image.shape != op.image_shape:
        raise ValueError(f"image shape {image.shape} does not match operator {op.image_shape}")
    return bttb_apply(op, vec(image))
