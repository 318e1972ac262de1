"""Oracle-versus-fast consistency checks behind ``bttb-precond selftest``."""
from __future__ import annotations

import numpy as np

from . import oracle, spectral, structured


def _rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), np.finfo(float).tiny)


def _random_symtoeplitz(rng, n):
    return structured.SymToeplitz(rng.standard_normal(n) * np.exp(-0.3 * np.arange(n)))


def check_closest_circulant(rng, count=200):
    worst = 0.0
    for _ in range(count):
        T = _random_symtoeplitz(rng, int(rng.integers(2, 17)))
        fast = structured.closest_circulant(T).c
        ref = oracle.brute_force_closest_circulant(T).c
        worst = max(worst, np.max(np.abs(fast - ref)) / max(np.max(np.abs(ref)), 1e-300))
    return worst <= 1e-12, f"max relative deviation {worst:.2e} over {count} instances"


def check_split(rng, count=100):
    worst = 0.0
    for _ in range(count):
        T = _random_symtoeplitz(rng, int(rng.integers(1, 33)))
        c0, cpi = structured.split_circulant_skew(T)
        diff = oracle.dense_materialize(c0) + oracle.dense_materialize(cpi) - oracle.dense_materialize(T)
        worst = max(worst, np.max(np.abs(diff)))
    return worst <= 1e-14, f"max entrywise error {worst:.2e}"


def check_applies(rng, count=200):
    worst = 0.0
    for i in range(count):
        kind = i % 4
        if kind == 3:
            n1, n2 = int(rng.integers(1, 17)), int(rng.integers(1, 17))
            op = structured.BTTBOperator(_random_symtoeplitz(rng, n1), _random_symtoeplitz(rng, n2),
                                         rng.uniform(0.5, 2))
            x = rng.standard_normal(n1 * n2)
            fast = structured.bttb_apply(op, x)
        else:
            n = int(rng.integers(1, 65))
            x = rng.standard_normal(n)
            if kind == 0:
                op = _random_symtoeplitz(rng, n)
                fast = structured.toeplitz_apply(op, x)
            elif kind == 1:
                op = structured.Circulant(rng.standard_normal(n))
                fast = structured.circulant_apply(op, x)
            else:
                op = structured.SkewCirculant(rng.standard_normal(n))
                fast = structured.skew_circulant_apply(op, x)
        worst = max(worst, _rel(fast, oracle.dense_materialize(op) @ x))
    return worst <= 1e-10, f"max relative error {worst:.2e} over {count} instances"


def check_preconditioner(rng, count=50):
    worst = 0.0
    for _ in range(count):
        n1, n2 = int(rng.integers(2, 9)), int(rng.integers(2, 9))
        s1 = spectral.spectrum(structured.closest_circulant(_random_symtoeplitz(rng, n1)))
        s2 = spectral.spectrum(structured.closest_circulant(_random_symtoeplitz(rng, n2)))
        prec = spectral.BCCBPreconditioner(
            spectral.TruncatedSpectrum(s1, int(rng.integers(1, n1 + 1))),
            spectral.TruncatedSpectrum(s2, int(rng.integers(1, n2 + 1))))
        x = rng.standard_normal(n1 * n2) + 1j * rng.standard_normal(n1 * n2)
        D = oracle.dense_materialize(prec)
        worst = max(worst, _rel(spectral.apply(prec, x), D @ x),
                    _rel(spectral.apply_inverse(prec, spectral.apply(prec, x)), x))
    return worst <= 1e-10, f"max relative error {worst:.2e}"


def check_prop1(count=500):
    results = oracle.prop1_sweep(count)
    held = sum(r.holds for r in results)
    return held == count, f"{held}/{count} instances hold"


def run_all(seed=0):
    """Run every check; return a list of ``(name, passed, detail)``."""
    rng = np.random.default_rng(seed)
    checks = [
        ("closest circulant vs projection", lambda: check_closest_circulant(rng)),
        ("circulant/skew split exactness", lambda: check_split(rng)),
        ("FFT applies vs dense", lambda: check_applies(rng)),
        ("BCCB preconditioner vs dense", lambda: check_preconditioner(rng)),
        ("perturbation bound sweep", check_prop1),
    ]
    out = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a crashed selftest
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
