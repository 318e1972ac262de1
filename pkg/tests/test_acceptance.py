"""Exit criteria.  Each test records one PASS/FAIL line shown in the terminal summary."""
import csv
import statistics

import numpy as np
import pytest

from bttb_precond import cli, experiments, selftest, vec
from bttb_precond.experiments import ExperimentConfig, build_setup, run_single

from conftest import ACCEPTANCE_LINES

SEEDS = list(range(1, 11))


def report(number, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}")
    assert ok, detail


def _runs(cfg, level, mode):
    setup = build_setup(cfg)
    return [run_single(cfg, setup, level, s, mode)[1] for s in SEEDS]


@pytest.fixture(scope="module")
def gravity():
    cfg = ExperimentConfig(problem="gravity", n=256)
    return {
        (1e-3, "precond"): _runs(cfg, 1e-3, "precond"),
        (1e-3, "noprecond"): _runs(cfg, 1e-3, "noprecond"),
        (1e-3, "zerostart"): _runs(cfg, 1e-3, "zerostart"),
        (1e-4, "precond"): _runs(cfg, 1e-4, "precond"),
    }


@pytest.fixture(scope="module")
def blur():
    cfg = ExperimentConfig(problem="blur", n=64, band=10, sigma=5**0.5)
    return {(lv, m): _runs(cfg, lv, m) for lv in (1e-3, 1e-4) for m in ("precond", "noprecond")}


def med(reps, attr):
    return statistics.median(getattr(r, attr) for r in reps)


def test_c01_gravity_0p1(gravity):
    pre, non = gravity[(1e-3, "precond")], gravity[(1e-3, "noprecond")]
    n_p3 = sum(r.p1 == 3 for r in pre)
    k, e, e_non = med(pre, "k"), med(pre, "rel_error"), med(non, "rel_error")
    parts = {
        f"p=3 in {n_p3}/10 seeds (need >= 8)": n_p3 >= 8,
        f"median k {k} in [6, 10]": 6 <= k <= 10,
        f"median rel_error {e:.4f} in [0.010, 0.022]": 0.010 <= e <= 0.022,
        f"unpreconditioned median rel_error {e_non:.4f} >= preconditioned {e:.4f}": e_non >= e,
    }
    failed = [s for s, ok in parts.items() if not ok]
    report(1, not failed, "gravity 0.1%: " + "; ".join(
        (("FAILED " if s in failed else "") + s) for s in parts))


def test_c02_gravity_0p01(gravity):
    pre = gravity[(1e-4, "precond")]
    ps = sorted({r.p1 for r in pre})
    k, e = med(pre, "k"), med(pre, "rel_error")
    ok = ps == [3] and 8 <= k <= 12 and 0.005 <= e <= 0.012
    report(2, ok, f"gravity 0.01%: p values {ps}, median k {k} in [8, 12], "
                  f"median rel_error {e:.4f} in [0.005, 0.012]")


def test_c03_blur_0p1(blur):
    pre, non = blur[(1e-3, "precond")], blur[(1e-3, "noprecond")]
    p, k, kn = med(pre, "p1"), med(pre, "k"), med(non, "k")
    e, en = med(pre, "rel_error"), med(non, "rel_error")
    ok = (12 <= p <= 16 and 14 <= k <= 24 and 26 <= kn <= 40 and k <= 0.7 * kn
          and abs(e - 0.34) <= 0.25 * 0.34 and abs(en - 0.34) <= 0.25 * 0.34)
    report(3, ok, f"blur 0.1%: p {p} in [12, 16], k {k} in [14, 24], unpreconditioned k {kn} "
                  f"in [26, 40], ratio {k / kn:.2f} <= 0.7, rel_error {e:.4f}/{en:.4f} within 25% of 0.34")


def test_c04_blur_0p01(blur):
    pre, non = blur[(1e-4, "precond")], blur[(1e-4, "noprecond")]
    p, k, kn = med(pre, "p1"), med(pre, "k"), med(non, "k")
    ok = 15 <= p <= 19 and 34 <= k <= 52 and 75 <= kn <= 105
    report(4, ok, f"blur 0.01%: p {p} in [15, 19], k {k} in [34, 52], unpreconditioned k {kn} in [75, 105]")


def test_c05_zero_start(gravity):
    pre, zero = gravity[(1e-3, "precond")], gravity[(1e-3, "zerostart")]
    k, kz = med(pre, "k"), med(zero, "k")
    e, ez = med(pre, "rel_error"), med(zero, "rel_error")
    report(5, kz > k and ez > e, f"zero start: median k {kz} > {k}, rel_error {ez:.4f} > {e:.4f}")


def test_c06_oracle_equivalence():
    rng = np.random.default_rng(6)
    ok, detail = selftest.check_applies(rng, count=200)
    ok2, detail2 = selftest.check_preconditioner(rng, count=50)
    # largest admissible dimension
    from bttb_precond import BTTBOperator, SymToeplitz, bttb_apply, toeplitz_apply
    from bttb_precond.oracle import dense_materialize
    worst = 0.0
    for op, fn in [(SymToeplitz(rng.standard_normal(4096)), toeplitz_apply),
                   (BTTBOperator(SymToeplitz(rng.standard_normal(64)),
                                 SymToeplitz(rng.standard_normal(64)), 0.3), bttb_apply)]:
        x = rng.standard_normal(4096)
        ref = dense_materialize(op) @ x
        worst = max(worst, np.linalg.norm(fn(op, x) - ref) / np.linalg.norm(ref))
    ok3 = worst <= 1e-10
    report(6, ok and ok2 and ok3, f"FFT paths vs dense: {detail}; preconditioner {detail2}; "
                                  f"n=4096 max relative error {worst:.2e}")


def test_c07_frobenius_optimality():
    ok, detail = selftest.check_closest_circulant(np.random.default_rng(7), count=200)
    report(7, ok, f"closest circulant vs brute-force projection (tol 1e-12): {detail}")


def test_c08_split_exactness():
    ok, detail = selftest.check_split(np.random.default_rng(8), count=200)
    report(8, ok, f"C0 + Cpi = T (tol 1e-14): {detail}")


def test_c09_perturbation_sweep():
    ok, detail = selftest.check_prop1(500)
    report(9, ok, f"perturbation bound sweep: {detail}")


def test_c10_residual_bookkeeping(gravity, blur):
    reps = [r for group in (gravity, blur) for rs in group.values() for r in rs]
    mono = all(np.all(np.diff(r.residual_history) <= 0) for r in reps)
    worst = max(abs(r.residual_history[-1] - r.residual_true) / r.residual_true for r in reps)
    report(10, mono and worst <= 1e-8,
           f"{len(reps)} solves: histories non-increasing={mono}, "
           f"max |reported - true| / true = {worst:.2e} (tol 1e-8)")


def test_c11_identity_on_complement():
    from bttb_precond import BlurSpec, add_noise, apply, blur_problem, blur_test_image, build_preconditioner_bttb
    from bttb_precond.problems import blurred
    op = blur_problem(BlurSpec())
    nd = add_noise(blurred(op, blur_test_image(64)), 1e-3, 1)
    prec = build_preconditioner_bttb(op, nd.b, nd.eps)
    rng = np.random.default_rng(11)
    k1s = np.flatnonzero(~prec.f1.kept)
    k2s = np.flatnonzero(~prec.f2.kept)
    worst = 0.0
    idx = np.arange(64)
    for _ in range(50):
        k1, k2 = rng.choice(k1s), rng.choice(k2s)
        mode = vec(np.outer(np.exp(2j * np.pi * k2 * idx / 64), np.exp(2j * np.pi * k1 * idx / 64)))
        worst = max(worst, np.max(np.abs(apply(prec, mode) - mode)))
    report(11, worst <= 1e-12, f"50 Fourier modes outside the retained {prec.p1}x{prec.p2} block "
                               f"are fixed; max deviation {worst:.2e} (rounding tol 1e-12)")


def test_c12_determinism(tmp_path):
    args = ["run", "--problem", "blur", "--n", "64", "--levels", "0.001", "--seeds", "1..3",
            "--modes", "precond,noprecond,zerostart", "--no-images"]
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "b")]) == 0

    def rows(d):
        with open(d / "results.csv", newline="") as fh:
            return [{k: v for k, v in r.items() if k != "wall_ms"} for r in csv.DictReader(fh)]

    a, b = rows(tmp_path / "a"), rows(tmp_path / "b")
    report(12, a == b and len(a) == 9, f"two identical runs give identical CSV ({len(a)} rows, wall_ms excluded)")
