"""Experiment runner: assemble problems, solve across noise levels and seeds, write results."""
from __future__ import annotations

import csv
import logging
import math
import os
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import krylov, spectral
from .pgm import read_image, write_image
from .problems import (
    BlurSpec,
    GravitySpec,
    add_noise,
    blur_problem,
    blur_test_image,
    blurred,
    gravity_problem,
    portrait_image,
)
from .structured import BTTBOperator, unvec, vec

log = logging.getLogger(__name__)

PROBLEMS = ("blur", "gravity", "image")
MODES = ("precond", "noprecond", "zerostart")
COLUMNS = ["problem", "level", "seed", "mode", "p1", "p2", "q1", "q2", "k",
           "rel_error", "residual_final", "wall_ms", "converged"]


@dataclass
class ExperimentConfig:
    problem: str = "gravity"
    n: int | None = None
    band: int = 10
    sigma: float = math.sqrt(5)
    d: float = 0.25
    image: str | None = None
    noise_levels: list = field(default_factory=lambda: [0.001])
    seeds: list = field(default_factory=lambda: list(range(1, 11)))
    gamma: float = 1.0
    ell: int = 1
    k_max: int = 200
    modes: list = field(default_factory=lambda: ["precond", "noprecond"])
    output_dir: str = "out"
    write_images: bool = True

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}")
        if not self.noise_levels or not self.seeds or not self.modes:
            raise ValueError("need at least one noise level, seed and mode")
        bad = set(self.modes) - set(MODES)
        if bad:
            raise ValueError(f"unknown modes {sorted(bad)}")
        if any(lv < 0 for lv in self.noise_levels):
            raise ValueError("noise levels must be nonnegative")
        if self.gamma < 1 or self.ell < 1 or self.k_max < 1:
            raise ValueError("need gamma >= 1, ell >= 1, kmax >= 1")
        if self.n is None:
            self.n = {"blur": 64, "gravity": 256, "image": 136}[self.problem]


@dataclass
class Setup:
    """The noise-free problem shared by every run of one config."""

    op: object
    x_true: np.ndarray
    b_clean: np.ndarray
    image_shape: tuple | None


def build_setup(cfg: ExperimentConfig) -> Setup:
    if cfg.problem == "gravity":
        T, x, b = gravity_problem(GravitySpec(cfg.n, cfg.d))
        return Setup(T, x, b, None)
    if cfg.problem == "blur":
        img = blur_test_image(cfg.n)
    elif cfg.image is not None:
        img = read_image(cfg.image, require_square=True)
    else:
        img = portrait_image(cfg.n)
    op = blur_problem(BlurSpec(img.shape[0], cfg.band, cfg.sigma))
    return Setup(op, vec(img), blurred(op, img), img.shape)


def run_single(cfg: ExperimentConfig, setup: Setup, level: float, seed: int, mode: str):
    """One solve.  Returns ``(x, report, noisy)``."""
    noisy = add_noise(setup.b_clean, level, seed)
    prob = krylov.ProblemInstance(setup.op, noisy.b, noisy.eps, cfg.gamma, setup.x_true, setup.b_clean)
    if mode == "noprecond":
        x, rep = krylov.solve_unpreconditioned(prob, cfg.ell, cfg.k_max)
        return x, rep, noisy
    if isinstance(setup.op, BTTBOperator):
        prec = spectral.build_preconditioner_bttb(setup.op, noisy.b, noisy.eps)
    else:
        unit, _, q = spectral.build_preconditioner_1d_with_q(setup.op, noisy.b, noisy.eps)
        prec = spectral.BCCBPreconditioner.from_1d(unit, q)
    solve = krylov.solve_preconditioned if mode == "precond" else krylov.solve_preconditioned_zero_start
    x, rep = solve(prob, prec, cfg.ell, cfg.k_max)
    return x, rep, noisy


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _row(cfg, level, seed, mode, rep):
    return {
        "problem": cfg.problem, "level": repr(float(level)), "seed": seed, "mode": mode,
        "p1": _fmt(rep.p1), "p2": _fmt(rep.p2), "q1": _fmt(rep.q1), "q2": _fmt(rep.q2),
        "k": rep.k, "rel_error": _fmt(rep.rel_error), "residual_final": _fmt(rep.residual_final),
        "wall_ms": f"{rep.wall_time * 1e3:.3f}", "converged": int(rep.converged),
    }


def _tag(cfg, level, seed):
    return f"{cfg.problem}_L{level:g}_s{seed}"


def _max_workers():
    try:
        return max(1, int(os.environ.get("BTTB_PRECOND_THREADS", "1")))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig):
    """Run every (level, seed, mode) combination; return the CSV rows in config order."""
    setup = build_setup(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    scale = float(np.max(np.abs(setup.x_true))) or 1.0
    jobs = [(lv, s, m) for lv in cfg.noise_levels for s in cfg.seeds for m in cfg.modes]

    def work(job):
        level, seed, mode = job
        x, rep, noisy = run_single(cfg, setup, level, seed, mode)
        if setup.image_shape is not None and cfg.write_images:
            tag = _tag(cfg, level, seed)
            write_image(unvec(x, setup.image_shape) / scale, out / f"restored_{tag}_{mode}.pgm")
            if mode == cfg.modes[0]:
                write_image(unvec(noisy.b, setup.image_shape) / scale, out / f"noisy_{tag}.pgm")
        return _row(cfg, level, seed, mode, rep), rep

    with ThreadPoolExecutor(_max_workers()) as pool:
        results = list(pool.map(work, jobs))
    return [r for r, _ in results], [rep for _, rep in results]


def write_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=COLUMNS)
        w.writeheader()
        w.writerows(rows)


def summarize(rows):
    """Median k and relative error per (level, mode), in first-seen order."""
    groups = {}
    for r in rows:
        groups.setdefault((r["level"], r["mode"]), []).append(r)
    summary = []
    for (level, mode), rs in groups.items():
        errs = [float(r["rel_error"]) for r in rs if r["rel_error"]]
        ps = [int(r["p1"]) for r in rs if r["p1"]]
        summary.append({
            "level": float(level), "mode": mode,
            "p": statistics.median(ps) if ps else None,
            "k": statistics.median(int(r["k"]) for r in rs),
            "rel_error": statistics.median(errs) if errs else None,
            "unconverged": sum(r["converged"] == 0 for r in rs),
        })
    return summary


def format_summary(summary, pretty=False):
    lines = []
    if pretty:
        lines.append(f"{'% noise':>8}  {'p':>5}  {'k':>6}  {'rel. error':>10}")
        for s in summary:
            p = "-" if s["mode"] == "noprecond" else f"{s['p']:g}"
            label = p if s["mode"] != "zerostart" else f"{p}(0)"
            err = f"{s['rel_error']:.4f}" if s["rel_error"] is not None else "n/a"
            lines.append(f"{100 * s['level']:>8.3g}  {label:>5}  {s['k']:>6g}  {err:>10}")
    else:
        for s in summary:
            err = f"{s['rel_error']:.4f}" if s["rel_error"] is not None else "n/a"
            lines.append(f"noise {100 * s['level']:.3g}%  mode {s['mode']:<10} median p "
                         f"{'-' if s['p'] is None else format(s['p'], 'g')}  median k {s['k']:g}  "
                         f"median rel_error {err}  unconverged {s['unconverged']}")
    return "\n".join(lines)
