"""Command-line interface: ``bttb-precond run`` and ``bttb-precond selftest``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiments, selftest


def _seeds(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("no seeds given")
    return out


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _modes(text):
    modes = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in modes if m not in experiments.MODES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown mode(s) {bad}; choose from {experiments.MODES}")
    return modes


def build_parser():
    parser = argparse.ArgumentParser(prog="bttb-precond", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run deblurring / gravity experiments")
    run.add_argument("--problem", choices=experiments.PROBLEMS, default="gravity")
    run.add_argument("--n", type=int, default=None, help="problem size (image side for 2-D problems)")
    run.add_argument("--band", type=int, default=10)
    run.add_argument("--sigma", type=float, default=5 ** 0.5)
    run.add_argument("--d", type=float, default=0.25, help="gravity depth parameter")
    run.add_argument("--image", default=None, help="PGM image for --problem image")
    run.add_argument("--levels", type=_floats, default=[0.001], help="noise levels as fractions")
    run.add_argument("--seeds", type=_seeds, default=list(range(1, 11)), help="e.g. 1..10 or 1,2,5")
    run.add_argument("--modes", type=_modes, default=["precond", "noprecond"])
    run.add_argument("--gamma", type=float, default=1.0)
    run.add_argument("--ell", type=int, default=1)
    run.add_argument("--kmax", type=int, default=200)
    run.add_argument("--out", default="out")
    run.add_argument("--no-images", action="store_true", help="skip PGM output")
    run.add_argument("--pretty", action="store_true", help="print a table like the published ones")

    sub.add_parser("selftest", help="check fast paths against dense oracles")
    return parser


def cmd_run(args):
    try:
        cfg = experiments.ExperimentConfig(
            problem=args.problem, n=args.n, band=args.band, sigma=args.sigma, d=args.d,
            image=args.image, noise_levels=args.levels, seeds=args.seeds, gamma=args.gamma,
            ell=args.ell, k_max=args.kmax, modes=args.modes, output_dir=args.out,
            write_images=not args.no_images)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg.output_dir)
    try:
        rows, _ = experiments.run_experiment(cfg)
        experiments.write_csv(rows, out / "results.csv")
        text = experiments.format_summary(experiments.summarize(rows), args.pretty)
        (out / "summary.txt").write_text(text + "\n")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(text)
    failed = sum(r["converged"] == 0 for r in rows)
    if failed:
        print(f"error: {failed} run(s) did not meet the discrepancy principle (NotConverged)",
              file=sys.stderr)
        return 3
    return 0


def cmd_selftest(args):
    results = selftest.run_all()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return 0 if all(ok for _, ok, _ in results) else 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    return {"run": cmd_run, "selftest": cmd_selftest}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
