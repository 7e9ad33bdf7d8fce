"""Atomic-approximation experiment: coupled simulations on refining grids.

    python3 scripts/run_convergence.py --config configs/converge.cfg
    python3 scripts/run_convergence.py --n-list 4 8 16 32 64 --zero-field
"""
import argparse
import sys
from pathlib import Path

from measure_rates.config import RunConfig, load_config
from measure_rates.experiments import run_convergence_experiment


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help="run configuration (default: uniform target, linear field)")
    p.add_argument("--n-list", type=int, nargs="+", help="grid sizes, ascending")
    p.add_argument("--zero-field", action="store_true", help="drop the noise and compare with the continuum flow")
    p.add_argument("--n-paths", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write the report here as well")
    args = p.parse_args(argv)

    cfg = load_config(args.config) if args.config else RunConfig(
        target="uniform", field_builtin="linear", n_paths=200, seed=3)
    if args.zero_field:
        cfg = cfg.replace(field_builtin="zero", factors=(), n_paths=1)
    if args.n_paths is not None:
        cfg = cfg.replace(n_paths=args.n_paths)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    report = run_convergence_experiment(cfg, n_list=args.n_list)
    text = report.to_text()
    print(text, end="")
    if args.out:
        Path(args.out).write_text(text)
    return 0 if report.passed else 2


if __name__ == "__main__":
    sys.exit(main())
