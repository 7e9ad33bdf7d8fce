"""Stability experiment over several seeds.

Two solutions from nearby starts share their Brownian paths; the sample mean of
sup_t |mu_t - nu_t|^2 is compared with 3 |mu0 - nu0|^2 exp(12 C^2 T + 3 C1^2 T^2).

    python3 scripts/run_stability.py --config configs/stability.cfg --seeds 11 12 13
"""
import argparse
import sys

import numpy as np

from measure_rates.config import load_config
from measure_rates.experiments import run_stability_experiment


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", default="configs/stability.cfg")
    p.add_argument("--seeds", type=int, nargs="+", default=[11, 12, 13])
    p.add_argument("--n-paths", type=int)
    args = p.parse_args(argv)

    cfg = load_config(args.config)
    if args.n_paths is not None:
        cfg = cfg.replace(n_paths=args.n_paths)
    ok = True
    for seed in args.seeds:
        sim, x0 = cfg.replace(seed=seed).simulation()
        rep = run_stability_experiment(sim, x0, np.asarray(cfg.stability_weights))
        r = rep.rows[0]
        ok &= rep.passed
        print(f"seed {seed}: metric {r['metric']:.4e} +- {r['std_error']:.1e}  "
              f"d0^2 {r['initial_dist_sq']:.4e}  C {r['C']:.4f}  C1 {r['C1']:.4f}  "
              f"envelope {r['envelope']:.4e}  {'PASS' if rep.passed else 'FAIL'}")
    return 0 if ok else 2


if __name__ == "__main__":
    sys.exit(main())
