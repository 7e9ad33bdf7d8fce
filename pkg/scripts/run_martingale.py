"""Discounted-bond martingale and short-rate supermartingale diagnostics.

Simulates one ensemble per (field, scheme) and prints the residual
mean(exp(-int R)) - P(0, T) and mean(R_T - R_0) with standard errors.

    python3 scripts/run_martingale.py --n-paths 100000
"""
import argparse
import sys
import time

from measure_rates.measure_space import Interval
from measure_rates.pricing import martingale_residual, supermartingale_check
from measure_rates.sde_solver import SCHEMES, SimulationConfig, simulate_ensemble
from measure_rates.volatility import builtin_fields


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--n-paths", type=int, default=20_000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--maturities", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args(argv)

    iv = Interval(0, 1)
    T = max(args.maturities)
    ok = True
    for name, field in builtin_fields(iv, args.beta).items():
        support = [0.0, 1.0] if field.d == 1 else [0.0, 0.5, 1.0]
        x0 = [1.0 / len(support)] * len(support)
        for scheme in SCHEMES:
            t0 = time.perf_counter()
            cfg = SimulationConfig(support, field, args.dt, T, scheme, args.seed, args.n_paths)
            ens = simulate_ensemble(cfg, x0, record_times=args.maturities, workers=args.workers)
            print(f"{name} / {scheme} ({time.perf_counter() - t0:.1f}s)")
            for t in args.maturities:
                m = martingale_residual(ens, t)
                s = supermartingale_check(ens, t)
                m_ok, s_ok = m.within(3.0, 10 * args.dt), s.below(3.0)
                ok &= m_ok and s_ok
                print(f"  T={t:g}  residual {m.mean:+.3e} se {m.std_error:.2e} "
                      f"[{'ok' if m_ok else 'FAIL'}]  R_T-R_0 {s.mean:+.4f} se {s.std_error:.1e} "
                      f"[{'ok' if s_ok else 'FAIL'}]")
    return 0 if ok else 2


if __name__ == "__main__":
    sys.exit(main())
