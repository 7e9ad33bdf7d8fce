"""Command line front end.

Subcommands write into ``--out`` (default: current directory):

    simulate   paths.csv   (path, time, x_1..x_n, R)
    price      curve.csv   (maturity, price, yield)
    flow       flow.csv    (time, x_1..x_n, R) along the noiseless flow
    check      report.txt  martingale / supermartingale / invariant diagnostics
    converge   report.txt  atomic-approximation experiment
    stability  report.txt  coupled-solution stability experiment

Exit status: 0 success, 1 invalid input, 2 a checked bound failed.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .experiments import run_convergence_experiment, run_stability_experiment
from .measure_space import DomainError
from .oracles import deterministic_flow
from .operators import short_rate
from .pricing import martingale_residual, supermartingale_check, yield_curve
from .sde_solver import simulate_ensemble
from .simplex import in_simplex

EXIT_OK, EXIT_INVALID, EXIT_BOUND = 0, 1, 2


def _num(x) -> str:
    # repr gives the shortest string that parses back to the same double
    return repr(float(x))


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (str, int)) else _num(v) for v in row])


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig(
        support_points=(0.0, 1.0), weights=(0.5, 0.5))
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def cmd_simulate(cfg: RunConfig, args, out: Path) -> int:
    sim, x0 = cfg.simulation()
    ens = simulate_ensemble(sim, x0)
    stride = max(1, args.stride)
    keep = list(range(0, len(ens.times), stride))
    if keep[-1] != len(ens.times) - 1:
        keep.append(len(ens.times) - 1)
    header = ["path", "time"] + [f"x_{i + 1}" for i in range(sim.n)] + ["R"]
    rows = ([int(p), ens.times[j], *ens.states[p, j], ens.rates[p, j]]
            for p in range(len(ens)) for j in keep)
    _write_csv(out / "paths.csv", header, rows)
    print(f"wrote {len(ens)} paths x {len(keep)} times to {out / 'paths.csv'}")
    return EXIT_OK


def cmd_price(cfg: RunConfig, args, out: Path) -> int:
    mu0 = cfg.initial_measure()
    curve = yield_curve(mu0, cfg.maturities)
    _write_csv(out / "curve.csv", ["maturity", "price", "yield"], curve.rows())
    print(f"wrote {len(curve.maturities)} maturities to {out / 'curve.csv'}")
    return EXIT_OK


def cmd_flow(cfg: RunConfig, args, out: Path) -> int:
    mu0 = cfg.initial_measure()
    t_end = args.t if args.t is not None else (cfg.flow_t if cfg.flow_t is not None else cfg.T)
    if t_end < 0:
        raise ConfigError("flow.t", "must be nonnegative")
    times = np.linspace(0.0, t_end, args.steps + 1)
    header = ["time"] + [f"x_{i + 1}" for i in range(len(mu0))] + ["R"]
    rows = []
    for t in times:
        mu = deterministic_flow(mu0, float(t))
        rows.append([t, *mu.weights, short_rate(mu)])
    _write_csv(out / "flow.csv", header, rows)
    print(f"wrote {len(rows)} rows to {out / 'flow.csv'}")
    return EXIT_OK


def cmd_check(cfg: RunConfig, args, out: Path) -> int:
    sim, x0 = cfg.simulation()
    maturities = cfg.check_maturities or (cfg.T,)
    ens = simulate_ensemble(sim, x0)
    lines = [f"check: n_paths={sim.n_paths} dt={_num(sim.dt)} T={_num(sim.T)} "
             f"scheme={sim.scheme} seed={sim.seed}"]
    ok = True
    slack = 10.0 * sim.dt
    for T in maturities:
        m = martingale_residual(ens, T)
        passed = m.within(3.0, slack)
        ok &= passed
        lines.append(f"martingale T={_num(T)}: residual={m.mean:.6e} se={m.std_error:.6e} "
                     f"bound=3*se+10*dt={3 * m.std_error + slack:.6e} "
                     f"{'PASS' if passed else 'FAIL'}")
        s = supermartingale_check(ens, T)
        passed = s.below(3.0)
        ok &= passed
        lines.append(f"supermartingale T={_num(T)}: mean(R_T-R_0)={s.mean:.6e} se={s.std_error:.6e} "
                     f"bound=3*se={3 * s.std_error:.6e} {'PASS' if passed else 'FAIL'}")
    mass_err = float(np.max(np.abs(ens.states.sum(axis=-1) - 1.0)))
    min_w = float(ens.states.min())
    inv_ok = mass_err <= 1e-12 and min_w >= 0.0 and in_simplex(ens.states, 1e-12)
    ok &= inv_ok
    lines.append(f"invariants: max|sum x - 1|={mass_err:.3e} (bound 1e-12) min x={min_w:.3e} "
                 f"(bound 0) {'PASS' if inv_ok else 'FAIL'}")
    lines.append(f"result: {'PASS' if ok else 'FAIL'}")
    text = "\n".join(lines) + "\n"
    (out / "report.txt").write_text(text)
    print(text, end="")
    return EXIT_OK if ok else EXIT_BOUND


def cmd_converge(cfg: RunConfig, args, out: Path) -> int:
    report = run_convergence_experiment(cfg)
    text = report.to_text()
    (out / "report.txt").write_text(text)
    print(text, end="")
    return EXIT_OK if report.passed else EXIT_BOUND


def cmd_stability(cfg: RunConfig, args, out: Path) -> int:
    if cfg.stability_weights is None:
        raise ConfigError("stability.weights", "missing (weights of the second initial state)")
    sim, x0 = cfg.simulation()
    if len(cfg.stability_weights) != sim.n:
        raise ConfigError("stability.weights", f"need {sim.n} weights")
    report = run_stability_experiment(sim, x0, np.asarray(cfg.stability_weights))
    text = report.to_text()
    (out / "report.txt").write_text(text)
    print(text, end="")
    return EXIT_OK if report.passed else EXIT_BOUND


COMMANDS = {"simulate": cmd_simulate, "price": cmd_price, "flow": cmd_flow,
            "check": cmd_check, "converge": cmd_converge, "stability": cmd_stability}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="measure-rates", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value run configuration file")
    common.add_argument("--seed", type=int, help="override sim.seed")
    common.add_argument("--out", default=".", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "simulate":
            p.add_argument("--stride", type=int, default=1, help="write every k-th time step")
        if name == "flow":
            p.add_argument("--t", type=float, help="final time (default flow.t or sim.T)")
            p.add_argument("--steps", type=int, default=1, help="number of time intervals")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        cfg = _load(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, args, out)
    except (ConfigError, DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
