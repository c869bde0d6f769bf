"""Command-line entry point: ``mmparareal <subcommand> ...``.

Exit codes: 0 success, 2 assumption violation, 3 insufficient data,
4 I/O error, 5 numerical failure.
"""

import argparse
import logging
import sys
from pathlib import Path

from .. import oumodel
from ..errors import (
    AssumptionViolation,
    ConfigError,
    DomainError,
    InsufficientDataError,
    SingularMatrixError,
    StabilityError,
)
from ..parareal import run_micro_macro
from ..sampler import EnsembleConfig
from . import csvio
from .config import load_config
from .experiments import fit_slopes, mc_validate, quantity_problem, sweep_epsilon

EXIT_OK = 0
EXIT_ASSUMPTION = 2
EXIT_INSUFFICIENT = 3
EXIT_IO = 4
EXIT_NUMERIC = 5

log = logging.getLogger("mmparareal")


def cmd_check_assumptions(args):
    cfg = load_config(args.config)
    report = oumodel.check_assumptions(cfg.ou(cfg.eps_grid[0]), cfg.eps_grid)
    csvio.write_report(report, args.out)
    if not report.all_satisfied:
        for msg in report.failures():
            log.error("assumption violated: %s", msg)
        return EXIT_ASSUMPTION
    log.info("assumptions hold on %d eps values (mu_sigma_minus=%.6g)", len(cfg.eps_grid), report.mu_sigma_minus)
    return EXIT_OK


def cmd_sweep(args):
    cfg = load_config(args.config)
    rows = sweep_epsilon(cfg, workers=args.workers)
    csvio.write_sweep(rows, args.out)
    stub = Path(args.out).with_suffix(".plot.py")
    csvio.write_plot_stub(args.out, stub)
    log.info("wrote %d rows to %s (plot script: %s)", len(rows), args.out, stub)
    return EXIT_OK


def cmd_fit_slopes(args):
    rows = csvio.read_sweep(args.inp)
    fits = fit_slopes(rows, floor=args.floor, skip_insufficient=not args.strict)
    if not fits:
        raise InsufficientDataError(f"no group has 3 points above floor {args.floor:g}")
    csvio.write_slopes(fits, args.out)
    for f in fits:
        log.info("%-8s %-5s k=%-2d slope=%.3f (%d pts)", f.quantity, f.level, f.k, f.slope, f.points_used)
    return EXIT_OK


def cmd_run(args):
    cfg = load_config(args.config)
    p = cfg.ou(args.eps)
    p.validate()
    traces = {}
    for quantity in ("mean", "variance"):
        F, C, pcfg, u0, mu_minus = quantity_problem(cfg, args.eps, quantity)
        pcfg.check_boundary_layer(args.eps, mu_minus)
        traces[quantity] = run_micro_macro(F, C, pcfg, u0)
    csvio.write_trace(traces, args.out)
    return EXIT_OK


def cmd_mc_validate(args):
    cfg = load_config(args.config)
    ens = EnsembleConfig(paths=args.paths, dt=args.dt, T=args.T, seed=cfg.seed)
    report = mc_validate(cfg, ens, args.eps)
    csvio.write_validation(report, args.out)
    for r in report.rows:
        log.info("%-5s empirical=%.6g ode=%.6g se=%.3g z=%.2f", r.component, r.empirical, r.moment_ode, r.std_error, r.z)
    if not report.passed:
        log.error("moment check failed (max |z| = %.2f)", report.max_abs_z)
        return EXIT_NUMERIC
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="mmparareal", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check-assumptions", help="eigenvalue / decay-rate report over the eps grid")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_check_assumptions)

    s = sub.add_parser("sweep", help="Parareal errors for every eps, quantity and iteration")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("fit-slopes", help="log-log slopes of a sweep CSV")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--floor", type=float, default=1e-11)
    s.add_argument("--out", required=True)
    s.add_argument("--strict", action="store_true", help="fail if any group has fewer than 3 points")
    s.set_defaults(func=cmd_fit_slopes)

    s = sub.add_parser("run", help="dump the full trace at a single eps")
    s.add_argument("--config", required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("mc-validate", help="Euler-Maruyama ensemble vs moment ODEs")
    s.add_argument("--config", required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--paths", type=int, required=True)
    s.add_argument("--dt", type=float, required=True)
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_mc_validate)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except AssumptionViolation as exc:
        log.error("%s", exc)
        return EXIT_ASSUMPTION
    except InsufficientDataError as exc:
        log.error("%s", exc)
        return EXIT_INSUFFICIENT
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except (SingularMatrixError, StabilityError, FloatingPointError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except ConfigError as exc:
        log.error("bad input: %s", exc)
        return EXIT_IO
    except DomainError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except ValueError as exc:
        log.error("bad input: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
