"""Command-line entry point.

Subcommands::

    fxc run --scenario FILE [--out DIR] [--dt S] [--t-final S]
            [--mode event|periodic] [--emit-svg] [--dump-effective-config FILE]
    fxc bound --a A --b B --alpha AL --beta BE [--c C] [--fraction F]
              [--verify --v0 V [--dt S]]
    fxc check-gains (--scenario FILE | --gains G1,G2,...) [--rho R]

Exit codes: 0 ok, 1 configuration error, 2 divergence, 3 gain check failed.
The environment variable ``FXC_LOG`` (``debug``, ``info`` or ``quiet``)
sets verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .bounds import FixedTimeBound, settling_bound, verify_fixed_time
from .engine import run
from .errors import ConfigError, Divergence, FxcError, IllConditioned, NotHurwitz
from .observer import assumption_margin, companion_matrix, is_hurwitz, solve_lyapunov
from .report import format_summary, summary, write_plot_data, write_svgs, write_trace_csv
from .scenario import dump_scenario, load_scenario

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_GAINS = 0, 1, 2, 3

log = logging.getLogger("fxc")


def _setup_logging():
    level = {"debug": logging.DEBUG, "info": logging.INFO, "quiet": logging.ERROR}.get(
        os.environ.get("FXC_LOG", "").lower(), logging.WARNING
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def cmd_run(args) -> int:
    try:
        scn = load_scenario(args.scenario)
        overrides = []
        for flag, attr in (("dt", "dt"), ("t_final", "t_final"), ("mode", "mode")):
            value = getattr(args, flag)
            if value is not None:
                setattr(scn, attr, value)
                overrides.append(f"{attr}={value}")
        scn.validate()
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.dump_effective_config:
        dump_scenario(scn, args.dump_effective_config)

    try:
        trace = run(scn)
    except Divergence as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        (out / "summary.txt").write_text(f"status: diverged\ntime: {exc.time:g}\nagent: {exc.agent + 1}\n")
        return EXIT_DIVERGENCE

    write_trace_csv(trace, out / "trace.csv")
    text = format_summary(summary(trace, scn))
    text = f"overrides: {', '.join(overrides) if overrides else 'none'}\n" + text
    (out / "summary.txt").write_text("status: ok\n" + text, encoding="utf-8")
    write_plot_data(trace, out / "plots")
    if args.emit_svg:
        write_svgs(trace, out)
    print(text, end="")
    return EXIT_OK


def cmd_bound(args) -> int:
    try:
        bound = FixedTimeBound(args.a, args.b, args.alpha, args.beta, args.c, args.fraction)
        t_max = settling_bound(bound)
    except ConfigError as exc:
        print(f"ConditionViolated: {exc}" if type(exc).__name__ == "ConditionViolated" else f"config error: {exc}",
              file=sys.stderr)
        return EXIT_CONFIG
    print(f"T_max: {t_max:.10g}")
    if args.verify:
        try:
            check = verify_fixed_time(bound, args.v0, args.dt, delta=args.delta)
        except (FxcError, ValueError) as exc:
            print(f"verify failed: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"residual_level: {check.level:.10g}")
        print(f"entered: {'yes' if check.entered else 'no'}")
        print(f"t_enter: {check.t_enter:.10g}")
    return EXIT_OK


def _gain_sets(args):
    if args.gains is not None:
        try:
            mu = [float(v) for v in args.gains.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"cannot parse gains {args.gains!r}") from None
        return [("gains", mu, args.rho)]
    scn = load_scenario(args.scenario)
    rho = [args.rho] * scn.n_agents if args.rho_given else scn.observer_rho
    return [(f"agent {i + 1}", o.gains.tolist(), rho[i]) for i, o in enumerate(scn.observers)]


def cmd_check_gains(args) -> int:
    try:
        sets = _gain_sets(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status = EXIT_OK
    for label, mu, rho in sets:
        chi = companion_matrix(mu)
        eig = np.linalg.eigvals(chi)
        print(f"{label}: gains {', '.join(f'{g:g}' for g in mu)}")
        print("  eigenvalues: " + ", ".join(f"{complex(e).real:.6g}{complex(e).imag:+.6g}j" for e in eig))
        ok = is_hurwitz(chi)
        print(f"  Hurwitz: {'yes' if ok else 'no'}")
        if not ok:
            status = EXIT_GAINS
            continue
        try:
            cert = solve_lyapunov(chi, rho)
        except (NotHurwitz, IllConditioned) as exc:
            print(f"  certificate: failed ({exc})")
            status = EXIT_GAINS
            continue
        print(f"  rho: {rho:g}")
        print(f"  residual: {cert.residual:.3e}")
        print(f"  H min eigenvalue: {cert.min_eigenvalue:.6g}")
        if chi.shape[0] == 1:
            print(f"  H: {cert.h_matrix[0, 0]:.6g}")
        print(f"  margin lambda_max(H chi + chi^T H + (2+n) I): {assumption_margin(chi, cert.h_matrix):.6g}")
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fxc", description="Event-triggered fixed-time consensus simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", default="results")
    p.add_argument("--dt", type=float)
    p.add_argument("--t-final", type=float)
    p.add_argument("--mode", choices=["event", "periodic"])
    p.add_argument("--emit-svg", action="store_true")
    p.add_argument("--dump-effective-config", metavar="FILE")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bound", help="fixed-time settling bound")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--v0", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--delta", type=float, default=1e-6, help="entry level used when c = 0")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("check-gains", help="observer gain audit")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario")
    src.add_argument("--gains", help="comma-separated observer gains")
    p.add_argument("--rho", type=float, default=None)
    p.set_defaults(func=cmd_check_gains)
    return parser


def _join_negative_values(argv):
    # "--gains -15,-80" would otherwise be read as an unknown option
    out = list(argv)
    for k, tok in enumerate(out[:-1]):
        if tok in ("--gains", "--c", "--a", "--b", "--alpha", "--beta") and out[k + 1].startswith("-"):
            out[k] = f"{tok}={out[k + 1]}"
            out[k + 1] = None
    return [t for t in out if t is not None]


def main(argv=None) -> int:
    _setup_logging()
    argv = sys.argv[1:] if argv is None else argv
    args = build_parser().parse_args(_join_negative_values(argv))
    if getattr(args, "command", None) == "check-gains":
        args.rho_given = args.rho is not None
        if args.rho is None:
            args.rho = 1.0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
