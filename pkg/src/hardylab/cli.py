"""Command line front-end.

Every command prints a JSON report (or CSV for ``barrier-profile``) and exits
with 0 for success or Certified, 2 for NotCertified or a violated inequality,
3 for HypothesisViolated and 1 for any operational error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import report
from .barriers import BarrierSpec, barrier_profile
from .config import ProblemConfig, parse_config
from .criteria import KINDS, ars2_closed_form, ars2_curvature_expr, ars2_model, check_criterion
from .errors import ConfigError, HardyLabError, ValidationError
from .quadform import Grid, HardyGap, min_gap_eigen, random_bump
from .vectorfield import remainder_audit
from .weyl import SturmLiouville1D, cross_check, euler_classify, log_euler_classify, numeric_classify

EXIT_OK, EXIT_ERROR, EXIT_NOT_CERTIFIED, EXIT_HYPOTHESIS = 0, 1, 2, 3
GAP_TOL = 1e-6
EIGEN_TOL = 1e-8
PROFILE_COLUMNS = ["delta", "barrier", "leading_term", "log_term", "component_id"]


class _Parser(argparse.ArgumentParser):
    """Usage errors are operational errors (exit 1), not verdicts."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


class CommandResult:
    def __init__(self, results: dict, exit_code: int, inputs: dict | None = None,
                 seed: int | None = None, csv: str | None = None):
        self.results, self.exit_code = results, exit_code
        self.inputs, self.seed, self.csv = inputs or {}, seed, csv


# ----------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------
def _load(args) -> ProblemConfig:
    if not args.config:
        raise ValidationError("--config", "this command needs a problem configuration")
    return parse_config(args.config)


def cmd_barrier_profile(args) -> CommandResult:
    cfg = _load(args)
    model = cfg.build_model()
    spec = BarrierSpec.parse(args.barrier, model)
    hi = args.delta_max if args.delta_max is not None else 0.5 * min(model.nu0, 1.0)
    if not 0 < args.delta_min < hi:
        raise ValidationError("--delta-min", "need 0 < delta-min < delta-max")
    deltas = np.geomspace(args.delta_min, hi, args.n)
    rows = barrier_profile(spec, deltas, args.component, args.angle)
    inputs = {"config": cfg.to_dict(), "barrier": spec.label, "component": args.component,
              "angle": args.angle, "n": args.n, "delta_min": args.delta_min, "delta_max": hi}
    return CommandResult({"profile": rows}, EXIT_OK, inputs, cfg.seed,
                         report.csv_text(rows, PROFILE_COLUMNS))


def cmd_check_esa(args) -> CommandResult:
    cfg = _load(args)
    verdict = check_criterion(args.criterion, cfg.build_model(), args.mu)
    inputs = {"config": cfg.to_dict(), "criterion": args.criterion, "mu": args.mu}
    return CommandResult({"verdict": verdict.to_dict()}, verdict.exit_code, inputs, cfg.seed)


def _default_nu(model) -> float:
    audit = remainder_audit(model)
    if audit.nu1 is None:
        raise ValidationError("--nu", "no layer with a nonnegative remainder margin; pass --nu explicitly")
    return audit.nu1


def cmd_verify_hardy(args) -> CommandResult:
    cfg = _load(args)
    model = cfg.build_model()
    spec = BarrierSpec.parse(args.barrier, model)
    nu = args.nu if args.nu is not None else _default_nu(model)
    seed = args.seed if args.seed is not None else cfg.seed
    n_comp = len(model.domain.components)
    evaluators = {}
    worst = (math.inf, None)
    for i in range(args.bumps):
        comp = i % n_comp
        phi = random_bump(seed + i, nu, domain=model.domain, component=comp)
        if comp not in evaluators:
            evaluators[comp] = HardyGap(model, spec, nu, phi.support, comp)
        rel = evaluators[comp].gap(phi).relative
        if rel < worst[0]:
            worst = (rel, seed + i)
    eigen, grid_label = None, None
    if args.eigen:
        if model.domain.dim == 1:
            grid = Grid.line(model.domain, args.n_nodes)
            grid_label = f"line:{args.n_nodes}"
        else:
            grid = Grid.polar(model.domain, args.n_r, args.n_theta)
            grid_label = f"polar:{args.n_r}x{args.n_theta}"
        eigen = min_gap_eigen(model, spec, grid, nu)
    min_gap = worst[0] if args.bumps else None
    ok = (min_gap is None or min_gap >= -GAP_TOL) and (eigen is None or eigen >= -EIGEN_TOL)
    results = {"min_relative_gap": min_gap, "eigen_lambda_min": eigen, "grid": grid_label,
               "nu": nu, "bumps": args.bumps, "worst_seed": worst[1], "barrier": spec.label}
    inputs = {"config": cfg.to_dict(), "barrier": args.barrier, "nu": args.nu,
              "bumps": args.bumps, "eigen": args.eigen}
    return CommandResult(results, EXIT_OK if ok else EXIT_NOT_CERTIFIED, inputs, seed)


def cmd_vf_audit(args) -> CommandResult:
    cfg = _load(args)
    seed = args.seed if args.seed is not None else cfg.seed
    audit = remainder_audit(cfg.build_model(), args.variant, args.N, args.samples, seed)
    inputs = {"config": cfg.to_dict(), "variant": args.variant, "N": args.N, "samples": args.samples}
    code = EXIT_OK if audit.nu1 is not None else EXIT_NOT_CERTIFIED
    return CommandResult(audit.to_dict(), code, inputs, seed)


def cmd_oracle_1d(args) -> CommandResult:
    if args.log_alpha is not None:
        beta = 1.5 if args.beta is None else args.beta
        gamma = 0.0 if args.gamma is None else args.gamma
        if beta != 1.5 or gamma != 0.0:
            raise ValidationError("--log-alpha", "the log-corrected family is fixed at beta = 3/2, gamma = 0")
        exact = log_euler_classify(args.log_alpha)
        problem = SturmLiouville1D.log_euler(args.log_alpha)
    else:
        if args.beta is None or args.gamma is None:
            raise ValidationError("--beta", "pass --beta and --gamma (or --log-alpha)")
        exact = euler_classify(args.beta, args.gamma)
        problem = SturmLiouville1D.euler(args.beta, args.gamma)
    results = {"class": exact.cls, "evidence": exact.evidence}
    if args.numeric:
        num = numeric_classify(problem, E=args.E)
        results["numeric"] = num.to_dict()
        results["numeric_consistent"] = num.cls in (exact.cls, "Inconclusive")
    inputs = {"beta": args.beta, "gamma": args.gamma, "log_alpha": args.log_alpha,
              "numeric": args.numeric, "E": args.E}
    return CommandResult(results, EXIT_OK, inputs, None)


def cmd_ars2(args) -> CommandResult:
    _, verdict = ars2_model(args.alpha, args.c, args.phi)
    results = {"verdict": verdict.to_dict(), "closed_form": ars2_closed_form(args.alpha, args.c),
               "curvature": str(ars2_curvature_expr(args.alpha, args.phi))}
    if args.c == 0 and args.phi.strip() in ("0", "0.0"):
        # zero angular mode of the free model: p = w = t^-alpha near the circle
        results["radial_soundness"] = cross_check(verdict, euler_classify(0.0, -args.alpha)).to_dict()
    inputs = {"alpha": args.alpha, "c": args.c, "phi": args.phi}
    return CommandResult(results, verdict.exit_code, inputs, None)


COMMANDS = {
    "barrier-profile": cmd_barrier_profile,
    "check-esa": cmd_check_esa,
    "verify-hardy": cmd_verify_hardy,
    "vf-audit": cmd_vf_audit,
    "oracle-1d": cmd_oracle_1d,
    "ars2": cmd_ars2,
}


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the JSON report to this file")
    common.add_argument("--csv", help="write the CSV profile to this file")
    common.add_argument("--timing", action="store_true", help="record wall time in the report")

    p = _Parser(prog="hardylab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("barrier-profile", parents=[common], help="tabulate a barrier along a normal ray")
    s.add_argument("--config", required=True)
    s.add_argument("--barrier", default="base", help="base | hierarchy:N | log:ALPHA | multi")
    s.add_argument("--component", type=int, default=0)
    s.add_argument("--angle", type=float, default=0.0)
    s.add_argument("--n", type=int, default=64)
    s.add_argument("--delta-min", type=float, default=1e-8)
    s.add_argument("--delta-max", type=float)

    s = sub.add_parser("check-esa", parents=[common], help="decide an essential self-adjointness criterion")
    s.add_argument("--config", required=True)
    s.add_argument("--criterion", required=True, choices=KINDS)
    s.add_argument("--mu", type=float)

    s = sub.add_parser("verify-hardy", parents=[common], help="check a Hardy inequality by quadrature")
    s.add_argument("--config", required=True)
    s.add_argument("--barrier", default="base")
    s.add_argument("--nu", type=float)
    s.add_argument("--bumps", type=int, default=200)
    s.add_argument("--eigen", action="store_true")
    s.add_argument("--seed", type=int)
    s.add_argument("--n-nodes", type=int, default=2000)
    s.add_argument("--n-r", type=int, default=60)
    s.add_argument("--n-theta", type=int, default=64)

    s = sub.add_parser("vf-audit", parents=[common], help="audit the vector-field remainder")
    s.add_argument("--config", required=True)
    s.add_argument("--variant", default="X0", choices=("X0", "XN"))
    s.add_argument("--N", type=int, default=1)
    s.add_argument("--samples", type=int, default=256)
    s.add_argument("--seed", type=int)

    s = sub.add_parser("oracle-1d", parents=[common], help="limit point / limit circle for model endpoints")
    s.add_argument("--beta", type=float)
    s.add_argument("--gamma", type=float)
    s.add_argument("--log-alpha", type=float)
    s.add_argument("--numeric", action="store_true")
    s.add_argument("--E", type=float, default=-1.0)

    s = sub.add_parser("ars2", parents=[common], help="criterion for the 2-D almost-Riemannian model")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--phi", default="0")
    return p


def _error_payload(exc: Exception) -> dict:
    if isinstance(exc, ConfigError):
        return {"error": "ConfigError", "message": str(exc),
                "errors": [{"type": type(e).__name__, "message": str(e)} for e in exc.errors]}
    return {"error": type(exc).__name__, "message": str(exc)}


def run(argv: list[str] | None = None, stdout=None) -> int:
    """Parse ``argv``, run the command and emit its outputs; returns the exit code."""
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage error or --help
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    start = time.perf_counter()
    try:
        res = COMMANDS[args.command](args)
    except HardyLabError as exc:
        res = CommandResult(_error_payload(exc), EXIT_ERROR)
    except (ValueError, ArithmeticError, OSError) as exc:
        res = CommandResult({"error": "InternalError", "message": f"{type(exc).__name__}: {exc}"}, EXIT_ERROR)
    wall = time.perf_counter() - start if args.timing else None
    rep = report.make_report(args.command, res.inputs, res.results, res.seed, res.exit_code, wall)
    text = report.dumps(rep)
    try:
        if args.out:
            Path(args.out).write_text(text)
        if res.csv is not None and args.csv:
            Path(args.csv).write_text(res.csv)
    except OSError as exc:
        print(f"hardylab: cannot write output: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if res.csv is not None and not args.csv and res.exit_code != EXIT_ERROR:
        stdout.write(res.csv)
    else:
        stdout.write(text)
    if res.exit_code == EXIT_ERROR:
        print(f"hardylab: {res.results.get('error')}: {res.results.get('message', '')}".rstrip(": "),
              file=sys.stderr)
    return res.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
