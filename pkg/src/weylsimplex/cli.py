"""Command-line interface: ``weylsimplex <subcommand> ...``.

Exit codes: 0 on success, 1 on domain errors (bad physics input such as a
point outside the state space), 2 on usage errors. Human-readable output goes
to standard output; data files are written only through ``--out`` or
``--trace-out``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from collections.abc import Sequence

import numpy as np

from .criteria import all_cut_verdicts, pair_cut, ppt_verdict
from .distill import SCHEDULES, ProtocolConfig, classify_distillability, iterate
from .kernels import BACKEND
from .linalg import DomainError, hermitian_spectrum
from .scan import CHECKS, FIGURES, Axis, GridSpec, default_jobs, export, figure_spec, run_scan
from .simplex import FAMILIES, FamilyParams, mixedness, simplex_state, to_simplex_point, vertex_state
from .weyl import WeylIndex
from .witness import OptimizerConfig, detect

STATE_CHECKS = ("positivity", "ppt", "all-cuts", "mixedness")


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _dim(text: str) -> int:
    v = _positive(text)
    if v < 2:
        raise argparse.ArgumentTypeError(f"dimension must be >= 2, got {v}")
    return v


class _Help(argparse.ArgumentDefaultsHelpFormatter):
    def _get_help_string(self, action):
        if action.required or "default:" in (action.help or ""):
            return action.help
        return super()._get_help_string(action)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _fmt_num(x: float) -> str:
    return f"{x:.12g}"


def _add_family(p: argparse.ArgumentParser, gamma: bool = True, family_default: str | None = None):
    if family_default is None:
        p.add_argument("--family", choices=FAMILIES, required=True, help="state family")
    else:
        p.add_argument("--family", choices=FAMILIES, default=family_default, help="state family")
    p.add_argument("--alpha", type=float, required=True, help="weight of vertex (0,0)")
    p.add_argument("--beta", type=float, required=True, help="weight of vertex (0,1)")
    if gamma:
        p.add_argument("--gamma", type=float, default=0.0, help="weight of vertex (0,2), line family only")


def build_parser() -> argparse.ArgumentParser:
    fmt = _Help
    parser = _Parser(prog="weylsimplex", description="Bell-diagonal simplex states of qudit pairs.",
                     formatter_class=fmt)
    parser.add_argument("--config", metavar="FILE", default=None,
                        help="key = value or JSON file with defaults for the subcommand flags")
    parser.add_argument("-v", "--verbose", action="store_true", help="print extra diagnostics")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("vertex", help="construct a vertex state", formatter_class=fmt,
                       description="Construct vertex state (k, l) of the n-pair simplex.")
    p.add_argument("--d", type=_dim, required=True, help="local dimension")
    p.add_argument("--n", type=_positive, required=True, help="number of pairs")
    p.add_argument("--k", type=int, required=True, help="phase index")
    p.add_argument("--l", type=int, required=True, help="shift index")
    p.add_argument("--spectrum", action="store_true", help="print the grouped eigenvalue spectrum")

    p = sub.add_parser("state", help="build a family state and check it", formatter_class=fmt,
                       description="Build a family state and run one check on it.")
    p.add_argument("--d", type=_dim, required=True, help="local dimension")
    p.add_argument("--n", type=_positive, default=1, help="number of pairs")
    _add_family(p)
    p.add_argument("--check", choices=STATE_CHECKS, default="positivity", help="which check to run")

    p = sub.add_parser("witness", help="search for a detecting witness", formatter_class=fmt,
                       description="Search for a simplex witness that detects a family state.")
    p.add_argument("--d", type=_dim, required=True, help="local dimension")
    p.add_argument("--n", type=_positive, default=1, help="number of pairs")
    _add_family(p)
    p.add_argument("--starts", type=_positive, default=OptimizerConfig.n_starts,
                   help="starting vectors for the inner minimization")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--gap", type=float, default=OptimizerConfig.rel_gap,
                   help="stop once the margin is within this relative gap of the LP bound (>= 1: first hit)")

    p = sub.add_parser("distill", help="run the two-copy distillation protocol", formatter_class=fmt,
                       description="Iterate the two-copy distillation protocol on a family state.")
    p.add_argument("--d", type=_dim, default=3, help="local dimension (3, or 2 as a regression case)")
    p.add_argument("--n", type=_positive, default=1, help="number of pairs")
    _add_family(p, family_default="line")
    p.add_argument("--m", type=int, default=None,
                   help="target basis index; omitted: try every m and report the best")
    p.add_argument("--max-iter", type=int, default=ProtocolConfig.max_iterations, help="iteration cap")
    p.add_argument("--target", type=float, default=ProtocolConfig.fidelity_target, help="fidelity target")
    p.add_argument("--schedule", choices=SCHEDULES, default=ProtocolConfig.schedule,
                   help="alternate plain and Fourier-conjugated rounds, or plain rounds only")
    p.add_argument("--trace-out", metavar="FILE", default=None, help="write the per-iteration trace as CSV")

    p = sub.add_parser("scan", help="grid scan to CSV or JSON", formatter_class=fmt,
                       description="Scan a family over a parameter grid.")
    p.add_argument("--spec", metavar="FILE", default=None,
                   help="JSON or key = value file with scan settings (same names as the flags)")
    p.add_argument("--family", choices=FAMILIES, default="two_vertex", help="state family")
    p.add_argument("--d", type=_dim, default=3, help="local dimension")
    p.add_argument("--n", type=_positive, default=1, help="number of pairs")
    p.add_argument("--alpha-range", nargs=3, metavar=("LO", "HI", "STEPS"), default=["-0.6", "1.1", "201"],
                   help="alpha axis")
    p.add_argument("--beta-range", nargs=3, metavar=("LO", "HI", "STEPS"), default=["-0.6", "1.1", "201"],
                   help="beta axis")
    p.add_argument("--gamma-range", nargs=3, metavar=("LO", "HI", "STEPS"), default=None,
                   help="gamma axis (line family); omitted: gamma = 0")
    p.add_argument("--checks", default="positivity,ppt_pair_cut",
                   help=f"comma-separated subset of {','.join(CHECKS)}")
    p.add_argument("--budget", type=float, default=4 * 3600.0, help="work budget in estimated seconds")
    p.add_argument("--out", metavar="FILE", required=True, help="output file")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    p.add_argument("--jobs", type=_positive, default=None,
                   help="worker processes (default: $WEYLSIMPLEX_JOBS or the processor count)")
    p.add_argument("--seed", type=int, default=0, help="base seed for per-point optimizer seeds")

    p = sub.add_parser("figure", help="regenerate a figure dataset", formatter_class=fmt,
                       description="Run a preset scan reproducing one of the figure datasets.")
    p.add_argument("--which", choices=FIGURES, required=True, help="figure preset")
    p.add_argument("--out", metavar="FILE", required=True, help="output file")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    p.add_argument("--jobs", type=_positive, default=None,
                   help="worker processes (default: $WEYLSIMPLEX_JOBS or the processor count)")
    return parser


def _subparsers(parser: argparse.ArgumentParser) -> dict[str, argparse.ArgumentParser]:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return dict(action.choices)
    return {}


def read_config(path: str) -> dict:
    """Parse a JSON object or ``key = value`` lines (``#`` comments) into flag defaults."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc.strerror}") from exc
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path!r} is not valid JSON: {exc}") from exc
        return {str(k).replace("-", "_"): v for k, v in data.items()}
    out = {}
    for no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config file {path!r} line {no}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _apply_defaults(sub: argparse.ArgumentParser, values: dict, source: str):
    """Install ``values`` as defaults, converting through each action's type."""
    actions = {a.dest: a for a in sub._actions if a.dest != "help"}
    for key, raw in values.items():
        act = actions.get(key)
        if act is None:
            raise UsageError(f"{source}: unknown setting {key!r} for '{sub.prog}'")
        if act.nargs == 3:
            vals = raw.split() if isinstance(raw, str) else [str(x) for x in raw]
            if len(vals) != 3:
                raise UsageError(f"{source}: {key} needs three values LO HI STEPS")
            val = vals
        elif isinstance(act, argparse._StoreTrueAction):
            val = raw if isinstance(raw, bool) else str(raw).lower() in ("1", "true", "yes")
        elif isinstance(raw, list) and key == "checks":
            val = ",".join(raw)
        else:
            try:
                val = act.type(str(raw)) if act.type else str(raw)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"{source}: bad value for {key}: {exc}") from exc
            if act.choices is not None and val not in act.choices:
                raise UsageError(f"{source}: {key} must be one of {list(act.choices)}")
        act.required = False
        act.default = val


def parse(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    subs = _subparsers(parser)
    if known.config:
        cmd = next((a for a in argv if a in subs), None)
        if cmd is not None:
            _apply_defaults(subs[cmd], read_config(known.config), known.config)
    if "scan" in argv:
        # a --spec file supplies scan defaults the same way
        spec_pre = argparse.ArgumentParser(add_help=False)
        spec_pre.add_argument("--spec", default=None)
        sk, _ = spec_pre.parse_known_args(argv)
        if sk.spec:
            _apply_defaults(subs["scan"], read_config(sk.spec), sk.spec)
    return parser.parse_args(argv)


def _axis(name: str, vals) -> Axis:
    try:
        lo, hi, steps = float(vals[0]), float(vals[1]), int(vals[2])
    except ValueError:
        raise UsageError(f"--{name}-range needs LO HI STEPS numbers, got {' '.join(vals)}") from None
    try:
        return Axis(lo, hi, steps)
    except DomainError as exc:
        raise UsageError(f"--{name}-range: {exc}") from None


def _family_point(args):
    if args.family == "two_vertex" and getattr(args, "gamma", 0.0):
        raise UsageError("--gamma applies to the line family only")
    return to_simplex_point(FamilyParams(args.d, args.n, args.alpha, args.beta, args.gamma), args.family)


def _group_spectrum(vals: np.ndarray) -> str:
    groups: list[list] = []
    for v in np.sort(vals)[::-1]:
        r = round(float(v), 10) + 0.0
        if groups and groups[-1][0] == r:
            groups[-1][1] += 1
        else:
            groups.append([r, 1])
    return ", ".join(f"{_fmt_num(v)} x{c}" for v, c in groups)


def cmd_vertex(args) -> int:
    if not (0 <= args.k < args.d and 0 <= args.l < args.d):
        raise UsageError(f"--k and --l must lie in [0, {args.d}), got ({args.k}, {args.l})")
    rho = vertex_state(args.d, args.n, WeylIndex(args.k, args.l, args.d))
    m = rho.matrix
    print(f"vertex ({args.k}, {args.l})  d={args.d}  n={args.n}  dimension={m.shape[0]}")
    print(f"parties: {' '.join(rho.shape.labels)}")
    print(f"trace: {_fmt_num(float(np.real(np.trace(m))))}")
    print(f"purity: {_fmt_num(float(np.real(np.vdot(m.conj().T, m))))}")
    if args.spectrum:
        print(f"spectrum: {_group_spectrum(hermitian_spectrum(m))}")
    return 0


def cmd_state(args) -> int:
    p = _family_point(args)
    rho = simplex_state(p)
    print(f"{args.family}  d={args.d}  n={args.n}  alpha={args.alpha:g}  beta={args.beta:g}  gamma={args.gamma:g}")
    print("coefficients c[k,l]:")
    for row in p.c:
        print("  " + "  ".join(f"{x: .6f}" for x in row))
    if args.check == "positivity":
        print(f"min eigenvalue: {_fmt_num(float(hermitian_spectrum(rho)[0]))}")
        print("in state space: yes")
    elif args.check == "ppt":
        v = ppt_verdict(rho, pair_cut(args.n))
        print(f"cut {v.label}: min partial-transpose eigenvalue {_fmt_num(v.min_pt_eigenvalue)}  {v.verdict}")
    elif args.check == "all-cuts":
        for v in all_cut_verdicts(rho):
            tag = "pairs kept" if v.respects_pairs else "pairs split"
            print(f"{v.label:>20}  {_fmt_num(v.min_pt_eigenvalue):>20}  {v.verdict}  ({tag})")
    else:
        print(f"mixedness: {_fmt_num(mixedness(rho))}")
    return 0


def cmd_witness(args) -> int:
    p = _family_point(args)
    det = detect(p, OptimizerConfig(n_starts=args.starts, seed=args.seed, rel_gap=args.gap))
    print(f"detected: {'yes' if det.detected else 'no'}")
    print(f"margin: {_fmt_num(det.margin)}")
    print(f"lp bound: {_fmt_num(det.lp_bound)}  rounds: {det.rounds}")
    if det.kappa is not None:
        print("kappa[k,l]:")
        for row in det.kappa.kappa:
            print("  " + "  ".join(f"{x: .6f}" for x in row))
        print(f"min over phi of lambda_min(M_phi): {_fmt_num(det.report.min_over_phi)}")
    return 0


def cmd_distill(args) -> int:
    if args.m is not None and not 0 <= args.m < args.d:
        raise UsageError(f"--m must lie in [0, {args.d}), got {args.m}")
    if args.max_iter < 0:
        raise UsageError("--max-iter must be non-negative")
    p = _family_point(args)
    base = ProtocolConfig(m=args.m, max_iterations=args.max_iter, fidelity_target=args.target,
                          schedule=args.schedule)
    if args.m is None:
        verdict = classify_distillability(p, base)
        m = verdict.m
    else:
        m = args.m
    cfg = ProtocolConfig(m=m, max_iterations=args.max_iter, fidelity_target=args.target, schedule=args.schedule)
    trace = iterate(p, cfg)
    print(f"m: {m}")
    print(f"verdict: {'converges_to_vertex' if trace.reached_target else 'stalls'}")
    print(f"iterations: {trace.iterations}  ({trace.reason})")
    print(f"final fidelity: {_fmt_num(trace.final_fidelity)}  vertex {trace.best_vertices[-1]}")
    if trace.success_probabilities:
        print(f"success probabilities: {' '.join(f'{x:.4f}' for x in trace.success_probabilities)}")
    if args.trace_out:
        try:
            with open(args.trace_out, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["iteration", "fidelity", "best_k", "best_l", "success_probability", "simplex_residual"])
                for i, (f, v) in enumerate(zip(trace.fidelities, trace.best_vertices)):
                    sp = trace.success_probabilities[i - 1] if i else None
                    rs = trace.residuals[i - 1] if i else None
                    w.writerow([i, format(f, ".17g"), v[0], v[1],
                                "" if sp is None else format(sp, ".17g"),
                                "" if rs is None else format(rs, ".17g")])
        except OSError as exc:
            raise DomainError(f"cannot write trace file {args.trace_out!r}: {exc.strerror}") from exc
    return 0


def _run_and_export(spec: GridSpec, args) -> int:
    jobs = args.jobs if args.jobs is not None else default_jobs()
    records = run_scan(spec, jobs)
    export(records, args.format, args.out)
    inside = sum(r.in_state_space for r in records)
    print(f"{len(records)} points ({inside} in state space) written to {args.out}")
    return 0


def cmd_scan(args) -> int:
    checks = tuple(c.strip() for c in args.checks.split(",") if c.strip())
    bad = [c for c in checks if c not in CHECKS]
    if bad:
        raise UsageError(f"--checks: unknown {bad}; choose from {','.join(CHECKS)}")
    if args.family == "line" and args.d != 3:
        raise UsageError("the line family requires --d 3")
    if args.family == "two_vertex" and args.gamma_range is not None:
        raise UsageError("--gamma-range applies to the line family only")
    gamma = _axis("gamma", args.gamma_range) if args.gamma_range is not None else None
    spec = GridSpec(args.family, args.d, args.n, _axis("alpha", args.alpha_range), _axis("beta", args.beta_range),
                    gamma, checks, args.seed, budget_seconds=args.budget)
    return _run_and_export(spec, args)


def cmd_figure(args) -> int:
    return _run_and_export(figure_spec(args.which), args)


COMMANDS = {
    "vertex": cmd_vertex,
    "state": cmd_state,
    "witness": cmd_witness,
    "distill": cmd_distill,
    "scan": cmd_scan,
    "figure": cmd_figure,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"weylsimplex {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        if args.verbose:
            print(f"[{args.command}: {time.perf_counter() - start:.3f} s, kernels: {BACKEND}]", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
