"""Command-line interface: ``wfabounds <subcommand> [--flags]``.

Exit codes: 0 success, 1 usage error, 2 domain error, 3 resource guard,
4 numeric or conditioning failure, 5 ``check`` found violations.
Numbers are printed with 17 significant digits so identical invocations
produce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import bounds, experiments, hankel, norms, rademacher, sample_stats
from .automaton import StringSample, evaluate, sample_pfa
from .errors import DomainError, WFAError
from .io import EPS, dumps_sample, load_automaton, load_sample

EXIT_USAGE = 1
EXIT_CHECK_FAILED = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _dump_json(obj) -> str:
    # repr-based float output already round-trips
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _lines(pairs) -> str:
    return "".join(f"{k} {fmt(v)}\n" for k, v in pairs)


def _p_value(text: str) -> float:
    try:
        return norms._parse_p(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def _require_seed(args, why: str):
    if args.seed is None:
        raise UsageError(f"--seed is required {why}")


def _parse_string(A, text: str):
    tokens = text.split()
    if tokens in ([], [EPS]):
        return ()
    if len(tokens) == 1 and tokens[0] not in A.alphabet.symbols:
        # compact form "ab" over single-character symbols
        tokens = list(tokens[0])
    return A.alphabet.encode(tokens)


def cmd_eval(args) -> str:
    A = load_automaton(args.automaton)
    return fmt(evaluate(A, _parse_string(A, args.string))) + "\n"


def cmd_norm(args) -> str:
    A = load_automaton(args.automaton)
    hp = norms.HolderPair.of(args.p)
    l2 = norms.l2_norm_squared(A)
    lp = norms.lp_norm_truncated(A, args.p, args.length)
    out = {"p": hp.p, "q": hp.q, "wfa_norm": norms.wfa_norm(A, args.p),
           "l2_squared": l2.to_dict(), "lp_truncated": lp.to_dict()}
    if args.format == "json":
        return _dump_json(out)
    pairs = [("p", hp.p), ("q", hp.q), ("wfa_norm", out["wfa_norm"])]
    pairs += [(f"l2_squared.{k}", v) for k, v in l2.to_dict().items() if v is not None]
    pairs += [(f"lp_truncated.{k}", v) for k, v in lp.to_dict().items() if v is not None]
    return _lines(pairs)


def cmd_spectrum(args) -> str:
    A = load_automaton(args.automaton)
    spec = hankel.hankel_singular_values(A)
    s = spec.singular_values
    schatten = {name: float(np.linalg.norm(s, ord=p)) if s.size else 0.0
                for name, p in (("1", 1), ("2", 2), ("inf", np.inf))}
    if args.format == "json":
        d = spec.to_dict()
        d["schatten"] = schatten
        return _dump_json(d)
    pairs = [(f"sigma[{i}]", v) for i, v in enumerate(s)]
    pairs += [("numerical_rank", spec.numerical_rank),
              ("residual_P", spec.residuals[0]), ("residual_Q", spec.residuals[1])]
    pairs += [(f"schatten_{k}", v) for k, v in schatten.items()]
    return _lines(pairs)


def _load_sample_arg(args) -> StringSample:
    alphabet = load_automaton(args.automaton).alphabet if getattr(args, "automaton", None) else None
    return load_sample(args.sample, alphabet)


def _ws(S: StringSample, args):
    try:
        return sample_stats.ws_exhaustive(S, args.guard)
    except WFAError:
        _require_seed(args, "when W_S falls back to the randomized heuristic")
        return sample_stats.ws_heuristic(S, args.seed, args.restarts)


def cmd_stats(args) -> str:
    S = _load_sample_arg(args)
    ws = _ws(S, args)
    if args.format == "json":
        return _dump_json({"m": S.m, "L_S": S.max_length, "C_S": S.max_multiplicity,
                           **ws.to_dict(S.alphabet)})
    pairs = [("m", S.m), ("L_S", S.max_length), ("C_S", S.max_multiplicity),
             ("W_S", ws.value), ("W_S_exactness", ws.exactness),
             ("U_S", ws.witness.prefix_max), ("V_S", ws.witness.suffix_max)]
    for i, (u, v) in enumerate(ws.witness.pairs):
        pairs.append((f"split[{i}]", f"{S.alphabet.format(u)} | {S.alphabet.format(v)}"))
    return _lines(pairs)


def cmd_rademacher(args) -> str:
    S = _load_sample_arg(args)
    if args.mode == "mc" or args.cls == "A":
        _require_seed(args, "for Monte-Carlo estimates")
    seed = args.seed
    if args.cls == "R":
        est = rademacher.rademacher_Rpr(S, args.r, args.p, args.mode, args.draws, seed)
    elif args.cls == "H":
        split = _ws(S, args).witness
        est = rademacher.rademacher_Hpr_bound(S, split, args.r, args.p, args.mode, args.draws, seed)
    else:
        if args.n is None:
            raise UsageError("--n is required for --class A")
        cfg = rademacher.AscentConfig(args.restarts, args.steps, args.step_size)
        est = rademacher.rademacher_Anpr_lower(S, args.n, args.p, args.r, args.mode, args.draws,
                                               seed, cfg)
    d = est.to_dict()
    if args.format == "json":
        return _dump_json(d)
    return _lines((k, "" if v is None else v) for k, v in d.items())


def _bound_report(args) -> bounds.BoundReport:
    stats = {k: getattr(args, k) for k in ("L_S", "C_S", "W_S", "L_m", "D_max", "D_max_vee")}
    if args.generalization:
        q = bounds.BoundQuery(args.cls, args.m, args.r, args.mu, args.M, args.delta, args.n, args.k,
                              args.p, kappa=args.kappa, **stats)
        return bounds.generalization_bound(q)

    def need(name):
        v = getattr(args, name)
        if v is None:
            raise DomainError(f"--class {args.cls} needs --{name.replace('_', '-')}")
        return v

    if args.cls == "A":
        n, k = need("n"), need("k")
        if args.r == 1.0 and args.L_m is not None:
            return bounds.bound_An1(args.m, n, k, args.L_m)
        return bounds.bound_RAnr(args.m, n, k, args.r, need("L_S"))
    if args.cls == "R1r":
        if args.D_max is not None:
            return bounds.bound_dist_R1r(args.m, args.r, args.D_max, args.kappa)
        return bounds.bound_R1r(args.m, args.r, need("C_S"))
    if args.cls == "R2r":
        return bounds.bound_R2r(args.m, args.r)
    if args.cls == "H1r":
        if args.D_max_vee is not None:
            return bounds.bound_dist_H1r(args.m, args.r, args.D_max_vee, args.kappa)
        return bounds.bound_H1r(args.m, args.r, need("W_S"))
    return bounds.bound_H2r(args.m, args.r)


def cmd_bound(args) -> str:
    rep = _bound_report(args)
    if args.format == "json":
        return _dump_json(rep.to_dict())
    if args.format == "csv":
        return rep.to_csv()
    return rep.to_text()


def cmd_sample(args) -> str:
    A = load_automaton(args.automaton)
    S = sample_pfa(A, args.m, args.seed, args.max_len)
    text = dumps_sample(S, A.alphabet)
    if args.output:
        Path(args.output).write_text(text)
        return ""
    return text


_SEED_LINE = re.compile(r"^\s*seed\s*[=:]", re.MULTILINE)


def cmd_experiment(args) -> str:
    text = Path(args.spec).read_text()
    spec = experiments.parse_spec(text)
    if args.seed is not None:
        spec.seed = args.seed
    elif spec.experiment != "hankel" or spec.family == "random":
        if not _SEED_LINE.search(text):
            raise UsageError("stochastic experiments need a seed (spec key 'seed' or --seed)")
    if args.jobs is not None:
        spec.jobs = args.jobs
    header, rows, _ = experiments.run(spec)
    csv_text = experiments.to_csv(header, rows)
    output = args.output or spec.output
    if output:
        Path(output).write_text(csv_text)
        return ""
    return csv_text


def cmd_check(args) -> tuple[str, int]:
    spec = experiments.ExperimentSpec("inequality", family=args.family, model=args.model,
                                      m_grid=args.m_grid, trials=args.trials, seed=args.seed,
                                      k=args.k, stop=args.stop, r=args.r,
                                      ascent_draws=args.ascent_draws, jobs=args.jobs or 1)
    rows, summary = experiments.run_inequality_suite(spec)
    if args.output:
        Path(args.output).write_text(experiments.to_csv(experiments.INEQUALITY_HEADER, rows))
    ok = summary["violations"] == 0
    out = _lines([("rows", summary["rows"]), ("violations", summary["violations"]),
                  ("result", "PASS" if ok else "FAIL")])
    return out, 0 if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wfabounds", allow_abbrev=False,
                     description="Norms, Hankel spectra, Rademacher estimates and bounds for WFAs.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text, allow_abbrev=False)
        return p

    def fmt_flag(p, choices=("text", "json")):
        p.add_argument("--format", choices=choices, default="text")

    def ws_flags(p):
        p.add_argument("--seed", type=int, help="seed for the W_S heuristic when needed")
        p.add_argument("--restarts", type=int, default=16)
        p.add_argument("--guard", type=int, default=sample_stats.SPLIT_GUARD,
                       help="largest number of splits enumerated exactly")

    p = add("eval", "evaluate an automaton on a string")
    p.add_argument("--automaton", required=True)
    p.add_argument("--string", required=True,
                   help=f"whitespace-separated tokens, a compact token string, or {EPS}")

    p = add("norm", "parameter norm and function norms of an automaton")
    p.add_argument("--automaton", required=True)
    p.add_argument("--p", type=_p_value, default=1.0)
    p.add_argument("--length", type=int, default=10, help="cutoff of the truncated l_p sum")
    fmt_flag(p)

    p = add("spectrum", "Hankel singular values and Schatten norms")
    p.add_argument("--automaton", required=True)
    fmt_flag(p)

    p = add("stats", "sample statistics L_S, C_S and W_S")
    p.add_argument("--sample", required=True)
    p.add_argument("--automaton", help="take the alphabet from this automaton file")
    ws_flags(p)
    fmt_flag(p)

    p = add("rademacher", "empirical Rademacher complexity estimates")
    p.add_argument("--sample", required=True)
    p.add_argument("--automaton", help="take the alphabet from this automaton file")
    p.add_argument("--class", dest="cls", choices=("R", "H", "A"), required=True)
    p.add_argument("--p", type=_p_value, default=2.0)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--n", type=int, help="state count for --class A")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--step-size", type=float, default=0.1)
    ws_flags(p)
    fmt_flag(p)

    p = add("bound", "evaluate a complexity or generalization bound")
    p.add_argument("--class", dest="cls", choices=bounds.CLASSES, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=_p_value, default=1.0)
    for name, typ in (("L_S", int), ("C_S", int), ("W_S", int), ("L_m", float),
                      ("D_max", float), ("D_max_vee", float)):
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=typ)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--generalization", action="store_true",
                   help="assemble the full generalization slack instead of the complexity bound")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.05)
    fmt_flag(p, ("text", "json", "csv"))

    p = add("sample", "draw strings from a PFA")
    p.add_argument("--automaton", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--max-len", type=int, default=100_000)
    p.add_argument("--output")

    p = add("experiment", "run an experiment spec and write CSV")
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int, help="overrides the spec seed")
    p.add_argument("--output")
    p.add_argument("--jobs", type=int)

    p = add("check", "run the per-sample inequality suite")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--family", default="geometric",
                   choices=("geometric", "constant0", "powerlaw", "pfa"))
    p.add_argument("--model")
    p.add_argument("--m-grid", dest="m_grid", type=_int_list, default=(2, 4, 8))
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--stop", type=float, default=0.5)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--ascent-draws", type=int, default=0)
    p.add_argument("--output")
    p.add_argument("--jobs", type=int)
    return parser


COMMANDS = {"eval": cmd_eval, "norm": cmd_norm, "spectrum": cmd_spectrum, "stats": cmd_stats,
            "rademacher": cmd_rademacher, "bound": cmd_bound, "sample": cmd_sample,
            "experiment": cmd_experiment, "check": cmd_check}


def run(argv=None) -> tuple[int, str, str]:
    """Run the CLI and return ``(exit_code, stdout, stderr)`` without printing."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage() + "wfabounds: error: a subcommand is required")
        res = COMMANDS[args.command](args)
    except UsageError as exc:
        return EXIT_USAGE, "", f"{exc}\n"
    except WFAError as exc:
        return exc.exit_code, "", f"error: {exc}\n"
    except (OSError, UnicodeDecodeError) as exc:
        return DomainError.exit_code, "", f"error: {exc}\n"
    except SystemExit as exc:  # --help
        return (0 if exc.code in (None, 0) else EXIT_USAGE), "", ""
    if isinstance(res, tuple):
        return res[1], res[0], ""
    return 0, res, ""


def main(argv=None) -> int:
    code, out, err = run(argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
