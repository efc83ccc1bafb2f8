"""Command-line experiment runner.

Every subcommand writes ``<out-dir>/<command>.json`` (and, for Monte Carlo
runs, ``<out-dir>/<command>.csv``) and echoes one of them to stdout. A
report embeds the configuration it was produced from; passing a report back
through ``--config`` replays it. Only the ``meta`` block (timestamp, version)
differs between replays.

Exit status: 0 on success, 1 when an operation contract fails, 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

from . import __version__
from .emx import (
    ConceptClass,
    Distribution,
    extraction_experiment,
    loo_learner,
    lw_generalization,
    lw_learner,
    omega_regret_closed_form,
    regret_experiment,
    regret_sweep,
    uniform_on_range,
)
from .errors import ConfigError, ContractError
from .scaffold import Scaffold, point_to_json, sample_from_json
from .schemes import (
    diagnose,
    exhaustive_counterexample,
    ladder_scheme,
    scheme_from_json,
    scheme_to_json,
    tabulate,
)
from .search import PqrCertificate, PqrInstance, counting_bound, search_pqr, verify_certificate
from .transforms import (
    GrowthFunction,
    PqrCompression,
    SchemeFamily,
    decrease_size,
    find_marker,
    imperfect_to_perfect,
    labeled_lift,
    uniformize,
    vc_dimension,
)

GLOBAL_KEYS = ("out_dir", "format", "config", "func", "command")


# -- helpers ---------------------------------------------------------------


def _json_arg(text, field):
    """Parse a JSON literal, or read it from a file when ``text`` is a path."""
    if text is None:
        raise ConfigError("missing value", field=field)
    if isinstance(text, (dict, list)):
        return text
    stripped = text.strip()
    if not stripped.startswith(("{", "[", '"')) and Path(stripped).is_file():
        stripped = Path(stripped).read_text()
    try:
        return json.loads(stripped)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} col {exc.colno}: {exc.msg}", field=field) from exc


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise ConfigError("missing value", field="--" + name.replace("_", "-"))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _points(sample) -> list:
    return [point_to_json(x) for x in sample]


def _scheme_arg(args):
    if args.scheme in ("omega", "ladder"):
        return scheme_from_json({"kind": args.scheme, "depth": getattr(args, "depth", None) or 0})
    obj = _json_arg(args.scheme, "--scheme")
    if isinstance(obj, str):
        obj = {"kind": obj}
    return scheme_from_json(obj)


# -- subcommands -----------------------------------------------------------


def cmd_ladder(args):
    _require(args, "depth", "sample")
    s = Scaffold(args.depth)
    sample = sample_from_json(_json_arg(args.sample, "--sample"), s.arity)
    scheme = ladder_scheme(s)
    kept, side = scheme.compress(sample)
    reason = diagnose(scheme, sample)
    region = scheme.reconstruct(kept, side)
    size = len(region)
    result = {
        "depth": args.depth,
        "sample": _points(sample),
        "compression": _points(kept),
        "side": {"value": side.value, "bits": side.bit_budget},
        "size_bound": scheme.d,
        "reconstruction_size": size,
        "covered": reason is None,
    }
    if size <= args.max_listed:
        result["reconstruction"] = _points(sorted(region))
    if reason is not None:
        result["reason"] = reason
    return result, None


def cmd_validate(args):
    _require(args, "scheme")
    scheme = _scheme_arg(args)
    result = {"scheme": scheme.name, "d": scheme.d}
    if args.sample is not None:
        sample = sample_from_json(_json_arg(args.sample, "--sample"))
        reason = diagnose(scheme, sample)
        result.update(mode="sample", valid=reason is None, reason=reason)
    else:
        _require(args, "pool", "p")
        pool = sample_from_json(_json_arg(args.pool, "--pool"))
        bad = exhaustive_counterexample(scheme, pool, args.p, args.cap)
        result.update(
            mode="exhaustive",
            p=args.p,
            subsets=math.comb(len(pool), args.p),
            valid=bad is None,
            counterexample=None if bad is None else _points(bad),
        )
    return result, None


def _transform_uniformize(payload):
    growth = GrowthFunction.from_json(payload.get("growth", "identity"))
    members = {int(m): scheme_from_json(obj) for m, obj in payload.get("members", {}).items()}
    pool = sample_from_json(payload.get("pool", []))
    p = int(payload.get("max_size", 0))
    scheme = uniformize(SchemeFamily(members), growth)
    table = tabulate(scheme, pool, p)
    bad = [
        (size, exhaustive_counterexample(scheme, pool, size)) for size in range(p + 1)
    ]
    bad = [(size, b) for size, b in bad if b is not None]
    return {
        "growth": growth.to_json(),
        "scheme": scheme_to_json(table),
        "valid": not bad,
        "counterexample": _points(bad[0][1]) if bad else None,
    }


def _transform_decrease(payload):
    scheme = scheme_from_json(payload["scheme"])
    pool = sample_from_json(payload["pool"])
    sub = sample_from_json(payload["subpool"])
    k = int(payload["k"])
    marker = find_marker(scheme, pool, sub, k)
    out = decrease_size(scheme, pool, sub, k)
    table = tabulate(out, sub, k)
    bad = exhaustive_counterexample(out, sub, k)
    return {
        "k": k,
        "marker": point_to_json(marker),
        "scheme": scheme_to_json(table),
        "valid": bad is None,
        "counterexample": None if bad is None else _points(bad),
    }


def _transform_imperfect(payload):
    inst = PqrInstance(int(payload["n"]), int(payload["p"]), int(payload["q"]), int(payload["r"]), int(payload["budget"]))
    cert = PqrCertificate.from_json(payload["certificate"])
    if not verify_certificate(inst, cert):
        raise ConfigError("the input certificate does not verify", field="certificate")
    perfect = imperfect_to_perfect(PqrCompression.from_certificate(inst, cert))
    new_cert = perfect.to_certificate()
    budget = max(len(e) for e in new_cert.eta.values())
    new_inst = PqrInstance(inst.n, inst.p, inst.p - 1, inst.p, budget)
    return {
        "instance": new_inst.to_json(),
        "certificate": new_cert.to_json(),
        "valid": verify_certificate(new_inst, new_cert),
    }


def _transform_lift(payload):
    H = ConceptClass.from_json(payload)
    lifted = labeled_lift(H)
    return {
        "class": lifted.to_json(),
        "size": len(lifted),
        "vc_dimension": vc_dimension(H.concepts, H.pool),
        "lifted_vc_dimension": vc_dimension(lifted.concepts, lifted.pool),
    }


TRANSFORMS = {
    "uniformize": _transform_uniformize,
    "decrease-size": _transform_decrease,
    "imperfect-to-perfect": _transform_imperfect,
    "labeled-lift": _transform_lift,
}


def cmd_transform(args):
    _require(args, "kind", "input")
    payload = _json_arg(args.input, "--input")
    if not isinstance(payload, dict):
        raise ConfigError("expected a JSON object", field="--input")
    try:
        result = TRANSFORMS[args.kind](payload)
    except KeyError as exc:
        raise ConfigError("missing key", field=str(exc.args[0])) from exc
    return {"kind": args.kind, **result}, None


def _distribution(args):
    if args.distribution is not None:
        return Distribution.from_json(_json_arg(args.distribution, "--distribution"))
    return uniform_on_range(args.support_size)


def cmd_learn(args):
    _require(args, "m", "trials")
    scheme = _scheme_arg(args)
    if args.d is not None and args.d != scheme.d:
        raise ConfigError(f"scheme {scheme.name} has size {scheme.d}, not {args.d}", field="--d")
    if args.concept_class:
        F = ConceptClass.from_json(_json_arg(args.concept_class, "--class"))
    else:
        F = ConceptClass.fin_subsets(args.depth if args.scheme == "ladder" else 0)
    P = _distribution(args)
    learner = loo_learner(scheme, F) if args.learner == "loo" else lw_learner(scheme, F)
    report = regret_experiment(learner, P, F, args.m, args.trials, args.seed)
    result = {"learner": learner.name, **report.to_json()}
    if args.learner == "loo" and scheme.name == "omega" and args.distribution is None:
        expected = float(omega_regret_closed_form(args.support_size, args.m))
        result["expected"] = expected
        result["expected_within_3se"] = abs(report.mean_regret - expected) <= 3 * report.stderr
    return result, _csv_text(("trial", "regret"), report.csv_rows())


def cmd_lw_learn(args):
    res = lw_generalization(
        args.k, args.eps, args.delta, args.runs, args.distributions, args.seed,
        pool_size=args.pool_size, max_support=args.max_support,
    )
    regrets = res.pop("regrets")
    return res, _csv_text(("trial", "regret"), enumerate(regrets))


def cmd_extract(args):
    res = extraction_experiment(args.d0, args.pool_size, args.max_size, args.samples, args.seed)
    return res, None


def cmd_pqr(args):
    _require(args, "n", "p", "q", "r", "budget")
    inst = PqrInstance(args.n, args.p, args.q, args.r, args.budget)
    res = search_pqr(inst, cap=args.cap)
    out = {"instance": inst.to_json(), **res.to_json()}
    if inst.r == inst.p:
        out["counting_bound"] = counting_bound(inst)
    if res.certificate is not None:
        out["verified"] = verify_certificate(inst, res.certificate)
    return out, None


def cmd_scaling(args):
    try:
        ms = [int(v) for v in str(args.ms).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError("expected comma-separated integers", field="--ms") from exc
    reports, slope = regret_sweep(ms, args.trials, args.support_size, args.seed)
    rows = [(r.m, r.mean_regret, r.stderr, r.bound) for r in reports]
    lo, hi = args.slope_window
    result = {
        "ms": ms,
        "trials": args.trials,
        "support_size": args.support_size,
        "points": [r.to_json() for r in reports],
        "slope": slope,
        "slope_window": [lo, hi],
        "pass": lo <= slope <= hi,
    }
    return result, _csv_text(("m", "mean_regret", "stderr", "bound"), rows)


# -- parser ----------------------------------------------------------------


def _global_flags(parser, default):
    """Global flags; accepted before or after the subcommand. The copy on
    each subcommand uses ``SUPPRESS`` so it only overrides when given."""
    d = (lambda v: v) if default else (lambda v: argparse.SUPPRESS)
    parser.add_argument("--seed", type=int, default=d(0), help="base random seed (default: 0)")
    parser.add_argument("--out-dir", default=d("reports"), help="report directory (default: reports)")
    parser.add_argument("--format", choices=("json", "csv"), default=d("json"), help="what to print")
    parser.add_argument("--config", default=d(None), help="JSON config, or a previous report to replay")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, default=False)

    parser = argparse.ArgumentParser(
        prog="monocomp",
        description="Monotone compression schemes, EMX learners and (p->q->r) search.",
    )
    _global_flags(parser, default=True)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ladder", aliases=["game"], parents=[common], help="compress and reconstruct a sample")
    p.add_argument("--depth", type=int)
    p.add_argument("--sample", help='JSON sample, e.g. "[[2,5],[1,7]]"')
    p.add_argument("--max-listed", type=int, default=200, help="list reconstructions up to this size")
    p.set_defaults(func=cmd_ladder)

    p = sub.add_parser("validate", parents=[common], help="check a scheme on a sample or a pool")
    p.add_argument("--scheme", help='scheme JSON or file, e.g. \'{"kind":"ladder","depth":1}\'')
    p.add_argument("--sample")
    p.add_argument("--pool")
    p.add_argument("--p", type=int)
    p.add_argument("--cap", type=int, default=250_000)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("transform", parents=[common], help="apply a scheme transformation")
    p.add_argument("--kind", choices=sorted(TRANSFORMS))
    p.add_argument("--input", help="JSON object or file with the transform's inputs")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("learn", parents=[common], help="regret experiment for a compression learner")
    p.add_argument("--scheme", default="omega", help="omega, ladder, or scheme JSON")
    p.add_argument("--depth", type=int, default=1, help="ladder depth when --scheme ladder")
    p.add_argument("--d", type=int, help="expected compression size (checked)")
    p.add_argument("--learner", choices=("loo", "lw"), default="loo")
    p.add_argument("--m", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--support-size", type=int, default=10, help="uniform distribution on {0..N-1}")
    p.add_argument("--distribution", help="distribution JSON or file (overrides --support-size)")
    p.add_argument("--class", dest="concept_class", help="class JSON (default: finite subsets)")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("lw-learn", parents=[common], help="LW learner failure rate at the derived sample size")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--eps", type=float, default=1 / 3)
    p.add_argument("--delta", type=float, default=1 / 3)
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--distributions", type=int, default=20)
    p.add_argument("--pool-size", type=int, default=100)
    p.add_argument("--max-support", type=int, default=30)
    p.set_defaults(func=cmd_lw_learn)

    p = sub.add_parser("extract", parents=[common], help="extract a compression from the max-learner")
    p.add_argument("--d0", type=int, default=3)
    p.add_argument("--pool-size", type=int, default=100)
    p.add_argument("--max-size", type=int, default=8)
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("pqr", parents=[common], help="decide a bounded (p->q->r) instance")
    for name in ("n", "p", "q", "r", "budget"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--cap", type=int, default=100_000)
    p.set_defaults(func=cmd_pqr)

    p = sub.add_parser("scaling", parents=[common], help="regret-vs-m sweep (plot-ready CSV)")
    p.add_argument("--ms", default="9,19,39,79,159")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--support-size", type=int, default=1000)
    p.add_argument("--slope-window", type=float, nargs=2, default=[-1.25, -0.75])
    p.set_defaults(func=cmd_scaling)
    return parser


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _load_config(path, sub, command) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", field="--config") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}: {exc.msg}", field="--config") from exc
    if isinstance(cfg, dict) and isinstance(cfg.get("config"), dict):
        cfg = cfg["config"]
    if not isinstance(cfg, dict):
        raise ConfigError("expected a JSON object", field="--config")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    if cfg.pop("command", command) not in (command, *(["ladder"] if command == "game" else [])):
        raise ConfigError("config was written for another subcommand", field="command")
    known = {a.dest for a in sub._actions}
    for key in cfg:
        if key not in known or key in GLOBAL_KEYS:
            raise ConfigError("unknown field", field=key)
    return cfg


def parse(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = _subparser(parser, args.command)
        sub.set_defaults(**_load_config(args.config, sub, args.command))
        args = parser.parse_args(argv)
    return args


def config_of(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in GLOBAL_KEYS}
    cfg["command"] = "ladder" if args.command == "game" else args.command
    return cfg


def run(args) -> int:
    """Dispatch ``args`` and write the report files; returns the exit status."""
    command = "ladder" if args.command == "game" else args.command
    try:
        result, csv_text = args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ContractError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    report = {
        "command": command,
        "config": config_of(args),
        "result": result,
        "meta": {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()), "version": __version__},
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{command}.json").write_text(text)
    if csv_text is not None:
        with open(out_dir / f"{command}.csv", "w", newline="") as fh:
            fh.write(csv_text)
    if args.format == "csv" and csv_text is not None:
        sys.stdout.write(csv_text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    try:
        args = parse(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
