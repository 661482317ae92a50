"""Command-line front end: ``qprob {pmf,moments,verify,sample,limit}``.

Every rational is printed as an exact ``"num/den"`` string and every interval
as ``{"lo": ..., "hi": ...}``, so output can be re-parsed without loss.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from typing import Any, Optional, Sequence

from . import qdist, qprocess, qverify
from .errors import DomainError, IdentityViolation, ResourceError
from .qnum import Interval, PPoly, rational

PMF_FAMILIES = (
    "bernoulli", "bernoulli-inf", "geometric", "negbinomial", "poisson",
    "hypergeom", "contagious", "uniform", "range", "range-alt",
)
MOMENT_FAMILIES = (
    "bernoulli", "bernoulli-inf", "poisson", "hypergeom", "contagious",
    "uniform", "range", "range-alt",
)
SAMPLE_FAMILIES = ("bernoulli", "hypergeom", "contagious")

# which flags each family reads
FAMILY_PARAMS = {
    "bernoulli": ("n", "p", "q"),
    "bernoulli-inf": ("p", "q"),
    "geometric": ("p", "q"),
    "negbinomial": ("r", "p", "q"),
    "poisson": ("lam", "q"),
    "hypergeom": ("m", "u", "n", "q"),
    "contagious": ("m", "u", "s", "n", "q"),
    "uniform": ("M", "q"),
    "range": ("M", "n", "q"),
    "range-alt": ("M", "q"),
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def to_json(x: Any) -> Any:
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Interval):
        return {"lo": str(x.lo), "hi": str(x.hi)}
    if isinstance(x, PPoly):
        return {"poly": [str(c) for c in x.coeffs]}
    if isinstance(x, dict):
        return {str(k): to_json(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_json(v) for v in x]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(record: dict) -> str:
    return json.dumps(to_json(record), indent=2, sort_keys=False)


def _pmf_record(pmf: qdist.Pmf) -> dict:
    return {
        "entries": {k: pmf.entries[k] for k in sorted(pmf.entries)},
        "values": {k: pmf.values[k] for k in sorted(pmf.values)},
        "defect": pmf.defect,
        "exact": pmf.exact,
    }


def _pmf_csv(pmf: qdist.Pmf) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kappa", "value", "lo", "hi"])
    for k in sorted(pmf.entries):
        v = pmf.entries[k]
        lo, hi = (v.lo, v.hi) if isinstance(v, Interval) else (v, v)
        w.writerow([k, str(pmf.values[k]), str(lo), str(hi)])
    d = pmf.defect
    lo, hi = (d.lo, d.hi) if isinstance(d, Interval) else (d, d)
    w.writerow(["defect", "", str(lo), str(hi)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# parameter handling
# ---------------------------------------------------------------------------


def _params(args, family: str) -> dict:
    out = {}
    for name in FAMILY_PARAMS[family]:
        val = getattr(args, name)
        if val is None:
            flag = "--lambda" if name == "lam" else f"--{name}"
            raise UsageError(f"{family} needs {flag}")
        out[name] = val
    return out


def _spec(family: str, p: dict):
    if family == "bernoulli":
        return qdist.Bernoulli(p["n"], p["p"], p["q"])
    if family == "bernoulli-inf":
        return qdist.BernoulliInfinite(p["p"], p["q"])
    if family == "geometric":
        return qdist.Geometric(p["p"], p["q"])
    if family == "negbinomial":
        return qdist.NegBinomial(p["r"], p["p"], p["q"])
    if family == "poisson":
        return qdist.Poisson(p["lam"], p["q"])
    if family == "hypergeom":
        return qdist.Hypergeom(p["m"], p["u"], p["n"], p["q"])
    if family == "contagious":
        return qdist.Contagious(p["m"], p["u"], p["s"], p["n"], p["q"])
    if family == "uniform":
        return qdist.Uniform(p["M"], p["q"])
    return None


def _pmf(family: str, p: dict, args) -> qdist.Pmf:
    if family == "range":
        if p["M"] < 0 or p["n"] < 1:
            raise DomainError("range needs M >= 0 and n >= 1")
        return qdist.range_pmf(p["M"], p["n"], p["q"])
    if family == "range-alt":
        if p["M"] < 0:
            raise DomainError("range-alt needs M >= 0")
        return qdist.range_pmf_alt_n2(p["M"], p["q"])
    spec = _spec(family, p)
    spec.validate()
    if family == "geometric":
        return qdist.geometric_pmf(spec.p, spec.q, args.kappa_max, args.rescaled, args.eps)
    return qdist.pmf_of(spec, args.kappa_max, args.eps)


def _public(p: dict) -> dict:
    return {("lambda" if k == "lam" else k): v for k, v in p.items()}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_pmf(args) -> tuple[str, int]:
    p = _params(args, args.family)
    pmf = _pmf(args.family, p, args)
    if args.format == "csv":
        return _pmf_csv(pmf), 0
    record = {"command": "pmf", "family": args.family, "params": _public(p)}
    if not pmf.exact:
        record["truncation"] = {"kappa_max": args.kappa_max, "eps": args.eps}
    record["result"] = _pmf_record(pmf)
    return dumps(record), 0


def cmd_moments(args) -> tuple[str, int]:
    fam = args.family
    p = _params(args, fam)
    if fam == "bernoulli":
        _spec(fam, p).validate()
        rep = qdist.bernoulli_moments(p["n"], p["p"], p["q"])
    elif fam == "bernoulli-inf":
        _spec(fam, p).validate()
        rep = qdist.bernoulli_moments(0, p["p"], p["q"], infinite=True)
    elif fam == "poisson":
        _spec(fam, p).validate()
        rep = qdist.poisson_moments(p["lam"], p["q"])
    elif fam == "uniform":
        _spec(fam, p).validate()
        rep = qdist.uniform_moments(p["M"], p["q"])
    else:
        rep = qdist.MomentReport.from_pmf(_pmf(fam, p, args))
    record = {
        "command": "moments",
        "family": fam,
        "params": _public(p),
        "result": {"mean": rep.mean, "second_moment": rep.second_moment, "variance": rep.variance},
    }
    return dumps(record), 0


def _grid(args) -> qverify.GridSpec:
    overrides = {}
    for item in args.grid or ():
        if "=" not in item:
            raise UsageError(f"--grid expects key=v1,v2,..., got {item!r}")
        key, vals = item.split("=", 1)
        overrides[key.strip()] = vals
    return qverify.default_grid().with_overrides(overrides)


def _check_record(c: qverify.IdentityCheck) -> dict:
    rec = {
        "id": c.id,
        "statement": c.statement,
        "mode": c.mode,
        "tolerance": c.tolerance,
        "outcome": c.outcome,
        "watchlist": c.watchlist,
        "bindings_checked": len(c.grid),
        "failures": c.failures,
        "excluded": [{"binding": b, "reason": r} for b, r in c.excluded],
    }
    if c.max_width is not None:
        rec["max_width"] = c.max_width
    if c.tables:
        rec["tables"] = [_table_record(t) for t in c.tables]
    if c.counterexample is not None:
        ce = c.counterexample
        rec["counterexample"] = {"binding": ce.binding, "lhs": ce.lhs, "rhs": ce.rhs, "reason": ce.reason}
    return rec


def cmd_verify(args) -> tuple[str, int]:
    ids = qverify.catalog_ids() if args.all or not args.ids else args.ids
    unknown = [i for i in ids if i not in qverify.CATALOG]
    if unknown:
        raise UsageError(f"unknown identity id(s): {', '.join(unknown)}")
    grid = _grid(args)
    checks = [qverify.run_identity(i, grid) for i in ids]
    gated = [c for c in checks if args.include_watchlist or not c.watchlist]
    ok = all(c.passed for c in gated)
    record = {
        "command": "verify",
        "grid": {
            "qs": grid.qs, "super_qs": grid.super_qs, "ps": grid.ps, "vs": grid.vs,
            "max_int": grid.max_int,
        },
        "include_watchlist": args.include_watchlist,
        "results": [_check_record(c) for c in checks],
        "summary": {
            "passed": sum(c.passed for c in checks),
            "failed": [c.id for c in checks if not c.passed],
            "gate_passed": ok,
        },
    }
    return dumps(record), 0 if ok else 1


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("QPROB_SEED")
    if env is not None:
        try:
            return int(env, 0)
        except ValueError:
            raise UsageError(f"QPROB_SEED must be an integer, got {env!r}") from None
    return 0


def cmd_sample(args) -> tuple[str, int]:
    fam = args.family
    p = _params(args, fam)
    spec = _spec(fam, p)
    seed = _seed(args)
    rep = qprocess.sample_paths(spec, n_samples=args.samples, seed=seed)
    record = {
        "command": "sample",
        "family": fam,
        "params": _public(p),
        "seed": seed,
        "result": {
            "n_samples": rep.n_samples,
            "counts": rep.counts,
            "empirical": rep.empirical,
            "analytic": qprocess.analytic_pmf(rep.spec).entries,
            "tv_distance": rep.tv_distance,
        },
    }
    return dumps(record), 0


def _table_record(t: qverify.LimitTable) -> dict:
    return {
        "name": t.name,
        "params": _public(t.params),
        "rows": [{"point": x, "distance": d} for x, d in zip(t.points, t.distances)],
        "strictly_decreasing": t.strictly_decreasing,
    }


def cmd_limit(args) -> tuple[str, int]:
    if args.name not in qverify.LIMITS:
        raise UsageError(f"unknown limit {args.name!r}; known: {', '.join(qverify.LIMITS)}")
    spec = qverify.LIMITS[args.name]
    given = {"q": args.q, "p": args.p, "c": args.c, "n": args.n, "lam": args.lam}
    params = {k: v for k, v in given.items() if k in spec.defaults and v is not None}
    points = [int(x) for x in args.points.split(",")] if args.points else None
    table = qverify.limit_table(args.name, points, **params)
    record = {
        "command": "limit",
        "description": spec.description,
        "point_name": spec.point_name,
        "result": _table_record(table),
    }
    return dumps(record), 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _rational_arg(s: str) -> Fraction:
    try:
        return rational(s)
    except (ValueError, ZeroDivisionError, DomainError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r} ({exc})") from None


def _positive_rational(s: str) -> Fraction:
    v = _rational_arg(s)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {s!r}")
    return v


def _add_family_flags(p: argparse.ArgumentParser):
    p.add_argument("--q", type=_positive_rational, help="base q > 0 (e.g. 1/2)")
    p.add_argument("--p", type=_rational_arg, help="success parameter p")
    p.add_argument("--n", type=int, help="trials or draws")
    p.add_argument("--m", type=int, help="marked balls")
    p.add_argument("--u", type=int, help="unmarked balls")
    p.add_argument("--s", type=int, help="contagion increment")
    p.add_argument("--M", type=int, help="largest uniform index")
    p.add_argument("--r", type=int, help="target number of non-zeroes")
    p.add_argument("--lambda", dest="lam", type=_rational_arg, help="Poisson rate")
    p.add_argument("--kappa-max", type=int, default=20, help="last listed outcome of infinite laws")
    p.add_argument("--eps", type=_positive_rational, default=Fraction(1, 10**12),
                   help="total width budget for certified intervals")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qprob", description="q-deformed probability toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmf", help="probability mass function")
    p.add_argument("family", choices=PMF_FAMILIES)
    _add_family_flags(p)
    p.add_argument("--rescaled", action="store_true", help="renormalize the q-geometric law")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_pmf)

    p = sub.add_parser("moments", help="mean, second moment and variance")
    p.add_argument("family", choices=MOMENT_FAMILIES)
    _add_family_flags(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("verify", help="run catalog identities")
    p.add_argument("ids", nargs="*", help="catalog ids (default: all)")
    p.add_argument("--all", action="store_true")
    p.add_argument("--grid", action="append", metavar="KEY=V1,V2",
                   help="override a grid range: q, p, v or max_int")
    p.add_argument("--include-watchlist", action="store_true",
                   help="let watchlist identities affect the exit code")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sample", help="simulate the sequential process")
    p.add_argument("family", choices=SAMPLE_FAMILIES)
    _add_family_flags(p)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, help="64-bit seed (falls back to QPROB_SEED, then 0)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("limit", help="convergence table for a limit statement")
    p.add_argument("name", help=", ".join(qverify.LIMITS))
    p.add_argument("--q", type=_positive_rational)
    p.add_argument("--p", type=_rational_arg)
    p.add_argument("--c", type=int, help="fixed urn offset")
    p.add_argument("--n", type=int)
    p.add_argument("--lambda", dest="lam", type=_rational_arg)
    p.add_argument("--points", help="comma-separated parameter sequence")
    p.set_defaults(func=cmd_limit)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text, code = args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (DomainError, ResourceError, IdentityViolation, ValueError) as exc:
        print(f"qprob: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
