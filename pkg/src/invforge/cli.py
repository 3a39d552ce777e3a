"""Command-line driver: catalog listings, verification runs, rank and
completeness checks, and expression evaluation, with machine-readable
JSON reports.

Exit codes: 0 all checks PASS, 1 at least one FAIL, 2 usage/configuration
error, 3 internal evaluation failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone

from . import __version__
from .exprlang import BindError, ParseError, bind
from .invcat import EQUATIONS, basis
from .jetspace import COMPLEX, REAL, minkowski, to_log_jets
from .liealg import catalog, generic_rank, make_spec, prolong2
from .verify import (
    DEFAULT_SAMPLES,
    DEFAULT_TOL,
    check_absolute,
    check_on_manifold,
    completeness,
)

_ALGEBRAS = {
    "AO": "rotations only; n >= 3, any m",
    "AE": "translations + rotations; n >= 3, any m",
    "AE1": "AE plus dilation (parameter lambda)",
    "AC": "AE1 plus special conformal generators",
    "AP": "spacetime translations + pseudo-rotations; n >= 3",
    "APtilde": "AP plus dilation (parameter lambda)",
    "AC1n": "APtilde plus special conformal generators",
    "AG_I": "time/space translations, rotations, boosts, field scaling "
            "(parameter mu)",
    "AG1_I": "AG_I plus dilation (parameter lambda)",
    "AG2_I": "AG1_I plus the projective generator (lambda = -n/2 when "
             "mu != 0)",
    "AG_II": "complex-pair analogue of AG_I (parameter mass)",
    "AG1_II": "complex-pair analogue of AG1_I",
    "AG2_II": "complex-pair analogue of AG2_I",
    "AP_inf": "sampled generators of the eikonal equation's infinite "
              "algebra (seed, instances, extended)",
    "AP_BornInfeld": "pseudo-rotations treating the field as an extra "
                     "base coordinate",
}

_BASES = [
    ("AE", "scalar/multi-field jet invariants (power traces and forms)"),
    ("AO", "rotation invariants including the position vector"),
    ("AE1", "dilation-normalized invariants, branches lambda = 0 and != 0"),
    ("AC", "conformal tensor invariants, branches lambda = 0 and != 0"),
    ("AP", "spacetime power-trace invariants (m fields)"),
    ("APtilde", "dilation-normalized spacetime invariants, two branches"),
    ("AC1n", "conformal spacetime tensor invariants, two branches"),
    ("AG_I", "boost-covariant invariants on log-substituted jets"),
    ("AG1_I", "dilation-normalized log-jet invariants"),
    ("AG2_I", "projective combinations (per-member verdicts; mu = 0 "
              "branch uses the implicit theta solve)"),
    ("AG_II", "conjugate-pair invariants on log-substituted jets"),
    ("AG1_II", "dilation-normalized conjugate-pair invariants"),
    ("AG2_II", "projective conjugate-pair combinations (mass = 0 branch "
               "available)"),
]

_TENSORS = [
    "theta", "w", "theta_minkowski", "w_minkowski",
    "theta_vector_minkowski", "eikonal_theta", "galilei_theta",
    "galilei_theta2", "galilei_h", "galilei_hhat_mu0", "implicit_theta",
    "hessian", "position",
]


def _env_seed() -> int:
    raw = os.environ.get("INVFORGE_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(2)


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="invforge",
        description="catalog and numerically verify second-order jet "
                    "invariants and invariant equations")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--algebra", help="algebra family name")
        p.add_argument("--n", type=int, help="spatial dimension")
        p.add_argument("--m", type=int, help="number of field slots")
        p.add_argument("--lambda", dest="lam", type=float,
                       help="dilation weight")
        p.add_argument("--mu", type=float, help="boost weight")
        p.add_argument("--mass", type=float, help="mass parameter for the "
                       "complex families")
        p.add_argument("--field", choices=("real", "complex"),
                       help="field kind")
        p.add_argument("--seed", type=int, help="sampling seed "
                       "(default: INVFORGE_SEED or 0)")
        p.add_argument("--samples", type=int, help="sample count")
        p.add_argument("--tol", type=float, help="relative tolerance")
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--expr", help="expression to verify or evaluate")
        p.add_argument("--equation", help="equation name (see 'list "
                       "equations')")
        p.add_argument("--k", type=int, help="order parameter for "
                       "eikonal-trace")
        p.add_argument("--hat-variant", choices=("printed", "uniform"),
                       default="printed",
                       help="reading of the hatted projective sums")
        p.add_argument("--function", action="append", metavar="NAME=EXPR",
                       help="override a sampled coefficient function of the "
                            "eikonal algebra (b01, a0, eta, d; expression "
                            "in u); repeatable")

    p_list = sub.add_parser("list", help="list catalog entries")
    p_list.add_argument("kind",
                        choices=("algebras", "bases", "equations", "tensors"))

    for name, helptext in (
            ("verify", "verify a basis, an equation, or an expression"),
            ("rank", "generic rank of a prolonged algebra"),
            ("completeness", "basis-completeness accounting"),
            ("eval", "evaluate an expression at a sampled generic point")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        if name == "eval":
            p.add_argument("--log-jets", action="store_true",
                           help="evaluate on log-substituted jets")
    return ap


def _read_config_file(path):
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"line {lineno}: expected key=value")
                key, _, val = line.partition("=")
                values[key.strip()] = val.strip()
    except OSError as exc:
        raise ValueError(f"cannot read config file: {exc}")
    return values


_CONFIG_TYPES = {
    "n": int, "m": int, "seed": int, "samples": int, "k": int,
    "lam": float, "mu": float, "mass": float, "tol": float,
}


def _merge_config(args):
    cfg = {}
    if getattr(args, "config", None):
        raw = _read_config_file(args.config)
        for key, val in raw.items():
            key = "lam" if key == "lambda" else key
            caster = _CONFIG_TYPES.get(key, str)
            try:
                cfg[key] = caster(val)
            except ValueError:
                raise ValueError(f"bad value for {key!r}: {val!r}")
    for key in ("algebra", "n", "m", "lam", "mu", "mass", "field", "seed",
                "samples", "tol", "out", "expr", "equation", "k",
                "hat_variant"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    funcs = getattr(args, "function", None)
    if funcs:
        cfg["functions"] = tuple(funcs)
    cfg.setdefault("seed", _env_seed())
    cfg.setdefault("samples", DEFAULT_SAMPLES)
    cfg.setdefault("tol", DEFAULT_TOL)
    cfg.setdefault("n", 3)
    cfg.setdefault("hat_variant", "printed")
    return cfg


def _spec_from_config(cfg, rep=None):
    name = cfg.get("algebra")
    if not name:
        raise ValueError("an --algebra name is required")
    kw = {}
    if "m" in cfg:
        kw["m"] = cfg["m"]
    if "lam" in cfg:
        kw["lam"] = cfg["lam"]
    if "mu" in cfg:
        kw["mu"] = cfg["mu"]
    if "mass" in cfg:
        kw["mass"] = cfg["mass"]
    if cfg.get("field") == "complex":
        kw["field_kind"] = COMPLEX
    if "seed" in cfg and name == "AP_inf":
        kw["seed"] = cfg["seed"]
    if cfg.get("functions") and name == "AP_inf":
        from .exprlang import bind_scalar_function

        pairs = []
        for entry in cfg["functions"]:
            fname, _, expr = entry.partition("=")
            if not expr:
                raise ValueError(f"expected NAME=EXPR, got {entry!r}")
            if fname.strip() == "d":
                kw["extended"] = True
            pairs.append((fname.strip(), bind_scalar_function(expr.strip())))
        kw["functions"] = tuple(pairs)
    if rep is not None:
        kw["rep"] = rep
    elif name.startswith("AG"):
        kw["rep"] = "log"
    return make_spec(name, cfg["n"], **kw)


def _echo_config(cfg):
    out = dict(sorted(cfg.items()))
    out.pop("out", None)
    return out


def _report_doc(cfg, checks):
    checks = sorted(checks, key=lambda c: c["name"])
    verdict = "PASS" if all(c["verdict"] == "PASS" for c in checks) \
        else "FAIL"
    return {
        "schema": 1,
        "meta": {
            "tool": "invforge",
            "version": __version__,
            "generated_at": datetime.now(timezone.utc).isoformat(),
        },
        "config": _echo_config(cfg),
        "checks": checks,
        "verdict": verdict,
    }


def _emit(doc, cfg, stream):
    for check in doc["checks"]:
        extras = ""
        if "rank" in check:
            extras += f" rank={check['rank']}"
        if "expected" in check:
            extras += f" expected={check['expected']}"
        resid = check.get("residual_max")
        if resid is not None:
            extras += f" residual={resid:.3e}"
        print(f"{check['verdict']:4s} {check['name']}{extras}", file=stream)
    print(f"overall: {doc['verdict']}", file=stream)
    if cfg.get("out"):
        with open(cfg["out"], "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _cmd_list(args, stream):
    kind = args.kind
    if kind == "algebras":
        for name, desc in _ALGEBRAS.items():
            print(f"{name:14s} {desc}", file=stream)
    elif kind == "bases":
        for name, desc in _BASES:
            print(f"{name:10s} {desc}", file=stream)
    elif kind == "equations":
        for name, info in EQUATIONS.items():
            print(f"{name:24s} {info.note}", file=stream)
    else:
        for name in _TENSORS:
            print(name, file=stream)
    return 0


def _verify_basis(cfg):
    spec = _spec_from_config(cfg)
    fam = basis(spec, hat_variant=cfg.get("hat_variant", "printed"))
    ops = [prolong2(f) for f in catalog(spec)]
    report = check_absolute(ops, fam, n_samples=cfg["samples"],
                            tol=cfg["tol"], seed=cfg["seed"])
    checks = []
    for label, rec in sorted(report.by_invariant().items()):
        checks.append({
            "name": f"invariant:{label}",
            "paper_anchor": f"basis:{spec.name}",
            "residual_max": rec.max_residual,
            "verdict": rec.verdict,
        })
    return checks


def _verify_equation(cfg):
    name = cfg["equation"]
    info = EQUATIONS.get(name)
    if info is None:
        raise ValueError(f"unknown equation {name!r}")
    n = cfg["n"]
    params = {k: cfg[k] for k in ("mu", "mass", "k", "seed") if k in cfg}
    residual = info.build(n, **params)
    if cfg.get("functions"):
        from .exprlang import bind_scalar_function

        pairs = []
        for entry in cfg["functions"]:
            fname, _, expr = entry.partition("=")
            if not expr:
                raise ValueError(f"expected NAME=EXPR, got {entry!r}")
            pairs.append((fname.strip(), bind_scalar_function(expr.strip())))
        params["functions"] = tuple(pairs)
    spec = info.default_algebra(n, params)
    ops = [prolong2(f) for f in catalog(spec)]
    solve_for = info.solve_hint(n) if info.solve_hint else None
    report = check_on_manifold(ops, residual, solve_for=solve_for,
                               n_samples=min(cfg["samples"], 20),
                               tol=cfg["tol"], seed=cfg["seed"])
    checks = []
    for rec in report.records:
        checks.append({
            "name": f"operator:{rec.operator}",
            "paper_anchor": f"equation:{name}",
            "residual_max": rec.max_residual,
            "verdict": rec.verdict,
        })
    return checks


def _verify_expression(cfg):
    spec = _spec_from_config(cfg)
    fam_space_kind = COMPLEX if spec.field_kind is COMPLEX else REAL
    met = minkowski(spec.n_base) \
        if spec.name in ("AP", "APtilde", "AC1n", "AP_inf") else None
    fn = bind(cfg["expr"], spec.n_base, spec.n_fields, metric=met,
              field_kind=fam_space_kind,
              time_mode=spec.name.startswith("AG")
              or spec.name == "AP_BornInfeld",
              lam=cfg.get("lam", 1.0), mu=cfg.get("mu", 1.0))
    ops = [prolong2(f) for f in catalog(spec)]
    report = check_absolute(ops, [fn], n_samples=cfg["samples"],
                            tol=cfg["tol"], seed=cfg["seed"])
    checks = []
    for rec in report.records:
        checks.append({
            "name": f"expression:{rec.operator}",
            "paper_anchor": f"expression-under:{spec.name}",
            "residual_max": rec.max_residual,
            "verdict": rec.verdict,
        })
    return checks


def _cmd_verify(cfg):
    if cfg.get("expr"):
        return _verify_expression(cfg)
    if cfg.get("equation"):
        return _verify_equation(cfg)
    return _verify_basis(cfg)


def _cmd_rank(cfg):
    spec = _spec_from_config(cfg)
    ops = [prolong2(f) for f in catalog(spec)]
    fam = None
    try:
        fam = basis(spec, hat_variant=cfg.get("hat_variant", "printed"))
    except ValueError:
        pass
    sampler = fam.space.sampler(cfg["seed"]) if fam is not None else None
    if sampler is None:
        from .liealg import make_sampler
        sampler = make_sampler(spec.n_base, spec.n_fields, spec.field_kind,
                               seed=cfg["seed"])
    rank = generic_rank(ops, sampler, trials=max(3, cfg["samples"] // 10))
    checks = [{
        "name": f"rank:{spec.name}",
        "paper_anchor": f"generic-rank:{spec.name}",
        "residual_max": None,
        "rank": rank,
        "expected": len(ops),
        "verdict": "PASS" if rank == len(ops) else "FAIL",
    }]
    return checks, rank


def _cmd_completeness(cfg):
    spec = _spec_from_config(cfg)
    fam = basis(spec, hat_variant=cfg.get("hat_variant", "printed"))
    rep = completeness(spec, fam, n_samples=max(4, cfg["samples"] // 5),
                       tol=cfg["tol"], seed=cfg["seed"])
    checks = [{
        "name": f"completeness:{spec.name}",
        "paper_anchor": f"completeness:{spec.name}",
        "residual_max": None,
        "rank": rep.independence_rank,
        "expected": rep.expected,
        "verdict": rep.verdict,
    }]
    summary = (f"{rep.n_jet_vars} - {rep.algebra_rank} = {rep.expected}, "
               f"family {rep.family_size}, independence "
               f"{rep.independence_rank}, invariance {rep.invariance_verdict}")
    return checks, summary


def _cmd_eval(cfg, args, stream):
    if not cfg.get("expr"):
        raise ValueError("--expr is required for eval")
    n_base = cfg["n"]
    m = cfg.get("m", 1)
    kind = COMPLEX if cfg.get("field") == "complex" else REAL
    fn = bind(cfg["expr"], n_base, m, field_kind=kind,
              lam=cfg.get("lam", 1.0), mu=cfg.get("mu", 1.0))
    point = fn.space.sampler(cfg["seed"])(0)
    if getattr(args, "log_jets", False):
        point = to_log_jets(point)
    val = fn.eval(point)
    print(f"{cfg['expr']} = {val}", file=stream)
    return 0


def main(argv=None, stream=None) -> int:
    stream = stream or sys.stdout
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if args.command == "list":
        return _cmd_list(args, stream)
    try:
        cfg = _merge_config(args)
        if args.command == "eval":
            return _cmd_eval(cfg, args, stream)
        if args.command == "verify":
            checks = _cmd_verify(cfg)
        elif args.command == "rank":
            checks, rank = _cmd_rank(cfg)
        else:
            checks, summary = _cmd_completeness(cfg)
    except (ValueError, ParseError, BindError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, ZeroDivisionError) as exc:
        # EvaluationError and raw numeric failures alike
        print(f"evaluation failure: {exc}", file=sys.stderr)
        return 3
    doc = _report_doc(cfg, checks)
    if args.command == "rank":
        print(f"rank = {doc['checks'][0]['rank']}", file=stream)
    if args.command == "completeness":
        print(summary, file=stream)
    _emit(doc, cfg, stream)
    return 0 if doc["verdict"] == "PASS" else 1


if __name__ == "__main__":
    raise SystemExit(main())
