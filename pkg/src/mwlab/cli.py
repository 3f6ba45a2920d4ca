"""Command-line front end.

Subcommands: gen-weight, ap-constant, maximal, john, rdf, factorize,
reverse-factorize, extrapolate, demo.  Every report embeds the fully
resolved configuration; outputs are canonical JSON/CSV/SVG so identical
inputs produce byte-identical files.  Exit codes: 0 success, 2 validation
error, 3 solver failure, 64 usage error.  MWLAB_THREADS caps worker
parallelism; the current kernels are single-threaded, so any cap holds.
"""

import argparse
import os
import sys

import numpy as np

from . import _jsonio
from .ap import ap_constant
from .bodies import SymPolygon
from .errors import BoundViolation, MwlabError, SolverFailure
from .extrapolation import (
    ExtrapolationCase,
    demo_rows_to_csv,
    extrapolation_demo,
    rescale_weight,
)
from .grid import (
    DyadicDomain,
    _body_from_json,
    gen_power_weight,
    gen_rotating_weight,
    load_set_function,
    load_vector_field,
    load_weight,
    save_scalar_field,
    save_set_function,
    save_weight,
)
from .john import john_ellipsoid
from .maximal import dyadic_maximal, shifted_maximal
from .rdf import IterationConfig, certify_bound, factorize, iterate_scalar, op_PW, reverse_factorize
from .svg import emit_svg

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_USAGE = 64


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _parse_exponent(text):
    if text in ("inf", "Inf", "infinity"):
        return np.inf
    return float(text)


def _json_num(x):
    """Exponents may be infinite; canonical JSON carries them as 'inf'."""
    if isinstance(x, float) and np.isinf(x):
        return "inf"
    return x


def _resolved(args, keys):
    cfg = {}
    if getattr(args, "config", None):
        doc = _jsonio.load(args.config)
        if not isinstance(doc, dict):
            raise MwlabError("config file must hold a JSON object")
        cfg.update(doc)
    for k in keys:
        v = getattr(args, k.replace("-", "_"), None)
        if v is not None:
            cfg[k] = v
    return cfg


def _write_report(payload, out):
    _jsonio.dump_canonical(payload, out)


def _cmd_gen_weight(args):
    cfg = _resolved(args, ["kind", "d", "alpha", "omega", "a", "b", "level", "n", "origin", "size", "center"])
    origin = cfg.get("origin", [0.0])
    origin = [float(x) for x in (origin if isinstance(origin, list) else [origin])]
    dom = DyadicDomain(
        n=int(cfg.get("n", 1)),
        origin=tuple(origin),
        size=float(cfg.get("size", 1.0)),
        level=int(cfg.get("level", 3)),
    )
    kind = cfg.get("kind", "identity")
    d = int(cfg.get("d", 2))
    if kind == "power":
        center = cfg.get("center")
        center = None if center is None else np.asarray(center, dtype=float)
        w = gen_power_weight(dom, d, float(cfg.get("alpha", 0.0)), center)
    elif kind == "rotating":
        w = gen_rotating_weight(dom, float(cfg.get("a", 0.0)), float(cfg.get("b", 0.0)), float(cfg.get("omega", 0.0)))
    elif kind == "identity":
        w = gen_power_weight(dom, d, 0.0)
    else:
        raise MwlabError(f"unknown weight kind {kind!r}")
    save_weight(w, args.out)
    return EXIT_OK


def _cmd_ap_constant(args):
    cfg = _resolved(args, ["p", "variant"])
    w = load_weight(args.weight)
    p = _parse_exponent(str(cfg.get("p", 2.0)))
    variant = cfg.get("variant", "roudenko")
    rep = ap_constant(w, p, variant)
    payload = {
        "config": {"weight": args.weight, "p": _json_num(p), "variant": variant},
        "constant": rep.constant,
        "variant": rep.variant,
        "p": _json_num(rep.p),
        "cube": {"level": rep.achieving_cube[0], "index": rep.achieving_cube[1]},
        "slack": rep.solver_slack,
        "localized": rep.localized,
    }
    _write_report(payload, args.out)
    return EXIT_OK


def _cmd_maximal(args):
    f = load_set_function(args.setfn)
    if args.shift is not None:
        out = shifted_maximal(f, float(args.shift))
    else:
        out = dyadic_maximal(f)
    save_set_function(out, args.out)
    if args.svg:
        emit_svg(out.cells, args.svg)
    return EXIT_OK


def _cmd_john(args):
    doc = _jsonio.load(args.body)
    from .directions import canonical_grid

    body = _body_from_json(doc, int(doc.get("d", 2)), canonical_grid(int(doc.get("d", 2))))
    res = john_ellipsoid(body)
    payload = {
        "config": {"body": args.body},
        "m": res.m.reshape(-1).tolist(),
        "inner_ok": res.inner_ok,
        "outer_ok": res.outer_ok,
        "inner_slack": res.inner_slack,
        "outer_slack": res.outer_slack,
        "logdet": res.logdet,
        "iterations": res.iterations,
    }
    _write_report(payload, args.out)
    return EXIT_OK


def _cmd_rdf(args):
    cfg = _resolved(args, ["p", "k-max", "safety"])
    w = load_weight(args.weight)
    p = _parse_exponent(str(cfg.get("p", 2.0)))
    k_max = int(cfg.get("k-max", 30))
    safety = float(cfg.get("safety", 1.1))
    dom = w.domain
    t_op = op_PW(w)
    mu = dom.cell_measure

    def norm_fn(r):
        return float(np.sum(np.asarray(r) ** p * mu) ** (1.0 / p))

    rng = np.random.default_rng(0)
    bound = certify_bound(t_op, norm_fn, lambda: np.exp(rng.normal(size=dom.num_cells)), safety=safety)
    seed = np.ones(dom.num_cells)
    rbar, bound = iterate_scalar(
        t_op, seed, IterationConfig(bound=bound, k_max=k_max, p=p, safety=safety), norm_fn
    )
    grow = t_op(rbar)
    payload = {
        "config": {"weight": args.weight, "p": p, "k_max": k_max, "safety": safety},
        "bound": bound,
        "contains_seed": bool(np.all(seed <= rbar * (1 + 1e-12))),
        "norm_ratio": norm_fn(rbar) / norm_fn(seed),
        "absorption_ratio": float(np.max(grow / rbar)) / (2 * bound),
        "rbar": rbar.tolist(),
    }
    _write_report(payload, args.out)
    return EXIT_OK


def _cmd_factorize(args):
    cfg = _resolved(args, ["p", "k-max", "safety"])
    w = load_weight(args.weight)
    p = _parse_exponent(str(cfg.get("p", 2.0)))
    it_cfg = IterationConfig(
        bound=0.0, k_max=int(cfg.get("k-max", 30)), p=p, safety=float(cfg.get("safety", 1.1))
    )
    res = factorize(w, p, cfg=it_cfg)
    os.makedirs(args.out, exist_ok=True)
    save_weight(res.w0, os.path.join(args.out, "w0.json"))
    save_weight(res.w1, os.path.join(args.out, "w1.json"))
    save_scalar_field(res.rbar, os.path.join(args.out, "rbar.json"))
    payload = {
        "config": {"weight": args.weight, "p": p, "k_max": it_cfg.k_max, "safety": it_cfg.safety},
        "product_residual": res.product_residual,
        "bound": res.bound,
        "a1_constant": res.report_a1.constant,
        "ainfty_constant": res.report_ainfty.constant,
        "seed_norm": res.seed_norm,
    }
    _write_report(payload, os.path.join(args.out, "report.json"))
    return EXIT_OK


def _cmd_reverse_factorize(args):
    w0 = load_weight(args.w0)
    w1 = load_weight(args.w1)
    q0 = _parse_exponent(args.q0)
    q1 = _parse_exponent(args.q1)
    wbar, rep = reverse_factorize(w0, w1, q0, q1, float(args.t))
    save_weight(wbar, args.out)
    if args.report:
        payload = {
            "config": {
                "w0": args.w0,
                "w1": args.w1,
                "q0": _json_num(q0),
                "q1": _json_num(q1),
                "t": float(args.t),
            },
            **{k: _json_num(v) for k, v in rep.items()},
        }
        _write_report(payload, args.report)
    return EXIT_OK


def _cmd_extrapolate(args):
    cfg = _resolved(args, ["p", "p0", "k-max", "safety"])
    w = load_weight(args.weight)
    p = _parse_exponent(str(cfg.get("p", 2.0)))
    p0 = _parse_exponent(str(cfg.get("p0", 4.0)))
    f = load_vector_field(args.f)
    g = load_vector_field(args.g)
    it_cfg = IterationConfig(
        bound=0.0, k_max=int(cfg.get("k-max", 30)), p=p, safety=float(cfg.get("safety", 1.1))
    )
    rep = rescale_weight(ExtrapolationCase(p=p, p0=p0, f=f, g=g, w=w), it_cfg)
    payload = {
        "config": {
            "weight": args.weight,
            "p": _json_num(p),
            "p0": _json_num(p0),
            "f": args.f,
            "g": args.g,
        },
        "case": rep.case_id,
        "ap_w0": rep.ap_w0.constant,
        "kp_exponent": rep.kp_exponent,
        "kp_ratio": rep.kp_ratio,
        "bound": rep.bound,
        "chain": {k: {"lhs": l, "rhs": r, "slack": s} for k, (l, r, s) in rep.chain.items()},
    }
    _write_report(payload, args.out)
    if args.w0_out:
        save_weight(rep.w0, args.w0_out)
    return EXIT_OK


def _cmd_demo(args):
    cfg = _resolved(args, ["p", "p0", "op-id"])
    weights = [load_weight(p) for p in args.weights]
    p = _parse_exponent(str(cfg.get("p", 2.0)))
    p0 = _parse_exponent(str(cfg.get("p0", 4.0)))
    rows = extrapolation_demo(cfg.get("op-id", "christ-goldberg"), p0, p, weights)
    with open(args.out, "w") as fh:
        fh.write(demo_rows_to_csv(rows))
    return EXIT_OK


def _build_parser():
    ap = _Parser(prog="mwlab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override its entries")

    p = sub.add_parser("gen-weight")
    common(p)
    p.add_argument("--kind")
    p.add_argument("--d", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--center", type=float, nargs="+")
    p.add_argument("--origin", type=float, nargs="+")
    p.add_argument("--size", type=float)
    p.add_argument("--level", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen_weight)

    p = sub.add_parser("ap-constant")
    common(p)
    p.add_argument("--weight", required=True)
    p.add_argument("--p")
    p.add_argument("--variant")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_ap_constant)

    p = sub.add_parser("maximal")
    common(p)
    p.add_argument("--setfn", required=True)
    p.add_argument("--shift", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.set_defaults(fn=_cmd_maximal)

    p = sub.add_parser("john")
    common(p)
    p.add_argument("--body", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_john)

    p = sub.add_parser("rdf")
    common(p)
    p.add_argument("--weight", required=True)
    p.add_argument("--p")
    p.add_argument("--k-max", type=int)
    p.add_argument("--safety", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_rdf)

    p = sub.add_parser("factorize")
    common(p)
    p.add_argument("--weight", required=True)
    p.add_argument("--p")
    p.add_argument("--k-max", type=int)
    p.add_argument("--safety", type=float)
    p.add_argument("--out", required=True, help="output directory for the bundle")
    p.set_defaults(fn=_cmd_factorize)

    p = sub.add_parser("reverse-factorize")
    common(p)
    p.add_argument("--w0", required=True)
    p.add_argument("--w1", required=True)
    p.add_argument("--q0", required=True)
    p.add_argument("--q1", required=True)
    p.add_argument("--t", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(fn=_cmd_reverse_factorize)

    p = sub.add_parser("extrapolate")
    common(p)
    p.add_argument("--weight", required=True)
    p.add_argument("--p")
    p.add_argument("--p0")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--k-max", type=int)
    p.add_argument("--safety", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--w0-out")
    p.set_defaults(fn=_cmd_extrapolate)

    p = sub.add_parser("demo")
    common(p)
    p.add_argument("--op-id")
    p.add_argument("--p")
    p.add_argument("--p0")
    p.add_argument("--weights", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_demo)

    return ap


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args)
    except (SolverFailure, BoundViolation) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (MwlabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
