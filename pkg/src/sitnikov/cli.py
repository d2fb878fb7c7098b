"""Command-line interface.

    sitnikov [global flags] <command> [command flags]

Global flags go before the command: --orbit, --out, --format,
--budget-steps, --budget-bits.  Every number is read as an exact rational
("1/3", "0.125"); initial values are oracle specs ("rational:1/2",
"sqrt:2", "dyadic:0.101b").

Exit codes: 0 ok, 2 parse error, 3 domain error, 4 resource (budget)
error, 5 inconsistency found by the recovery.
"""
import argparse
import sys
from fractions import Fraction

from flint import arb

from . import __version__
from .analysis import probe_complexity, recovery_params
from .ball import ball_to_json, to_ball, workprec
from .dynamics import SitnikovState, embed_three_body, lipschitz_bound, project_sitnikov
from .errors import DomainError, InconsistencyError, ParseError, ResourceError, ShapeError
from .integrator import (
    IntegratorConfig, find_roots, initial_oracles, integrate, integrate_three_body,
    roots_and_samples, sample_trajectory,
)
from .io import dumps, format_time, load_orbit, probe_csv, state_to_json, trajectory_csv
from .kepler import period
from .oracle import parse_oracle
from .symbolic import (
    RecoveryConfig, classify, count_lower_bound, count_sequences, enumerate_sequences,
    recover_sequence, symbols_from_roots,
)

EXIT_CODES = {ParseError: 2, DomainError: 3, ShapeError: 3, ResourceError: 4,
              InconsistencyError: 5}
PERIOD_GRID_BITS = 20  # T given in periods is rounded down to a multiple of 2^-20


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def _rational(text):
    from .ball import parse_rational
    return parse_rational(text)


def _int(text):
    try:
        return int(text)
    except ValueError as exc:
        raise ParseError(f"expected an integer, got {text!r}") from exc


def _orbit(args):
    if not args.orbit:
        raise ParseError("this command needs --orbit <path>")
    return load_orbit(args.orbit)


def _oracles(args, params):
    phi = args.phi if args.phi is not None else f"rational:{params.phi}"
    x0 = initial_oracles(params, 0, 0)
    x0["z0"] = parse_oracle(args.z0, "z0")
    x0["v0"] = parse_oracle(args.v0, "v0")
    x0["phi"] = parse_oracle(phi, "phi")
    return x0


def _config(args, l=None):
    l = args.eps_exp if l is None else l
    if l < 0:
        raise ParseError("--eps-exp must be >= 0")
    kw = {}
    if args.budget_steps is not None:
        kw["max_steps"] = args.budget_steps
    if args.budget_bits is not None:
        kw["max_bits"] = args.budget_bits
    return IntegratorConfig.from_l(l, **kw)


def _horizon(args, params, name="T"):
    """Rational horizon from --T or --T-periods (k P rounded down to 2^-20)."""
    t = getattr(args, name, None)
    k = getattr(args, f"{name}_periods", None)
    if (t is None) == (k is None):
        raise ParseError(f"give exactly one of --{name} and --{name}-periods")
    if t is not None:
        return _rational(t)
    k = _rational(k)
    with workprec(128):
        x = (to_ball(k) * period(params, prec=128)).lower()
    scale = 2 ** PERIOD_GRID_BITS
    num = int(float(x.mid()) * scale)
    while not to_ball(Fraction(num, scale)) <= x:
        num -= 1
    return Fraction(num, scale)


def _emit(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def cmd_integrate(args):
    params = _orbit(args)
    x0 = _oracles(args, params)
    t = _horizon(args, params, "t")
    st = integrate(x0, t, _config(args))
    if args.format == "csv":
        _emit(args, trajectory_csv([(st.t, st.z, st.v, st.E)]))
    else:
        _emit(args, dumps(state_to_json(st, args.eps_exp)))
    return 0


def cmd_sample(args):
    params = _orbit(args)
    x0 = _oracles(args, params)
    T = _horizon(args, params)
    delta = _rational(args.delta)
    samples = sample_trajectory(x0, {"T": T, "delta": delta}, _config(args), full=True)
    if args.format == "json":
        _emit(args, dumps({"T": format_time(T), "delta": format_time(delta),
                           "samples": [{"t": format_time(t), "z": ball_to_json(z), "v": ball_to_json(v),
                                        "E": ball_to_json(E)} for t, z, v, E in samples]}))
    else:
        _emit(args, trajectory_csv(samples))
    return 0


def cmd_roots(args):
    params = _orbit(args)
    x0 = _oracles(args, params)
    T = _horizon(args, params)
    roots = find_roots(x0, T, _config(args))
    P = period(params, prec=128)
    try:
        symbols = symbols_from_roots(roots, P)
    except ResourceError:
        symbols = None
    if args.format == "csv":
        rows = "".join(f"{i},{b['center']},{b['radius']}\n"
                       for i, b in enumerate(ball_to_json(r) for r in roots))
        _emit(args, "k,tau_center,tau_radius\n" + rows)
    else:
        _emit(args, dumps({"T": format_time(T), "count": len(roots),
                           "roots": [ball_to_json(r) for r in roots], "symbols": symbols}))
    return 0


def cmd_recover(args):
    params = _orbit(args)
    x0 = _oracles(args, params)
    T = _horizon(args, params)
    safety = _rational(args.safety)
    cfg, l = recovery_params(args.m, params, safety=safety, T=T)
    if args.delta is not None or args.eps_exp is not None:
        delta = _rational(args.delta) if args.delta is not None else cfg.delta
        l = args.eps_exp if args.eps_exp is not None else l
        try:
            cfg = RecoveryConfig(cfg.m, cfg.P, delta, Fraction(1, 2 ** l), cfg.h, T)
        except DomainError as exc:
            raise ParseError(f"override violates the recovery invariants: {exc}") from exc
    icfg = _config(args, l)
    samples = sample_trajectory(x0, {"T": T, "delta": cfg.delta}, icfg)
    classes = [classify(z, cfg.eps) for _, z in samples]
    trace = "".join(c.value for c in classes)
    seq = recover_sequence(classes, cfg, rule=args.rule, parity=args.parity)
    _emit(args, dumps({"sequence": seq.to_json(), "delta": format_time(cfg.delta),
                       "eps_exp": l, "T": format_time(T), "trace": trace}))
    return 0


def cmd_count(args):
    m = args.m
    if args.T_periods is not None:
        T, P = _rational(args.T_periods), None
        with workprec(128):
            bound = count_lower_bound(T, m, arb(1))
    else:
        params = _orbit(args)
        T, P = _horizon(args, params), period(_orbit(args), prec=128)
        bound = count_lower_bound(T, m, P)
    if args.list:
        en = enumerate_sequences(T, m, P, budget=args.budget, include_empty=args.include_empty)
        doc = en.to_json()
    else:
        from .symbolic import _periods
        N = _periods(T, P)
        doc = {"count": count_sequences(N, m, args.include_empty), "m": m, "periods": N}
    doc["lower_bound"] = ball_to_json(bound)
    _emit(args, dumps(doc))
    return 0


def cmd_probe(args):
    params = _orbit(args)
    x0 = _oracles(args, params)
    if (args.t is None) == (args.t_periods is None):
        raise ParseError("give exactly one of --t and --t-periods")
    if args.t is not None:
        ts = [_rational(s) for s in args.t.split(",")]
    else:
        ts = []
        for s in args.t_periods.split(","):
            ns = argparse.Namespace(t=None, t_periods=s)
            ts.append(_horizon(ns, params, "t"))
    recs = probe_complexity(x0, ts, args.eps_exp, _config(args))
    if args.no_wall:
        for r in recs:
            r.wall_seconds = 0.0
    if args.format == "json":
        _emit(args, dumps([{"t": format_time(r.t), "l": r.l, "bits": r.bits, "steps": r.steps,
                            "wall_seconds": round(r.wall_seconds, 3)} for r in recs]))
    else:
        _emit(args, probe_csv(recs))
    return 0


def cmd_lipschitz(args):
    params = _orbit(args)
    lb = lipschitz_bound(params)
    _emit(args, dumps({"L": ball_to_json(lb.L), "rows": [ball_to_json(r) for r in lb.rows]}))
    return 0


def cmd_embed_check(args):
    params = _orbit(args)
    z0, v0 = _rational(args.z), _rational(args.v)
    E = _rational(args.E) if args.E is not None else params.phi
    st = SitnikovState(params.a, params.e, params.mu, z0, v0, E)
    three = embed_three_body(st, st, prec=args.prec)
    back = project_sitnikov(three, prec=args.prec)
    names = ("a", "e", "mu", "z", "v", "E")
    with workprec(args.prec):
        orig = st.balls(args.prec)
        ok = all(to_ball(getattr(back, n)).overlaps(o) for n, o in zip(names, orig))
    doc = {"round_trip": ok,
           "projected": {n: ball_to_json(to_ball(getattr(back, n))) for n in names}}
    if args.t is not None:
        t = _horizon(args, params, "t")
        x0 = initial_oracles(params.__class__(params.a, params.e, params.mu, E), z0, v0)
        zs = sample_trajectory(x0, {"T": t, "delta": t}, _config(args))
        final, _ = integrate_three_body(three, t, prec=args.nbody_prec)
        z3 = final.positions[2][2]
        doc["t"] = format_time(t)
        doc["z_sitnikov"] = ball_to_json(zs[-1][1])
        doc["z_three_body"] = ball_to_json(z3)
        doc["agree"] = bool(zs[-1][1].overlaps(z3))
        ok = ok and doc["agree"]
    _emit(args, dumps(doc))
    return 0 if ok else 5


# ------------------------------------------------------------------ parser

def _state_flags(p):
    p.add_argument("--z0", default="rational:0", help="oracle spec for z0 (default rational:0)")
    p.add_argument("--v0", required=True, help="oracle spec for v0")
    p.add_argument("--phi", default=None, help="oracle spec for the initial eccentric anomaly")


def _horizon_flags(p, name="T"):
    p.add_argument(f"--{name}", dest=name, default=None, help="horizon as an exact rational")
    p.add_argument(f"--{name}-periods", dest=f"{name}_periods", default=None,
                   help="horizon in primary periods")


def build_parser():
    p = _Parser(prog="sitnikov", description="Certified integration of the Sitnikov problem.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--orbit", help="orbit JSON with decimal strings a, e, mu (and optional phi)")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--budget-steps", type=_int, default=None)
    p.add_argument("--budget-bits", type=_int, default=None)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    q = sub.add_parser("integrate", help="certified state at time t")
    _state_flags(q)
    _horizon_flags(q, "t")
    q.add_argument("--eps-exp", type=_int, default=30)
    q.set_defaults(func=cmd_integrate, default_format="json")

    q = sub.add_parser("sample", help="z, v, E enclosures on a uniform grid")
    _state_flags(q)
    _horizon_flags(q)
    q.add_argument("--delta", required=True)
    q.add_argument("--eps-exp", type=_int, default=30)
    q.set_defaults(func=cmd_sample, default_format="csv")

    q = sub.add_parser("roots", help="certified zeros of z on [0, T]")
    _state_flags(q)
    _horizon_flags(q)
    q.add_argument("--eps-exp", type=_int, default=40)
    q.set_defaults(func=cmd_roots, default_format="json")

    q = sub.add_parser("recover", help="symbol sequence from coarse grid signs")
    _state_flags(q)
    _horizon_flags(q)
    q.add_argument("--m", type=_int, required=True)
    q.add_argument("--safety", default="1/2")
    q.add_argument("--delta", default=None, help="override the grid step")
    q.add_argument("--eps-exp", type=_int, default=None, help="override l")
    q.add_argument("--rule", choices=("interval", "runlength"), default="interval")
    q.add_argument("--parity", action="store_true", help="resolve ambiguous symbols by parity")
    q.set_defaults(func=cmd_recover, default_format="json")

    q = sub.add_parser("count", help="count admissible symbol sequences")
    q.add_argument("--m", type=_int, required=True)
    _horizon_flags(q)
    q.add_argument("--list", action="store_true", help="also list the sequences")
    q.add_argument("--include-empty", action="store_true")
    q.add_argument("--budget", type=_int, default=10 ** 6)
    q.set_defaults(func=cmd_count, default_format="json")

    q = sub.add_parser("probe", help="oracle bits and work against t")
    _state_flags(q)
    q.add_argument("--t", default=None, help="comma-separated times")
    q.add_argument("--t-periods", dest="t_periods", default=None, help="comma-separated period counts")
    q.add_argument("--eps-exp", type=_int, default=24)
    q.add_argument("--no-wall", action="store_true", help="write 0 for wall time (byte-stable output)")
    q.set_defaults(func=cmd_probe, default_format="csv")

    q = sub.add_parser("lipschitz", help="global Lipschitz bound of the flow")
    q.set_defaults(func=cmd_lipschitz, default_format="json")

    q = sub.add_parser("embed-check", help="embed into three bodies and project back")
    q.add_argument("--z", default="0")
    q.add_argument("--v", required=True)
    q.add_argument("--E", default=None)
    _horizon_flags(q, "t")
    q.add_argument("--eps-exp", type=_int, default=30)
    q.add_argument("--prec", type=_int, default=256)
    q.add_argument("--nbody-prec", type=_int, default=256)
    q.set_defaults(func=cmd_embed_check, default_format="json")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise ParseError("missing command")
        if args.format is None:
            args.format = args.default_format
        return args.func(args)
    except (ParseError, DomainError, ShapeError, ResourceError, InconsistencyError) as exc:
        code = next(c for cls, c in EXIT_CODES.items() if isinstance(exc, cls))
        msg = f"error: {exc}"
        nodes = getattr(exc, "nodes", None)
        if nodes:
            msg += f" (nodes {', '.join(map(str, nodes))})"
        interval = getattr(exc, "interval", None)
        if interval:
            msg += f" (interval [{float(interval[0]):.12g}, {float(interval[1]):.12g}])"
        print(msg, file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
