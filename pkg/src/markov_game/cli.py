"""Command-line front end: ``markov-game <command> [instance] [flags]``.

The instance comes from a JSON file (positional argument), a built-in
fixture (``--fixture NAME``) or a random draw (``--random N:D --seed S``).
Reports are JSON on stdout (or ``--output``).

Exit codes: 0 success, 2 parse/usage error, 3 domain error, 4 the requested
accuracy was not reached.  ``MARKOV_GAME_TOL`` overrides the default
validation tolerance.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import centroid as _centroid
from . import oracle as _oracle
from . import solver as _solver
from .divergence import divergences_to_family, parse_divergence
from .documents import dumps_report, make_report, parse_instance
from .errors import (
    GameError,
    NotConvergedError,
    ParseError,
    ToleranceNotReachedError,
)
from .fixtures import FIXTURES, fixture_document
from .generators import DEFAULT_TOL, is_reversible, pi_dual, power_mean_reversiblization
from .random_instances import random_class_member, random_distribution, random_family

EXIT_OK, EXIT_PARSE, EXIT_DOMAIN, EXIT_NOT_CONVERGED = 0, 2, 3, 4
TOL_ENV = "MARKOV_GAME_TOL"


class _Unconverged(Exception):
    def __init__(self, report):
        self.report = report


def default_tol():
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise ParseError(TOL_ENV, f"not a number: {raw!r}") from None
    if not tol > 0:
        raise ParseError(TOL_ENV, "tolerance must be positive")
    return tol


# -- flag parsing helpers ----------------------------------------------------


def _parse_extended(text, path):
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    if t in ("-inf", "-infinity"):
        return -math.inf
    try:
        return float(t)
    except ValueError:
        raise ParseError(path, f"not a number: {text!r}") from None


def parse_weights(text, n, path="--w0"):
    """``uniform``, ``e:i`` (0-based vertex) or a comma separated list."""
    if text is None or text == "uniform":
        return np.full(n, 1.0 / n)
    if text.startswith("e:"):
        try:
            i = int(text[2:])
        except ValueError:
            raise ParseError(path, f"bad vertex spec {text!r}") from None
        if not 0 <= i < n:
            raise ParseError(path, f"vertex index {i} out of range for {n} members")
        return np.eye(n)[i]
    try:
        w = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ParseError(path, f"bad weight list {text!r}") from None
    if w.size != n:
        raise ParseError(path, f"expected {n} weights, got {w.size}")
    return w


def parse_generator_ref(text, instance, path="--m"):
    """``i`` (member ``i``) or ``P<p>:i`` (``P_p`` of member ``i``), 0-based."""
    try:
        if text.upper().startswith("P"):
            p_text, i_text = text[1:].split(":")
            p, i = _parse_extended(p_text, path), int(i_text)
        else:
            p, i = None, int(text)
    except ValueError:
        raise ParseError(path, f"bad generator reference {text!r}") from None
    if not 0 <= i < instance.n:
        raise ParseError(path, f"member index {i} out of range")
    L = instance.family[i]
    return L if p is None else power_mean_reversiblization(L, instance.pi, p)


def _spec(args, instance, flag="divergence"):
    text = getattr(args, flag, None) or instance.divergence or "kl"
    try:
        return parse_divergence(text)
    except GameError as exc:
        raise ParseError(f"--{flag.replace('_', '-')}", str(exc)) from exc


def _option(args, instance, name, default):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return instance.options.get(name, default)


# -- instance loading ----------------------------------------------------------


def _load(args, tol):
    if args.fixture:
        if args.fixture not in FIXTURES:
            raise ParseError("--fixture", f"unknown fixture {args.fixture!r}")
        doc = fixture_document(args.fixture)
    elif args.random:
        try:
            n, d = (int(v) for v in args.random.split(":"))
        except ValueError:
            raise ParseError("--random", "expected N:D") from None
        if n < 1 or d < 2:
            raise ParseError("--random", "need N >= 1 members and D >= 2 states")
        rng = np.random.default_rng(args.seed)
        pi = random_distribution(rng, d)
        if args.random_class:
            family = np.stack([random_class_member(rng, d) for _ in range(n)])
        else:
            family = random_family(rng, n, d)
        doc = {"pi": pi.tolist(), "generators": family.tolist()}
    elif args.instance:
        try:
            with open(args.instance, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ParseError("instance", f"cannot read {args.instance}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ParseError("instance", f"invalid JSON at line {exc.lineno}") from None
    else:
        raise ParseError("instance", "give an instance file, --fixture or --random")
    return doc, parse_instance(doc, tol=tol)


# -- commands -----------------------------------------------------------------


def cmd_validate(args, inst, tol):
    return {
        "valid": True,
        "n": inst.n,
        "dim": inst.dim,
        "labels": inst.labels,
        "reversible": [is_reversible(L, inst.pi, max(tol, 1e-10)) for L in inst.family],
        "generators": inst.family,
    }, None, []


def cmd_dual(args, inst, tol):
    return {"duals": [pi_dual(L, inst.pi) for L in inst.family]}, None, []


def cmd_reversiblize(args, inst, tol):
    p = _parse_extended(args.p, "--p")
    return {
        "p": p,
        "generators": [power_mean_reversiblization(L, inst.pi, p) for L in inst.family],
    }, None, []


def cmd_divergence(args, inst, tol):
    spec = _spec(args, inst, "kind")
    ref = args.m or inst.options.get("m")
    if ref is None:
        raise ParseError("--m", "say which generator M is (e.g. 0 or P1:0)")
    M = parse_generator_ref(ref, inst)
    D = divergences_to_family(spec, M, inst.family, inst.pi)
    return {"divergence": spec.name, "m": ref, "M": M, "values": D}, None, []


def cmd_project(args, inst, tol):
    spec = _spec(args, inst)
    out = []
    for L in inst.family:
        P = _centroid.f_projection(spec, L, inst.pi)
        entry = {"projection": P, "self_divergence": divergences_to_family(spec, P, L[None], inst.pi)[0]}
        if not spec.strictly_convex:
            res = _centroid.weighted_centroid_generic(spec, L[None], inst.pi, np.ones(1))
            if res.flat_interval is not None:
                entry["flat_interval"] = list(res.flat_interval)
        out.append(entry)
    return {"divergence": spec.name, "members": out}, None, []


def cmd_centroid(args, inst, tol):
    spec = _spec(args, inst)
    w = parse_weights(args.weights, inst.n, "--weights")
    res = _centroid.weighted_centroid(spec, inst.family, inst.pi, w, method=args.method)
    results = {
        "divergence": spec.name,
        "weights": w,
        "centroid": res.centroid,
        "per_member_divergence": res.per_member_divergence,
    }
    if res.flat_interval is not None:
        results["flat_interval"] = list(res.flat_interval)
    return results, None, []


def _report_fields(r):
    return {
        "weights_avg": r.weights_avg,
        "centroid": r.centroid,
        "value": r.value,
        "chebyshev_radius": r.chebyshev_radius,
        "gap": r.gap,
        "slackness": r.slackness,
        "divergences": r.divergences,
        "iterations": r.iterations,
        "stepsize": r.stepsize,
        "B_estimate": r.B_estimate,
        "initial_gap": r.initial_gap,
        "best_gap": r.best_gap,
        "best_dual": r.best_dual,
        "best_primal": r.best_primal,
        "best_weights": r.best_weights,
        "weights_last": r.weights_last,
    }


def cmd_solve(args, inst, tol):
    spec = _spec(args, inst)
    t = int(_option(args, inst, "iters", 1000))
    eta_text = str(_option(args, inst, "eta", "auto"))
    eta = None if eta_text == "auto" else _parse_extended(eta_text, "--eta")
    if eta is not None and not (eta > 0 and math.isfinite(eta)):
        raise ParseError("--eta", "stepsize must be positive and finite")
    w0 = parse_weights(args.w0, inst.n)
    epsilon = args.epsilon
    r = _solver.solve_game(
        spec, inst.family, inst.pi, t, eta=eta, w0=w0,
        ref_index=args.ref_index, trace_every=args.trace_every, epsilon=epsilon,
        trace_mode=args.trace_mode,
    )
    results = {"divergence": spec.name, "iters": t, **_report_fields(r)}
    trace = [list(row) for row in r.trace]
    warnings = []
    if epsilon is not None and r.best_gap > epsilon:
        warnings.append(f"duality gap {float(r.best_gap)!r} did not reach epsilon {float(epsilon)!r}")
        raise _Unconverged((results, trace, warnings))
    return results, trace, warnings


def cmd_pure_nash(args, inst, tol):
    spec = _spec(args, inst)
    res = _solver.pure_nash_check(spec, inst.family, inst.pi, tol=args.tol, t=args.iters)
    results = {
        "divergence": spec.name,
        "exists": res.exists,
        "maximizers": res.maximizers,
        "v_lower": res.v_lower,
        "v_upper": res.v_upper,
        "self_divergences": res.self_divergences,
        "saddle": None if res.saddle is None else {"centroid": res.saddle[0], "index": res.saddle[1]},
    }
    return results, None, []


def cmd_oracle(args, inst, tol):
    spec = _spec(args, inst)
    grid = _oracle.GridSpec(args.resolution)
    if args.which == "dual":
        w, v = _oracle.oracle_dual_max(spec, inst.family, inst.pi, grid)
        results = {"weights": w, "dual_value": v}
    elif args.which == "edge":
        w = parse_weights(args.weights, inst.n, "--weights")
        M, (lo, hi) = _oracle.oracle_edge_scan(spec, inst.family, inst.pi, w, grid, return_plateau=True)
        results = {
            "weights": w,
            "centroid": M,
            "per_member_divergence": divergences_to_family(spec, M, inst.family, inst.pi),
            "plateau": [lo, hi],
        }
    else:
        v, per = _oracle.oracle_pure_values(spec, inst.family, inst.pi)
        results = {"v_lower": v, "per_index": per}
    results = {"divergence": spec.name, "oracle": args.which, "resolution": args.resolution, **results}
    return results, None, []


def cmd_probe_rate(args, inst, tol):
    spec = _spec(args, inst)
    try:
        t_list = [int(v) for v in args.t_list.split(",")]
    except ValueError:
        raise ParseError("--t-list", f"bad list {args.t_list!r}") from None
    w0 = parse_weights(args.w0, inst.n)
    pairs = _solver.tv_centroid_convergence_probe(
        spec, inst.family, inst.pi, t_list, t_ref=args.t_ref, w0=w0
    )
    slope = _solver.loglog_slope(pairs)
    run = _solver.solve_game(
        spec, inst.family, inst.pi, max(t_list), w0=w0,
        trace_every=args.trace_every, trace_mode="averaged",
    )
    results = {
        "divergence": spec.name,
        "t_ref": args.t_ref or 100 * max(t_list),
        "distances": [list(p) for p in pairs],
        "slope": slope,
    }
    gap_table = [[row[0], row[3]] for row in run.trace]
    return results, gap_table, [] if slope is not None else ["distance hit the numerical floor"]


COMMANDS = {
    "validate": cmd_validate,
    "dual": cmd_dual,
    "reversiblize": cmd_reversiblize,
    "divergence": cmd_divergence,
    "project": cmd_project,
    "centroid": cmd_centroid,
    "solve": cmd_solve,
    "pure-nash": cmd_pure_nash,
    "oracle": cmd_oracle,
    "probe-rate": cmd_probe_rate,
}


# -- argument parser ------------------------------------------------------------


def _instance_args(p):
    src = p.add_argument_group("instance source (pick one)")
    src.add_argument("instance", nargs="?", help="instance JSON file")
    src.add_argument("--fixture", help=f"built-in instance: {', '.join(FIXTURES)}")
    src.add_argument("--random", metavar="N:D", help="random family of N generators on D states")
    src.add_argument("--seed", type=int, default=0, help="seed for --random (default 0)")
    src.add_argument(
        "--random-class", action="store_true",
        help="with --random, draw members P - I with P a zero-diagonal transition matrix",
    )
    p.add_argument("-o", "--output", help="write the report here instead of stdout")
    p.add_argument("--no-metadata", action="store_true", help="omit the timestamped metadata block")


def _divergence_arg(p, flag="--divergence"):
    p.add_argument(
        flag,
        help="alpha:<a>, kl, reverse-kl, hellinger2, tv, tv-half or chi2 "
        "(default: the instance's divergence, else kl)",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="markov-game",
        description="f-divergence games between Markov generators: centroids, "
        "Chebyshev centers and mixed equilibria.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate an instance")
    _instance_args(p)

    p = sub.add_parser("dual", help="pi-dual of every member")
    _instance_args(p)

    p = sub.add_parser("reversiblize", help="power-mean reversiblization P_p of every member")
    _instance_args(p)
    p.add_argument("--p", required=True, help="order p: a real, inf or -inf (write --p=-inf)")

    p = sub.add_parser("divergence", help="D_f(M || L_i) for every member L_i")
    _instance_args(p)
    _divergence_arg(p, "--kind")
    p.add_argument("--m", help="M as a member index i or P<p>:i (0-based); default from options.m")

    p = sub.add_parser("project", help="f-projection of every member onto the reversible set")
    _instance_args(p)
    _divergence_arg(p)

    p = sub.add_parser("centroid", help="weighted information centroid")
    _instance_args(p)
    _divergence_arg(p)
    p.add_argument("--weights", default="uniform", help="uniform, e:i or a comma separated list")
    p.add_argument("--method", choices=("auto", "closed", "generic"), default="auto")

    p = sub.add_parser("solve", help="mixed equilibrium by projected subgradient")
    _instance_args(p)
    _divergence_arg(p)
    p.add_argument("--iters", type=int, help="iterations t (default: options.iters, else 1000)")
    p.add_argument("--eta", help="stepsize, or auto for sqrt(n / (t B))")
    p.add_argument("--w0", default="uniform", help="uniform, e:i or a comma separated list")
    p.add_argument("--epsilon", type=float, help="stop once the duality gap is at most this")
    p.add_argument("--trace-every", type=int, default=1, help="store every k-th trace row (0: none)")
    p.add_argument(
        "--trace-mode", choices=("iterates", "averaged"), default="iterates",
        help="evaluate trace rows at the iterates or at their running average",
    )
    p.add_argument("--ref-index", type=int, default=-1, help="reference member of the subgradient")

    p = sub.add_parser("pure-nash", help="does a pure-strategy equilibrium exist?")
    _instance_args(p)
    _divergence_arg(p)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--iters", type=int, default=1000, help="solver iterations for the upper bound")

    p = sub.add_parser("oracle", help="brute-force grid verifiers")
    p.add_argument("which", choices=("dual", "edge", "pure"))
    _instance_args(p)
    _divergence_arg(p)
    p.add_argument("--resolution", type=float, default=1e-3)
    p.add_argument("--weights", default="uniform", help="weights for the edge scan")

    p = sub.add_parser("probe-rate", help="TV distance of the averaged centroid vs t")
    _instance_args(p)
    _divergence_arg(p)
    p.add_argument("--t-list", default="100,1000,10000")
    p.add_argument("--t-ref", type=int, help="reference run length (default 100 * max t)")
    p.add_argument("--w0", default="uniform")
    p.add_argument("--trace-every", type=int, default=100, help="spacing of the (i, gap) table")
    return parser


def _error(exc, code):
    body = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ParseError):
        body["path"] = exc.path
    sys.stderr.write(json.dumps(body) + "\n")
    return code


def _emit(args, report):
    text = dumps_report(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = default_tol()
        doc, inst = _load(args, tol)
        flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "no_metadata")}
        inputs = {"instance": doc, "flags": flags}
        code = EXIT_OK
        try:
            results, trace, warnings = COMMANDS[args.command](args, inst, tol)
        except _Unconverged as exc:
            results, trace, warnings = exc.report
            code = EXIT_NOT_CONVERGED
        _emit(args, make_report(args.command, inputs, results, trace, warnings, metadata=not args.no_metadata))
        return code
    except ParseError as exc:
        return _error(exc, EXIT_PARSE)
    except (NotConvergedError, ToleranceNotReachedError) as exc:
        return _error(exc, EXIT_NOT_CONVERGED)
    except GameError as exc:
        return _error(exc, EXIT_DOMAIN)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
