"""Command-line front end: ``hardball <subcommand> ...``.

Exit codes
----------
0   success (for ``classify``: the configuration is regular)
2   usage error, missing or malformed input file, parameter out of range
3   a point lies outside the box
4   numerical failure (LP iteration cap, multistart disagreement, degenerate sample)
10  ``classify``: balanced configuration
11  ``classify``: ambiguous (neither or both certificates)
12  a flow stalled or the retraction is partial
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import flow, roadmap, stress, taut, topo, witness
from .exceptions import (AmbiguousClassificationError, DegenerateSampleError, DomainViolationError,
                         HardballError, LPNumericError, NonUniquenessError, ParameterError)
from .geometry import BoxDomain
from .io import InputFormatError, dumps, load_configuration, load_domain, render_svg

DEFAULT_SEED = 2011
DEFAULT_LENGTHS = (1.0, 2.0)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NUMERIC = 4
EXIT_BALANCED = 10
EXIT_AMBIGUOUS = 11
EXIT_STALLED = 12


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return value


def _seed(text):
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _threads(args):
    if args.threads:
        return args.threads
    env = os.environ.get("HARDBALL_THREADS")
    return int(env) if env and env.isdigit() and int(env) > 0 else 1


def _domain(args) -> BoxDomain:
    if getattr(args, "domain", None):
        return load_domain(args.domain)
    return BoxDomain(tuple(args.lengths or DEFAULT_LENGTHS))


def _emit(args, payload, text=None):
    if getattr(args, "format", "json") == "text" and text is not None:
        print(text)
    else:
        print(dumps(payload))
    if args.verbose and text is not None:
        print(text, file=sys.stderr)


def _write(path, content):
    Path(path).write_text(content)


# -- subcommands -------------------------------------------------------------

def cmd_tau(args):
    domain = _domain(args)
    config = load_configuration(args.config)
    aset = taut.active_set(domain, config.points, args.eps_act)
    lines = [f"tau = {aset.tau!r}"] + [json.dumps(c.to_dict()) for c in aset.constraints]
    _emit(args, aset.to_dict(), "\n".join(lines))
    return EXIT_OK


def cmd_classify(args):
    domain = _domain(args)
    config = load_configuration(args.config)
    try:
        result = stress.classify(domain, config.points, args.eps_act, args.margin_tol, args.balance_tol,
                                 args.weight_floor)
    except AmbiguousClassificationError as exc:
        _emit(args, {"kind": "ambiguous", "margin": exc.margin, "residual": exc.residual}, str(exc))
        return EXIT_AMBIGUOUS
    if result.kind == "regular":
        cert = result.certificate
        _emit(args, {"kind": "regular", "margin": cert.margin, "direction": cert.direction.tolist(),
                     "certificate": cert.to_dict()},
              f"regular: margin {cert.margin:.6g}, direction {cert.direction.tolist()}")
        return EXIT_OK
    cert = result.certificate
    payload = {"kind": "balanced", "nontrivial": result.nontrivial, "weights": cert.weights.tolist(),
               "residual": cert.residual, "certificate": cert.to_dict(), "graph": result.graph.to_dict()}
    if args.svg:
        _write(args.svg, render_svg(domain, config.points, result.certificate.tau, result.graph))
    _emit(args, payload, "balanced: weights " + ", ".join(f"{w:.6g}" for w in cert.weights))
    return EXIT_BALANCED


def _flow_options(args):
    return flow.FlowOptions(max_iter=args.max_iter, eps_act=args.eps_act, strict=False)


def cmd_ascend(args):
    domain = _domain(args)
    config = load_configuration(args.config)
    traj = flow.ascend(domain, config.points, args.target, _flow_options(args))
    if args.jsonl:
        _write(args.jsonl, traj.to_jsonl())
    payload = {"status": traj.status, "steps": len(traj) - 1, "time": traj.times[-1],
               "final_tau": traj.final_tau, "points": traj.final.tolist(), "stall_kind": traj.stall_kind}
    _emit(args, payload, f"{traj.status} after {len(traj) - 1} steps, tau = {traj.final_tau!r}")
    return EXIT_OK if traj.status == "reached-target" else EXIT_STALLED


def cmd_retract(args):
    domain = _domain(args)
    if args.configs:
        try:
            data = json.loads(Path(args.configs).read_text())
            configs = [np.asarray(c["points"] if isinstance(c, dict) else c, dtype=float) for c in data]
        except (OSError, ValueError, TypeError, KeyError) as exc:
            raise InputFormatError(f"{args.configs}: {exc}") from exc
    else:
        rng = np.random.default_rng(args.seed)
        configs = []
        for _ in range(args.samples):
            c = roadmap.sample_configuration(domain, args.n, args.a, rng)
            if c is None:
                raise ParameterError(f"could not sample Conf({args.n}, {args.a})")
            configs.append(c)
    report = flow.retract_level(domain, configs, args.a, args.b, _flow_options(args), n_jobs=_threads(args))
    payload = report.to_dict()
    payload["stall_kinds"] = {str(k): report.trajectories[k].stall_kind for k in report.stalled}
    _emit(args, payload, f"{len(configs) - len(report.stalled)}/{len(configs)} reached tau >= {args.b}")
    return EXIT_OK if report.complete else EXIT_STALLED


def _spec(args):
    perm = None if not args.perm else tuple(p - 1 for p in args.perm)
    return witness.ChainSpec(args.axis, perm)


def cmd_chain(args):
    domain = _domain(args)
    pts, rs = witness.chain_configuration(domain, args.n, _spec(args))
    result = stress.classify(domain, pts)
    payload = {"r_star": rs, "points": pts.tolist(), "classification": result.kind}
    if result.kind == "balanced":
        payload["certificate"] = result.certificate.to_dict()
    _emit(args, payload, f"r* = {rs!r}; {result.kind}")
    return EXIT_OK


def cmd_sphere(args):
    domain = _domain(args)
    lines = []
    for k in range(args.count):
        sample = witness.sample_S_epsilon(domain, args.n, args.epsilon, seed=[args.seed, k], spec=_spec(args))
        if args.retract:
            r = args.r if args.r is not None else domain.lengths[args.axis] / (2 * args.n) - args.epsilon
            for step, pts in enumerate(witness.retract_chain(sample, r, steps=args.steps)):
                lines.append(dumps({"t": step / (2 * args.steps), "tau": taut.tau(domain, pts),
                                    "points": pts.reshape(-1).tolist()}))
        else:
            lines.append(dumps({"t": k, "tau": taut.tau(domain, sample.config),
                                "points": sample.config.reshape(-1).tolist(),
                                "r_prime": sample.r_prime,
                                "tangent_rank": witness.tangent_rank(domain, sample)}))
    print("\n".join(lines))
    return EXIT_OK


def cmd_sigma(args):
    domain = _domain(args)
    config = load_configuration(args.config)
    r = args.r if args.r is not None else config.radius
    if r is None:
        raise ParameterError("sigma needs --r or a radius in the configuration file")
    member = witness.sigma_membership(domain, config.points, r, _spec(args), args.gap_from_first)
    _emit(args, {"member": member, "r": r}, "in Sigma" if member else "not in Sigma")
    return EXIT_OK


def cmd_intersect(args):
    domain = _domain(args)
    w = witness.intersection_witness(domain, args.n, args.epsilon, _spec(args), seed=args.seed)
    payload = {"points": w.config.tolist(), "rank": w.rank, "span_rank": w.span_rank,
               "dimension": w.config.size, "roots_found": len(w.roots), "r_prime": w.r_prime}
    _emit(args, payload, f"unique intersection, rank {w.rank}/{w.config.size}")
    return EXIT_OK


def cmd_betti(args):
    if args.domain or args.lengths:
        domain = _domain(args)
        d, k, L = domain.d, topo.k_multiplicity(domain), domain.shortest_side()
    else:
        d, k, L = args.d, args.k, None
    d = args.d if args.d is not None else d
    k = args.k if args.k is not None else k
    if d is None or k is None:
        raise ParameterError("betti needs --d and --k, or a box")
    tables = topo.betti_across_threshold(args.n, d, k, L)
    _emit(args, tables.to_dict(), tables.to_text())
    return EXIT_OK


def cmd_connect(args):
    domain = _domain(args)
    threads = _threads(args)
    if args.sweep:
        rows = roadmap.radius_sweep(domain, args.n, args.sweep, args.samples, args.seed, k=args.k, n_jobs=threads)
        if args.csv:
            _write(args.csv, "r,components\n" + "".join(f"{r!r},{c}\n" for r, c in rows))
        _emit(args, {"sweep": [{"r": r, "components": c} for r, c in rows]})
        return EXIT_OK
    count, rm = roadmap.connectivity_experiment(domain, args.n, args.r, args.samples, args.seed, k=args.k,
                                                n_jobs=threads)
    payload = {"components": count, **rm.to_dict(adjacency=args.adjacency)}
    _emit(args, payload, f"{count} components among {len(rm.nodes)} nodes")
    return EXIT_OK


def cmd_render(args):
    domain = _domain(args)
    config = load_configuration(args.config)
    r = args.radius if args.radius is not None else config.radius
    graph = None
    if args.stress:
        result = stress.classify(domain, config.points)
        if result.kind == "balanced":
            graph = result.graph
        r = r if r is not None else taut.tau(domain, config.points)
    _write(args.out, render_svg(domain, config.points, r, graph))
    _emit(args, {"written": args.out})
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hardball", description="Analyse configurations of hard spheres in a box.")
    parser.add_argument("--threads", type=int, default=None, help="cap on worker threads (env HARDBALL_THREADS)")
    parser.add_argument("--verbose", action="store_true", help="human-readable summary on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, config=False, tolerances=False, fmt=True):
        p.add_argument("--domain", help="JSON file with {\"lengths\": [...]}")
        p.add_argument("--lengths", type=_positive, nargs="+", help="side lengths (default 1 2)")
        if config:
            p.add_argument("--config", required=True, help="JSON file with {\"points\": [[...], ...]}")
        if tolerances:
            p.add_argument("--eps-act", type=_positive, default=None)
            p.add_argument("--margin-tol", type=_positive, default=stress.MARGIN_TOL)
            p.add_argument("--balance-tol", type=_positive, default=None)
            p.add_argument("--weight-floor", type=_positive, default=stress.WEIGHT_FLOOR)
        if fmt:
            p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS)
        p.add_argument("--threads", type=int, default=argparse.SUPPRESS)

    def chain_args(p):
        p.add_argument("--axis", type=int, default=0)
        p.add_argument("--perm", type=int, nargs="+", help="1-based labels along the chain")

    p = sub.add_parser("tau", help="tau and the active set")
    common(p, config=True)
    p.add_argument("--eps-act", type=_positive, default=None)
    p.set_defaults(func=cmd_tau)

    p = sub.add_parser("classify", help="regular (ascent certificate) or balanced (stress weights)")
    common(p, config=True, tolerances=True)
    p.add_argument("--svg", help="write the stress graph as SVG (d = 2)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("ascend", help="flow a configuration up to a target tau")
    common(p, config=True)
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--eps-act", type=_positive, default=None)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--jsonl", help="write the trajectory as JSON lines")
    p.set_defaults(func=cmd_ascend)

    p = sub.add_parser("retract", help="retract Conf(n, a) onto Conf(n, b)")
    common(p)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--configs", help="JSON list of configurations instead of sampling")
    p.add_argument("--eps-act", type=_positive, default=None)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.set_defaults(func=cmd_retract)

    p = sub.add_parser("chain", help="critical chain at r* = L/2n and its certificate")
    common(p)
    p.add_argument("--n", type=int, required=True)
    chain_args(p)
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("sphere", help="samples of S_eps (JSON lines), optionally their contraction paths")
    common(p, fmt=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--epsilon", type=_positive, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--retract", action="store_true", help="emit the contraction path instead")
    p.add_argument("--r", type=_positive, default=None)
    p.add_argument("--steps", type=int, default=64)
    chain_args(p)
    p.set_defaults(func=cmd_sphere)

    p = sub.add_parser("sigma", help="membership in the cell Sigma")
    common(p, config=True)
    p.add_argument("--r", type=_positive, default=None)
    p.add_argument("--gap-from-first", action="store_true")
    chain_args(p)
    p.set_defaults(func=cmd_sigma)

    p = sub.add_parser("intersect", help="the transversal point of S_eps and Sigma")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--epsilon", type=_positive, required=True)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    chain_args(p)
    p.set_defaults(func=cmd_intersect)

    p = sub.add_parser("betti", help="Betti numbers just below and above r*")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.set_defaults(func=cmd_betti)

    p = sub.add_parser("connect", help="roadmap component count of Conf(n, r)")
    common(p)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--r", type=float, default=0.1)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--k", type=int, default=roadmap.DEFAULT_K)
    p.add_argument("--adjacency", action="store_true", help="include edges and labels")
    p.add_argument("--sweep", type=float, nargs="+", help="radii to sweep instead of --r")
    p.add_argument("--csv", help="write the sweep as CSV")
    p.set_defaults(func=cmd_connect)

    p = sub.add_parser("render", help="SVG of a configuration (and its stress graph)")
    common(p, config=True, fmt=False)
    p.add_argument("--radius", type=_positive, default=None)
    p.add_argument("--stress", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be positive")
    try:
        return args.func(args)
    except InputFormatError as exc:
        print(f"hardball: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainViolationError as exc:
        print(f"hardball: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (LPNumericError, NonUniquenessError, DegenerateSampleError) as exc:
        print(f"hardball: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParameterError, HardballError) as exc:
        print(f"hardball: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
