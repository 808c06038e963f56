"""Command-line front end.

Subcommands: ``ue``, ``worst``, ``signal``, ``reproduce`` and ``export``.
Network arguments are file paths or the names of bundled examples
(``wheatstone``, ``tworoad``, ``chain``, ``n1``, ``n2``).

Exit codes: 0 success, 1 internal error, 2 input error, 3 solver did not
converge, 4 a reproduction check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .equilibrium import solve_ue
from .errors import NetworkFormatError, NoPath, NotConverged, PathExplosion, UnsupportedStateSpace
from .network import Network, dump_json, enumerate_paths, load_network
from .persuasion import (
    Belief,
    StochasticNetwork,
    belief_curve,
    design_signal,
    load_stochastic_network,
)
from .envelope import envelope_values
from .reproduce import TARGETS, run
from .topologies import make_n1, make_n2, make_two_road, make_wheatstone, make_wheatstone_chain
from .worstcase import worst_brue

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_CHECK = 0, 1, 2, 3, 4
BUNDLED = ("wheatstone", "tworoad", "chain", "n1", "n2")
CHAIN_DEFAULTS = {"n": 2, "d_prime": 0.1}

log = logging.getLogger("brue")


class InputError(Exception):
    """Bad command-line input; maps to exit code 2."""


def num(x: float) -> str:
    return f"{float(x):.12g}"


def _round(x):
    # json output carries the same 12 significant digits as the text form
    if isinstance(x, (float, np.floating)):
        return float(num(x))
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_round(v) for v in x]
    return x


# -- bundled examples ----------------------------------------------------------


def example_document(name: str, **params) -> dict:
    """JSON document for a bundled example, built from the topology builders."""
    if name == "wheatstone":
        return make_wheatstone().to_dict()
    if name == "tworoad":
        return make_two_road().to_dict()
    if name == "chain":
        p = {**CHAIN_DEFAULTS, **{k: v for k, v in params.items() if v is not None}}
        doc = make_wheatstone_chain(int(p["n"]), float(p["d_prime"])).to_dict()
        doc["generator"] = {"builder": "wheatstone_chain", "n": int(p["n"]), "d_prime": float(p["d_prime"])}
        return doc
    if name == "n1":
        return make_n1().to_dict()
    if name == "n2":
        prior = params.get("prior")
        return make_n2(0.5 if prior is None else float(prior)).to_dict()
    raise InputError(f"unknown example {name!r}; choose from {', '.join(BUNDLED)}")


def _resolve(spec: str) -> Path:
    path = Path(spec)
    if path.exists():
        return path
    stem = spec[:-5] if spec.endswith(".json") else spec
    if stem in BUNDLED:
        return Path(str(resources.files("brue") / "data" / f"{stem}.json"))
    raise InputError(f"no such network file: {spec}")


def read_network(spec: str) -> Network:
    return load_network(_resolve(spec))


def read_stochastic(spec: str) -> StochasticNetwork:
    return load_stochastic_network(_resolve(spec))


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` -> [a, a+step, ..., b] (endpoints inclusive)."""
    try:
        a, b, step = (float(t) for t in text.split(":"))
    except ValueError as exc:
        raise InputError(f"--eps-grid expects a:b:step, got {text!r}") from exc
    if step <= 0 or b < a or a < 0:
        raise InputError("--eps-grid needs 0 <= a <= b and step > 0")
    n = int(np.floor((b - a) / step + 1e-9))
    grid = [round(a + k * step, 12) for k in range(n + 1)]
    if b - grid[-1] > 1e-9 * max(1.0, abs(b)):
        grid.append(b)
    return grid


def parse_prior(text: str | None, snet: StochasticNetwork) -> StochasticNetwork:
    if text is None:
        return snet
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError as exc:
        raise InputError(f"--prior expects a number or comma-separated vector, got {text!r}") from exc
    try:
        prior = Belief.binary(vals[0]) if len(vals) == 1 and snet.n_states == 2 else Belief(np.array(vals))
        return StochasticNetwork(snet.base, snet.state_costs, prior, snet.state_names)
    except (ValueError, UnsupportedStateSpace) as exc:
        raise InputError(f"invalid prior: {exc}") from exc


def _eps_list(args) -> list[float]:
    if args.eps_grid is not None:
        return parse_grid(args.eps_grid)
    if args.eps is None:
        raise InputError("give --eps or --eps-grid")
    if args.eps < 0:
        raise InputError("--eps must be nonnegative")
    return [args.eps]


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([num(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _json(doc) -> str:
    return json.dumps(_round(doc), indent=2) + "\n"


# -- commands --------------------------------------------------------------------


def cmd_ue(args) -> str:
    net = read_network(args.network)
    sol = solve_ue(net, tol=args.tol, seed=args.seed)
    fe, ce = sol.edge_flow, sol.edge_costs
    if args.format == "csv":
        return _csv(([e.id, float(f), float(c)] for e, f, c in zip(net.edges, fe, ce)), ["edge", "flow", "cost"])
    doc = {
        "psi0": sol.psi0,
        "phi0": sol.phi0,
        "relative_gap": sol.relative_gap,
        "iterations": sol.iterations,
        "edges": [{"id": e.id, "flow": float(f), "cost": float(c)} for e, f, c in zip(net.edges, fe, ce)],
    }
    if args.format == "json":
        return _json(doc)
    lines = [
        f"psi0 {num(sol.psi0)}",
        f"phi0 {num(sol.phi0)}",
        f"relative_gap {num(sol.relative_gap)}",
        f"iterations {sol.iterations}",
        "edge flow cost",
    ]
    lines += [f"{e.id} {num(f)} {num(c)}" for e, f, c in zip(net.edges, fe, ce)]
    return "\n".join(lines) + "\n"


def cmd_worst(args) -> str:
    net = read_network(args.network)
    grid = _eps_list(args)
    paths = enumerate_paths(net)
    results = [worst_brue(net, paths, e, args.starts, seed=args.seed, certify=args.certify) for e in grid]
    if args.format == "csv":
        return _csv(([r.eps, r.psi_eps, int(r.certified)] for r in results), ["eps", "psi_eps", "certified"])
    docs = [
        {
            "eps": r.eps,
            "psi_eps": r.psi_eps,
            "method": r.method,
            "certified": r.certified,
            "witness": {paths.label(i): float(v) for i, v in enumerate(r.witness.values)},
        }
        for r in results
    ]
    if args.format == "json":
        return _json(docs if len(docs) > 1 else docs[0])
    lines = []
    for d in docs:
        lines.append(f"eps {num(d['eps'])} psi_eps {num(d['psi_eps'])} method {d['method']} certified {str(d['certified']).lower()}")
        lines += [f"  {k} {num(v)}" for k, v in d["witness"].items()]
    return "\n".join(lines) + "\n"


def cmd_signal(args) -> str:
    snet = parse_prior(args.prior, read_stochastic(args.network))
    if args.eps is None or args.eps < 0:
        raise InputError("signal needs a nonnegative --eps")
    curve = None
    if snet.n_states == 2:
        curve = belief_curve(snet, args.eps, args.grid_size, seed=args.seed)
    scheme, cost = design_signal(
        snet, args.eps, args.grid_size, best_effort=args.best_effort, curve=curve, seed=args.seed
    )
    if args.format == "csv":
        if curve is None:
            raise InputError("csv curve output needs a two-state network")
        mus, vals = curve
        env = envelope_values(mus, vals)
        return _csv(zip(map(float, mus), map(float, vals), map(float, env)), ["mu", "psi_eps", "envelope"])
    doc = {
        "eps": args.eps,
        "kind": scheme.kind,
        "approximate": scheme.approximate,
        "expected_cost": cost,
        "states": list(snet.state_names),
        "prior": scheme.prior.probabilities.tolist(),
        "posteriors": [b.probabilities.tolist() for b in scheme.posteriors],
        "weights": scheme.weights.tolist(),
        "conditional": scheme.conditional.tolist(),
    }
    if args.format == "json":
        return _json(doc)
    lines = [
        f"eps {num(args.eps)}",
        f"kind {scheme.kind}" + (" (approximate)" if scheme.approximate else ""),
        f"expected_cost {num(cost)}",
        "message weight posterior",
    ]
    for m, (w, b) in enumerate(zip(scheme.weights, scheme.posteriors)):
        lines.append(f"{m} {num(w)} " + " ".join(num(p) for p in b.probabilities))
    lines.append("conditional pi(message | state)")
    for name, row in zip(snet.state_names, scheme.conditional):
        lines.append(f"{name} " + " ".join(num(p) for p in row))
    return "\n".join(lines) + "\n"


def cmd_reproduce(args) -> tuple[str, int]:
    checks = run(args.target)
    text = "\n".join(c.line() for c in checks)
    failed = sum(not c.passed for c in checks)
    text += f"\n{args.target}: {len(checks) - failed}/{len(checks)} checks passed\n"
    return text, EXIT_CHECK if failed else EXIT_OK


def cmd_export(args) -> str:
    return dump_json(example_document(args.name, n=args.n, d_prime=args.d_prime, prior=args.prior))


# -- entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="brue", description="Boundedly rational user equilibria and public signals.")
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, network=True):
        if network:
            sp.add_argument("network", help="network JSON file or bundled example name")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=("text", "csv", "json"), default="text")
        sp.add_argument("--output", "-o", help="write to this file instead of stdout")

    sp = sub.add_parser("ue", help="solve the user equilibrium")
    common(sp)
    sp.add_argument("--tol", type=float, default=1e-10, help="relative duality gap target")

    sp = sub.add_parser("worst", help="worst-case social cost over eps-BRUE flows")
    common(sp)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--eps-grid", metavar="A:B:STEP")
    sp.add_argument("--starts", type=int, default=32, help="multi-start count per support")
    sp.add_argument("--certify", action="store_true", help="cross-check small networks on a lattice")

    sp = sub.add_parser("signal", help="optimal public signal for a stochastic network")
    common(sp)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--prior", help="Pr[state 1] for two states, else a comma-separated vector")
    sp.add_argument("--grid-size", type=int, default=2001)
    sp.add_argument("--best-effort", action="store_true", help="allow more than two states (approximate)")

    sp = sub.add_parser("reproduce", help="run the reproduction checks for one example")
    sp.add_argument("target", choices=TARGETS)
    sp.add_argument("--output", "-o")

    sp = sub.add_parser("export", help="write a bundled example network as JSON")
    sp.add_argument("name", choices=BUNDLED)
    sp.add_argument("--n", type=int, help="chain length (chain only)")
    sp.add_argument("--d-prime", type=float, help="local demand (chain only)")
    sp.add_argument("--prior", type=float, help="Pr[state 1] (n2 only)")
    sp.add_argument("--output", "-o")
    return p


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    code = EXIT_OK
    try:
        if args.command == "reproduce":
            text, code = cmd_reproduce(args)
        else:
            text = {"ue": cmd_ue, "worst": cmd_worst, "signal": cmd_signal, "export": cmd_export}[args.command](args)
        _emit(text, args.output)
    except (InputError, NetworkFormatError, NoPath, PathExplosion, UnsupportedStateSpace, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotConverged as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    return code


if __name__ == "__main__":
    sys.exit(main())
