"""``pidstar`` command line: decompose a distribution file, compare channels,
emit example fixtures.

Exit codes: 0 success, 1 input error, 2 resource error (vertex cap),
3 non-convergence.  In ``decompose`` a failing measure is reported inline and
the exit code reflects the most severe failure.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import sys
from pathlib import Path

from . import __version__
from .blackwell import is_garbling
from .errors import InputError, NonConvergenceError, PIDError, ResourceError
from .fixtures import FIXTURES, generate_fixture
from .geometry import default_vertex_cap
from .io import channel_to_document, dumps, joint_to_document, load, load_channel
from .prob import Channel, mutual_information
from .redundancy import (
    cardinality_bound,
    gk_common_information,
    redundancy_gh,
    redundancy_star,
    redundancy_wedge,
)
from .union import DEFAULT_MAX_ITER, DEFAULT_TOL, union_star

__all__ = ["main", "decompose_command", "blackwell_command", "fixture_command", "build_parser"]

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_INPUT, EXIT_RESOURCE, EXIT_NONCONVERGENCE = 0, 1, 2, 3

MEASURES = ("redundancy", "union", "synergy", "unique", "excluded", "gk", "wedge", "gh", "broja")
DEFAULT_MEASURES = tuple(m for m in MEASURES if m != "gh")


def _channel_doc(ch: Channel) -> dict:
    return {
        "inputs": list(ch.in_alphabet.labels),
        "outputs": list(ch.out_alphabet.labels),
        "matrix": [[str(v) for v in row] for row in ch.matrix],
    }


def _error_entry(name: str, exc: PIDError) -> dict:
    err = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ResourceError):
        err["cap"] = exc.cap
        err["partial_value_bits"] = exc.partial
        err["partial_certified"] = False
    if isinstance(exc, NonConvergenceError):
        err["best_value_bits"] = exc.value
        err["gap_bits"] = exc.gap
        err["iterations"] = exc.iterations
    return {"name": name, "error": err}


def _severity(exc: PIDError) -> int:
    if isinstance(exc, NonConvergenceError):
        return EXIT_NONCONVERGENCE
    if isinstance(exc, ResourceError):
        return EXIT_RESOURCE
    return EXIT_INPUT


def _parse_measures(text: str | None) -> tuple[str, ...]:
    if not text:
        return DEFAULT_MEASURES
    wanted = [m.strip().lower() for m in text.split(",") if m.strip()]
    unknown = [m for m in wanted if m not in MEASURES]
    if unknown:
        raise InputError(f"unknown measures {unknown}; choose from {', '.join(MEASURES)}")
    return tuple(dict.fromkeys(wanted))


def decompose_command(
    path,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    q_card: int | None = None,
    vertex_cap: int | None = None,
    measures=None,
    seed: int = 0,
) -> tuple[dict, int]:
    """Compute the requested measures for a distribution file.

    Returns ``(report, exit_code)``.  Measures appear in the report sorted by
    name; failures are recorded in place of a value.
    """
    if isinstance(measures, str) or measures is None:
        measures = _parse_measures(measures)
    cap = vertex_cap if vertex_cap is not None else default_vertex_cap()
    data = Path(path).read_bytes() if Path(path).is_file() else b""
    joint, pruned = load(path, return_pruned=True)
    y = joint.target.name
    sources = [a.name for a in joint.sources]
    bivariate = len(sources) == 2
    total = mutual_information(joint, y, sources)
    entries: dict[str, dict] = {}
    code = EXIT_OK
    cache: dict[str, object] = {}

    def run(name, fn):
        nonlocal code
        try:
            entries[name] = fn()
        except PIDError as exc:
            entries[name] = _error_entry(name, exc)
            code = max(code, _severity(exc))

    def red():
        if "red" not in cache:
            cache["red"] = redundancy_star(joint, q_card=q_card, vertex_cap=cap)
        return cache["red"]

    def uni():
        if "uni" not in cache:
            cache["uni"] = union_star(joint, tol, max_iter)
        return cache["uni"]

    def m_redundancy():
        r = red()
        return {
            "name": "redundancy",
            "value_bits": r.value,
            "certificate": {
                "method": r.method,
                "q_cardinality": r.q_cardinality,
                "effective_cardinality": r.effective_cardinality,
                "vertices_examined": r.vertices_examined,
                "optimal_vertex_count": r.optimal_vertex_count,
                "channel_given_target": _channel_doc(r.channel_given_target),
            },
            "caveats": list(r.caveats),
        }

    def m_union():
        u = uni()
        return {
            "name": "union",
            "value_bits": u.value,
            "certificate": {
                "fw_gap_bits": u.fw_gap,
                "lower_bound_bits": u.lower_bound,
                "iterations": u.iterations,
                "coupling": joint_to_document(u.optimal_coupling),
            },
            "caveats": [],
        }

    def m_synergy():
        u = uni()
        return {
            "name": "synergy",
            "value_bits": total - u.value,
            "certificate": {"total_information_bits": total, "fw_gap_bits": u.fw_gap},
            "caveats": [],
        }

    def m_unique():
        r = red()
        return {
            "name": "unique",
            "value_bits": {s: mutual_information(joint, y, s) - r.value for s in sources},
            "certificate": {"redundancy_bits": r.value},
            "caveats": [],
        }

    def m_excluded():
        u = uni()
        return {
            "name": "excluded",
            "value_bits": {s: u.value - mutual_information(joint, y, s) for s in sources},
            "certificate": {"union_bits": u.value, "fw_gap_bits": u.fw_gap},
            "caveats": [],
        }

    def m_gk():
        if not bivariate:
            raise InputError("Gacs-Korner common information is reported for two sources only")
        from .prob import marginalize

        value, part = gk_common_information(marginalize(joint, sources))
        return {
            "name": "gk",
            "value_bits": value,
            "certificate": {"components": part.count, "labels": {s: list(l) for s, l in zip(sources, part.labels)}},
            "caveats": [],
        }

    def m_wedge():
        return {"name": "wedge", "value_bits": redundancy_wedge(joint), "certificate": {}, "caveats": []}

    def m_gh():
        r = redundancy_gh(joint, q_card=q_card, vertex_cap=cap)
        return {
            "name": "gh",
            "value_bits": r.value,
            "certificate": {
                "method": r.method,
                "q_cardinality": r.q_cardinality,
                "effective_cardinality": r.effective_cardinality,
                "vertices_examined": r.vertices_examined,
                "cardinality_heuristic": q_card is None,
                "channel_given_target": _channel_doc(r.channel_given_target),
            },
            "caveats": list(r.caveats),
        }

    def m_broja():
        if not bivariate:
            raise InputError("this redundancy is defined for exactly two sources")
        u = uni()
        mi = sum(mutual_information(joint, y, s) for s in sources)
        return {
            "name": "broja",
            "value_bits": mi - u.value,
            "certificate": {"union_bits": u.value, "fw_gap_bits": u.fw_gap},
            "caveats": [],
        }

    table = {
        "redundancy": m_redundancy,
        "union": m_union,
        "synergy": m_synergy,
        "unique": m_unique,
        "excluded": m_excluded,
        "gk": m_gk,
        "wedge": m_wedge,
        "gh": m_gh,
        "broja": m_broja,
    }
    for name in measures:
        run(name, table[name])

    report = {
        "input": {
            "path": str(path),
            "sha256": hashlib.sha256(data).hexdigest(),
            "variables": {a.name: list(a.labels) for a in joint.alphabets},
            "pruned": pruned,
            "total_information_bits": total,
        },
        "config": {
            "tol": tol,
            "max_iter": max_iter,
            "q_card": q_card,
            "q_card_used": q_card if q_card is not None else cardinality_bound(joint),
            "gh_cardinality_heuristic": "gh" in measures and q_card is None,
            "vertex_cap": cap,
            "measures": sorted(measures),
            "seed": seed,
        },
        "measures": [entries[k] for k in sorted(entries)],
        "version": __version__,
    }
    return report, code


def _fmt(v) -> str:
    if isinstance(v, dict):
        return ", ".join(f"{k}={_fmt(val)}" for k, val in v.items())
    text = f"{v:.6f}"
    # float noise below the printed precision would otherwise show as -0.000000
    return "0.000000" if float(text) == 0 else text


def format_table(report: dict) -> str:
    """Aligned human-readable rendering of a decomposition report."""
    rows = [("measure", "bits", "notes")]
    for m in report["measures"]:
        if "error" in m:
            rows.append((m["name"], "-", f"{m['error']['type']}: {m['error']['message']}"))
        else:
            rows.append((m["name"], _fmt(m["value_bits"]), "; ".join(m.get("caveats", []))))
    w0 = max(len(r[0]) for r in rows)
    w1 = max(len(r[1]) for r in rows)
    lines = [f"input: {report['input']['path']} (sha256 {report['input']['sha256'][:12]})"]
    lines += [f"{a:<{w0}}  {b:>{w1}}  {c}".rstrip() for a, b, c in rows]
    return "\n".join(lines) + "\n"


def blackwell_command(path_a, path_b) -> dict:
    """Decide whether the channel in ``path_a`` is a garbling of the one in ``path_b``."""
    ch_a, ch_b = load_channel(path_a), load_channel(path_b)
    res = is_garbling(ch_a, ch_b)
    return {
        "a": str(path_a),
        "b": str(path_b),
        "a_is_garbling_of_b": res.holds,
        "witness": channel_to_document(res.witness) if res.holds else None,
    }


def fixture_command(name: str, epsilon: str = "1/10") -> dict:
    return joint_to_document(generate_fixture(name, epsilon=epsilon))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pidstar", description="Blackwell redundancy and union information.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", help="compute information measures for a distribution file")
    d.add_argument("path")
    d.add_argument("--tol", type=float, default=DEFAULT_TOL, help="union solver gap in bits (default 1e-7)")
    d.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    d.add_argument("--q-card", type=int, default=None, help="size of the Q alphabet")
    d.add_argument("--vertex-cap", type=int, default=None, help="overrides PID_VERTEX_CAP")
    d.add_argument("--measures", default=None, help=f"comma list from {','.join(MEASURES)}")
    d.add_argument("--format", choices=("json", "table"), default="json")
    d.add_argument("--seed", type=int, default=0, help="echoed in the report; the computation is deterministic")

    b = sub.add_parser("blackwell", help="is channel A a garbling of channel B?")
    b.add_argument("a")
    b.add_argument("b")
    b.add_argument("--format", choices=("json", "table"), default="json")

    f = sub.add_parser("fixture", help="print an example distribution file")
    f.add_argument("name", help=f"one of {', '.join(FIXTURES)}; unq accepts unq(EPS)")
    f.add_argument("--epsilon", default="1/10", help="flip probability for unq")
    f.add_argument("-o", "--output", default=None, help="write to a file instead of stdout")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        if args.command == "decompose":
            if args.vertex_cap is not None and args.vertex_cap < 1:
                raise InputError("--vertex-cap must be positive")
            report, code = decompose_command(
                args.path,
                tol=args.tol,
                max_iter=args.max_iter,
                q_card=args.q_card,
                vertex_cap=args.vertex_cap,
                measures=args.measures,
                seed=args.seed,
            )
            sys.stdout.write(dumps(report) if args.format == "json" else format_table(report))
            return code
        if args.command == "blackwell":
            out = blackwell_command(args.a, args.b)
            if args.format == "json":
                sys.stdout.write(dumps(out))
            else:
                sys.stdout.write(f"{args.a} is a garbling of {args.b}: {'yes' if out['a_is_garbling_of_b'] else 'no'}\n")
                if out["witness"]:
                    for rec in out["witness"]["pmf"]:
                        sys.stdout.write(f"  p({rec['outcomes'][1]} | {rec['outcomes'][0]}) = {rec['p']}\n")
            return EXIT_OK
        doc = fixture_command(args.name, args.epsilon)
        if args.output:
            Path(args.output).write_text(dumps(doc), encoding="utf-8")
        else:
            sys.stdout.write(dumps(doc))
        return EXIT_OK
    except PIDError as exc:
        print(f"pidstar: {exc}", file=sys.stderr)
        return _severity(exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
