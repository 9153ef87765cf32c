"""Command-line surface.

``ordnung <command> [INPUT] [options]`` runs one analysis and writes a JSON
report to ``--out`` (stdout when omitted).  Exit status is 0 on success, 2
when the mathematical answer is negative (no independent subfamily, no
double-limit violation, a non-fragmented member, ...) and 1 on errors.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Optional

from . import __version__
from . import gallery, representation, selection, tameness
from .errors import InvalidInput, OrdnungError
from .formats import AnalysisReport, Dataset, digest, ingest, serialize, to_document
from .order import interval_topology
from .variation import first_descent, jordan_decompose, metric_variation, variation

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2

COMMANDS = (
    "variation", "jordan", "independence", "maxindep", "l1const", "dlp",
    "select-monotone", "select-bv", "select-poset", "select-metric",
    "stream-select", "embed", "fragcheck", "gallery",
)

NEEDS_INPUT = set(COMMANDS) - {"gallery"}


def _witness_doc(w):
    return {
        "indices": list(w.indices),
        "a": w.a,
        "b": w.b,
        "patterns": {tameness.pattern_label(p): x for p, x in sorted(w.pattern_witnesses.items())},
    }


def _family(data: Dataset, command):
    if data.family is None:
        raise InvalidInput(f"{command} needs a real-valued family (no 'metric' or 'poset' key)")
    return data.family


def _indices(params, family, default_k=None):
    idx = params.get("indices")
    if idx is None:
        k = default_k or len(family)
        return list(range(k))
    return [int(i) for i in idx]


def _samples(params):
    s = params.get("samples")
    return None if s is None else [int(p) for p in s]


def _selection_doc(res):
    return {
        "selected_indices": list(res.selected_indices),
        "size": len(res.selected_indices),
        "epsilon": res.epsilon,
        "sample_points": list(res.sample_points),
        "trace": [[t.stage, t.point, t.bin, len(t.survivors)] for t in res.method_trace],
    }


def _cmd_variation(data, params):
    if data.metric_members is not None:
        vals = [metric_variation(m) for m in data.metric_members]
    else:
        vals = [variation(f) for f in _family(data, "variation")]
    inv = {}
    if data.family is not None:
        inv["increasing_members_telescope"] = all(
            variation(f) == f.values[-1] - f.values[0] for f in data.family if first_descent(f.values) is None)
    return {"variations": vals}, inv, EXIT_OK


def _cmd_jordan(data, params):
    fam = _family(data, "jordan")
    parts, monotone, exact = [], True, True
    for f in fam:
        u, v = jordan_decompose(f)
        parts.append({"u": list(u.values), "v": list(v.values)})
        monotone &= first_descent(u.values) is None and first_descent(v.values) is None
        exact &= all(a - b == x for a, b, x in zip(u.values, v.values, f.values))
    return {"decompositions": parts}, {"u_v_increasing": monotone, "reconstruction_exact": exact}, EXIT_OK


def _cmd_independence(data, params):
    fam = _family(data, "independence")
    a, b = params.get("a"), params.get("b")
    if a is not None or b is not None:
        if a is None or b is None:
            raise InvalidInput("--a and --b must be given together")
        idx = _indices(params, fam, params.get("k"))
        out = tameness.independence_at(fam, idx, float(a), float(b))
        if not out:
            return ({"independent": False, "indices": idx, "empty_pattern": tameness.pattern_label(out.empty_pattern)},
                    {}, EXIT_NEGATIVE)
    else:
        k = int(params.get("k") or 2)
        out = tameness.independence_search(fam, k)
        if out is None:
            return {"independent": False, "k": k, "verdict": f"tame-at-{k}"}, {}, EXIT_NEGATIVE
    need, have = tameness.variation_budget(out, fam)
    inv = {"witness_revalidates": out.validate(fam), "variation_bound": need <= have}
    return {"independent": True, "witness": _witness_doc(out)}, inv, EXIT_OK


def _cmd_maxindep(data, params):
    fam = _family(data, "maxindep")
    k, w = tameness.max_independent_size(fam)
    if w is None:
        return {"k": 0, "witness": None}, {}, EXIT_NEGATIVE
    return {"k": k, "witness": _witness_doc(w)}, {"witness_revalidates": w.validate(fam)}, EXIT_OK


def _cmd_l1const(data, params):
    fam = _family(data, "l1const")
    if params.get("indices") is not None:
        fam = fam.subfamily(_indices(params, fam))
    tol = float(params.get("tolerance") or 1e-6)
    cert = tameness.l1_constant(fam, tol)
    achieved = tameness.sup_norm_of_combination(fam.rows(), cert.minimizing_coefficients)
    inv = {"coefficients_on_unit_sphere": abs(sum(abs(c) for c in cert.minimizing_coefficients) - 1) <= tol,
           "constant_attained": cert.constant <= achieved + tol}
    return {"constant": cert.constant, "coefficients": list(cert.minimizing_coefficients),
            "tolerance": tol, "method": cert.method}, inv, EXIT_OK


def _cmd_dlp(data, params):
    fam = _family(data, "dlp")
    rows = fam.rows()
    delta = float(params.get("delta") or 0.5)
    tol = float(params.get("tolerance") or 0.0)
    k = int(params.get("k") or 2)
    w = tameness.dlp_violation(rows, delta, tol, k)
    if w is None:
        return {"violation": None}, {}, EXIT_NEGATIVE
    return ({"violation": {"rows": list(w.rows), "cols": list(w.cols), "alpha": w.alpha, "beta": w.beta}},
            {"witness_revalidates": w.validate(rows, delta, tol)}, EXIT_OK)


def _pairwise_ok(rows, res):
    return selection.max_pairwise_deviation(rows, res.selected_indices, res.sample_points) <= res.epsilon


def _cmd_select_monotone(data, params):
    fam = _family(data, "select-monotone")
    res = selection.select_monotone(fam, float(params["epsilon"]), _samples(params))
    c, d = fam.range
    floor = selection.pigeonhole_floor(len(fam), selection.bin_count(c, d, res.epsilon), len(res.sample_points))
    inv = {"pairwise_within_epsilon": _pairwise_ok(fam.rows(), res), "pigeonhole_floor": len(res) >= floor}
    return _selection_doc(res), inv, EXIT_OK


def _cmd_select_bv(data, params):
    fam = _family(data, "select-bv")
    r = float(params["r"])
    res = selection.select_bv(fam, r, float(params["epsilon"]), _samples(params))
    return _selection_doc(res), {"pairwise_within_epsilon": _pairwise_ok(fam.rows(), res)}, EXIT_OK


def _cmd_select_poset(data, params):
    if data.poset_members is None:
        raise InvalidInput("select-poset needs an input with a 'poset' key")
    members = data.poset_members
    res = selection.select_poset_valued(members, float(params["epsilon"]), _samples(params))
    same = len({tuple(members[n].values[p] for p in res.sample_points) for n in res.selected_indices}) <= 1
    return _selection_doc(res), {"agree_on_samples": same or res.epsilon >= 1}, EXIT_OK


def _cmd_select_metric(data, params):
    if data.metric_members is None:
        raise InvalidInput("select-metric needs an input with a 'metric' key")
    members = data.metric_members
    res = selection.select_metric_valued(members, float(params["r"]), float(params["epsilon"]), _samples(params))
    d = members[0].target.d
    ok = all(d(members[n].values[p], members[m].values[p]) <= res.epsilon
             for n in res.selected_indices for m in res.selected_indices for p in res.sample_points)
    return _selection_doc(res), {"pairwise_distance_within_epsilon": ok}, EXIT_OK


def _cmd_stream_select(data, params):
    depth = int(params.get("depth") or 8)
    eps1 = float(params.get("epsilon") or 0.5)
    schedule = [eps1 / 2 ** (m - 1) for m in range(1, depth + 1)]
    if (params.get("stream") or "powers") == "powers":
        stream = selection.FunctionStream(lambda n, x: x ** (n + 1), (0.0, 1.0))
        points = lambda m: 1.0 - 1.0 / m
        budget = int(params.get("budget") or 100_000)
    else:
        fam = _family(data, "stream-select")
        if depth > fam.chain.size:
            raise InvalidInput("depth exceeds the number of chain points")
        stream = selection.FunctionStream(lambda n, x: fam[n].values[x], fam.range)
        points = lambda m: m - 1
        budget = min(int(params.get("budget") or len(fam)), len(fam))
    sel = selection.diagonal_select_stream(stream, points, schedule, depth, budget)
    problem = selection.check_stream_selection(sel, stream)
    doc = {"stages": [list(s) for s in sel.stages], "diagonal": list(sel.diagonal),
           "points": list(sel.points), "schedule": list(sel.schedule), "draws": sel.draws}
    return doc, {"nested_and_diagonal_cauchy": problem is None}, EXIT_OK


def _cmd_embed(data, params):
    fam = _family(data, "embed")
    before = len(fam)
    e = representation.diagonal_embed(fam.chain, fam, auto_augment=bool(params.get("auto_augment")))
    rep = representation.verify_claims(e)
    appended = [list(f.values) for f in e.family.members[before:]]
    doc = {
        "image_points": [list(v) for v in e.image_points],
        "appended_indicators": appended,
        "claims": {"closed_partial_order": rep.closed_partial_order, "linear": rep.linear,
                   "extensions": rep.extensions_ok, "topologies_agree": rep.topologies_agree,
                   "degenerate": rep.degenerate},
        "counterexamples": {k: repr(v) for k, v in rep.counterexamples.items()},
        "notes": list(rep.notes),
    }
    return doc, {"claims_1_to_3": rep.substantive_pass()}, EXIT_OK


def _cmd_fragcheck(data, params):
    eps = float(params["epsilon"])
    topo = data.topology or interval_topology(data.chain)
    out = []
    if data.metric_members is not None:
        for m in data.metric_members:
            r = representation.is_fragmented(m.values, topo, eps, target=m.target)
            out.append({"fragmented": r.fragmented, "witness": sorted(r.witness) if r.witness else None})
    else:
        for f in _family(data, "fragcheck"):
            r = representation.is_fragmented(f.values, topo, eps)
            out.append({"fragmented": r.fragmented, "witness": sorted(r.witness) if r.witness else None})
    status = EXIT_OK if all(o["fragmented"] for o in out) else EXIT_NEGATIVE
    return {"members": out, "topology_opens": len(topo.opens)}, {}, status


def _cmd_gallery(data, params):
    kind = params.get("kind") or "cantor"
    seed = int(params.get("seed") or 0)
    n = int(params.get("n") or 3)
    if kind == "rademacher":
        fam = gallery.gen_rademacher(n, int(params.get("grid") or 2 ** (n + 1)))
    elif kind == "cantor":
        fam = gallery.gen_cantor_projections(n)
    elif kind == "helly":
        g = int(params.get("grid") or 5)
        fam = gallery.gen_helly_powers(n, [i / (g - 1) for i in range(g)] if g > 1 else [0.0])
    elif kind == "monotone":
        fam = gallery.gen_random_monotone(int(params.get("count") or 10), int(params.get("chain_size") or 8), seed)
    elif kind == "bv":
        fam = gallery.gen_random_bv(int(params.get("count") or 10), int(params.get("chain_size") or 8),
                                    float(params.get("r") or 1.0), seed)
    else:
        raise InvalidInput(f"unknown gallery kind {kind!r}")
    if params.get("emit"):
        path = Path(params["emit"])
        Path(path).write_text(serialize(fam, "csv" if path.suffix.lower() == ".csv" else "json"))
    return {"kind": kind, "family": to_document(fam)}, {}, EXIT_OK


HANDLERS = {
    "variation": _cmd_variation,
    "jordan": _cmd_jordan,
    "independence": _cmd_independence,
    "maxindep": _cmd_maxindep,
    "l1const": _cmd_l1const,
    "dlp": _cmd_dlp,
    "select-monotone": _cmd_select_monotone,
    "select-bv": _cmd_select_bv,
    "select-poset": _cmd_select_poset,
    "select-metric": _cmd_select_metric,
    "stream-select": _cmd_stream_select,
    "embed": _cmd_embed,
    "fragcheck": _cmd_fragcheck,
    "gallery": _cmd_gallery,
}


def run(command: str, parameters: dict, data: Optional[Dataset] = None, raw: bytes = b"") -> AnalysisReport:
    """Dispatch one command; ``raw`` is the input file content used for the digest."""
    if command not in HANDLERS:
        raise InvalidInput(f"unknown command {command!r}")
    if command in NEEDS_INPUT and data is None and not (command == "stream-select"
                                                        and (parameters.get("stream") or "powers") == "powers"):
        raise InvalidInput(f"{command} needs an input file")
    start = time.perf_counter()
    result, invariants, status = HANDLERS[command](data, parameters)
    wall = time.perf_counter() - start
    params = {k: v for k, v in sorted(parameters.items()) if v is not None and k not in ("out", "input")}
    return AnalysisReport(command, digest(raw), params, result, invariants, __version__, wall, status)


def _int_list(text):
    return [int(p) for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--r", type=float)
    common.add_argument("--k", type=int)
    common.add_argument("--a", type=float)
    common.add_argument("--b", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=_int_list, help="comma-separated chain points")
    common.add_argument("--indices", type=_int_list, help="comma-separated member indices")
    common.add_argument("--tolerance", type=float)
    common.add_argument("--delta", type=float, help="dlp: minimal gap between the two constants")
    common.add_argument("--auto-augment", action="store_true")
    common.add_argument("--out", help="report path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), help="input format (default: by suffix)")
    common.add_argument("--depth", type=int)
    common.add_argument("--budget", type=int)
    common.add_argument("--stream", choices=("powers", "file"))
    common.add_argument("--kind", choices=("rademacher", "cantor", "helly", "monotone", "bv"))
    common.add_argument("--n", type=int)
    common.add_argument("--grid", type=int)
    common.add_argument("--count", type=int)
    common.add_argument("--chain-size", type=int)
    common.add_argument("--emit", help="gallery: also write the generated family here")

    parser = argparse.ArgumentParser(prog="ordnung", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        p.add_argument("input", nargs="?")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k not in ("command",)}
    params["auto_augment"] = params.get("auto_augment") or None
    try:
        data, raw = None, b""
        if args.input:
            path = Path(args.input)
            raw = path.read_bytes()
            data = ingest(path, args.format)
        report = run(args.command, params, data, raw)
    except (OrdnungError, ValueError, OSError) as e:
        print(f"ordnung {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())
