"""Command-line front end.

Subcommands: analyze, potential, verify, extend, growth, demo.  Every command
builds a JSON-ready report; ``--output`` chooses text, json or dot rendering.

Exit codes: 0 all requested checks pass, 1 a check failed, 2 bad input,
3 walk-enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .chainext import SegmentComplex, extension_pipeline, is_chain
from .costs import CostError, CostSpec, PointPair, pt
from .extreal import format_ext
from .graph import (BudgetExceeded, VariationGraph, build_variation_graph, condensation, enumerate_walks,
                    walk_classification)
from .instance import Instance, InstanceError, parse_instance, write_instance
from .metric import ball_chain_components, continuity_extension
from .potentials import (Antiderivative, BoundaryFailure, PotentialError, construct_auto, construct_from_boundary,
                         construct_incremental, collapse_to_psi, extend_potential, check_subdifferential,
                         verify_antiderivative)
from .variation import VariationMatrix, all_pairs_variation, find_positive_cycle, variation_growth
from . import worked

REPORT_SCHEMA = "cpotential.report/1"
EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class InputError(ValueError):
    pass


# ------------------------------------------------------------- reports

class Report:
    """Report under construction: sections plus named pass/fail checks."""

    def __init__(self, command: str, inst: Instance | None = None, tolerance: float = 1e-9, seed: int = 0):
        self.command = command
        self.instance = inst
        self.sections: dict = {}
        self.checks: list[dict] = []
        self.dot: str | None = None
        self.conventions = {
            "trivial_path": "the empty walk is admitted, so F(s, s) >= 0 and cyclic monotonicity means F(s, s) = 0",
            "tolerance": tolerance,
            "seed": seed,
            "extended_reals": "infinite values are written as the strings \"+inf\" and \"-inf\"",
        }

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append({"name": name, "ok": bool(ok), "detail": detail})
        return bool(ok)

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.checks)

    def to_json(self) -> dict:
        out = {
            "schema": REPORT_SCHEMA,
            "version": __version__,
            "command": self.command,
            "instance_digest": self.instance.digest() if self.instance is not None else None,
            "conventions": self.conventions,
            "ok": self.ok,
            "checks": self.checks,
        }
        out.update(self.sections)
        return out

    def to_text(self) -> str:
        lines = [f"{self.command}: {'ok' if self.ok else 'FAILED'}"]
        if self.instance is not None:
            lines.append(f"instance {self.instance.digest()} ({self.instance.n} points, {self.instance.cost.kind} cost)")
        for key, val in self.sections.items():
            if key == "F_text":
                lines.append("F matrix:")
                lines.append(val)
            elif isinstance(val, (dict, list)):
                lines.append(f"{key}: {json.dumps(val, default=str)}")
            else:
                lines.append(f"{key}: {val}")
        for c in self.checks:
            mark = "PASS" if c["ok"] else "FAIL"
            lines.append(f"  [{mark}] {c['name']}" + (f": {c['detail']}" if c["detail"] else ""))
        return "\n".join(lines)


def _flags(inst: Instance, graph: VariationGraph, F: VariationMatrix) -> dict:
    # cyclic monotonicity comes from the cycle search, not from F, so the two flags are independent
    flags = {"path_bounded": F.path_bounded,
             "cyclically_monotone": not find_positive_cycle(graph, graph.tolerance).positive_cycle}
    if inst.dim == 1:
        for order in ("ominus", "oplus"):
            flags[f"chain_{order}"] = is_chain(inst.points, order).chain
    return flags


def _f_summary(F: VariationMatrix) -> dict:
    v = F.values
    fin = v[np.isfinite(v)]
    return {
        "finite_entries": int(fin.size),
        "plus_inf_entries": int(np.sum(v == math.inf)),
        "minus_inf_entries": int(np.sum(v == -math.inf)),
        "max_finite": float(fin.max()) if fin.size else None,
    }


def _analysis(report: Report, inst: Instance, include_matrix: bool = True):
    graph = build_variation_graph(inst)
    F = all_pairs_variation(graph)
    cond = condensation(graph)
    report.sections["flags"] = _flags(inst, graph, F)
    report.sections["F_summary"] = _f_summary(F)
    if include_matrix:
        report.sections["F"] = F.to_json()["F"]
    report.sections["condensation"] = cond.to_json()
    report.dot = cond.to_dot()
    return graph, F, cond


# ------------------------------------------------------------- commands

def cmd_analyze(args) -> Report:
    inst = _load(args)
    rep = Report("analyze", inst, inst.tolerance, inst.seed)
    graph, F, _ = _analysis(rep, inst)
    rep.sections["F_text"] = F.to_text()
    rep.check("path_bounded iff cyclically_monotone", F.path_bounded == F.cyclically_monotone)
    if args.max_walk_len is not None:
        _oracle_check(rep, graph, F, args.max_walk_len)
    return rep


def _oracle_check(rep: Report, graph: VariationGraph, F: VariationMatrix, max_len: int):
    bad = []
    classes = walk_classification(graph)
    for s in range(graph.node_count):
        for e in range(graph.node_count):
            v = F[s, e]
            w = enumerate_walks(graph, s, e, max_len) if math.isfinite(v) else classes[s, e]
            if not (w == v or abs(w - v) <= graph.tolerance):
                bad.append([s, e, format_ext(v), format_ext(w)])
    rep.sections["walk_oracle"] = {"max_len": max_len, "mismatches": bad[:20]}
    rep.check("walk enumeration agrees with F", not bad, f"{len(bad)} mismatches")


def _order(args, n: int) -> list[int]:
    order = list(range(n))
    if args.permute:
        order = [int(i) for i in np.random.default_rng(args.seed).permutation(n)]
    return order


def _terminals(spec: str | None, n: int) -> list[int] | None:
    if not spec:
        return None
    try:
        out = [int(t) for t in spec.split(",") if t.strip()]
    except ValueError as exc:
        raise InputError(f"bad terminal list {spec!r}") from exc
    if any(not 0 <= t < n for t in out):
        raise InputError(f"terminal index out of range 0..{n - 1}")
    return out


def cmd_potential(args) -> Report:
    inst = _load(args)
    rep = Report("potential", inst, inst.tolerance, args.seed)
    graph, F, cond = _analysis(rep, inst, include_matrix=False)
    method = args.method
    try:
        if method == "incremental":
            order = _order(args, inst.n)
            rep.conventions["node_order"] = order
            f = construct_incremental(F, order)
        elif method == "auto":
            f = construct_auto(graph, F)
        else:
            terms = _terminals(args.terminals, inst.n)
            if terms is None:
                terms = sorted(min(m) for m in cond.members)
            f = construct_from_boundary(F, method, terms)
    except BoundaryFailure as exc:
        rep.sections["obstruction"] = exc.to_json()
        rep.check(f"{method} construction", False, str(exc))
        return rep
    except PotentialError as exc:
        rep.sections["obstruction"] = {"message": str(exc), "pairs": getattr(exc, "pairs", None)}
        rep.check(f"{method} construction", False, str(exc))
        return rep
    rep.sections["antiderivative"] = f.to_json()
    ver = verify_antiderivative(graph, f)
    rep.sections["verification"] = ver.to_json()
    rep.check("antiderivative inequality on all pairs", ver.ok, f"worst violation {ver.worst_violation:.3g}")
    if ver.ok:
        try:
            pot = extend_potential(inst, collapse_to_psi(inst, f, inst.tolerance))
            sub = check_subdifferential(inst, pot)
            rep.sections["potential"] = pot.to_json()
            rep.check("points lie in the subdifferential of the potential", sub.ok)
        except PotentialError as exc:
            rep.check("potential extension", False, str(exc))
    return rep


def _read_values(path: str, n: int) -> np.ndarray:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read antiderivative file {path}: {exc}") from exc
    if isinstance(data, dict) and "antiderivative" in data:
        data = data["antiderivative"]
    if isinstance(data, dict):
        data = data.get("values", data)
    if isinstance(data, dict):
        try:
            data = [data[str(i)] for i in range(n)]
        except KeyError as exc:
            raise InputError(f"antiderivative file is missing node {exc}") from exc
    if not isinstance(data, list) or len(data) != n:
        raise InputError(f"antiderivative needs {n} values")
    from .extreal import parse_ext
    return np.array([parse_ext(v) for v in data], dtype=float)


def cmd_verify(args) -> Report:
    inst = _load(args)
    rep = Report("verify", inst, inst.tolerance, inst.seed)
    vals = _read_values(args.antiderivative, inst.n)
    graph = build_variation_graph(inst)
    ver = verify_antiderivative(graph, vals)
    rep.sections["verification"] = ver.to_json()
    rep.check("antiderivative inequality on all pairs", ver.ok and ver.fiber_ok,
              f"worst violation {ver.worst_violation:.3g}")
    rep.dot = condensation(graph).to_dot()
    return rep


def cmd_extend(args) -> Report:
    inst = _load(args)
    order = args.order or inst.cost.declared_monotonicity
    if order not in ("ominus", "oplus"):
        raise InputError("extension needs an order: pass --order or declare the cost's monotonicity")
    if inst.dim != 1:
        raise InputError("chain extension works on planar instances only")
    pts = [(p.x[0], p.y[0]) for p in inst.points[: inst.explicit_count]]
    cx = SegmentComplex(pts, list(inst.segments), order)
    res = extension_pipeline(cx, inst.cost, density=args.density, seed=args.seed, tol=inst.tolerance)
    rep = Report("extend", inst, inst.tolerance, args.seed)
    rep.conventions["hypotheses"] = "checked on samples; a pass means corroborated (sampled), not proved"
    rep.conventions["density"] = args.density
    rep.sections["pipeline"] = res.to_json()
    for st in res.stages:
        rep.check(f"stage {st.name}", st.passed, st.detail)
    if res.extension_instance is not None:
        rep.dot = condensation(build_variation_graph(res.extension_instance)).to_dot()
        if args.write_extension:
            write_instance(res.extension_instance, args.write_extension)
            rep.sections["extension_file"] = str(args.write_extension)
    return rep


def _parse_point(s: str) -> PointPair:
    try:
        x, y = (float(v) for v in s.split(","))
    except ValueError as exc:
        raise InputError(f"point must look like 'x,y', got {s!r}") from exc
    return pt(x, y)


def cmd_growth(args) -> Report:
    if args.instances:
        insts = [parse_instance(p) for p in args.instances]
        cost = insts[0].cost
        family = [i.points for i in insts]
        if not (args.start and args.end):
            raise InputError("growth over instance files needs --start and --end")
        s, e = _parse_point(args.start), _parse_point(args.end)
    else:
        cost = CostSpec("polar")
        family = worked.polar_family(args.levels)
        s, e = pt(*worked.POLAR_START), pt(*worked.POLAR_END)
    rep = Report("growth", None, args.tolerance or 1e-9, args.seed)
    g = variation_growth(cost, family, s, e, args.tolerance or 1e-9)
    rep.sections["growth"] = {"sizes": g.sizes, "values": [format_ext(v) for v in g.values], "cycle_free": g.cycle_free}
    rep.check("F nondecreasing along the refinement", g.nondecreasing)
    rep.check("no positive cycle at any level", all(g.cycle_free))
    if args.threshold is not None:
        rep.check(f"F exceeds {args.threshold}", g.values[-1] > args.threshold, f"last value {g.values[-1]:.6g}")
    return rep


# ------------------------------------------------------------- demos

def _demo_coulomb(rep: Report):
    inst = worked.coulomb_instance(0.25)
    rep.instance = inst
    graph, F, _ = _analysis(rep, inst)
    seg = list(range(1, inst.n))
    worst = max(abs(F[s, e] - (1 / (inst.points[s].x[0] - 2) - 1 / (inst.points[e].x[0] - 2)))
                for s in seg for e in seg)
    rep.check("fiber variation 1/(x_s-2) - 1/(x_e-2)", worst <= 1e-9, f"max error {worst:.3g}")
    rep.check("no walk from the fiber back to (2,1)", all(F[s, 0] == -math.inf for s in seg))
    rep.check("F((2,1),(4,2)) = 1", abs(F[0, inst.n - 1] - 1.0) <= 1e-9, f"{F[0, inst.n - 1]!r}")
    rep.check("path bounded and cyclically monotone", F.path_bounded and F.cyclically_monotone)
    f = construct_incremental(F)
    rep.check("incremental antiderivative verifies", verify_antiderivative(graph, f).ok)


def _demo_polar(rep: Report):
    g = variation_growth(CostSpec("polar"), worked.polar_family(12), pt(*worked.POLAR_START), pt(*worked.POLAR_END))
    rep.sections["growth"] = {"sizes": g.sizes, "values": g.values, "cycle_free": g.cycle_free}
    rep.check("F nondecreasing along the refinement", g.nondecreasing)
    rep.check("F exceeds 10 at the finest level", g.values[-1] > 10, f"{g.values[-1]:.6g}")
    rep.check("cyclically monotone at every level", all(g.cycle_free))


def _demo_diagonal(rep: Report):
    inst = worked.diagonal_instance(20)
    rep.instance = inst
    graph, F, _ = _analysis(rep, inst, include_matrix=False)
    bad = 0
    for a in range(inst.n):
        for b in range(inst.n):
            want = float(b - a) if a <= b else -math.inf
            bad += F[a, b] != want
    rep.check("F((a,a),(b,b)) = b - a for a <= b, -inf otherwise", bad == 0, f"{bad} mismatches")
    rep.check("f(x,x) = -x verifies", verify_antiderivative(graph, [-float(i) for i in range(inst.n)]).ok)
    m = inst.n // 2
    try:
        construct_from_boundary(F, "sinks", [m])
        rep.check("sinks with an interior terminal fails", False)
    except BoundaryFailure as exc:
        rep.sections["sinks_failure"] = exc.to_json()
        rep.check("sinks with an interior terminal fails right of it",
                  exc.neg_inf_nodes == list(range(m + 1, inst.n)) and not exc.pos_inf_nodes)


def _demo_bregman(rep: Report):
    cost = CostSpec("bregman", {"generator": "negative_entropy"})
    rng = np.random.default_rng(rep.conventions["seed"])
    agree = 0
    trials = 40
    for t in range(trials):
        k = int(rng.integers(2, 7))
        xs = rng.uniform(0.2, 3.0, k)
        ys = rng.uniform(0.2, 3.0, k)
        if t % 2 == 0:
            xs.sort()
            ys.sort()
        inst = Instance(cost, [pt(float(a), float(b)) for a, b in zip(xs, ys)])
        graph = build_variation_graph(inst)
        F = all_pairs_variation(graph)
        chain = is_chain(inst.points, "oplus").chain
        has_potential = False
        if F.path_bounded:
            f = construct_incremental(F)
            if verify_antiderivative(graph, f).ok:
                try:
                    pot = extend_potential(inst, collapse_to_psi(inst, f))
                    has_potential = check_subdifferential(inst, pot).ok
                except PotentialError:
                    has_potential = False
        agree += len({chain, F.path_bounded, F.cyclically_monotone, has_potential}) == 1
    rep.sections["trials"] = trials
    rep.check("potential, path bounded, cyclically monotone and plus-chain agree", agree == trials,
              f"{agree}/{trials} sets agree")


def _demo_ex51(rep: Report):
    ex = worked.ex51()
    inst = ex.instance()
    rep.instance = inst
    rep.check("level parameters satisfy the placement constraints", ex.admissible())
    res = extension_pipeline(ex.complex(), ex.cost())
    rep.sections["pipeline"] = {k: v for k, v in res.to_json().items() if k != "antiderivative"}
    for st in res.stages:
        rep.check(f"stage {st.name}", st.passed, st.detail)
    if res.extension_instance is not None:
        rep.check("extension is strongly connected", res.condensation_count == 1)


def _demo_disk(rep: Report):
    inst = worked.disk_instance()
    rep.instance = inst
    balls = ball_chain_components(inst)
    rep.sections["balls"] = balls.to_json()
    rep.check("one ball-chain component", len(balls.members) == 1)
    cond = condensation(build_variation_graph(inst))
    rep.check("ball-chain classes refine condensation classes",
              all(len({int(cond.component_id[i]) for i in m}) == 1 for m in balls.members))


DEMOS: dict[str, Callable[[Report], None]] = {
    "coulomb-blackhole": _demo_coulomb,
    "polar-divergence": _demo_polar,
    "diagonal": _demo_diagonal,
    "bregman-equivalence": _demo_bregman,
    "ex51-pipeline": _demo_ex51,
    "disk-ballchain": _demo_disk,
}


def run_demo(name: str, seed: int = 0) -> Report:
    if name not in DEMOS:
        raise InputError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")
    rep = Report(f"demo {name}", None, 1e-9, seed)
    DEMOS[name](rep)
    return rep


def cmd_demo(args) -> Report:
    return run_demo(args.name, args.seed)


# ------------------------------------------------------------- plumbing

def _load(args) -> Instance:
    inst = parse_instance(args.instance)
    if args.tolerance is not None:
        inst = Instance(inst.cost, inst.points[: inst.explicit_count], args.tolerance, inst.seed, inst.segments)
    return inst


def _global_flags(parser: argparse.ArgumentParser, with_defaults: bool) -> None:
    # subcommands repeat the flags without defaults so a value given before the
    # subcommand name is not overwritten
    def dflt(v):
        return v if with_defaults else argparse.SUPPRESS
    parser.add_argument("--tolerance", type=float, default=dflt(None),
                        help="instance tolerance override (default: from file, 1e-9)")
    parser.add_argument("--seed", type=int, default=dflt(0))
    parser.add_argument("--max-walk-len", type=int, default=dflt(None),
                        help="cross-check F against walk enumeration up to this many edges")
    parser.add_argument("--output", choices=("text", "json", "dot"), default=dflt("text"))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, False)

    p = argparse.ArgumentParser(prog="cpotential", description="Potentials for costs with infinite values.")
    _global_flags(p, True)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="F matrix, flags and condensation")
    a.add_argument("instance")
    a.set_defaults(func=cmd_analyze)

    q = sub.add_parser("potential", parents=[common], help="construct and verify an antiderivative")
    q.add_argument("instance")
    q.add_argument("--method", choices=("incremental", "sinks", "sources", "auto"), default="incremental")
    q.add_argument("--permute", action="store_true", help="insert nodes in a seeded random order")
    q.add_argument("--terminals", default=None, help="comma-separated node indices for sinks/sources")
    q.set_defaults(func=cmd_potential)

    v = sub.add_parser("verify", parents=[common], help="check a given antiderivative")
    v.add_argument("instance")
    v.add_argument("antiderivative", help="JSON list, index map, or a potential report")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("extend", parents=[common], help="run the planar chain-extension pipeline")
    e.add_argument("instance")
    e.add_argument("--order", choices=("ominus", "oplus"), default=None)
    e.add_argument("--density", type=float, default=10.0, help="extension samples per unit length")
    e.add_argument("--write-extension", default=None, help="write the extended instance here")
    e.set_defaults(func=cmd_extend)

    g = sub.add_parser("growth", parents=[common], help="F along a nested family of samples")
    g.add_argument("instances", nargs="*", help="nested instance files, coarsest first (default: polar family)")
    g.add_argument("--levels", type=int, default=12)
    g.add_argument("--start", default=None)
    g.add_argument("--end", default=None)
    g.add_argument("--threshold", type=float, default=None)
    g.set_defaults(func=cmd_growth)

    d = sub.add_parser("demo", parents=[common], help="reproduce a worked example")
    d.add_argument("name", choices=sorted(DEMOS))
    d.set_defaults(func=cmd_demo)
    return p


def render(rep: Report, output: str) -> str:
    if output == "json":
        return json.dumps(_clean(rep.to_json()), indent=2, allow_nan=False)
    if output == "dot":
        if rep.dot is None:
            raise InputError(f"{rep.command} has no graph to draw")
        return rep.dot
    return rep.to_text()


def _clean(o):
    """JSON-safe copy: infinities as strings, numpy scalars and arrays unwrapped."""
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple, set, frozenset)):
        return [_clean(v) for v in o]
    if isinstance(o, np.ndarray):
        return _clean(o.tolist())
    if isinstance(o, (bool, np.bool_)):
        return bool(o)
    if isinstance(o, (int, np.integer)):
        return int(o)
    if isinstance(o, (float, np.floating)):
        return format_ext(float(o))
    return o


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rep = args.func(args)
        text = render(rep, args.output)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, InstanceError, CostError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(text)
    return EXIT_OK if rep.ok else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
