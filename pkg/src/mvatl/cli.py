"""Batch command-line front end.

``mvatl verify`` loads a lattice/model/formula, runs the chosen algorithm
and semantics, and prints a report; ``mvatl bench`` sweeps drone-patrol
configurations and emits one CSV row per cell.  Exit codes: 0 on success,
2 when an approximate run is inconclusive, 1 on errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import multiprocessing
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

from .bench import DroneConfig, gen_drones, load_map
from .cgs import MvCGS, load_model, prune_designated, validate
from .errors import InconclusiveError, MvatlError
from .lattice import lattice_from_dict
from .logic import Coalition, parse
from .mvmc import (
    ApproxValuation,
    CheckerConfig,
    Valuation,
    check,
    gmcheck_tr,
)
from .mc2.imperfect import find_uniform_witness
from .projection import project_threshold

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2


@dataclass
class RunReport:
    """Everything one verification run produced."""

    algorithm: str
    semantics: str
    values: Optional[dict[str, str]] = None  # global valuation
    value: Optional[str] = None  # local value when --state was given
    state: Optional[str] = None
    lower: Optional[dict[str, str]] = None
    upper: Optional[dict[str, str]] = None
    conclusive: bool = True
    per_level_seconds: dict[str, float] = field(default_factory=dict)
    total_seconds: float = 0.0
    witness: Optional[dict] = None

    def to_json(self) -> dict:
        doc = {
            "algorithm": self.algorithm,
            "semantics": self.semantics,
            "conclusive": self.conclusive,
            "per_level_seconds": self.per_level_seconds,
            "total_seconds": self.total_seconds,
        }
        if self.state is not None:
            doc["state"] = self.state
            doc["value"] = self.value
        if self.values is not None:
            doc["values"] = self.values
        if self.lower is not None:
            doc["lower"] = self.lower
            doc["upper"] = self.upper
        if self.witness is not None:
            doc["witness"] = self.witness
        return doc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvatl",
        description="multi-valued model checking of strategic ability",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check one formula on one model")
    v.add_argument("--model", required=True, help="model file or built-in (paper:...)")
    v.add_argument("--lattice", help="override lattice: file path or built-in name")
    v.add_argument("--formula", required=True, help="formula text, or @FILE")
    v.add_argument(
        "--semantics",
        choices=["perfect", "ir", "ir-approx"],
        default="perfect",
    )
    v.add_argument(
        "--algorithm",
        choices=["translate", "recursive", "oracle"],
        default="recursive",
    )
    v.add_argument("--state", help="report the value at this state only")
    v.add_argument(
        "--designated",
        help="comma-separated designated weights; prunes a weighted model first",
    )
    v.add_argument("--output", choices=["text", "json", "csv"], default="text")
    v.add_argument("--parallel", type=int, default=1)
    v.add_argument("--timeout", type=float, help="seconds before giving up")
    v.add_argument("--strategy-cap", type=int, default=10_000_000)
    v.add_argument(
        "--witness",
        action="store_true",
        help="report a uniform witness strategy (ir semantics, coalition formula)",
    )
    v.set_defaults(func=run_verify)

    b = sub.add_parser("bench", help="drone-patrol scaling sweep")
    b.add_argument("--map", required=True, help="map file or built-in (map4, grid12)")
    b.add_argument("--drones", default="1,2", help="comma list, e.g. 1,2,3")
    b.add_argument("--energy", default="1,2", help="comma list, e.g. 1,2,3,4")
    b.add_argument(
        "--pattern",
        choices=["may-detect", "can-detect", "team-detect-at"],
        default="can-detect",
        help="may-detect: some run finds pollution; can-detect: a drone can "
        "ensure it; team-detect-at: the team detects at --loc",
    )
    b.add_argument("--loc", help="location for team-detect-at")
    b.add_argument("--drone", default="1", help="observing drone for the detect patterns")
    b.add_argument("--timeout", type=float, help="seconds per cell")
    b.add_argument("--no-strict-moves", action="store_true")
    b.add_argument("--no-track-visited", action="store_true")
    b.add_argument("--state-cap", type=int, default=500_000)
    b.add_argument("--output", help="write CSV here instead of stdout")
    b.set_defaults(func=run_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InconclusiveError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except MvatlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


# --- verify -----------------------------------------------------------------


def _load_verify_inputs(args):
    model = load_model(args.model)
    if args.lattice:
        import yaml

        from .lattice import BUILTIN_LATTICE_NAMES, builtin_lattice

        if args.lattice in BUILTIN_LATTICE_NAMES:
            lattice = builtin_lattice(args.lattice)
        else:
            with open(args.lattice) as fh:
                lattice = lattice_from_dict(yaml.safe_load(fh))
        model = MvCGS(
            agents=model.agents,
            states=model.states,
            actions=model.actions,
            transitions=model.transitions,
            propositions=model.propositions,
            valuation=model.valuation,
            lattice=lattice,
            initial=model.initial,
            d=model.d,
            weights=model.weights,
            weight_lattice=model.weight_lattice,
            epistemic=model.epistemic,
        )
    violations = validate(model)
    if violations:
        for item in violations:
            print(f"invalid model: {item}", file=sys.stderr)
        raise MvatlError("model validation failed")
    text = args.formula
    if text.startswith("@"):
        with open(text[1:]) as fh:
            text = fh.read().strip()
    phi = parse(text, list(model.agents))
    return model, phi


def run_verify(args) -> int:
    model, phi = _load_verify_inputs(args)
    if args.designated:
        if model.weights is None:
            raise MvatlError("--designated requires a weighted model")
        chosen = [w.strip() for w in args.designated.split(",") if w.strip()]
        model, report = prune_designated(model, chosen)
        if report.dead_ends:
            print(
                f"pruning left {len(report.dead_ends)} dead-end state(s): "
                + ", ".join(sorted(report.dead_ends)),
                file=sys.stderr,
            )
            reachable = model.reachable()
            blocked = sorted(set(report.dead_ends) & reachable)
            if blocked:
                print(
                    f"error: dead ends reachable from {model.initial!r}: "
                    + ", ".join(blocked),
                    file=sys.stderr,
                )
                return EXIT_ERROR
    cfg = CheckerConfig(
        semantics=args.semantics.replace("-", "_"),
        algorithm=args.algorithm,
        parallel=args.parallel,
        strategy_cap=args.strategy_cap,
    )
    if args.timeout:
        outcome = _with_timeout(args.timeout, _verify_payload, (model, phi, cfg, args))
        if outcome is None:
            print("timeout", file=sys.stderr)
            return EXIT_ERROR
        report, code = outcome
    else:
        report, code = _verify_payload(model, phi, cfg, args)
    _emit_report(report, args.output)
    return code


def _verify_payload(model, phi, cfg, args):
    timing: dict[str, float] = {}
    start = time.perf_counter()
    result = check(model, phi, cfg, timing_sink=timing)
    total = time.perf_counter() - start
    report = RunReport(
        algorithm=cfg.algorithm,
        semantics=cfg.semantics,
        per_level_seconds=timing,
        total_seconds=total,
    )
    code = EXIT_OK
    if isinstance(result, ApproxValuation):
        report.lower = result.lower.to_dict()
        report.upper = result.upper.to_dict()
        inconclusive = result.inconclusive_states()
        report.conclusive = not inconclusive
        if report.conclusive:
            report.values = result.lower.to_dict()
        if args.state:
            if result.conclusive(args.state):
                report.state, report.value = args.state, result.lower[args.state]
            else:
                report.state = args.state
                report.conclusive = False
                code = EXIT_INCONCLUSIVE
        elif inconclusive:
            code = EXIT_INCONCLUSIVE
    else:
        report.values = result.to_dict()
        if args.state:
            report.state, report.value = args.state, result[args.state]
    if args.witness and cfg.semantics == "ir" and isinstance(phi, Coalition):
        report.witness = _find_witness(model, phi, args.state or model.initial, cfg)
    return report, code


def _find_witness(model, phi, state, cfg):
    # witness for the strongest threshold the state passes
    lat = model.lattice.lattice
    levels = [l for l in lat.join_irreducibles()]
    best = None
    for ell in levels:
        projected = project_threshold(model, ell)
        witness = find_uniform_witness(projected, phi, state, cfg.strategy_cap)
        if witness is not None and (best is None or lat.leq(best[0], ell)):
            best = (ell, witness)
    if best is None:
        return None
    return {"threshold": best[0], "strategy": best[1]}


def _emit_report(report: RunReport, output: str) -> None:
    if output == "json":
        print(json.dumps(report.to_json(), indent=2, sort_keys=True))
        return
    if output == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["state", "value"])
        if report.state is not None:
            writer.writerow([report.state, report.value])
        elif report.values is not None:
            for q, v in report.values.items():
                writer.writerow([q, v])
        else:
            for q in report.lower or {}:
                writer.writerow([q, f"{report.lower[q]}..{report.upper[q]}"])
        sys.stdout.write(buf.getvalue())
        return
    print(f"algorithm: {report.algorithm}   semantics: {report.semantics}")
    if report.state is not None:
        if report.value is not None:
            print(f"value at {report.state}: {report.value}")
        else:
            print(f"value at {report.state}: inconclusive "
                  f"[{report.lower[report.state]} .. {report.upper[report.state]}]")
    elif report.values is not None:
        for q, v in report.values.items():
            print(f"  {q}: {v}")
    else:
        for q in report.lower or {}:
            lo, up = report.lower[q], report.upper[q]
            mark = lo if lo == up else f"[{lo} .. {up}]"
            print(f"  {q}: {mark}")
    if report.per_level_seconds:
        per = "  ".join(
            f"{l}={s:.3f}s" for l, s in report.per_level_seconds.items()
        )
        print(f"per-threshold: {per}")
    print(f"total: {report.total_seconds:.3f}s")
    if report.witness is not None:
        print(f"witness (threshold {report.witness['threshold']}):")
        for agent, table in report.witness["strategy"].items():
            for cls, act in table.items():
                print(f"  agent {agent} at {cls}: {act}")


# --- bench -------------------------------------------------------------------

BENCH_HEADER = "drones,energy,states,tgen,tverif_lower,tverif_upper,output"


def bench_formula(pattern: str, drones: int, drone: str, loc: Optional[str]):
    if pattern == "may-detect":
        return f"[[]] F pol{drone}", "perfect"
    if pattern == "can-detect":
        return f"<<{drone}>> F pol{drone}", "ir_approx"
    if loc is None:
        raise MvatlError("team-detect-at needs --loc")
    team = ",".join(str(i) for i in range(1, drones + 1))
    alternatives = " | ".join(
        f"(at_{i}_{loc} & pol{i})" for i in range(1, drones + 1)
    )
    return f"<<{team}>> F ({alternatives})", "ir_approx"


def _bench_cell(map_graph, k, energy, args):
    """One (drones, energy) cell; returns the CSV fields after states."""
    t0 = time.perf_counter()
    cfg_model = DroneConfig(
        drones=k,
        energy=energy,
        strict_moves=not args.no_strict_moves,
        track_visited=not args.no_track_visited,
        state_cap=args.state_cap,
    )
    model = gen_drones(map_graph, cfg_model)
    tgen = time.perf_counter() - t0
    text, semantics = bench_formula(args.pattern, k, args.drone, args.loc)
    phi = parse(text, list(model.agents))
    if semantics == "perfect":
        cfg = CheckerConfig(semantics="perfect", algorithm="translate")
        t1 = time.perf_counter()
        value = gmcheck_tr(model, phi, cfg)[model.initial]
        tv = time.perf_counter() - t1
        return len(model.states), tgen, tv, tv, value
    cfg = CheckerConfig(semantics="ir_approx", algorithm="translate")
    t1 = time.perf_counter()
    result = gmcheck_tr(model, phi, cfg)
    tv = time.perf_counter() - t1
    lo = result.lower[model.initial]
    up = result.upper[model.initial]
    value = lo if lo == up else f"{lo}..{up}"
    # one approximation pass computes both bounds; split the cost evenly
    return len(model.states), tgen, tv / 2, tv / 2, value


def run_bench(args) -> int:
    map_graph = load_map(args.map)
    if args.pattern == "team-detect-at" and args.loc is None:
        raise MvatlError("team-detect-at needs --loc")
    drones = [int(x) for x in str(args.drones).split(",") if x.strip()]
    energies = [int(x) for x in str(args.energy).split(",") if x.strip()]
    rows = [BENCH_HEADER]
    for k in drones:
        for e in energies:
            try:
                if args.timeout:
                    cell = _with_timeout(
                        args.timeout, _bench_cell, (map_graph, k, e, args)
                    )
                    if cell is None:
                        rows.append(f"{k},{e},-,timeout,-,-,-")
                        continue
                else:
                    cell = _bench_cell(map_graph, k, e, args)
            except MvatlError as exc:
                rows.append(f"{k},{e},-,error,-,-,{type(exc).__name__}")
                continue
            states, tgen, tlo, tup, value = cell
            rows.append(
                f"{k},{e},{states},{tgen:.3f},{tlo:.3f},{tup:.3f},{value}"
            )
    text = "\n".join(rows) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- timeout helper -------------------------------------------------------------


def _timeout_worker(queue, fn, fn_args):
    try:
        queue.put(("ok", fn(*fn_args)))
    except BaseException as exc:  # surfaced in the parent
        queue.put(("err", exc))


def _with_timeout(seconds: float, fn, fn_args):
    """Run fn in a forked process; None on timeout, else its result."""
    ctx = multiprocessing.get_context("fork")
    queue = ctx.Queue()
    proc = ctx.Process(target=_timeout_worker, args=(queue, fn, fn_args))
    proc.start()
    proc.join(seconds)
    if proc.is_alive():
        proc.terminate()
        proc.join()
        return None
    status, payload = queue.get()
    if status == "err":
        raise payload
    return payload


if __name__ == "__main__":
    sys.exit(main())
