"""``treeplication`` command-line entry point.

Exit codes: 0 success, 1 usage or IO error, 2 domain error (non-decodable
subset, infeasible budget, bad codeword header, ...).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import reports
from .augmentation import augment_replicate, augment_sibling, survival_after_losses
from .codec import Codeword, decode_codeword, encode_bytes
from .combinatorics import replication_decode_prob, uniform_decode_prob
from .cost import cost_tables
from .errors import InvalidInput, NonDecodable, TreeplicationError
from .health import cover_survival_prob, principal_cover
from .nonuniform import SelectionDistribution, decode_prob_Q
from .optimizer import SCHEMES, min_n_for_target, optimal_distribution
from .recovery import plan_recovery
from .simulator import (
    BirthDeathConfig,
    SamplingModel,
    birth_death_many,
    mc_comm_cost,
    mc_decodability,
    mc_mds_cost,
)
from .tree import Multiset, TreeShape, VertexId


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# argument parsing helpers
# ---------------------------------------------------------------------------


def _shape_for_k(k: int) -> TreeShape:
    try:
        return TreeShape.from_k(k)
    except (InvalidInput, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _load_json(text: str):
    """Inline JSON, or ``@path`` / an existing file path holding JSON."""
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    elif not text.lstrip().startswith(("[", "{")) and Path(text).is_file():
        text = Path(text).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid JSON: {exc}") from exc


def parse_vertex(text) -> VertexId:
    """``"2,1"``, ``"2:1"`` or a two-element list."""
    if isinstance(text, str):
        parts = text.replace(":", ",").split(",")
    else:
        parts = list(text)
    if len(parts) != 2:
        raise UsageError(f"vertex must be layer,index: {text!r}")
    try:
        return VertexId(int(parts[0]), int(parts[1]))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"vertex must be layer,index: {text!r}") from exc


def parse_subset(text: str) -> list[VertexId]:
    """JSON list of [layer, index] pairs, or ``"1,1 1,2 2,1"`` style tokens."""
    stripped = text.strip()
    if stripped.startswith("[") or stripped.startswith("@") or Path(stripped).is_file():
        return [parse_vertex(v) for v in _load_json(stripped)]
    return [parse_vertex(tok) for tok in stripped.replace(";", " ").split()]


def parse_multiset(text: str) -> Multiset:
    """Weights as a JSON list of layers, leaf layer first.

    ``{"k": 4, "weights": {"1,1": 2, ...}}`` is also accepted.
    """
    data = _load_json(text)
    if isinstance(data, dict):
        if "layers" in data:
            data = data["layers"]
        else:
            try:
                shape = TreeShape.from_k(int(data["k"]))
                counts = {parse_vertex(v): int(w) for v, w in data["weights"].items()}
            except (KeyError, TypeError) as exc:
                raise UsageError("multiset object needs 'k' and 'weights'") from exc
            return Multiset.from_counts(shape, counts)
    if not isinstance(data, list) or not data:
        raise UsageError("multiset must be a non-empty list of layer weight lists")
    return Multiset.from_layers(TreeShape(len(data)), data)


def parse_counts(text: str) -> list[int]:
    data = _load_json(text)
    if isinstance(data, dict):
        data = data.get("counts", data.get("n"))
    if not isinstance(data, list):
        raise UsageError("distribution must be a JSON list of per-layer counts")
    return [int(c) for c in data]


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    fields: list[str] = []
    for row in rows:
        fields += [f for f in row if f not in fields]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\r\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _emit(args, payload: dict, rows: list[dict] | None = None) -> None:
    if args.format == "csv":
        if rows is None:
            raise UsageError(f"{args.command} has no tabular output; use --format json")
        text = _to_csv(rows)
    else:
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, newline="")
    else:
        sys.stdout.write(text)


def _config(args, **extra) -> dict:
    out = {"command": args.command}
    if args.seed is not None:
        out["seed"] = args.seed
    if args.trials is not None:
        out["trials"] = args.trials
    out.update(extra)
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_encode(args) -> None:
    shape = _shape_for_k(args.k)
    payload = Path(args.input).read_bytes()
    word = encode_bytes(payload, shape)
    if not args.out:
        raise UsageError("encode needs --out for the codeword file")
    Path(args.out).write_bytes(word.to_bytes())
    info = {"config": _config(args, k=args.k, input=args.input), "bytes": len(payload),
            "fragment_len": word.fragment_len, "fragments": shape.total_vertices}
    sys.stdout.write(json.dumps(info, sort_keys=True) + "\n")


def cmd_decode(args) -> None:
    word = Codeword.from_bytes(Path(args.input).read_bytes())
    subset = parse_subset(args.manifest) if args.manifest else None
    data = decode_codeword(word, subset)
    chains = 0
    if subset is not None:
        chains = len(plan_recovery(subset, word.shape).assignments)
    if not args.out:
        raise UsageError("decode needs --out for the recovered data")
    Path(args.out).write_bytes(data)
    info = {"config": _config(args, input=args.input, manifest=args.manifest),
            "bytes": len(data), "xor_chains": chains}
    sys.stdout.write(json.dumps(info, sort_keys=True) + "\n")


def cmd_optimize(args) -> None:
    shape = _shape_for_k(args.k)
    result = optimal_distribution(shape.d, args.n)
    payload = result.to_dict()
    payload["probs"] = list(result.best.probs)
    payload["config"] = _config(args, k=args.k, n=args.n)
    _emit(args, payload, [{"k": args.k, "n": args.n, "counts": " ".join(map(str, result.best.counts)),
                           "q": result.q_star, "explored": result.explored}])


def cmd_analyze(args) -> None:
    shape = _shape_for_k(args.k)
    d, k = shape.d, shape.k
    payload: dict = {"config": _config(args, k=k, n=args.n, target=args.target)}
    rows = []
    if args.n is not None:
        best = optimal_distribution(d, args.n) if args.n >= k else None
        payload["probability"] = {
            "replication": replication_decode_prob(k, args.n),
            "uniform": uniform_decode_prob(d, args.n),
            "nonuniform": best.q_star if best else 0.0,
        }
        if best:
            payload["counts"] = list(best.best.counts)
        rows += [{"k": k, "n": args.n, "scheme": s, "probability": p}
                 for s, p in payload["probability"].items()]
    if args.target is not None:
        payload["min_n"] = {s: min_n_for_target(d, args.target, s) for s in SCHEMES}
        rows += [{"k": k, "target": args.target, "scheme": s, "min_n": v}
                 for s, v in payload["min_n"].items()]
    if args.n is None and args.target is None:
        raise UsageError("analyze needs --n and/or --target")
    _emit(args, payload, rows)


def cmd_plan(args) -> None:
    shape = _shape_for_k(args.k)
    subset = parse_subset(args.subset)
    try:
        schedule = plan_recovery(subset, shape)
    except NonDecodable:
        _emit(args, {"error": "non-decodable", "config": _config(args, k=args.k)})
        raise
    payload = schedule.to_dict()
    payload["config"] = _config(args, k=args.k, subset=[list(v) for v in subset])
    rows = [{"from": f"{s.layer},{s.index}", "to": f"{t.layer},{t.index}"}
            for s, t in schedule.transfers]
    _emit(args, payload, rows)


def cmd_cost(args) -> None:
    shape = _shape_for_k(args.k)
    if args.probs:
        p = [float(x) for x in _load_json(args.probs)]
        source = {"probs": p}
    elif args.dist:
        dist = SelectionDistribution(tuple(parse_counts(args.dist)))
        p = list(dist.probs)
        source = {"dist": list(dist.counts)}
    else:
        dist = optimal_distribution(shape.d, 3 * shape.k).best
        p = list(dist.probs)
        source = {"dist": list(dist.counts), "default": "optimal at n = 3k"}
    if len(p) != shape.d:
        raise UsageError(f"k={shape.k} needs {shape.d} layer values, got {len(p)}")
    tables = cost_tables(p)
    C = tables.cost_distribution()
    payload = {
        "E": tables.expected_cost(),
        "Q": decode_prob_Q(p),
        "C": [{"N": n, "prob": float(c)} for n, c in enumerate(C)],
        "config": _config(args, **{"k": shape.k, "probs": p, **source}),
    }
    _emit(args, payload, payload["C"])


def cmd_health(args) -> None:
    multiset = parse_multiset(args.multiset)
    cover = principal_cover(multiset)
    payload = cover.to_dict()
    payload["health"] = cover_survival_prob(cover, multiset.n, args.l)
    payload["n"] = multiset.n
    if args.exact_survival:
        est = survival_after_losses(multiset, args.l, seed=args.seed or 0)
        payload["survival"] = {"prob": est.prob, "stderr": est.stderr, "exact": est.exact}
    payload["config"] = _config(args, l=args.l, weights=multiset.to_layers())
    rows = [{"diagonal": j + 1, "weight": w,
             "vertices": " ".join(f"{v.layer},{v.index}" for v in g.vertices)}
            for j, (g, w) in enumerate(zip(cover.diagonals, cover.weight_profile))]
    _emit(args, payload, rows)


def cmd_augment(args) -> None:
    multiset = parse_multiset(args.multiset)
    z = parse_vertex(args.z)
    decide = augment_sibling if args.scheme == "sibling" else augment_replicate
    decision = decide(multiset, z)
    payload = decision.to_dict()
    payload["result"] = decision.apply(multiset).to_layers()
    payload["config"] = _config(args, scheme=args.scheme, z=list(z), weights=multiset.to_layers())
    _emit(args, payload)


def _sampling_model(cfg: dict) -> SamplingModel:
    mode = cfg.get("mode", "layer-draw")
    if mode == "uniform-draw":
        return SamplingModel.uniform(_shape_for_k(int(cfg["k"])).d, int(cfg["n"]))
    if mode == "bernoulli":
        return SamplingModel.bernoulli([float(x) for x in cfg["probs"]])
    if mode == "layer-draw":
        if "counts" in cfg:
            return SamplingModel.layers([int(c) for c in cfg["counts"]])
        shape = _shape_for_k(int(cfg["k"]))
        n = int(cfg.get("n", 3 * shape.k))
        return SamplingModel.layers(optimal_distribution(shape.d, n).best.counts)
    raise UsageError(f"unknown sampling mode {mode!r}")


def cmd_simulate(args) -> None:
    cfg = _load_json(args.config) if args.config else {}
    if not isinstance(cfg, dict):
        raise UsageError("--config must be a JSON object")
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    trials = args.trials or int(cfg.get("trials", 10_000))
    exp = args.experiment
    if exp == "decodability":
        model = _sampling_model(cfg)
        stats = mc_decodability(model, trials, seed)
        resolved = model.to_dict()
    elif exp == "cost":
        model = _sampling_model(cfg)
        stats = mc_comm_cost(model, trials, seed, per_leaf=bool(cfg.get("per_leaf", False)))
        resolved = model.to_dict()
    elif exp == "mds":
        k, n = int(cfg["k"]), int(cfg.get("n", 3 * int(cfg["k"])))
        stats = mc_mds_cost(k, n, trials, seed)
        resolved = {"k": k, "n": n}
    else:
        initial = SelectionDistribution(tuple(cfg["counts"])) if "counts" in cfg else None
        config = BirthDeathConfig(
            k=int(cfg.get("k", 8)),
            code=cfg.get("code", "treeplication"),
            augmentation=cfg.get("augmentation", "sibling"),
            initial=initial,
            initial_n=cfg.get("n"),
            birth_prob=float(cfg.get("birth_prob", 0.5)),
            max_generations=int(cfg.get("max_generations", 100_000)),
            seed=seed,
        )
        stats = birth_death_many(config, trials)
        resolved = config.to_dict()
    payload = stats.to_dict()
    payload["config"] = _config(args, **{**resolved, "experiment": exp, "seed": seed, "trials": trials})
    if args.csv:
        rows = [{"trial": t, "outcome": o, "cost_or_generations": v} for t, o, v in stats.rows()]
        Path(args.csv).write_text(_to_csv(rows), newline="")
    _emit(args, payload, [{k: v for k, v in payload.items() if not isinstance(v, dict)}])


def cmd_report(args) -> None:
    result = reports.run_report(args.table, seed=args.seed, trials=args.trials)
    _emit(args, result, result["rows"])
    if args.strict and result["pass"] is False:
        raise SystemExit(2)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=default, help="RNG seed")
    p.add_argument("--trials", type=int, default=default, help="Monte-Carlo trials or runs")
    p.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS if suppress else "json")
    p.add_argument("--out", default=default, help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="treeplication", description="XOR-tree erasure code toolkit")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, fn, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        _add_globals(p, suppress=True)
        p.set_defaults(func=fn)
        return p

    p = add("encode", cmd_encode, "encode a file into a codeword file")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--input", required=True)

    p = add("decode", cmd_decode, "recover a file from a codeword file")
    p.add_argument("--input", required=True)
    p.add_argument("--manifest", help="available vertices (JSON pairs, file, or '1,1 2,1 ...')")

    p = add("optimize", cmd_optimize, "optimal per-layer draw counts")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)

    p = add("analyze", cmd_analyze, "decoding probabilities and minimal n")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--target", type=float)

    p = add("plan", cmd_plan, "minimal-communication recovery schedule")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--subset", required=True)

    p = add("cost", cmd_cost, "analytic recovery-cost distribution")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--dist", help="JSON list of per-layer counts, leaf layer first")
    p.add_argument("--probs", help="JSON list of per-layer inclusion probabilities")

    p = add("health", cmd_health, "principal diagonal cover and l-health")
    p.add_argument("--multiset", required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--exact-survival", action="store_true",
                   help="also report the true survival probability after l losses")

    p = add("augment", cmd_augment, "augmentation decision for a picked vertex")
    p.add_argument("--multiset", required=True)
    p.add_argument("--scheme", choices=("sibling", "replicate"), default="sibling")
    p.add_argument("--z", required=True)

    p = add("simulate", cmd_simulate, "Monte-Carlo experiments")
    p.add_argument("--experiment", choices=("decodability", "cost", "mds", "birthdeath"),
                   required=True)
    p.add_argument("--config", help="JSON object (inline or file)")
    p.add_argument("--csv", help="write per-trial rows here")

    p = add("report", cmd_report, "reproduce a reference table")
    p.add_argument("table", choices=reports.REPORTS)
    p.add_argument("--strict", action="store_true", help="exit 2 when any cell fails")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"treeplication {args.command}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        where = f"{exc.filename}: " if exc.filename else ""
        print(f"treeplication {args.command}: {where}{exc.strerror or exc}", file=sys.stderr)
        return 1
    except TreeplicationError as exc:
        print(f"treeplication {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
