"""Command-line entry point: ``falqon generate | run | sweep | cost``.

Every command accepts ``--config FILE`` (a JSON object whose keys mirror the
long flag names, dashes or underscores) and explicit flags override it.
The default output directory is taken from ``$FALQON_OUT`` or ``falqon_out``.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
import warnings
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .experiments import (
    ExperimentError,
    aggregate_csv,
    aggregate_traces,
    cost_report,
    cubic_corpus,
    find_critical_dt,
    layers_to_threshold,
    prepare,
)
from .feedback import (
    FeedbackError,
    KickConfig,
    QlcPreconditionWarning,
    RunConfig,
    qlc_precondition,
    run_falqon,
    run_iterative_qlc,
    run_with_reference,
    write_trace,
)
from .graphs import Graph, GraphError, generate_regular, read_graph, write_graph
from .hamiltonians import HamiltonianError
from .simulator import SimulationError

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2
OUT_ENV = "FALQON_OUT"
MANIFEST = "manifest.json"

RUNTIME_ERRORS = (GraphError, FeedbackError, ExperimentError, HamiltonianError, SimulationError, OSError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# Built-in defaults per command. Flags are parsed with default=None so that
# "not given" can be told apart from "given the default value".
DEFAULTS: dict[str, dict[str, Any]] = {
    "generate": {"n": None, "d": 3, "count": 1, "all": False, "weighted": False, "seed": 0, "force": False, "out": None},
    "run": {
        "dt": 0.2, "layers": 10, "variant": "standard", "iters": 3, "estimator": "exact", "seed": 0,
        "beta_c": 1.0, "amp": 0.1, "final_shots": 1024, "measure_energy": False, "no_stop": False, "out": None,
    },
    "sweep": {
        "corpus": None, "layers": 500, "dt": None, "lo": 0.005, "hi": 0.3, "resolution": 5e-4,
        "workers": 1, "seed": 0, "count": 50, "out": None,
    },
    "cost": {"dt": 0.2, "layers": 10, "shots": 1024, "estimator": "exact", "seed": 0, "measure_energy": False, "out": None},
}


def _versions() -> dict[str, str]:
    return {"falqon": __version__, "numpy": np.__version__}


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _default_out() -> Path:
    return Path(os.environ.get(OUT_ENV, "falqon_out"))


def _load_config(path: str | None, command: str) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    # allow one file to hold several commands: {"run": {...}, "sweep": {...}}
    if command in data and isinstance(data[command], dict):
        data = data[command]
    known = DEFAULTS[command]
    out = {}
    for key, value in data.items():
        k = key.replace("-", "_")
        if k in DEFAULTS:
            continue
        if k not in known:
            raise UsageError(f"unknown config key {key!r} for {command}")
        out[k] = value
    return out


def _settings(args: argparse.Namespace) -> dict[str, Any]:
    merged = dict(DEFAULTS[args.command])
    merged.update(_load_config(args.config, args.command))
    for k in DEFAULTS[args.command]:
        v = getattr(args, k, None)
        if v is not None:
            merged[k] = v
    return merged


def _parse_estimator(text: str) -> tuple[str, int | None]:
    if text == "exact":
        return "exact", None
    m = re.fullmatch(r"shots:(\d+)", text)
    if not m:
        raise UsageError(f"estimator must be 'exact' or 'shots:<m>', got {text!r}")
    shots = int(m.group(1))
    if shots < 1:
        raise UsageError("shots:<m> needs m >= 1")
    return "shots", shots


def _prepare_out(path: Path, force: bool) -> None:
    if path.exists() and any(path.iterdir()) and not force:
        raise UsageError(f"output directory {path} is not empty (use --force)")
    path.mkdir(parents=True, exist_ok=True)


# --- generate --------------------------------------------------------------

def cmd_generate(s: dict[str, Any]) -> int:
    if s["n"] is None:
        raise UsageError("--n is required")
    tag = f"reg{s['d']}_n{s['n']}{'_w' if s['weighted'] else ''}"
    out = Path(s["out"]) if s["out"] else _default_out() / tag
    count = None if s["all"] else int(s["count"])
    graphs = generate_regular(int(s["n"]), int(s["d"]), seed=int(s["seed"]), count=count, weighted=bool(s["weighted"]))
    _prepare_out(out, bool(s["force"]))
    files = []
    for g in graphs:
        fname = f"{g.name}.json"
        write_graph(g, out / fname)
        files.append(fname)
    manifest = {
        "kind": "corpus",
        "n": int(s["n"]),
        "d": int(s["d"]),
        "count": count,
        "exhaustive": count is None,
        "weighted": bool(s["weighted"]),
        "seed": int(s["seed"]),
        "instances": files,
        "versions": _versions(),
    }
    (out / MANIFEST).write_text(_dump(manifest))
    print(f"wrote {len(files)} instances to {out}")
    return EXIT_OK


# --- run -------------------------------------------------------------------

def _run_config(s: dict[str, Any], variant: str) -> RunConfig:
    estimator, shots = _parse_estimator(s["estimator"])
    return RunConfig(
        dt=float(s["dt"]),
        max_layers=int(s["layers"]),
        estimator=estimator,
        shots=shots if shots is not None else 1024,
        seed=int(s["seed"]),
        variant=variant,
        kick=KickConfig(beta_c=float(s["beta_c"]), amp=float(s["amp"])),
        stop_eps=None if s["no_stop"] else 1e-6,
        measure_energy=bool(s["measure_energy"]),
        final_shots=int(s["final_shots"]),
    )


def cmd_run(s: dict[str, Any], instance: str, config_path: str | None) -> int:
    g = read_graph(instance)
    inst = prepare(g)
    variant = s["variant"]
    if variant not in ("standard", "kicks", "reference", "iterative"):
        raise UsageError(f"unknown variant {variant!r}")
    out = Path(s["out"]) if s["out"] else _default_out()
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "config_path": config_path,
        "instance_file": str(instance),
        "master_seed": int(s["seed"]),
        "variant": variant,
        "output_dir": str(out),
        "versions": _versions(),
    }
    stem = out / f"{g.name}_{variant}"
    if variant == "iterative":
        cfg = _run_config(s, "standard")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", QlcPreconditionWarning)
            runs = run_iterative_qlc(inst.hp, inst.comm, inst.ground, cfg, iterations=int(s["iters"]))
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        ok = qlc_precondition(runs)
        for i, run in enumerate(runs):
            extra = {"manifest": manifest, "iteration": i, "precondition_holds": ok[i]}
            csv_path, _ = write_trace(run, f"{stem}_iter{i}", g.name, extra)
            print(f"iteration {i}: final energy {run.final_energy:.10g} -> {csv_path}")
        return EXIT_OK
    cfg = _run_config(s, variant)
    if variant == "reference":
        run = run_with_reference(inst.hp, inst.comm, inst.ground, cfg)
    else:
        run = run_falqon(inst.hp, inst.comm, inst.ground, cfg)
    csv_path, _ = write_trace(run, stem, g.name, {"manifest": manifest})
    print(f"{run.layers} layers, final energy {run.final_energy:.10g} -> {csv_path}")
    return EXIT_OK


# --- sweep -----------------------------------------------------------------

def load_corpus(text: str, seed: int = 0, count: int = 50) -> tuple[str, list[Graph]]:
    """Resolve a corpus given as a directory, a manifest file or the shorthand ``n<N>``."""
    p = Path(text)
    if p.is_file():
        data = json.loads(p.read_text())
        if not isinstance(data, dict) or "instances" not in data:
            raise GraphError(f"{p} is not a corpus manifest")
        return p.parent.name, [read_graph(p.parent / f) for f in data["instances"]]
    if p.is_dir():
        if (p / MANIFEST).is_file():
            return load_corpus(str(p / MANIFEST))
        files = sorted(f for f in p.glob("*.json") if f.name != MANIFEST)
        if not files:
            raise GraphError(f"no instance files in {p}")
        return p.name, [read_graph(f) for f in files]
    m = re.fullmatch(r"n(\d+)", text)
    if m:
        return text, cubic_corpus(int(m.group(1)), seed=seed, count=count)
    raise UsageError(f"corpus {text!r} is neither a path nor of the form n<N>")


def cmd_sweep(s: dict[str, Any], kind: str) -> int:
    if s["corpus"] is None:
        raise UsageError("--corpus is required")
    name, graphs = load_corpus(s["corpus"], int(s["seed"]), int(s["count"]))
    out = Path(s["out"]) if s["out"] else _default_out()
    out.mkdir(parents=True, exist_ok=True)
    meta = {"corpus": s["corpus"], "instances": [g.name for g in graphs], "versions": _versions()}
    if kind == "dtc":
        rep = find_critical_dt(graphs, int(s["layers"]), float(s["lo"]), float(s["hi"]), float(s["resolution"]))
        path = out / f"dtc_{name}.json"
        path.write_text(_dump({**rep.to_dict(), **meta}))
        status = "unbounded" if rep.unbounded else "failed at lo" if rep.failed_at_lo else f"{rep.dt_c:.6g}"
        print(f"dt_c = {status} -> {path}")
        return EXIT_OK
    if s["dt"] is None:
        raise UsageError("sweep thresholds needs --dt")
    rep, runs = layers_to_threshold(graphs, float(s["dt"]), int(s["layers"]), int(s["workers"]), keep_runs=True)
    path = out / f"thresholds_{name}.json"
    path.write_text(_dump({**rep.to_dict(), **meta}))
    by_n: dict[int, list] = {}
    usable = [g for g in graphs if g.name not in rep.rejected]
    for g, run in zip(usable, runs):
        by_n.setdefault(g.n, []).append(run)
    if by_n:
        (out / f"thresholds_{name}.csv").write_text(aggregate_csv({n: aggregate_traces(r) for n, r in by_n.items()}))
    for inst, reason in rep.rejected.items():
        print(f"warning: rejected {inst}: {reason}", file=sys.stderr)
    print(f"mean layers to r_A {rep.mean_rA:.4g}, to phi {rep.mean_phi:.4g}, warnings {rep.warnings} -> {path}")
    return EXIT_OK


# --- cost ------------------------------------------------------------------

def cmd_cost(s: dict[str, Any], instance: str) -> int:
    g = read_graph(instance)
    inst = prepare(g)
    estimator, shots = _parse_estimator(s["estimator"])
    cfg = RunConfig(
        dt=float(s["dt"]),
        max_layers=int(s["layers"]),
        estimator=estimator,
        shots=shots if shots is not None else int(s["shots"]),
        seed=int(s["seed"]),
        stop_eps=None,
        measure_energy=bool(s["measure_energy"]),
        final_shots=0,
    )
    rep = cost_report(run_falqon(inst.hp, inst.comm, inst.ground, cfg), g)
    out = Path(s["out"]) if s["out"] else _default_out()
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"cost_{g.name}.json"
    path.write_text(_dump(rep))
    print(f"N_s = {rep['N_s']} ({rep['strings_per_layer']} strings x {rep['m']} shots x {rep['layers_executed']} layers) -> {path}")
    return EXIT_OK


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="falqon", description="Feedback-based quantum optimization for MaxCut.")
    p.add_argument("--version", action="version", version=f"falqon {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="JSON file of flag values; explicit flags win")
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./falqon_out)")

    g = sub.add_parser("generate", help="write a corpus of random regular graphs")
    common(g)
    g.add_argument("--n", type=int)
    g.add_argument("--d", type=int)
    g.add_argument("--count", type=int)
    g.add_argument("--all", action="store_true", default=None, help="every nonisomorphic connected graph")
    g.add_argument("--weighted", action="store_true", default=None)
    g.add_argument("--seed", type=int)
    g.add_argument("--force", action="store_true", default=None)

    r = sub.add_parser("run", help="run feedback optimization on one instance")
    common(r)
    r.add_argument("instance")
    r.add_argument("--dt", type=float)
    r.add_argument("--layers", type=int)
    r.add_argument("--variant", choices=["standard", "kicks", "reference", "iterative"])
    r.add_argument("--iters", type=int, help="passes for the iterative variant")
    r.add_argument("--estimator", help="exact or shots:<m>")
    r.add_argument("--seed", type=int)
    r.add_argument("--beta-c", dest="beta_c", type=float)
    r.add_argument("--amp", type=float)
    r.add_argument("--final-shots", dest="final_shots", type=int)
    r.add_argument("--measure-energy", dest="measure_energy", action="store_true", default=None)
    r.add_argument("--no-stop", dest="no_stop", action="store_true", default=None, help="disable early stopping")

    sw = sub.add_parser("sweep", help="corpus experiments")
    common(sw)
    sw.add_argument("kind", choices=["dtc", "thresholds"])
    sw.add_argument("--corpus", help="directory, manifest file, or n<N> for the built-in cubic corpus")
    sw.add_argument("--layers", type=int)
    sw.add_argument("--dt", type=float)
    sw.add_argument("--lo", type=float)
    sw.add_argument("--hi", type=float)
    sw.add_argument("--resolution", type=float)
    sw.add_argument("--workers", type=int)
    sw.add_argument("--seed", type=int)
    sw.add_argument("--count", type=int, help="random instances for n<N> with N > 10")

    c = sub.add_parser("cost", help="sampling-cost ledger for one instance")
    common(c)
    c.add_argument("instance")
    c.add_argument("--dt", type=float)
    c.add_argument("--layers", type=int)
    c.add_argument("--shots", type=int)
    c.add_argument("--estimator")
    c.add_argument("--seed", type=int)
    c.add_argument("--measure-energy", dest="measure_energy", action="store_true", default=None)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        s = _settings(args)
        if args.command == "generate":
            return cmd_generate(s)
        if args.command == "run":
            return cmd_run(s, args.instance, args.config)
        if args.command == "sweep":
            return cmd_sweep(s, args.kind)
        return cmd_cost(s, args.instance)
    except UsageError as exc:
        print(f"falqon: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RUNTIME_ERRORS as exc:
        print(f"falqon: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
