"""Heuristic comparison on a weighted 4-regular graph with 8 vertices at dt = 0.08.

Runs standard feedback, random kicks, the alpha reference perturbation, and
three passes of iterative QLC, writing one trace per run.
"""
import argparse
import warnings
from pathlib import Path

from falqon.experiments import prepare
from falqon.feedback import (
    QlcPreconditionWarning,
    RunConfig,
    qlc_precondition,
    run_falqon,
    run_iterative_qlc,
    run_with_reference,
    write_trace,
)
from falqon.graphs import generate_regular, write_graph


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--layers", type=int, default=1000)
    ap.add_argument("--dt", type=float, default=0.08)
    ap.add_argument("--graph-seed", type=int, default=7)
    ap.add_argument("--seed", type=int, default=0, help="seed for the kick draws")
    ap.add_argument("--iters", type=int, default=3)
    ap.add_argument("--out", default="results/heuristics")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (g,) = generate_regular(8, 4, seed=args.graph_seed, count=1, weighted=True)
    write_graph(g, out / f"{g.name}.json")
    x = prepare(g)
    base = RunConfig(dt=args.dt, max_layers=args.layers, stop_eps=None, seed=args.seed)

    runs = {
        "standard": run_falqon(x.hp, x.comm, x.ground, base),
        "kicks": run_falqon(x.hp, x.comm, x.ground, RunConfig(**{**vars(base), "variant": "kicks"})),
        "reference": run_with_reference(x.hp, x.comm, x.ground, base),
    }
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", QlcPreconditionWarning)
        qlc = run_iterative_qlc(x.hp, x.comm, x.ground, base, iterations=args.iters)
    for i, run in enumerate(qlc):
        runs[f"qlc_iter{i}"] = run
    holds = qlc_precondition(qlc)

    for name, run in runs.items():
        extra = {"precondition_holds": holds[int(name[-1])]} if name.startswith("qlc") else None
        write_trace(run, out / name, g.name, extra)
        print(f"{name:10s} final r_A {run.r_A[-1]:.5f}  phi {run.phi[-1]:.4f}  |beta_l| {abs(run.beta[-1]):.1e}")


if __name__ == "__main__":
    main()
