"""Ideal-curve trace for the three-vertex path: dt = 0.2, ten layers, exact estimator.

Writes a trace CSV and metadata JSON; optionally also a shot-noise run.
"""
import argparse
from pathlib import Path

from falqon.experiments import cost_report, prepare
from falqon.feedback import RunConfig, run_falqon, write_trace
from falqon.graphs import Graph


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/path_trace")
    ap.add_argument("--shots", type=int, default=0, help="also run with the shot estimator at this m")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    g = Graph.from_pairs(3, [(0, 1), (1, 2)], name="path3")
    x = prepare(g)

    run = run_falqon(x.hp, x.comm, x.ground, RunConfig(dt=0.2, max_layers=10))
    write_trace(run, out / "path3_exact", g.name, {"cost": cost_report(run, g)})
    print("layer  energy      phi     beta")
    for k in range(run.layers + 1):
        print(f"{k:5d}  {run.energy[k]: .6f}  {run.phi[k]:.4f}  {run.beta[k]: .4f}")

    if args.shots:
        cfg = RunConfig(dt=0.2, max_layers=10, estimator="shots", shots=args.shots, seed=args.seed)
        noisy = run_falqon(x.hp, x.comm, x.ground, cfg)
        write_trace(noisy, out / "path3_shots", g.name)
        print(f"shot run: final energy {noisy.final_energy:.6f}, N_s = {noisy.cost.total_samples}")


if __name__ == "__main__":
    main()
