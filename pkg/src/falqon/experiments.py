"""Experiment drivers: critical time step, layers-to-threshold, trace aggregation,
QAOA-circuit evaluation and sampling-cost reports."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .feedback import FeedbackRun, RunConfig, run_falqon
from .graphs import Graph, GroundStateSet, brute_force_maxcut, enumerate_regular, generate_regular
from .hamiltonians import CommutatorObservable, ProblemHamiltonian, build
from .simulator import StateVector, apply_mixer, apply_problem_phase, expect_hp, init_mixer_ground

R_A_REFERENCE = 0.932
PHI_REFERENCE = 0.25
MONOTONE_TOL = 1e-12
CROSSING_ATOL = 1e-12
RANDOM_CORPUS_SIZE = 50


class ExperimentError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Instance:
    graph: Graph
    hp: ProblemHamiltonian
    comm: CommutatorObservable
    ground: GroundStateSet

    @property
    def name(self) -> str:
        return self.graph.name


def prepare(g: Graph) -> Instance:
    hp, comm = build(g)
    return Instance(g, hp, comm, brute_force_maxcut(g))


def _prepared(items: Iterable[Graph | Instance]) -> list[Instance]:
    return [x if isinstance(x, Instance) else prepare(x) for x in items]


def cubic_corpus(n: int, seed: int = 0, count: int = RANDOM_CORPUS_SIZE) -> list[Graph]:
    """All connected cubic graphs for n <= 10, otherwise ``count`` random nonisomorphic ones."""
    if n <= 10:
        return generate_regular(n, 3, seed=seed, count=None)
    return generate_regular(n, 3, seed=seed, count=count)


def _map(fn: Callable, items: Sequence, workers: int = 1) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _exact_cfg(dt: float, ell: int) -> RunConfig:
    return RunConfig(dt=dt, max_layers=ell, stop_eps=None, final_shots=0, monotone_tol=MONOTONE_TOL)


# --- critical time step ----------------------------------------------------

@dataclass
class CriticalDtReport:
    n: int | None
    dt_c: float | None
    ell: int
    lo: float
    hi: float
    resolution: float
    unbounded: bool = False
    failed_at_lo: bool = False
    trace: list[tuple[float, bool]] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["trace"] = [[dt, ok] for dt, ok in self.trace]
        return d


def monotone_at(instances: Sequence[Instance], dt: float, ell: int) -> bool:
    """True if no instance increases <H_p> by more than 1e-12 in any of ``ell`` layers."""
    cfg = _exact_cfg(dt, ell)
    return all(not run_falqon(x.hp, x.comm, x.ground, cfg).monotone_violations for x in instances)


def find_critical_dt(
    instances: Iterable[Graph | Instance],
    ell: int,
    lo: float = 0.005,
    hi: float = 0.3,
    resolution: float = 5e-4,
) -> CriticalDtReport:
    """Largest dt on the grid lo + k * resolution at which every instance descends monotonically.

    Bisection assumes the predicate flips once on [lo, hi]. At the returned
    dt_c the predicate holds and at dt_c + resolution it fails, unless the
    report is flagged unbounded (passes at hi) or failed_at_lo.
    """
    if not lo < hi:
        raise ExperimentError("need lo < hi")
    if not resolution > 0:
        raise ExperimentError("resolution must be positive")
    insts = _prepared(instances)
    ns = {x.graph.n for x in insts}
    rep = CriticalDtReport(ns.pop() if len(ns) == 1 else None, None, ell, lo, hi, resolution)
    steps = int(math.ceil((hi - lo) / resolution - 1e-9))
    grid = lambda k: lo + k * resolution if k < steps else hi  # noqa: E731

    def check(k: int) -> bool:
        dt = grid(k)
        ok = monotone_at(insts, dt, ell)
        rep.trace.append((dt, ok))
        return ok

    if not check(0):
        rep.failed_at_lo = True
        return rep
    if check(steps):
        rep.dt_c = hi
        rep.unbounded = True
        return rep
    good, bad = 0, steps
    while bad - good > 1:
        mid = (good + bad) // 2
        if check(mid):
            good = mid
        else:
            bad = mid
    rep.dt_c = grid(good)
    return rep


# --- layers to threshold ---------------------------------------------------

@dataclass
class ThresholdReport:
    n: int | None
    dt: float
    ell_max: int
    names: list[str]
    layers_to_rA: list[int]
    layers_to_phi: list[int]
    censored_rA: list[bool]
    censored_phi: list[bool]
    rejected: dict[str, str] = field(default_factory=dict)
    r_A_reference: float = R_A_REFERENCE
    phi_reference: float = PHI_REFERENCE

    @property
    def mean_rA(self) -> float:
        return float(np.mean(self.layers_to_rA)) if self.layers_to_rA else math.nan

    @property
    def std_rA(self) -> float:
        return float(np.std(self.layers_to_rA)) if self.layers_to_rA else math.nan

    @property
    def mean_phi(self) -> float:
        return float(np.mean(self.layers_to_phi)) if self.layers_to_phi else math.nan

    @property
    def std_phi(self) -> float:
        return float(np.std(self.layers_to_phi)) if self.layers_to_phi else math.nan

    @property
    def warnings(self) -> int:
        return len(self.rejected)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(mean_rA=self.mean_rA, std_rA=self.std_rA, mean_phi=self.mean_phi,
                 std_phi=self.std_phi, warnings=self.warnings)
        return d


def first_crossing(values: np.ndarray, threshold: float, atol: float = CROSSING_ATOL) -> int | None:
    """Index of the first value >= threshold - atol; the slack absorbs round-off at exact ties."""
    hits = np.flatnonzero(np.asarray(values) >= threshold - atol)
    return int(hits[0]) if hits.size else None


def _threshold_job(args) -> FeedbackRun:
    inst, dt, ell = args
    return run_falqon(inst.hp, inst.comm, inst.ground, _exact_cfg(dt, ell))


def layers_to_threshold(
    corpus: Iterable[Graph | Instance],
    dt: float,
    ell_max: int,
    workers: int = 1,
    keep_runs: bool = False,
) -> ThresholdReport | tuple[ThresholdReport, list[FeedbackRun]]:
    """First layer at which r_A >= 0.932 and phi >= 0.25, per instance.

    Layer 0 is the initial state. Instances that never cross within
    ``ell_max`` layers are recorded as ell_max + 1 and flagged censored.
    Edgeless graphs have no defined r_A and are rejected.
    """
    insts = _prepared(corpus)
    rejected = {}
    usable = []
    for x in insts:
        if x.ground.min_energy == 0:
            rejected[x.name] = "min_energy is 0: approximation ratio undefined"
        else:
            usable.append(x)
    runs = _map(_threshold_job, [(x, dt, ell_max) for x in usable], workers)
    ns = {x.graph.n for x in insts}
    rep = ThresholdReport(ns.pop() if len(ns) == 1 else None, dt, ell_max, [], [], [], [], [], rejected)
    for x, run in zip(usable, runs):
        ra = first_crossing(run.r_A, R_A_REFERENCE)
        ph = first_crossing(run.phi, PHI_REFERENCE)
        rep.names.append(x.name)
        rep.layers_to_rA.append(ell_max + 1 if ra is None else ra)
        rep.layers_to_phi.append(ell_max + 1 if ph is None else ph)
        rep.censored_rA.append(ra is None)
        rep.censored_phi.append(ph is None)
    return (rep, runs) if keep_runs else rep


def aggregate_traces(runs: Sequence[FeedbackRun]) -> dict[str, np.ndarray]:
    """Per-layer mean/std of beta and mean r_A, phi across runs.

    Shorter runs are padded with their final values.
    """
    if not runs:
        raise ExperimentError("no runs to aggregate")
    length = max(len(r.beta) for r in runs)

    def stack(attr: str) -> np.ndarray:
        rows = []
        for r in runs:
            v = getattr(r, attr)
            rows.append(np.concatenate([v, np.full(length - len(v), v[-1])]))
        return np.vstack(rows)

    beta = stack("beta")
    return {
        "layer": np.arange(length),
        "mean_beta": beta.mean(axis=0),
        "std_beta": beta.std(axis=0),
        "mean_rA": stack("r_A").mean(axis=0),
        "mean_phi": stack("phi").mean(axis=0),
    }


def aggregate_csv(agg_by_n: dict[int, dict[str, np.ndarray]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "layer", "mean_beta", "std_beta", "mean_rA", "mean_phi"])
    for n in sorted(agg_by_n):
        a = agg_by_n[n]
        for k in range(len(a["layer"])):
            w.writerow([n, int(a["layer"][k])] + [repr(float(a[c][k])) for c in ("mean_beta", "std_beta", "mean_rA", "mean_phi")])
    return buf.getvalue()


def growth_exponent(ns: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(values) against log(ns)."""
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])


# --- QAOA circuit evaluation -----------------------------------------------

@dataclass(frozen=True)
class QaoaParameters:
    """Angles for U_d(beta_l) U_p(gamma_l) ... U_d(beta_1) U_p(gamma_1).

    U_p(gamma) = exp(-i gamma H_p) and U_d(beta) = exp(-i beta H_d).
    """

    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        if len(self.gammas) != len(self.betas):
            raise ExperimentError(f"{len(self.gammas)} gammas but {len(self.betas)} betas")

    @property
    def depth(self) -> int:
        return len(self.gammas)

    @classmethod
    def from_falqon(cls, run: FeedbackRun) -> "QaoaParameters":
        """The circuit a feedback run executed: gamma_k = dt, beta_k = (lambda_k + beta_k) dt."""
        dt = run.config.dt
        return cls(tuple([dt] * run.layers), tuple(float((b + l) * dt) for b, l in zip(run.beta[1:], run.lam[1:])))


def evaluate_qaoa(hp: ProblemHamiltonian, params: QaoaParameters, psi0: StateVector | None = None) -> float:
    psi = init_mixer_ground(hp.n) if psi0 is None else psi0.copy()
    for g, b in zip(params.gammas, params.betas):
        psi.amps *= np.exp(-1j * g * hp.diag)
        apply_mixer(psi, b, inplace=True)
    return expect_hp(psi, hp)


# --- sampling cost ---------------------------------------------------------

def cost_report(run: FeedbackRun, graph: Graph) -> dict:
    """Sample accounting for a run, with the identity N_s = m (2|E|) l (+ energy samples)."""
    m = run.cost.shots_per_string
    ell = run.cost.layers
    strings = 2 * graph.num_edges
    predicted = m * strings * ell + run.cost.energy_samples
    return {
        "instance": graph.name,
        "n": graph.n,
        "d": graph.regular_degree(),
        "edges": graph.num_edges,
        "m": m,
        "layers_executed": ell,
        "strings_per_layer": strings,
        "string_bound_n(n-1)": graph.n * (graph.n - 1),
        "commutator_samples": run.cost.commutator_samples,
        "energy_samples": run.cost.energy_samples,
        "N_s": run.cost.total_samples,
        "N_s_predicted": predicted,
        "identity_holds": predicted == run.cost.total_samples,
        "scaling": {
            "falqon": "O(m d l)",
            "qaoa_gradient": "O(m q(l) l)",
            "qaoa_gradient_free": "O(m q(l))",
            "note": "q(l), the number of classical optimisation iterations, is not evaluated",
        },
    }
