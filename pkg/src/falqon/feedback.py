"""Measurement-feedback layer loop and its heuristic variants.

Layer k applies U_d(lambda_k + beta_k) U_p to the state, then the commutator
expectation A_k is measured (exactly or from shots) and fed back as
beta_{k+1} = -w f(A_k).
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .graphs import GroundStateSet, index_to_bits
from .hamiltonians import CommutatorObservable, ProblemHamiltonian
from .simulator import (
    StateVector,
    apply_mixer,
    apply_problem_phase,
    expect_commutator,
    expect_hp,
    expect_pauli,
    ground_probability,
    init_mixer_ground,
    sample_indices,
)

TRACE_SCHEMA = 1
TRACE_COLUMNS = ("layer", "beta", "A", "energy", "r_A", "phi", "cumulative_samples")
VARIANTS = ("standard", "kicks", "reference", "iterative")


class FeedbackError(ValueError):
    pass


class QlcPreconditionWarning(UserWarning):
    """An iterative-QLC pass ended with beta_l not close to zero."""


@dataclass(frozen=True)
class FeedbackLaw:
    """beta = -gain * shape(k, A).

    ``shape`` must satisfy shape(k, 0) = 0 and A * shape(k, A) > 0 for A != 0;
    ``None`` means the identity shape.
    """

    gain: float = 1.0
    shape: Callable[[int, float], float] | None = None

    def __post_init__(self):
        if not self.gain > 0:
            raise FeedbackError(f"feedback gain must be positive, got {self.gain}")

    def __call__(self, k: int, a: float) -> float:
        f = a if self.shape is None else self.shape(k, a)
        return -self.gain * f


@dataclass(frozen=True)
class KickConfig:
    beta_c: float = 1.0
    amp: float = 0.1


@dataclass
class RunConfig:
    dt: float = 0.2
    max_layers: int = 10
    estimator: str = "exact"
    shots: int = 1024
    seed: int | None = 0
    variant: str = "standard"
    kick: KickConfig = field(default_factory=KickConfig)
    reference: Sequence[float] | None = None
    iterations: int = 1
    beta_1: float = 0.0
    stop_eps: float | None = 1e-6
    patience: int = 5
    law: FeedbackLaw = field(default_factory=FeedbackLaw)
    measure_energy: bool = False
    final_shots: int = 1024
    monotone_tol: float = 1e-12

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.dt > 0:
            raise FeedbackError(f"dt must be positive, got {self.dt}")
        if self.max_layers < 1:
            raise FeedbackError("max_layers must be >= 1")
        if self.estimator not in ("exact", "shots"):
            raise FeedbackError(f"unknown estimator {self.estimator!r}")
        if self.estimator == "shots" and self.shots < 1:
            raise FeedbackError("shot estimator needs shots >= 1")
        if self.variant not in VARIANTS:
            raise FeedbackError(f"unknown variant {self.variant!r}")
        if self.iterations < 1:
            raise FeedbackError("iterations must be >= 1")

    @property
    def tau(self) -> float:
        """Feedback delay: one U_p interval plus one U_d interval."""
        return 2.0 * self.dt

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("law")
        d["gain"] = self.law.gain
        d["reference"] = None if self.reference is None else [float(x) for x in self.reference]
        d["tau"] = self.tau
        return d


@dataclass
class CostLedger:
    shots_per_string: int
    per_layer_strings: int
    layers: int = 0
    commutator_samples: int = 0
    energy_samples: int = 0

    @property
    def total_samples(self) -> int:
        return self.commutator_samples + self.energy_samples

    def charge_layer(self, strings: int, energy: bool) -> None:
        self.layers += 1
        self.commutator_samples += strings * self.shots_per_string
        if energy:
            self.energy_samples += self.shots_per_string


@dataclass
class FeedbackRun:
    """Per-layer trace. Index 0 is the initial state; index k follows layer k."""

    beta: np.ndarray
    A: np.ndarray
    energy: np.ndarray
    r_A: np.ndarray
    phi: np.ndarray
    lam: np.ndarray
    A_stderr: np.ndarray
    A_exact: np.ndarray
    energy_estimate: np.ndarray
    cumulative_samples: np.ndarray
    final_state: StateVector
    cost: CostLedger
    monotone_violations: list[int]
    config: RunConfig
    min_energy: float
    stopped_early: bool = False
    best_index: int | None = None
    best_energy: float | None = None
    kicked_layers: list[int] = field(default_factory=list)

    @property
    def layers(self) -> int:
        return len(self.energy) - 1

    @property
    def final_energy(self) -> float:
        return float(self.energy[-1])

    @property
    def best_bitstring(self) -> str | None:
        return None if self.best_index is None else index_to_bits(self.best_index, self.final_state.n)


def alpha_schedule(ell: int, amp: float = 0.1) -> np.ndarray:
    """alpha_k = amp sin^2(pi k / (2 ell) - pi / 2) for k = 1..ell; vanishes at k = ell."""
    k = np.arange(1, ell + 1, dtype=float)
    a = amp * np.sin(np.pi * k / (2 * ell) - np.pi / 2) ** 2
    a[-1] = 0.0  # sin^2 of exactly zero; avoid 1e-33 rounding residue
    return a


def kick_probability(beta_k: float, k: int, ell: int, cfg: KickConfig) -> float:
    if beta_k >= cfg.beta_c:
        return 0.0
    alpha = cfg.amp * math.sin(math.pi * k / (2 * ell) - math.pi / 2) ** 2
    if k == ell:
        alpha = 0.0
    return min(max((1.0 - beta_k) * alpha, 0.0), 1.0)


def kick_transform(beta_k: float, k: int, ell: int, cfg: KickConfig, rng: np.random.Generator) -> float:
    """With probability clamp((1 - beta_k) alpha_k, 0, 1), replace beta_k < beta_c by beta_c."""
    if not 1 <= k <= ell:
        raise FeedbackError(f"layer {k} outside 1..{ell}")
    if beta_k >= cfg.beta_c:
        return beta_k
    return cfg.beta_c if rng.random() < kick_probability(beta_k, k, ell, cfg) else beta_k


def estimate_commutator_shots(
    psi: StateVector, comm: CommutatorObservable, m: int, seed=None
) -> tuple[float, float, int]:
    """Shot estimate of sum_j alpha_j <P_j> from m binary outcomes per string.

    Returns (estimate, propagated standard error, samples used).
    """
    if m < 1:
        raise FeedbackError("shot estimator needs m >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    est = 0.0
    var = 0.0
    for p, a in comm.terms:
        e = expect_pauli(psi, p)
        plus = rng.binomial(m, (1.0 + e) / 2.0)
        mean = 2.0 * plus / m - 1.0
        est += a * mean
        var += a * a * (1.0 - mean * mean)
    return est, math.sqrt(var / m), m * comm.term_count


def derive_seed(master: int, instance: str, variant: str = "standard") -> int:
    """Independent stream seed from (master seed, instance id, variant id)."""
    ss = np.random.SeedSequence([master, zlib.crc32(instance.encode()), zlib.crc32(variant.encode())])
    return int(ss.generate_state(1)[0])


def _check_dims(hp: ProblemHamiltonian, comm: CommutatorObservable, ground: GroundStateSet) -> None:
    if hp.n != comm.n:
        raise FeedbackError(f"dimension mismatch: H_p on {hp.n} qubits, commutator on {comm.n}")
    if ground.n and ground.n != hp.n:
        raise FeedbackError(f"dimension mismatch: ground states on {ground.n} qubits")


def run_falqon(
    hp: ProblemHamiltonian,
    comm: CommutatorObservable,
    ground: GroundStateSet,
    cfg: RunConfig,
    psi0: StateVector | None = None,
) -> FeedbackRun:
    """Execute the feedback loop for up to cfg.max_layers layers.

    Handles the standard, kicks and reference variants; for iterative QLC
    use :func:`run_iterative_qlc`.
    """
    cfg.validate()
    _check_dims(hp, comm, ground)
    ell = cfg.max_layers
    if cfg.variant == "reference":
        lam = np.asarray(alpha_schedule(ell) if cfg.reference is None else cfg.reference, dtype=float)
        if lam.size < ell:
            raise FeedbackError(f"reference schedule has {lam.size} entries, run needs {ell}")
    elif cfg.variant in ("standard", "kicks"):
        lam = np.zeros(ell)
    else:
        raise FeedbackError("iterative variant runs through run_iterative_qlc")

    shot_ss, kick_ss, final_ss = np.random.SeedSequence(cfg.seed).spawn(3)
    shot_rng = np.random.default_rng(shot_ss)
    kick_rng = np.random.default_rng(kick_ss)

    psi = (init_mixer_ground(hp.n) if psi0 is None else psi0).copy()
    emin = ground.min_energy
    shots_mode = cfg.estimator == "shots"
    strings = comm.term_count
    ledger = CostLedger(cfg.shots, strings + (1 if cfg.measure_energy else 0))
    allow_stop = cfg.variant == "standard" and cfg.stop_eps is not None

    def ratio(e: float) -> float:
        return e / emin if emin != 0 else math.nan

    e0 = expect_hp(psi, hp)
    a0 = expect_commutator(psi, comm)
    beta, A, energy, rA, phi = [0.0], [a0], [e0], [ratio(e0)], [ground_probability(psi, ground.states)]
    lams, stderr, a_exact, e_est, cum = [0.0], [0.0], [a0], [e0], [0]
    violations: list[int] = []
    kicked: list[int] = []
    quiet = 0
    stopped = False
    beta_next = cfg.beta_1

    for k in range(1, ell + 1):
        b = beta_next
        if cfg.variant == "kicks":
            kb = kick_transform(b, k, ell, cfg.kick, kick_rng)
            if kb != b:
                kicked.append(k)
            b = kb
        lam_k = float(lam[k - 1])
        apply_problem_phase(psi, hp, cfg.dt, inplace=True)
        apply_mixer(psi, (lam_k + b) * cfg.dt, inplace=True)

        e = expect_hp(psi, hp)
        ax = expect_commutator(psi, comm)
        if shots_mode:
            a, se, _ = estimate_commutator_shots(psi, comm, cfg.shots, shot_rng)
            if cfg.measure_energy:
                zs = sample_indices(psi, cfg.shots, shot_rng)
                e_est.append(float(np.mean(hp.diag[zs])))
            else:
                e_est.append(e)
        else:
            a, se = ax, 0.0
            e_est.append(e)
        ledger.charge_layer(strings, cfg.measure_energy)

        if e > energy[-1] + cfg.monotone_tol:
            violations.append(k)
        beta.append(b)
        lams.append(lam_k)
        A.append(a)
        a_exact.append(ax)
        stderr.append(se)
        energy.append(e)
        rA.append(ratio(e))
        phi.append(ground_probability(psi, ground.states))
        cum.append(ledger.total_samples)

        beta_next = cfg.law(k, a)
        if allow_stop:
            quiet = quiet + 1 if abs(b) < cfg.stop_eps else 0
            if quiet >= cfg.patience:
                stopped = k < ell
                break

    best_index = best_energy = None
    if cfg.final_shots > 0:
        zs = sample_indices(psi, cfg.final_shots, np.random.default_rng(final_ss))
        j = int(np.argmin(hp.diag[zs]))
        best_index, best_energy = int(zs[j]), float(hp.diag[zs[j]])

    arr = lambda x: np.asarray(x, dtype=float)  # noqa: E731
    return FeedbackRun(
        beta=arr(beta),
        A=arr(A),
        energy=arr(energy),
        r_A=arr(rA),
        phi=arr(phi),
        lam=arr(lams),
        A_stderr=arr(stderr),
        A_exact=arr(a_exact),
        energy_estimate=arr(e_est),
        cumulative_samples=np.asarray(cum, dtype=np.int64),
        final_state=psi,
        cost=ledger,
        monotone_violations=violations,
        config=cfg,
        min_energy=emin,
        stopped_early=stopped,
        best_index=best_index,
        best_energy=best_energy,
        kicked_layers=kicked,
    )


def run_with_reference(
    hp: ProblemHamiltonian,
    comm: CommutatorObservable,
    ground: GroundStateSet,
    cfg: RunConfig,
    lambda_schedule: Sequence[float] | None = None,
    psi0: StateVector | None = None,
) -> FeedbackRun:
    """Run with mixer angle (lambda_k + beta_k) dt. Default schedule is alpha_k."""
    sched = cfg.reference if lambda_schedule is None else lambda_schedule
    rcfg = _replace(cfg, variant="reference", reference=None if sched is None else tuple(float(x) for x in sched))
    return run_falqon(hp, comm, ground, rcfg, psi0)


def _replace(cfg: RunConfig, **changes) -> RunConfig:
    d = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
    d.update(changes)
    return RunConfig(**d)


def run_iterative_qlc(
    hp: ProblemHamiltonian,
    comm: CommutatorObservable,
    ground: GroundStateSet,
    cfg: RunConfig,
    iterations: int | None = None,
    beta_tol: float = 1e-3,
    psi0: StateVector | None = None,
) -> list[FeedbackRun]:
    """Successive passes where each pass's total control becomes the next reference.

    Pass 0 is standard feedback; pass i uses lambda^(i) = lambda^(i-1) + beta^(i-1).
    Each pass runs the full layer count. A :class:`QlcPreconditionWarning`
    is issued for every pass whose final |beta| exceeds ``beta_tol``.
    """
    iterations = cfg.iterations if iterations is None else iterations
    if iterations < 1:
        raise FeedbackError("iterations must be >= 1")
    ell = cfg.max_layers
    runs = []
    lam = np.zeros(ell)
    for i in range(iterations):
        if i == 0:
            run = run_falqon(hp, comm, ground, _replace(cfg, variant="standard", stop_eps=None), psi0)
        else:
            run = run_with_reference(hp, comm, ground, cfg, lam, psi0)
        if abs(run.beta[-1]) > beta_tol:
            warnings.warn(
                f"iteration {i}: |beta_l| = {abs(run.beta[-1]):.3g} exceeds {beta_tol}; "
                "monotone improvement across iterations is not guaranteed",
                QlcPreconditionWarning,
                stacklevel=2,
            )
        runs.append(run)
        lam = lam + run.beta[1:]
    return runs


def qlc_precondition(runs: Sequence[FeedbackRun], beta_tol: float = 1e-3) -> list[bool]:
    return [bool(abs(r.beta[-1]) <= beta_tol) for r in runs]


# --- trace output ----------------------------------------------------------

def trace_csv(run: FeedbackRun) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for k in range(1, run.layers + 1):
        w.writerow([k] + [repr(float(x[k])) for x in (run.beta, run.A, run.energy, run.r_A, run.phi)]
                   + [int(run.cumulative_samples[k])])
    return buf.getvalue()


def run_metadata(run: FeedbackRun, instance: str = "", extra: dict | None = None) -> dict:
    meta = {
        "trace_schema": TRACE_SCHEMA,
        "columns": list(TRACE_COLUMNS),
        "instance": instance,
        "config": run.config.to_dict(),
        "tau": run.config.tau,
        "layers_executed": run.layers,
        "stopped_early": run.stopped_early,
        "initial": {"energy": float(run.energy[0]), "phi": float(run.phi[0]), "A": float(run.A[0])},
        "final": {"energy": run.final_energy, "r_A": float(run.r_A[-1]), "phi": float(run.phi[-1])},
        "min_energy": run.min_energy,
        "monotone_violations": list(run.monotone_violations),
        "kicked_layers": list(run.kicked_layers),
        "best_bitstring": run.best_bitstring,
        "best_energy": run.best_energy,
        "cost": {
            "total_samples": run.cost.total_samples,
            "commutator_samples": run.cost.commutator_samples,
            "energy_samples": run.cost.energy_samples,
            "shots_per_string": run.cost.shots_per_string,
            "per_layer_strings": run.cost.per_layer_strings,
        },
    }
    if extra:
        meta.update(extra)
    return meta


def write_trace(run: FeedbackRun, stem: str | Path, instance: str = "", extra: dict | None = None) -> tuple[Path, Path]:
    stem = Path(stem)
    csv_path = stem.with_suffix(".csv")
    json_path = stem.with_suffix(".json")
    csv_path.write_text(trace_csv(run))
    json_path.write_text(json.dumps(run_metadata(run, instance, extra), indent=2, sort_keys=True) + "\n")
    return csv_path, json_path
