"""Dense statevector engine.

Functions return a new StateVector unless called with ``inplace=True``, in
which case the input is mutated and returned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graphs import MAX_QUBITS, index_to_bits
from .hamiltonians import CommutatorObservable, PauliString, ProblemHamiltonian, validate_pauli

NORM_TOL = 1e-10


class SimulationError(ValueError):
    pass


@dataclass
class StateVector:
    n: int
    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        if self.amps.shape != (1 << self.n,):
            raise SimulationError(f"expected {1 << self.n} amplitudes for n={self.n}, got {self.amps.shape}")

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amps.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probabilities(self) -> np.ndarray:
        return self.amps.real ** 2 + self.amps.imag ** 2


@dataclass(frozen=True)
class StepParams:
    dt: float
    beta: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise SimulationError(f"time step must be positive, got {self.dt}")

    @property
    def mixer_angle(self) -> float:
        return (self.beta + self.lam) * self.dt


def _check_n(n: int, max_qubits: int = MAX_QUBITS) -> None:
    if n < 1:
        raise SimulationError("need at least one qubit")
    if n > max_qubits:
        raise SimulationError(f"n={n} exceeds memory cap of {max_qubits} qubits")


def _match(psi: StateVector, n: int) -> None:
    if psi.n != n:
        raise SimulationError(f"dimension mismatch: state has {psi.n} qubits, operator has {n}")


def basis_state(n: int, z: int) -> StateVector:
    _check_n(n)
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[z] = 1.0
    return StateVector(n, amps)


def init_mixer_ground(n: int, max_qubits: int = MAX_QUBITS) -> StateVector:
    """Ground state of sum_j X_j: amps[z] = (-1)^popcount(z) / 2^(n/2)."""
    _check_n(n, max_qubits)
    amps = np.array([1.0, -1.0], dtype=np.complex128) / math.sqrt(2.0)
    out = amps
    for _ in range(n - 1):
        out = np.kron(amps, out)
    return StateVector(n, out)


def apply_problem_phase(psi: StateVector, hp: ProblemHamiltonian, dt: float, inplace: bool = False) -> StateVector:
    _match(psi, hp.n)
    out = psi if inplace else psi.copy()
    _kernels.multiply_inplace(out.amps, hp.phases(dt))
    return out


def apply_mixer(psi: StateVector, angle: float, inplace: bool = False) -> StateVector:
    """Apply prod_j exp(-i angle X_j). Exact: the X_j commute."""
    if not math.isfinite(angle):
        raise SimulationError(f"mixer angle must be finite, got {angle}")
    out = psi if inplace else psi.copy()
    if angle != 0.0:
        _kernels.mix_all(out.amps, out.n, math.cos(angle), math.sin(angle))
    return out


def apply_layer(psi: StateVector, hp: ProblemHamiltonian, step: StepParams, inplace: bool = False) -> StateVector:
    """One layer U_d(beta + lambda) U_p."""
    out = apply_problem_phase(psi, hp, step.dt, inplace=inplace)
    return apply_mixer(out, step.mixer_angle, inplace=True)


def expect_hp(psi: StateVector, hp: ProblemHamiltonian) -> float:
    _match(psi, hp.n)
    return float(_kernels.diag_expectation(psi.amps, hp.diag))


def expect_commutator(psi: StateVector, comm: CommutatorObservable) -> float:
    _match(psi, comm.n)
    if not comm.terms:
        return 0.0
    return float(_kernels.commutator_from_diag(psi.amps, psi.n, comm.problem_diag()))


def _pauli_action(p: PauliString, n: int) -> tuple[int, np.ndarray]:
    """P|z> = phase[z] |z ^ flip>."""
    validate_pauli(p, n)
    z = np.arange(1 << n, dtype=np.int64)
    phase = np.ones(1 << n, dtype=np.complex128)
    flip = 0
    for q, op in p:
        b = (z >> q) & 1
        if op in "XY":
            flip |= 1 << q
        if op == "Z":
            phase *= 1 - 2 * b
        elif op == "Y":
            # Y|0> = i|1>, Y|1> = -i|0>
            phase *= 1j * (1 - 2 * b)
    return flip, phase


def expect_pauli(psi: StateVector, p: PauliString) -> float:
    """Exact <psi|P|psi> by direct evaluation of the Pauli action."""
    flip, phase = _pauli_action(p, psi.n)
    a = psi.amps
    idx = np.arange(1 << psi.n, dtype=np.int64) ^ flip
    val = np.vdot(a[idx], phase * a)
    return float(np.clip(val.real, -1.0, 1.0))


def expect_commutator_terms(psi: StateVector, comm: CommutatorObservable) -> float:
    """Term-by-term sum_j alpha_j <P_j>; slow reference path."""
    _match(psi, comm.n)
    return float(sum(a * expect_pauli(psi, p) for p, a in comm.terms))


def ground_probability(psi: StateVector, states) -> float:
    idx = np.asarray(states, dtype=np.int64)
    if idx.size == 0:
        return 0.0
    a = psi.amps[idx]
    return float(np.sum(a.real ** 2 + a.imag ** 2))


def sample_indices(psi: StateVector, shots: int, seed=None) -> np.ndarray:
    if shots < 1:
        raise SimulationError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    p = psi.probabilities()
    p = p / p.sum()
    return rng.choice(p.size, size=shots, p=p)


def sample_bitstrings(psi: StateVector, shots: int, seed=None) -> list[str]:
    """i.i.d. computational-basis samples, rendered qubit 0 first."""
    return [index_to_bits(int(z), psi.n) for z in sample_indices(psi, shots, seed)]
