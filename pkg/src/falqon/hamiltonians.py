"""Problem, mixer and commutator operators for MaxCut.

The problem Hamiltonian is stored only as its diagonal in the computational
basis; the mixer sum_j X_j is never materialised.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .graphs import MAX_QUBITS, Edge, Graph, cut_energies

PauliString = tuple[tuple[int, str], ...]

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class HamiltonianError(ValueError):
    pass


def pauli_label(p: PauliString) -> str:
    return " ".join(f"{op}{q}" for q, op in p) or "I"


def validate_pauli(p: PauliString, n: int) -> None:
    qubits = [q for q, _ in p]
    if len(set(qubits)) != len(qubits):
        raise HamiltonianError(f"repeated qubit in {pauli_label(p)}")
    for q, op in p:
        if op not in "XYZ" or len(op) != 1:
            raise HamiltonianError(f"unknown Pauli operator {op!r}")
        if not 0 <= q < n:
            raise HamiltonianError(f"qubit {q} out of range for n={n}")


def pauli_matrix(p: PauliString, n: int) -> np.ndarray:
    """Dense matrix of a Pauli string; qubit 0 is the least significant factor."""
    validate_pauli(p, n)
    ops = dict(p)
    return reduce(np.kron, [_PAULI[ops.get(q, "I")] for q in reversed(range(n))])


@dataclass(frozen=True, eq=False)
class ProblemHamiltonian:
    n: int
    diag: np.ndarray
    terms: tuple[Edge, ...]
    _phase_cache: dict = field(default_factory=dict, repr=False)

    def phases(self, dt: float) -> np.ndarray:
        """exp(-i diag dt), cached per time step."""
        key = float(dt)
        ph = self._phase_cache.get(key)
        if ph is None:
            ph = np.exp(-1j * dt * self.diag)
            ph.setflags(write=False)
            if len(self._phase_cache) > 8:
                self._phase_cache.clear()
            self._phase_cache[key] = ph
        return ph

    @property
    def min_energy(self) -> float:
        return float(self.diag.min())


@dataclass(frozen=True)
class MixerHamiltonian:
    """sum_j X_j on n qubits."""

    n: int

    def ground_energy(self) -> float:
        return -float(self.n)


@dataclass(frozen=True, eq=False)
class CommutatorObservable:
    """i[H_d, H_p] as a weighted list of two-qubit Pauli strings."""

    n: int
    terms: tuple[tuple[PauliString, float], ...]
    edges: tuple[Edge, ...] = ()
    _diag: list = field(default_factory=list, repr=False)

    @property
    def term_count(self) -> int:
        return len(self.terms)

    @property
    def generic_bound(self) -> int:
        """Generic bound n(n-1) on the number of Pauli strings."""
        return self.n * (self.n - 1)

    def problem_diag(self) -> np.ndarray:
        """Diagonal of the H_p this observable was built from (computed once)."""
        if not self._diag:
            self._diag.append(cut_energies(self.n, self.edges))
        return self._diag[0]

    def to_dense(self) -> np.ndarray:
        if self.n > 12:
            raise HamiltonianError("dense commutator only supported for n <= 12")
        out = np.zeros((1 << self.n, 1 << self.n), dtype=complex)
        for p, a in self.terms:
            out += a * pauli_matrix(p, self.n)
        return out


def build_problem(g: Graph, max_qubits: int = MAX_QUBITS) -> ProblemHamiltonian:
    if g.n > max_qubits:
        raise HamiltonianError(f"n={g.n} exceeds memory cap of {max_qubits} qubits")
    diag = cut_energies(g.n, g.edges)
    diag.setflags(write=False)
    return ProblemHamiltonian(g.n, diag, g.edges)


def build_commutator(g: Graph, hp: ProblemHamiltonian | None = None) -> CommutatorObservable:
    # i[X_i + X_j, -(w/2)(1 - Z_i Z_j)] = w (Y_i Z_j + Z_i Y_j)
    terms = []
    for i, j, w in g.edges:
        terms.append((((i, "Y"), (j, "Z")), w))
        terms.append((((i, "Z"), (j, "Y")), w))
    comm = CommutatorObservable(g.n, tuple(terms), g.edges)
    if hp is not None:
        if hp.n != g.n:
            raise HamiltonianError("problem Hamiltonian does not match graph size")
        comm._diag.append(hp.diag)
    return comm


def build(g: Graph, max_qubits: int = MAX_QUBITS) -> tuple[ProblemHamiltonian, CommutatorObservable]:
    hp = build_problem(g, max_qubits)
    return hp, build_commutator(g, hp)
