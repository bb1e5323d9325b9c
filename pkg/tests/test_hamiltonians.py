import numpy as np
import pytest

from falqon.graphs import Graph, brute_force_maxcut, generate_regular
from falqon.hamiltonians import (
    HamiltonianError,
    MixerHamiltonian,
    build_commutator,
    build_problem,
    pauli_label,
    pauli_matrix,
)
from oracles import X, Y, Z, dense_commutator, dense_hp, op_on, random_graph


def test_single_edge_diag():
    # -1/2 (1 - s0 s1) on z = 00, 10, 01, 11 (qubit 0 least significant)
    hp = build_problem(Graph.from_pairs(2, [(0, 1)]))
    np.testing.assert_array_equal(hp.diag, [0.0, -1.0, -1.0, 0.0])


def test_path3_diag(path3):
    hp = build_problem(path3)
    assert hp.diag[0b010] == -2.0
    assert hp.diag[0b101] == -2.0
    np.testing.assert_allclose(hp.diag, np.real(np.diag(dense_hp(3, path3.edges))), atol=0)


def test_empty_diag(empty3):
    assert not build_problem(empty3).diag.any()


def test_memory_cap():
    with pytest.raises(HamiltonianError, match="memory cap"):
        build_problem(Graph(27, ()))


def test_min_diag_equals_brute_force():
    for g in generate_regular(10, 3, seed=4, count=3, weighted=True):
        assert build_problem(g).diag.min() == brute_force_maxcut(g).min_energy


def test_mixer():
    assert MixerHamiltonian(4).ground_energy() == -4.0


class TestCommutator:
    def test_path3_terms(self, path3):
        comm = build_commutator(path3)
        labels = {pauli_label(p) for p, _ in comm.terms}
        assert labels == {"Y0 Z1", "Z0 Y1", "Y1 Z2", "Z1 Y2"}
        assert all(a == 1.0 for _, a in comm.terms)
        assert comm.term_count == 4

    def test_empty(self, empty3):
        assert build_commutator(empty3).term_count == 0

    def test_k4_saturates_bound(self, k4):
        comm = build_commutator(k4)
        assert comm.term_count == 12 == comm.generic_bound

    def test_weights_carried(self):
        g = Graph(3, ((0, 1, 0.25), (1, 2, 0.75)))
        assert sorted(a for _, a in build_commutator(g).terms) == [0.25, 0.25, 0.75, 0.75]

    @pytest.mark.parametrize("seed", range(10))
    def test_dense_equals_commutator(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 6))
        edges = random_graph(rng, n, weighted=bool(seed % 2))
        g = Graph(n, tuple(edges))
        dense = build_commutator(g).to_dense()
        ref = dense_commutator(n, edges)
        np.testing.assert_allclose(dense, ref, atol=1e-12)
        np.testing.assert_allclose(dense, dense.conj().T, atol=1e-12)


def test_pauli_matrix_convention():
    np.testing.assert_array_equal(pauli_matrix(((0, "Y"), (2, "Z")), 3), op_on(3, {0: Y, 2: Z}))
    np.testing.assert_array_equal(pauli_matrix(((1, "X"),), 2), np.kron(X, np.eye(2)))
    with pytest.raises(HamiltonianError):
        pauli_matrix(((0, "Q"),), 1)
    with pytest.raises(HamiltonianError):
        pauli_matrix(((0, "X"), (0, "Z")), 1)
