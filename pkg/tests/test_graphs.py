import json
import warnings

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from falqon.graphs import (
    Graph,
    GraphError,
    IncompleteCorpusWarning,
    are_isomorphic,
    bits_to_index,
    brute_force_maxcut,
    canonical_form,
    cut_energies,
    enumerate_regular,
    generate_regular,
    index_to_bits,
    read_graph,
    write_graph,
)
from oracles import brute_energies

# Connected cubic graphs: 5 on 8 vertices, 19 on 10. Frozen from sampling
# networkx random regular graphs and de-duplicating with nx.is_isomorphic.
N_CUBIC = {4: 1, 6: 2, 8: 5, 10: 19}


def to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from((i, j) for i, j, _ in g.edges)
    return h


def test_graph_validation():
    with pytest.raises(GraphError, match="self-loop"):
        Graph(4, ((3, 3, 1.0),))
    with pytest.raises(GraphError, match="duplicate"):
        Graph(3, ((0, 1, 1.0), (1, 0, 1.0)))
    with pytest.raises(GraphError, match="out of range"):
        Graph(2, ((0, 2, 1.0),))
    with pytest.raises(GraphError, match="non-finite"):
        Graph(2, ((0, 1, float("nan")),))


def test_bit_convention():
    assert index_to_bits(1, 3) == "100"
    assert bits_to_index("010") == 2
    assert all(bits_to_index(index_to_bits(z, 5)) == z for z in range(32))


class TestBruteForce:
    def test_path3(self, path3):
        gs = brute_force_maxcut(path3)
        assert gs.min_energy == -2.0
        assert sorted(gs.bitstrings) == ["010", "101"]
        assert gs.degeneracy == 2

    def test_triangle(self, triangle):
        # enumerated by hand: every non-uniform assignment cuts exactly 2 edges
        gs = brute_force_maxcut(triangle)
        assert gs.min_energy == -2.0
        assert gs.degeneracy == 6

    def test_empty(self, empty3):
        gs = brute_force_maxcut(empty3)
        assert gs.min_energy == 0.0
        assert gs.states == tuple(range(8))

    def test_bound(self):
        with pytest.raises(GraphError, match="enumeration bound"):
            brute_force_maxcut(Graph(27, ()))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 7), st.data())
    def test_matches_per_bitstring_loop(self, n, data):
        pairs = data.draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda p: p[0] < p[1])))
        weights = data.draw(st.lists(st.floats(0.01, 1.0), min_size=len(pairs), max_size=len(pairs)))
        edges = [(i, j, w) for (i, j), w in zip(sorted(pairs), weights)]
        g = Graph(n, tuple(edges))
        ref = brute_energies(n, edges)
        np.testing.assert_allclose(cut_energies(n, g.edges), ref, atol=1e-12)
        gs = brute_force_maxcut(g)
        assert gs.min_energy == pytest.approx(min(ref), abs=1e-12)
        assert set(gs.states) == {z for z, e in enumerate(ref) if e <= min(ref) + 1e-9}
        assert gs.min_energy <= 0

    def test_unweighted_energies_are_integers(self, k4):
        gs = brute_force_maxcut(k4)
        assert gs.min_energy == -4.0
        assert float(gs.min_energy).is_integer()


class TestCanonicalForm:
    def test_relabel_invariant(self):
        rng = np.random.default_rng(3)
        for g in generate_regular(12, 3, seed=5, count=5):
            perm = rng.permutation(g.n)
            h = Graph(g.n, tuple((int(perm[i]), int(perm[j]), w) for i, j, w in g.edges))
            assert canonical_form(g) == canonical_form(h)

    def test_distinguishes(self):
        cube = Graph.from_pairs(8, nx.convert_node_labels_to_integers(nx.cubical_graph()).edges())
        # the 3-prism x K2 variant: two 4-cycles joined differently
        others = [g for g in enumerate_regular(8, 3) if not nx.is_isomorphic(to_nx(g), to_nx(cube))]
        assert len(others) == 4
        assert all(not are_isomorphic(cube, g) for g in others)

    def test_petersen(self):
        p = Graph.from_pairs(10, nx.petersen_graph().edges())
        matches = [g for g in enumerate_regular(10, 3) if are_isomorphic(g, p)]
        assert len(matches) == 1


class TestGenerate:
    def test_k4_forced(self, k4):
        (g,) = generate_regular(4, 3, seed=0, count=1)
        assert g.num_edges == 6
        assert are_isomorphic(g, k4)

    @pytest.mark.parametrize("n", [4, 6, 8, 10])
    def test_exhaustive_counts(self, n):
        gs = generate_regular(n, 3, count=None)
        assert len(gs) == N_CUBIC[n]
        for g in gs:
            assert g.is_connected() and g.regular_degree() == 3
        nxs = [to_nx(g) for g in gs]
        for a in range(len(nxs)):
            for b in range(a):
                assert not nx.is_isomorphic(nxs[a], nxs[b])

    def test_exhaustive_covers_random_samples(self):
        reps = [to_nx(g) for g in generate_regular(10, 3, count=None)]
        for s in range(40):
            h = nx.random_regular_graph(3, 10, seed=s)
            if nx.is_connected(h):
                assert any(nx.is_isomorphic(h, r) for r in reps)

    def test_parity_error(self):
        with pytest.raises(GraphError, match="odd"):
            generate_regular(5, 3)
        with pytest.raises(GraphError):
            generate_regular(4, 4)

    def test_reproducible(self):
        a = generate_regular(14, 3, seed=11, count=4, weighted=True)
        b = generate_regular(14, 3, seed=11, count=4, weighted=True)
        assert a == b
        c = generate_regular(14, 3, seed=12, count=4, weighted=True)
        assert a != c

    def test_random_corpus_properties(self):
        gs = generate_regular(12, 3, seed=2, count=20)
        assert len(gs) == 20
        certs = {canonical_form(g) for g in gs}
        assert len(certs) == 20
        assert all(g.is_connected() and g.regular_degree() == 3 for g in gs)

    def test_weighted_in_open_unit_interval(self):
        (g,) = generate_regular(8, 4, seed=7, count=1, weighted=True)
        assert g.regular_degree() == 4
        ws = [w for _, _, w in g.edges]
        assert all(0.0 < w < 1.0 for w in ws)

    def test_too_many_requested(self):
        with warnings.catch_warnings(record=True) as rec:
            warnings.simplefilter("always")
            gs = generate_regular(6, 3, seed=0, count=5, max_attempts=500)
        assert len(gs) == 2
        assert any(issubclass(w.category, IncompleteCorpusWarning) for w in rec)


class TestIO:
    def test_minimal(self, tmp_path):
        p = tmp_path / "g.json"
        p.write_text('{"name": "pair", "n": 2, "edges": [[0, 1, 1.0]]}')
        g = read_graph(p)
        assert g == Graph(2, ((0, 1, 1.0),), "pair")

    def test_roundtrip_k4(self, tmp_path, k4):
        write_graph(k4, tmp_path / "k4.json")
        assert read_graph(tmp_path / "k4.json") == k4

    def test_roundtrip_weights_bit_identical(self, tmp_path):
        (g,) = generate_regular(8, 4, seed=3, count=1, weighted=True)
        write_graph(g, tmp_path / "w.json")
        h = read_graph(tmp_path / "w.json")
        assert [w for *_, w in h.edges] == [w for *_, w in g.edges]
        assert h == g

    @pytest.mark.parametrize(
        "payload, msg",
        [
            ({"n": 4, "edges": [[3, 3, 1.0]]}, "self-loop"),
            ({"n": 2, "edges": [[0, 5, 1.0]]}, "out of range"),
            ({"n": 3, "edges": [[0, 1, 1.0], [0, 1, 2.0]]}, "duplicate"),
            ({"edges": []}, "missing"),
            ({"n": 2, "edges": [[0, "a", 1.0]]}, "integers"),
        ],
    )
    def test_errors(self, tmp_path, payload, msg):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps(payload))
        with pytest.raises(GraphError, match=msg):
            read_graph(p)

    def test_not_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{nope")
        with pytest.raises(GraphError, match="JSON"):
            read_graph(p)
