"""MaxCut instances: the Graph type, regular-graph corpora, exact ground states, and JSON I/O.

Bit convention (used by every module in the package): bit ``i`` of a basis
index ``z`` is the computational-basis value of qubit ``i`` (little-endian).
Bitstrings rendered as text list qubit 0 first.
"""
from __future__ import annotations

import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 26
DEGENERACY_ATOL = 1e-9
_CHUNK = 1 << 20


class GraphError(ValueError):
    """Invalid graph structure or instance file."""


class IncompleteCorpusWarning(UserWarning):
    """Fewer nonisomorphic instances exist (or were found) than requested."""


Edge = tuple[int, int, float]


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[Edge, ...]
    name: str = "graph"

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise GraphError(f"vertex count must be a positive integer, got {self.n!r}")
        seen = set()
        clean = []
        for e in self.edges:
            if len(e) != 3:
                raise GraphError(f"edge {e!r} must be (i, j, w)")
            i, j, w = int(e[0]), int(e[1]), float(e[2])
            if i == j:
                raise GraphError(f"self-loop at vertex {i}")
            if i > j:
                i, j = j, i
            if i < 0 or j >= self.n:
                raise GraphError(f"edge ({i}, {j}) out of range for n={self.n}")
            if not math.isfinite(w):
                raise GraphError(f"edge ({i}, {j}) has non-finite weight {w}")
            if (i, j) in seen:
                raise GraphError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            clean.append((i, j, w))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", tuple(clean))

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[Sequence[int]], name: str = "graph") -> "Graph":
        return cls(n, tuple((int(i), int(j), 1.0) for i, j in pairs), name)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def weighted(self) -> bool:
        return any(w != 1.0 for _, _, w in self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for i, j, _ in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def regular_degree(self) -> int | None:
        """Common vertex degree, or None if the graph is not regular."""
        deg = set(self.degrees())
        return deg.pop() if len(deg) == 1 else None

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j, _ in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def is_connected(self) -> bool:
        adj = self.adjacency()
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == self.n


@dataclass(frozen=True)
class GroundStateSet:
    min_energy: float
    states: tuple[int, ...]
    n: int = field(default=0)

    @property
    def degeneracy(self) -> int:
        return len(self.states)

    @property
    def bitstrings(self) -> list[str]:
        return [index_to_bits(z, self.n) for z in self.states]


def index_to_bits(z: int, n: int) -> str:
    """Render basis index ``z`` as text, qubit 0 first."""
    return "".join("1" if (z >> q) & 1 else "0" for q in range(n))


def bits_to_index(bits: str) -> int:
    return sum(1 << q for q, b in enumerate(bits) if b == "1")


# --- MaxCut energies -------------------------------------------------------

def cut_energies(n: int, edges: Sequence[Edge], start: int = 0, stop: int | None = None) -> np.ndarray:
    """Energies -sum_e w_e [z_i != z_j] for basis indices in ``[start, stop)``.

    This equals -sum (w/2)(1 - s_i s_j) exactly in floating point, since the
    bracket only takes the values 0 and w.
    """
    stop = (1 << n) if stop is None else stop
    z = np.arange(start, stop, dtype=np.int64)
    out = np.zeros(stop - start, dtype=np.float64)
    for i, j, w in edges:
        cut = ((z >> i) ^ (z >> j)) & 1
        out -= w * cut
    return out


def brute_force_maxcut(g: Graph, max_qubits: int = MAX_QUBITS, atol: float = DEGENERACY_ATOL) -> GroundStateSet:
    """Exact MaxCut ground states by enumerating all 2^n bitstrings.

    Ties are resolved with absolute tolerance ``atol`` so that weighted
    instances have a reproducible degeneracy count.
    """
    if g.n > max_qubits:
        raise GraphError(f"n={g.n} exceeds enumeration bound {max_qubits}")
    size = 1 << g.n
    bounds = [(s, min(size, s + _CHUNK)) for s in range(0, size, _CHUNK)]
    best = min(float(cut_energies(g.n, g.edges, a, b).min()) for a, b in bounds)
    states: list[int] = []
    for a, b in bounds:
        e = cut_energies(g.n, g.edges, a, b)
        states.extend(int(a + k) for k in np.flatnonzero(e <= best + atol))
    return GroundStateSet(min_energy=best, states=tuple(states), n=g.n)


# --- canonical labelling ---------------------------------------------------

def _refine(adj: list[list[int]], colors: list[int]) -> list[int]:
    n = len(adj)
    ncol = len(set(colors))
    while True:
        sigs = [(colors[v], tuple(sorted(colors[u] for u in adj[v]))) for v in range(n)]
        rank = {s: r for r, s in enumerate(sorted(set(sigs)))}
        colors = [rank[s] for s in sigs]
        if len(rank) == ncol:
            return colors
        ncol = len(rank)


def canonical_form(g: Graph) -> tuple:
    """Isomorphism certificate of the unweighted topology of ``g``.

    Colour refinement followed by individualisation of the first smallest
    non-singleton cell; the certificate is the lexicographically smallest
    relabelled edge list over all leaves of the search tree.
    """
    adj = g.adjacency()
    pairs = [(i, j) for i, j, _ in g.edges]
    best = None

    def search(colors: list[int]) -> None:
        nonlocal best
        colors = _refine(adj, colors)
        counts = Counter(colors)
        if len(counts) == g.n:
            cert = tuple(sorted((min(colors[i], colors[j]), max(colors[i], colors[j])) for i, j in pairs))
            if best is None or cert < best:
                best = cert
            return
        size = min(c for c in counts.values() if c > 1)
        target = min(c for c, k in counts.items() if k == size)
        for v in range(g.n):
            if colors[v] == target:
                child = [2 * c for c in colors]
                child[v] = 2 * target - 1
                search(child)

    search([0] * g.n)
    return (g.n, best)


def are_isomorphic(a: Graph, b: Graph) -> bool:
    return canonical_form(a) == canonical_form(b)


# --- regular graph generation ----------------------------------------------

def _check_regular_params(n: int, d: int) -> None:
    if d < 0 or n < 1:
        raise GraphError(f"invalid (n, d) = ({n}, {d})")
    if (n * d) % 2:
        raise GraphError(f"no {d}-regular graph on {n} vertices: n*d is odd")
    if d >= n:
        raise GraphError(f"degree {d} must be smaller than n={n}")


def enumerate_regular(n: int, d: int, connected: bool = True) -> list[Graph]:
    """All nonisomorphic d-regular graphs on n vertices, by exhaustive search.

    Stubs of the lowest unfinished vertex are filled in increasing order, and
    only the first untouched vertex is ever offered as a new partner (untouched
    vertices are interchangeable). Remaining duplicates are removed by
    canonical form. Practical up to n = 10 for cubic graphs.
    """
    _check_regular_params(n, d)
    deg = [0] * n
    last = [-1] * n
    edges: list[tuple[int, int]] = []
    eset: set[tuple[int, int]] = set()
    found: dict[tuple, Graph] = {}

    def rec(touched: int) -> None:
        v = next((x for x in range(n) if deg[x] < d), None)
        if v is None:
            g = Graph.from_pairs(n, edges)
            if connected and not g.is_connected():
                return
            found.setdefault(canonical_form(g), g)
            return
        touched = max(touched, v + 1)
        for u in range(max(last[v], v) + 1, min(n, touched + 1)):
            if deg[u] >= d or (v, u) in eset:
                continue
            prev = last[v]
            edges.append((v, u))
            eset.add((v, u))
            deg[v] += 1
            deg[u] += 1
            last[v] = u
            rec(max(touched, u + 1))
            last[v] = prev
            deg[v] -= 1
            deg[u] -= 1
            eset.discard((v, u))
            edges.pop()

    rec(0)
    return [found[k] for k in sorted(found)]


def _pairing_model(n: int, d: int, rng: np.random.Generator) -> list[tuple[int, int]] | None:
    stubs = rng.permutation(np.repeat(np.arange(n), d))
    pairs = set()
    for a, b in zip(stubs[0::2], stubs[1::2]):
        a, b = int(a), int(b)
        if a == b:
            return None
        key = (min(a, b), max(a, b))
        if key in pairs:
            return None
        pairs.add(key)
    return sorted(pairs)


def _weights(m: int, rng: np.random.Generator) -> np.ndarray:
    w = rng.uniform(0.0, 1.0, size=m)
    while np.any(w == 0.0):
        w[w == 0.0] = rng.uniform(0.0, 1.0, size=int(np.sum(w == 0.0)))
    return w


def generate_regular(
    n: int,
    d: int,
    seed: int | None = 0,
    count: int | None = 1,
    weighted: bool = False,
    max_attempts: int | None = None,
) -> list[Graph]:
    """Connected, pairwise nonisomorphic d-regular graphs.

    ``count=None`` returns the complete set via :func:`enumerate_regular`.
    Otherwise graphs are sampled from the pairing model and rejected if they
    have loops, multi-edges, are disconnected, or repeat an earlier
    isomorphism class. If the attempt budget runs out first, the graphs found
    so far are returned and an :class:`IncompleteCorpusWarning` is issued.
    Weighted instances draw edge weights uniformly from (0, 1).
    """
    _check_regular_params(n, d)
    rng = np.random.default_rng(seed)
    prefix = f"reg{d}_n{n}" + ("_w" if weighted else "")
    if count is None:
        graphs = enumerate_regular(n, d, connected=True)
        if not graphs:
            warnings.warn(f"no connected {d}-regular graph on {n} vertices", IncompleteCorpusWarning, stacklevel=2)
        out = []
        for k, g in enumerate(graphs):
            w = _weights(g.num_edges, rng) if weighted else np.ones(g.num_edges)
            out.append(Graph(n, tuple((i, j, float(x)) for (i, j, _), x in zip(g.edges, w)), f"{prefix}_{k:03d}"))
        return out
    if count < 1:
        raise GraphError("count must be >= 1")
    if d == 0 and n > 1:
        warnings.warn("0-regular graphs on more than one vertex are disconnected", IncompleteCorpusWarning, stacklevel=2)
        return []
    budget = max_attempts if max_attempts is not None else 2000 * count + 10000
    seen: set[tuple] = set()
    out: list[Graph] = []
    for _ in range(budget):
        pairs = _pairing_model(n, d, rng)
        if pairs is None:
            continue
        g = Graph.from_pairs(n, pairs)
        if not g.is_connected():
            continue
        cert = canonical_form(g)
        if cert in seen:
            continue
        seen.add(cert)
        w = _weights(len(pairs), rng) if weighted else np.ones(len(pairs))
        out.append(Graph(n, tuple((i, j, float(x)) for (i, j), x in zip(pairs, w)), f"{prefix}_{len(out):03d}"))
        if len(out) == count:
            return out
    warnings.warn(
        f"found only {len(out)} of {count} nonisomorphic connected {d}-regular graphs on {n} vertices",
        IncompleteCorpusWarning,
        stacklevel=2,
    )
    return out


# --- serialisation ---------------------------------------------------------

def graph_to_dict(g: Graph) -> dict:
    return {"name": g.name, "n": g.n, "edges": [[i, j, w] for i, j, w in g.edges]}


def graph_from_dict(data: dict) -> Graph:
    try:
        n = data["n"]
        edges = data["edges"]
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed instance: missing {exc}") from exc
    if not isinstance(n, int) or isinstance(n, bool):
        raise GraphError(f"'n' must be an integer, got {n!r}")
    if not isinstance(edges, list):
        raise GraphError("'edges' must be a list")
    parsed = []
    for e in edges:
        if not isinstance(e, list) or len(e) not in (2, 3):
            raise GraphError(f"malformed edge {e!r}")
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in e[:2]):
            raise GraphError(f"edge endpoints must be integers: {e!r}")
        w = e[2] if len(e) == 3 else 1.0
        if isinstance(w, bool) or not isinstance(w, (int, float)):
            raise GraphError(f"edge weight must be a number: {e!r}")
        parsed.append((e[0], e[1], float(w)))
    return Graph(n, tuple(parsed), str(data.get("name", "graph")))


def write_graph(g: Graph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(g)) + "\n")


def read_graph(path: str | Path) -> Graph:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GraphError(f"{path}: not valid JSON ({exc})") from exc
    return graph_from_dict(data)
