"""Random regular bipartite graphs, expansion certificates, signed sketches.

A graph maps each of N left vertices to ell buckets in [M], drawn with
replacement from a counter-based stream, so neighbor lists regenerate in
O(1) from (seed, N, ell, M) alone.  That matters because the recursion
works over implicit domains (up to 2^61) that can never be materialized.

The signed sketch operator multiplies each edge by a +-1 value from a
limited-independence sign family; applying it to a vector x produces the
bucket sums u_j = sum over edges (i -> j) of sign(i, j) * x_i, with
duplicate edges contributing twice.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from sparserec.errors import InfeasibleError, UsageError
from sparserec.hashing import SignFamily
from sparserec.seeds import counter_stream

_MATERIALIZE_LIMIT = 1 << 20  # cache neighbor tables up to this many edges


class BipartiteGraph:
    """ell-regular bipartite graph [N] x [ell] -> [M], seed-reproducible."""

    def __init__(self, n_left: int, ell: int, n_buckets: int, seed: int,
                 neighbors: np.ndarray | None = None):
        if n_left < 1:
            raise UsageError("need at least one left vertex")
        if not 1 <= ell <= n_buckets:
            raise UsageError("left degree must satisfy 1 <= ell <= M")
        self.n_left = n_left
        self.ell = ell
        self.n_buckets = n_buckets
        self.seed = int(seed)
        self._table = None
        if neighbors is not None:
            neighbors = np.asarray(neighbors, dtype=np.int64)
            if neighbors.shape != (n_left, ell):
                raise UsageError("neighbor table shape mismatch")
            if neighbors.min() < 0 or neighbors.max() >= n_buckets:
                raise UsageError("neighbor outside bucket range")
            self._table = neighbors
        elif n_left * ell <= _MATERIALIZE_LIMIT:
            self._table = self._generate(np.arange(n_left, dtype=np.uint64))

    @staticmethod
    def from_neighbors(neighbors: np.ndarray, n_buckets: int) -> "BipartiteGraph":
        neighbors = np.asarray(neighbors, dtype=np.int64)
        return BipartiteGraph(neighbors.shape[0], neighbors.shape[1], n_buckets,
                              seed=0, neighbors=neighbors)

    def _generate(self, indices: np.ndarray) -> np.ndarray:
        slots = np.arange(self.ell, dtype=np.uint64)
        keys = indices[:, None] * np.uint64(self.ell) + slots[None, :]
        return (counter_stream(self.seed, keys) % np.uint64(self.n_buckets)).astype(np.int64)

    def neighbors_of(self, indices: np.ndarray) -> np.ndarray:
        """(len(indices), ell) bucket table for the given left vertices."""
        indices = np.asarray(indices)
        if self._table is not None:
            return self._table[indices]
        return self._generate(indices.astype(np.uint64))

    def neighbors(self, i: int) -> list[int]:
        return self.neighbors_of(np.array([i]))[0].tolist()

    def gamma(self, vertices) -> set[int]:
        """Neighborhood Gamma(S) with duplicates collapsed."""
        idx = np.asarray(list(vertices), dtype=np.int64)
        if idx.size == 0:
            return set()
        return set(self.neighbors_of(idx).ravel().tolist())

    # -- serialization --

    def to_params(self) -> dict:
        return {"n_left": self.n_left, "ell": self.ell,
                "n_buckets": self.n_buckets, "seed": self.seed}

    @staticmethod
    def from_params(params: dict) -> "BipartiteGraph":
        return BipartiteGraph(params["n_left"], params["ell"],
                              params["n_buckets"], params["seed"])

    def dump_adjacency(self) -> str:
        """Debug listing, one line per vertex: 'i: j1 j2 ... jell'."""
        if self.n_left * self.ell > _MATERIALIZE_LIMIT:
            raise InfeasibleError("graph too large for an explicit dump")
        table = self.neighbors_of(np.arange(self.n_left))
        return "\n".join(
            f"{i}: " + " ".join(str(j) for j in row) for i, row in enumerate(table)
        ) + "\n"


def build_graph(n_left: int, ell: int, n_buckets: int, seed: int) -> BipartiteGraph:
    return BipartiteGraph(n_left, ell, n_buckets, seed)


@dataclass(frozen=True)
class ExpansionCertificate:
    t: int
    eps: float
    verified: bool
    worst_ratio: float


def verify_expansion(graph: BipartiteGraph, t: int, eps: float,
                     max_subsets: int = 10_000_000) -> ExpansionCertificate:
    """Exhaustively check |Gamma(S)| >= |S| * ell * (1 - eps) for |S| <= t.

    Test infrastructure: refuses rather than samples when the subset
    count exceeds the guard, since a sampled certificate would overclaim.
    """
    n = graph.n_left
    if t < 1 or t > n:
        raise UsageError("subset size bound t must be in 1..N")
    total = sum(math.comb(n, s) for s in range(1, t + 1))
    if total > max_subsets:
        raise InfeasibleError(
            f"enumerating {total} subsets exceeds the {max_subsets} guard"
        )
    table = graph.neighbors_of(np.arange(n))
    masks = []
    for i in range(n):
        m = 0
        for j in table[i]:
            m |= 1 << int(j)
        masks.append(m)

    ell = graph.ell
    worst = 1.0
    verified = True
    threshold = 1.0 - eps

    def explore(start: int, depth: int, acc: int):
        nonlocal worst, verified
        for v in range(start, n):
            m = acc | masks[v]
            ratio = m.bit_count() / ((depth + 1) * ell)
            if ratio < worst:
                worst = ratio
            if ratio < threshold - 1e-12:
                verified = False
            if depth + 1 < t:
                explore(v + 1, depth + 1, m)

    explore(0, 0, 0)
    return ExpansionCertificate(t=t, eps=eps, verified=verified, worst_ratio=worst)


def unique_neighbor_count(graph: BipartiteGraph, vertices) -> int:
    """Number of buckets adjacent to exactly one vertex of the set."""
    idx = np.asarray(sorted(set(int(v) for v in vertices)), dtype=np.int64)
    if idx.size == 0:
        return 0
    counts: dict[int, int] = {}
    table = graph.neighbors_of(idx)
    for row in table:
        for j in set(row.tolist()):
            counts[j] = counts.get(j, 0) + 1
    return sum(1 for c in counts.values() if c == 1)


class SignedSketchOperator:
    """Implicit measurement matrix: expander adjacency with +-1 edge signs."""

    def __init__(self, graph: BipartiteGraph, signs: SignFamily):
        if signs.n_left < graph.n_left or signs.n_buckets < graph.n_buckets:
            raise UsageError("sign family domain smaller than the graph")
        self.graph = graph
        self.signs = signs

    @property
    def n_left(self) -> int:
        return self.graph.n_left

    @property
    def n_buckets(self) -> int:
        return self.graph.n_buckets

    @staticmethod
    def build(n_left: int, ell: int, n_buckets: int, seed: int,
              sign_independence: int) -> "SignedSketchOperator":
        graph = BipartiteGraph(n_left, ell, n_buckets, seed)
        fam = SignFamily(seed=seed, independence=sign_independence,
                         n_left=n_left, n_buckets=n_buckets)
        return SignedSketchOperator(graph, fam)

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.graph.n_left,):
            raise UsageError(
                f"expected vector of length {self.graph.n_left}, got {x.shape}"
            )
        nz = np.flatnonzero(x)
        return self.apply_sparse(nz, x[nz])

    def apply_sparse(self, indices: np.ndarray, values: np.ndarray) -> np.ndarray:
        """Sketch of the vector with the given nonzero entries."""
        indices = np.asarray(indices, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if indices.size == 0:
            return np.zeros(self.graph.n_buckets)
        nbrs = self.graph.neighbors_of(indices)
        sgn = self.signs.sign_vec(
            np.repeat(indices, self.graph.ell), nbrs.ravel()
        )
        contrib = sgn * np.repeat(values, self.graph.ell)
        return np.bincount(nbrs.ravel(), weights=contrib,
                           minlength=self.graph.n_buckets)

    def readings(self, sketch: np.ndarray, indices: np.ndarray) -> np.ndarray:
        """(len(indices), ell) sign-corrected bucket readings for each index."""
        indices = np.asarray(indices, dtype=np.int64)
        nbrs = self.graph.neighbors_of(indices)
        sgn = self.signs.sign_vec(np.repeat(indices, self.graph.ell), nbrs.ravel())
        return (sgn * sketch[nbrs.ravel()]).reshape(len(indices), self.graph.ell)

    def dense_matrix(self) -> np.ndarray:
        """Materialized M x N matrix; small instances only (testing)."""
        n, m = self.graph.n_left, self.graph.n_buckets
        if n * m > _MATERIALIZE_LIMIT:
            raise InfeasibleError("dense materialization too large")
        out = np.zeros((m, n))
        for i in range(n):
            for j in self.graph.neighbors(i):
                out[j, i] += self.signs.sign(i, j)
        return out

    def to_params(self) -> dict:
        return {
            "graph": self.graph.to_params(),
            "sign_seed": self.signs.seed,
            "sign_independence": self.signs.independence,
        }

    @staticmethod
    def from_params(params: dict) -> "SignedSketchOperator":
        graph = BipartiteGraph.from_params(params["graph"])
        fam = SignFamily(seed=params["sign_seed"],
                         independence=params["sign_independence"],
                         n_left=graph.n_left, n_buckets=graph.n_buckets)
        return SignedSketchOperator(graph, fam)

    def to_json(self) -> str:
        return json.dumps(self.to_params(), sort_keys=True)


def apply_sketch(op: SignedSketchOperator, x: np.ndarray) -> np.ndarray:
    return op.apply(x)
