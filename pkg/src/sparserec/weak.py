"""The weak recovery layer: median estimation over signed sketches.

Given u = Mx for a signed expander sketch M, the estimate of coordinate
i is the lower median of the multiset of its ell sign-corrected bucket
readings.  Identification keeps the k + ceil(k/eta) largest estimates by
magnitude over a candidate set; estimation keeps the k + ceil(k/sqrt(eta))
largest as values.  Independent copies are combined by majority vote.

Ties in top selection break toward the smaller index and even-length
medians take the lower order statistic, so every output is deterministic
in (seed, parameters, signal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from sparserec.errors import UsageError
from sparserec.expander import SignedSketchOperator
from sparserec.seeds import derive_seed


@dataclass(frozen=True)
class WeakParams:
    """One (k, gamma, eta) layer configuration.

    eps_exp is the expansion slack the layer's graph is meant to satisfy
    (knob; the analysis wants O(gamma^3 * eta)).  s counts independent
    identification copies for majority amplification.
    """

    k: int
    gamma: float
    eta: float
    ell: int
    s: int = 1
    eps_exp: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.k < 1 or self.s < 1:
            raise UsageError("k and s must be positive")
        if not (0 < self.gamma < 1 and 0 < self.eta < 1):
            raise UsageError("gamma and eta must lie in (0, 1)")
        if self.eps_exp is None:
            object.__setattr__(self, "eps_exp", self.gamma**3 * self.eta / 2)

    @property
    def ident_count(self) -> int:
        """Identification keeps the top k + ceil(k/eta) estimates."""
        return self.k + math.ceil(self.k / self.eta)

    @property
    def est_count(self) -> int:
        """Estimation keeps the top k + ceil(k/sqrt(eta)) values."""
        return self.k + math.ceil(self.k / math.sqrt(self.eta))

    @property
    def support_cap(self) -> int:
        """Hard output-size ceiling of one layer (the O(k/eta) budget);
        distinct from the two keep counts above."""
        return 2 * self.ident_count


def lower_median(readings: np.ndarray) -> np.ndarray:
    """Row-wise lower median (order statistic ceil(n/2) of n)."""
    n = readings.shape[-1]
    idx = (n - 1) // 2
    return np.partition(readings, idx, axis=-1)[..., idx]


def median_estimates(op: SignedSketchOperator, sketch: np.ndarray,
                     indices: np.ndarray) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        return np.zeros(0)
    return lower_median(op.readings(sketch, indices))


def median_estimate(op: SignedSketchOperator, sketch: np.ndarray, i: int) -> float:
    return float(median_estimates(op, sketch, np.array([i]))[0])


def _top_by_magnitude(indices: np.ndarray, estimates: np.ndarray, count: int) -> np.ndarray:
    """Indices of the `count` largest |estimates|, ties to smaller index."""
    if indices.size <= count:
        return np.sort(indices)
    order = np.lexsort((indices, -np.abs(estimates)))
    return np.sort(indices[order[:count]])


def weak_identify(op: SignedSketchOperator, sketch: np.ndarray, candidates,
                  params: WeakParams) -> np.ndarray:
    """Candidate indices with the top k + ceil(k/eta) median estimates."""
    cand = np.unique(np.asarray(list(candidates), dtype=np.int64))
    if cand.size == 0:
        return cand
    ests = median_estimates(op, sketch, cand)
    return _top_by_magnitude(cand, ests, params.ident_count)


@dataclass
class WeakDecomposition:
    """Sparse estimate x_hat; the y/z split is reconstructed by tests."""

    indices: np.ndarray
    values: np.ndarray
    n: int

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.n)
        out[self.indices] = self.values
        return out

    @property
    def support_size(self) -> int:
        return int(self.indices.size)


def weak_estimate(op: SignedSketchOperator, sketch: np.ndarray, candidates,
                  params: WeakParams) -> WeakDecomposition:
    """Sparse vector of the top k + ceil(k/sqrt(eta)) median estimates."""
    cand = np.unique(np.asarray(list(candidates), dtype=np.int64))
    if cand.size == 0:
        return WeakDecomposition(cand, np.zeros(0), op.n_left)
    ests = median_estimates(op, sketch, cand)
    keep = _top_by_magnitude(cand, ests, params.est_count)
    pos = np.searchsorted(cand, keep)
    return WeakDecomposition(keep, ests[pos], op.n_left)


def majority_amplify(lists) -> np.ndarray:
    """Items present in more than half of the identification lists."""
    lists = [np.asarray(lst, dtype=np.int64) for lst in lists]
    s = len(lists)
    if s == 0:
        raise UsageError("need at least one list")
    if s == 1:
        return np.sort(np.unique(lists[0]))
    merged = np.concatenate([np.unique(l) for l in lists])
    items, counts = np.unique(merged, return_counts=True)
    return items[counts * 2 > s]


@dataclass
class WeakLayer:
    """A full weak system: s identification copies plus one estimation sketch.

    All operators share (domain, ell, n_buckets) and are independently
    seeded from the layer seed.
    """

    params: WeakParams
    domain: int
    n_buckets: int
    seed: int
    sign_independence: int = 32
    ident_ops: list = field(default_factory=list)
    est_op: SignedSketchOperator = None  # type: ignore[assignment]

    def __post_init__(self):
        if not self.ident_ops:
            self.ident_ops = [
                SignedSketchOperator.build(
                    self.domain, self.params.ell, self.n_buckets,
                    derive_seed(self.seed, f"ident/{c}"), self.sign_independence)
                for c in range(self.params.s)
            ]
        if self.est_op is None:
            self.est_op = SignedSketchOperator.build(
                self.domain, self.params.ell, self.n_buckets,
                derive_seed(self.seed, "estimate"), self.sign_independence)

    @property
    def measurement_count(self) -> int:
        return (len(self.ident_ops) + 1) * self.n_buckets

    def encode_sparse(self, indices: np.ndarray, values: np.ndarray) -> list[np.ndarray]:
        return [op.apply_sparse(indices, values) for op in self.ident_ops] + [
            self.est_op.apply_sparse(indices, values)
        ]

    def encode(self, x: np.ndarray) -> list[np.ndarray]:
        x = np.asarray(x, dtype=np.float64)
        nz = np.flatnonzero(x)
        return self.encode_sparse(nz, x[nz])

    def identify(self, sketches: list[np.ndarray], candidates) -> np.ndarray:
        lists = [
            weak_identify(op, u, candidates, self.params)
            for op, u in zip(self.ident_ops, sketches)
        ]
        return majority_amplify(lists)

    def estimate(self, sketches: list[np.ndarray], candidates) -> WeakDecomposition:
        return weak_estimate(self.est_op, sketches[-1], candidates, self.params)


# -- optional diagnostic: bucket classification on planted instances --

def bucket_class_counts(op: SignedSketchOperator, x: np.ndarray, k: int,
                        zeta: float, eta: float) -> dict[str, int]:
    """Count buckets of the k head coordinates falling in each interference
    class: head collision, heavy-tail collision, large tail energy, large
    signed tail sum.  Diagnostic only; the decoder never consults this.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    order = np.lexsort((np.arange(n), -np.abs(x)))
    head = set(order[:k].tolist())
    z = x.copy()
    z[list(head)] = 0.0
    z_norm = float(np.linalg.norm(z))
    heavy_thr = math.sqrt(zeta**2 * eta / k) * z_norm
    heavy_tail = {i for i in range(n) if i not in head and abs(x[i]) >= heavy_thr and x[i] != 0}
    light = [i for i in range(n) if i not in head and i not in heavy_tail]

    bucket_members: dict[int, list[int]] = {}
    for i in range(n):
        if x[i] == 0 and i not in head:
            continue
        for j in set(op.graph.neighbors(i)):
            bucket_members.setdefault(j, []).append(i)

    light_set = set(light)
    counts = {"head_collision": 0, "heavy_tail_collision": 0,
              "tail_energy": 0, "tail_signed_sum": 0, "good": 0}
    for i in sorted(head):
        for j in op.graph.neighbors(i):
            members = [b for b in bucket_members.get(j, []) if b != i]
            bad = False
            if any(b in head for b in members):
                counts["head_collision"] += 1
                bad = True
            if any(b in heavy_tail for b in members):
                counts["heavy_tail_collision"] += 1
                bad = True
            lights = [b for b in members if b in light_set]
            energy = sum(float(x[b]) ** 2 for b in lights)
            if energy > zeta * eta / k * z_norm**2:
                counts["tail_energy"] += 1
                bad = True
            signed = sum(op.signs.sign(b, j) * float(x[b]) for b in lights)
            if abs(signed) > math.sqrt(eta / k) * z_norm:
                counts["tail_signed_sum"] += 1
                bad = True
            if not bad:
                counts["good"] += 1
    return counts
