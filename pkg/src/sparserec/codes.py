"""Uniform list-recoverable codes: split, Loomis-Whitney, Reed-Solomon.

Messages are integers in [n]; codewords are r-tuples of integer symbols
in [q].  All three families are uniform (each coordinate of a uniform
message is uniform over the alphabet), which downstream layers rely on.

List recovery:
  * split      - cartesian product of the two candidate sets;
  * LW(d)      - reconstruct a set in Sigma^d from its d coordinate-
                 deleted projection sets via the labeled-binary-tree join,
                 output size at most (d-1) * (prod k_i)^(1/(d-1));
  * Reed-Solomon - interpolate through every b-subset of candidate
                 coordinates and keep polynomials agreeing with enough
                 sets (exact in the unique-decoding regime
                 rho < (1/2)(1 - b/r)).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from sparserec.errors import NumericalError, UsageError
from sparserec.fields import FieldSpec

# ---------------------------------------------------------------------------
# the Loomis-Whitney join (coordinate-deleted projections)
# ---------------------------------------------------------------------------


def _project(coords: tuple[int, ...], vec: tuple[int, ...],
             target: tuple[int, ...]) -> tuple[int, ...]:
    pos = {c: i for i, c in enumerate(coords)}
    return tuple(vec[pos[c]] for c in target)


def _merge(coords_l, vec_l, coords_r, vec_r) -> tuple[int, ...]:
    out = {}
    for c, v in zip(coords_l, vec_l):
        out[c] = v
    for c, v in zip(coords_r, vec_r):
        out[c] = v
    return tuple(out[c] for c in sorted(out))


class _JoinNode:
    __slots__ = ("coords", "deter", "ndeter")

    def __init__(self, coords, deter, ndeter):
        self.coords = coords  # sorted tuple of live coordinates
        self.deter = deter    # set of full d-tuples
        self.ndeter = ndeter  # set of tuples over coords


def _combine(left: _JoinNode, right: _JoinNode, cap: float, is_root: bool) -> _JoinNode:
    common = tuple(sorted(set(left.coords) & set(right.coords)))
    by_proj_l: dict[tuple, list] = {}
    for w in left.ndeter:
        by_proj_l.setdefault(_project(left.coords, w, common), []).append(w)
    by_proj_r: dict[tuple, list] = {}
    for w in right.ndeter:
        by_proj_r.setdefault(_project(right.coords, w, common), []).append(w)
    shared = set(by_proj_l) & set(by_proj_r)

    deter = set(left.deter) | set(right.deter)
    if not shared:
        return _JoinNode(common, deter, set())

    if is_root:
        good = shared
        bad: set[tuple] = set()
    else:
        size_r = sum(len(by_proj_r[u]) for u in shared)
        threshold = math.ceil(cap / size_r) - 1
        good = {u for u in shared if len(by_proj_l[u]) <= threshold}
        bad = shared - good

    for u in good:
        for wl in by_proj_l[u]:
            for wr in by_proj_r[u]:
                deter.add(_merge(left.coords, wl, right.coords, wr))
    return _JoinNode(common, deter, bad)


def _join_over_leaves(leaves: list[int], proj_sets: dict[int, set], d: int,
                      cap: float) -> set[tuple[int, ...]]:
    """Left-leaning fold of the labeled join tree over the given leaves."""
    full = tuple(range(d))
    nodes = []
    for leaf in leaves:
        coords = tuple(c for c in full if c != leaf)
        nodes.append(_JoinNode(coords, set(), set(proj_sets[leaf])))
    acc = nodes[0]
    for i, node in enumerate(nodes[1:], start=2):
        acc = _combine(acc, node, cap, is_root=(i == len(nodes)))
    return acc.deter


def _validate_projections(projections) -> list[set[tuple[int, ...]]]:
    d = len(projections)
    if d < 2:
        raise UsageError("need at least two projection sets")
    sets = []
    for s in projections:
        cleaned = set()
        for v in s:
            tv = tuple(v)
            if len(tv) != d - 1:
                raise UsageError(
                    f"projection vectors must have arity {d - 1}, got {len(tv)}"
                )
            cleaned.add(tv)
        sets.append(cleaned)
    return sets


def lw_join(projections) -> list[tuple[int, ...]]:
    """All v in Sigma^d whose coordinate-deleted projections v_{-i} lie in
    the given sets; exact, deduplicated, sorted."""
    sets = _validate_projections(projections)
    d = len(sets)
    ks = [len(s) for s in sets]
    if min(ks) == 0:
        return []
    cap = float(np.prod([float(k) for k in ks])) ** (1.0 / (d - 1))
    deter = _join_over_leaves(list(range(d)), dict(enumerate(sets)), d, cap)
    out = sorted(
        v for v in deter
        if all(v[:i] + v[i + 1 :] in sets[i] for i in range(d))
    )
    if len(out) > math.ceil((d - 1) * cap):
        raise NumericalError("join output exceeded its provable size bound")
    return out


def lw_join_tolerant(projections, errors: int) -> list[tuple[int, ...]]:
    """Vectors agreeing with at least d - errors of the projection sets."""
    sets = _validate_projections(projections)
    d = len(sets)
    if not 0 <= errors <= d - 2:
        raise UsageError("error budget must satisfy 0 <= e <= d-2")
    ks = [len(s) for s in sets]
    found: set[tuple[int, ...]] = set()
    bound = 0.0
    for e in range(errors + 1):
        for bad in itertools.combinations(range(d), e):
            keep = [i for i in range(d) if i not in bad]
            prod = float(np.prod([float(ks[i]) for i in keep]))
            bound += (d - e - 1) * prod ** (1.0 / (d - e - 1))
            if any(ks[i] == 0 for i in keep):
                continue
            cap = prod ** (1.0 / (d - e - 1))
            deter = _join_over_leaves(keep, dict(enumerate(sets)), d, cap)
            for v in deter:
                if all(v[:i] + v[i + 1 :] in sets[i] for i in keep):
                    found.add(v)
    out = sorted(
        v for v in found
        if sum(v[:i] + v[i + 1 :] in sets[i] for i in range(d)) >= d - errors
    )
    if len(out) > math.ceil(bound):
        raise NumericalError("tolerant join exceeded its provable size bound")
    return out


# ---------------------------------------------------------------------------
# code descriptors
# ---------------------------------------------------------------------------


class SplitCode:
    """x in [q^2] -> (high digit, low digit); trivial list recovery."""

    kind = "split"
    r = 2
    b = 2

    def __init__(self, n: int):
        q = math.isqrt(n)
        if q * q != n:
            raise UsageError("split code needs a perfect-square message space")
        self.n = n
        self.q = q

    def encode(self, x: int) -> tuple[int, int]:
        if not 0 <= x < self.n:
            raise UsageError(f"message {x} outside [0, {self.n})")
        return divmod(x, self.q)

    def encode_all(self) -> np.ndarray:
        xs = np.arange(self.n)
        return np.stack([xs // self.q, xs % self.q], axis=1)

    def list_recover(self, sets, rho: float = 0.0) -> list[int]:
        if rho != 0.0:
            raise UsageError("split code recovery only supports rho = 0")
        s1, s2 = (sorted(set(s)) for s in sets)
        return sorted(a * self.q + b for a in s1 for b in s2)


class LWCode:
    """x viewed as d digits; coordinate i of the codeword deletes digit i.

    Symbols are (d-1)-tuples of sub-digits, packed into ints base `base`
    most-significant digit first.
    """

    kind = "lw"

    def __init__(self, n: int, d: int):
        if d < 2:
            raise UsageError("need d >= 2")
        base = round(n ** (1.0 / d))
        while base**d < n:
            base += 1
        if base**d != n:
            raise UsageError(f"message space {n} is not a perfect {d}-th power")
        self.n = n
        self.d = d
        self.r = d
        self.base = base        # sub-digit alphabet
        self.q = base ** (d - 1)  # symbol alphabet
        self.b = d / (d - 1)

    def digits(self, x: int) -> tuple[int, ...]:
        out = []
        for j in range(self.d - 1, -1, -1):
            out.append((x // self.base**j) % self.base)
        return tuple(out)

    def pack_symbol(self, sub_digits) -> int:
        v = 0
        for t in sub_digits:
            v = v * self.base + int(t)
        return v

    def unpack_symbol(self, sym: int) -> tuple[int, ...]:
        out = []
        for j in range(self.d - 2, -1, -1):
            out.append((sym // self.base**j) % self.base)
        return tuple(out)

    def encode_tuple(self, x: int) -> tuple[tuple[int, ...], ...]:
        if not 0 <= x < self.n:
            raise UsageError(f"message {x} outside [0, {self.n})")
        dig = self.digits(x)
        return tuple(dig[:i] + dig[i + 1 :] for i in range(self.d))

    def encode(self, x: int) -> tuple[int, ...]:
        return tuple(self.pack_symbol(t) for t in self.encode_tuple(x))

    def encode_all(self) -> np.ndarray:
        xs = np.arange(self.n)
        dig = np.stack(
            [(xs // self.base**j) % self.base for j in range(self.d - 1, -1, -1)],
            axis=1,
        )
        cols = []
        for i in range(self.d):
            rest = np.delete(dig, i, axis=1)
            packed = np.zeros(self.n, dtype=np.int64)
            for t in range(self.d - 1):
                packed = packed * self.base + rest[:, t]
            cols.append(packed)
        return np.stack(cols, axis=1)

    def pack_message(self, sub_digits) -> int:
        v = 0
        for t in sub_digits:
            v = v * self.base + int(t)
        return v

    def list_recover(self, sets, rho: float = 0.0, errors: int = 0) -> list[int]:
        if rho != 0.0:
            raise UsageError("LW recovery corrects via an error budget, not rho")
        tuple_sets = [
            {self.unpack_symbol(int(sym)) for sym in s} for s in sets
        ]
        joined = lw_join(tuple_sets) if errors == 0 else lw_join_tolerant(tuple_sets, errors)
        return [self.pack_message(v) for v in joined]


class RSCode:
    """Polynomial-evaluation code: message digits (base q, least
    significant first) are the coefficients, evaluated at r distinct
    field points (defaults 0..r-1)."""

    kind = "rs"

    def __init__(self, field: FieldSpec, b: int, r: int, points=None):
        if b < 1:
            raise UsageError("need b >= 1")
        if r > field.q:
            raise UsageError("need r <= q distinct evaluation points")
        self.field = field
        self.q = field.q
        self.b = b
        self.r = r
        self.n = field.q**b
        if points is None:
            points = list(range(r))
        points = [int(p) for p in points]
        if len(points) != r or len(set(points)) != r:
            raise UsageError("evaluation points must be r distinct elements")
        self.points = points

    def coefficients(self, x: int) -> list[int]:
        if not 0 <= x < self.n:
            raise UsageError(f"message {x} outside [0, {self.n})")
        return [(x // self.q**s) % self.q for s in range(self.b)]

    def pack_coefficients(self, coeffs) -> int:
        return sum(int(c) * self.q**s for s, c in enumerate(coeffs))

    def encode(self, x: int) -> tuple[int, ...]:
        coeffs = self.coefficients(x)
        f = self.field
        out = []
        for beta in self.points:
            acc = 0
            for c in reversed(coeffs):
                acc = f.add(f.mul(acc, beta), c)
            out.append(acc)
        return tuple(out)

    def encode_all(self) -> np.ndarray:
        xs = np.arange(self.n, dtype=np.int64)
        digs = [(xs // self.q**s) % self.q for s in range(self.b)]
        cols = []
        for beta in self.points:
            acc = np.zeros(self.n, dtype=np.int64)
            beta_arr = np.full(self.n, beta, dtype=np.int64)
            for c in reversed(digs):
                acc = self.field.add_vec(self.field.mul_vec(acc, beta_arr), c)
            cols.append(acc)
        return np.stack(cols, axis=1)

    def interpolate(self, coords, values) -> list[int]:
        """Coefficients of the unique degree-<b polynomial through the
        points (self.points[c], value) for the given b coordinates."""
        f = self.field
        xs = [self.points[c] for c in coords]
        coeffs = [0] * len(xs)
        for t, yt in enumerate(values):
            denom = 1
            basis = [1]
            for u, xu in enumerate(xs):
                if u == t:
                    continue
                denom = f.mul(denom, f.sub(xs[t], xu))
                new = [0] * (len(basis) + 1)
                for p, c in enumerate(basis):
                    new[p + 1] = f.add(new[p + 1], c)
                    new[p] = f.sub(new[p], f.mul(c, xu))
                basis = new
            scale = f.mul(yt % f.q, f.inv(denom))
            for p, c in enumerate(basis):
                coeffs[p] = f.add(coeffs[p], f.mul(c, scale))
        return coeffs

    def max_disagreements(self, rho: float) -> int:
        return int(math.floor(rho * self.r + 1e-9))

    def list_recover(self, sets, rho: float) -> list[int]:
        if not rho < 0.5 * (1 - self.b / self.r) - 1e-12:
            raise UsageError(
                "rho outside the unique-decoding regime rho < (1/2)(1 - b/r)"
            )
        sets = [sorted({int(v) for v in s}) for s in sets]
        for s in sets:
            if s and not 0 <= min(s) <= max(s) < self.q:
                raise UsageError("candidate symbols must lie in [0, q)")
        need_agree = self.r - self.max_disagreements(rho)
        occupied = [i for i in range(self.r) if sets[i]]
        if len(occupied) < self.b:
            return []
        seen: dict[int, bool] = {}
        out = []
        set_lookup = [set(s) for s in sets]
        for coords in itertools.combinations(occupied, self.b):
            for values in itertools.product(*[sets[c] for c in coords]):
                x = self.pack_coefficients(self.interpolate(coords, values))
                if x in seen:
                    continue
                cw = self.encode(x)
                ok = sum(cw[i] in set_lookup[i] for i in range(self.r)) >= need_agree
                seen[x] = ok
                if ok:
                    out.append(x)
        return sorted(out)


@dataclass
class ListRecoveryInstance:
    """Per-coordinate candidate sets with disagreement tolerance rho."""

    sets: list
    rho: float = 0.0
    ell: int = dc_field(default=0)

    def __post_init__(self):
        if self.ell:
            for s in self.sets:
                if len(s) > self.ell:
                    raise UsageError("candidate set larger than the declared ell")


def encode(code, x: int) -> tuple[int, ...]:
    return code.encode(x)


def rs_list_recover(code: RSCode, instance: ListRecoveryInstance) -> list[int]:
    """Exactly the messages whose codewords agree with the candidate sets
    on at least (1 - rho) * r coordinates."""
    out = code.list_recover(instance.sets, instance.rho)
    need = code.r - code.max_disagreements(instance.rho)
    ell = max((len(s) for s in instance.sets), default=0)
    if len(out) > max(1, ell) ** code.r:
        raise NumericalError("list recovery output exceeded ell^r")
    for x in out:
        cw = code.encode(x)
        agree = sum(cw[i] in set(instance.sets[i]) for i in range(code.r))
        if agree < need:
            raise NumericalError("recovered message fails the agreement check")
    return out
