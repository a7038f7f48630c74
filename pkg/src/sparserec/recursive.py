"""Sublinear-time identification via an r-ary tree of shrinking domains.

Every tree node v owns a domain of packed (deterministic, random) bit
pairs, a weak layer over that domain, and (if internal) a code mapping
its messages to r child symbols.  Encoding pushes the signal through the
composed coordinate maps phi_v and sketches the aggregated image at
every node.  Identification runs leaves-first: leaves scan their whole
(small) domain; an internal node list-recovers its children's candidate
lists into a set S_v and prunes it with its own weak layer; the root's
survivors are inverted back to signal indices.

Index shuffling uses one of two schemes.  Scheme 2 (default, sublinear
space) appends a k-wise-independent fingerprint: f(i) = (i, g(i)) with g
a random polynomial, so inversion is a projection and every code symbol
keeps its proportional share of the random bits.  Scheme 1 keeps a full
lookup table of a random f: [n] -> [n^2] and drops indices whose
preimage collides.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from sparserec.codes import RSCode, lw_join, lw_join_tolerant
from sparserec.errors import InfeasibleError, UsageError
from sparserec.fields import FieldSpec
from sparserec.hashing import PolyHash
from sparserec.seeds import counter_stream, derive_seed
from sparserec.weak import WeakLayer, WeakParams


def tree_shape(n_root: int, leaf_target: int, arity: int) -> tuple[int, int]:
    """Height ceil(log_r(log_A(n))) clamped at 0, and the node count of
    the complete r-ary tree of that height."""
    if leaf_target < 2 or n_root < 2 or arity < 2:
        raise UsageError("need n >= 2, A >= 2, r >= 2")
    depth_ratio = math.log(n_root) / math.log(leaf_target)
    if depth_ratio <= 1.0:
        h = 0
    else:
        h = max(0, math.ceil(math.log(depth_ratio) / math.log(arity) - 1e-9))
    count = (arity ** (h + 1) - 1) // (arity - 1)
    return h, count


# ---------------------------------------------------------------------------
# index shuffling schemes
# ---------------------------------------------------------------------------


class Scheme2Map:
    """f(i) = (i, g(i)) with g a degree-d polynomial over GF(2^w),
    w = signal_bits * (t - 1), t = ceil(1/alpha)."""

    def __init__(self, signal_bits: int, alpha: float, degree: int, seed: int):
        if not 0 < alpha < 1:
            raise UsageError("alpha must lie in (0, 1)")
        self.signal_bits = signal_bits
        self.alpha = alpha
        self.t = math.ceil(1.0 / alpha)
        self.rnd_bits = signal_bits * (self.t - 1)
        self.degree = degree
        self.field = FieldSpec.binary(self.rnd_bits)
        self.g = PolyHash.from_seed(self.field, degree, 1 << signal_bits,
                                    derive_seed(seed, "scheme2/g"))

    def fingerprint(self, indices: np.ndarray) -> np.ndarray:
        idx = np.asarray(indices, dtype=np.int64)
        if self.rnd_bits <= 16:
            return self.g.eval_vec(idx)
        return np.array([self.g.eval(int(i)) for i in idx], dtype=np.int64)

    def forward(self, indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(deterministic part, random part) of each mapped index."""
        idx = np.asarray(indices, dtype=np.int64)
        return idx, self.fingerprint(idx)

    def invert(self, det: np.ndarray, rnd: np.ndarray, n_signal: int) -> np.ndarray:
        """Projection inverse; mapped values whose fingerprint does not
        match are not images of any index and are discarded."""
        det = np.asarray(det, dtype=np.int64)
        keep = det < n_signal
        if not np.any(keep):
            return np.zeros(0, dtype=np.int64)
        good = self.fingerprint(det[keep]) == np.asarray(rnd, dtype=np.int64)[keep]
        return np.unique(det[keep][good])


class Scheme1Table:
    """Fully random f: [n] -> [n^2] stored as a sorted lookup table.

    Linear space; retained as a reference implementation.  Lookup drops
    values with colliding preimages and reports how many were dropped.
    """

    def __init__(self, n_signal: int, seed: int):
        self.n_signal = n_signal
        self.seed = int(seed)
        self.range_size = n_signal * n_signal
        idx = np.arange(n_signal, dtype=np.uint64)
        self._fvals = (counter_stream(derive_seed(self.seed, "scheme1/f"), idx)
                       % np.uint64(self.range_size)).astype(np.int64)
        order = np.argsort(self._fvals, kind="stable")
        self.sorted_values = self._fvals[order]
        self.sorted_preimages = order.astype(np.int64)
        dup = np.zeros(n_signal, dtype=bool)
        if n_signal > 1:
            eq = self.sorted_values[1:] == self.sorted_values[:-1]
            dup[1:] |= eq
            dup[:-1] |= eq
        self._ambiguous = dup

    def forward(self, indices: np.ndarray) -> np.ndarray:
        return self._fvals[np.asarray(indices, dtype=np.int64)]

    def collision_count(self) -> int:
        """Number of indices whose image is shared (dropped at inversion)."""
        return int(np.sum(self._ambiguous))

    def invert(self, values: np.ndarray) -> tuple[np.ndarray, int]:
        values = np.unique(np.asarray(values, dtype=np.int64))
        pos = np.searchsorted(self.sorted_values, values)
        ok = pos < self.n_signal
        pos = np.minimum(pos, self.n_signal - 1)
        hit = ok & (self.sorted_values[pos] == values)
        unambiguous = hit & ~self._ambiguous[pos]
        dropped = int(np.sum(hit & self._ambiguous[pos]))
        return np.unique(self.sorted_preimages[pos[unambiguous]]), dropped


# ---------------------------------------------------------------------------
# per-node codes over paired (det, rnd) bit domains
# ---------------------------------------------------------------------------


def _pad_up(bits: int, mult: int) -> int:
    return ((bits + mult - 1) // mult) * mult if bits else 0


@dataclass
class NodeCode:
    """Code of one internal node, acting on packed (det, rnd) messages.

    kind 'split'/'lw': symbol u deletes sub-digit u from both halves.
    kind 'rs': both halves are evaluated as polynomials at points 0..r-1
    over their own binary fields.
    """

    kind: str
    arity: int                 # r: number of children / codeword length
    det_bits: int              # padded widths at this node
    rnd_bits: int
    det_sub: int               # per-digit widths (lw) or per-coefficient (rs)
    rnd_sub: int
    rs_b: int = 0
    _rs_det: object = dc_field(default=None, repr=False)
    _rs_rnd: object = dc_field(default=None, repr=False)

    @property
    def child_det_bits(self) -> int:
        if self.kind == "rs":
            return self.det_sub
        return self.det_bits - self.det_sub

    @property
    def child_rnd_bits(self) -> int:
        if self.kind == "rs":
            return self.rnd_sub
        return self.rnd_bits - self.rnd_sub

    def _lw_digits(self, vals: np.ndarray, total: int, sub: int) -> list[np.ndarray]:
        d = self.arity
        return [(vals >> ((d - 1 - j) * sub)) & ((1 << sub) - 1) for j in range(d)]

    def encode_part_vec(self, det: np.ndarray, rnd: np.ndarray, u: int):
        """Symbol u of each (det, rnd) message, as a (det, rnd) pair."""
        det = np.asarray(det, dtype=np.int64)
        rnd = np.asarray(rnd, dtype=np.int64)
        if self.kind in ("split", "lw"):
            dd = self._lw_digits(det, self.det_bits, self.det_sub)
            rd = self._lw_digits(rnd, self.rnd_bits, self.rnd_sub)
            if self.kind == "split":
                return dd[u], rd[u]
            keep = [j for j in range(self.arity) if j != u]
            out_d = np.zeros_like(det)
            out_r = np.zeros_like(rnd)
            for j in keep:
                out_d = (out_d << self.det_sub) | dd[j]
                out_r = (out_r << self.rnd_sub) | rd[j]
            return out_d, out_r
        # rs: Horner evaluation of both coefficient vectors at point u
        beta = self._rs_det.points[u]
        out_d = _rs_eval_vec(self._rs_det, det, beta)
        if self.rnd_bits:
            beta_r = self._rs_rnd.points[u]
            out_r = _rs_eval_vec(self._rs_rnd, rnd, beta_r)
        else:
            out_r = np.zeros_like(rnd)
        return out_d, out_r

    def list_recover_pairs(self, child_sets: list[set[tuple[int, int]]],
                           errors: int = 0, rho: float = 0.0) -> list[tuple[int, int]]:
        """Parent (det, rnd) messages consistent with the child symbol sets."""
        if self.kind == "split":
            s0, s1 = child_sets
            out = []
            for d0, r0 in s0:
                for d1, r1 in s1:
                    out.append((
                        (d0 << (self.det_bits - self.det_sub)) | d1,
                        (r0 << (self.rnd_bits - self.rnd_sub)) | r1,
                    ))
            return out
        if self.kind == "lw":
            tuple_sets = []
            for u, s in enumerate(child_sets):
                tuples = set()
                for det_sym, rnd_sym in s:
                    dd = _unpack_digits(det_sym, self.det_sub, self.arity - 1)
                    rd = _unpack_digits(rnd_sym, self.rnd_sub, self.arity - 1)
                    tuples.add(tuple((a << self.rnd_sub) | b for a, b in zip(dd, rd)))
                tuple_sets.append(tuples)
            joined = (lw_join(tuple_sets) if errors == 0
                      else lw_join_tolerant(tuple_sets, errors))
            out = []
            mask = (1 << self.rnd_sub) - 1
            for vec in joined:
                det = rnd = 0
                for c in vec:
                    det = (det << self.det_sub) | (c >> self.rnd_sub)
                    rnd = (rnd << self.rnd_sub) | (c & mask)
                out.append((det, rnd))
            return out
        return _paired_rs_recover(self._rs_det, self._rs_rnd, child_sets, rho)


def _unpack_digits(val: int, sub: int, count: int) -> tuple[int, ...]:
    return tuple((val >> ((count - 1 - j) * sub)) & ((1 << sub) - 1)
                 for j in range(count))


def _rs_eval_vec(code, vals: np.ndarray, beta: int) -> np.ndarray:
    digs = [(vals >> (s * int(math.log2(code.q)))) & (code.q - 1)
            for s in range(code.b)]
    acc = np.zeros_like(vals)
    beta_arr = np.full(vals.shape, beta, dtype=np.int64)
    for c in reversed(digs):
        acc = code.field.add_vec(code.field.mul_vec(acc, beta_arr), c)
    return acc


def _paired_rs_recover(rs_det, rs_rnd, pair_sets, rho: float) -> list[tuple[int, int]]:
    """Joint list recovery of a product of two Reed-Solomon codes that
    share evaluation points: interpolate both halves through every
    b-subset of candidate coordinates."""
    import itertools

    r, b = rs_det.r, rs_det.b
    max_dis = int(math.floor(rho * r + 1e-9))
    need = r - max_dis
    sets = [sorted(s) for s in pair_sets]
    occupied = [i for i in range(r) if sets[i]]
    if len(occupied) < b:
        return []
    lookup = [set(s) for s in sets]
    seen: set[tuple[int, int]] = set()
    out = []
    for coords in itertools.combinations(occupied, b):
        for values in itertools.product(*[sets[c] for c in coords]):
            det_val = rs_det.pack_coefficients(
                rs_det.interpolate(coords, [v[0] for v in values]))
            if rs_rnd is not None:
                rnd_val = rs_rnd.pack_coefficients(
                    rs_rnd.interpolate(coords, [v[1] for v in values]))
            else:
                rnd_val = 0
            key = (det_val, rnd_val)
            if key in seen:
                continue
            seen.add(key)
            cw_d = rs_det.encode(det_val)
            cw_r = rs_rnd.encode(rnd_val) if rs_rnd is not None else [0] * r
            agree = sum((cw_d[i], cw_r[i]) in lookup[i] for i in range(r))
            if agree >= need:
                out.append(key)
    return out


def rs_one_step_combine(lists, code, rho: float, cap: int | None = None) -> list[int]:
    """One recursion step of the Reed-Solomon route: list-recover the r
    per-coordinate identification outputs into a candidate list.

    Loss amplification stays bounded (about 2*zeta/rho) only while the
    per-coordinate failure probability is below (rho/2e)^2; that is a
    configuration concern for the caller, not checked here.
    """
    sets = [set(int(v) for v in lst) for lst in lists]
    out = code.list_recover(sets, rho)
    if cap is not None and len(out) > cap:
        out = sorted(out)[:cap]
    return out


# ---------------------------------------------------------------------------
# the recursion tree
# ---------------------------------------------------------------------------


@dataclass
class RecursiveParams:
    """Knobs for every node's weak layer and the list-recovery caps."""

    k: int
    eta: float = 0.25
    gamma: float = 0.1
    ell: int = 8
    buckets_per_node: int = 0      # 0 -> 8 * k * ell
    s: int = 1                     # identification copies per node
    sign_independence: int = 32
    cap: int = 0                   # 0 -> code-specific provable bound
    lw_errors: int = 0             # error budget for tolerant joins
    rho: float = 0.25              # disagreement tolerance for rs nodes
    max_leaf_domain: int = 1 << 20

    def weak(self) -> WeakParams:
        return WeakParams(k=self.k, gamma=self.gamma, eta=self.eta,
                          ell=self.ell, s=self.s)

    def buckets(self) -> int:
        return self.buckets_per_node or 8 * self.k * self.ell


@dataclass
class _Node:
    node_id: int
    depth: int
    det_in: int                # structural widths delivered by the parent
    rnd_in: int
    det_bits: int              # padded widths used for the packed domain
    rnd_bits: int
    parent: int | None
    children: list[int]
    code: NodeCode | None
    layer: WeakLayer

    @property
    def domain(self) -> int:
        return 1 << (self.det_bits + self.rnd_bits)

    def pack(self, det: np.ndarray, rnd: np.ndarray) -> np.ndarray:
        return (np.asarray(det, dtype=np.int64) << self.rnd_bits) | np.asarray(
            rnd, dtype=np.int64)

    def unpack(self, packed: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        packed = np.asarray(packed, dtype=np.int64)
        return packed >> self.rnd_bits, packed & ((1 << self.rnd_bits) - 1)


class RecursionTree:
    """Complete r-ary identification tree over a shuffled signal domain."""

    def __init__(self, n_signal: int, leaf_target: int, code_kind: str,
                 params: RecursiveParams, seed: int,
                 arity: int = 0, rs_b: int = 2,
                 scheme: str = "scheme2", alpha: float = 0.5,
                 fingerprint_degree: int = 0):
        if n_signal < 2 or n_signal & (n_signal - 1):
            raise UsageError("signal length must be a power of two")
        if code_kind not in ("split", "lw", "rs"):
            raise UsageError(f"unknown code kind {code_kind!r}")
        if code_kind == "split":
            arity = 2
        if code_kind == "lw" and arity < 2:
            raise UsageError("lw code needs arity d >= 2")
        if code_kind == "rs":
            if arity < rs_b + 1:
                raise UsageError("rs code needs r > b")
            if not params.rho < 0.5 * (1 - rs_b / arity) - 1e-12:
                raise UsageError("rho outside the rs unique-decoding regime")
        self.n_signal = n_signal
        self.signal_bits = n_signal.bit_length() - 1
        self.code_kind = code_kind
        self.arity = arity
        self.rs_b = rs_b
        self.params = params
        self.seed = int(seed)
        self.scheme = scheme
        self.alpha = alpha
        self.fingerprint_degree = fingerprint_degree or (2 * params.k + 3)

        if scheme == "scheme2":
            self.mapper = Scheme2Map(self.signal_bits, alpha,
                                     self.fingerprint_degree, self.seed)
            det_in, rnd_in = self.signal_bits, self.mapper.rnd_bits
        elif scheme == "scheme1":
            self.mapper = Scheme1Table(n_signal, self.seed)
            det_in, rnd_in = 2 * self.signal_bits, 0
        elif scheme == "none":
            self.mapper = None
            det_in, rnd_in = self.signal_bits, 0
        else:
            raise UsageError(f"unknown scheme {scheme!r}")

        root_domain = 1 << (det_in + rnd_in)
        self.height, self.node_count = tree_shape(root_domain, leaf_target, arity)
        self.leaf_target = leaf_target
        self.nodes: list[_Node] = []
        self._build(det_in, rnd_in)

    # -- construction --

    def _pad_for_code(self, det_in: int, rnd_in: int) -> tuple[int, int, int, int]:
        """Padded widths plus per-symbol sub-widths for this node's code."""
        d = self.arity
        if self.code_kind in ("split", "lw"):
            det = _pad_up(det_in, d)
            rnd = _pad_up(rnd_in, d)
            return det, rnd, det // d, rnd // d
        b = self.rs_b
        min_det = b * max(1, (self.arity - 1).bit_length())
        det = max(_pad_up(det_in, b), min_det)
        rnd = _pad_up(rnd_in, b)
        if rnd and rnd // b > 0 and (1 << (rnd // b)) < self.arity:
            rnd = b * max(1, (self.arity - 1).bit_length())
        return det, rnd, det // b, rnd // b

    def _make_code(self, det_bits, rnd_bits, det_sub, rnd_sub) -> NodeCode:
        code = NodeCode(kind=self.code_kind, arity=self.arity,
                        det_bits=det_bits, rnd_bits=rnd_bits,
                        det_sub=det_sub, rnd_sub=rnd_sub, rs_b=self.rs_b)
        if self.code_kind == "rs":
            code._rs_det = RSCode(FieldSpec.binary(det_sub), b=self.rs_b,
                                  r=self.arity)
            code._rs_rnd = (RSCode(FieldSpec.binary(rnd_sub), b=self.rs_b,
                                   r=self.arity) if rnd_bits else None)
        return code

    def _build(self, root_det_in: int, root_rnd_in: int):
        pending = [(0, None, root_det_in, root_rnd_in)]
        while pending:
            depth, parent, det_in, rnd_in = pending.pop(0)
            node_id = len(self.nodes)
            internal = depth < self.height
            if internal:
                det_bits, rnd_bits, det_sub, rnd_sub = self._pad_for_code(det_in, rnd_in)
                code = self._make_code(det_bits, rnd_bits, det_sub, rnd_sub)
            else:
                det_bits, rnd_bits, code = det_in, rnd_in, None
                if 1 << (det_bits + rnd_bits) > self.params.max_leaf_domain:
                    raise InfeasibleError(
                        f"leaf domain 2^{det_bits + rnd_bits} exceeds the "
                        f"scan guard; raise the leaf target or the guard"
                    )
            layer = WeakLayer(
                params=self.params.weak(),
                domain=1 << (det_bits + rnd_bits),
                n_buckets=self.params.buckets(),
                seed=derive_seed(self.seed, f"node/{node_id}"),
                sign_independence=self.params.sign_independence,
            )
            node = _Node(node_id=node_id, depth=depth, det_in=det_in,
                         rnd_in=rnd_in, det_bits=det_bits, rnd_bits=rnd_bits,
                         parent=parent, children=[], code=code, layer=layer)
            self.nodes.append(node)
            if parent is not None:
                self.nodes[parent].children.append(node_id)
            if internal:
                for _ in range(self.arity):
                    pending.append((depth + 1, node_id,
                                    code.child_det_bits, code.child_rnd_bits))
        assert len(self.nodes) == self.node_count

    # -- coordinate maps --

    def map_signal(self, indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(det, rnd) image of signal indices under the shuffling scheme."""
        idx = np.asarray(indices, dtype=np.int64)
        if self.scheme == "scheme2":
            return self.mapper.forward(idx)
        if self.scheme == "scheme1":
            return self.mapper.forward(idx), np.zeros(idx.shape, dtype=np.int64)
        return idx, np.zeros(idx.shape, dtype=np.int64)

    def node_images(self, indices: np.ndarray) -> dict[int, np.ndarray]:
        """Packed phi_v image of the given signal indices at every node."""
        det, rnd = self.map_signal(indices)
        parts = {0: (det, rnd)}
        out = {0: self.nodes[0].pack(det, rnd)}
        for node in self.nodes:
            if not node.children:
                continue
            det_v, rnd_v = parts[node.node_id]
            for u, child_id in enumerate(node.children):
                cd, cr = node.code.encode_part_vec(det_v, rnd_v, u)
                parts[child_id] = (cd, cr)
                out[child_id] = self.nodes[child_id].pack(cd, cr)
        return out

    def phi(self, node_id: int, root_values: np.ndarray) -> np.ndarray:
        """Symbol of each packed root-domain value at the given node
        (identity at the root)."""
        if not 0 <= node_id < self.node_count:
            raise UsageError(f"unknown node {node_id}")
        root = self.nodes[0]
        det, rnd = root.unpack(np.asarray(root_values, dtype=np.int64))
        path = []
        nid = node_id
        while nid != 0:
            parent = self.nodes[nid].parent
            path.append((parent, self.nodes[parent].children.index(nid)))
            nid = parent
        for parent, u in reversed(path):
            det, rnd = self.nodes[parent].code.encode_part_vec(det, rnd, u)
        target = self.nodes[node_id]
        return target.pack(det, rnd)

    # -- encoding --

    @property
    def measurement_count(self) -> int:
        return sum(node.layer.measurement_count for node in self.nodes)

    def encode_sparse(self, indices: np.ndarray, values: np.ndarray) -> list[list[np.ndarray]]:
        images = self.node_images(indices)
        return [node.layer.encode_sparse(images[node.node_id], values)
                for node in self.nodes]

    def encode(self, x: np.ndarray) -> list[list[np.ndarray]]:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n_signal,):
            raise UsageError(f"expected signal of length {self.n_signal}")
        nz = np.flatnonzero(x)
        return self.encode_sparse(nz, x[nz])

    # -- identification --

    def identify(self, sketches: list[list[np.ndarray]],
                 instrument_support: np.ndarray | None = None):
        """Candidate signal indices, leaves first.

        With instrument_support (the planted heavy indices), the returned
        diagnostics record, per node, the planted images alive in the
        candidate input but missing from the node's output list.
        """
        truth = None
        if instrument_support is not None:
            truth = self.node_images(np.asarray(instrument_support, dtype=np.int64))
        lists: dict[int, np.ndarray] = {}
        diagnostics = []
        for node in sorted(self.nodes, key=lambda v: -v.depth):
            if node.children:
                child_sets = []
                for child_id in node.children:
                    child = self.nodes[child_id]
                    vals = lists[child_id]
                    det, rnd = child.unpack(vals)
                    ok = (det < (1 << child.det_in)) & (rnd < (1 << child.rnd_in))
                    child_sets.append(
                        set(zip(det[ok].tolist(), rnd[ok].tolist()))
                    )
                pairs = node.code.list_recover_pairs(
                    child_sets, errors=self.params.lw_errors,
                    rho=self.params.rho if self.code_kind == "rs" else 0.0)
                cand = np.unique(node.pack(
                    np.array([p[0] for p in pairs], dtype=np.int64),
                    np.array([p[1] for p in pairs], dtype=np.int64),
                )) if pairs else np.zeros(0, dtype=np.int64)
                cap = self.params.cap or self._default_cap()
                truncated = 0
                if cand.size > cap:
                    truncated = cand.size - cap
                    cand = cand[:cap]
                    warnings.warn(
                        f"node {node.node_id}: list recovery returned "
                        f"{cand.size + truncated} candidates, truncated to {cap} "
                        f"(counts as identification loss)",
                        stacklevel=2,
                    )
            else:
                cand = np.arange(node.domain, dtype=np.int64)
                truncated = 0
            found = node.layer.identify(sketches[node.node_id], cand)
            lists[node.node_id] = found
            record = {
                "node": node.node_id,
                "depth": node.depth,
                "candidates": int(cand.size),
                "truncated": truncated,
            }
            if truth is not None:
                alive = np.unique(truth[node.node_id])
                lost = np.setdiff1d(alive, found)
                present = (alive if not node.children
                           else np.intersect1d(alive, cand))
                record.update({
                    "planted_in_candidates": int(present.size),
                    "planted_lost_here": [int(v) for v in np.setdiff1d(present, found)],
                    "planted_missing_after": [int(v) for v in lost],
                })
            diagnostics.append(record)
        root = self.nodes[0]
        det, rnd = root.unpack(lists[0])
        if self.scheme == "scheme2":
            out = self.mapper.invert(det, rnd, self.n_signal)
            dropped = 0
        elif self.scheme == "scheme1":
            out, dropped = self.mapper.invert(lists[0])
        else:
            keep = det < self.n_signal
            out, dropped = np.unique(det[keep]), 0
        info = {"nodes": diagnostics, "inversion_dropped": dropped}
        return out, info

    def _default_cap(self) -> int:
        ell_in = 2 * self.params.weak().ident_count
        if self.code_kind == "rs":
            return ell_in**self.arity
        d = self.arity
        return math.ceil((d - 1) * ell_in ** (d / (d - 1)))

    def randomness_shares(self) -> list[tuple[int, int, int]]:
        """(node_id, det_bits, rnd_bits) for the structural share check."""
        return [(v.node_id, v.det_bits, v.rnd_bits) for v in self.nodes]

    def to_params(self) -> dict:
        return {
            "n_signal": self.n_signal,
            "leaf_target": self.leaf_target,
            "code_kind": self.code_kind,
            "arity": self.arity,
            "rs_b": self.rs_b,
            "scheme": self.scheme,
            "alpha": self.alpha,
            "fingerprint_degree": self.fingerprint_degree,
            "seed": self.seed,
            "params": self.params.__dict__.copy(),
        }

    @staticmethod
    def from_params(blob: dict) -> "RecursionTree":
        params = RecursiveParams(**blob["params"])
        return RecursionTree(
            n_signal=blob["n_signal"], leaf_target=blob["leaf_target"],
            code_kind=blob["code_kind"], params=params, seed=blob["seed"],
            arity=blob["arity"], rs_b=blob["rs_b"], scheme=blob["scheme"],
            alpha=blob["alpha"], fingerprint_degree=blob["fingerprint_degree"],
        )


def build_tree(n_signal: int, leaf_target: int, code_kind: str,
               params: RecursiveParams, seed: int, **kwargs) -> RecursionTree:
    return RecursionTree(n_signal, leaf_target, code_kind, params, seed, **kwargs)


def phi_map(tree: RecursionTree, node_id: int, root_values) -> np.ndarray:
    return tree.phi(node_id, np.asarray(root_values))


def recursive_identify(tree: RecursionTree, sketches, **kwargs):
    return tree.identify(sketches, **kwargs)


def invert_indices(mapped, scheme_obj, n_signal: int | None = None):
    """Dispatch inversion for either scheme; scheme2 needs (det, rnd)."""
    if isinstance(scheme_obj, Scheme1Table):
        return scheme_obj.invert(mapped)
    if isinstance(scheme_obj, Scheme2Map):
        det, rnd = mapped
        return scheme_obj.invert(det, rnd, n_signal), 0
    raise UsageError("unknown inversion scheme")
