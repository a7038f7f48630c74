"""Limited-independence hash families via random polynomials.

A uniformly random degree-d polynomial over a field, evaluated at
distinct points, is (d+1)-wise independent.  PolyHash stores one such
polynomial; SignFamily turns a PolyHash into reproducible +-1 values on
(left vertex, bucket) pairs by keeping one output bit.

Sign evaluation sits on the hot path of every sketch, so SignFamily
defaults to a Mersenne-prime backing field (2^31-1, or 2^61-1 for large
pair domains) where Horner's rule vectorizes over numpy integer arrays.
The one kept bit of a uniform field element carries bias < 2^-31, far
below anything the estimators can see.
"""

from __future__ import annotations

import numpy as np

from sparserec.errors import InfeasibleError, UsageError
from sparserec.fields import FieldSpec
from sparserec.seeds import counter_stream, derive_seed

_M31 = (1 << 31) - 1
_M61 = (1 << 61) - 1
_P61 = np.uint64(_M61)


def _m61_mul_vec(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a * b) mod 2^61-1 on uint64 arrays, values < 2^61-1."""
    mask32 = np.uint64(0xFFFFFFFF)
    a0, a1 = a & mask32, a >> np.uint64(32)
    b0, b1 = b & mask32, b >> np.uint64(32)
    hi = a1 * b1
    mid = a1 * b0 + a0 * b1
    lo = a0 * b0
    s = (hi << np.uint64(3)) + (mid >> np.uint64(29))
    s += (mid & np.uint64(0x1FFFFFFF)) << np.uint64(32)
    s += (lo >> np.uint64(61)) + (lo & _P61)
    s = (s >> np.uint64(61)) + (s & _P61)
    s = (s >> np.uint64(61)) + (s & _P61)
    return np.where(s >= _P61, s - _P61, s)


def _m61_fold(s: np.ndarray) -> np.ndarray:
    s = (s >> np.uint64(61)) + (s & _P61)
    return np.where(s >= _P61, s - _P61, s)


class PolyHash:
    """A fixed polynomial over a field, evaluated by Horner's rule.

    coefficients[j] multiplies x^j.  Drawn uniformly, a degree-d instance
    is (d+1)-wise independent over its evaluation points.
    """

    def __init__(self, field: FieldSpec, coefficients, domain_size: int):
        if domain_size > field.q:
            raise UsageError("domain does not embed in the field")
        self.field = field
        self.coefficients = tuple(int(c) % field.q for c in coefficients)
        if not self.coefficients:
            raise UsageError("need at least one coefficient")
        self.domain_size = domain_size

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @staticmethod
    def from_seed(field: FieldSpec, degree: int, domain_size: int, seed: int) -> "PolyHash":
        idx = np.arange(degree + 1, dtype=np.uint64)
        raw = counter_stream(seed, idx)
        coeffs = [int(v) % field.q for v in raw]
        return PolyHash(field, coeffs, domain_size)

    def eval(self, i: int) -> int:
        if not 0 <= i < self.domain_size:
            raise UsageError(f"point {i} outside domain [0, {self.domain_size})")
        f = self.field
        acc = 0
        for c in reversed(self.coefficients):
            acc = f.add(f.mul(acc, i) if acc else 0, c)
        return acc

    def eval_vec(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized Horner evaluation; xs must lie in the domain."""
        f = self.field
        if f.kind == "prime" and f.q == _M61:
            x = xs.astype(np.uint64)
            acc = np.full(x.shape, self.coefficients[-1], dtype=np.uint64)
            for c in reversed(self.coefficients[:-1]):
                acc = _m61_fold(_m61_mul_vec(acc, x) + np.uint64(c))
            return acc.astype(np.int64)
        if f.kind == "prime" and f.q <= _M31 + 1:
            x = xs.astype(np.int64)
            acc = np.full(x.shape, self.coefficients[-1], dtype=np.int64)
            for c in reversed(self.coefficients[:-1]):
                acc = (acc * x + c) % f.q
            return acc
        if f.kind == "binary" and f._log is not None:
            x = xs.astype(np.int64)
            acc = np.full(x.shape, self.coefficients[-1], dtype=np.int64)
            for c in reversed(self.coefficients[:-1]):
                acc = f.mul_vec(acc, x) ^ c
            return acc
        return np.array([self.eval(int(v)) for v in np.ravel(xs)], dtype=np.int64).reshape(
            np.shape(xs)
        )


def kwise_eval(h: PolyHash, i: int) -> int:
    return h.eval(i)


class SignFamily:
    """Reproducible +-1 values on (left vertex, bucket) index pairs.

    independence is the target wise-independence t; the backing
    polynomial has degree t-1 over a Mersenne-prime field large enough
    to embed the pair domain injectively.
    """

    def __init__(self, seed: int, independence: int, n_left: int, n_buckets: int,
                 field: FieldSpec | None = None):
        if independence < 1:
            raise UsageError("independence degree must be >= 1")
        self.seed = int(seed)
        self.independence = independence
        self.n_left = n_left
        self.n_buckets = n_buckets
        pairs = n_left * n_buckets
        if field is None:
            if pairs <= _M31:
                field = FieldSpec.prime(_M31)
            elif pairs <= _M61:
                field = FieldSpec.prime(_M61)
            else:
                raise InfeasibleError("pair domain exceeds 2^61-1")
        elif field.q < pairs:
            raise UsageError("explicit field too small for the pair domain")
        self.hash = PolyHash.from_seed(field, independence - 1, pairs, derive_seed(seed, "signs"))

    def sign(self, i: int, j: int) -> int:
        if not (0 <= i < self.n_left and 0 <= j < self.n_buckets):
            raise UsageError("pair outside the declared index domain")
        return 1 - 2 * (self.hash.eval(i * self.n_buckets + j) & 1)

    def sign_vec(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """Vectorized signs as float64 (+1.0 / -1.0)."""
        pair = i.astype(np.uint64) * np.uint64(self.n_buckets) + j.astype(np.uint64)
        bits = self.hash.eval_vec(pair).astype(np.int64) & 1
        return 1.0 - 2.0 * bits


def sign_eval(family: SignFamily, i: int, j: int) -> int:
    return family.sign(i, j)
