"""Finite field arithmetic: prime fields GF(q) and binary extensions GF(2^w).

Binary fields use one fixed irreducible polynomial per width, taken from
the standard low-weight table (trinomials / pentanomials), so element
representations are bit-exact across runs.  Widths up to 16 get log/exp
tables and vectorized numpy multiplication; wider fields fall back to
carry-less arithmetic on Python ints.
"""

from __future__ import annotations

import numpy as np

from sparserec.errors import InfeasibleError, UsageError

# Middle-term exponents of the lowest-weight irreducible polynomial
# x^w + x^k1 [+ x^k2 + x^k3] + 1 for each width w.
_LOW_WEIGHT_TAPS = {
    1: (), 2: (1,), 3: (1,), 4: (1,), 5: (2,), 6: (1,), 7: (1,),
    8: (4, 3, 1), 9: (1,), 10: (3,), 11: (2,), 12: (3,), 13: (4, 3, 1),
    14: (5,), 15: (1,), 16: (5, 3, 1), 17: (3,), 18: (3,), 19: (5, 2, 1),
    20: (3,), 21: (2,), 22: (1,), 23: (5,), 24: (4, 3, 1), 25: (3,),
    26: (4, 3, 1), 27: (5, 2, 1), 28: (1,), 29: (2,), 30: (1,), 31: (3,),
    32: (7, 3, 2), 33: (10,), 34: (7,), 35: (2,), 36: (9,), 37: (6, 4, 1),
    38: (6, 5, 1), 39: (4,), 40: (5, 4, 3), 41: (3,), 42: (7,),
    43: (6, 4, 3), 44: (5,), 45: (4, 3, 1), 46: (1,), 47: (5,),
    48: (5, 3, 2), 49: (9,), 50: (4, 3, 2), 51: (6, 3, 1), 52: (3,),
    53: (6, 2, 1), 54: (9,), 55: (7,), 56: (7, 4, 2), 57: (4,),
    58: (19,), 59: (7, 4, 2), 60: (1,), 61: (5, 2, 1), 62: (29,),
    63: (1,), 64: (4, 3, 1),
}


def irreducible_poly(width: int) -> int:
    """Bitmask of the fixed irreducible polynomial for GF(2^width)."""
    if width not in _LOW_WEIGHT_TAPS:
        raise InfeasibleError(f"no irreducible polynomial tabulated for width {width}")
    mask = (1 << width) | 1
    for k in _LOW_WEIGHT_TAPS[width]:
        mask |= 1 << k
    return mask


# --- polynomial-over-GF(2) helpers (bitmask representation) ---

def _pm_mulmod(a: int, b: int, f: int) -> int:
    deg = f.bit_length() - 1
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> deg & 1:
            a ^= f
    return r


def _pm_powmod_x(e: int, f: int) -> int:
    """x^(2^e) mod f by repeated squaring."""
    r = 0b10  # x
    for _ in range(e):
        r = _pm_mulmod(r, r, f)
    return r


def _pm_gcd(a: int, b: int) -> int:
    while b:
        if a.bit_length() < b.bit_length():
            a, b = b, a
        while a.bit_length() >= b.bit_length() and a:
            a ^= b << (a.bit_length() - b.bit_length())
        a, b = b, a
    return a


def is_irreducible(f: int) -> bool:
    """Rabin's test for a GF(2)[x] polynomial given as a bitmask."""
    n = f.bit_length() - 1
    if n <= 0:
        return False
    if n == 1:
        return True
    if _pm_powmod_x(n, f) != 0b10:
        return False
    m = n
    primes = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            primes.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        primes.append(m)
    for p in primes:
        h = _pm_powmod_x(n // p, f) ^ 0b10
        if _pm_gcd(h if h else f, f) != 1:
            return False
    return True


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    # deterministic Miller-Rabin for 64-bit range
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


_TABLE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _tables_for_width(width: int, poly: int):
    """log/exp tables for GF(2^width), keyed by a generator orbit."""
    if width in _TABLE_CACHE:
        return _TABLE_CACHE[width]
    q = 1 << width
    exp = np.zeros(max(2 * (q - 1), 2), dtype=np.int64)
    log = np.zeros(q, dtype=np.int64)
    if q == 2:
        exp[:] = 1
        log[1] = 0
    else:
        for g in range(2, q):
            x = 1
            ok = True
            for i in range(q - 1):
                if x == 1 and i > 0:
                    ok = False  # order of g divides i < q-1
                    break
                exp[i] = x
                log[x] = i
                x = _pm_mulmod(x, g, poly)
            if ok:
                break
        exp[q - 1 : 2 * (q - 1)] = exp[: q - 1]
    _TABLE_CACHE[width] = (exp, log)
    return exp, log


class FieldSpec:
    """A finite field: kind 'prime' (modulus q) or 'binary' (GF(2^w)).

    Elements are plain ints in [0, q).  All operations validate range;
    inversion of zero raises UsageError.
    """

    def __init__(self, kind: str, q: int, width: int = 0, poly: int = 0):
        self.kind = kind
        self.q = q
        self.width = width
        self.poly = poly
        self._log = None
        self._exp = None
        if kind == "binary" and width <= 16:
            self._build_tables()

    # -- constructors --

    @staticmethod
    def prime(q: int) -> "FieldSpec":
        if not _is_prime(q):
            raise UsageError(f"{q} is not prime")
        return FieldSpec("prime", q)

    @staticmethod
    def binary(width: int) -> "FieldSpec":
        if not 1 <= width <= 64:
            raise InfeasibleError("binary field width must be in 1..64")
        return FieldSpec("binary", 1 << width, width, irreducible_poly(width))

    @staticmethod
    def of_size(q: int) -> "FieldSpec":
        """Field of size q: prime q, or 2^w for q a power of two."""
        if q >= 2 and q & (q - 1) == 0:
            return FieldSpec.binary(q.bit_length() - 1)
        return FieldSpec.prime(q)

    def _build_tables(self):
        self._exp, self._log = _tables_for_width(self.width, self.poly)

    # -- scalar arithmetic --

    def _check(self, *vals: int):
        for v in vals:
            if not 0 <= v < self.q:
                raise UsageError(f"element {v} outside [0, {self.q})")

    def add(self, a: int, b: int) -> int:
        self._check(a, b)
        if self.kind == "prime":
            return (a + b) % self.q
        return a ^ b

    def sub(self, a: int, b: int) -> int:
        self._check(a, b)
        if self.kind == "prime":
            return (a - b) % self.q
        return a ^ b

    def neg(self, a: int) -> int:
        self._check(a)
        if self.kind == "prime":
            return (-a) % self.q
        return a

    def mul(self, a: int, b: int) -> int:
        self._check(a, b)
        if self.kind == "prime":
            return a * b % self.q
        if self._log is not None:
            if a == 0 or b == 0:
                return 0
            return int(self._exp[self._log[a] + self._log[b]])
        return _pm_mulmod(a, b, self.poly)

    def inv(self, a: int) -> int:
        self._check(a)
        if a == 0:
            raise UsageError("inversion of zero")
        if self.kind == "prime":
            return pow(a, self.q - 2, self.q)
        if self._log is not None:
            return int(self._exp[(self.q - 1) - self._log[a]])
        return self.pow(a, self.q - 2)

    def pow(self, a: int, e: int) -> int:
        self._check(a)
        r, base = 1, a
        while e:
            if e & 1:
                r = self.mul(r, base)
            base = self.mul(base, base)
            e >>= 1
        return r

    def arith(self, a: int, b: int, op: str) -> int:
        """Dispatch form: op in {'add', 'mul', 'inv'} (inv ignores b)."""
        if op == "add":
            return self.add(a, b)
        if op == "mul":
            return self.mul(a, b)
        if op == "inv":
            return self.inv(a)
        raise UsageError(f"unknown field op {op!r}")

    # -- vectorized arithmetic on int64 numpy arrays --

    def add_vec(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.kind == "prime":
            return (a + b) % self.q
        return a ^ b

    def mul_vec(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.kind == "prime":
            if self.q <= (1 << 31):
                return a * b % self.q
            return np.array(
                [x * y % self.q for x, y in zip(a.tolist(), b.tolist())],
                dtype=object,
            )
        if self._log is not None:
            out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
            nz = (a != 0) & (b != 0)
            av, bv = np.broadcast_arrays(a, b)
            out[nz] = self._exp[self._log[av[nz]] + self._log[bv[nz]]]
            return out
        av, bv = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        flat = [_pm_mulmod(int(x), int(y), self.poly) for x, y in zip(av.ravel(), bv.ravel())]
        return np.array(flat, dtype=np.int64).reshape(av.shape)

    def __eq__(self, other):
        return (
            isinstance(other, FieldSpec)
            and (self.kind, self.q, self.poly) == (other.kind, other.q, other.poly)
        )

    def __repr__(self):
        if self.kind == "prime":
            return f"GF({self.q})"
        return f"GF(2^{self.width})"


def field_arith(field: FieldSpec, a: int, b: int, op: str) -> int:
    return field.arith(a, b, op)
