"""Arithmetic in F_q, q = p^k.

An element is stored as its canonical integer: the polynomial residue
c_0 + c_1 x + ... + c_{k-1} x^{k-1} is encoded as sum(c_i * p**i).  The
modulus is the smallest monic irreducible of degree k when the monic
polynomials are ordered by that same integer encoding of their low
coefficients.  This is *not* the Conway polynomial, so encodings do not
match systems that use Conway tables.

Every arithmetic method of :class:`FieldSpec` accepts either a Python int
or an integer numpy array and returns the same kind.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    BadModulus,
    DegreeOutOfRange,
    DivisionByZero,
    FieldMismatch,
    FieldTooLarge,
    NonPrime,
)

FIELD_CAP = 1 << 20
PAIR_TABLE_Q = 1024  # largest q given full q x q add/mul tables


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    # deterministic Miller-Rabin for n < 3.3e24
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        if a % n == 0:
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def prime_power(q: int) -> tuple[int, int]:
    """Split q into (p, k) with q = p**k, or raise NonPrime."""
    if q < 2:
        raise NonPrime(f"{q} is not a prime power")
    p = prime_factors(q)[0]
    k = 0
    n = q
    while n % p == 0:
        n //= p
        k += 1
    if n != 1:
        raise NonPrime(f"{q} is not a prime power")
    return p, k


def prime_powers_upto(n: int) -> list[int]:
    return [q for q in range(2, n + 1) if len(prime_factors(q)) == 1]


# -- polynomials over F_p, coefficient lists low degree first ---------------

def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a = _poly_trim([c % p for c in a])
    b = _poly_trim([c % p for c in b])
    inv_lead = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        c = a[-1] * inv_lead % p
        shift = len(a) - len(b)
        for i, bc in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bc) % p
        _poly_trim(a)
    return a


def _monic_polys(degree: int, p: int):
    for low in range(p ** degree):
        coeffs = []
        for _ in range(degree):
            coeffs.append(low % p)
            low //= p
        yield coeffs + [1]


def is_irreducible(coeffs: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg/2."""
    coeffs = _poly_trim([c % p for c in coeffs])
    deg = len(coeffs) - 1
    if deg < 1:
        return False
    if deg == 1:
        return True
    for fdeg in range(1, deg // 2 + 1):
        for f in _monic_polys(fdeg, p):
            if not _poly_mod(coeffs, f, p):
                return False
    return True


def canonical_modulus(p: int, k: int) -> tuple[int, ...]:
    for poly in _monic_polys(k, p):
        if is_irreducible(poly, p):
            return tuple(poly)
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


def format_poly(coeffs: Sequence[int], var: str = "x") -> str:
    terms = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if c == 0:
            continue
        mono = "1" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if i == 0:
            terms.append(str(c))
        else:
            terms.append(mono if c == 1 else f"{c}{mono}")
    return " + ".join(terms) if terms else "0"


class KernelTables(NamedTuple):
    """Flat lookup tables handed to the counting kernels."""

    p: int
    k: int
    q: int
    pw: np.ndarray
    sq: np.ndarray
    neg: np.ndarray
    log: np.ndarray
    exp: np.ndarray
    add: np.ndarray  # q x q int32 tables, shape (0, 0) when q > PAIR_TABLE_Q
    mul: np.ndarray
    subsq: np.ndarray  # subsq[a, b] = (a - b)^2


@dataclass(frozen=True)
class FieldSpec:
    """F_{p^k} with a fixed monic irreducible modulus.

    Construct through :func:`make_field` for the canonical modulus, or
    directly with an explicit modulus (validated).
    """

    p: int
    k: int
    modulus: tuple[int, ...]

    def __post_init__(self):
        if not is_prime(self.p):
            raise NonPrime(f"p={self.p} is not prime")
        if self.k < 1:
            raise DegreeOutOfRange(f"k={self.k} must be >= 1")
        mod = tuple(int(c) for c in self.modulus)
        object.__setattr__(self, "modulus", mod)
        if len(mod) != self.k + 1 or mod[-1] != 1 or any(not 0 <= c < self.p for c in mod):
            raise BadModulus(f"modulus {mod} is not monic of degree {self.k} over F_{self.p}")
        if not is_irreducible(mod, self.p):
            raise BadModulus(f"modulus {format_poly(mod)} is reducible over F_{self.p}")

    @property
    def q(self) -> int:
        return self.p ** self.k

    def __repr__(self) -> str:
        return f"FieldSpec(p={self.p}, k={self.k}, modulus={format_poly(self.modulus)})"

    def __call__(self, value: int) -> "FieldElement":
        return self.element(value)

    def element(self, value: int) -> "FieldElement":
        return FieldElement(self, int(value))

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    # -- tables ------------------------------------------------------------

    @cached_property
    def pw(self) -> np.ndarray:
        return np.array([self.p ** i for i in range(self.k)], dtype=np.int64)

    def _digits(self, a: np.ndarray) -> np.ndarray:
        return (a[..., None] // self.pw) % self.p

    def _mul_slow(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Schoolbook polynomial product reduced by the modulus (vectorised)."""
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        p, k = self.p, self.k
        if k == 1:
            return (a * b) % p
        da, db = self._digits(a), self._digits(b)
        prod = np.zeros(a.shape + (2 * k - 1,), dtype=np.int64)
        for i in range(k):
            for j in range(k):
                prod[..., i + j] += da[..., i] * db[..., j]
        prod %= p
        low = self.modulus[:k]
        for deg in range(2 * k - 2, k - 1, -1):
            c = prod[..., deg]
            for i, m in enumerate(low):
                if m:
                    prod[..., deg - k + i] = (prod[..., deg - k + i] - c * m) % p
        return prod[..., :k] @ self.pw

    @cached_property
    def primitive_element(self) -> int:
        q = self.q
        if q == 2:
            return 1
        order = q - 1
        factors = prime_factors(order)
        for g in range(2, q):
            if all(self._pow_slow(g, order // r) != 1 for r in factors):
                return g
        raise AssertionError("multiplicative group not cyclic")  # pragma: no cover

    def _pow_slow(self, a: int, e: int) -> int:
        result = np.int64(1)
        base = np.int64(a)
        while e:
            if e & 1:
                result = self._mul_slow(result, base)
            base = self._mul_slow(base, base)
            e >>= 1
        return int(result)

    @cached_property
    def _exp_log(self) -> tuple[np.ndarray, np.ndarray]:
        q = self.q
        n = q - 1
        g = self.primitive_element
        block = math.isqrt(n) + 1
        first = np.empty(block, dtype=np.int64)
        cur = np.int64(1)
        for i in range(block):
            first[i] = cur
            cur = self._mul_slow(cur, np.int64(g))
        step = int(cur)
        chunks = [first]
        total = block
        while total < n:
            chunks.append(self._mul_slow(chunks[-1], np.int64(step)))
            total += block
        powers = np.concatenate(chunks)[:n]
        exp = np.concatenate([powers, powers, powers[:1]])
        log = np.full(q, -1, dtype=np.int64)
        log[powers] = np.arange(n, dtype=np.int64)
        return exp, log

    @property
    def exp_table(self) -> np.ndarray:
        return self._exp_log[0]

    @property
    def log_table(self) -> np.ndarray:
        return self._exp_log[1]

    @cached_property
    def sq_table(self) -> np.ndarray:
        x = self.elements()
        return self.mul(x, x)

    @cached_property
    def neg_table(self) -> np.ndarray:
        return self.neg(self.elements())

    @cached_property
    def trace_table(self) -> np.ndarray:
        x = self.elements()
        if self.k == 1:
            return x.copy()
        exp, log = self._exp_log
        n = self.q - 1
        acc = x.copy()
        nz = x != 0
        for i in range(1, self.k):
            frob = np.zeros_like(x)
            frob[nz] = exp[(log[nz] * (self.p ** i)) % n]
            acc = self.add(acc, frob)
        if acc.max() >= self.p:
            raise AssertionError("trace left the prime subfield")
        return acc

    @cached_property
    def roots_of_unity(self) -> np.ndarray:
        return np.exp(2j * np.pi * np.arange(self.p) / self.p)

    @cached_property
    def _pair_tables(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self.q > PAIR_TABLE_Q:
            empty = np.zeros((0, 0), dtype=np.int32)
            return empty, empty, empty
        x = self.elements()
        add = self.add(x[:, None], x[None, :]).astype(np.int32)
        mul = self.mul(x[:, None], x[None, :]).astype(np.int32)
        subsq = self.sq_table[add[:, self.neg_table]].astype(np.int32)
        for t in (add, mul, subsq):
            t.setflags(write=False)
        return add, mul, subsq

    def kernel_tables(self) -> KernelTables:
        if self.k == 1:
            log = exp = np.zeros(1, dtype=np.int64)
        else:
            exp, log = self._exp_log
        return KernelTables(self.p, self.k, self.q, self.pw, self.sq_table, self.neg_table, log, exp,
                            *self._pair_tables)

    # -- arithmetic --------------------------------------------------------

    def _check(self, a):
        arr = np.asarray(a, dtype=np.int64)
        if arr.size and (arr.min() < 0 or arr.max() >= self.q):
            raise ValueError(f"value out of range for F_{self.q}")
        return arr

    @staticmethod
    def _out(arr: np.ndarray, *inputs):
        if all(np.ndim(x) == 0 and not isinstance(x, np.ndarray) for x in inputs):
            return int(arr)
        return arr

    def add(self, a, b):
        x, y = self._check(a), self._check(b)
        if self.k == 1:
            r = (x + y) % self.p
        else:
            r = ((self._digits(x) + self._digits(y)) % self.p) @ self.pw
        return self._out(r, a, b)

    def neg(self, a):
        x = self._check(a)
        if self.k == 1:
            r = (-x) % self.p
        else:
            r = ((-self._digits(x)) % self.p) @ self.pw
        return self._out(r, a)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        x, y = self._check(a), self._check(b)
        if self.k == 1:
            r = (x * y) % self.p
        else:
            exp, log = self._exp_log
            x, y = np.broadcast_arrays(x, y)
            r = np.zeros(x.shape, dtype=np.int64)
            nz = (x != 0) & (y != 0)
            r[nz] = exp[log[x[nz]] + log[y[nz]]]
        return self._out(r, a, b)

    def inv(self, a):
        x = self._check(a)
        if np.any(x == 0):
            raise DivisionByZero("zero has no inverse")
        exp, log = self._exp_log
        r = exp[(self.q - 1 - log[x]) % (self.q - 1)]
        return self._out(r, a)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e: int):
        x = self._check(a)
        if e < 0:
            x = np.asarray(self.inv(x))
            e = -e
        if e == 0:
            r = np.ones_like(x)
        else:
            exp, log = self._exp_log
            r = np.zeros_like(x)
            nz = x != 0
            r[nz] = exp[(log[x[nz]] * e) % (self.q - 1)]
        return self._out(r, a)

    def square(self, a):
        x = self._check(a)
        return self._out(self.sq_table[x], a)

    def trace(self, a):
        x = self._check(a)
        return self._out(self.trace_table[x], a)

    def chi(self, a):
        """Principal additive character exp(2*pi*i*tr(a)/p)."""
        x = self._check(a)
        r = self.roots_of_unity[self.trace_table[x]]
        if np.ndim(a) == 0 and not isinstance(a, np.ndarray):
            return complex(r)
        return r

    def from_int(self, n: int) -> int:
        """Image of the integer n under Z -> F_p -> F_q."""
        return n % self.p

    def sqrt_minus_one(self) -> int | None:
        target = self.neg(1)
        hits = np.flatnonzero(self.sq_table == target)
        return int(hits[0]) if hits.size else None

    def describe(self) -> dict:
        return {
            "p": self.p,
            "k": self.k,
            "q": self.q,
            "modulus": list(self.modulus),
            "modulus_str": format_poly(self.modulus),
        }


@lru_cache(maxsize=None)
def _make_field(p: int, k: int) -> FieldSpec:
    return FieldSpec(p, k, canonical_modulus(p, k))


def make_field(p: int, k: int = 1, cap: int = FIELD_CAP) -> FieldSpec:
    """Return F_{p^k} with its canonical modulus.

    Raises NonPrime, DegreeOutOfRange or FieldTooLarge.
    """
    if not is_prime(p):
        raise NonPrime(f"p={p} is not prime")
    if k < 1:
        raise DegreeOutOfRange(f"k={k} must be >= 1")
    if p ** k > cap:
        raise FieldTooLarge(f"q={p}^{k} exceeds cap {cap}")
    return _make_field(p, k)


def field_of_order(q: int, cap: int = FIELD_CAP) -> FieldSpec:
    p, k = prime_power(q)
    return make_field(p, k, cap)


class FieldElement:
    """A value of F_q bound to its field; supports the usual operators."""

    __slots__ = ("field", "value")

    def __init__(self, field: FieldSpec, value: int):
        if not 0 <= value < field.q:
            raise ValueError(f"{value} is not a canonical element of F_{field.q}")
        self.field = field
        self.value = value

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field!r} vs {other.field!r}")
            return other.value
        if isinstance(other, (int, np.integer)):
            return self.field.from_int(int(other))
        return NotImplemented

    def _wrap(self, v: int) -> "FieldElement":
        return FieldElement(self.field, v)

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.add(self.value, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.sub(self.value, o))

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.sub(o, self.value))

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.mul(self.value, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.div(self.value, o))

    def __neg__(self):
        return self._wrap(self.field.neg(self.value))

    def __pow__(self, e: int):
        return self._wrap(self.field.pow(self.value, e))

    def inv(self) -> "FieldElement":
        return self._wrap(self.field.inv(self.value))

    def trace(self) -> int:
        return self.field.trace(self.value)

    def chi(self) -> complex:
        return self.field.chi(self.value)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        if isinstance(other, (int, np.integer)):
            return self.value == int(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.field.p, self.field.k, self.value))

    def __int__(self):
        return self.value

    __index__ = __int__

    def __repr__(self):
        return f"F{self.field.q}({self.value})"


def add_char(s: FieldElement) -> complex:
    return s.chi()


def trace(a: FieldElement) -> int:
    return a.trace()


def sqrt_minus_one(field: FieldSpec) -> FieldElement | None:
    v = field.sqrt_minus_one()
    return None if v is None else field.element(v)
