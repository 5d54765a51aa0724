"""Exact arithmetic in small finite fields.

Field elements are plain ints in ``[0, order)``.  A :class:`Field` instance
carries the defining parameters and implements the operations: prime fields
use modular arithmetic, binary extension fields GF(2^m) use log/exp tables
built over an irreducible reduction polynomial (with a carry-less multiply
fallback when the polynomial is irreducible but not primitive).

Fields larger than 2^16 are rejected: two-byte symbols are the largest this
package stripes blocks into, and 65536 distinct encoder coefficients cover
any realistic shard.
"""

from __future__ import annotations

import functools
import math

MAX_ORDER = 1 << 16

# Reduction polynomial bitmasks (the x^m term included).  All are primitive,
# so log/exp tables with generator x cover the full multiplicative group.
DEFAULT_REDUCTION_POLY = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,   # x^4 + x + 1
    8: 0x11D,     # x^8 + x^4 + x^3 + x^2 + 1
    16: 0x1100B,  # x^16 + x^12 + x^3 + x + 1
}

# Header codes used when a field spec is serialized into file headers.
KIND_PRIME = 1
KIND_BINARY = 2


def is_prime(n: int) -> bool:
    """Primality by trial division; fields here are small enough."""
    if n < 2:
        return False
    for d in range(2, math.isqrt(n) + 1):
        if n % d == 0:
            return False
    return True


def gf2_mul_nomod(a: int, b: int) -> int:
    """Carry-less product of two polynomials over GF(2)."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def gf2_mod(a: int, mod: int) -> int:
    """Remainder of a modulo mod, both polynomials over GF(2)."""
    deg = mod.bit_length() - 1
    while a.bit_length() - 1 >= deg and a:
        a ^= mod << (a.bit_length() - 1 - deg)
    return a


def gf2_is_irreducible(poly: int) -> bool:
    """Exhaustive divisor search; intended for degrees up to 16."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    if deg == 1:
        return True
    for d in range(1, deg // 2 + 1):
        for cand in range(1 << d, 1 << (d + 1)):
            if gf2_mod(poly, cand) == 0:
                return False
    return True


class Field:
    """A finite field; subclasses provide the scalar arithmetic."""

    kind: str
    order: int

    # -- scalar arithmetic ------------------------------------------------

    def add(self, a: int, b: int) -> int:
        raise NotImplementedError

    def sub(self, a: int, b: int) -> int:
        raise NotImplementedError

    def mul(self, a: int, b: int) -> int:
        raise NotImplementedError

    def inv(self, a: int) -> int:
        raise NotImplementedError

    def div(self, a: int, b: int) -> int:
        if b == 0:
            raise ZeroDivisionError("division by zero field element")
        return self.mul(a, self.inv(b))

    def neg(self, a: int) -> int:
        return self.sub(0, a)

    def pow_(self, a: int, e: int) -> int:
        """a**e by square and multiply; e must be >= 0."""
        if e < 0:
            raise ValueError("negative exponent; invert explicitly")
        result = 1
        base = self.check(a)
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def check(self, a: int) -> int:
        """Validate that a is an element of this field and return it."""
        if not (isinstance(a, int) and 0 <= a < self.order):
            raise ValueError(f"{a!r} is not an element of {self}")
        return a

    # -- polynomial helpers ------------------------------------------------

    def vandermonde_row(self, gamma: int, width: int) -> list[int]:
        """[1, gamma, gamma^2, ..., gamma^(width-1)]."""
        if width < 1:
            raise ValueError("width must be >= 1")
        self.check(gamma)
        row = [1]
        cur = 1
        for _ in range(width - 1):
            cur = self.mul(cur, gamma)
            row.append(cur)
        return row

    def poly_eval(self, coeffs: list[int], x: int) -> int:
        """Evaluate sum(coeffs[j] * x^j) by Horner's rule."""
        if not coeffs:
            raise ValueError("empty coefficient vector")
        self.check(x)
        acc = 0
        for c in reversed(coeffs):
            acc = self.add(self.mul(acc, x), c)
        return acc

    # -- bulk helpers (inputs assumed valid; used on hot paths) -------------

    def scale_vec(self, c: int, vec: list[int]) -> list[int]:
        raise NotImplementedError

    def add_vec(self, a: list[int], b: list[int]) -> list[int]:
        raise NotImplementedError

    # -- identity / serialization -------------------------------------------

    @property
    def header_param(self) -> int:
        raise NotImplementedError

    @property
    def header_kind(self) -> int:
        return KIND_PRIME if self.kind == "prime" else KIND_BINARY

    def describe(self) -> str:
        raise NotImplementedError

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Field)
            and self.header_kind == other.header_kind
            and self.header_param == other.header_param
        )

    def __hash__(self) -> int:
        return hash((self.header_kind, self.header_param))

    def __repr__(self) -> str:
        return f"Field({self.describe()})"


class PrimeField(Field):
    """GF(q) for prime q."""

    kind = "prime"

    def __init__(self, modulus: int):
        if not is_prime(modulus):
            raise ValueError(f"{modulus} is not prime")
        if modulus > MAX_ORDER:
            raise ValueError(f"fields larger than 2^16 are not supported (got {modulus})")
        self.order = modulus

    def add(self, a, b):
        q = self.order
        if not (0 <= a < q and 0 <= b < q):
            raise ValueError(f"operands {a!r}, {b!r} out of range for {self}")
        return (a + b) % q

    def sub(self, a, b):
        q = self.order
        if not (0 <= a < q and 0 <= b < q):
            raise ValueError(f"operands {a!r}, {b!r} out of range for {self}")
        return (a - b) % q

    def mul(self, a, b):
        q = self.order
        if not (0 <= a < q and 0 <= b < q):
            raise ValueError(f"operands {a!r}, {b!r} out of range for {self}")
        return (a * b) % q

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        self.check(a)
        return pow(a, -1, self.order)

    def pow_(self, a, e):
        if e < 0:
            raise ValueError("negative exponent; invert explicitly")
        return pow(self.check(a), e, self.order)

    def scale_vec(self, c, vec):
        q = self.order
        return [(c * v) % q for v in vec]

    def add_vec(self, a, b):
        q = self.order
        return [(x + y) % q for x, y in zip(a, b)]

    @property
    def header_param(self) -> int:
        return self.order

    def describe(self) -> str:
        return f"prime:{self.order}"


class BinaryField(Field):
    """GF(2^m) with an explicit irreducible reduction polynomial."""

    kind = "binary"

    def __init__(self, degree: int, poly: int | None = None):
        if degree < 1:
            raise ValueError("degree must be >= 1")
        if degree > 16:
            raise ValueError(f"fields larger than 2^16 are not supported (got degree {degree})")
        if poly is None:
            poly = DEFAULT_REDUCTION_POLY.get(degree)
            if poly is None:
                raise ValueError(f"no default reduction polynomial for degree {degree}")
        if poly.bit_length() - 1 != degree:
            raise ValueError(f"reduction polynomial {poly:#x} does not have degree {degree}")
        if not gf2_is_irreducible(poly):
            raise ValueError(f"reduction polynomial {poly:#x} is reducible")
        self.degree = degree
        self.poly = poly
        self.order = 1 << degree
        self._build_tables()

    def _build_tables(self):
        q = self.order
        log = [-1] * q
        exp = [0] * (2 * (q - 1))
        v = 1
        primitive = True
        for i in range(q - 1):
            if log[v] != -1:
                primitive = False
                break
            log[v] = i
            exp[i] = v
            exp[i + q - 1] = v
            v <<= 1
            if v & q:
                v ^= self.poly
        self._primitive = primitive and min(log[1:]) >= 0
        self._log = log
        self._exp = exp

    def add(self, a, b):
        q = self.order
        if not (0 <= a < q and 0 <= b < q):
            raise ValueError(f"operands {a!r}, {b!r} out of range for {self}")
        return a ^ b

    sub = add  # characteristic 2

    def mul(self, a, b):
        q = self.order
        if not (0 <= a < q and 0 <= b < q):
            raise ValueError(f"operands {a!r}, {b!r} out of range for {self}")
        if a == 0 or b == 0:
            return 0
        if self._primitive:
            return self._exp[self._log[a] + self._log[b]]
        return gf2_mod(gf2_mul_nomod(a, b), self.poly)

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        self.check(a)
        if self._primitive:
            return self._exp[self.order - 1 - self._log[a]]
        return self.pow_(a, self.order - 2)

    def scale_vec(self, c, vec):
        if c == 0:
            return [0] * len(vec)
        if not self._primitive:
            return [self.mul(c, v) if v else 0 for v in vec]
        exp = self._exp
        log = self._log
        logc = log[c]
        return [exp[logc + log[v]] if v else 0 for v in vec]

    def add_vec(self, a, b):
        return [x ^ y for x, y in zip(a, b)]

    @property
    def header_param(self) -> int:
        return self.poly

    def describe(self) -> str:
        return f"binary:{self.degree}:{self.poly:#x}"


@functools.lru_cache(maxsize=None)
def prime_field(modulus: int) -> PrimeField:
    return PrimeField(modulus)


@functools.lru_cache(maxsize=None)
def binary_field(degree: int, poly: int | None = None) -> BinaryField:
    return BinaryField(degree, poly)


def field_from_header(kind: int, param: int) -> Field:
    """Rebuild a field from its serialized (kind, param) header pair."""
    if kind == KIND_PRIME:
        return prime_field(param)
    if kind == KIND_BINARY:
        return binary_field(param.bit_length() - 1, param)
    raise ValueError(f"unknown field kind code {kind}")


def parse_field(text: str) -> Field:
    """Parse a field spec string: 'prime:Q' or 'binary:M[:POLY]'."""
    parts = text.strip().lower().split(":")
    if parts[0] == "prime" and len(parts) == 2:
        return prime_field(int(parts[1], 0))
    if parts[0] == "binary" and len(parts) in (2, 3):
        degree = int(parts[1], 0)
        poly = int(parts[2], 0) if len(parts) == 3 else None
        return binary_field(degree, poly)
    raise ValueError(f"bad field spec {text!r}; expected 'prime:Q' or 'binary:M[:POLY]'")
