"""Exact truncated arithmetic in the ring of integers O of a ramified
quadratic extension of Q2.

Elements are stored on the basis (1, pi) as a pair of residues mod 2^m:
x = u + v*pi.  Since 2^m generates pi^(2m)*O, the pair determines x as a
residue mod pi^(2m); the pi-adic precision *guaranteed* by the
representation is N = 2m - 2, because extracting canonical pi-digits costs
one 2-adic coordinate bit per two divisions by pi.

All arithmetic is exact on residues: multiplication reduces via
pi^2 = c + b*pi with the per-field constants from the field table.
Valuation is exact for any nonzero residue because val(u) is even and
val(v*pi) is odd, so the minimum is never ambiguous:

    val(u + v*pi) = min(2*val2(u), 2*val2(v) + 1)

The zero residue has valuation "infinity", meaning zero to the working
precision.  Division by pi loses precision and returns an element with a
smaller m; operations never silently mix precisions.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

from .errors import InputError, InternalError, PrecisionError
from .fields import RAMIFIED_J0, FieldDescriptor

INF = math.inf

MIN_BIT_PRECISION = 3


def recommended_bit_precision(degree: int) -> int:
    """Default m for work at a given form degree.

    Sized so the guaranteed pi-precision 2m-2 comfortably exceeds the default
    witness target 2d+8 plus the coordinate bits consumed by Newton
    corrections and by level reductions along a contraction chain of the
    solver's maximal depth (each mod-d wrap of a coefficient costs about
    d/2 bits).
    """
    return degree * degree + 3 * degree + 30


def _val2(n: int) -> int:
    """2-adic valuation of a nonzero integer."""
    return (n & -n).bit_length() - 1


@dataclass(frozen=True, slots=True)
class RingElement:
    """A residue u + v*pi mod pi^(2m), coordinates reduced mod 2^m."""

    field: FieldDescriptor
    u: int
    v: int
    m: int

    def __post_init__(self) -> None:
        if self.m < MIN_BIT_PRECISION:
            raise PrecisionError(f"bit precision {self.m} below minimum {MIN_BIT_PRECISION}")
        mask = (1 << self.m) - 1
        if not (0 <= self.u <= mask and 0 <= self.v <= mask):
            raise InternalError("coordinates out of range for declared precision")

    # -- basic structure ---------------------------------------------------

    @property
    def bit_precision(self) -> int:
        return self.m

    @property
    def pi_precision(self) -> int:
        """Number of guaranteed canonical pi-digits."""
        return 2 * self.m - 2

    @property
    def coords(self) -> tuple[int, int]:
        """Coordinates (a, b) on the basis (1, omega) with omega = sqrt(D)."""
        mask = (1 << self.m) - 1
        if self.field.family == RAMIFIED_J0:
            return (self.u, self.v)
        # pi = 1 + omega, so u + v*pi = (u + v) + v*omega
        return ((self.u + self.v) & mask, self.v)

    def is_zero(self) -> bool:
        return self.u == 0 and self.v == 0

    def is_unit(self) -> bool:
        return self.u & 1 == 1

    def _check_compatible(self, other: "RingElement") -> None:
        if self.field is not other.field and self.field != other.field:
            raise InputError("elements belong to different fields")
        if self.m != other.m:
            raise InputError(
                f"mixed bit precisions {self.m} and {other.m}; truncate explicitly"
            )

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "RingElement") -> "RingElement":
        self._check_compatible(other)
        mask = (1 << self.m) - 1
        return RingElement(self.field, (self.u + other.u) & mask, (self.v + other.v) & mask, self.m)

    def __sub__(self, other: "RingElement") -> "RingElement":
        self._check_compatible(other)
        mask = (1 << self.m) - 1
        return RingElement(self.field, (self.u - other.u) & mask, (self.v - other.v) & mask, self.m)

    def __neg__(self) -> "RingElement":
        mask = (1 << self.m) - 1
        return RingElement(self.field, (-self.u) & mask, (-self.v) & mask, self.m)

    def __mul__(self, other: "RingElement") -> "RingElement":
        self._check_compatible(other)
        c, b = self.field.pi_sq_const, self.field.pi_sq_pi
        mask = (1 << self.m) - 1
        vv = self.v * other.v
        u = (self.u * other.u + c * vv) & mask
        v = (self.u * other.v + self.v * other.u + b * vv) & mask
        return RingElement(self.field, u, v, self.m)

    def __pow__(self, exponent: int) -> "RingElement":
        if exponent < 0:
            raise InputError("negative exponents require an explicit unit inverse")
        result = one(self.field, self.m)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def truncate(self, m: int) -> "RingElement":
        """Forget precision down to m bits per coordinate."""
        if m > self.m:
            raise PrecisionError("cannot raise precision by truncation")
        mask = (1 << m) - 1
        return RingElement(self.field, self.u & mask, self.v & mask, m)

    def __str__(self) -> str:
        return format_element(self)


# -- constructors ----------------------------------------------------------


def element(field: FieldDescriptor, a: int, b: int, m: int) -> RingElement:
    """Build a + b*omega at m bits; a, b may be arbitrary integers."""
    mask = (1 << m) - 1
    if field.family == RAMIFIED_J0:
        return RingElement(field, a & mask, b & mask, m)
    # a + b*omega = (a - b) + b*pi
    return RingElement(field, (a - b) & mask, b & mask, m)


def from_int(field: FieldDescriptor, n: int, m: int) -> RingElement:
    return RingElement(field, n & ((1 << m) - 1), 0, m)


def zero(field: FieldDescriptor, m: int) -> RingElement:
    return RingElement(field, 0, 0, m)


def one(field: FieldDescriptor, m: int) -> RingElement:
    return RingElement(field, 1, 0, m)


def pi(field: FieldDescriptor, m: int) -> RingElement:
    return RingElement(field, 0, 1, m)


def from_digits(field: FieldDescriptor, digits: Sequence[int], m: int) -> RingElement:
    """The exact element sum(digits[i] * pi^i) with a zero tail."""
    if any(d not in (0, 1) for d in digits):
        raise InputError("pi-adic digits must be 0 or 1")
    acc = zero(field, m)
    for d in reversed(digits):
        acc = acc * pi(field, m)
        if d:
            acc = acc + one(field, m)
    return acc


# -- valuation and digits ----------------------------------------------------


def valuation(x: RingElement) -> int | float:
    """pi-adic valuation of the residue; INF for the zero residue.

    Exact whenever the answer is finite: a nonzero coordinate has
    2-adic valuation at most m-1, which is below the representation cap.
    """
    if x.u == 0 and x.v == 0:
        return INF
    if x.u == 0:
        return 2 * _val2(x.v) + 1
    if x.v == 0:
        return 2 * _val2(x.u)
    return min(2 * _val2(x.u), 2 * _val2(x.v) + 1)


@dataclass(frozen=True)
class DigitExpansion:
    """Canonical digits (c0, ..., c_{n-1}) of an element, base pi."""

    digits: tuple[int, ...]

    @property
    def valuation(self) -> int | float:
        for i, d in enumerate(self.digits):
            if d:
                return i
        return INF

    def __iter__(self):
        return iter(self.digits)


def _div_pi_step(field: FieldDescriptor, u: int, v: int, pu: int, pv: int) -> tuple[int, int, int, int]:
    """One exact division by pi of u + v*pi with u even.

    Returns new coordinates and their remaining bit precisions.  Derivation:
    pi*(pi - b) = 2e with e = unit_scale, so u/pi = (u/2) * e^{-1} * (pi - b).
    """
    if u & 1:
        raise InternalError("division by pi of an element with odd constant term")
    inv_e = pow(field.unit_scale, -1, 1 << max(pu, 1))
    t = (u >> 1) * inv_e
    bhalf = field.pi_sq_pi >> 1
    new_pu = min(pu, pv)
    new_pv = pu - 1
    new_u = (v - bhalf * 2 * t) & ((1 << new_pu) - 1)
    new_v = t & ((1 << new_pv) - 1) if new_pv > 0 else 0
    return new_u, new_v, new_pu, new_pv


def digit_expand(x: RingElement, n: int) -> DigitExpansion:
    """First n canonical pi-digits of x.

    Requires n <= 2m - 2: each pair of divisions by pi consumes one bit of
    each coordinate, and the last digit still needs one readable bit.
    """
    if n < 0:
        raise InputError("digit count must be nonnegative")
    if n > x.pi_precision:
        raise PrecisionError(
            f"{n} digits requested but only {x.pi_precision} are guaranteed at m={x.m}"
        )
    u, v, pu, pv = x.u, x.v, x.m, x.m
    digits = []
    for _ in range(n):
        if pu < 1:
            raise PrecisionError("ran out of coordinate precision during digit extraction")
        c = u & 1
        digits.append(c)
        u -= c
        u, v, pu, pv = _div_pi_step(x.field, u, v, pu, pv)
    return DigitExpansion(tuple(digits))


def div_pi_exact(x: RingElement, k: int) -> RingElement:
    """x / pi^k, requiring pi^k | x; the result keeps m - ceil(k/2) bits."""
    if k < 0:
        raise InputError("cannot divide by a negative power of pi")
    if k == 0:
        return x
    new_m = x.m - ((k + 1) // 2)
    if new_m < MIN_BIT_PRECISION:
        raise PrecisionError(f"dividing by pi^{k} leaves fewer than {MIN_BIT_PRECISION} bits")
    u, v, pu, pv = x.u, x.v, x.m, x.m
    for _ in range(k):
        if u & 1:
            raise InternalError("element is not divisible by the requested power of pi")
        u, v, pu, pv = _div_pi_step(x.field, u, v, pu, pv)
    mask = (1 << new_m) - 1
    return RingElement(x.field, u & mask, v & mask, new_m)


def unit_part(x: RingElement) -> RingElement:
    """The unit w with x = pi^val(x) * w; undefined for the zero residue."""
    val = valuation(x)
    if val is INF:
        raise PrecisionError("the zero residue has no unit part")
    return div_pi_exact(x, int(val))


def invert_unit(x: RingElement) -> RingElement:
    """Multiplicative inverse of a unit, by Newton iteration mod 2^m."""
    if not x.is_unit():
        raise InputError("only units are invertible in O")
    y = one(x.field, x.m)
    two = from_int(x.field, 2, x.m)
    for _ in range(x.m.bit_length() + 3):
        y = y * (two - x * y)
        prod = x * y
        if prod.u == 1 and prod.v == 0:
            return y
    raise InternalError("unit inversion did not converge")


# -- enumeration -------------------------------------------------------------


def residues_mod(field: FieldDescriptor, k: int, m: int | None = None) -> list[RingElement]:
    """All 2^k residues mod pi^k, as exact digit-string representatives."""
    if not 1 <= k <= 16:
        raise InputError("residue enumeration supports 1 <= k <= 16")
    m = m if m is not None else max(MIN_BIT_PRECISION, k + 2)
    return [from_digits(field, bits, m) for bits in product((0, 1), repeat=k)]


def enumerate_units_mod(field: FieldDescriptor, k: int, m: int | None = None) -> list[RingElement]:
    """The 2^(k-1) unit residues 1 + c1*pi + ... + c_{k-1}*pi^(k-1) mod pi^k."""
    if not 1 <= k <= 8:
        raise InputError("unit enumeration supports 1 <= k <= 8")
    m = m if m is not None else max(MIN_BIT_PRECISION, k + 2)
    return [from_digits(field, (1,) + bits, m) for bits in product((0, 1), repeat=k - 1)]


# -- text syntax -------------------------------------------------------------

_COORD_RE = re.compile(
    r"""^\s*(?P<a>[+-]?\d+)?\s*(?:(?P<sign>[+-])?\s*(?P<b>\d+)\s*\*\s*w)?\s*$""",
    re.VERBOSE,
)


def parse_element(field: FieldDescriptor, text: str, m: int) -> RingElement:
    """Parse ``a+b*w`` (omega coordinates) or ``d:1011`` (pi digits)."""
    stripped = text.strip()
    if stripped.startswith("d:"):
        body = stripped[2:].strip()
        if not body or any(ch not in "01" for ch in body):
            raise InputError(f"bad digit string {text!r}: expected d: followed by 0/1 digits")
        digits = tuple(int(ch) for ch in body)
        if len(digits) > 2 * m - 2:
            raise PrecisionError(
                f"digit string {text!r} longer than the {2 * m - 2} digits guaranteed at m={m}"
            )
        return from_digits(field, digits, m)
    match = _COORD_RE.match(stripped)
    if match is None or (match.group("a") is None and match.group("b") is None):
        raise InputError(f"bad element syntax {text!r}: expected a+b*w or d:digits")
    a = int(match.group("a")) if match.group("a") is not None else 0
    b = int(match.group("b") or 0)
    if match.group("sign") == "-":
        b = -b
    if match.group("b") is not None and match.group("sign") is None and match.group("a") is not None:
        raise InputError(f"bad element syntax {text!r}: missing sign between a and b*w")
    return element(field, a, b, m)


def format_element(x: RingElement) -> str:
    """Canonical ``a+b*w`` with coordinates reduced into [0, 2^m)."""
    a, b = x.coords
    return f"{a}+{b}*w"


def congruent_mod_pi(x: RingElement, y: RingElement, k: int) -> bool:
    """Whether x = y mod pi^k (test helper; uses exact subtraction)."""
    diff = x - y
    return valuation(diff) >= k


def reassemble(field: FieldDescriptor, digits: Iterable[int], m: int) -> RingElement:
    """Inverse of digit_expand on digit strings of length <= 2m - 2."""
    return from_digits(field, tuple(digits), m)
