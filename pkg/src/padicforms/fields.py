"""The six ramified quadratic extensions of Q2.

Each field K = Q2(sqrt(D)) is described by its radicand D, a fixed choice of
uniformizer pi, and the expansion of 2 in powers of pi.  For D in
{2, 10, -2, -10} the uniformizer is sqrt(D) itself and 2 = pi^2 * unit with
2 congruent to pi^2 mod pi^4.  For D in {-1, -5} the element sqrt(D) is a
unit and pi = 1 + sqrt(D) uniformizes, with 2 congruent to pi^2 + pi^3
mod pi^4.  The two behaviours are labelled as families below; the second
pi^3 digit of 2 is what separates them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InputError

RAMIFIED_J0 = "RAMIFIED_J0"  # 2 = pi^2         (mod pi^4)
RAMIFIED_J1 = "RAMIFIED_J1"  # 2 = pi^2 + pi^3  (mod pi^4)


@dataclass(frozen=True)
class FieldDescriptor:
    """One row of the field table: identity and uniformizer conventions.

    pi_sq_const / pi_sq_pi encode the reduction rule pi^2 = c + b*pi used by
    all ring arithmetic: (c, b) = (D, 0) when pi = sqrt(D), and (D-1, 2) when
    pi = 1 + sqrt(D).
    """

    field_id: str
    radicand: int
    uniformizer_kind: str
    family: str
    two_mod_pi4: tuple[int, int, int, int]
    pi_sq_const: int
    pi_sq_pi: int

    @property
    def j(self) -> int:
        """The pi^3 digit of 2: 0 for the first four fields, 1 for the last two."""
        return 0 if self.family == RAMIFIED_J0 else 1

    @property
    def unit_scale(self) -> int:
        """The odd integer e with pi^2 = 2e + pi_sq_pi*pi; divides exactly."""
        return self.pi_sq_const // 2

    def __str__(self) -> str:
        return self.field_id


def _descriptor(radicand: int) -> FieldDescriptor:
    field_id = f"Q2(sqrt({radicand}))"
    if radicand in (2, 10, -2, -10):
        return FieldDescriptor(
            field_id=field_id,
            radicand=radicand,
            uniformizer_kind=f"sqrt({radicand})",
            family=RAMIFIED_J0,
            two_mod_pi4=(0, 0, 1, 0),
            pi_sq_const=radicand,
            pi_sq_pi=0,
        )
    if radicand in (-1, -5):
        return FieldDescriptor(
            field_id=field_id,
            radicand=radicand,
            uniformizer_kind=f"1+sqrt({radicand})",
            family=RAMIFIED_J1,
            two_mod_pi4=(0, 0, 1, 1),
            pi_sq_const=radicand - 1,
            pi_sq_pi=2,
        )
    raise InputError(f"no ramified quadratic extension of Q2 with radicand {radicand}")


_RADICANDS = (2, 10, -2, -10, -1, -5)
_FIELDS = {d: _descriptor(d) for d in _RADICANDS}

FIELD_IDS = tuple(_FIELDS[d].field_id for d in _RADICANDS)

_ID_PATTERN = re.compile(r"^Q2\(sqrt\((-?\d+)\)\)$")


def make_field(field_id: str) -> FieldDescriptor:
    """Look up a field by identifier, e.g. ``Q2(sqrt(-1))``.

    Whitespace is ignored; anything not naming one of the six ramified
    quadratic extensions is rejected.
    """
    compact = "".join(field_id.split())
    match = _ID_PATTERN.match(compact)
    if match is None:
        raise InputError(
            f"unknown field identifier {field_id!r}; expected one of {', '.join(FIELD_IDS)}"
        )
    radicand = int(match.group(1))
    if radicand not in _FIELDS:
        raise InputError(
            f"unknown field identifier {field_id!r}; expected one of {', '.join(FIELD_IDS)}"
        )
    return _FIELDS[radicand]


def all_fields() -> tuple[FieldDescriptor, ...]:
    """The six fields in canonical table order (J0 family first)."""
    return tuple(_FIELDS[d] for d in _RADICANDS)
