"""Additive forms a1*x1^d + ... + as*xs^d over a ramified quadratic
extension of Q2, with their level structure.

A variable whose coefficient is pi^r * (1 + c1*pi + ...) sits at *level*
r mod d and has *pi-coefficient* c1; same-level variables split into the
two classes c1 = 0 and c1 = 1.  Level normalization cyclically rotates
levels (multiplying the whole form by a power of pi, which never changes
the zero set) until every prefix of levels holds at least its pro-rata
share of the variables.
"""

from __future__ import annotations

import hashlib
import io
import json
import random
from dataclasses import dataclass, field as dataclass_field
from typing import Sequence

from . import ring
from .errors import InputError, InternalError
from .fields import FieldDescriptor, make_field
from .ring import RingElement


def validate_degree(degree: int) -> None:
    """Accept only d = 2m with m odd and m >= 3."""
    half, rem = divmod(degree, 2)
    if rem or half < 3 or half % 2 == 0:
        raise InputError(f"degree must be 2m with m odd, m >= 3; got {degree}")


@dataclass(frozen=True)
class AdditiveForm:
    """An additive form; coefficients are nonzero ring elements.

    provenance, when present, is a substitution tree linking this form's
    variables back to an ancestor form so zeros can be pulled back.
    """

    field: FieldDescriptor
    degree: int
    coefficients: tuple[RingElement, ...]
    provenance: object | None = dataclass_field(default=None, compare=False)

    def __post_init__(self) -> None:
        validate_degree(self.degree)
        for i, c in enumerate(self.coefficients):
            if c.field != self.field:
                raise InputError(f"coefficient {i} belongs to a different field")
            if c.is_zero():
                raise InputError(f"coefficient {i} is zero to working precision")
        ms = {c.m for c in self.coefficients}
        if len(ms) > 1:
            raise InputError("coefficients carry mixed bit precisions")

    @property
    def s(self) -> int:
        return len(self.coefficients)

    @property
    def bit_precision(self) -> int | None:
        return self.coefficients[0].m if self.coefficients else None


def level_and_class(form: AdditiveForm, i: int) -> tuple[int, int]:
    """The (level mod d, pi-coefficient) of variable i (1-indexed per math
    convention is not used here: i is a 0-based index)."""
    coeff = form.coefficients[i]
    val = int(ring.valuation(coeff))
    c1 = ring.digit_expand(coeff, val + 2).digits[val + 1]
    return val % form.degree, c1


def coefficient_digits(form: AdditiveForm, i: int, depth: int = 4) -> tuple[int, tuple[int, ...]]:
    """Raw valuation and the first `depth` unit-part digits of coefficient i."""
    coeff = form.coefficients[i]
    val = int(ring.valuation(coeff))
    digits = ring.digit_expand(coeff, val + depth).digits[val:]
    return val, digits


@dataclass(frozen=True)
class LevelProfile:
    """Per-level variable counts plus the (c1=0, c1=1) class split."""

    counts: tuple[int, ...]
    class_split: tuple[tuple[int, int], ...]

    @property
    def s(self) -> int:
        return sum(self.counts)

    def __str__(self) -> str:
        return "(" + ", ".join(
            f"{n}[{a}|{b}]" if n else "0" for n, (a, b) in zip(self.counts, self.class_split)
        ) + ")"


def profile(form: AdditiveForm) -> LevelProfile:
    d = form.degree
    counts = [0] * d
    split = [[0, 0] for _ in range(d)]
    for i in range(form.s):
        lvl, c1 = level_and_class(form, i)
        counts[lvl] += 1
        split[lvl][c1] += 1
    return LevelProfile(tuple(counts), tuple((a, b) for a, b in split))


def scale_by_pi(form: AdditiveForm, t: int) -> AdditiveForm:
    """Multiply the form by pi^t; the zero set is unchanged."""
    if t == 0:
        return form
    if form.s == 0:
        return form
    m = form.bit_precision
    p = ring.pi(form.field, m) ** t
    return AdditiveForm(
        form.field, form.degree, tuple(c * p for c in form.coefficients), form.provenance
    )


def _prefix_vector(counts: Sequence[int]) -> tuple[int, ...]:
    acc, out = 0, []
    for n in counts:
        acc += n
        out.append(acc)
    return tuple(out)


def satisfies_prefix_inequalities(counts: Sequence[int], s: int, d: int) -> bool:
    """Exact check of s0 + ... + sk >= (k+1)s/d for every prefix."""
    acc = 0
    for k, n in enumerate(counts):
        acc += n
        if (k + 1) * s > d * acc:
            return False
    return True


def normalize(form: AdditiveForm) -> tuple[AdditiveForm, int]:
    """Rotate levels so every prefix inequality holds.

    Among the valid rotations, the one whose prefix-sum vector is
    lexicographically greatest is chosen (ties broken by smallest t); this
    makes the resulting level profile depend only on the form up to
    multiplication by pi.
    """
    if form.s == 0:
        raise InputError("cannot normalize an empty form")
    d = form.degree
    levels = [level_and_class(form, i)[0] for i in range(form.s)]
    best_t: int | None = None
    best_vec: tuple[int, ...] | None = None
    for t in range(d):
        counts = [0] * d
        for lvl in levels:
            counts[(lvl + t) % d] += 1
        if not satisfies_prefix_inequalities(counts, form.s, d):
            continue
        vec = _prefix_vector(counts)
        if best_vec is None or vec > best_vec:
            best_t, best_vec = t, vec
    if best_t is None:
        raise InternalError("no rotation satisfies the prefix inequalities")
    return scale_by_pi(form, best_t), best_t


def random_form(
    field: FieldDescriptor,
    degree: int,
    s: int,
    seed: int,
    level_weights: Sequence[int] | None = None,
    bit_precision: int | None = None,
) -> AdditiveForm:
    """Deterministic random form: each coefficient is a uniform unit times
    pi^r with r drawn from level_weights (uniform over 0..d-1 by default).

    Randomness is drawn bit by bit from random.Random(seed), so equal seeds
    give equal forms regardless of platform.
    """
    validate_degree(degree)
    if s < 1:
        raise InputError("a random form needs at least one variable")
    m = bit_precision if bit_precision is not None else ring.recommended_bit_precision(degree)
    rng = random.Random(seed)
    if level_weights is not None:
        if len(level_weights) != degree or any(w < 0 for w in level_weights) or sum(level_weights) == 0:
            raise InputError("level_weights must be d nonnegative integers, not all zero")
        cumulative = []
        total = 0
        for w in level_weights:
            total += w
            cumulative.append(total)

    unit_digits = 2 * m - 4  # random digits below the guaranteed precision
    coeffs = []
    for _ in range(s):
        if level_weights is None:
            r = rng.randrange(degree)
        else:
            pick = rng.randrange(total)
            r = next(i for i, cum in enumerate(cumulative) if pick < cum)
        tail = rng.getrandbits(unit_digits)
        digits = (1,) + tuple((tail >> i) & 1 for i in range(unit_digits))
        unit = ring.from_digits(field, digits, m)
        coeffs.append(unit * ring.pi(field, m) ** r)
    return AdditiveForm(field, degree, tuple(coeffs))


# -- file format --------------------------------------------------------------
#
# Text (also accepted on stdin):
#     field Q2(sqrt(-1))
#     degree 6
#     precision 46            # optional; defaults from the degree
#     coeff 1+0*w
#     coeff d:01
# `#` starts a comment; `;` separates directives on one line; `coeffs a, b`
# lists several coefficients at once.  A JSON object with the same keys is
# accepted when the first non-blank byte is `{`.


def parse_form(text: str) -> AdditiveForm:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return _parse_form_json(text)
    field: FieldDescriptor | None = None
    degree: int | None = None
    precision: int | None = None
    coeff_specs: list[tuple[int, str]] = []
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        for chunk in line.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            parts = chunk.split(None, 1)
            directive = parts[0].lower()
            rest = parts[1].strip() if len(parts) > 1 else ""
            if directive == "field":
                field = make_field(rest)
            elif directive == "degree":
                try:
                    degree = int(rest)
                except ValueError:
                    raise InputError(f"line {lineno}: bad degree {rest!r}") from None
                validate_degree(degree)
            elif directive == "precision":
                try:
                    precision = int(rest)
                except ValueError:
                    raise InputError(f"line {lineno}: bad precision {rest!r}") from None
            elif directive in ("coeff", "coeffs"):
                if not rest:
                    raise InputError(f"line {lineno}: {directive} needs at least one element")
                for piece in rest.split(","):
                    coeff_specs.append((lineno, piece.strip()))
            else:
                raise InputError(f"line {lineno}: unknown directive {directive!r}")
    return _assemble_form(field, degree, precision, coeff_specs)


def _parse_form_json(text: str) -> AdditiveForm:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"bad JSON form: {exc}") from None
    if not isinstance(data, dict):
        raise InputError("JSON form must be an object")
    unknown = set(data) - {"field", "degree", "precision", "coefficients"}
    if unknown:
        raise InputError(f"JSON form has unknown keys: {sorted(unknown)}")
    field = make_field(str(data.get("field", "")))
    degree = data.get("degree")
    if not isinstance(degree, int):
        raise InputError("JSON form needs an integer degree")
    validate_degree(degree)
    precision = data.get("precision")
    if precision is not None and not isinstance(precision, int):
        raise InputError("JSON precision must be an integer")
    coeffs = data.get("coefficients", [])
    if not isinstance(coeffs, list) or not all(isinstance(c, str) for c in coeffs):
        raise InputError("JSON coefficients must be a list of element strings")
    return _assemble_form(field, degree, precision, [(0, c) for c in coeffs])


def _assemble_form(
    field: FieldDescriptor | None,
    degree: int | None,
    precision: int | None,
    coeff_specs: list[tuple[int, str]],
) -> AdditiveForm:
    if field is None:
        raise InputError("form is missing the field directive")
    if degree is None:
        raise InputError("form is missing the degree directive")
    m = precision if precision is not None else ring.recommended_bit_precision(degree)
    if m < ring.MIN_BIT_PRECISION:
        raise InputError(f"precision must be at least {ring.MIN_BIT_PRECISION}")
    coefficients = []
    for lineno, spec in coeff_specs:
        where = f"line {lineno}: " if lineno else ""
        try:
            value = ring.parse_element(field, spec, m)
        except InputError as exc:
            raise InputError(f"{where}{exc}") from None
        if value.is_zero():
            raise InputError(f"{where}zero coefficient {spec!r} is not allowed")
        coefficients.append(value)
    return AdditiveForm(field, degree, tuple(coefficients))


def serialize_form(form: AdditiveForm, json_format: bool = False) -> str:
    if json_format:
        return json.dumps(
            {
                "field": form.field.field_id,
                "degree": form.degree,
                "precision": form.bit_precision,
                "coefficients": [ring.format_element(c) for c in form.coefficients],
            },
            indent=2,
        )
    out = io.StringIO()
    out.write(f"field {form.field.field_id}\n")
    out.write(f"degree {form.degree}\n")
    if form.bit_precision is not None:
        out.write(f"precision {form.bit_precision}\n")
    for c in form.coefficients:
        out.write(f"coeff {ring.format_element(c)}\n")
    return out.getvalue()


def form_hash(form: AdditiveForm) -> str:
    """Stable hash of the exact coefficients, for certificates."""
    return hashlib.sha256(serialize_form(form).encode()).hexdigest()[:16]
