"""The five contraction constructions and witness pullback.

A contraction substitutes x_i = b1*y, x_j = b2*y for two same-level
variables, replacing them by one variable y whose coefficient
a_i*b1^d + a_j*b2^d sits at a strictly higher level.  With b1 = 1 and
b2 = 1 + c*pi (whose d-th power is 1 + c*pi^2 + c*pi^3 mod pi^4), the digit
c in {0,1} steers where the sum lands:

  D   differing pi-coefficients: exactly one level up, output class chosen
  S2  same pi-coefficient:       exactly two levels up
  S3  same pi-coefficient:       at least three levels up
  T   (2 = pi^2+pi^3 fields) three same-class variables: a pair goes
      at least four levels up
  ST  (2 = pi^2 fields) three same-class variables: a pair goes exactly
      two levels up, preserving the class

New variables are appended at the end of the coefficient list and the two
consumed positions removed; every step records enough to replay the
substitution, so a zero of the contracted form pulls back to a zero of the
root form.  Coefficients are kept with valuation below d: whenever a raw
valuation reaches d, the coefficient is divided by pi^d and the variable
rescaling is recorded as its own step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import ring
from .errors import InputError, InternalError, PrecisionError, TacticError
from .fields import RAMIFIED_J0, RAMIFIED_J1
from .forms import AdditiveForm
from .ring import RingElement

KIND_D = "D"
KIND_S2 = "S2"
KIND_S3 = "S3"
KIND_T = "T"
KIND_ST = "ST"

_MIN_GAIN = {KIND_D: 1, KIND_S2: 2, KIND_S3: 3, KIND_T: 4, KIND_ST: 2}
_EXACT_GAIN = {KIND_D: 1, KIND_S2: 2, KIND_ST: 2}


@dataclass(frozen=True)
class ContractionStep:
    """One applied contraction, recorded against the form it acted on.

    merged holds the two consumed positions (i < j by construction is not
    required); reductions = (red_i, red_j, red_new) counts how many times
    pi^d was divided out of the inputs' coefficients and the output
    coefficient, which the pullback must undo.  level_gain is measured on
    the reduced coefficients: val(new) - shared input level, before the
    output's own reduction.
    """

    kind: str
    merged: tuple[int, int]
    spectator: int | None
    c: int
    b1: RingElement
    b2: RingElement
    new_coefficient: RingElement
    level_gain: int
    hensel_ready: bool
    want_pi_coeff: int | None
    reductions: tuple[int, int, int]
    parent_size: int

    def describe(self) -> str:
        i, j = self.merged
        inner = f"{i},{j}"
        if self.spectator is not None:
            inner += f"|{self.spectator}"
        return f"{self.kind}({inner}; c={self.c}) gain={self.level_gain}"


@dataclass(frozen=True)
class VarScaleStep:
    """Coefficient of one variable divided by pi^(d*power); the pullback
    multiplies that variable's assigned value by pi^(-power), which the
    final homogeneous rescaling makes integral again."""

    index: int
    power: int

    def describe(self) -> str:
        return f"reduce(x{self.index}; k={self.power})"


@dataclass(frozen=True)
class FormRotationStep:
    """Whole form multiplied by pi^power; assignments are unaffected."""

    power: int

    def describe(self) -> str:
        return f"rotate(form; t={self.power})"


@dataclass(frozen=True)
class SubstitutionTree:
    """Linear record of steps from a root form down to a contracted form."""

    root: AdditiveForm
    steps: tuple[object, ...]

    def extended(self, step: object) -> "SubstitutionTree":
        return SubstitutionTree(self.root, self.steps + (step,))

    def describe(self) -> list[str]:
        return [step.describe() for step in self.steps]


def _tree_of(form: AdditiveForm) -> SubstitutionTree:
    if isinstance(form.provenance, SubstitutionTree):
        return form.provenance
    return SubstitutionTree(root=form, steps=())


def reduce_form_levels(form: AdditiveForm) -> tuple[AdditiveForm, tuple[VarScaleStep, ...]]:
    """Divide pi^d out of every coefficient whose valuation reached d."""
    d = form.degree
    tree = _tree_of(form)
    new_coeffs = list(form.coefficients)
    steps: list[VarScaleStep] = []
    for i, c in enumerate(new_coeffs):
        val = int(ring.valuation(c))
        k = val // d
        if k:
            new_coeffs[i] = ring.div_pi_exact(c, d * k)
            steps.append(VarScaleStep(i, k))
    if not steps:
        return form, ()
    m = min(c.m for c in new_coeffs)
    new_coeffs = [c.truncate(m) for c in new_coeffs]
    for step in steps:
        tree = tree.extended(step)
    return AdditiveForm(form.field, d, tuple(new_coeffs), tree), tuple(steps)


def rotate_form(form: AdditiveForm, t: int) -> AdditiveForm:
    """Multiply the form by pi^t, recording the rotation in its tree."""
    if t == 0:
        return form
    tree = _tree_of(form).extended(FormRotationStep(t))
    m = form.bit_precision
    p = ring.pi(form.field, m) ** t
    return AdditiveForm(form.field, form.degree, tuple(c * p for c in form.coefficients), tree)


def _unit_digits(coeff: RingElement, depth: int = 4) -> tuple[int, tuple[int, ...]]:
    val = int(ring.valuation(coeff))
    digits = ring.digit_expand(coeff, val + depth).digits[val:]
    return val, digits


def _effective(coeff: RingElement, d: int) -> tuple[RingElement, int, int]:
    """Reduce a coefficient's valuation into [0, d); returns (coeff, level, red)."""
    val = int(ring.valuation(coeff))
    red = val // d
    if red:
        coeff = ring.div_pi_exact(coeff, d * red)
    return coeff, val % d, red


def contraction_unit(field, c: int, m: int) -> RingElement:
    """The substitution unit b2 = 1 + c*pi whose d-th power is
    1 + c*pi^2 + c*pi^3 mod pi^4."""
    b2 = ring.one(field, m)
    if c:
        b2 = b2 + ring.pi(field, m)
    return b2


def raw_pair_sum(form: AdditiveForm, i: int, j: int, c: int):
    """The ingredients of a pair contraction: reduced inputs, b-units, and
    the unreduced new coefficient a_i + a_j*(1+c*pi)^d.

    Shared by the constructors and by the solver's exact-cancellation path.
    """
    ai, ri, red_i = _effective(form.coefficients[i], form.degree)
    aj, rj, red_j = _effective(form.coefficients[j], form.degree)
    if ri != rj:
        raise TacticError(f"variables {i} and {j} are at different levels ({ri} vs {rj})")
    m = min(ai.m, aj.m)
    ai, aj = ai.truncate(m), aj.truncate(m)
    b1 = ring.one(form.field, m)
    b2 = contraction_unit(form.field, c, m)
    new_coeff = ai + aj * b2 ** form.degree
    return ai, aj, ri, red_i, red_j, b1, b2, new_coeff


def _finish_pair(
    form: AdditiveForm,
    i: int,
    j: int,
    kind: str,
    c: int,
    spectator: int | None = None,
    want_pi_coeff: int | None = None,
) -> tuple[AdditiveForm, ContractionStep]:
    if i == j:
        raise InputError("a contraction needs two distinct variable indices")
    ai, aj, level, red_i, red_j, b1, b2, new_coeff = raw_pair_sum(form, i, j, c)
    d = form.degree
    if new_coeff.is_zero():
        raise PrecisionError(
            "contracted coefficient vanishes to working precision; "
            "re-run at a larger bit precision (or accept the exact zero)"
        )
    new_val = int(ring.valuation(new_coeff))
    if new_val >= new_coeff.pi_precision - 2:
        raise PrecisionError("level gain reached the precision guard; re-run at larger N")
    gain = new_val - level
    if gain < _MIN_GAIN[kind]:
        raise InternalError(f"{kind} contraction produced gain {gain} < {_MIN_GAIN[kind]}")
    if kind in _EXACT_GAIN and gain != _EXACT_GAIN[kind]:
        raise InternalError(f"{kind} contraction produced gain {gain} != {_EXACT_GAIN[kind]}")

    red_new = new_val // d
    reduced_new = ring.div_pi_exact(new_coeff, d * red_new) if red_new else new_coeff

    if kind == KIND_D:
        _, digits = _unit_digits(reduced_new, 2)
        if digits[1] != want_pi_coeff:
            raise InternalError("D contraction missed the requested pi-coefficient")
    if kind == KIND_ST:
        _, digits = _unit_digits(reduced_new, 2)
        _, in_digits = _unit_digits(form.coefficients[i], 2)
        if digits[1] != in_digits[1]:
            raise InternalError("ST contraction failed to preserve the pi-coefficient")

    step = ContractionStep(
        kind=kind,
        merged=(i, j),
        spectator=spectator,
        c=c,
        b1=b1,
        b2=b2,
        new_coefficient=reduced_new,
        level_gain=gain,
        hensel_ready=gain >= 5,
        want_pi_coeff=want_pi_coeff,
        reductions=(red_i, red_j, red_new),
        parent_size=form.s,
    )
    m = min(c_.m for c_ in form.coefficients) if form.s else reduced_new.m
    m = min(m, reduced_new.m)
    survivors = [form.coefficients[p].truncate(m) for p in range(form.s) if p not in (i, j)]
    survivors.append(reduced_new.truncate(m))
    new_form = AdditiveForm(
        form.field, d, tuple(survivors), _tree_of(form).extended(step)
    )
    return new_form, step


def _classes(form: AdditiveForm, indices: Sequence[int], depth: int = 4):
    """Level plus unit digits for each index; all must share a level."""
    out = []
    for idx in indices:
        if not 0 <= idx < form.s:
            raise InputError(f"variable index {idx} out of range for s={form.s}")
        coeff, level, _ = _effective(form.coefficients[idx], form.degree)
        _, digits = _unit_digits(coeff, depth)
        out.append((level, digits))
    return out


def d_contract(
    form: AdditiveForm, i: int, j: int, want_pi_coeff: int
) -> tuple[AdditiveForm, ContractionStep]:
    """Contract two same-level variables with differing pi-coefficients to a
    variable exactly one level up whose pi-coefficient is want_pi_coeff."""
    if want_pi_coeff not in (0, 1):
        raise InputError("want_pi_coeff must be 0 or 1")
    (li, di), (lj, dj) = _classes(form, (i, j))
    if li != lj:
        raise TacticError(f"variables {i} and {j} are at different levels")
    if di[1] == dj[1]:
        raise TacticError("a D contraction needs differing pi-coefficients")
    c = (1 + di[2] + dj[2] + want_pi_coeff) & 1
    return _finish_pair(form, i, j, KIND_D, c, want_pi_coeff=want_pi_coeff)


def s2_contract(form: AdditiveForm, i: int, j: int) -> tuple[AdditiveForm, ContractionStep]:
    """Contract two same-level same-class variables exactly two levels up."""
    (li, di), (lj, dj) = _classes(form, (i, j))
    if li != lj:
        raise TacticError(f"variables {i} and {j} are at different levels")
    if di[1] != dj[1]:
        raise TacticError("an S2 contraction needs equal pi-coefficients")
    c = (di[2] + dj[2]) & 1
    return _finish_pair(form, i, j, KIND_S2, c)


def s3_contract(form: AdditiveForm, i: int, j: int) -> tuple[AdditiveForm, ContractionStep]:
    """Contract two same-level same-class variables at least three levels up."""
    (li, di), (lj, dj) = _classes(form, (i, j))
    if li != lj:
        raise TacticError(f"variables {i} and {j} are at different levels")
    if di[1] != dj[1]:
        raise TacticError("an S3 contraction needs equal pi-coefficients")
    c = (1 + di[2] + dj[2]) & 1
    return _finish_pair(form, i, j, KIND_S3, c)


def _select_pigeonhole_pair(indices: Sequence[int], digit_lists) -> tuple[int, int, int]:
    """The pair whose deep digits make the pi^3 term vanish.

    With the common pi-coefficient a1 = 1 the pair needs equal pi^3 digits;
    with a1 = 0 a pair equal in (pi^2, pi^3) digits is preferred, and
    otherwise some pair differs in both, which also cancels.  Returns
    (i, j, spectator).
    """
    a1 = digit_lists[0][1]
    pairs = [(0, 1), (0, 2), (1, 2)]
    if a1 == 1:
        for p, q in pairs:
            if digit_lists[p][3] == digit_lists[q][3]:
                return indices[p], indices[q], indices[3 - p - q]
    else:
        for p, q in pairs:
            if digit_lists[p][2:4] == digit_lists[q][2:4]:
                return indices[p], indices[q], indices[3 - p - q]
        for p, q in pairs:
            if digit_lists[p][2] != digit_lists[q][2] and digit_lists[p][3] != digit_lists[q][3]:
                return indices[p], indices[q], indices[3 - p - q]
    raise InternalError("pigeonhole pair selection failed")


def _triple_contract(form: AdditiveForm, i: int, j: int, k: int, kind: str):
    if len({i, j, k}) != 3:
        raise InputError("a triple contraction needs three distinct variable indices")
    info = _classes(form, (i, j, k))
    levels = {lvl for lvl, _ in info}
    if len(levels) != 1:
        raise TacticError("the three variables must share a level")
    c1s = {digits[1] for _, digits in info}
    if len(c1s) != 1:
        raise TacticError("the three variables must share a pi-coefficient")
    sel_i, sel_j, spectator = _select_pigeonhole_pair(
        (i, j, k), [digits for _, digits in info]
    )
    digits_by_index = dict(zip((i, j, k), (digits for _, digits in info)))
    a2, b2 = digits_by_index[sel_i][2], digits_by_index[sel_j][2]
    c = (1 + a2 + b2) & 1 if kind == KIND_T else (a2 + b2) & 1
    return _finish_pair(form, sel_i, sel_j, kind, c, spectator=spectator)


def t_contract(form: AdditiveForm, i: int, j: int, k: int) -> tuple[AdditiveForm, ContractionStep]:
    """Among three same-level same-class variables over a field with
    2 = pi^2 + pi^3, contract a chosen pair at least four levels up."""
    if form.field.family != RAMIFIED_J1:
        raise TacticError("T contractions require a field with 2 = pi^2 + pi^3 mod pi^4")
    return _triple_contract(form, i, j, k, KIND_T)


def st_contract(form: AdditiveForm, i: int, j: int, k: int) -> tuple[AdditiveForm, ContractionStep]:
    """Among three same-level same-class variables over a field with
    2 = pi^2, contract a chosen pair exactly two levels up, preserving the
    pi-coefficient."""
    if form.field.family != RAMIFIED_J0:
        raise TacticError("ST contractions require a field with 2 = pi^2 mod pi^4")
    return _triple_contract(form, i, j, k, KIND_ST)


# -- pullback ------------------------------------------------------------------


def pullback(values: Sequence[RingElement], tree: SubstitutionTree) -> tuple[RingElement, ...]:
    """Replay a substitution tree backwards, turning an assignment for the
    contracted form into an integral, primitive assignment for the root.

    Values are carried as (element, shift) pairs meaning element * pi^(-shift);
    the final homogeneous rescaling by the maximal shift restores integrality
    and leaves at least one unit among the touched variables.
    """
    vals = list(values)
    shifts = [0] * len(vals)
    for step in reversed(tree.steps):
        if isinstance(step, FormRotationStep):
            continue
        if isinstance(step, VarScaleStep):
            if not vals[step.index].is_zero():
                shifts[step.index] += step.power
            continue
        if not isinstance(step, ContractionStep):
            raise InternalError(f"unknown step type {type(step).__name__} in tree")
        n_parent = step.parent_size
        if len(vals) != n_parent - 1:
            raise InternalError("assignment length does not match the substitution tree")
        i, j = step.merged
        red_i, red_j, red_new = step.reductions
        y, ys = vals[-1], shifts[-1]
        pv: list[RingElement] = [None] * n_parent  # type: ignore[list-item]
        ps = [0] * n_parent
        others = [p for p in range(n_parent) if p not in (i, j)]
        for child_pos, p in enumerate(others):
            pv[p] = vals[child_pos]
            ps[p] = shifts[child_pos]
        m = y.m
        if y.is_zero():
            pv[i] = ring.zero(y.field, m)
            pv[j] = ring.zero(y.field, m)
            ps[i] = ps[j] = 0
        else:
            pv[i] = step.b1.truncate(m) * y
            pv[j] = step.b2.truncate(m) * y
            ps[i] = ys + red_new + red_i
            ps[j] = ys + red_new + red_j
        vals, shifts = pv, ps
    if len(vals) != tree.root.s:
        raise InternalError("assignment length does not match the tree root")
    nonzero = [p for p, v in enumerate(vals) if not v.is_zero()]
    if not nonzero:
        return tuple(vals)
    top = max(shifts[p] for p in nonzero)
    m = min(vals[p].m for p in nonzero)
    out = []
    for p, v in enumerate(vals):
        if v.is_zero():
            out.append(ring.zero(v.field, m))
        else:
            out.append(v.truncate(m) * ring.pi(v.field, m) ** (top - shifts[p]))
    return tuple(out)
