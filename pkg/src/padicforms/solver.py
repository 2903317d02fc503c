"""Zero search for additive forms.

The pipeline mirrors how such zeros are actually constructed: normalize the
level profile, then chain contractions until some variable has been raised
at least five levels above one of its origin variables, at which point a
Newton (Hensel) iteration on a single well-chosen coordinate converges to
an exact zero.  A raise of five is exactly what makes the Newton criterion

    val(F(x)) >= 2*val(dF/dx_pivot(x)) + 1

attainable: the derivative of a degree-d term carries val(d) = 2 plus the
pivot's level, and the contracted coefficient supplies the valuation.

The search is best-first over tactic-generated moves.  Tactics encode the
standard contraction recipes (which pair to merge, and with which target
class) keyed on the level/class profile; a generic fallback contracts any
two same-level variables, so the search never stalls while two variables
share a level.  "Raised k levels" is tracked per derived variable as the
cumulative level gain from its origin, which is insensitive to the mod-d
wrapping of levels.

Every witness is rebuilt from scratch by replaying the winning move list on
a rotation of the original form chosen to put the best origin variable at
level zero (rotating multiplies the form by a power of pi, which changes no
zero and no coefficient class), then verified independently before it is
returned.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from . import ring
from .contraction import (
    SubstitutionTree,
    d_contract,
    pullback,
    raw_pair_sum,
    reduce_form_levels,
    rotate_form,
    s2_contract,
    s3_contract,
    st_contract,
    t_contract,
)
from .errors import InputError, InternalError, PrecisionError, TacticError
from .fields import RAMIFIED_J0, RAMIFIED_J1
from .forms import AdditiveForm, normalize, profile
from .ring import INF, RingElement

DEFAULT_BUDGET = 1_000_000
HENSEL_RAISE = 5

TACTIC_NAMES = (
    "slide",
    "fromtwo",
    "empty1",
    "empty4",
    "empty234",
    "max7",
    "fivesame",
    "max6",
    "max5",
    "max4",
    "twoSameTwoDiff",
    "twoSameTwoMore",
    "twoAndTwoAndOne",
    "twoDiffTwoMore",
    "threeokay",
    "threeoh",
    "genericPair",
)

# Expansion order: terminating recipes first, then the scripted lemmas,
# generic pairing last.
_PRIORITY = (
    "fromtwo",
    "empty4",
    "fivesame",
    "empty1",
    "empty234",
    "max7",
    "max6",
    "max5",
    "max4",
    "twoSameTwoDiff",
    "twoSameTwoMore",
    "twoAndTwoAndOne",
    "twoDiffTwoMore",
    "threeokay",
    "threeoh",
    "slide",
    "genericPair",
)
_PRIORITY_RANK = {name: i for i, name in enumerate(_PRIORITY)}


@dataclass(frozen=True)
class StepSpec:
    """A contraction request against the form it will be applied to."""

    kind: str
    i: int
    j: int
    third: int | None = None
    want: int | None = None


@dataclass(frozen=True)
class Move:
    tactic: str
    steps: tuple[StepSpec, ...]


@dataclass(frozen=True)
class ZeroWitness:
    """A verified approximate zero, liftable to an exact one.

    The assignment is integral and primitive; the form evaluates on it with
    valuation at least `precision`, and the pivot coordinate satisfies the
    Newton slack `precision >= 2*val(dF/dx_pivot) + 1`, which is what makes
    the nearby exact zero certain.
    """

    assignment: tuple[RingElement, ...]
    precision: int
    exact_to_precision: bool
    pivot: int
    trace: SubstitutionTree
    lift_log: tuple[str, ...]
    rotation: int

    def report_text(self) -> str:
        lines = [f"x{i} = {ring.format_element(v)}" for i, v in enumerate(self.assignment)]
        lines.append(f"valuation >= {self.precision}")
        if self.exact_to_precision:
            lines.append("(zero to working precision)")
        lines.append(f"pivot x{self.pivot}")
        if self.rotation:
            lines.append(f"rotate(form; t={self.rotation})")
        for step in self.trace.steps:
            lines.append(step.describe())
        lines.extend(self.lift_log)
        return "\n".join(lines)

    def report_json(self) -> dict:
        return {
            "assignment": [ring.format_element(v) for v in self.assignment],
            "valuation": self.precision,
            "exact_to_precision": self.exact_to_precision,
            "pivot": self.pivot,
            "rotation": self.rotation,
            "trace": [step.describe() for step in self.trace.steps],
            "lift_log": list(self.lift_log),
        }


@dataclass(frozen=True)
class NotFound:
    """Search exhausted its budget or its move space without a witness."""

    nodes: int
    max_depth: int
    deepest_profiles: tuple[str, ...]
    budget_exhausted: bool

    def report_text(self) -> str:
        lines = [
            "NOT_FOUND",
            f"nodes = {self.nodes}",
            f"max depth = {self.max_depth}",
            f"budget exhausted = {self.budget_exhausted}",
        ]
        for p in self.deepest_profiles:
            lines.append(f"deep profile {p}")
        return "\n".join(lines)

    def report_json(self) -> dict:
        return {
            "result": "NOT_FOUND",
            "nodes": self.nodes,
            "max_depth": self.max_depth,
            "deepest_profiles": list(self.deepest_profiles),
            "budget_exhausted": self.budget_exhausted,
        }


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    measured_valuation: float
    primitive: bool
    newton_slack_ok: bool
    messages: tuple[str, ...]


# -- evaluation ----------------------------------------------------------------


def evaluate_form(form: AdditiveForm, values: Sequence[RingElement]) -> RingElement:
    """Sum a_i * v_i^d at the least precision present among the operands."""
    if len(values) != form.s:
        raise InputError(f"assignment has {len(values)} values for {form.s} variables")
    m = min([c.m for c in form.coefficients] + [v.m for v in values])
    acc = ring.zero(form.field, m)
    for a, v in zip(form.coefficients, values):
        acc = acc + a.truncate(m) * (v.truncate(m) ** form.degree)
    return acc


def _derivative_element(form: AdditiveForm, values: Sequence[RingElement], pivot: int) -> RingElement:
    m = min(form.coefficients[pivot].m, values[pivot].m)
    d_el = ring.from_int(form.field, form.degree, m)
    return d_el * form.coefficients[pivot].truncate(m) * (values[pivot].truncate(m) ** (form.degree - 1))


# -- search state ----------------------------------------------------------------


class _Var(NamedTuple):
    coeff: RingElement
    level: int
    c1: int
    c2: int
    c3: int
    raised: int
    origin_level: int


class _State(NamedTuple):
    vars: tuple[_Var, ...]
    depth: int
    specs: tuple[StepSpec, ...]


def _var_from_coeff(coeff: RingElement, raised: int, origin_level: int) -> _Var:
    val = int(ring.valuation(coeff))
    digits = ring.digit_expand(coeff, val + 4).digits[val:]
    return _Var(coeff, val, digits[1], digits[2], digits[3], raised, origin_level)


def _initial_state(work: AdditiveForm) -> _State:
    vars_ = tuple(
        _var_from_coeff(c, 0, int(ring.valuation(c))) for c in work.coefficients
    )
    return _State(vars_, 0, ())


def _state_form(field, degree, state: _State) -> AdditiveForm:
    return AdditiveForm(field, degree, tuple(v.coeff for v in state.vars))


_CONSTRUCTORS = {
    "D": lambda form, spec: d_contract(form, spec.i, spec.j, spec.want),
    "S2": lambda form, spec: s2_contract(form, spec.i, spec.j),
    "S3": lambda form, spec: s3_contract(form, spec.i, spec.j),
    "T": lambda form, spec: t_contract(form, spec.i, spec.j, spec.third),
    "ST": lambda form, spec: st_contract(form, spec.i, spec.j, spec.third),
}


def _apply_spec(field, degree, state: _State, spec: StepSpec) -> tuple[_State, _Var]:
    """Apply one contraction to a search state; returns the child state and
    the newly created variable (always last)."""
    form = _state_form(field, degree, state)
    _, step = _CONSTRUCTORS[spec.kind](form, spec)
    i, j = step.merged
    ri, rj = state.vars[i], state.vars[j]
    if ri.raised >= rj.raised:
        raised = step.level_gain + ri.raised
        origin_level = ri.origin_level
    else:
        raised = step.level_gain + rj.raised
        origin_level = rj.origin_level
    new_var = _var_from_coeff(step.new_coefficient, raised, origin_level)
    m = new_var.coeff.m
    survivors = [
        v if v.coeff.m == m else v._replace(coeff=v.coeff.truncate(m))
        for p, v in enumerate(state.vars)
        if p not in (i, j)
    ]
    survivors.append(new_var)
    return _State(tuple(survivors), state.depth + 1, state.specs + (spec,)), new_var


# -- tactic move generation ------------------------------------------------------


class _Ctx(NamedTuple):
    d: int
    s: int
    family: str
    by_level: dict
    by_class: dict


def _make_ctx(state: _State, d: int, family: str) -> _Ctx:
    by_level: dict[int, list[int]] = {}
    by_class: dict[int, tuple[list[int], list[int]]] = {}
    for idx, v in enumerate(state.vars):
        by_level.setdefault(v.level, []).append(idx)
    for lvl, idxs in by_level.items():
        c0 = [i for i in idxs if state.vars[i].c1 == 0]
        c1 = [i for i in idxs if state.vars[i].c1 == 1]
        by_class[lvl] = (c0, c1)
    return _Ctx(d, len(state.vars), family, by_level, by_class)


def _pair_specs(state: _State, i: int, j: int) -> list[StepSpec]:
    if state.vars[i].c1 == state.vars[j].c1:
        return [StepSpec("S3", i, j), StepSpec("S2", i, j)]
    return [StepSpec("D", i, j, want=0), StepSpec("D", i, j, want=1)]


def _triple_spec(ctx: _Ctx, i: int, j: int, k: int) -> StepSpec:
    kind = "T" if ctx.family == RAMIFIED_J1 else "ST"
    return StepSpec(kind, i, j, third=k)


def _gen_fromtwo(state: _State, ctx: _Ctx) -> list[Move]:
    moves = []
    for lvl, idxs in ctx.by_level.items():
        if len(idxs) < 2:
            continue
        for a in range(len(idxs)):
            for b in range(a + 1, len(idxs)):
                i, j = idxs[a], idxs[b]
                vi, vj = state.vars[i], state.vars[j]
                top = max(vi.raised, vj.raised)
                if vi.c1 == vj.c1 and top >= 2:
                    moves.append(Move("fromtwo", (StepSpec("S3", i, j),)))
                elif top >= 4:
                    if vi.c1 == vj.c1:
                        moves.append(Move("fromtwo", (StepSpec("S3", i, j),)))
                    else:
                        moves.append(Move("fromtwo", (StepSpec("D", i, j, want=0),)))
    return moves


def _gen_empty4(state: _State, ctx: _Ctx) -> list[Move]:
    if ctx.family != RAMIFIED_J1:
        return []
    moves = []
    for lvl, (c0, c1) in ctx.by_class.items():
        if not ctx.by_level.get((lvl + 4) % ctx.d):
            continue
        for cls in (c0, c1):
            if len(cls) >= 3:
                moves.append(Move("empty4", (_triple_spec(ctx, *cls[:3]),)))
    return moves


def _gen_fivesame(state: _State, ctx: _Ctx) -> list[Move]:
    if ctx.family != RAMIFIED_J1:
        return []
    moves = []
    for lvl, (c0, c1) in ctx.by_class.items():
        if len(c0) >= 5 or len(c1) >= 5 or (len(c0) >= 3 and len(c1) >= 3):
            for cls in (c0, c1):
                if len(cls) >= 3:
                    moves.append(Move("fivesame", (_triple_spec(ctx, *cls[:3]),)))
    return moves


def _shifted(p: int, i: int, j: int) -> int:
    """Index of surviving parent variable p after (i, j) are consumed."""
    return p - (p > i) - (p > j)


def _gen_empty1(state: _State, ctx: _Ctx, field, degree) -> list[Move]:
    moves = []
    for lvl, (c0, c1) in ctx.by_class.items():
        nxt = ctx.by_level.get((lvl + 1) % ctx.d)
        if not nxt:
            continue
        for maj, minr in ((c0, c1), (c1, c0)):
            if len(maj) >= 3 and len(minr) >= 1:
                s2_spec = StepSpec("S2", maj[0], maj[1])
                try:
                    child, out1 = _apply_spec(field, degree, state, s2_spec)
                except (TacticError, PrecisionError):
                    continue
                resident = _shifted(nxt[0], maj[0], maj[1])
                third = _shifted(maj[2], maj[0], maj[1])
                other = _shifted(minr[0], maj[0], maj[1])
                res_c1 = child.vars[resident].c1
                d_spec = StepSpec("D", third, other, want=1 - res_c1)
                try:
                    child2, out2 = _apply_spec(field, degree, child, d_spec)
                except (TacticError, PrecisionError):
                    continue
                resident2 = _shifted(resident, third, other)
                out1_idx = _shifted(len(child.vars) - 1, third, other)
                want = child2.vars[out1_idx].c1
                d2_spec = StepSpec("D", len(child2.vars) - 1, resident2, want=want)
                moves.append(Move("empty1", (s2_spec, d_spec, d2_spec)))
                break
    return moves


def _disjoint_same_class_pairs(c0: list[int], c1: list[int]) -> tuple | None:
    if len(c0) >= 4:
        return (c0[0], c0[1]), (c0[2], c0[3])
    if len(c1) >= 4:
        return (c1[0], c1[1]), (c1[2], c1[3])
    if len(c0) >= 2 and len(c1) >= 2:
        return (c0[0], c0[1]), (c1[0], c1[1])
    return None


def _gen_empty234(state: _State, ctx: _Ctx) -> list[Move]:
    moves = []
    for lvl, (c0, c1) in ctx.by_class.items():
        pairs = _disjoint_same_class_pairs(c0, c1)
        if pairs is None:
            continue
        if not any(ctx.by_level.get((lvl + delta) % ctx.d) for delta in (2, 3, 4)):
            continue
        (a, b), (p, q) = pairs
        p2, q2 = _shifted(p, a, b), _shifted(q, a, b)
        moves.append(Move("empty234", (StepSpec("S2", a, b), StepSpec("S2", p2, q2))))
        moves.append(Move("empty234", (StepSpec("S3", a, b), StepSpec("S3", p2, q2))))
    return moves


def _gen_max7(state: _State, ctx: _Ctx) -> list[Move]:
    moves = []
    for lvl, (c0, c1) in ctx.by_class.items():
        if len(c0) // 2 + len(c1) // 2 >= 3:
            cls = c0 if len(c0) >= 2 else c1
            moves.append(Move("max7", (StepSpec("S2", cls[0], cls[1]),)))
    return moves


def _gen_max6(state: _State, ctx: _Ctx) -> list[Move]:
    if not (5 * ctx.s >= 7 * ctx.d or ctx.family == RAMIFIED_J1):
        return []
    c0, c1 = ctx.by_class.get(0, ([], []))
    if len(c0) + len(c1) < 6:
        return []
    cls = c0 if len(c0) >= 2 else c1
    return [Move("max6", (StepSpec("S2", cls[0], cls[1]),))]


def _gen_max5(state: _State, ctx: _Ctx) -> list[Move]:
    if not (5 * ctx.s >= 7 * ctx.d or (ctx.family == RAMIFIED_J1 and ctx.s >= ctx.d + 1)):
        return []
    if len(ctx.by_level.get(0, [])) < 5:
        return []
    lvl1 = ctx.by_level.get(1, [])
    if len(lvl1) < 2:
        return []
    return [Move("max5", (spec,)) for spec in _pair_specs(state, lvl1[0], lvl1[1])]


def _gen_max4(state: _State, ctx: _Ctx) -> list[Move]:
    if not (5 * ctx.s >= 7 * ctx.d or (ctx.family == RAMIFIED_J1 and ctx.s >= ctx.d + 1)):
        return []
    c0, c1 = ctx.by_class.get(0, ([], []))
    if _disjoint_same_class_pairs(c0, c1) is None:
        return []
    lvl1 = ctx.by_level.get(1, [])
    if len(lvl1) < 2:
        return []
    return [Move("max4", (spec,)) for spec in _pair_specs(state, lvl1[0], lvl1[1])]


def _gen_two_same_two_diff(state: _State, ctx: _Ctx) -> list[Move]:
    moves = []
    for lvl, (c0, c1) in ctx.by_class.items():
        same = c0 if len(c0) >= 2 else (c1 if len(c1) >= 2 else None)
        if same is None:
            continue
        for delta, kind in ((1, "S2"), (2, "S2"), (3, "S3")):
            t0, t1 = ctx.by_class.get((lvl + delta) % ctx.d, ([], []))
            if t0 and t1:
                moves.append(Move("twoSameTwoDiff", (StepSpec(kind, same[0], same[1]),)))
    return moves


def _gen_two_same_two_more(state: _State, ctx: _Ctx) -> list[Move]:
    moves = []
    for lvl, (c0, c1) in ctx.by_class.items():
        same = c0 if len(c0) >= 2 else (c1 if len(c1) >= 2 else None)
        if same is None:
            continue
        occ = lambda delta: bool(ctx.by_level.get((lvl + delta) % ctx.d))
        if occ(2) and occ(3):
            moves.append(Move("twoSameTwoMore", (StepSpec("S2", same[0], same[1]),)))
        if occ(3) and occ(4):
            moves.append(Move("twoSameTwoMore", (StepSpec("S3", same[0], same[1]),)))
    return moves


def _gen_two_and_two_and_one(state: _State, ctx: _Ctx) -> list[Move]:
    moves = []
    for lvl, (c0, c1) in ctx.by_class.items():
        if not (len(c0) >= 2 or len(c1) >= 2):
            continue
        lvl1 = ctx.by_level.get((lvl + 1) % ctx.d, [])
        if len(lvl1) < 2:
            continue
        if any(ctx.by_level.get((lvl + delta) % ctx.d) for delta in (2, 3, 4)):
            for spec in _pair_specs(state, lvl1[0], lvl1[1]):
                moves.append(Move("twoAndTwoAndOne", (spec,)))
    return moves


def _gen_two_diff_two_more(state: _State, ctx: _Ctx) -> list[Move]:
    moves = []
    for lvl, (c0, c1) in ctx.by_class.items():
        if not (c0 and c1):
            continue
        if not ctx.by_level.get((lvl + 1) % ctx.d):
            continue
        if ctx.by_level.get((lvl + 2) % ctx.d) or ctx.by_level.get((lvl + 4) % ctx.d):
            moves.append(Move("twoDiffTwoMore", (StepSpec("D", c0[0], c1[0], want=0),)))
            moves.append(Move("twoDiffTwoMore", (StepSpec("D", c0[0], c1[0], want=1),)))
    return moves


def _gen_threeokay(state: _State, ctx: _Ctx) -> list[Move]:
    if ctx.family != RAMIFIED_J0 or 7 * ctx.s < 10 * ctx.d:
        return []
    moves = []
    counts = [len(ctx.by_level.get(k, [])) for k in range(ctx.d)]
    for k in range(ctx.d - 3):
        c0, c1 = ctx.by_class.get(k, ([], []))
        same = c0 if len(c0) >= 2 else (c1 if len(c1) >= 2 else None)
        if same is None or counts[k + 2] < 4:
            continue
        if sum(counts[: k + 2]) <= k + 4:
            moves.append(Move("threeokay", (StepSpec("S2", same[0], same[1]),)))
    return moves


def _gen_threeoh(state: _State, ctx: _Ctx) -> list[Move]:
    if ctx.family != RAMIFIED_J1 or ctx.s < ctx.d + 1:
        return []
    moves = []
    counts = [len(ctx.by_level.get(k, [])) for k in range(ctx.d)]
    for i, kind in ((2, "S2"), (3, "S3")):
        for k in range(ctx.d - i):
            c0, c1 = ctx.by_class.get(k, ([], []))
            same = c0 if len(c0) >= 2 else (c1 if len(c1) >= 2 else None)
            if same is None or counts[k + i] < 4:
                continue
            if k + i + 1 < ctx.d and counts[k + i + 1]:
                continue
            if sum(counts[: k + i]) <= k + i + 1:
                moves.append(Move("threeoh", (StepSpec(kind, same[0], same[1]),)))
    return moves


def _gen_slide(state: _State, ctx: _Ctx) -> list[Move]:
    moves = []
    for lvl, idxs in ctx.by_level.items():
        if len(idxs) >= 2 and ctx.by_level.get((lvl + 1) % ctx.d):
            moves.append(Move("slide", (_pair_specs(state, idxs[0], idxs[1])[0],)))
    return moves


_GENERIC_TRIPLE_CAP = 6


def _gen_generic(state: _State, ctx: _Ctx) -> list[Move]:
    moves = []
    for lvl in sorted(ctx.by_level):
        idxs = ctx.by_level[lvl]
        for a in range(len(idxs)):
            for b in range(a + 1, len(idxs)):
                for spec in _pair_specs(state, idxs[a], idxs[b]):
                    moves.append(Move("genericPair", (spec,)))
        c0, c1 = ctx.by_class[lvl]
        for cls in (c0, c1):
            head = cls[:_GENERIC_TRIPLE_CAP]
            for a in range(len(head)):
                for b in range(a + 1, len(head)):
                    for c in range(b + 1, len(head)):
                        moves.append(
                            Move("genericPair", (_triple_spec(ctx, head[a], head[b], head[c]),))
                        )
    return moves


def _generate_moves(state: _State, d: int, family: str, field, degree) -> list[Move]:
    ctx = _make_ctx(state, d, family)
    out: list[Move] = []
    seen: set[tuple[StepSpec, ...]] = set()
    generators = (
        ("fromtwo", lambda: _gen_fromtwo(state, ctx)),
        ("empty4", lambda: _gen_empty4(state, ctx)),
        ("fivesame", lambda: _gen_fivesame(state, ctx)),
        ("empty1", lambda: _gen_empty1(state, ctx, field, degree)),
        ("empty234", lambda: _gen_empty234(state, ctx)),
        ("max7", lambda: _gen_max7(state, ctx)),
        ("max6", lambda: _gen_max6(state, ctx)),
        ("max5", lambda: _gen_max5(state, ctx)),
        ("max4", lambda: _gen_max4(state, ctx)),
        ("twoSameTwoDiff", lambda: _gen_two_same_two_diff(state, ctx)),
        ("twoSameTwoMore", lambda: _gen_two_same_two_more(state, ctx)),
        ("twoAndTwoAndOne", lambda: _gen_two_and_two_and_one(state, ctx)),
        ("twoDiffTwoMore", lambda: _gen_two_diff_two_more(state, ctx)),
        ("threeokay", lambda: _gen_threeokay(state, ctx)),
        ("threeoh", lambda: _gen_threeoh(state, ctx)),
        ("slide", lambda: _gen_slide(state, ctx)),
        ("genericPair", lambda: _gen_generic(state, ctx)),
    )
    for _, gen in generators:
        for move in gen():
            if move.steps not in seen:
                seen.add(move.steps)
                out.append(move)
    return out


def apply_tactic(form: AdditiveForm, tactic: str) -> list[tuple[Move, AdditiveForm]]:
    """Moves a named tactic proposes on a form, with the resulting forms.

    Tactics that depend on how far variables have already been raised
    (fromtwo) never match a plain form, where every raise is zero.
    """
    if tactic not in TACTIC_NAMES:
        raise InputError(f"unknown tactic {tactic!r}; expected one of {TACTIC_NAMES}")
    if form.s == 0:
        return []
    work, _ = reduce_form_levels(form)
    state = _initial_state(work)
    ctx = _make_ctx(state, form.degree, form.field.family)
    gen_map = {
        "slide": lambda: _gen_slide(state, ctx),
        "fromtwo": lambda: _gen_fromtwo(state, ctx),
        "empty1": lambda: _gen_empty1(state, ctx, form.field, form.degree),
        "empty4": lambda: _gen_empty4(state, ctx),
        "empty234": lambda: _gen_empty234(state, ctx),
        "max7": lambda: _gen_max7(state, ctx),
        "fivesame": lambda: _gen_fivesame(state, ctx),
        "max6": lambda: _gen_max6(state, ctx),
        "max5": lambda: _gen_max5(state, ctx),
        "max4": lambda: _gen_max4(state, ctx),
        "twoSameTwoDiff": lambda: _gen_two_same_two_diff(state, ctx),
        "twoSameTwoMore": lambda: _gen_two_same_two_more(state, ctx),
        "twoAndTwoAndOne": lambda: _gen_two_and_two_and_one(state, ctx),
        "twoDiffTwoMore": lambda: _gen_two_diff_two_more(state, ctx),
        "threeokay": lambda: _gen_threeokay(state, ctx),
        "threeoh": lambda: _gen_threeoh(state, ctx),
        "genericPair": lambda: _gen_generic(state, ctx),
    }
    results = []
    for move in gen_map[tactic]():
        out_form = work
        try:
            for spec in move.steps:
                out_form, _ = _CONSTRUCTORS[spec.kind](out_form, spec)
        except PrecisionError:
            continue
        results.append((move, out_form))
    return results


# -- witness construction --------------------------------------------------------


def _pivot_candidates(
    form: AdditiveForm, values: Sequence[RingElement]
) -> list[tuple[int, int]]:
    """(pivot, derivative valuation) for every nonzero coordinate."""
    out = []
    for p, v in enumerate(values):
        if v.is_zero():
            continue
        w = ring.valuation(_derivative_element(form, values, p))
        if w is not INF:
            out.append((p, int(w)))
    return out


def _newton_iterate(
    form: AdditiveForm,
    values: Sequence[RingElement],
    pivot: int,
    target: int,
) -> tuple[tuple[RingElement, ...], tuple[str, ...], float]:
    """Newton iteration on the pivot coordinate until val(F) >= target.

    The surplus val(F) - 2*val(F') at least doubles per step; a failure to
    increase indicates a caller bug and raises.
    """
    vals = list(values)
    log: list[str] = []
    prev_surplus: int | None = None
    for it in range(64):
        fv = evaluate_form(form, vals)
        v_now = ring.valuation(fv)
        if v_now >= target:
            return tuple(vals), tuple(log), v_now
        dfv = _derivative_element(form, vals, pivot)
        w_now = ring.valuation(dfv)
        if w_now is INF:
            raise InternalError("vanishing derivative at the pivot")
        surplus = int(v_now) - 2 * int(w_now)
        if surplus < 1:
            raise InternalError(
                f"Newton criterion unmet: val(F)={int(v_now)} <= 2*val(F')={2 * int(w_now)}"
            )
        if prev_surplus is not None and surplus <= prev_surplus:
            raise InternalError("Newton surplus failed to increase")
        prev_surplus = surplus
        log.append(f"newton: val(F)={int(v_now)} val(F')={int(w_now)} surplus={surplus}")
        unit_f = ring.div_pi_exact(fv, int(v_now))
        unit_d = ring.div_pi_exact(dfv, int(w_now))
        m = min(unit_f.m, unit_d.m)
        delta = (
            unit_f.truncate(m)
            * ring.invert_unit(unit_d.truncate(m))
            * ring.pi(form.field, m) ** (int(v_now) - int(w_now))
        )
        vals = [v.truncate(m) for v in vals]
        vals[pivot] = vals[pivot] - delta
    raise InternalError("Newton iteration did not reach the target precision")


def hensel_lift(
    form: AdditiveForm,
    assignment: Sequence[RingElement],
    pivot: int,
    target_precision: int,
) -> ZeroWitness:
    """Lift an approximate zero to the target precision along one coordinate.

    Requires the Newton criterion val(F) >= 2*val(dF/dx_pivot) + 1 up front;
    calling it on anything weaker is a caller bug, not a user error.
    """
    if not 0 <= pivot < form.s:
        raise InputError(f"pivot {pivot} out of range")
    values = tuple(assignment)
    fv = evaluate_form(form, values)
    v_now = ring.valuation(fv)
    log: tuple[str, ...] = ()
    if v_now < target_precision:
        w_now = ring.valuation(_derivative_element(form, values, pivot))
        if w_now is INF or int(v_now) < 2 * int(w_now) + 1:
            raise InternalError(
                "hensel_lift called without the Newton criterion: "
                f"val(F)={v_now}, val(F')={w_now}"
            )
        values, log, v_now = _newton_iterate(form, values, pivot, target_precision)
    guard = min(v.pi_precision for v in values) - 2
    exact = v_now is INF or v_now >= guard
    precision = guard if exact else int(v_now)
    witness = ZeroWitness(
        assignment=tuple(values),
        precision=precision,
        exact_to_precision=exact,
        pivot=pivot,
        trace=SubstitutionTree(root=form, steps=()),
        lift_log=log,
        rotation=0,
    )
    report = verify_witness(form, witness)
    if not report.passed:
        raise InternalError(f"lifted witness failed verification: {report.messages}")
    return witness


def verify_witness(form: AdditiveForm, witness: ZeroWitness) -> VerificationReport:
    """Re-derive every claim of a witness from scratch.

    Recomputes the evaluation valuation with plain ring arithmetic, checks
    primitivity, and checks the Newton slack at the pivot; trusts nothing
    the search recorded.
    """
    messages = []
    if len(witness.assignment) != form.s:
        return VerificationReport(False, 0, False, False, ("assignment length mismatch",))
    value = evaluate_form(form, witness.assignment)
    measured = ring.valuation(value)
    ok_val = measured >= witness.precision
    if not ok_val:
        messages.append(f"measured valuation {measured} below claimed {witness.precision}")
    primitive = any(ring.valuation(v) == 0 for v in witness.assignment)
    if not primitive:
        messages.append("assignment is not primitive (no unit coordinate)")
    newton_ok = False
    if 0 <= witness.pivot < form.s and not witness.assignment[witness.pivot].is_zero():
        w = ring.valuation(_derivative_element(form, witness.assignment, witness.pivot))
        if w is not INF and witness.precision >= 2 * int(w) + 1:
            newton_ok = True
    if not newton_ok:
        messages.append("pivot does not satisfy the Newton slack inequality")
    return VerificationReport(
        passed=ok_val and primitive and newton_ok,
        measured_valuation=measured,
        primitive=primitive,
        newton_slack_ok=newton_ok,
        messages=tuple(messages),
    )


def _replay_chain(
    base: AdditiveForm, specs: Sequence[StepSpec], cancel_last: bool
) -> tuple[AdditiveForm | None, tuple[RingElement, ...] | None]:
    """Replay a move chain on a rotated root; returns the final form and the
    assignment (on the root's variables) that kills the contracted tower.

    With cancel_last, the last spec is expected to cancel exactly: its pair
    assignment is emitted directly instead of a contraction step.
    """
    work = base
    specs = list(specs)
    last = specs.pop() if cancel_last else None
    for spec in specs:
        work, _ = _CONSTRUCTORS[spec.kind](work, spec)
    if cancel_last:
        form = work
        if last.kind in ("T", "ST"):
            # replicate the constructor's pair selection without building a step
            try:
                _, step = _CONSTRUCTORS[last.kind](form, last)
                raise InternalError("expected cancellation did not occur")
            except PrecisionError:
                pass
            # selection must be recomputed: fall back to trying all pairs
            choices = [(last.i, last.j), (last.i, last.third), (last.j, last.third)]
        else:
            choices = [(last.i, last.j)]
        for i, j in choices:
            for c in (0, 1):
                ai, aj, _, red_i, red_j, b1, b2, new_coeff = raw_pair_sum(form, i, j, c)
                if not new_coeff.is_zero():
                    continue
                m = b1.m
                top = max(red_i, red_j)
                values = [ring.zero(form.field, m) for _ in range(form.s)]
                values[i] = b1 * ring.pi(form.field, m) ** (top - red_i)
                values[j] = b2 * ring.pi(form.field, m) ** (top - red_j)
                tree = form.provenance if isinstance(form.provenance, SubstitutionTree) else SubstitutionTree(form, ())
                return None, pullback(values, tree)
        return None, None
    m = work.bit_precision
    values = [ring.zero(work.field, m) for _ in range(work.s)]
    values[-1] = ring.one(work.field, m)
    tree = work.provenance if isinstance(work.provenance, SubstitutionTree) else SubstitutionTree(work, ())
    return work, pullback(values, tree)


def _attempt_witness(
    user_form: AdditiveForm,
    base_rotation: int,
    specs: Sequence[StepSpec],
    origin_level: int,
    target: int,
    cancel_last: bool = False,
) -> ZeroWitness | None:
    d = user_form.degree
    root = AdditiveForm(user_form.field, d, user_form.coefficients)
    # origin_level was measured in the frame rotated by base_rotation; the
    # rotation that puts the origin variable at level 0 is tried first.
    rotations = [(base_rotation - origin_level + k) % d for k in range(d)]
    for total_rot in rotations:
        try:
            base = rotate_form(root, total_rot)
            base, _ = reduce_form_levels(base)
            final_form, values = _replay_chain(base, specs, cancel_last)
        except (TacticError, PrecisionError, InternalError):
            continue
        if values is None:
            continue
        value = evaluate_form(root, values)
        v_now = ring.valuation(value)
        candidates = _pivot_candidates(root, values)
        if not candidates:
            continue
        guard = min(v.pi_precision for v in values) - 2
        if v_now >= target:
            feasible = [(w, p) for p, w in candidates if 2 * w + 1 <= min(v_now, guard)]
            if not feasible:
                continue
            w, pivot = min(feasible)
            exact = v_now is INF or v_now >= guard
            precision = guard if exact else int(v_now)
            lift_log: tuple[str, ...] = ()
        else:
            feasible = [(w, p) for p, w in candidates if int(v_now) >= 2 * w + 1]
            if not feasible:
                continue
            w, pivot = min(feasible)
            try:
                values, lift_log, v_after = _newton_iterate(root, values, pivot, target)
            except (InternalError, PrecisionError):
                continue
            guard = min(v.pi_precision for v in values) - 2
            exact = v_after is INF or v_after >= guard
            precision = guard if exact else int(v_after)
        tree = (
            final_form.provenance
            if final_form is not None and isinstance(final_form.provenance, SubstitutionTree)
            else SubstitutionTree(root, ())
        )
        witness = ZeroWitness(
            assignment=tuple(values),
            precision=precision,
            exact_to_precision=exact,
            pivot=pivot,
            trace=tree,
            lift_log=lift_log,
            rotation=total_rot,
        )
        if verify_witness(user_form, witness).passed:
            return witness
    return None


# -- the search ------------------------------------------------------------------


def find_zero(
    form: AdditiveForm,
    target_precision: int | None = None,
    budget: int = DEFAULT_BUDGET,
    max_depth: int | None = None,
) -> ZeroWitness | NotFound:
    """Search for a verified nontrivial zero of an additive form.

    Returns a ZeroWitness whose claims have been independently re-checked,
    or NotFound with search statistics.  NotFound is the expected outcome
    for forms with too few variables, not an error.
    """
    d = form.degree
    target = target_precision if target_precision is not None else 2 * d + 8
    depth_cap = max_depth if max_depth is not None else 2 * d
    if form.s == 0:
        return NotFound(0, 0, (), budget_exhausted=False)
    available = 2 * min(c.m for c in form.coefficients) - 2
    if available < target + 4:
        raise PrecisionError(
            f"target precision {target} needs bit precision at least {(target + 6) // 2 + 1}; "
            f"re-run with a larger N (e.g. precision {ring.recommended_bit_precision(d)})"
        )
    if form.s == 1:
        return NotFound(0, 0, (str(profile(form)),), budget_exhausted=False)

    normalized, rotation = normalize(form)
    work, _ = reduce_form_levels(
        AdditiveForm(form.field, d, normalized.coefficients)
    )
    start = _initial_state(work)
    field, family = form.field, form.field.family

    counter = 0
    heap: list[tuple[tuple, int, _State]] = []

    def push(state: _State) -> None:
        nonlocal counter
        top = max((v.raised for v in state.vars), default=0)
        heapq.heappush(heap, ((-top, state.depth, counter), counter, state))
        counter += 1

    def state_key(state: _State) -> tuple:
        return tuple(sorted((v.level, v.coeff.u, v.coeff.v, v.raised) for v in state.vars))

    push(start)
    visited = {state_key(start)}
    applications = 0
    max_depth_seen = 0
    deepest: list[str] = []
    budget_exhausted = False

    while heap and not budget_exhausted:
        _, _, state = heapq.heappop(heap)
        if state.depth > max_depth_seen:
            max_depth_seen = state.depth
            deepest = [str(profile(_state_form(field, d, state)))]
        elif state.depth == max_depth_seen and len(deepest) < 5:
            text = str(profile(_state_form(field, d, state)))
            if text not in deepest:
                deepest.append(text)
        if state.depth >= depth_cap:
            continue
        moves = _generate_moves(state, d, family, field, d)
        for move in moves:
            child = state
            terminal_var: _Var | None = None
            failed = False
            for pos, spec in enumerate(move.steps):
                applications += 1
                if applications > budget:
                    budget_exhausted = True
                    break
                try:
                    child, new_var = _apply_spec(field, d, child, spec)
                except TacticError:
                    failed = True
                    break
                except PrecisionError:
                    witness = _attempt_witness(
                        form,
                        rotation,
                        child.specs + (spec,),
                        child.vars[spec.i].origin_level if spec.i < len(child.vars) else 0,
                        target,
                        cancel_last=True,
                    )
                    if witness is not None:
                        return witness
                    failed = True
                    break
                if new_var.raised >= HENSEL_RAISE:
                    terminal_var = new_var
                    break
            if budget_exhausted:
                break
            if failed:
                continue
            if terminal_var is not None:
                witness = _attempt_witness(
                    form, rotation, child.specs, terminal_var.origin_level, target
                )
                if witness is not None:
                    return witness
            key = state_key(child)
            if key not in visited and child.depth < depth_cap:
                visited.add(key)
                push(child)

    return NotFound(
        nodes=applications,
        max_depth=max_depth_seen,
        deepest_profiles=tuple(deepest),
        budget_exhausted=budget_exhausted,
    )
