"""Anisotropy certificates and exhaustive audits.

Two certificate methods are implemented.  DISTINCT_LEVELS applies when the
s levels are pairwise distinct mod d: any nonzero assignment then gives the
s terms pairwise distinct valuations mod d, the minimum is attained once,
and the sum cannot vanish, so the form has no nontrivial zero at all.
EXHAUSTIVE_MOD(N) is a complete depth-first search over digit planes
proving that no primitive zero exists mod pi^N; since a nontrivial zero
over K scales to a primitive one, that also certifies anisotropy.

The digit-plane search assigns the pi^p digit of every variable at once.
Fixing digits 0..p of x determines x^d mod pi^(p+3) for p >= 1 (the linear
correction carries val(d) = 2 extra; the quadratic one carries 2(p+1)) and
mod pi^2 at p = 0, so a branch dies as soon as the partial sum is nonzero
at that modulus.  Primitivity is enforced at the root by running the
search once per choice of the first variable with a unit digit.

The audits instantiate the contraction hypotheses over every digit class
mod pi^4 and check the advertised gains and classes, so the constructions
the solver relies on are machine-checked rather than trusted.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from . import ring
from .contraction import d_contract, s2_contract, s3_contract, st_contract, t_contract
from .errors import InputError, PrecisionError, TacticError
from .fields import RAMIFIED_J0, RAMIFIED_J1, FieldDescriptor, all_fields
from .forms import AdditiveForm, form_hash, level_and_class, normalize, profile, random_form, satisfies_prefix_inequalities
from .ring import INF, RingElement

DISTINCT_LEVELS = "DISTINCT_LEVELS"
EXHAUSTIVE_MOD = "EXHAUSTIVE_MOD"


@dataclass(frozen=True)
class AnisotropyCertificate:
    method: str
    modulus: int | None
    form_hash: str
    nodes_visited: int = 0
    pruned: int = 0

    def report_text(self) -> str:
        lines = [f"CERTIFICATE {self.method}"]
        if self.modulus is not None:
            lines.append(f"modulus pi^{self.modulus}")
        lines.append(f"form {self.form_hash}")
        if self.method == EXHAUSTIVE_MOD:
            lines.append(f"nodes {self.nodes_visited}")
            lines.append(f"pruned {self.pruned}")
        return "\n".join(lines)

    def report_json(self) -> dict:
        return {
            "result": "CERTIFICATE",
            "method": self.method,
            "modulus": self.modulus,
            "form_hash": self.form_hash,
            "nodes_visited": self.nodes_visited,
            "pruned": self.pruned,
        }


@dataclass(frozen=True)
class Counterexample:
    """A primitive zero mod pi^N found by the exhaustive search."""

    assignment: tuple[RingElement, ...]
    modulus: int
    nodes_visited: int

    def report_text(self) -> str:
        lines = ["COUNTEREXAMPLE"]
        for i, v in enumerate(self.assignment):
            lines.append(f"x{i} = {ring.format_element(v)}")
        lines.append(f"modulus pi^{self.modulus}")
        return "\n".join(lines)

    def report_json(self) -> dict:
        return {
            "result": "COUNTEREXAMPLE",
            "assignment": [ring.format_element(v) for v in self.assignment],
            "modulus": self.modulus,
            "nodes_visited": self.nodes_visited,
        }


@dataclass(frozen=True)
class Indeterminate:
    """Budget ran out before the search completed; never a certificate."""

    nodes_visited: int
    budget: int
    message: str

    def report_text(self) -> str:
        return f"INDETERMINATE after {self.nodes_visited} nodes (budget {self.budget}): {self.message}"

    def report_json(self) -> dict:
        return {
            "result": "INDETERMINATE",
            "nodes_visited": self.nodes_visited,
            "budget": self.budget,
            "message": self.message,
        }


def distinct_level_certificate(form: AdditiveForm) -> AnisotropyCertificate | None:
    """Certificate when all levels are pairwise distinct mod d, else None."""
    levels = [level_and_class(form, i)[0] for i in range(form.s)]
    if len(set(levels)) != len(levels):
        return None
    return AnisotropyCertificate(
        method=DISTINCT_LEVELS, modulus=None, form_hash=form_hash(form)
    )


def _prune_modulus(plane: int, n: int) -> int:
    if plane == 0:
        return min(n, 2)
    return min(n, plane + 3)


def exhaustive_no_primitive_zero(
    form: AdditiveForm,
    modulus: int,
    node_budget: int | None = None,
    prune: bool = True,
) -> AnisotropyCertificate | Counterexample | Indeterminate:
    """Complete search for a primitive zero mod pi^modulus.

    Either proves none exists (certificate), exhibits one (counterexample),
    or gives up within the node budget (indeterminate; never a false
    certificate).

    The inner loop runs on raw coordinate pairs rather than RingElement so
    the per-node cost is a handful of integer operations.
    """
    n = modulus
    if n < 1:
        raise InputError("modulus must be at least 1")
    s = form.s
    if s == 0:
        return AnisotropyCertificate(EXHAUSTIVE_MOD, n, form_hash(form))
    if form.bit_precision is not None and 2 * form.bit_precision - 2 < n:
        raise PrecisionError("form coefficients carry fewer digits than the requested modulus")
    m_eval = max(ring.MIN_BIT_PRECISION, n + 4)
    m_eval = min(m_eval, form.bit_precision)

    order = sorted(range(s), key=lambda i: level_and_class(form, i)[0])
    field = form.field
    d = form.degree
    mask = (1 << m_eval) - 1
    psc, psp = field.pi_sq_const & mask, field.pi_sq_pi

    def mul(xu: int, xv: int, yu: int, yv: int) -> tuple[int, int]:
        vv = xv * yv
        return (xu * yu + psc * vv) & mask, (xu * yv + xv * yu + psp * vv) & mask

    def val_at_least(u: int, v: int, k: int) -> bool:
        # val(u + v*pi) = min(2*val2(u), 2*val2(v) + 1)
        need_u = (k + 1) // 2
        need_v = k // 2
        return (u & ((1 << need_u) - 1)) == 0 and (v & ((1 << need_v) - 1)) == 0

    def power_d(u: int, v: int) -> tuple[int, int]:
        ru, rv = 1, 0
        bu, bv = u, v
        e = d
        while e:
            if e & 1:
                ru, rv = mul(ru, rv, bu, bv)
            bu, bv = mul(bu, bv, bu, bv)
            e >>= 1
        return ru, rv

    coeff_pairs = [(form.coefficients[i].u & mask, form.coefficients[i].v & mask) for i in order]
    pow_cache: dict[tuple[int, int], tuple[int, int]] = {}
    term_cache: list[dict[tuple[int, int], tuple[int, int]]] = [dict() for _ in range(s)]

    def term(var: int, pu: int, pv: int) -> tuple[int, int]:
        key = (pu, pv)
        cached = term_cache[var].get(key)
        if cached is None:
            powed = pow_cache.get(key)
            if powed is None:
                powed = power_d(pu, pv)
                pow_cache[key] = powed
            cu, cv = coeff_pairs[var]
            cached = mul(cu, cv, powed[0], powed[1])
            term_cache[var][key] = cached
        return cached

    pi_pairs = []
    pu_, pv_ = 1, 0
    for _ in range(n):
        pi_pairs.append((pu_, pv_))
        pu_, pv_ = mul(pu_, pv_, 0, 1)

    nodes = 0
    pruned = 0
    budget = node_budget if node_budget is not None else 50_000_000

    def plane_search(plane: int, prefixes: tuple[tuple[int, int], ...], first_unit: int):
        """Extend every variable by one digit plane and recurse.

        At plane 0 the variables before first_unit are pinned to digit 0 and
        first_unit to digit 1, partitioning primitive assignments by their
        first unit variable.
        """
        nonlocal nodes, pruned
        if prune:
            mod_check = _prune_modulus(plane, n)
        else:
            mod_check = n if plane == n - 1 else 0
        if plane == 0:
            free = list(range(first_unit + 1, s))
            pinned = ((first_unit, 1),)
        else:
            free = list(range(s))
            pinned = ()
        ppu, ppv = pi_pairs[plane]
        base_prefix = list(prefixes)
        for var, _bit in pinned:
            u, v = base_prefix[var]
            base_prefix[var] = ((u + ppu) & mask, (v + ppv) & mask)
        # the base sum covers exactly the variables the mask loop does not
        free_set = set(free)
        base_tu, base_tv = 0, 0
        for var in range(s):
            if var in free_set:
                continue
            tu, tv = term(var, *base_prefix[var])
            base_tu, base_tv = (base_tu + tu) & mask, (base_tv + tv) & mask
        # per free variable: (prefix, term) for digit 0 and digit 1
        options = []
        for var in free:
            u, v = base_prefix[var]
            t0 = term(var, u, v)
            u1, v1 = (u + ppu) & mask, (v + ppv) & mask
            t1 = term(var, u1, v1)
            options.append((var, (u, v), t0, (u1, v1), t1))
        nfree = len(free)
        for bits in range(1 << nfree):
            nodes += 1
            if nodes > budget:
                return "budget"
            tu, tv = base_tu, base_tv
            for pos in range(nfree):
                _, _, (t0u, t0v), _, (t1u, t1v) = options[pos]
                if (bits >> pos) & 1:
                    tu, tv = (tu + t1u) & mask, (tv + t1v) & mask
                else:
                    tu, tv = (tu + t0u) & mask, (tv + t0v) & mask
            if mod_check and not val_at_least(tu, tv, mod_check):
                pruned += 1
                continue
            new_prefixes = list(base_prefix)
            for pos in range(nfree):
                var, p0, _, p1, _ = options[pos]
                new_prefixes[var] = p1 if (bits >> pos) & 1 else p0
            if plane == n - 1:
                if val_at_least(tu, tv, n):
                    return tuple(new_prefixes)
                continue
            result = plane_search(plane + 1, tuple(new_prefixes), first_unit)
            if result is not None:
                return result
        return None

    start = tuple((0, 0) for _ in range(s))
    for first_unit in range(s):
        result = plane_search(0, start, first_unit)
        if result == "budget":
            return Indeterminate(nodes, budget, "node budget exceeded before the search completed")
        if result is not None:
            assignment: list[RingElement | None] = [None] * s
            for pos, original in enumerate(order):
                u, v = result[pos]
                assignment[original] = RingElement(field, u, v, m_eval)
            return Counterexample(tuple(assignment), n, nodes)
    return AnisotropyCertificate(EXHAUSTIVE_MOD, n, form_hash(form), nodes_visited=nodes, pruned=pruned)


# -- power residue classification ------------------------------------------------


def classify_power_residues(field: FieldDescriptor, degree: int, k: int) -> frozenset[tuple[int, ...]]:
    """The set {x^d mod pi^k} over all residues mod pi^k, as digit tuples."""
    if not 1 <= k <= 8:
        raise InputError("classification supports 1 <= k <= 8")
    m = max(ring.MIN_BIT_PRECISION, k + 2)
    out = set()
    for x in ring.residues_mod(field, k, m):
        out.add(ring.digit_expand(x ** degree, k).digits)
    return frozenset(out)


def expected_power_residues(field: FieldDescriptor, k: int) -> frozenset[tuple[int, ...]]:
    """{0, 1, 1 + pi^2 + pi^3} truncated to k digits."""
    zero_d = tuple([0] * k)
    one_d = tuple([1] + [0] * (k - 1))
    third = tuple((1, 0, 1, 1)[:k]) + tuple([0] * max(0, k - 4))
    return frozenset({zero_d, one_d, third})


# -- extremal forms ----------------------------------------------------------------


def extremal_form_j0(field: FieldDescriptor, degree: int, bit_precision: int | None = None) -> AdditiveForm:
    """The 3d/2 - 1 variable form with no primitive zero mod pi^d.

    Blocks of six variables (three unit coefficients, three with coefficient
    pi^2 + pi^3) at levels stepping by four, plus one variable at level 1 and
    one at level d-2.
    """
    m = bit_precision if bit_precision is not None else ring.recommended_bit_precision(degree)
    one = ring.one(field, m)
    p = ring.pi(field, m)
    block_unit = p * p + p * p * p
    coeffs: list[RingElement] = []
    for block in range((degree - 2) // 4):
        shift = p ** (4 * block)
        coeffs.extend([shift, shift, shift])
        coeffs.extend([shift * block_unit] * 3)
    coeffs.append(p)
    coeffs.append(p ** (degree - 2))
    return AdditiveForm(field, degree, tuple(coeffs))


def extremal_form_j1(field: FieldDescriptor, degree: int, bit_precision: int | None = None) -> AdditiveForm:
    """The d-variable form pi^0 x0^d + pi^1 x1^d + ... + pi^(d-1) x_{d-1}^d."""
    m = bit_precision if bit_precision is not None else ring.recommended_bit_precision(degree)
    p = ring.pi(field, m)
    return AdditiveForm(field, degree, tuple(p ** i for i in range(degree)))


# -- audits -------------------------------------------------------------------------


@dataclass(frozen=True)
class AuditReport:
    lemma_id: str
    field_id: str
    degree: int
    instances: int
    violations: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.violations

    def report_text(self) -> str:
        status = "ok" if self.passed else "FAILED"
        head = f"audit {self.lemma_id} {self.field_id} d={self.degree}: {self.instances} instances, {len(self.violations)} violations [{status}]"
        return "\n".join([head] + [f"  {v}" for v in self.violations])

    def report_json(self) -> dict:
        return {
            "lemma_id": self.lemma_id,
            "field": self.field_id,
            "degree": self.degree,
            "instances": self.instances,
            "violations": list(self.violations),
            "passed": self.passed,
        }


AUDIT_IDS = (
    "L2.1",
    "L2.2",
    "L2.3",
    "L2.4",
    "L2.5",
    "powers_mod_pi4",
    "two_mod_pi4",
    "L1_normalization",
)

_AUDIT_M = 32


def _class_rep(field: FieldDescriptor, digits: tuple[int, ...]) -> RingElement:
    return ring.from_digits(field, (1,) + digits, _AUDIT_M)


def _audit_pair_kind(field: FieldDescriptor, degree: int, kind: str) -> tuple[int, list[str]]:
    """Check one pair-contraction kind over all 64 digit-class pairs."""
    instances = 0
    violations: list[str] = []
    for a in product((0, 1), repeat=3):
        for b in product((0, 1), repeat=3):
            form = AdditiveForm(field, degree, (_class_rep(field, a), _class_rep(field, b)))
            applicable = (a[0] != b[0]) if kind == "D" else (a[0] == b[0])
            if kind == "D":
                for want in (0, 1):
                    instances += 1
                    try:
                        nf, step = d_contract(form, 0, 1, want)
                    except TacticError:
                        if applicable:
                            violations.append(f"D refused classes {a}/{b}")
                        continue
                    if not applicable:
                        violations.append(f"D accepted same-class {a}/{b}")
                        continue
                    lvl, c1 = level_and_class(nf, 0)
                    if step.level_gain != 1 or lvl != 1 or c1 != want:
                        violations.append(
                            f"D on {a}/{b} want={want}: gain={step.level_gain} level={lvl} c1={c1}"
                        )
            else:
                instances += 1
                op = s2_contract if kind == "S2" else s3_contract
                try:
                    nf, step = op(form, 0, 1)
                except TacticError:
                    if applicable:
                        violations.append(f"{kind} refused classes {a}/{b}")
                    continue
                if not applicable:
                    violations.append(f"{kind} accepted differing classes {a}/{b}")
                    continue
                if kind == "S2" and step.level_gain != 2:
                    violations.append(f"S2 on {a}/{b}: gain={step.level_gain}")
                if kind == "S3" and step.level_gain < 3:
                    violations.append(f"S3 on {a}/{b}: gain={step.level_gain}")
    return instances, violations


def _audit_triple_kind(field: FieldDescriptor, degree: int, kind: str) -> tuple[int, list[str]]:
    """Check T or ST over the 128 same-pi-coefficient digit-class triples."""
    instances = 0
    violations: list[str] = []
    op = t_contract if kind == "T" else st_contract
    for c1 in (0, 1):
        for deep in product(product((0, 1), repeat=2), repeat=3):
            instances += 1
            reps = tuple(_class_rep(field, (c1,) + digs) for digs in deep)
            form = AdditiveForm(field, degree, reps)
            try:
                nf, step = op(form, 0, 1, 2)
            except TacticError as exc:
                violations.append(f"{kind} refused triple c1={c1} {deep}: {exc}")
                continue
            if kind == "T" and step.level_gain < 4:
                violations.append(f"T on c1={c1} {deep}: gain={step.level_gain}")
            if kind == "ST":
                if step.level_gain != 2:
                    violations.append(f"ST on c1={c1} {deep}: gain={step.level_gain}")
                else:
                    _, out_c1 = level_and_class(nf, nf.s - 1)
                    if out_c1 != c1:
                        violations.append(f"ST on c1={c1} {deep}: output class {out_c1}")
    return instances, violations


def _audit_powers(field: FieldDescriptor, degree: int) -> tuple[int, list[str]]:
    violations: list[str] = []
    got = classify_power_residues(field, degree, 4)
    want = expected_power_residues(field, 4)
    instances = 16
    if got != want:
        violations.append(f"powers mod pi^4 = {sorted(got)} expected {sorted(want)}")
    for u in ring.enumerate_units_mod(field, 4, _AUDIT_M):
        instances += 1
        a = ring.digit_expand(u, 2).digits[1]
        powed = ring.digit_expand(u ** degree, 4).digits
        if powed != (1, 0, a, a):
            violations.append(f"unit {ring.format_element(u)}^({degree}) = {powed}, expected (1,0,{a},{a})")
    return instances, violations


def _audit_two(field: FieldDescriptor, degree: int) -> tuple[int, list[str]]:
    two = ring.one(field, _AUDIT_M) + ring.one(field, _AUDIT_M)
    digits = ring.digit_expand(two, 4).digits
    if digits != field.two_mod_pi4:
        return 1, [f"1+1 has digits {digits}, table says {field.two_mod_pi4}"]
    return 1, []


def _audit_normalization(field: FieldDescriptor, degree: int) -> tuple[int, list[str]]:
    violations: list[str] = []
    instances = 0
    for trial in range(50):
        form = random_form(field, degree, 3 + trial % 10, seed=1_000_003 * trial + 7)
        normalized, _ = normalize(form)
        instances += 1
        counts = profile(normalized).counts
        if not satisfies_prefix_inequalities(counts, form.s, degree):
            violations.append(f"trial {trial}: prefix inequality fails for {counts}")
        _, again = normalize(normalized)
        if again != 0:
            violations.append(f"trial {trial}: normalization not idempotent (t={again})")
    return instances, violations


def lemma_audit(
    lemma_id: str,
    field: FieldDescriptor | None = None,
    degree: int = 6,
) -> list[AuditReport]:
    """Exhaustively check one audited statement, per applicable field.

    Family-restricted audits (L2.4, L2.5) reject an explicitly requested
    field of the wrong family and are skipped silently when sweeping all
    fields.
    """
    if lemma_id not in AUDIT_IDS:
        raise InputError(f"unknown audit id {lemma_id!r}; expected one of {AUDIT_IDS}")
    family_only = {"L2.4": RAMIFIED_J1, "L2.5": RAMIFIED_J0}.get(lemma_id)
    if field is not None:
        if family_only is not None and field.family != family_only:
            raise InputError(f"audit {lemma_id} applies only to {family_only} fields")
        targets = [field]
    else:
        targets = [f for f in all_fields() if family_only is None or f.family == family_only]
    reports = []
    for fld in targets:
        if lemma_id == "L2.1":
            instances, violations = _audit_pair_kind(fld, degree, "D")
        elif lemma_id == "L2.2":
            instances, violations = _audit_pair_kind(fld, degree, "S2")
        elif lemma_id == "L2.3":
            instances, violations = _audit_pair_kind(fld, degree, "S3")
        elif lemma_id == "L2.4":
            instances, violations = _audit_triple_kind(fld, degree, "T")
        elif lemma_id == "L2.5":
            instances, violations = _audit_triple_kind(fld, degree, "ST")
        elif lemma_id == "powers_mod_pi4":
            instances, violations = _audit_powers(fld, degree)
        elif lemma_id == "two_mod_pi4":
            instances, violations = _audit_two(fld, degree)
        else:
            instances, violations = _audit_normalization(fld, degree)
        reports.append(
            AuditReport(lemma_id, fld.field_id, degree, instances, tuple(violations))
        )
    return reports
