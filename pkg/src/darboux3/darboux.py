"""Search engine for invariant algebraic surfaces and Darboux-type first
integrals of 3-D polynomial fields.

All searches reduce to exact linear algebra over the rationals on
degree-bounded coefficient spaces. A found object is always re-verified
against its defining relation before it is reported, so the randomized
pieces of the pencil machinery can only cost completeness of the *audit
trail*, never soundness of the output.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from .exactmath import PencilMatrix, QMatrix, UniPoly, null_space, pencil_rank_drop
from .fieldspec import FieldDef, hsa_params_of, lie_derivative
from .polyring import Cofactor, Monomial, Poly, monomials_up_to, poly_from_coeff_vector

DARBOUX_INTEGRAL_FOUND = "darboux_integral_found"
NONE_UP_TO_BOUND = "none_up_to_bound"

DEFAULT_DEGREE_BOUND = 4
HARD_DEGREE_CAP = 6

# audit line recorded in every pencil-search report
PENCIL_SAMPLING_NOTE = (
    "pencil minor sampling: per cell, the gcd of randomly chosen maximal minors is "
    "accumulated until it is constant or unchanged for 3 consecutive fresh minors; "
    "all rational candidates are re-verified exactly"
)

_SLOT_MONOMIAL = {
    "b0": Monomial(0, 0, 0),
    "b1": Monomial(1, 0, 0),
    "b2": Monomial(0, 1, 0),
    "b3": Monomial(0, 0, 1),
}


@dataclass(frozen=True)
class DarbouxCert:
    """A Darboux polynomial (kind 'polynomial', body h with X(h) = K*h) or an
    exponential factor e^g (kind 'exp_factor', body g with X(g) = L)."""

    kind: str
    body: Poly
    cofactor: Cofactor
    degree_bound_used: int
    primitive: bool = True

    def describe(self) -> str:
        if self.kind == "polynomial":
            return f"h = {self.body}  with cofactor  {self.cofactor}"
        return f"exp(g), g = {self.body}  with cofactor  {self.cofactor}"


@dataclass(frozen=True)
class CofactorTemplate:
    """How the four cofactor coordinates are handled by the pencil search:
    pinned to a value, swept over a finite list, or solved as the pencil
    eigen-unknown. Every slot must appear in exactly one role."""

    fixed: tuple[tuple[str, Fraction], ...] = ()
    eigen: str | None = None
    enumerated: tuple[tuple[str, tuple[Fraction, ...]], ...] = ()

    def __post_init__(self):
        fixed = tuple((s, Fraction(v)) for s, v in dict(self.fixed).items())
        enumerated = tuple(
            (s, tuple(Fraction(v) for v in vals)) for s, vals in dict(self.enumerated).items()
        )
        object.__setattr__(self, "fixed", fixed)
        object.__setattr__(self, "enumerated", enumerated)
        seen: list[str] = [s for s, _ in fixed] + [s for s, _ in enumerated]
        if self.eigen is not None:
            seen.append(self.eigen)
        if sorted(seen) != ["b0", "b1", "b2", "b3"]:
            raise ValueError(
                "template must assign each of b0..b3 to exactly one of "
                f"fixed/eigen/enumerated, got {sorted(seen)}"
            )

    @classmethod
    def default(cls, degree_bound: int) -> "CofactorTemplate":
        """b1 = b3 = 0, b2 swept over the integers -n..n, b0 eigen-solved."""
        sweep = tuple(Fraction(v) for v in range(-degree_bound, degree_bound + 1))
        return cls(
            fixed=(("b1", Fraction(0)), ("b3", Fraction(0))),
            eigen="b0",
            enumerated=(("b2", sweep),),
        )

    def eigen_count(self) -> int:
        return 0 if self.eigen is None else 1


@dataclass(frozen=True)
class CombinationSolution:
    """Weights making the cofactors of a certificate list cancel linearly."""

    weights: tuple[Fraction, ...]
    trivial: bool


@dataclass
class Verdict:
    model: FieldDef
    degree_bound: int
    darboux_polys: list[DarbouxCert]
    exp_factors: list[DarbouxCert]
    combinations: list[CombinationSolution]
    conclusion: str
    notes: str

    def combination_certs(self) -> list[DarbouxCert]:
        """Certificates the combination weights refer to, in weight order."""
        return [c for c in self.darboux_polys if c.primitive] + [
            c for c in self.exp_factors if c.primitive
        ]


# ---------------------------------------------------------------------------
# Verification of the defining relations
# ---------------------------------------------------------------------------


def verify_cofactor(f: FieldDef, h: Poly, k: Cofactor) -> bool:
    """X(h) == K*h, exactly."""
    if h.is_zero():
        raise ValueError("Darboux polynomial must be nonzero")
    return (lie_derivative(f, h) - k.as_poly() * h).is_zero()


def verify_exp_factor(f: FieldDef, g: Poly, l: Cofactor) -> bool:
    """X(g) == L, the defining identity for an exponential factor e^g."""
    return lie_derivative(f, g) == l.as_poly()


def verify_exp_factor_rational(f: FieldDef, g: Poly, h: Poly, l: Cofactor) -> bool:
    """X(g/h) == L as rational functions: X(g)*h - g*X(h) == L*h^2.

    Denominators are handled by verification only; the search itself covers
    the polynomial-exponent shape.
    """
    if h.is_zero():
        raise ZeroDivisionError("denominator polynomial must be nonzero")
    lhs = lie_derivative(f, g) * h - g * lie_derivative(f, h)
    return lhs == l.as_poly() * h * h


# ---------------------------------------------------------------------------
# Linear-map matrices on degree-bounded coefficient spaces
# ---------------------------------------------------------------------------


def _codomain_degree(f: FieldDef, bound: int) -> int:
    return max(bound + 1, bound - 1 + max(f.max_degree(), 0), 1)


def _poly_to_column(p: Poly, index: dict[Monomial, int], rows: int) -> list[Fraction]:
    col = [Fraction(0)] * rows
    for m, c in p.terms.items():
        col[index[m]] = c
    return col


def _columns_to_qmatrix(columns: list[list[Fraction]], rows: int) -> QMatrix:
    entries = [Fraction(0)] * (rows * len(columns))
    for j, col in enumerate(columns):
        for i, v in enumerate(col):
            if v:
                entries[i * len(columns) + j] = v
    return QMatrix(rows, len(columns), entries)


def search_darboux_fixed(f: FieldDef, k: Cofactor, degree_bound: int) -> list[Poly]:
    """Basis of {h : deg h <= bound, X(h) = K*h} for a fully pinned cofactor.

    With K = 0 this is the polynomial first integral search; constants are
    quotiented out in that case (they satisfy the relation trivially).
    """
    if degree_bound < 1:
        raise ValueError("degree bound must be >= 1")
    min_deg = 1 if k.is_zero() else 0
    domain = monomials_up_to(degree_bound, min_deg)
    codomain = monomials_up_to(_codomain_degree(f, degree_bound))
    index = {m: i for i, m in enumerate(codomain)}
    kp = k.as_poly()
    cols = []
    for m in domain:
        hm = Poly.term(m, 1)
        image = lie_derivative(f, hm) - kp * hm
        cols.append(_poly_to_column(image, index, len(codomain)))
    mat = _columns_to_qmatrix(cols, len(codomain))
    out = []
    for v in null_space(mat):
        p = poly_from_coeff_vector(v.column(0), domain).normalized()
        out.append(p)
    out.sort(key=lambda p: p.degree)  # stable: discovery order within a degree
    return out


def search_exp_factors(f: FieldDef, degree_bound: int) -> list[DarbouxCert]:
    """All exponential factors e^g with deg g <= bound and a degree <= 1
    cofactor, modulo constants, from one exact null-space computation on the
    joint linear system in (coefficients of g, b0..b3)."""
    if degree_bound < 1:
        raise ValueError("degree bound must be >= 1")
    domain = monomials_up_to(degree_bound, 1)  # g modulo constants
    codomain = monomials_up_to(_codomain_degree(f, degree_bound))
    index = {m: i for i, m in enumerate(codomain)}
    rows = len(codomain)
    cols = []
    for m in domain:
        cols.append(_poly_to_column(lie_derivative(f, Poly.term(m, 1)), index, rows))
    for slot in ("b0", "b1", "b2", "b3"):
        cols.append(_poly_to_column(Poly.term(_SLOT_MONOMIAL[slot], -1), index, rows))
    mat = _columns_to_qmatrix(cols, rows)
    certs = []
    ng = len(domain)
    for v in null_space(mat):
        vec = v.column(0)
        g = poly_from_coeff_vector(vec[:ng], domain)
        l = Cofactor(vec[ng], vec[ng + 1], vec[ng + 2], vec[ng + 3])
        if g.is_zero():
            continue  # only the (0, 0) pair, excluded by definition
        _, lead = g.leading()
        g = g.scale(1 / lead)
        l = l.scale(1 / lead)
        if not verify_exp_factor(f, g, l):
            raise RuntimeError(f"internal error: candidate g = {g} failed re-verification")
        certs.append(DarbouxCert("exp_factor", g, l, degree_bound, primitive=True))
    certs.sort(key=lambda c: c.body.degree)  # stable: discovery order within a degree
    return certs


def search_darboux_pencil(
    f: FieldDef,
    template: CofactorTemplate,
    degree_bound: int,
    rng: random.Random | None = None,
) -> tuple[list[DarbouxCert], list[str]]:
    """Darboux polynomials whose cofactor matches the template, one linear
    pencil per swept cofactor cell.

    For each assignment of the enumerated slots, the relation X(h) = K*h with
    the eigen slot as unknown t becomes the pencil A - t*B, where A maps h to
    X(h) - (pinned part of K)*h and B multiplies h by the eigen slot's
    monomial. Rational rank-drop values of t are found by pencil_rank_drop,
    each kernel vector is re-verified, and parametric cells are reported in
    the returned notes instead of being enumerated.
    """
    if degree_bound < 1:
        raise ValueError("degree bound must be >= 1")
    if template.eigen_count() != 1:
        raise ValueError("template must have exactly one eigen slot")
    rng = rng if rng is not None else random.Random(0)

    domain = monomials_up_to(degree_bound, 0)
    codomain = monomials_up_to(_codomain_degree(f, degree_bound))
    index = {m: i for i, m in enumerate(codomain)}
    rows = len(codomain)
    eigen_mono = _SLOT_MONOMIAL[template.eigen]

    lie_cols = []
    bcols = []
    for m in domain:
        hm = Poly.term(m, 1)
        lie_cols.append(_poly_to_column(lie_derivative(f, hm), index, rows))
        bcols.append(_poly_to_column(Poly.term(Monomial(*[a + b for a, b in zip(eigen_mono, m)]), 1), index, rows))

    notes: list[str] = []
    certs: list[DarbouxCert] = []
    seen: set[tuple] = set()
    sweep_slots = [s for s, _ in template.enumerated]
    sweep_values = [vals for _, vals in template.enumerated]
    for assignment in itertools.product(*sweep_values) if sweep_slots else [()]:
        pinned = dict(template.fixed)
        pinned.update(zip(sweep_slots, assignment))
        k_fixed = Cofactor(
            pinned.get("b0", Fraction(0)),
            pinned.get("b1", Fraction(0)),
            pinned.get("b2", Fraction(0)),
            pinned.get("b3", Fraction(0)),
        )
        cell_name = ", ".join(f"{s}={v}" for s, v in sorted(pinned.items()))
        kp = k_fixed.as_poly()
        entries: list[UniPoly] = []
        acols = []
        for j, m in enumerate(domain):
            prod_col = _poly_to_column(kp * Poly.term(m, 1), index, rows)
            acols.append([a - b for a, b in zip(lie_cols[j], prod_col)])
        for i in range(rows):
            for j in range(len(domain)):
                entries.append(UniPoly.linear(acols[j][i], -bcols[j][i]))
        pencil = PencilMatrix(rows, len(domain), entries)
        result = pencil_rank_drop(pencil, rng=rng)
        if result.parametric:
            notes.append(
                f"cell ({cell_name}): kernel exists for every eigen value "
                f"(generic rank {result.generic_rank} < {len(domain)}); parametric family not enumerated"
            )
            continue
        if result.residual.degree > 0:
            notes.append(
                f"cell ({cell_name}): nonconstant residual {result.residual}; "
                "possible irrational or complex eigen values not resolved"
            )
        for t0 in result.candidates:
            coords = dict(pinned)
            coords[template.eigen] = t0
            k_full = Cofactor(
                coords.get("b0", Fraction(0)),
                coords.get("b1", Fraction(0)),
                coords.get("b2", Fraction(0)),
                coords.get("b3", Fraction(0)),
            )
            sub = pencil.substitute(t0)
            for v in null_space(sub):
                h = poly_from_coeff_vector(v.column(0), domain)
                if h.degree < 1:
                    continue  # constants are not Darboux polynomials
                h = h.normalized()
                if not verify_cofactor(f, h, k_full):
                    raise RuntimeError(
                        f"internal error: candidate h = {h} at {cell_name}, t={t0} "
                        "failed re-verification"
                    )
                key = (tuple(sorted(h.terms.items())), k_full.coordinates())
                if key in seen:
                    continue
                seen.add(key)
                certs.append(DarbouxCert("polynomial", h, k_full, degree_bound, primitive=True))
    certs.sort(key=lambda c: c.body.degree)  # stable: discovery order within a degree
    certs = _mark_primitive(certs)
    return certs, notes


def _mark_primitive(certs: list[DarbouxCert]) -> list[DarbouxCert]:
    """Flag certificates whose body is an exact product of earlier bodies."""
    bodies: list[Poly] = []
    out = []
    for c in certs:
        primitive = not _is_product_of(c.body, bodies)
        bodies.append(c.body)
        out.append(DarbouxCert(c.kind, c.body, c.cofactor, c.degree_bound_used, primitive))
    return out


def _is_product_of(p: Poly, bodies: list[Poly]) -> bool:
    if p.degree == 0:
        return True
    for b in bodies:
        if b.degree < 1:
            continue
        q = p.try_divide(b)
        if q is not None and _is_product_of(q, bodies):
            return True
    return False


# ---------------------------------------------------------------------------
# Cofactor combinations and the integrability verdict
# ---------------------------------------------------------------------------


def combine_cofactors(
    certs: list[DarbouxCert], f: FieldDef | None = None
) -> list[CombinationSolution]:
    """Basis of weight vectors with sum(w_i * cofactor_i) = 0 as a polynomial.

    When a field is supplied each certificate is re-checked against its
    defining relation first. Returns a single trivial-flagged solution when
    only the zero combination exists.
    """
    if not certs:
        raise ValueError("need at least one certificate")
    if f is not None:
        for c in certs:
            ok = (
                verify_cofactor(f, c.body, c.cofactor)
                if c.kind == "polynomial"
                else verify_exp_factor(f, c.body, c.cofactor)
            )
            if not ok:
                raise ValueError(f"unverified certificate: {c.describe()}")
    rows = []
    for pick in range(4):
        rows.append([c.cofactor.coordinates()[pick] for c in certs])
    mat = QMatrix.from_rows(rows)
    basis = null_space(mat)
    if not basis:
        return [CombinationSolution(tuple(Fraction(0) for _ in certs), trivial=True)]
    return [CombinationSolution(tuple(v.column(0)), trivial=False) for v in basis]


def lie_derivative_log_combination(
    f: FieldDef, terms: list[tuple[Fraction, Poly, str]]
) -> Poly:
    """Numerator of d/dt sum(w_i * log p_i or w_i * q_i) along the flow.

    The common denominator is the product of the log-form bases; the returned
    numerator is identically zero exactly when the combination is a first
    integral wherever it is defined.
    """
    log_bases = [p for _, p, form in terms if form == "log"]
    for p in log_bases:
        if p.is_zero():
            raise ValueError("log term with zero base")
    total = Poly.zero()
    for w, p, form in terms:
        w = Fraction(w)
        if form == "log":
            contrib = lie_derivative(f, p).scale(w)
            for q in log_bases:
                if q is not p:
                    contrib = contrib * q
        elif form == "plain":
            contrib = lie_derivative(f, p).scale(w)
            for q in log_bases:
                contrib = contrib * q
        else:
            raise ValueError(f"unknown term form {form!r}")
        total = total + contrib
    return total


def combination_log_terms(
    certs: list[DarbouxCert], weights: tuple[Fraction, ...]
) -> list[tuple[Fraction, Poly, str]]:
    """log/plain term list for G = prod h_i^w_i * prod exp(g_k)^w_k."""
    return [
        (w, c.body, "log" if c.kind == "polynomial" else "plain")
        for c, w in zip(certs, weights)
    ]


def analyze(
    f: FieldDef,
    degree_bound: int = DEFAULT_DEGREE_BOUND,
    template: CofactorTemplate | None = None,
    rng: random.Random | None = None,
) -> Verdict:
    """Run the full pipeline: pencil search for Darboux polynomials, the
    exponential-factor search, and the cofactor combination solve."""
    if degree_bound < 1:
        raise ValueError("degree bound must be >= 1")
    if degree_bound > HARD_DEGREE_CAP:
        raise ValueError(
            f"degree bound {degree_bound} above the hard cap {HARD_DEGREE_CAP}; "
            "the coefficient spaces grow too fast for exact pencils"
        )
    rng = rng if rng is not None else random.Random(0)
    notes: list[str] = []
    if degree_bound > DEFAULT_DEGREE_BOUND:
        notes.append(
            f"degree bound {degree_bound} is expensive: the degree-<= {degree_bound} "
            f"coefficient space has dimension {len(monomials_up_to(degree_bound))}"
        )

    if f.is_zero():
        x = Poly.variable("x")
        cert = DarbouxCert("polynomial", x, Cofactor(), degree_bound, primitive=True)
        return Verdict(
            model=f,
            degree_bound=degree_bound,
            darboux_polys=[cert],
            exp_factors=[],
            combinations=[CombinationSolution((Fraction(1),), trivial=False)],
            conclusion=DARBOUX_INTEGRAL_FOUND,
            notes=(
                "zero field: every polynomial is a first integral; "
                "reporting x as a representative and skipping the searches"
            ),
        )

    if template is None:
        template = CofactorTemplate.default(degree_bound)
        hsa = hsa_params_of(f)
        if hsa is None or not hsa.alpha_nonzero():
            notes.append(
                "default cofactor template (b1 = b3 = 0, b2 swept, b0 eigen) is only "
                "justified for the built-in dynamo form with alpha != 0; for this model "
                "the search may be incomplete outside the template family"
            )
    else:
        notes.append(
            "user-supplied cofactor template: completeness is only relative to the "
            "template family"
        )
    notes.append(PENCIL_SAMPLING_NOTE)

    polys, pencil_notes = search_darboux_pencil(f, template, degree_bound, rng=rng)
    notes.extend(pencil_notes)
    exps = search_exp_factors(f, degree_bound)

    primitive = [c for c in polys if c.primitive] + [c for c in exps if c.primitive]
    combos: list[CombinationSolution] = []
    if primitive:
        combos = combine_cofactors(primitive, f)
        for combo in combos:
            if combo.trivial:
                continue
            residue = lie_derivative_log_combination(
                f, combination_log_terms(primitive, combo.weights)
            )
            if not residue.is_zero():
                raise RuntimeError(
                    "internal error: combination passed the cofactor solve but its "
                    f"log-derivative numerator is {residue}"
                )
    else:
        notes.append("no certificates found up to the bound; nothing to combine")

    nontrivial = any(not c.trivial for c in combos)
    if not nontrivial:
        notes.append(
            f"no Darboux first integral up to degree bound {degree_bound} "
            "(this is a bounded search, not a proof)"
        )
    return Verdict(
        model=f,
        degree_bound=degree_bound,
        darboux_polys=polys,
        exp_factors=exps,
        combinations=combos,
        conclusion=DARBOUX_INTEGRAL_FOUND if nontrivial else NONE_UP_TO_BOUND,
        notes="\n".join(notes),
    )
