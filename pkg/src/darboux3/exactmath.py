"""Exact rational linear algebra.

Dense matrices over Q, reduced row echelon form and null spaces, univariate
polynomials in a single indeterminate t, rational root extraction, and the
rank-drop analysis of linear matrix pencils A - t*B that powers the
eigen-cofactor search.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

Rational = Fraction

# Divisor-pair budget for rational root candidates before switching to a
# full factorization of the polynomial.
_ROOT_CANDIDATE_CAP = 20_000


class MalformedPencilError(ValueError):
    """Pencil shape unusable for rank-drop analysis (fewer rows than columns)."""


class QMatrix:
    """Dense rational matrix, entries stored row-major."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries) -> None:
        entries = [Fraction(e) for e in entries]
        if len(entries) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {len(entries)}")
        self.rows = rows
        self.cols = cols
        self.entries = entries

    @classmethod
    def from_rows(cls, row_lists) -> "QMatrix":
        row_lists = [list(r) for r in row_lists]
        rows = len(row_lists)
        cols = len(row_lists[0]) if rows else 0
        if any(len(r) != cols for r in row_lists):
            raise ValueError("ragged rows")
        return cls(rows, cols, [e for r in row_lists for e in r])

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls(n, n, [Fraction(int(i == j)) for i in range(n) for j in range(n)])

    @classmethod
    def zero(cls, rows: int, cols: int) -> "QMatrix":
        return cls(rows, cols, [Fraction(0)] * (rows * cols))

    def at(self, i: int, j: int) -> Fraction:
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> list[Fraction]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def column(self, j: int) -> list[Fraction]:
        return [self.entries[i * self.cols + j] for i in range(self.rows)]

    def mul_vec(self, v: "QMatrix") -> "QMatrix":
        if v.cols != 1 or v.rows != self.cols:
            raise ValueError("shape mismatch")
        out = []
        for i in range(self.rows):
            out.append(sum((self.at(i, k) * v.at(k, 0) for k in range(self.cols)), Fraction(0)))
        return QMatrix(self.rows, 1, out)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, QMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(self.entries)))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(e) for e in self.row(i)) for i in range(self.rows))
        return f"QMatrix({self.rows}x{self.cols}: {body})"


def rref(m: QMatrix) -> tuple[QMatrix, tuple[int, ...], int]:
    """Gauss-Jordan reduction; returns (reduced matrix, pivot columns, rank)."""
    work = [m.row(i) for i in range(m.rows)]
    pivots: list[int] = []
    r = 0
    for c in range(m.cols):
        pivot_row = None
        for i in range(r, m.rows):
            if work[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        work[r], work[pivot_row] = work[pivot_row], work[r]
        inv = 1 / work[r][c]
        work[r] = [e * inv for e in work[r]]
        for i in range(m.rows):
            if i != r and work[i][c] != 0:
                f = work[i][c]
                work[i] = [a - f * b for a, b in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == m.rows:
            break
    return QMatrix.from_rows(work), tuple(pivots), len(pivots)


def null_space(m: QMatrix) -> list[QMatrix]:
    """Basis of the right kernel {v : m.v = 0}, each vector scaled so its
    first nonzero entry is 1. Empty list for a trivial kernel."""
    reduced, pivots, _ = rref(m)
    pivot_set = set(pivots)
    free_cols = [c for c in range(m.cols) if c not in pivot_set]
    basis = []
    for f in free_cols:
        v = [Fraction(0)] * m.cols
        v[f] = Fraction(1)
        for r_i, p_c in enumerate(pivots):
            v[p_c] = -reduced.at(r_i, f)
        lead = next(e for e in v if e != 0)
        if lead != 1:
            v = [e / lead for e in v]
        basis.append(QMatrix(m.cols, 1, v))
    return basis


class UniPoly:
    """Univariate polynomial; coefficient at index i multiplies t**i."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()) -> None:
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def constant(cls, c) -> "UniPoly":
        return cls([Fraction(c)])

    @classmethod
    def linear(cls, a0, a1) -> "UniPoly":
        """a0 + a1*t."""
        return cls([Fraction(a0), Fraction(a1)])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, t0) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * t0 + c
        return acc

    def __add__(self, other: "UniPoly") -> "UniPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly(
            [
                (self.coeffs[i] if i < len(self.coeffs) else 0)
                + (other.coeffs[i] if i < len(other.coeffs) else 0)
                for i in range(n)
            ]
        )

    def __sub__(self, other: "UniPoly") -> "UniPoly":
        return self + other.scale(-1)

    def __mul__(self, other: "UniPoly") -> "UniPoly":
        if self.is_zero() or other.is_zero():
            return UniPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UniPoly(out)

    def scale(self, k) -> "UniPoly":
        k = Fraction(k)
        return UniPoly([c * k for c in self.coeffs])

    def __eq__(self, other) -> bool:
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"UniPoly({list(self.coeffs)})"

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            mag = abs(c)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{mag}*{mono}"
            else:
                body = str(mag)
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append((" + " if c > 0 else " - ") + body)
        return "".join(parts)


class PencilMatrix:
    """Matrix of degree <= 1 polynomials in t, i.e. a linear pencil A - t*B."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries) -> None:
        entries = [e if isinstance(e, UniPoly) else UniPoly.constant(e) for e in entries]
        if len(entries) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {len(entries)}")
        if any(e.degree > 1 for e in entries):
            raise ValueError("pencil entries must have degree <= 1 in t")
        self.rows = rows
        self.cols = cols
        self.entries = entries

    def at(self, i: int, j: int) -> UniPoly:
        return self.entries[i * self.cols + j]

    def substitute(self, t0) -> QMatrix:
        t0 = Fraction(t0)
        return QMatrix(self.rows, self.cols, [e(t0) for e in self.entries])


@dataclass(frozen=True)
class PencilRankDrop:
    """Result of the pencil rank analysis.

    candidates holds every rational t0 at which the pencil loses column rank,
    verified by exact substitution. residual is the part of the sampled minor
    gcd that has no rational roots; a nonconstant residual flags possible
    irrational or complex rank-drop values that were not resolved.
    """

    generic_rank: int
    candidates: tuple[Fraction, ...]
    residual: UniPoly
    parametric: bool
    minors_sampled: int
    stop_reason: str

    def __iter__(self):
        # allows (rank, candidates, residual, parametric) unpacking
        return iter((self.generic_rank, self.candidates, self.residual, self.parametric))


# ---------------------------------------------------------------------------
# Integer polynomial helpers (coefficient lists, little-endian). The pencil
# machinery clears denominators once and stays in Z[t] for speed.
# ---------------------------------------------------------------------------


def _zp_trim(p: list[int]) -> list[int]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _zp_mul(a: list[int], b: list[int]) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _zp_trim(out)


def _zp_sub(a: list[int], b: list[int]) -> list[int]:
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
    return _zp_trim(out)


def _zp_divexact(a: list[int], b: list[int]) -> list[int]:
    """Exact division in Z[t]; raises if the division does not come out even."""
    if not a:
        return []
    a = list(a)
    out = [0] * (len(a) - len(b) + 1)
    for i in range(len(out) - 1, -1, -1):
        q, r = divmod(a[i + len(b) - 1], b[-1])
        if r:
            raise ArithmeticError("non-exact polynomial division")
        out[i] = q
        if q:
            for j, y in enumerate(b):
                a[i + j] -= q * y
    if any(a):
        raise ArithmeticError("non-exact polynomial division")
    return _zp_trim(out)


def _zp_content(p: list[int]) -> int:
    g = 0
    for c in p:
        g = math.gcd(g, c)
        if g == 1:
            break
    return g


def _zp_primitive(p: list[int]) -> list[int]:
    if not p:
        return []
    g = _zp_content(p)
    p = [c // g for c in p]
    if p[-1] < 0:
        p = [-c for c in p]
    return p


def _zp_gcd(a: list[int], b: list[int]) -> list[int]:
    """Primitive gcd in Z[t] via pseudo-remainders, primitive at each step."""
    a, b = _zp_primitive(list(a)), _zp_primitive(list(b))
    if not a:
        return b
    if not b:
        return a
    if len(a) < len(b):
        a, b = b, a
    while b:
        r = list(a)
        lb = b[-1]
        while r and len(r) >= len(b):
            shift = len(r) - len(b)
            lr = r[-1]
            r = [c * lb for c in r]
            for j, y in enumerate(b):
                r[shift + j] -= lr * y
            r = _zp_trim(r)
        a, b = b, _zp_primitive(r)
    return _zp_primitive(a)


def _zp_eval_int(p: list[int], x: int) -> int:
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _zp_is_root(p: list[int], num: int, den: int) -> bool:
    """Test p(num/den) == 0 exactly (den > 0, gcd(num, den) = 1)."""
    n = len(p) - 1
    acc = p[-1]
    qq = 1
    for i in range(n - 1, -1, -1):
        qq *= den
        acc = acc * num + p[i] * qq
    return acc == 0


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i != n // i:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def _divisor_count(n: int, cap: int) -> int:
    """Number of divisors of |n|, or cap+1 once counting becomes hopeless."""
    n = abs(n)
    count = 1
    d = 2
    while d * d <= n and count <= cap:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            count *= e + 1
        d += 1 if d == 2 else 2
        if d > 100_000 and n > 1:
            return cap + 1
    if n > 1:
        count *= 2
    return count


def _zp_rational_roots(p: list[int]) -> list[Fraction]:
    """All rational roots of a nonzero integer polynomial."""
    roots: set[Fraction] = set()
    k = 0
    while k < len(p) and p[k] == 0:
        k += 1
    if k:
        roots.add(Fraction(0))
        p = p[k:]
    p = _zp_primitive(p)
    if len(p) <= 1:
        return sorted(roots)
    a0, an = p[0], p[-1]
    if _divisor_count(a0, _ROOT_CANDIDATE_CAP) * _divisor_count(an, 400) <= _ROOT_CANDIDATE_CAP:
        for q in _divisors(an):
            for r in _divisors(a0):
                if math.gcd(r, q) != 1:
                    continue
                if _zp_is_root(p, r, q):
                    roots.add(Fraction(r, q))
                if _zp_is_root(p, -r, q):
                    roots.add(Fraction(-r, q))
    else:
        # coefficients too composite to enumerate divisors; factor instead
        import sympy

        t = sympy.Symbol("t")
        expr = sympy.Poly([int(c) for c in reversed(p)], t)
        for factor, _mult in expr.factor_list()[1]:
            if factor.degree() == 1:
                c1, c0 = factor.all_coeffs()
                roots.add(Fraction(-int(c0), int(c1)))
    return sorted(roots)


def rational_roots(p: UniPoly) -> list[Fraction]:
    """Exactly the rational roots of p, sorted ascending, duplicates removed."""
    if p.is_zero():
        raise ValueError("zero polynomial: every value is a root")
    den_lcm = 1
    for c in p.coeffs:
        den_lcm = den_lcm * c.denominator // math.gcd(den_lcm, c.denominator)
    zp = [int(c * den_lcm) for c in p.coeffs]
    return _zp_rational_roots(zp)


# ---------------------------------------------------------------------------
# Pencil rank-drop machinery
# ---------------------------------------------------------------------------


def _pencil_to_int_rows(p: PencilMatrix) -> list[list[tuple[int, int]]]:
    """Clear denominators row by row; each entry becomes (a, b) for a + b*t.

    Row scaling by a positive integer leaves ranks and minor root sets
    unchanged, so downstream analysis is unaffected.
    """
    out = []
    for i in range(p.rows):
        ents = [p.at(i, j) for j in range(p.cols)]
        den_lcm = 1
        for e in ents:
            for c in e.coeffs:
                den_lcm = den_lcm * c.denominator // math.gcd(den_lcm, c.denominator)
        row = []
        for e in ents:
            a = int((e.coeffs[0] if len(e.coeffs) > 0 else 0) * den_lcm)
            b = int((e.coeffs[1] if len(e.coeffs) > 1 else 0) * den_lcm)
            row.append((a, b))
        out.append(row)
    return out


def _eval_int_matrix(zrows: list[list[tuple[int, int]]], tau: int) -> list[list[int]]:
    return [[a + b * tau for (a, b) in row] for row in zrows]


def _int_elim_pivot_rows(mat: list[list[int]], order: list[int], ncols: int):
    """Fraction-free elimination following a row preference order.

    Returns (rank, pivot_row_indices); indices name the original matrix rows
    in the order they were chosen as pivots.
    """
    work = [list(mat[i]) for i in order]
    labels = list(order)
    nrows = len(work)
    prev = 1
    r = 0
    pivot_rows = []
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if work[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        labels[r], labels[piv] = labels[piv], labels[r]
        pivot_rows.append(labels[r])
        pv = work[r][c]
        wr = work[r]
        for i in range(r + 1, nrows):
            wi = work[i]
            f = wi[c]
            for j in range(c, ncols):
                wi[j] = (pv * wi[j] - f * wr[j]) // prev
        prev = pv
        r += 1
        if r == nrows:
            break
    return len(pivot_rows), pivot_rows


def _int_det_bareiss(mat: list[list[int]]) -> int:
    """Determinant of a square integer matrix (fraction-free elimination)."""
    m = [list(r) for r in mat]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = None
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    swap = i
                    break
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        pv = m[k][k]
        mk = m[k]
        for i in range(k + 1, n):
            mi = m[i]
            f = mi[k]
            for j in range(k + 1, n):
                mi[j] = (pv * mi[j] - f * mk[j]) // prev
            mi[k] = 0
        prev = pv
    return sign * m[n - 1][n - 1]


_EVAL_POINTS_BASE = [0]
for _k in range(1, 200):
    _EVAL_POINTS_BASE.extend([_k, -_k])


def _interp_minor(zrows: list[list[tuple[int, int]]], row_subset: list[int]) -> list[int]:
    """det of the pencil submatrix on row_subset, as an integer polynomial,
    computed by evaluation at small integers and Lagrange interpolation."""
    s = len(zrows[0]) if zrows else 0
    pts = _EVAL_POINTS_BASE[: s + 1]
    vals = []
    for tau in pts:
        sub = [[a + b * tau for (a, b) in zrows[i]] for i in row_subset]
        vals.append(_int_det_bareiss(sub))
    big = [1]
    for x in pts:
        big = _zp_mul(big, [-x, 1])
    acc = [Fraction(0)] * (s + 1)
    for j, xj in enumerate(pts):
        if vals[j] == 0:
            continue
        qj = _zp_divexact(list(big), [-xj, 1])
        denom = 1
        for k, xk in enumerate(pts):
            if k != j:
                denom *= xj - xk
        w = Fraction(vals[j], denom)
        for i, c in enumerate(qj):
            acc[i] += w * c
    out = []
    for c in acc:
        if c.denominator != 1:
            raise ArithmeticError("minor interpolation produced a non-integer")
        out.append(c.numerator)
    return _zp_trim(out)


def _poly_matrix_rank(zrows: list[list[tuple[int, int]]], ncols: int) -> int:
    """Rank over Q(t) by fraction-free elimination with Z[t] entries."""
    work = [[_zp_trim([a, b]) for (a, b) in row] for row in zrows]
    nrows = len(work)
    prev = [1]
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if work[i][c]:
                piv = i
                break
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        pv = work[r][c]
        wr = work[r]
        for i in range(r + 1, nrows):
            wi = work[i]
            f = wi[c]
            for j in range(c, ncols):
                num = _zp_sub(_zp_mul(pv, wi[j]), _zp_mul(f, wr[j]))
                wi[j] = _zp_divexact(num, prev) if num else []
        prev = pv
        r += 1
        if r == nrows:
            break
    return r


def pencil_rank_drop(
    p: PencilMatrix,
    rng: random.Random | None = None,
    stable_after: int = 3,
    max_minors: int = 24,
) -> PencilRankDrop:
    """Find the rational values of t at which the pencil loses column rank.

    The generic rank is certified by exact evaluation at a random integer
    (with a symbolic fraction-free elimination fallback). When the pencil
    generically has full column rank, maximal minors are sampled through
    fraction-free elimination under random row permutations; their gcd is
    accumulated until it is constant or unchanged for `stable_after`
    consecutive fresh minors, and every rational root of the gcd is
    re-verified by exact substitution before being reported as a candidate.
    The sampling stop reason is recorded for audit.
    """
    if p.rows < p.cols:
        raise MalformedPencilError(f"pencil is {p.rows}x{p.cols}; need rows >= cols")
    if p.cols == 0:
        return PencilRankDrop(0, (), UniPoly.constant(1), False, 0, "empty pencil")
    rng = rng if rng is not None else random.Random(0)

    zrows = _pencil_to_int_rows(p)
    # identically-zero rows belong to no nonzero minor and carry no rank
    keep = [i for i, row in enumerate(zrows) if any(a or b for (a, b) in row)]
    if not keep:
        return PencilRankDrop(0, (), UniPoly(), True, 0, "zero pencil")
    zrows = [zrows[i] for i in keep]
    nrows = len(zrows)

    tau = None
    mat_tau = None
    generic_rank = 0
    if nrows >= p.cols:
        for _attempt in range(3):
            cand_tau = rng.randrange(100_003, 1_000_003)
            mat = _eval_int_matrix(zrows, cand_tau)
            rank, _ = _int_elim_pivot_rows(mat, list(range(nrows)), p.cols)
            generic_rank = max(generic_rank, rank)
            if rank == p.cols:
                tau = cand_tau
                mat_tau = mat
                break
    if tau is None:
        generic_rank = _poly_matrix_rank(zrows, p.cols)
        if generic_rank < p.cols:
            return PencilRankDrop(
                generic_rank, (), UniPoly(), True, 0, "generic rank below column count"
            )
        while tau is None:  # unlucky evaluations; only finitely many bad points
            cand_tau = rng.randrange(100_003, 1_000_003)
            mat = _eval_int_matrix(zrows, cand_tau)
            rank, _ = _int_elim_pivot_rows(mat, list(range(nrows)), p.cols)
            if rank == p.cols:
                tau = cand_tau
                mat_tau = mat

    gcd_acc: list[int] | None = None
    stable = 0
    sampled = 0
    stop_reason = "minor sample cap reached"
    while sampled < max_minors:
        order = list(range(nrows))
        rng.shuffle(order)
        _, pivot_rows = _int_elim_pivot_rows(mat_tau, order, p.cols)
        minor = _zp_primitive(_interp_minor(zrows, pivot_rows))
        sampled += 1
        if gcd_acc is None:
            gcd_acc = minor
        else:
            new = _zp_gcd(gcd_acc, minor)
            if new == gcd_acc:
                stable += 1
            else:
                stable = 0
            gcd_acc = new
        if len(gcd_acc) == 1:
            stop_reason = "minor gcd became constant"
            break
        if stable >= stable_after:
            stop_reason = f"minor gcd unchanged for {stable_after} consecutive fresh minors"
            break

    assert gcd_acc is not None
    roots = _zp_rational_roots(gcd_acc) if len(gcd_acc) > 1 else []
    candidates = []
    for r in roots:
        _, _, rank_r = rref(p.substitute(r))
        if rank_r < p.cols:
            candidates.append(r)
    residual = list(gcd_acc)
    for r in roots:
        lin = [-r.numerator, r.denominator]
        while len(residual) > 1 and _zp_is_root(residual, r.numerator, r.denominator):
            residual = _zp_divexact(residual, lin)
    residual = _zp_primitive(residual)
    return PencilRankDrop(
        generic_rank,
        tuple(candidates),
        UniPoly(residual),
        False,
        sampled,
        stop_reason,
    )
