"""Exact rational linear feasibility with Farkas certificates.

Every geometric question asked elsewhere in the package (is a stratum
nonempty, does an alpha vector exist, is a partial-sum set admissible)
reduces to deciding a finite system of linear (in)equalities, possibly
with strict rows.  This module decides such systems exactly over the
rationals and always returns evidence: a witness point that satisfies
every row, or a vector of multipliers that combines the rows into
``0 > 0`` or ``0 >= c`` with ``c > 0``.

The system ``a_k . x  (rel)  b_k`` is homogenised with an extra
coordinate ``tau > 0``::

    a_k . x - b_k tau  (rel)  0,        tau > 0

and the strict rows are handled with a margin variable ``t``: maximise
``t`` subject to ``g . u >= t`` on strict rows, ``g . u >= 0`` on the
others, ``t <= 1``.  The optimum is 1 when the system is feasible and 0
otherwise; in the latter case the optimal dual solution of that LP is a
Motzkin/Farkas certificate.  The LP starts at a feasible basis (all
slacks), so a single exact simplex phase with Bland's rule suffices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence

__all__ = [
    "Relation",
    "LinearConstraint",
    "FeasibilityResult",
    "solve_feasibility",
    "solve_strict_direction",
    "check_witness",
    "check_certificate",
    "rank",
    "nullspace",
    "primitive_integer_vector",
    "to_fraction",
    "format_rational",
]

RELATIONS = (">", ">=", "=", "<=", "<")
Relation = str


def to_fraction(value) -> Fraction:
    """Coerce ints, Fractions, decimal strings or floats to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    # floats convert exactly (binary value); numpy scalars go through float
    return Fraction(float(value))


def format_rational(q: Fraction) -> str:
    """Render as ``"p/q"`` or ``"p"`` when the denominator is 1."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class LinearConstraint:
    """``coefficients . x  relation  rhs`` with exact rational data."""

    coefficients: tuple[Fraction, ...]
    relation: Relation
    rhs: Fraction = Fraction(0)

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        object.__setattr__(
            self, "coefficients", tuple(to_fraction(c) for c in self.coefficients)
        )
        object.__setattr__(self, "rhs", to_fraction(self.rhs))

    @property
    def dim(self) -> int:
        return len(self.coefficients)

    @property
    def strict(self) -> bool:
        return self.relation in (">", "<")

    def oriented(self) -> tuple[tuple[Fraction, ...], Fraction, str]:
        """Rewrite as ``a . x (>, >=, =) b``."""
        if self.relation in ("<", "<="):
            flipped = ">" if self.relation == "<" else ">="
            return tuple(-c for c in self.coefficients), -self.rhs, flipped
        return self.coefficients, self.rhs, self.relation

    def holds(self, x: Sequence[Fraction]) -> bool:
        lhs = sum((c * v for c, v in zip(self.coefficients, x)), Fraction(0))
        return {
            ">": lhs > self.rhs,
            ">=": lhs >= self.rhs,
            "=": lhs == self.rhs,
            "<=": lhs <= self.rhs,
            "<": lhs < self.rhs,
        }[self.relation]


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of a feasibility query.

    Exactly one of ``witness`` and ``certificate`` is set.  The
    certificate holds one multiplier per input constraint, taken with
    respect to the constraint as written; multipliers of ``<``/``<=``
    rows are applied to the negated row, and multipliers of ``=`` rows
    may have either sign.
    """

    feasible: bool
    witness: tuple[Fraction, ...] | None = None
    certificate: tuple[Fraction, ...] | None = None

    def __bool__(self) -> bool:
        return self.feasible


# --------------------------------------------------------------------------
# exact linear algebra helpers


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    mat = [list(r) for r in rows]
    if not mat:
        return mat, []
    ncols = len(mat[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [v * inv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat, pivots


def rank(vectors: Iterable[Sequence]) -> int:
    """Exact rank of a list of rational (or integer) vectors."""
    rows = [[to_fraction(v) for v in vec] for vec in vectors]
    if not rows:
        return 0
    return len(_rref(rows)[1])


def primitive_integer_vector(vec: Sequence) -> tuple[int, ...]:
    """Scale a rational vector by a positive factor to coprime integers."""
    fr = [to_fraction(v) for v in vec]
    den = reduce(lcm, (f.denominator for f in fr), 1)
    ints = [int(f * den) for f in fr]
    g = reduce(gcd, (abs(i) for i in ints), 0)
    if g == 0:
        return tuple(ints)
    return tuple(i // g for i in ints)


def nullspace(vectors: Sequence[Sequence], dim: int) -> list[tuple[int, ...]]:
    """Integer basis of ``{c : <c, v> = 0 for every v in vectors}``.

    One basis vector per free column of the reduced row echelon form,
    each scaled to coprime integers.
    """
    rows = [[to_fraction(v) for v in vec] for vec in vectors]
    rows = [r for r in rows if any(r)]
    if not rows:
        return [tuple(int(i == j) for j in range(dim)) for i in range(dim)]
    red, pivots = _rref(rows)
    free = [c for c in range(dim) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * dim
        vec[f] = Fraction(1)
        for row, p in zip(red, pivots):
            vec[p] = -row[f]
        basis.append(primitive_integer_vector(vec))
    return basis


# --------------------------------------------------------------------------
# simplex on a dense exact tableau


def _simplex_max(
    tableau: list[list[Fraction]], basis: list[int], obj: list[Fraction]
) -> None:
    """Maximise ``obj . v`` in place; tableau rows are ``[coeffs..., rhs]``.

    ``obj`` is the reduced-cost row ``[z_j - c_j ..., value]`` and is
    updated alongside the tableau.  Bland's rule: entering column is the
    lowest index with negative reduced cost, leaving row breaks ratio
    ties by the lowest basic variable index.  The caller guarantees the
    problem is bounded.
    """
    ncols = len(obj) - 1
    while True:
        enter = next((j for j in range(ncols) if obj[j] < 0), None)
        if enter is None:
            return
        best = None
        for i, row in enumerate(tableau):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise ArithmeticError("unbounded margin LP; this cannot happen")
        i = best[1]
        prow = tableau[i]
        inv = 1 / prow[enter]
        prow = [v * inv for v in prow]
        tableau[i] = prow
        for k, row in enumerate(tableau):
            if k != i and row[enter] != 0:
                f = row[enter]
                tableau[k] = [a - f * b for a, b in zip(row, prow)]
        if obj[enter] != 0:
            f = obj[enter]
            obj[:] = [a - f * b for a, b in zip(obj, prow)]
        basis[i] = enter


def _margin_lp(
    rows: list[tuple[tuple[Fraction, ...], bool]], nvars: int
) -> tuple[bool, list[Fraction], list[Fraction]]:
    """Decide ``{g . u > 0 (strict rows), g . u >= 0 (others)}`` for free u.

    Returns ``(feasible, u, y)`` where ``u`` is a solution with every
    strict row at least 1 when feasible, and ``y >= 0`` are row
    multipliers with ``sum y_k g_k = 0`` and ``sum_{strict} y_k = 1``
    otherwise.
    """
    nrows = len(rows)
    # columns: u+ (nvars), u- (nvars), t, slacks (nrows), t-bound slack
    n_u = 2 * nvars
    col_t = n_u
    col_s0 = n_u + 1
    col_tb = col_s0 + nrows
    ncols = col_tb + 1
    tableau: list[list[Fraction]] = []
    zero = Fraction(0)
    for k, (g, strict) in enumerate(rows):
        # -g.u + t*[strict] + s_k = 0
        row = [zero] * (ncols + 1)
        for j, c in enumerate(g):
            if c:
                row[j] = -c
                row[nvars + j] = c
        if strict:
            row[col_t] = Fraction(1)
        row[col_s0 + k] = Fraction(1)
        tableau.append(row)
    trow = [zero] * (ncols + 1)
    trow[col_t] = Fraction(1)
    trow[col_tb] = Fraction(1)
    trow[-1] = Fraction(1)
    tableau.append(trow)
    basis = [col_s0 + k for k in range(nrows)] + [col_tb]
    obj = [zero] * (ncols + 1)
    obj[col_t] = Fraction(-1)

    _simplex_max(tableau, basis, obj)

    value = obj[-1]
    if value > 0:
        sol = [zero] * ncols
        for i, b in enumerate(basis):
            sol[b] = tableau[i][-1]
        u = [sol[j] - sol[nvars + j] for j in range(nvars)]
        t = sol[col_t]
        # homogeneous: rescale so the margin is exactly 1
        u = [v / t for v in u]
        return True, u, []
    # dual values sit in the reduced costs of the slack columns
    y = [obj[col_s0 + k] for k in range(nrows)]
    return False, [], y


def _orient(constraints: Sequence[LinearConstraint]):
    """Homogenised rows plus, for each input, the row indices used."""
    rows: list[tuple[tuple[Fraction, ...], bool]] = []
    origin: list[tuple[int, int]] = []  # (constraint index, sign)
    for idx, con in enumerate(constraints):
        a, b, rel = con.oriented()
        g = tuple(a) + (-b,)
        if rel == "=":
            rows.append((g, False))
            origin.append((idx, 1))
            rows.append((tuple(-v for v in g), False))
            origin.append((idx, -1))
        else:
            rows.append((g, rel == ">"))
            origin.append((idx, 1))
    return rows, origin


def _normalize_witness(
    x: list[Fraction], constraints: Sequence[LinearConstraint]
) -> tuple[Fraction, ...]:
    nonzero = [abs(v) for v in x if v != 0]
    if not nonzero:
        return tuple(x)
    for scale in (1 / max(nonzero), 1 / min(nonzero)):
        cand = [v * scale for v in x]
        if all(c.holds(cand) for c in constraints):
            return tuple(cand)
    return tuple(x)


def _normalize_certificate(y: list[Fraction]) -> tuple[Fraction, ...]:
    # positive rescaling only; equality multipliers keep their signs
    return tuple(Fraction(v) for v in primitive_integer_vector(y))


def solve_feasibility(
    constraints: Sequence[LinearConstraint], dim: int
) -> FeasibilityResult:
    """Decide a system of linear constraints exactly.

    Parameters
    ----------
    constraints : sequence of LinearConstraint
        Rows of the system; strict relations are allowed.
    dim : int
        Ambient dimension; every row must have this many coefficients.

    Returns
    -------
    FeasibilityResult
        A witness scaled (when the scaling keeps it feasible) so that its
        largest absolute entry is 1, or an integer-valued certificate.
    """
    for k, con in enumerate(constraints):
        if con.dim != dim:
            raise ValueError(
                f"constraint {k} has {con.dim} coefficients, expected {dim}"
            )
    if not constraints:
        return FeasibilityResult(True, witness=tuple(Fraction(0) for _ in range(dim)))

    rows, origin = _orient(constraints)
    # tau > 0
    rows.append((tuple(Fraction(0) for _ in range(dim)) + (Fraction(1),), True))
    feasible, u, y = _margin_lp(rows, dim + 1)
    if feasible:
        tau = u[-1]
        x = [v / tau for v in u[:-1]]
        assert all(c.holds(x) for c in constraints), "internal: bad witness"
        return FeasibilityResult(True, witness=_normalize_witness(x, constraints))

    mult = [Fraction(0)] * len(constraints)
    for (idx, sign), val in zip(origin, y):
        mult[idx] += sign * val
    cert = _normalize_certificate(mult)
    assert check_certificate(constraints, cert), "internal: bad certificate"
    return FeasibilityResult(False, certificate=cert)


def solve_strict_direction(directions: Sequence[Sequence]) -> FeasibilityResult:
    """Is there ``y`` with ``<d, y> > 0`` for every direction ``d``?

    A zero direction makes the system infeasible outright; the
    certificate then selects that row alone.
    """
    dirs = [tuple(to_fraction(v) for v in d) for d in directions]
    if not dirs:
        return FeasibilityResult(True, witness=())
    m = len(dirs[0])
    if any(len(d) != m for d in dirs):
        raise ValueError("direction vectors must share one dimension")
    for k, d in enumerate(dirs):
        if not any(d):
            cert = tuple(Fraction(int(i == k)) for i in range(len(dirs)))
            return FeasibilityResult(False, certificate=cert)
    return solve_feasibility([LinearConstraint(d, ">", 0) for d in dirs], m)


def check_witness(constraints: Sequence[LinearConstraint], x: Sequence) -> bool:
    xs = [to_fraction(v) for v in x]
    return all(c.holds(xs) for c in constraints)


def check_certificate(
    constraints: Sequence[LinearConstraint], certificate: Sequence
) -> bool:
    """True iff the multipliers prove the system infeasible."""
    if len(certificate) != len(constraints):
        return False
    if not constraints:
        return False
    dim = constraints[0].dim
    combo = [Fraction(0)] * dim
    rhs = Fraction(0)
    strict_weight = Fraction(0)
    for con, lam in zip(constraints, certificate):
        lam = to_fraction(lam)
        a, b, rel = con.oriented()
        if rel != "=" and lam < 0:
            return False
        for j, c in enumerate(a):
            combo[j] += lam * c
        rhs += lam * b
        if rel == ">":
            strict_weight += lam
    if any(combo):
        return False
    # the combination reads 0 >= rhs (or 0 > rhs if a strict row is used)
    return rhs > 0 or (rhs == 0 and strict_weight > 0)
