"""Reaction networks: data model, text format, stoichiometry, mass action.

Network files are line oriented::

    # comment
    species A1 A2 A3
    A1 <-> A2 ; 1, 1
    A2 -> A1 + A2 ; 3/2
    2 A1 -> 0 ; 0.25

``<->`` takes a forward and a backward rate, ``->`` one rate.  ``0`` (or
an empty side) is the empty complex.  Integer and ``p/q`` rates are kept
as exact Fractions, anything else becomes a float.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .ratlp import format_rational, nullspace, rank

__all__ = [
    "ParseError",
    "Reaction",
    "ReactionNetwork",
    "StoichiometricBasis",
    "parse_network",
    "load_network",
    "serialize_network",
    "stoichiometric_subspace",
    "conserved_quantities",
    "mass_action_rhs",
    "monomials",
]


class ParseError(ValueError):
    """Malformed network text; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Reaction:
    source: int
    target: int
    rate: Fraction | float


@dataclass(frozen=True)
class ReactionNetwork:
    """Species, complexes (integer vectors) and weighted reactions.

    Indices are 0-based throughout the Python API.  Instances are
    immutable; derived arrays are cached on first use.
    """

    species: tuple[str, ...]
    complexes: tuple[tuple[int, ...], ...]
    reactions: tuple[Reaction, ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(
            self, "complexes", tuple(tuple(int(v) for v in z) for z in self.complexes)
        )
        object.__setattr__(self, "reactions", tuple(self.reactions))
        m, n = len(self.species), len(self.complexes)
        if m < 1:
            raise ValueError("a network needs at least one species")
        if len(set(self.species)) != m or not all(self.species):
            raise ValueError("species names must be unique and nonempty")
        if len(set(self.complexes)) != n:
            raise ValueError("complexes must be pairwise distinct")
        for z in self.complexes:
            if len(z) != m or min(z, default=0) < 0:
                raise ValueError(f"bad complex vector {z}")
        seen = set()
        used = set()
        for r in self.reactions:
            if not (0 <= r.source < n and 0 <= r.target < n):
                raise ValueError(f"reaction index out of range: {r}")
            if r.source == r.target:
                raise ValueError("a reaction must join two distinct complexes")
            if not r.rate > 0:
                raise ValueError(f"rates must be positive, got {r.rate}")
            if (r.source, r.target) in seen:
                raise ValueError(f"duplicate reaction {r.source}->{r.target}")
            seen.add((r.source, r.target))
            used.update((r.source, r.target))
        if len(used) != n:
            raise ValueError("every complex must take part in a reaction")

    @property
    def m(self) -> int:
        return len(self.species)

    @property
    def n(self) -> int:
        return len(self.complexes)

    @property
    def r(self) -> int:
        return len(self.reactions)

    @property
    def Z(self) -> np.ndarray:
        """Complex matrix, one row per complex (n x m)."""
        if "Z" not in self._cache:
            self._cache["Z"] = np.array(self.complexes, dtype=float).reshape(
                self.n, self.m
            )
        return self._cache["Z"]

    def reaction_vectors(self) -> list[tuple[int, ...]]:
        return [
            tuple(b - a for a, b in zip(self.complexes[r.source], self.complexes[r.target]))
            for r in self.reactions
        ]

    def rate_matrix(self) -> np.ndarray:
        """``K[i, j] = k(i, j)`` as floats, zero where there is no reaction."""
        if "K" not in self._cache:
            K = np.zeros((self.n, self.n))
            for r in self.reactions:
                K[r.source, r.target] = float(r.rate)
            self._cache["K"] = K
        return self._cache["K"]

    def rates_exact(self) -> bool:
        return all(isinstance(r.rate, Fraction) for r in self.reactions)

    def complex_label(self, i: int) -> str:
        terms = []
        for name, c in zip(self.species, self.complexes[i]):
            if c == 1:
                terms.append(name)
            elif c > 1:
                terms.append(f"{c}{name}")
        return "+".join(terms) if terms else "0"

    def digest(self) -> str:
        """SHA-256 of the canonical text form."""
        return hashlib.sha256(serialize_network(self).encode()).hexdigest()

    def with_rates(self, rates: Sequence) -> "ReactionNetwork":
        if len(rates) != self.r:
            raise ValueError("need one rate per reaction")
        return ReactionNetwork(
            self.species,
            self.complexes,
            tuple(Reaction(r.source, r.target, k) for r, k in zip(self.reactions, rates)),
        )


@dataclass(frozen=True)
class StoichiometricBasis:
    vectors: tuple[tuple[int, ...], ...]

    @property
    def s(self) -> int:
        return len(self.vectors)


# --------------------------------------------------------------------------
# parsing

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_TERM = re.compile(r"\s*(\d+)?\s*([A-Za-z_][A-Za-z0-9_']*)\s*$")
_RATE = re.compile(r"^\s*(?:(-?\d+)\s*/\s*(\d+)|(-?(?:[0-9]*\.?[0-9]+(?:[eE][-+]?\d+)?|\d+\.)))\s*$")


def _parse_rate(text: str, lineno: int, col: int) -> Fraction | float:
    match = _RATE.match(text)
    if not match:
        raise ParseError(f"invalid rate {text.strip()!r}", lineno, col)
    if match.group(1) is not None:
        den = int(match.group(2))
        if den == 0:
            raise ParseError("zero denominator in rate", lineno, col)
        value: Fraction | float = Fraction(int(match.group(1)), den)
    else:
        literal = match.group(3)
        value = Fraction(int(literal)) if literal.lstrip("-").isdigit() else float(literal)
    if not value > 0:
        raise ParseError(f"rate must be positive, got {text.strip()!r}", lineno, col)
    return value


def _parse_complex(text: str, lineno: int, col: int) -> dict[str, int]:
    stripped = text.strip()
    if stripped in ("", "0", "∅"):
        return {}
    coeffs: dict[str, int] = {}
    offset = col
    for part in text.split("+"):
        match = _TERM.match(part)
        if not match or not part.strip():
            raise ParseError(f"invalid complex term {part.strip()!r}", lineno, offset)
        c = int(match.group(1)) if match.group(1) else 1
        if c == 0:
            raise ParseError("zero coefficient", lineno, offset)
        name = match.group(2)
        coeffs[name] = coeffs.get(name, 0) + c
        offset += len(part) + 1
    return coeffs


def parse_network(text: str) -> ReactionNetwork:
    """Parse network text into a ReactionNetwork.

    Species are numbered by the ``species`` line when present, otherwise
    by first appearance; complexes by first appearance (reactant before
    product on each line).

    Raises
    ------
    ParseError
        Syntax errors, non-positive rates, duplicate reactions, unknown
        species under a declaration, or a file without reactions.
    """
    declared: list[str] | None = None
    species: list[str] = []
    raw: list[tuple[dict, dict, Fraction | float, int]] = []

    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        head = body.strip().split()
        if head[0] == "species" and "->" not in body:
            if declared is not None:
                raise ParseError("duplicate species declaration", lineno)
            names = head[1:]
            if not names:
                raise ParseError("empty species declaration", lineno)
            for nm in names:
                if not _IDENT.fullmatch(nm):
                    raise ParseError(f"invalid species name {nm!r}", lineno, body.find(nm) + 1)
            if len(set(names)) != len(names):
                raise ParseError("repeated species in declaration", lineno)
            if raw:
                raise ParseError("species declaration must precede reactions", lineno)
            declared = names
            species = list(names)
            continue

        if ";" not in body:
            raise ParseError("missing ';' before rates", lineno, len(body.rstrip()) + 1)
        lhs_rhs, rates_txt = body.split(";", 1)
        if "<->" in lhs_rhs:
            arrow, reversible = "<->", True
        elif "->" in lhs_rhs:
            arrow, reversible = "->", False
        else:
            raise ParseError("missing '->' or '<->'", lineno)
        apos = lhs_rhs.index(arrow)
        left, right = lhs_rhs[:apos], lhs_rhs[apos + len(arrow):]
        if arrow in right or "->" in right:
            raise ParseError("more than one arrow", lineno, apos + 1)
        src = _parse_complex(left, lineno, 1)
        dst = _parse_complex(right, lineno, apos + len(arrow) + 1)

        rate_col = len(lhs_rhs) + 2
        parts = rates_txt.split(",")
        expected = 2 if reversible else 1
        if len(parts) != expected:
            raise ParseError(
                f"'{arrow}' needs exactly {expected} rate(s), got {len(parts)}",
                lineno,
                rate_col,
            )
        rates = [_parse_rate(p, lineno, rate_col) for p in parts]

        for name in list(src) + list(dst):
            if name not in species:
                if declared is not None:
                    raise ParseError(
                        f"unknown species {name!r}", lineno, body.find(name) + 1
                    )
                species.append(name)
        if src == dst:
            raise ParseError("reactant and product complexes coincide", lineno)
        raw.append((src, dst, rates[0], lineno))
        if reversible:
            raw.append((dst, src, rates[1], lineno))

    if not raw:
        raise ParseError("no reactions found", max(1, len(text.splitlines())))

    index = {name: k for k, name in enumerate(species)}
    complexes: list[tuple[int, ...]] = []
    cindex: dict[tuple[int, ...], int] = {}

    def complex_id(coeffs: dict) -> int:
        vec = [0] * len(species)
        for name, c in coeffs.items():
            vec[index[name]] = c
        key = tuple(vec)
        if key not in cindex:
            cindex[key] = len(complexes)
            complexes.append(key)
        return cindex[key]

    reactions: list[Reaction] = []
    pairs: set[tuple[int, int]] = set()
    for src, dst, rate, lineno in raw:
        i, j = complex_id(src), complex_id(dst)
        if (i, j) in pairs:
            raise ParseError("duplicate reaction", lineno)
        pairs.add((i, j))
        reactions.append(Reaction(i, j, rate))
    return ReactionNetwork(tuple(species), tuple(complexes), tuple(reactions))


def load_network(path) -> ReactionNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


def _format_rate(rate) -> str:
    if isinstance(rate, Fraction):
        return format_rational(rate)
    return repr(float(rate))


def serialize_network(net: ReactionNetwork) -> str:
    """Canonical text: a species line then one ``->`` line per reaction."""
    lines = ["species " + " ".join(net.species)]
    for r in net.reactions:
        lines.append(
            f"{net.complex_label(r.source)} -> {net.complex_label(r.target)} ; "
            f"{_format_rate(r.rate)}"
        )
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# stoichiometry


def stoichiometric_subspace(net: ReactionNetwork) -> StoichiometricBasis:
    """Integer basis of the span of the reaction vectors.

    Reaction vectors are taken greedily in reaction order whenever they
    raise the exact rank, so the basis consists of reaction vectors.
    """
    if "S" in net._cache:
        return net._cache["S"]
    chosen: list[tuple[int, ...]] = []
    for v in net.reaction_vectors():
        if rank(chosen + [v]) > len(chosen):
            chosen.append(v)
    basis = StoichiometricBasis(tuple(chosen))
    net._cache["S"] = basis
    return basis


def conserved_quantities(net: ReactionNetwork) -> list[tuple[int, ...]]:
    """Integer basis of the orthogonal complement of the stoichiometric subspace."""
    if "Sperp" not in net._cache:
        net._cache["Sperp"] = nullspace(stoichiometric_subspace(net).vectors, net.m)
    return list(net._cache["Sperp"])


# --------------------------------------------------------------------------
# mass action


def monomials(Z: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``x ** z_i`` for every row of Z, with ``0 ** 0 = 1``."""
    return np.prod(np.power(x[None, :], Z), axis=1)


def mass_action_rhs(net: ReactionNetwork, x) -> np.ndarray:
    """Evaluate ``f(x) = sum k(i,j) (z_j - z_i) x^{z_i}``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (net.m,):
        raise ValueError(f"expected a concentration vector of length {net.m}")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("concentrations must be finite and non-negative")
    Z = net.Z
    K = net.rate_matrix()
    mono = monomials(Z, x)
    out = K * mono[:, None]  # flux along i -> j
    # sum_ij flux_ij (z_j - z_i)
    return out.sum(axis=0) @ Z - out.sum(axis=1) @ Z
