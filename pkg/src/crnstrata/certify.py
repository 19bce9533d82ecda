"""Boundary-repulsion certificates for complex balanced networks.

For each siphon face the certifier looks for one linear functional
``H(x) = <alpha, x>`` (``alpha`` negative on the siphon, zero elsewhere)
that cannot increase anywhere in the union of strata touching the face.
Two sufficient tests are available:

* the partial-sum test: for every cycle of a cyclic decomposition of the
  equilibrium flux and every adjacent ordering restricted to that cycle,
  the partial sums of next-minus-current complex differences along the
  induced order must have ``<v, alpha> <= 0``;
* the direct test: ``<z_a - z_b, alpha> >= 0`` for every consecutive
  pair of every adjacent ordering (implies the partial-sum test).

Two-dimensional stoichiometric subspaces need no per-face work, and the
face at the origin is never an omega-limit set of a complex balanced
system, so the full species set needs no alpha either.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .equilibrium import (
    EquilibriumResult,
    NoPositiveKernel,
    NotComplexBalanced,
    find_equilibrium,
)
from .geometry import (
    MAX_COMPLEXES,
    MAX_SPECIES,
    SiphonSet,
    alpha_constraints,
    enumerate_adjacent_orderings,
    enumerate_siphons,
)
from .graph import (
    Cycle,
    CycleDecomposition,
    alternative_decompositions,
    cycle_decomposition,
    flux_matrix,
)
from .network import ReactionNetwork, stoichiometric_subspace
from .ratlp import (
    FeasibilityResult,
    LinearConstraint,
    format_rational,
    solve_feasibility,
)

__all__ = [
    "CONDITION_PARTIAL_SUMS",
    "CONDITION_DIRECT",
    "TWO_DIMENSIONAL",
    "ORIGIN_EXCLUSION",
    "PartialSumSet",
    "SiphonEntry",
    "StabilityCertificate",
    "induced_cycle_ordering",
    "build_partial_sum_set",
    "check_condition1",
    "check_condition2",
    "condition2_constraints",
    "certify_global_stability",
]

log = logging.getLogger(__name__)

CONDITION_DIRECT = "Condition1"
CONDITION_PARTIAL_SUMS = "Condition2"
TWO_DIMENSIONAL = "TwoDimensional"
ORIGIN_EXCLUSION = "OriginExclusion"

GLOBALLY_STABLE = "GloballyStable"
INCONCLUSIVE = "Inconclusive"
NOT_COMPLEX_BALANCED = "NotComplexBalanced"


@dataclass(frozen=True)
class PartialSumSet:
    siphon: SiphonSet
    vectors: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.vectors)


@dataclass
class SiphonEntry:
    siphon: SiphonSet
    condition: str | None
    alpha: tuple[Fraction, ...] | None = None
    orderings: list[tuple[int, ...]] = field(default_factory=list)
    partial_sums: PartialSumSet | None = None
    condition1: FeasibilityResult | None = None
    condition2: FeasibilityResult | None = None
    decomposition_index: int | None = None

    @property
    def certified(self) -> bool:
        return self.condition is not None

    @property
    def farkas_witness(self) -> tuple[Fraction, ...] | None:
        if self.certified:
            return None
        if self.condition2 is not None and not self.condition2.feasible:
            return self.condition2.certificate
        if self.condition1 is not None and not self.condition1.feasible:
            return self.condition1.certificate
        return None


@dataclass
class StabilityCertificate:
    network: ReactionNetwork
    verdict: str
    entries: list[SiphonEntry] = field(default_factory=list)
    equilibrium: EquilibriumResult | None = None
    decompositions: list[CycleDecomposition] = field(default_factory=list)
    reason: str = ""

    @property
    def decomposition(self) -> CycleDecomposition | None:
        """The canonical (greedy) decomposition."""
        return self.decompositions[0] if self.decompositions else None

    @property
    def globally_stable(self) -> bool:
        return self.verdict == GLOBALLY_STABLE

    def failing(self) -> list[SiphonEntry]:
        return [e for e in self.entries if not e.certified]

    def entry(self, indices: Sequence[int]) -> SiphonEntry:
        key = tuple(indices)
        for e in self.entries:
            if e.siphon.indices == key:
                return e
        raise KeyError(key)

    def to_dict(self) -> dict:
        """JSON-ready form; indices 1-based, rationals as ``"p/q"`` strings."""

        def rat(vec):
            return None if vec is None else [format_rational(v) for v in vec]

        entries = []
        for e in self.entries:
            item = {
                "siphon": list(e.siphon.one_based()),
                "minimal": e.siphon.minimal,
                "condition": e.condition,
                "alpha": rat(e.alpha),
                "orderings": [[i + 1 for i in mu] for mu in e.orderings],
                "P": None
                if e.partial_sums is None
                else [list(v) for v in e.partial_sums.vectors],
                "decomposition_index": e.decomposition_index,
            }
            if e.condition1 is not None:
                item["condition1"] = e.condition1.feasible
            if e.condition2 is not None:
                item["condition2"] = e.condition2.feasible
            fw = e.farkas_witness
            if fw is not None:
                item["farkas_witness"] = rat(fw)
            entries.append(item)
        eq = None
        if self.equilibrium is not None:
            eq = {
                "x_star": [float(v) for v in self.equilibrium.x_star],
                "residual": float(self.equilibrium.residual),
                "complex_balanced": bool(self.equilibrium.complex_balanced),
                "detailed_balanced": bool(self.equilibrium.detailed_balanced),
            }
        decs = [
            [{"cycle": list(c.one_based()), "weight": float(w)} for c, w in d.cycles]
            for d in self.decompositions
        ]
        return {
            "network_hash": self.network.digest(),
            "verdict": self.verdict,
            "reason": self.reason,
            "equilibrium": eq,
            "entries": entries,
            "decomposition": decs[0] if decs else None,
            "alternative_decompositions": decs[1:],
        }

    def to_json(self, **kwargs) -> str:
        kwargs.setdefault("indent", 2)
        kwargs.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kwargs)


def induced_cycle_ordering(ordering: Sequence[int], cycle: Cycle) -> tuple[int, ...]:
    """Restrict ``ordering`` to the cycle's complexes, as positions along the cycle.

    Positions are 0-based: position ``p`` is the ``p``-th complex after
    the cycle's start.  For the cycle ``(1, 3, 0, 1)`` and ordering
    ``(1, 4, 2, 0, 3)`` the result is ``(0, 2, 1)``.
    """
    pos = {c: p for p, c in enumerate(cycle.nodes)}
    induced = tuple(pos[c] for c in ordering if c in pos)
    if len(induced) != cycle.length:
        raise ValueError("ordering does not cover every complex of the cycle")
    return induced


def _partial_sums(
    net: ReactionNetwork, cycle: Cycle, induced: tuple[int, ...]
) -> list[tuple[int, ...]]:
    z = net.complexes
    nodes = cycle.nodes
    l = cycle.length
    acc = [0] * net.m
    out = []
    for p in induced[:-1]:
        cur, nxt = nodes[p], nodes[(p + 1) % l]
        acc = [a + b - c for a, b, c in zip(acc, z[nxt], z[cur])]
        out.append(tuple(acc))
    return out


def build_partial_sum_set(
    net: ReactionNetwork,
    decomposition: CycleDecomposition,
    orderings: Sequence[Sequence[int]],
    siphon: SiphonSet,
) -> PartialSumSet:
    """Deduplicated, sorted partial sums over every cycle and adjacent ordering."""
    if not orderings:
        log.warning("no stratum touches the face of %s; partial-sum set is empty", siphon.indices)
    vecs: set[tuple[int, ...]] = set()
    for cycle, _ in decomposition.cycles:
        for mu in orderings:
            vecs.update(_partial_sums(net, cycle, induced_cycle_ordering(mu, cycle)))
    return PartialSumSet(siphon, tuple(sorted(vecs)))


def check_condition1(
    net: ReactionNetwork, orderings: Sequence[Sequence[int]], siphon: SiphonSet
) -> FeasibilityResult:
    """One alpha with ``<z_a - z_b, alpha> >= 0`` along every adjacent ordering."""
    sign_rows, dir_rows = alpha_constraints(net, orderings, siphon)
    return solve_feasibility(sign_rows + dir_rows, net.m)


def condition2_constraints(
    P: PartialSumSet, siphon: SiphonSet, m: int | None = None
) -> list[LinearConstraint]:
    """Sign rows (one per species) followed by ``<v, alpha> <= 0`` per partial sum."""
    if m is None:
        if not P.vectors:
            raise ValueError("pass m when the partial-sum set is empty")
        m = len(P.vectors[0])
    rows = []
    for i in range(m):
        e = tuple(int(i == k) for k in range(m))
        rows.append(LinearConstraint(e, "<=", -1) if i in siphon.indices else LinearConstraint(e, "=", 0))
    rows += [LinearConstraint(v, "<=", 0) for v in P.vectors]
    return rows


def check_condition2(P: PartialSumSet, siphon: SiphonSet, m: int | None = None) -> FeasibilityResult:
    """One alpha with ``<v, alpha> <= 0`` for every partial sum ``v``.

    The certificate, when infeasible, lists multipliers for the sign
    rows (one per species) followed by one per vector of ``P``.
    """
    rows = condition2_constraints(P, siphon, m)
    return solve_feasibility(rows, len(rows[0].coefficients) if rows else 0)


def _certify_face(
    net: ReactionNetwork,
    siphon: SiphonSet,
    orderings: list[tuple[int, ...]],
    decompositions: Sequence[CycleDecomposition],
) -> SiphonEntry:
    c1 = check_condition1(net, orderings, siphon)
    entry = SiphonEntry(siphon, None, orderings=orderings, condition1=c1)
    for k, dec in enumerate(decompositions):
        P = build_partial_sum_set(net, dec, orderings, siphon)
        c2 = check_condition2(P, siphon, net.m)
        if k == 0 or c2.feasible:
            entry.partial_sums, entry.condition2 = P, c2
            entry.decomposition_index = k
        if c2.feasible:
            entry.condition, entry.alpha = CONDITION_PARTIAL_SUMS, c2.witness
            return entry
    if c1.feasible:
        entry.condition, entry.alpha = CONDITION_DIRECT, c1.witness
    return entry


def certify_global_stability(
    net: ReactionNetwork,
    equilibrium: EquilibriumResult | None = None,
    exhaustive: bool = False,
    max_decompositions: int = 16,
    max_species: int = MAX_SPECIES,
    max_complexes: int = MAX_COMPLEXES,
    workers: int | None = None,
) -> StabilityCertificate:
    """Decide whether the stratum conditions prove global stability.

    Parameters
    ----------
    net : ReactionNetwork
    equilibrium : EquilibriumResult, optional
        Computed with find_equilibrium when omitted.
    exhaustive : bool
        Also try alternative cyclic decompositions (up to
        ``max_decompositions``) for faces the canonical one fails on.

    Returns
    -------
    StabilityCertificate
        Verdict ``GloballyStable``, ``Inconclusive`` or
        ``NotComplexBalanced``.
    """
    if equilibrium is None:
        try:
            equilibrium = find_equilibrium(net)
        except (NoPositiveKernel, NotComplexBalanced) as exc:
            return StabilityCertificate(net, NOT_COMPLEX_BALANCED, reason=str(exc))

    flux = flux_matrix(net, equilibrium.x_star)
    if exhaustive:
        decompositions = alternative_decompositions(net, flux, max_decompositions)
    else:
        decompositions = [cycle_decomposition(net, flux)]
    cert = StabilityCertificate(
        net,
        INCONCLUSIVE,
        equilibrium=equilibrium,
        decompositions=list(decompositions),
    )

    s = stoichiometric_subspace(net).s
    if s == 2:
        cert.verdict = GLOBALLY_STABLE
        cert.reason = "two-dimensional stoichiometric subspace"
        cert.entries.append(
            SiphonEntry(SiphonSet(tuple(range(net.m))), TWO_DIMENSIONAL)
        )
        return cert

    for siphon in enumerate_siphons(net, max_species):
        if len(siphon) == net.m:
            cert.entries.append(SiphonEntry(siphon, ORIGIN_EXCLUSION))
            continue
        orderings = enumerate_adjacent_orderings(net, siphon, max_complexes, workers)
        cert.entries.append(_certify_face(net, siphon, orderings, decompositions))

    failing = cert.failing()
    if failing:
        cert.reason = "no alpha for siphon(s) " + ", ".join(
            str(set(e.siphon.one_based())) for e in failing
        )
    else:
        cert.verdict = GLOBALLY_STABLE
        cert.reason = "every siphon face certified"
    return cert
