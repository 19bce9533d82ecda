"""Siphons, strata and the adjacency of strata to boundary faces.

Orderings are tuples of 0-based complex indices, highest first: the
ordering ``(a, b, c)`` stands for the stratum where the scaled monomials
satisfy ``(x/x*)^{z_a} > (x/x*)^{z_b} > (x/x*)^{z_c}``.  In log
coordinates ``y = log(x/x*)`` that is the open cone
``<z_a - z_b, y> > 0, <z_b - z_c, y> > 0``, which does not depend on
``x*``; nothing here reads an equilibrium.

A stratum's closure meets the face ``L_I`` (coordinates in ``I`` zero,
the rest positive) exactly when the stratum is nonempty and some
``alpha`` with ``alpha_i <= -1`` on ``I``, ``alpha_i = 0`` off ``I`` has
``<z_a - z_b, alpha> >= 0`` along the ordering.  Necessity is the Farkas
argument; for sufficiency, from an interior ``y`` the ray ``y + t alpha``
stays in the open cone and sends exactly the ``I`` coordinates of
``x* exp(y + t alpha)`` to zero.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .network import ReactionNetwork
from .ratlp import (
    LinearConstraint,
    solve_feasibility,
    solve_strict_direction,
)

__all__ = [
    "ScaleError",
    "SiphonSet",
    "StratumRecord",
    "FaceAdjacency",
    "is_siphon",
    "enumerate_siphons",
    "stratum_directions",
    "stratum_nonempty",
    "face_adjacent",
    "alpha_constraints",
    "check_alpha",
    "enumerate_adjacent_orderings",
    "MAX_SPECIES",
    "MAX_COMPLEXES",
]

MAX_SPECIES = 20
MAX_COMPLEXES = 10


class ScaleError(ValueError):
    """Input exceeds a brute-force enumeration cap."""


@dataclass(frozen=True, order=True)
class SiphonSet:
    indices: tuple[int, ...]
    minimal: bool = True

    def __contains__(self, i) -> bool:
        return i in self.indices

    def __len__(self) -> int:
        return len(self.indices)

    def one_based(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in self.indices)


@dataclass(frozen=True)
class StratumRecord:
    ordering: tuple[int, ...]
    nonempty: bool
    witness_y: tuple[Fraction, ...] | None = None
    certificate: tuple[Fraction, ...] | None = None


@dataclass(frozen=True)
class FaceAdjacency:
    ordering: tuple[int, ...]
    siphon: SiphonSet
    adjacent: bool
    alpha: tuple[Fraction, ...] | None = None
    farkas_v: tuple[Fraction, ...] | None = None
    farkas_lambda: tuple[Fraction, ...] | None = None


# --------------------------------------------------------------------------
# siphons


def _support_masks(net: ReactionNetwork) -> tuple[list[int], list[int]]:
    masks = []
    for z in net.complexes:
        mask = 0
        for k, c in enumerate(z):
            if c > 0:
                mask |= 1 << k
        masks.append(mask)
    src = [masks[r.source] for r in net.reactions]
    dst = [masks[r.target] for r in net.reactions]
    return src, dst


def is_siphon(net: ReactionNetwork, indices: Iterable[int]) -> bool:
    """Direct definition check: every reaction producing a member of I consumes one."""
    members = set(indices)
    if not members:
        return False
    for r in net.reactions:
        produces = any(net.complexes[r.target][i] > 0 for i in members)
        consumes = any(net.complexes[r.source][i] > 0 for i in members)
        if produces and not consumes:
            return False
    return True


def enumerate_siphons(net: ReactionNetwork, max_species: int = MAX_SPECIES) -> list[SiphonSet]:
    """All nonempty siphons, by size then lexicographically.

    Every subset is tested at once with bitmask arithmetic; minimality
    (no proper nonempty sub-siphon) comes from an OR-sum over subsets.
    """
    m = net.m
    if m > max_species:
        raise ScaleError(f"{m} species exceeds the siphon enumeration cap of {max_species}")
    masks = np.arange(1 << m, dtype=np.int64)
    ok = masks != 0
    for s, d in zip(*_support_masks(net)):
        ok &= ((masks & d) == 0) | ((masks & s) != 0)
    # below[mask]: some siphon is a subset of mask
    below = ok.copy()
    for b in range(m):
        bit = 1 << b
        has = (masks & bit) != 0
        below[has] |= below[masks[has] ^ bit]
    proper = np.zeros_like(ok)
    for b in range(m):
        bit = 1 << b
        has = (masks & bit) != 0
        proper[has] |= below[masks[has] ^ bit]
    out = []
    for mask in np.flatnonzero(ok):
        idx = tuple(k for k in range(m) if (int(mask) >> k) & 1)
        out.append(SiphonSet(idx, minimal=not bool(proper[mask])))
    out.sort(key=lambda s: (len(s.indices), s.indices))
    return out


# --------------------------------------------------------------------------
# strata


def _check_ordering(net: ReactionNetwork, ordering: Sequence[int]) -> tuple[int, ...]:
    ordering = tuple(int(i) for i in ordering)
    if sorted(ordering) != list(range(net.n)):
        raise ValueError(f"{ordering} is not a permutation of the {net.n} complexes")
    return ordering


def stratum_directions(net: ReactionNetwork, ordering: Sequence[int]) -> list[tuple[int, ...]]:
    """Consecutive differences ``z_{mu(i)} - z_{mu(i+1)}``."""
    z = net.complexes
    return [
        tuple(a - b for a, b in zip(z[p], z[q])) for p, q in zip(ordering[:-1], ordering[1:])
    ]


def stratum_nonempty(net: ReactionNetwork, ordering: Sequence[int]) -> StratumRecord:
    ordering = _check_ordering(net, ordering)
    res = solve_strict_direction(stratum_directions(net, ordering))
    if res.feasible:
        witness = res.witness if res.witness else tuple(Fraction(0) for _ in range(net.m))
        return StratumRecord(ordering, True, witness_y=witness)
    return StratumRecord(ordering, False, certificate=res.certificate)


def _sign_constraints(m: int, siphon: SiphonSet) -> list[LinearConstraint]:
    out = []
    for i in range(m):
        e = tuple(int(i == k) for k in range(m))
        if i in siphon.indices:
            out.append(LinearConstraint(e, "<=", -1))
        else:
            out.append(LinearConstraint(e, "=", 0))
    return out


def alpha_constraints(
    net: ReactionNetwork, orderings: Iterable[Sequence[int]], siphon: SiphonSet
) -> tuple[list[LinearConstraint], list[LinearConstraint]]:
    """Sign rows for alpha plus ``<d, alpha> >= 0`` rows for every ordering."""
    dirs: list[tuple[int, ...]] = []
    seen = set()
    for mu in orderings:
        for d in stratum_directions(net, mu):
            if d not in seen:
                seen.add(d)
                dirs.append(d)
    return _sign_constraints(net.m, siphon), [LinearConstraint(d, ">=", 0) for d in dirs]


def face_adjacent(
    net: ReactionNetwork,
    ordering: Sequence[int],
    siphon: SiphonSet,
    stratum: StratumRecord | None = None,
) -> FaceAdjacency:
    """Does the closure of the stratum of ``ordering`` meet the face of ``siphon``?

    Raises
    ------
    ValueError
        If the stratum is empty.
    """
    ordering = _check_ordering(net, ordering)
    if stratum is None:
        stratum = stratum_nonempty(net, ordering)
    if not stratum.nonempty:
        raise ValueError(f"stratum of {ordering} is empty")
    sign_rows = _sign_constraints(net.m, siphon)
    dirs = stratum_directions(net, ordering)
    rows = sign_rows + [LinearConstraint(d, ">=", 0) for d in dirs]
    res = solve_feasibility(rows, net.m)
    if res.feasible:
        return FaceAdjacency(ordering, siphon, True, alpha=res.witness)
    lam = res.certificate[net.m:]
    v = [Fraction(0)] * net.m
    for weight, d in zip(lam, dirs):
        for k, c in enumerate(d):
            v[k] += weight * c
    return FaceAdjacency(
        ordering, siphon, False, farkas_v=tuple(v), farkas_lambda=tuple(lam)
    )


def _prefix_ok(net: ReactionNetwork, prefix: tuple[int, ...], sign_rows) -> bool:
    dirs = stratum_directions(net, prefix)
    if not dirs:
        return True
    if not solve_strict_direction(dirs).feasible:
        return False
    rows = sign_rows + [LinearConstraint(d, ">=", 0) for d in dirs]
    return solve_feasibility(rows, net.m).feasible


def _search(net: ReactionNetwork, siphon: SiphonSet, prefix: tuple[int, ...]) -> list[tuple[int, ...]]:
    sign_rows = _sign_constraints(net.m, siphon)
    found: list[tuple[int, ...]] = []

    def dfs(pre: tuple[int, ...], remaining: tuple[int, ...]):
        if not _prefix_ok(net, pre, sign_rows):
            return
        if not remaining:
            found.append(pre)
            return
        for c in remaining:
            dfs(pre + (c,), tuple(r for r in remaining if r != c))

    dfs(prefix, tuple(c for c in range(net.n) if c not in prefix))
    return found


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("CRN_CERT_THREADS")
    return max(1, int(env)) if env and env.isdigit() else 1


def enumerate_adjacent_orderings(
    net: ReactionNetwork,
    siphon: SiphonSet,
    max_complexes: int = MAX_COMPLEXES,
    workers: int | None = None,
) -> list[tuple[int, ...]]:
    """The orderings whose stratum is nonempty and whose closure meets ``L_I``.

    Depth-first over prefixes; a prefix whose strict system or alpha
    system is already infeasible cuts its subtree, since appending
    complexes only adds rows.  With several workers the first-level
    subtrees run in separate processes; output is sorted either way.
    """
    if net.n > max_complexes:
        raise ScaleError(
            f"{net.n} complexes exceeds the ordering enumeration cap of {max_complexes}"
        )
    nworkers = _worker_count(workers)
    if nworkers > 1 and net.n > 1:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            parts = pool.map(_search, [net] * net.n, [siphon] * net.n, [(c,) for c in range(net.n)])
            found = [mu for part in parts for mu in part]
    else:
        found = _search(net, siphon, ())
    return sorted(found)


def check_alpha(net: ReactionNetwork, alpha: Sequence, orderings, siphon: SiphonSet) -> bool:
    """Exact check of the alpha inequalities against a list of orderings."""
    sign_rows, dir_rows = alpha_constraints(net, orderings, siphon)
    a = [Fraction(v) for v in alpha]
    strict_sign = all(a[i] < 0 for i in siphon.indices) and all(
        a[i] == 0 for i in range(net.m) if i not in siphon.indices
    )
    return strict_sign and all(r.holds(a) for r in dir_rows)
