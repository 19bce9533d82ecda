"""Reaction-graph structure and cyclic decomposition of equilibrium flux."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .network import ReactionNetwork, stoichiometric_subspace

__all__ = [
    "FluxImbalanceError",
    "Cycle",
    "CycleDecomposition",
    "linkage_classes",
    "is_weakly_reversible",
    "deficiency",
    "cycle_decomposition",
    "alternative_decompositions",
    "flux_matrix",
    "cyclic_rhs",
]

FLUX_RTOL = 1e-9


class FluxImbalanceError(ValueError):
    """Inflow and outflow disagree at some complex."""


@dataclass(frozen=True)
class Cycle:
    """Closed walk ``(v0, v1, ..., v_{l-1}, v0)`` over complex indices."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if len(idx) < 3 or idx[0] != idx[-1]:
            raise ValueError(f"not a closed cycle: {idx}")
        if len(set(idx[:-1])) != len(idx) - 1:
            raise ValueError(f"cycle revisits a complex: {idx}")

    @property
    def length(self) -> int:
        return len(self.indices) - 1

    @property
    def nodes(self) -> tuple[int, ...]:
        return self.indices[:-1]

    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.indices[:-1], self.indices[1:]))

    def successor(self, node: int) -> int:
        pos = self.nodes.index(node)
        return self.indices[pos + 1]

    def one_based(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in self.indices)


@dataclass(frozen=True)
class CycleDecomposition:
    cycles: tuple[tuple[Cycle, float], ...]

    @property
    def delta(self) -> int:
        return len(self.cycles)

    def reconstruct(self, n: int) -> np.ndarray:
        out = np.zeros((n, n))
        for cyc, w in self.cycles:
            for a, b in cyc.edges():
                out[a, b] += w
        return out

    def cycle_keys(self) -> tuple[tuple[int, ...], ...]:
        return tuple(c.indices for c, _ in self.cycles)


def _adjacency(net: ReactionNetwork) -> csr_matrix:
    rows = [r.source for r in net.reactions]
    cols = [r.target for r in net.reactions]
    return csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(net.n, net.n))


def _components(net: ReactionNetwork, connection: str) -> list[tuple[int, ...]]:
    _, labels = connected_components(_adjacency(net), directed=True, connection=connection)
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    return sorted((tuple(g) for g in groups.values()), key=lambda g: g[0])


def linkage_classes(net: ReactionNetwork) -> list[tuple[int, ...]]:
    """Connected components of the undirected complex graph, ordered by least member."""
    return _components(net, "weak")


def is_weakly_reversible(net: ReactionNetwork) -> bool:
    return len(_components(net, "strong")) == len(linkage_classes(net))


def deficiency(net: ReactionNetwork) -> int:
    return net.n - len(linkage_classes(net)) - stoichiometric_subspace(net).s


def flux_matrix(net: ReactionNetwork, x) -> np.ndarray:
    """``kappa[i, j] = k(i, j) x^{z_i}``."""
    x = np.asarray(x, dtype=float)
    mono = np.prod(np.power(x[None, :], net.Z), axis=1)
    return net.rate_matrix() * mono[:, None]


def _check_balance(flux: np.ndarray) -> float:
    scale = float(np.max(np.abs(flux))) if flux.size else 0.0
    if scale == 0.0:
        return 0.0
    imbalance = np.abs(flux.sum(axis=0) - flux.sum(axis=1))
    worst = float(np.max(imbalance)) / scale
    if worst > FLUX_RTOL:
        i = int(np.argmax(imbalance))
        raise FluxImbalanceError(
            f"flux unbalanced at complex {i}: relative residual {worst:.3e}"
        )
    return worst


def _smallest_cycle(support: np.ndarray) -> tuple[int, ...] | None:
    """Lexicographically smallest simple cycle in a directed 0/1 graph.

    The smallest start vertex carrying an edge is used; in a balanced
    flow every edge lies on a cycle whose vertices are not smaller than
    that start.  Depth-first search tries closing the cycle before
    extending it, and extends through neighbours in ascending order, so
    the first cycle found is the lexicographically least.
    """
    n = support.shape[0]
    starts = [i for i in range(n) if support[i].any()]
    for s in starts:
        path = [s]
        on_path = {s}
        stack: list[Iterator[int]] = [iter(np.flatnonzero(support[s]))]
        while stack:
            u = path[-1]
            if len(path) > 1 and support[u, s]:
                return tuple(path) + (s,)
            nxt = None
            for w in stack[-1]:
                w = int(w)
                if w > s and w not in on_path:
                    nxt = w
                    break
            if nxt is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            path.append(nxt)
            on_path.add(nxt)
            stack.append(iter(np.flatnonzero(support[nxt])))
    return None


def _peel(residual: np.ndarray, cycle: tuple[int, ...], tol: float) -> float:
    edges = list(zip(cycle[:-1], cycle[1:]))
    w = min(residual[a, b] for a, b in edges)
    for a, b in edges:
        residual[a, b] -= w
        if residual[a, b] <= tol:
            residual[a, b] = 0.0
    return float(w)


def cycle_decomposition(net: ReactionNetwork, flux) -> CycleDecomposition:
    """Greedy decomposition of a balanced flux into weighted cycles.

    Parameters
    ----------
    net : ReactionNetwork
    flux : array_like, shape (n, n)
        ``flux[i, j] = k(i, j) (x*)^{z_i}``, zero off the reaction graph.

    Raises
    ------
    FluxImbalanceError
        When some complex has relative in/out imbalance above 1e-9.
    """
    residual = np.array(flux, dtype=float, copy=True)
    if residual.shape != (net.n, net.n):
        raise ValueError("flux must be an n x n matrix")
    _check_balance(residual)
    tol = FLUX_RTOL * float(np.max(residual)) if residual.size else 0.0
    cycles: list[tuple[Cycle, float]] = []
    while True:
        cyc = _smallest_cycle(residual > 0)
        if cyc is None:
            break
        w = _peel(residual, cyc, tol)
        cycles.append((Cycle(cyc), w))
    return CycleDecomposition(tuple(cycles))


def _simple_cycles(support: np.ndarray) -> list[tuple[int, ...]]:
    n = support.shape[0]
    found = []
    for s in range(n):
        path = [s]

        def extend(u):
            for w in np.flatnonzero(support[u]):
                w = int(w)
                if w == s and len(path) > 1:
                    found.append(tuple(path) + (s,))
                elif w > s and w not in path:
                    path.append(w)
                    extend(w)
                    path.pop()

        extend(s)
    return found


def alternative_decompositions(
    net: ReactionNetwork, flux, limit: int = 16
) -> list[CycleDecomposition]:
    """Up to ``limit`` distinct decompositions, the canonical one first.

    Branches over every simple cycle of the residual support at each
    peeling step (depth-first, cycles in lexicographic order).
    """
    base = np.array(flux, dtype=float, copy=True)
    _check_balance(base)
    tol = FLUX_RTOL * float(np.max(base)) if base.size else 0.0
    results: list[CycleDecomposition] = [cycle_decomposition(net, flux)]
    seen = {frozenset(results[0].cycle_keys())}
    budget = [200 * limit]  # search nodes; duplicates can be plentiful

    def branch(residual, acc):
        budget[0] -= 1
        if len(results) >= limit or budget[0] < 0:
            return
        options = sorted(_simple_cycles(residual > 0))
        if not options:
            key = frozenset(c.indices for c, _ in acc)
            if key not in seen:
                seen.add(key)
                results.append(CycleDecomposition(tuple(acc)))
            return
        for cyc in options:
            nxt = residual.copy()
            w = _peel(nxt, cyc, tol)
            branch(nxt, acc + [(Cycle(cyc), w)])
            if len(results) >= limit:
                return

    branch(base, [])
    return results[:limit]


def cyclic_rhs(net: ReactionNetwork, decomposition: CycleDecomposition, x, x_star, ordering=None) -> np.ndarray:
    """The vector field rebuilt from weighted cycles at the equilibrium ``x_star``.

    Each cycle contributes ``kappa * sum_i (z_next - z_i) (x/x*)^{z_i}``.
    With ``ordering`` (a total order of all complexes, highest first) each
    cycle is instead summed in telescoped form: partial sums of
    ``z_next - z_cur`` along the induced order times consecutive
    monomial differences.  Both agree with the mass-action field.
    """
    x = np.asarray(x, dtype=float)
    ratio = np.prod(np.power((x / np.asarray(x_star, dtype=float))[None, :], net.Z), axis=1)
    Z = net.Z.astype(float)
    out = np.zeros(net.m)
    for cyc, kappa in decomposition.cycles:
        nodes = cyc.nodes
        if ordering is None:
            for a, b in cyc.edges():
                out += kappa * (Z[b] - Z[a]) * ratio[a]
            continue
        seq = [c for c in ordering if c in nodes]
        acc = np.zeros(net.m)
        for cur, nxt in zip(seq[:-1], seq[1:]):
            acc = acc + Z[cyc.successor(cur)] - Z[cur]
            out += kappa * acc * (ratio[cur] - ratio[nxt])
    return out
