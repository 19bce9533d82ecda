"""Complex balanced equilibria and projection onto compatibility classes."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import null_space

from .graph import deficiency, is_weakly_reversible, linkage_classes
from .network import ReactionNetwork, conserved_quantities, monomials
from .ratlp import nullspace

__all__ = [
    "NoPositiveKernel",
    "NotComplexBalanced",
    "ConvergenceError",
    "ComplexPotential",
    "EquilibriumResult",
    "complex_potential",
    "find_equilibrium",
    "project_to_class",
    "check_detailed_balance",
    "balance_residual",
]

log = logging.getLogger(__name__)

BALANCE_TOL = 1e-9


class NoPositiveKernel(ValueError):
    """The kinetic balance system has no positive solution (not weakly reversible)."""


class NotComplexBalanced(ValueError):
    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class ConvergenceError(ArithmeticError):
    def __init__(self, message: str, value: float, gradient: float):
        super().__init__(f"{message} (g = {value:.6g}, |grad| = {gradient:.3e})")
        self.value = value
        self.gradient = gradient


@dataclass(frozen=True)
class ComplexPotential:
    """Positive kernel vector of the balance system, one entry per complex.

    Normalised so the first complex of each linkage class has value 1.
    ``exact`` is filled when every rate is rational.
    """

    psi: np.ndarray
    exact: tuple[Fraction, ...] | None = None


@dataclass(frozen=True)
class EquilibriumResult:
    x_star: np.ndarray
    residual: float
    complex_balanced: bool
    detailed_balanced: bool
    log_residual: float = 0.0
    structural: bool = False


def _balance_rows(net: ReactionNetwork, members: tuple[int, ...], exact: bool):
    """Rows of ``sum_j k(j,i) psi_j - psi_i sum_j k(i,j)`` restricted to a class."""
    pos = {c: k for k, c in enumerate(members)}
    zero = Fraction(0) if exact else 0.0
    rows = [[zero] * len(members) for _ in members]
    for r in net.reactions:
        if r.source not in pos:
            continue
        k = r.rate if exact else float(r.rate)
        i, j = pos[r.source], pos[r.target]
        rows[j][i] += k
        rows[i][i] -= k
    return rows


def complex_potential(net: ReactionNetwork) -> ComplexPotential:
    """Solve the balance equations with the monomials as unknowns.

    Raises
    ------
    NoPositiveKernel
        If the network is not weakly reversible.
    """
    if not is_weakly_reversible(net):
        raise NoPositiveKernel("network is not weakly reversible; no positive kernel")
    exact = net.rates_exact()
    psi = np.zeros(net.n)
    psi_exact: list[Fraction] = [Fraction(0)] * net.n
    for members in linkage_classes(net):
        rows = _balance_rows(net, members, exact)
        if exact:
            basis = nullspace(rows, len(members))
            if len(basis) != 1:
                raise NoPositiveKernel("balance kernel of a linkage class is not one-dimensional")
            vec = [Fraction(v) for v in basis[0]]
            vec = [v / vec[0] for v in vec] if vec[0] != 0 else vec
            if not all(v > 0 for v in vec):
                raise NoPositiveKernel("balance kernel is not positive")
            for c, v in zip(members, vec):
                psi_exact[c] = v
                psi[c] = float(v)
        else:
            ker = null_space(np.array(rows, dtype=float))
            if ker.shape[1] != 1:
                raise NoPositiveKernel("balance kernel of a linkage class is not one-dimensional")
            vec = ker[:, 0] / ker[0, 0]
            if not np.all(vec > 0):
                raise NoPositiveKernel("balance kernel is not positive")
            psi[list(members)] = vec
    return ComplexPotential(psi, tuple(psi_exact) if exact else None)


def balance_residual(net: ReactionNetwork, x) -> float:
    """Largest relative violation of complex balance at ``x`` over all complexes."""
    x = np.asarray(x, dtype=float)
    K = net.rate_matrix()
    mono = monomials(net.Z, x)
    flux = K * mono[:, None]
    inflow = flux.sum(axis=0)
    outflow = flux.sum(axis=1)
    scale = np.maximum(np.maximum(inflow, outflow), np.finfo(float).tiny)
    return float(np.max(np.abs(inflow - outflow) / scale))


def check_detailed_balance(net: ReactionNetwork, x, rtol: float = BALANCE_TOL) -> bool:
    """Pairwise balance ``k(i,j) x^{z_i} = k(j,i) x^{z_j}`` for every reaction."""
    x = np.asarray(x, dtype=float)
    K = net.rate_matrix()
    mono = monomials(net.Z, x)
    for r in net.reactions:
        back = K[r.target, r.source]
        if back == 0:
            return False
        fwd = K[r.source, r.target] * mono[r.source]
        rev = back * mono[r.target]
        if abs(fwd - rev) > rtol * max(fwd, rev):
            return False
    return True


def find_equilibrium(net: ReactionNetwork) -> EquilibriumResult:
    """A positive complex balanced equilibrium, if the rates admit one.

    The monomials ``x^{z_i}`` must equal ``c_L psi_i`` with one free
    positive factor ``c_L`` per linkage class, so ``log x`` and ``log c``
    are found by least squares on ``[Z | E] (y, log c) = log psi``.

    Raises
    ------
    NoPositiveKernel
        Propagated from complex_potential.
    NotComplexBalanced
        When the log-linear residual exceeds 1e-9.
    """
    pot = complex_potential(net)
    classes = linkage_classes(net)
    E = np.zeros((net.n, len(classes)))
    for k, members in enumerate(classes):
        E[list(members), k] = 1.0
    A = np.hstack([net.Z, E])
    rhs = np.log(pot.psi)
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    log_res = float(np.max(np.abs(A @ sol - rhs))) if net.n else 0.0
    x_hat = np.exp(sol[: net.m])
    structural = deficiency(net) == 0
    residual = balance_residual(net, x_hat)
    if log_res > BALANCE_TOL and not structural:
        raise NotComplexBalanced(
            f"log-linear residual {log_res:.3e} exceeds {BALANCE_TOL:g}", log_res
        )
    if structural and log_res > BALANCE_TOL:
        log.warning("deficiency-zero network with log residual %.3e", log_res)
    return EquilibriumResult(
        x_star=x_hat,
        residual=residual,
        complex_balanced=True,
        detailed_balanced=check_detailed_balance(net, x_hat),
        log_residual=log_res,
        structural=structural,
    )


def _orthonormal_complement(net: ReactionNetwork) -> np.ndarray:
    basis = conserved_quantities(net)
    if not basis:
        return np.zeros((0, net.m))
    q, _ = np.linalg.qr(np.array(basis, dtype=float).T)
    return q.T


def project_to_class(
    net: ReactionNetwork, x_hat, x0, max_iter: int = 200, gtol: float = 1e-12
) -> np.ndarray:
    """Equilibrium in the compatibility class of ``x0``.

    Minimises ``g(c) = sum_i xhat_i exp(w_i) - <x0, w>`` with
    ``w = C^T c`` over an orthonormal basis ``C`` of the conserved
    directions; the minimiser gives ``x* = xhat * exp(w)`` with
    ``C (x* - x0) = 0``.  Newton steps are halved until g decreases
    while the Newton decrement is large.
    """
    if isinstance(x_hat, EquilibriumResult):
        x_hat = x_hat.x_star
    x_hat = np.asarray(x_hat, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (net.m,) or np.any(x0 <= 0):
        raise ValueError("x0 must be a positive vector of length m")
    C = _orthonormal_complement(net)
    if C.shape[0] == 0:
        return x_hat.copy()

    target = C @ x0
    scale = max(1.0, float(np.linalg.norm(target)))

    def g(c):
        w = C.T @ c
        return float(x_hat @ np.exp(w) - x0 @ w)

    c = np.zeros(C.shape[0])
    val = g(c)
    grad = C @ x_hat - target
    for _ in range(max_iter):
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= gtol * scale:
            break
        x = x_hat * np.exp(C.T @ c)
        H = (C * x) @ C.T
        step = np.linalg.solve(H, -grad)
        decrement = float(-grad @ step)
        t = 1.0
        if decrement > 1e-4:
            # damped phase; near the minimiser g can no longer resolve
            # decreases, so full steps are taken there
            while g(c + t * step) >= val:
                t *= 0.5
                if t < 1e-12:
                    raise ConvergenceError("line search stalled", val, gnorm)
        c = c + t * step
        val = g(c)
        grad = C @ (x_hat * np.exp(C.T @ c)) - target
        if float(np.linalg.norm(t * step)) <= 1e-15 * max(1.0, float(np.linalg.norm(c))):
            break
    else:
        raise ConvergenceError(
            f"no convergence after {max_iter} iterations", val, float(np.linalg.norm(grad))
        )
    return x_hat * np.exp(C.T @ c)
