"""Mass-action integration and numerical monitors for certificates."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import xlogy

from .network import ReactionNetwork, conserved_quantities, mass_action_rhs

__all__ = [
    "StiffnessError",
    "Trajectory",
    "MonitorReport",
    "integrate",
    "lyapunov",
    "locate_stratum",
    "format_stratum",
    "monitor",
    "trajectory_csv",
]

TIE_RTOL = 1e-12
H_TOL = 1e-8

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4


class StiffnessError(ArithmeticError):
    """Step size fell below the underflow threshold; ``partial`` holds the run so far."""

    def __init__(self, message: str, partial: "Trajectory"):
        super().__init__(message)
        self.partial = partial


@dataclass
class Trajectory:
    network: ReactionNetwork
    times: np.ndarray
    states: np.ndarray
    derivatives: np.ndarray
    accepted: int = 0
    rejected: int = 0

    @property
    def x0(self) -> np.ndarray:
        return self.states[0]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def sample(self, ts) -> np.ndarray:
        """Cubic Hermite interpolation between accepted steps."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        t = self.times
        idx = np.clip(np.searchsorted(t, ts, side="right") - 1, 0, len(t) - 2)
        if len(t) == 1:
            return np.repeat(self.states[:1], len(ts), axis=0)
        t0, t1 = t[idx], t[idx + 1]
        h = (t1 - t0)[:, None]
        s = ((ts - t0) / (t1 - t0))[:, None]
        y0, y1 = self.states[idx], self.states[idx + 1]
        f0, f1 = self.derivatives[idx], self.derivatives[idx + 1]
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def integrate(
    net: ReactionNetwork,
    x0,
    t_end: float,
    tol: float = 1e-8,
    h0: float | None = None,
    max_steps: int = 1_000_000,
) -> Trajectory:
    """Adaptive Dormand-Prince integration of the mass-action system.

    The local error estimate is held below ``tol`` relative to the state
    (with an absolute floor of ``tol * 1e-3 * max(x0)``).  A step that
    would make any concentration non-positive is rejected and halved.

    Raises
    ------
    StiffnessError
        If the step size drops below ``1e-14 * t_end``.
    """
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (net.m,) or np.any(x <= 0):
        raise ValueError("x0 must be a positive vector of length m")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if not 0 < tol <= 1e-2:
        raise ValueError("tol must lie in (0, 1e-2]")

    def f(y):
        return mass_action_rhs(net, y)

    atol = tol * 1e-3 * float(np.max(x))
    t = 0.0
    k1 = f(x)
    times, states, derivs = [t], [x.copy()], [k1.copy()]
    if h0 is None:
        scale = atol + tol * np.abs(x)
        d0 = np.linalg.norm(x / scale) / np.sqrt(net.m)
        d1 = np.linalg.norm(k1 / scale) / np.sqrt(net.m)
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h = min(h0, t_end)
    h_min = 1e-14 * t_end
    accepted = rejected = 0

    def partial():
        return Trajectory(net, np.array(times), np.array(states), np.array(derivs), accepted, rejected)

    while t < t_end:
        if accepted + rejected >= max_steps:
            raise StiffnessError("step budget exhausted", partial())
        h = min(h, t_end - t)
        if h < h_min and t_end - t > h_min:
            raise StiffnessError(f"step size underflow at t = {t:.6g} (h = {h:.3e})", partial())
        K = np.empty((7, net.m))
        K[0] = k1
        ok = True
        for s in range(1, 7):
            ys = x + h * (np.asarray(_A[s]) @ K[:s])
            if np.any(ys < 0):
                ok = False
                break
            K[s] = f(ys)
        if not ok:
            rejected += 1
            h *= 0.5
            continue
        y_new = x + h * (_B5 @ K)
        if np.any(y_new <= 0):
            rejected += 1
            h *= 0.5
            continue
        err_vec = h * (_E @ K)
        scale = atol + tol * np.maximum(np.abs(x), np.abs(y_new))
        err = float(np.max(np.abs(err_vec) / scale))
        if err <= 1.0:
            t = t + h if t_end - (t + h) > h_min else t_end
            x = y_new
            k1 = K[6]  # FSAL
            times.append(t)
            states.append(x.copy())
            derivs.append(k1.copy())
            accepted += 1
            factor = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
        else:
            rejected += 1
            factor = max(0.2, 0.9 * err ** -0.2)
        h *= factor
    return partial()


def lyapunov(x, x_star) -> float:
    """``sum x_i (ln x_i - ln x*_i - 1) + x*_i`` with ``0 ln 0 = 0``."""
    x = np.asarray(x, dtype=float)
    xs = np.asarray(x_star, dtype=float)
    if np.any(x < 0) or np.any(xs <= 0):
        raise ValueError("need x >= 0 and x_star > 0")
    return float(np.sum(xlogy(x, x) - x * np.log(xs) - x + xs))


def locate_stratum(x, x_star, complexes) -> tuple[tuple[int, ...], ...]:
    """Weak ordering of complexes by ``(x/x*)^{z_i}``, largest first.

    Groups are tie classes (relative gap at most 1e-12 between
    neighbours); a point in the open stratum of an ordering gives
    singleton groups in that order.
    """
    x = np.asarray(x, dtype=float)
    xs = np.asarray(x_star, dtype=float)
    Z = np.asarray(complexes, dtype=float)
    logs = Z @ (np.log(x) - np.log(xs))
    order = sorted(range(len(logs)), key=lambda i: (-logs[i], i))
    groups: list[list[int]] = []
    prev = None
    for i in order:
        # relative gap of the monomials equals expm1 of the log gap
        if prev is not None and np.expm1(prev - logs[i]) <= TIE_RTOL:
            groups[-1].append(i)
        else:
            groups.append([i])
        prev = logs[i]
    return tuple(tuple(sorted(g)) for g in groups)


def format_stratum(label: Sequence[Sequence[int]]) -> str:
    """``"2>4>1=3"`` style text, 1-based."""
    return ">".join("=".join(str(i + 1) for i in g) for g in label)


def _compatible(label, mu: Sequence[int]) -> bool:
    """Is the total order ``mu`` a refinement of the weak order ``label``?"""
    rank = {}
    for k, group in enumerate(label):
        for i in group:
            rank[i] = k
    ranks = [rank[i] for i in mu]
    return all(a <= b for a, b in zip(ranks, ranks[1:]))


@dataclass
class MonitorReport:
    times: np.ndarray
    lyapunov_values: np.ndarray
    max_lyapunov_increase: float
    conservation_drift: float
    stratum_labels: list[tuple[tuple[int, ...], ...]]
    H_violations: list[tuple[float, tuple[int, ...], float]] = field(default_factory=list)
    H_checks: int = 0
    H_inter_stratum_increases: int = 0

    def to_dict(self) -> dict:
        return {
            "samples": int(len(self.times)),
            "t_end": float(self.times[-1]),
            "lyapunov_initial": float(self.lyapunov_values[0]),
            "lyapunov_final": float(self.lyapunov_values[-1]),
            "max_lyapunov_increase": float(self.max_lyapunov_increase),
            "conservation_drift": float(self.conservation_drift),
            "H_checks": int(self.H_checks),
            "H_violations": [
                {"t": float(t), "siphon": [i + 1 for i in sip], "increase": float(v)}
                for t, sip, v in self.H_violations
            ],
            "H_inter_stratum_increases": int(self.H_inter_stratum_increases),
            "final_stratum": format_stratum(self.stratum_labels[-1]),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def monitor(
    trajectory: Trajectory, x_star, certificate=None, samples: int = 1000
) -> MonitorReport:
    """Check a trajectory against the global Lyapunov function and a certificate.

    ``H(x) = <alpha, x>`` is compared only between consecutive samples
    that carry the same stratum label, when that label is refined by an
    ordering adjacent to the certified face; increases above 1e-8 there
    are violations.  Other increases are counted separately.
    """
    net = trajectory.network
    x_star = np.asarray(x_star, dtype=float)
    ts = np.linspace(trajectory.times[0], trajectory.times[-1], samples)
    xs = trajectory.sample(ts)
    xs = np.maximum(xs, np.finfo(float).tiny)
    L = np.array([lyapunov(x, x_star) for x in xs])
    dL = np.diff(L)
    max_inc = float(max(0.0, dL.max())) if len(dL) else 0.0

    drift = 0.0
    for c in conserved_quantities(net):
        cv = np.asarray(c, dtype=float)
        ref = cv @ trajectory.x0
        denom = max(abs(ref), float(np.abs(cv) @ trajectory.x0))
        vals = trajectory.states @ cv
        drift = max(drift, float(np.max(np.abs(vals - ref))) / denom)

    labels = [locate_stratum(x, x_star, net.complexes) for x in xs]
    report = MonitorReport(ts, L, max_inc, drift, labels)
    if certificate is None:
        return report
    for entry in certificate.entries:
        if entry.alpha is None or not entry.orderings:
            continue
        alpha = np.array([float(a) for a in entry.alpha])
        H = xs @ alpha
        for k in range(len(ts) - 1):
            inc = H[k + 1] - H[k]
            same = labels[k] == labels[k + 1]
            if same and any(_compatible(labels[k], mu) for mu in entry.orderings):
                report.H_checks += 1
                if inc > H_TOL:
                    report.H_violations.append((float(ts[k + 1]), entry.siphon.indices, float(inc)))
            elif inc > H_TOL:
                report.H_inter_stratum_increases += 1
    return report


def trajectory_csv(trajectory: Trajectory, x_star, samples: int | None = None) -> str:
    """CSV text with header ``t,x_1..x_m,L,stratum_label``."""
    net = trajectory.network
    if samples is None:
        ts, xs = trajectory.times, trajectory.states
    else:
        ts = np.linspace(trajectory.times[0], trajectory.times[-1], samples)
        xs = trajectory.sample(ts)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t"] + [f"x_{i + 1}" for i in range(net.m)] + ["L", "stratum_label"])
    for t, x in zip(ts, xs):
        label = format_stratum(locate_stratum(x, x_star, net.complexes))
        writer.writerow(
            [repr(float(t))] + [repr(float(v)) for v in x] + [repr(lyapunov(x, x_star)), label]
        )
    return buf.getvalue()
