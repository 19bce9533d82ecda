"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (lines are repeated in the
terminal summary) or directly as ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import io
import time
from fractions import Fraction

import numpy as np

from crnstrata import example_path, load_network
from crnstrata.certify import certify_global_stability, condition2_constraints
from crnstrata.cli import run
from crnstrata.equilibrium import find_equilibrium, project_to_class
from crnstrata.geometry import enumerate_siphons, is_siphon, stratum_directions, stratum_nonempty
from crnstrata.graph import (
    Cycle,
    CycleDecomposition,
    cycle_decomposition,
    cyclic_rhs,
    deficiency,
    flux_matrix,
)
from crnstrata.network import mass_action_rhs, parse_network
from crnstrata.ratlp import LinearConstraint, check_certificate, check_witness, solve_feasibility
from crnstrata.simulate import integrate, lyapunov, monitor

import netgen

RESULTS: list[str] = []

EX1_ORDERINGS = {(1, 2, 4, 3), (1, 4, 2, 3), (2, 1, 4, 3), (2, 4, 1, 3), (4, 1, 2, 3), (4, 2, 1, 3)}
EX2_ORDERINGS = {(1, 4, 2, 3), (1, 4, 3, 2), (4, 1, 2, 3), (4, 1, 3, 2), (4, 2, 1, 3)}
EX1_P = {(1, -1, 0), (-1, 1, 0), (1, 0, 0), (0, 1, -1)}
EX2_P = {(-1, 2, 0), (0, 1, -1), (1, 0, -1), (1, -1, -1), (1, -2, 0), (2, -2, -1), (-1, 1, 0)}


def _report(label: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _net(name):
    return load_network(example_path(name))


def _cli(*args):
    out = io.StringIO()
    code = run([str(a) for a in args], stdout=out, stderr=io.StringIO())
    return code, out.getvalue()


def _one_based(orderings):
    return {tuple(i + 1 for i in mu) for mu in orderings}


def test_1_example1_end_to_end():
    net = _net("example1")
    t0 = time.perf_counter()
    code, out = _cli("certify", "--input", example_path("example1"))
    cert = certify_global_stability(net)
    elapsed = time.perf_counter() - t0
    entry = cert.entry((0, 1))
    alpha = entry.alpha
    P = set(entry.partial_sums.vectors)
    alpha_ok = alpha[2] == 0 and alpha[0] < 0 and alpha[1] < 0 and all(
        sum(Fraction(a) * b for a, b in zip(alpha, v)) <= 0 for v in P
    )
    # the printed alpha, by substitution into the same exact system
    rows = condition2_constraints(entry.partial_sums, entry.siphon, net.m)
    printed_ok = check_witness(rows, (-1, -1, 0))
    ok = (
        code == 0
        and out.startswith("GLOBALLY STABLE\n")
        and cert.verdict == "GloballyStable"
        and _one_based(entry.orderings) == EX1_ORDERINGS
        and P == EX1_P
        and alpha_ok
        and printed_ok
        and elapsed < 5.0
    )
    _report(
        "criterion 1",
        ok,
        f"verdict {cert.verdict}, |M_I|={len(entry.orderings)}, P={sorted(P)}, "
        f"alpha={tuple(str(a) for a in alpha)}, (-1,-1,0) feasible={printed_ok}, {elapsed:.2f}s",
    )


def test_2_example2_end_to_end():
    net = _net("example2")
    t0 = time.perf_counter()
    code, out = _cli("certify", "--input", example_path("example2"))
    cert = certify_global_stability(net)
    elapsed = time.perf_counter() - t0
    entry = cert.entry((0, 1))
    P = set(entry.partial_sums.vectors)
    rows = condition2_constraints(entry.partial_sums, entry.siphon, net.m)
    farkas = entry.farkas_witness
    farkas_ok = (
        farkas is not None
        and check_certificate(rows, farkas)
        and all(lam >= 0 for lam, r in zip(farkas, rows) if r.relation != "=")
    )
    ok = (
        code == 1
        and out.startswith("INCONCLUSIVE\n")
        and cert.verdict == "Inconclusive"
        and _one_based(entry.orderings) == EX2_ORDERINGS
        and P == EX2_P
        and farkas_ok
        and elapsed < 5.0
    )
    _report(
        "criterion 2",
        ok,
        f"verdict {cert.verdict}, |M_I|={len(entry.orderings)}, |P|={len(P)}, "
        f"Farkas certificate valid={farkas_ok}, {elapsed:.2f}s",
    )


def test_3_cycle_decompositions():
    details = []
    ok = True
    expected = {"example1": [(1, 2, 1), (2, 3, 2), (3, 4, 3)], "example2": [(1, 2, 1), (1, 2, 3, 4, 1)]}
    for name, cycles in expected.items():
        net = _net(name)
        flux = flux_matrix(net, find_equilibrium(net).x_star)
        dec = cycle_decomposition(net, flux)
        got = [c.one_based() for c, _ in dec.cycles]
        resid = float(np.abs(dec.reconstruct(net.n) - flux).max() / flux.max())
        ok &= got == cycles and resid <= 1e-9
        details.append(f"{name} {got} residual {resid:.1e}")
    _report("criterion 3", ok, "; ".join(details))


def test_4_structural_classification():
    unbalanced = _net("not_balanced")
    triangle = _net("triangle")
    cert5 = certify_global_stability(unbalanced)
    eq6 = find_equilibrium(triangle)
    defs = [deficiency(_net("example1")), deficiency(_net("example2")), deficiency(unbalanced)]
    ok = (
        cert5.verdict == "NotComplexBalanced"
        and eq6.complex_balanced
        and not eq6.detailed_balanced
        and defs == [0, 0, 1]
    )
    _report(
        "criterion 4",
        ok,
        f"A1->A2, 2A2->2A1: {cert5.verdict}; triangle complex balanced={eq6.complex_balanced}, "
        f"detailed balanced={eq6.detailed_balanced}; deficiencies {defs}",
    )


def test_5_empty_stratum():
    net = parse_network("0 <-> A1; 1, 1\nA2 <-> A1 + A2; 1, 1")
    assert net.complexes == ((0, 0), (1, 0), (0, 1), (1, 1))
    rec = stratum_nonempty(net, (2, 3, 1, 0))
    dirs = [LinearConstraint(d, ">", 0) for d in stratum_directions(net, (2, 3, 1, 0))]
    cert_ok = rec.certificate is not None and check_certificate(dirs, rec.certificate)
    _report("criterion 5", not rec.nonempty and cert_ok, f"mu=[3,4,2,1] empty={not rec.nonempty}, certificate valid={cert_ok}")


def test_6a_farkas_exclusivity():
    rng = np.random.default_rng(61)
    rels = [">", ">=", "=", "<=", "<"]
    bad = feasible = 0
    for _ in range(1000):
        dim = int(rng.integers(1, 7))
        rows = [
            LinearConstraint(
                tuple(int(v) for v in rng.integers(-5, 6, size=dim)),
                rels[int(rng.integers(5))],
                int(rng.integers(-5, 6)),
            )
            for _ in range(int(rng.integers(1, 9)))
        ]
        res = solve_feasibility(rows, dim)
        if res.feasible:
            feasible += 1
            good = check_witness(rows, res.witness) and res.certificate is None
        else:
            good = check_certificate(rows, res.certificate) and res.witness is None
        bad += not good
    _report("criterion 6a", bad == 0, f"1000 systems, {feasible} feasible, {bad} failures")


def test_6b_cyclic_identity():
    rng = np.random.default_rng(62)
    worst = 0.0
    for _ in range(20):
        net, x_star, kappa = netgen.random_cyclic_network(rng)
        # the known construction and the decomposition recovered from the flux
        known = CycleDecomposition(((Cycle(tuple(range(net.n)) + (0,)), kappa),))
        found = cycle_decomposition(net, flux_matrix(net, x_star))
        for _ in range(100):
            x = np.exp(rng.uniform(-2.0, 2.0, size=net.m))
            f = mass_action_rhs(net, x)
            mu = [int(i) for i in rng.permutation(net.n)]
            for dec in (known, found):
                for g in (cyclic_rhs(net, dec, x, x_star), cyclic_rhs(net, dec, x, x_star, ordering=mu)):
                    worst = max(worst, float(np.linalg.norm(f - g) / np.linalg.norm(f)))
    _report("criterion 6b", worst <= 1e-12, f"20 networks x 100 points, worst relative error {worst:.2e}")


def test_6c_lyapunov_monotone():
    rng = np.random.default_rng(63)
    nets = [_net("example1"), _net("example2"), _net("triangle")]
    worst = -np.inf
    for k in range(50):
        net = nets[k % 3]
        x0 = np.exp(rng.uniform(np.log(0.1), np.log(10.0), size=net.m))
        x_star = project_to_class(net, find_equilibrium(net), x0)
        tr = integrate(net, x0, 50.0)
        L = np.array([lyapunov(x, x_star) for x in tr.states])
        worst = max(worst, float(np.diff(L).max()), monitor(tr, x_star).max_lyapunov_increase)
    _report("criterion 6c", worst <= 1e-8, f"50 trajectories, largest per-step increase {worst:.2e}")


def test_6d_no_h_violations():
    net = _net("example1")
    cert = certify_global_stability(net)
    eq = find_equilibrium(net)
    rng = np.random.default_rng(64)
    checks = violations = 0
    for _ in range(100):
        x0 = np.exp(rng.uniform(np.log(0.1), np.log(10.0), size=net.m))
        x_star = project_to_class(net, eq, x0)
        rep = monitor(integrate(net, x0, 100.0), x_star, cert)
        checks += rep.H_checks
        violations += len(rep.H_violations)
    _report(
        "criterion 6d",
        violations == 0 and cert.globally_stable,
        f"100 initial states, {checks} in-stratum comparisons, {violations} violations",
    )


def test_6e_siphons_brute_force():
    from itertools import combinations

    rng = np.random.default_rng(65)
    corpus = [_net(n) for n in ("example1", "example2", "triangle", "not_balanced")]
    for m in range(1, 13):
        corpus.append(netgen.random_network(rng, m, int(rng.integers(1, 2 * m + 1)), max_coeff=1))
    mismatches = 0
    for net in corpus:
        brute = [
            s for size in range(1, net.m + 1) for s in combinations(range(net.m), size) if is_siphon(net, s)
        ]
        mismatches += [s.indices for s in enumerate_siphons(net)] != brute
    _report("criterion 6e", mismatches == 0, f"{len(corpus)} networks with m <= 12, {mismatches} mismatches")


def test_6f_condition1_implies_condition2():
    from crnstrata.certify import build_partial_sum_set, check_condition1, check_condition2
    from crnstrata.geometry import enumerate_adjacent_orderings

    rng = np.random.default_rng(66)
    held = counter = 0
    for _ in range(200):
        net = netgen.random_balanced_network(rng)
        dec = cycle_decomposition(net, flux_matrix(net, np.ones(net.m)))
        for sip in enumerate_siphons(net):
            if len(sip) == net.m:
                continue
            mus = enumerate_adjacent_orderings(net, sip)
            if check_condition1(net, mus, sip).feasible:
                held += 1
                P = build_partial_sum_set(net, dec, mus, sip)
                counter += not check_condition2(P, sip, net.m).feasible
    _report("criterion 6f", counter == 0, f"200 networks, {held} faces with Condition 1, {counter} counterexamples")


def test_7_triangle_convergence():
    net = _net("triangle")
    tr = integrate(net, [1.0, 1.0, 2.0], 50.0)
    err = float(np.abs(tr.final - 4.0 / 3.0).max())
    cert = certify_global_stability(net)
    ok = err <= 1e-6 and cert.verdict == "GloballyStable"
    _report("criterion 7", ok, f"|x(50) - 4/3| = {err:.2e}, verdict {cert.verdict} ({cert.reason})")


if __name__ == "__main__":
    import sys

    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
