from fractions import Fraction

import numpy as np
import pytest

from crnstrata.equilibrium import (
    NoPositiveKernel,
    NotComplexBalanced,
    balance_residual,
    check_detailed_balance,
    complex_potential,
    find_equilibrium,
    project_to_class,
)
from crnstrata.network import conserved_quantities, mass_action_rhs, parse_network

import netgen


def test_example1_detailed_balanced(ex1):
    eq = find_equilibrium(ex1)
    assert np.allclose(eq.x_star, 1.0)
    assert eq.complex_balanced and eq.detailed_balanced and eq.structural


def test_triangle_not_detailed_balanced(triangle):
    eq = find_equilibrium(triangle)
    assert eq.complex_balanced and not eq.detailed_balanced
    assert balance_residual(triangle, eq.x_star) < 1e-12


def test_unbalanced_raises(unbalanced):
    with pytest.raises(NoPositiveKernel):
        find_equilibrium(unbalanced)


def test_positive_deficiency_wrong_rates():
    # deficiency one: A <-> 2A <-> 3A is only balanced for special rates
    text = "A <-> 2 A; 1, 1\n2 A <-> 3 A; 1, 3"
    net = parse_network(text)
    with pytest.raises(NotComplexBalanced) as err:
        find_equilibrium(net)
    assert err.value.residual > 1e-9


def test_positive_deficiency_balanced_rates():
    net = parse_network("A <-> 2 A; 1, 1\n2 A <-> 3 A; 1, 1")
    eq = find_equilibrium(net)
    assert np.allclose(eq.x_star, 1.0) and not eq.structural


def test_exact_potential(ex2):
    pot = complex_potential(ex2)
    assert pot.exact is not None and pot.exact[0] == 1
    assert all(isinstance(v, Fraction) and v > 0 for v in pot.exact)


def test_projection_matches_conservation(triangle):
    x0 = np.array([1.0, 1.0, 2.0])
    x = project_to_class(triangle, find_equilibrium(triangle), x0)
    assert np.allclose(x, 4 / 3, rtol=1e-12)


def test_projection_random(rng):
    for _ in range(20):
        net = netgen.random_balanced_network(rng, m_range=(2, 4))
        eq = find_equilibrium(net)
        x0 = np.exp(rng.uniform(-2, 2, size=net.m))
        x = project_to_class(net, eq, x0)
        assert balance_residual(net, x) < 1e-8
        for c in conserved_quantities(net):
            assert abs(np.dot(c, x - x0)) <= 1e-9 * np.dot(np.abs(c), x0)
        assert np.abs(mass_action_rhs(net, x)).max() < 1e-8 * max(1.0, x.max())


def test_detailed_balance_tolerance(ex1):
    assert check_detailed_balance(ex1, np.ones(3))
    assert not check_detailed_balance(ex1, [1.0, 2.0, 1.0])
