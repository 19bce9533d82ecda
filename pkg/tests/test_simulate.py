import json
from importlib.resources import files

import jsonschema
import numpy as np
import pytest

from crnstrata.certify import certify_global_stability
from crnstrata.equilibrium import find_equilibrium, project_to_class
from crnstrata.network import parse_network
from crnstrata.simulate import (
    StiffnessError,
    format_stratum,
    integrate,
    locate_stratum,
    lyapunov,
    monitor,
    trajectory_csv,
)

SCHEMA = json.loads((files("crnstrata") / "schemas" / "monitor.schema.json").read_text())


def test_exponential_decay_accuracy():
    net = parse_network("A -> 0; 1")
    tr = integrate(net, [1.0], 5.0, tol=1e-10)
    assert tr.times[-1] == 5.0
    assert abs(tr.final[0] - np.exp(-5.0)) < 1e-8
    mid = tr.sample([2.5])[0, 0]
    assert abs(mid - np.exp(-2.5)) < 1e-6


def test_triangle_converges(triangle):
    tr = integrate(triangle, [1.0, 1.0, 2.0], 50.0)
    assert np.abs(tr.final - 4 / 3).max() < 1e-6
    assert abs(tr.states.sum(axis=1) - 4.0).max() < 1e-10


def test_positivity_near_boundary():
    # fast consumption drives A towards zero; states must stay positive
    net = parse_network("A + B -> 0; 100\n0 -> A; 1e-6")
    tr = integrate(net, [1.0, 2.0], 10.0)
    assert np.all(tr.states > 0)


def test_stiffness_error_carries_partial():
    net = parse_network("A -> 0; 1\n0 -> A; 1")
    with pytest.raises(StiffnessError) as err:
        integrate(net, [1.0], 10.0, max_steps=3)
    assert len(err.value.partial.times) >= 1


def test_input_validation(triangle):
    with pytest.raises(ValueError):
        integrate(triangle, [1.0, -1.0, 1.0], 1.0)
    with pytest.raises(ValueError):
        integrate(triangle, [1.0, 1.0], 1.0)
    with pytest.raises(ValueError):
        integrate(triangle, [1.0, 1.0, 1.0], 0.0)


def test_lyapunov_values():
    assert lyapunov([1.0, 2.0], [1.0, 2.0]) == pytest.approx(0.0, abs=1e-15)
    # 0 log 0 = 0 on the boundary
    assert lyapunov([0.0, 1.0], [1.0, 1.0]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        lyapunov([-1.0], [1.0])


def test_locate_stratum(ex1):
    x_star = np.ones(3)
    label = locate_stratum([0.5, 2.0, 3.0], x_star, ex1.complexes)
    # log monomials: A1 -0.69, A2 0.69, A1+A2 0, A1+A3 0.41
    assert label == ((1,), (3,), (2,), (0,))
    assert format_stratum(label) == "2>4>3>1"
    tie = locate_stratum([1.0, 1.0, 1.0], x_star, ex1.complexes)
    assert tie == ((0, 1, 2, 3),)


def test_monitor_example1(ex1):
    cert = certify_global_stability(ex1)
    x0 = np.array([0.05, 0.1, 5.0])
    x_star = project_to_class(ex1, find_equilibrium(ex1), x0)
    tr = integrate(ex1, x0, 30.0)
    rep = monitor(tr, x_star, cert, samples=500)
    assert rep.max_lyapunov_increase <= 1e-8
    assert not rep.H_violations
    jsonschema.validate(rep.to_dict(), SCHEMA)


def test_monitor_conservation(triangle):
    tr = integrate(triangle, [1.0, 1.0, 2.0], 10.0)
    rep = monitor(tr, np.full(3, 4 / 3))
    assert rep.conservation_drift < 1e-10
    assert rep.H_checks == 0


def test_start_at_equilibrium(triangle):
    tr = integrate(triangle, [1.0, 1.0, 1.0], 10.0)
    assert np.allclose(tr.final, 1.0, atol=1e-8)


def test_csv_header(triangle):
    tr = integrate(triangle, [1.0, 1.0, 2.0], 1.0)
    text = trajectory_csv(tr, np.full(3, 4 / 3), samples=5)
    lines = text.strip().splitlines()
    assert lines[0] == "t,x_1,x_2,x_3,L,stratum_label"
    assert len(lines) == 6
