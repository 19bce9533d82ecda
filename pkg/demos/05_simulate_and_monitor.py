"""Integrate a trajectory and watch the Lyapunov function and H."""

# %%
import numpy as np

from crnstrata import (
    certify_global_stability,
    example_path,
    find_equilibrium,
    integrate,
    load_network,
    monitor,
    project_to_class,
)
from crnstrata.simulate import format_stratum, trajectory_csv

net = load_network(example_path("example1"))
cert = certify_global_stability(net)

x0 = np.array([0.05, 0.1, 5.0])  # close to the face A1 = A2 = 0
x_star = project_to_class(net, find_equilibrium(net), x0)
traj = integrate(net, x0, t_end=50.0)
print(traj.accepted, "steps accepted,", traj.rejected, "rejected")
print("x(50) =", traj.final)

# %%
rep = monitor(traj, x_star, cert, samples=400)
print("L from", rep.lyapunov_values[0], "to", rep.lyapunov_values[-1])
print("largest L increase", rep.max_lyapunov_increase)
print("H compared", rep.H_checks, "times inside adjacent strata,", len(rep.H_violations), "increases")

# %%
# The strata visited along the way.
visited = []
for lab in rep.stratum_labels:
    text = format_stratum(lab)
    if not visited or visited[-1] != text:
        visited.append(text)
print(" -> ".join(visited))

# %%
print(trajectory_csv(traj, x_star, samples=6))

# %%
# The triangle settles at the mean of its initial mass.
tri = load_network(example_path("triangle"))
print(integrate(tri, [1.0, 1.0, 2.0], 50.0).final)
