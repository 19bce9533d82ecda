"""Parse a network, look at its structure and find its equilibrium."""

# %%
import numpy as np

from crnstrata import (
    conserved_quantities,
    deficiency,
    find_equilibrium,
    is_weakly_reversible,
    linkage_classes,
    parse_network,
    stoichiometric_subspace,
)

# A reversible chain through four complexes, all rates 1.
net = parse_network(
    """
    species A1 A2 A3
    A1 <-> A2 ; 1, 1
    A2 <-> A1 + A2 ; 1, 1
    A1 + A2 <-> A1 + A3 ; 1, 1
    """
)
print(f"m={net.m} species, n={net.n} complexes, r={net.r} reactions")
for i in range(net.n):
    print(f"  complex {i + 1}: {net.complex_label(i)}")

# %%
# Deficiency zero and weak reversibility: complex balanced for any rates.
s = stoichiometric_subspace(net).s
print("rank", s, "linkage classes", len(linkage_classes(net)), "deficiency", deficiency(net))
print("weakly reversible:", is_weakly_reversible(net))
print("conservation laws:", conserved_quantities(net) or "none")

# %%
eq = find_equilibrium(net)
print("x* =", np.round(eq.x_star, 12), "detailed balanced:", eq.detailed_balanced)

# %%
# New rates move x* but a reversible chain stays detailed balanced.
skewed = net.with_rates([2, 1, 1, 1, 1, 1])
eq2 = find_equilibrium(skewed)
print("skewed x* =", np.round(eq2.x_star, 6), "detailed balanced:", eq2.detailed_balanced)
