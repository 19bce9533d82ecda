"""Siphons, strata and which strata touch a boundary face."""

# %%
from crnstrata import (
    enumerate_adjacent_orderings,
    enumerate_siphons,
    example_path,
    face_adjacent,
    load_network,
    parse_network,
    stratum_nonempty,
)

net = load_network(example_path("example2"))
for sip in enumerate_siphons(net):
    names = [net.species[i] for i in sip.indices]
    print("siphon", names, "minimal" if sip.minimal else "")

# %%
# Orderings are highest-first tuples of complexes (0-based here).
face = enumerate_siphons(net)[0]
mus = enumerate_adjacent_orderings(net, face)
print(f"{len(mus)} strata touch the face where {face.one_based()} vanish:")
for mu in mus:
    print("  ", " > ".join(net.complex_label(i) for i in mu))

# %%
# An ordering outside that set comes with a reason: a non-negative
# combination v of its differences that is positive on the siphon.
res = face_adjacent(net, (2, 0, 1, 3), face)
print("adjacent:", res.adjacent, "v =", [str(v) for v in res.farkas_v])

# %%
# Some orderings describe no point at all.
square = parse_network("0 <-> A1; 1, 1\nA2 <-> A1 + A2; 1, 1")
rec = stratum_nonempty(square, (2, 3, 1, 0))
print("stratum A2 > A1+A2 > A1 > 0 is", "nonempty" if rec.nonempty else "empty")
print("multipliers:", [str(c) for c in rec.certificate])
