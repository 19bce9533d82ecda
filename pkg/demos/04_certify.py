"""Certify global stability, or explain why the test is inconclusive."""

# %%
from crnstrata import certify_global_stability, example_path, load_network
from crnstrata.cli import render_certificate

for name in ("example1", "example2", "triangle", "not_balanced"):
    cert = certify_global_stability(load_network(example_path(name)))
    print(f"--- {name}")
    print(render_certificate(cert))

# %%
# The first network: one alpha keeps every partial sum non-positive.
cert = certify_global_stability(load_network(example_path("example1")))
entry = cert.entry((0, 1))
print("P =", entry.partial_sums.vectors)
print("alpha =", [str(a) for a in entry.alpha])

# %%
# The second: the Farkas multipliers combine the sign rows and partial
# sums into the contradiction 0 > 0.
cert = certify_global_stability(load_network(example_path("example2")))
entry = cert.entry((0, 1))
print("P =", entry.partial_sums.vectors)
print("multipliers =", [str(v) for v in entry.farkas_witness])

# %%
# Other cyclic decompositions of the same flux can be tried.
cert = certify_global_stability(load_network(example_path("example2")), exhaustive=True)
print(len(cert.decompositions), "decomposition(s) tried; verdict", cert.verdict)

# %%
print(cert.to_json()[:400])
