"""Synthetic multi-domain data: three 2-D domains of three Gaussian classes.

Run: python3 demos/01_synthetic_data.py
"""
import numpy as np

from mda import apply_prior, generate_synthetic, table2_preset

specs = table2_preset()
for sp in specs:
    print(sp.name, "class means:", sp.means, "counts:", sp.counts)

# One seed fixes every draw; the generator is PCG64.
data = generate_synthetic(specs, seed=0)
print("\nn =", data.n, " d =", data.d, " domains =", data.m, " classes =", data.c)
print("per (domain, class) counts:\n", data.counts)

# Class means drift across domains while the class layout in X2 is shared.
for s in range(data.m):
    for j in range(data.c):
        cell = data.X[(data.domains == s) & (data.labels == j)]
        print(f"  domain {s + 1} class {j + 1}: sample mean {np.round(cell.mean(axis=0), 2)}")

# Prior shift: re-weight the classes of the first domain.
skewed = apply_prior(specs[0], (0.6, 0.3, 0.1), total=150)
print("\nskewed domain1 counts:", skewed.counts)
