"""Excess-risk and generalization bounds as diagnostics of a projection.

The bounds grow with tr(B^T K B). With unit constants they are only useful
for comparing models, here across the domain-discrepancy weight gamma.

Run: python3 demos/05_bounds.py
"""
from mda import HyperParams, fit, generate_synthetic, table2_preset
from mda.bounds import BoundConstants, bound_report

sources = generate_synthetic(table2_preset()[:2], seed=5)
constants = BoundConstants(delta=0.05)
print(f"{'gamma':>8} {'tr(BKB)':>10} {'excess':>8} {'general':>8}")
for gamma in (1e-2, 1.0, 1e2, 1e4):
    model = fit(sources, "median", HyperParams(gamma=gamma))
    rep = bound_report(model, constants)
    print(f"{gamma:8.0e} {rep.tr_bkb:10.4f} {rep.excess_risk_bound:8.4f} "
          f"{rep.generalization_bound:8.4f}")
