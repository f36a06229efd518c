"""Saving, reloading and exporting a fitted model.

The MDA1 container keeps B, the eigenvalues and the training data, so a
reloaded model transforms new data bit-identically.

Run: python3 demos/06_model_files.py
"""
import tempfile
from pathlib import Path

import numpy as np

from mda import HyperParams, fit, generate_synthetic, table2_preset, transform_target
from mda.harness import emit_projection_csv
from mda.modelio import load_model, save_model

specs = table2_preset()
model = fit(generate_synthetic(specs[:2], seed=6), "median", HyperParams())
target = generate_synthetic(specs[2:], seed=7)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "model.mda"
    save_model(model, path)
    print(f"{path.name}: {path.stat().st_size} bytes, magic {path.read_bytes()[:4]!r}")
    again = load_model(path)
    same = np.array_equal(transform_target(again, target).rows,
                          transform_target(model, target).rows)
    print("reloaded transform identical:", same)

    out = Path(tmp) / "projection.csv"
    emit_projection_csv(again, target, out)
    print(out.read_text().splitlines()[:3])
