"""Fit a projection on two source domains and classify an unseen domain.

Compares 1NN accuracy on raw features, kernel PCA, kernel Fisher
discriminant and the multidomain projection, all at the balanced setting
beta = 0.5, alpha = gamma = 1.

Run: python3 demos/03_fit_and_classify.py
"""
import numpy as np

from mda import HyperParams, fit, generate_synthetic, table2_preset, transform_target, transform_train
from mda.classifiers import (NnModel, accuracy, baseline_train_features, kfd_fit, kfd_transform,
                             kpca_fit, kpca_transform, nn1_predict)

specs = table2_preset()
sources = generate_synthetic(specs[:2], seed=3)
target = generate_synthetic(specs[2:], seed=4)


def nn_acc(train_rows, test_rows):
    pred = nn1_predict(NnModel(train_rows, sources.labels), test_rows)
    return accuracy(pred, target.labels)


print(f"raw 1NN          {nn_acc(sources.X, target.X):.3f}")

kp = kpca_fit(sources, "median", 0.96)
print(f"kernel PCA       {nn_acc(baseline_train_features(kp), kpca_transform(kp, target)):.3f}"
      f"  (q={kp.q})")

kf = kfd_fit(sources, "2*median", 0.96)
print(f"kernel Fisher    {nn_acc(baseline_train_features(kf), kfd_transform(kf, target)):.3f}"
      f"  (q={kf.q})")

model = fit(sources, "median", HyperParams(alpha=1, beta=0.5, gamma=1))
acc = nn_acc(transform_train(model).rows, transform_target(model, target).rows)
print(f"multidomain      {acc:.3f}  (q={model.q}, eigenvalues {np.round(model.eigenvalues, 4)})")
print("measures at the solution:", {k: round(v, 4) for k, v in model.measures.items()})
