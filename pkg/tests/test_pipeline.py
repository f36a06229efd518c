import numpy as np
import pytest

from mda.data import MultiDomainDataset, generate_synthetic, table2_preset
from mda.eigsolver import HyperParams
from mda.pipeline import FitError, fit, resolve_bandwidth, transform_target, transform_train
from mda import kernel


@pytest.fixture(scope="module")
def sources():
    return generate_synthetic(table2_preset()[:2], 5)


@pytest.fixture(scope="module")
def model(sources):
    return fit(sources, "median", HyperParams(components=2))


def test_fit_shapes(model, sources):
    assert model.B.shape == (sources.n, 2)
    assert model.q == 2
    assert np.all(model.eigenvalues > 0)
    assert model.sigma == kernel.median_heuristic(sources)


def test_class_count_limits_components(sources):
    # the numerator has rank at most c - 1
    m = fit(sources, "median", HyperParams(components=10))
    assert m.q <= sources.c - 1


def test_target_transform_of_training_set(model, sources):
    np.testing.assert_allclose(transform_target(model, sources).rows,
                               transform_train(model).rows, atol=1e-10)
    np.testing.assert_allclose(transform_target(model, sources.X).rows,
                               transform_train(model).rows, atol=1e-10)


def test_projection_is_d_normalized(model, sources):
    from mda.eigsolver import assemble
    from mda.pipeline import prepare
    prep = prepare(sources, model.sigma)
    _, D = assemble(prep.scatter, prep.K_centered, model.hyperparams)
    np.testing.assert_allclose(model.B.T @ D @ model.B, np.eye(model.q), atol=1e-8)


def test_measures_reported(model):
    assert set(model.measures) == {"domain_discrepancy", "class_discrepancy",
                                   "between_scatter", "within_scatter"}
    assert all(v >= 0 for v in model.measures.values())


def test_resolve_bandwidth(sources):
    dm = kernel.median_heuristic(sources)
    assert resolve_bandwidth("median", sources) == dm
    assert resolve_bandwidth("2*median", sources) == pytest.approx(2 * dm)
    assert resolve_bandwidth(0.7, sources) == 0.7
    with pytest.raises(ValueError):
        resolve_bandwidth("twice", sources)
    with pytest.raises(ValueError):
        resolve_bandwidth(-1.0, sources)


def test_fit_needs_two_domains_and_classes():
    one = generate_synthetic(table2_preset()[:1], 0)
    with pytest.raises(FitError, match="two source domains"):
        fit(one)
    X = np.random.default_rng(0).normal(size=(6, 2))
    with pytest.raises(FitError, match="two classes"):
        fit(MultiDomainDataset(X, [0] * 6, [0, 0, 0, 1, 1, 1]))


def test_fit_without_train_scaling(sources):
    m = fit(sources, "median", HyperParams(components=2), scale_train=False)
    np.testing.assert_allclose(transform_train(m).rows, m.K_centered.values @ m.B)


def test_center_before_scatter_changes_solution(sources, model):
    m = fit(sources, "median", HyperParams(components=2), center_before_scatter=True)
    assert m.center_before_scatter
    assert not np.allclose(m.eigenvalues, model.eigenvalues)
