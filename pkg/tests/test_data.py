import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mda.data import (CsvFormatError, DomainSpec, Instance, MultiDomainDataset, apply_prior,
                      concat, generate_synthetic, largest_remainder, load_csv, table2_preset,
                      write_csv)


def small():
    X = np.arange(12.0).reshape(6, 2)
    return MultiDomainDataset(X, [0, 1, 0, 1, 0, 1], [0, 0, 1, 1, 1, 1], ("a", "b"), ("d1", "d2"))


def test_counts_and_shape():
    ds = small()
    assert (ds.n, ds.d, ds.m, ds.c) == (6, 2, 2, 2)
    np.testing.assert_array_equal(ds.counts, [[1, 1], [2, 2]])
    assert ds.empty_cells == []


def test_arrays_are_read_only():
    ds = small()
    with pytest.raises(ValueError):
        ds.X[0, 0] = 5.0


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        MultiDomainDataset(np.zeros((2, 2)), [0], [0, 0])
    with pytest.raises(ValueError):
        MultiDomainDataset(np.array([[np.nan]]), [0], [0])
    with pytest.raises(ValueError):
        MultiDomainDataset(np.zeros((1, 1)), [2], [0], ("a", "b"), ("d",))


def test_empty_cell_reported():
    ds = MultiDomainDataset(np.zeros((3, 1)), [0, 1, 0], [0, 0, 1])
    assert ds.empty_cells == [(1, 1)]


def test_from_instances_and_iteration():
    ds = small()
    again = MultiDomainDataset.from_instances(list(ds), label_names=ds.label_names,
                                              domain_names=ds.domain_names)
    assert again.digest() == ds.digest()
    assert isinstance(next(iter(ds)), Instance)


def test_select_domains_reindexes():
    sel = small().select_domains([1])
    assert sel.domain_names == ("d2",)
    assert set(sel.domains.tolist()) == {0}
    assert sel.n == 4


def test_concat_merges_names():
    a = MultiDomainDataset(np.zeros((2, 1)), [0, 1], [0, 0], ("x", "y"), ("p",))
    b = MultiDomainDataset(np.ones((2, 1)), [0, 1], [0, 0], ("y", "z"), ("q",))
    c = concat([a, b])
    assert c.label_names == ("x", "y", "z")
    assert c.labels.tolist() == [0, 1, 1, 2]
    assert c.domains.tolist() == [0, 0, 1, 1]


def test_csv_round_trip(tmp_path):
    ds = generate_synthetic(table2_preset(), 1)
    path = tmp_path / "d.csv"
    write_csv(ds, path)
    back = load_csv(path)
    assert back.digest() == ds.digest()


@pytest.mark.parametrize("body,match", [
    ("domain,label,f0\n", "empty dataset"),
    ("domain,label,f0\nd,a,1\nd,b,x\n", "row 3, column f0"),
    ("domain,label,f0\nd,a,nan\n", "row 2, column f0"),
    ("domain,label,f0\nd,a,1,2\n", "row 2 has 4 columns"),
    ("label,f0\na,1\n", "missing column 'domain'"),
])
def test_csv_errors(tmp_path, body, match):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(CsvFormatError, match=match):
        load_csv(path)


def test_csv_unknown_fixed_label(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("domain,label,f0\nd,zz,1\n")
    with pytest.raises(CsvFormatError, match="unknown label 'zz'"):
        load_csv(path, label_names=("a",))


def test_csv_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_csv(tmp_path / "nope.csv")


def test_table2_preset():
    specs = table2_preset()
    assert [sp.name for sp in specs] == ["domain1", "domain2", "domain3"]
    assert specs[0].means == ((1.0, 2.0), (2.0, 1.0), (3.0, 2.0))
    assert specs[1].means[2][0] == 5.5
    assert [m[0] for m in specs[2].means] == [8.0, 9.5, 10.0]
    assert [m[1] for m in specs[2].means] == [2.5, 1.5, 2.5]
    assert all(sp.counts == (50, 50, 50) for sp in specs)
    assert all(v == 0.3 for sp in specs for row in sp.stds for v in row)


def test_class_mean_within_three_standard_errors():
    spec = table2_preset()[:1]
    hits = 0
    for seed in range(100):
        ds = generate_synthetic(spec, seed)
        mean = ds.X[(ds.labels == 0), 0].mean()
        hits += abs(mean - 1.0) <= 0.3 * 3 / np.sqrt(50)
    assert hits >= 99


def test_domain_spec_validation():
    with pytest.raises(ValueError, match="strictly positive"):
        DomainSpec([[0.0]], [[0.0]], [1])
    sp = DomainSpec([[1.0, 2.0]], [[0.5, 0.5]], [3], "x")
    assert DomainSpec.from_dict(sp.to_dict()) == sp


def test_generate_deterministic_and_ordered():
    a = generate_synthetic(table2_preset(), 42)
    b = generate_synthetic(table2_preset(), 42)
    c = generate_synthetic(table2_preset(), 43)
    assert a.digest() == b.digest() != c.digest()
    assert a.n == 450
    assert a.domains.tolist() == sorted(a.domains.tolist())


def test_generated_moments_follow_spec():
    sp = DomainSpec([[5.0, -1.0]], [[2.0, 0.5]], [20000])
    ds = generate_synthetic([sp, sp], 0)
    np.testing.assert_allclose(ds.X.mean(axis=0), [5.0, -1.0], atol=0.05)
    np.testing.assert_allclose(ds.X.std(axis=0), [2.0, 0.5], rtol=0.02)


def test_apply_prior():
    sp = apply_prior(table2_preset()[0], (0.6, 0.3, 0.1), 150)
    assert sp.counts == (90, 45, 15)
    with pytest.raises(ValueError, match="empty class"):
        apply_prior(table2_preset()[0], (0.999, 0.001, 0.0), 150)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=6), st.integers(0, 500))
def test_largest_remainder_sums_to_total(weights, total):
    prior = np.array(weights) / sum(weights)
    counts = largest_remainder(prior, total)
    assert counts.sum() == total
    assert np.all(np.abs(counts - prior * total) < 1.0)
