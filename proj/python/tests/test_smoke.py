import math

import numpy as np
import pytest

import adrl


def small_dataset(seed=3):
    raw = adrl.generate_synthetic(n=80, c=4, shared_dim=3, private_dim=3, seed=seed)
    return adrl.apply_missingness(adrl.split_dataset(raw, (7, 1, 2), seed), 0.5, 0.5, seed)


def test_synthetic_shapes_and_determinism():
    a = adrl.generate_synthetic(n=50, seed=1)
    b = adrl.generate_synthetic(n=50, seed=1)
    assert a.num_samples == 50 and a.num_views == 2 and a.num_labels == 6
    assert a.labels.shape == (50, 6)
    for x, y in zip(a.views, b.views):
        np.testing.assert_array_equal(x, y)


def test_missingness_keeps_one_view():
    raw = adrl.generate_synthetic(n=1000, seed=2)
    ds = adrl.apply_missingness(raw, 0.9, 0.5, 7)
    assert (ds.view_mask.sum(axis=1) >= 1).all()
    with pytest.raises(ValueError, match="fmr must be < 1"):
        adrl.apply_missingness(raw, 1.0, 0.0)


def test_split_counts():
    ds = adrl.split_dataset(adrl.generate_synthetic(n=100, seed=0), (7, 1, 2), 4)
    assert [ds.split.count(k) for k in (0, 1, 2)] == [70, 10, 20]


def test_imputation_keeps_available_rows():
    ds = small_dataset()
    done = adrl.complete_views(ds, k=4)
    for v, (x, z) in enumerate(zip(ds.views, done)):
        have = ds.view_mask[:, v] == 1
        np.testing.assert_array_equal(x[have], z[have])
        assert np.isfinite(z).all()


def test_metrics_worked_example():
    m = adrl.evaluate(np.array([[0.9, 0.2, 0.7]]), np.array([[1.0, 0.0, 1.0]]))
    assert m["ap"] == 1.0
    assert m["one_minus_rl"] == 1.0
    assert m["one_minus_oe"] == 1.0
    assert math.isclose(m["one_minus_cov"], 2 / 3)
    assert adrl.format_mean_std(0.4382, 0.0061) == "0.438(0.006)"


def test_train_small():
    out = adrl.train(small_dataset(), {"epochs": 3, "d": 6, "hidden": 10, "heads": 2, "k": 4, "seed": 1})
    assert out["epochs_run"] == 3
    assert len(out["epochs"]) == 3
    assert 0.0 <= out["test"]["ap"] <= 1.0
    with pytest.raises(ValueError):
        adrl.train(small_dataset(), {"nonsense": 1})


def test_gradcheck():
    for variant in ("full", "no_S1", "no_S2", "no_S3"):
        rep = adrl.gradcheck(variant=variant)
        assert rep["passed"], rep
        assert rep["max_rel_error"] < 1e-4


def test_dataset_roundtrip(tmp_path):
    ds = small_dataset()
    ds.save(tmp_path / "ds")
    back = adrl.Dataset.load(tmp_path / "ds")
    np.testing.assert_array_equal(back.view_mask, ds.view_mask)
    assert back.split == ds.split
