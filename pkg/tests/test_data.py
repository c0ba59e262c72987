import logging

import numpy as np
import pytest

from driftstream.data import (
    BlobSpec,
    DataError,
    gen_blobs,
    impute,
    impute_matrix,
    load_csv,
    order_by_label,
    random_blob_spec,
    save_csv,
    to_matrix,
    toy_dataset,
)
from driftstream.model import Sample


def test_blobs_deterministic_per_seed():
    spec = random_blob_spec(3, 4, 90, seed=11)
    a, b = gen_blobs(spec), gen_blobs(spec)
    assert np.array_equal(to_matrix(a), to_matrix(b))
    assert [s.label for s in a] == [s.label for s in b]
    c = gen_blobs(random_blob_spec(3, 4, 90, seed=12))
    assert not np.array_equal(to_matrix(a), to_matrix(c))


def test_zero_std_reproduces_centers():
    out = gen_blobs(BlobSpec([[1, 2], [3, 4]], [0, 0], [2, 3], shuffle=False))
    assert to_matrix(out).tolist() == [[1, 2]] * 2 + [[3, 4]] * 3
    assert [s.timestamp for s in out] == [0, 1, 2, 3, 4]


def test_blob_means_close_to_centers():
    spec = BlobSpec([[0, 0], [10, -5]], [1.0, 2.0], [400, 400], seed=3)
    out = gen_blobs(spec)
    X, y = to_matrix(out), np.array([s.label for s in out])
    for i, std in enumerate(spec.stds):
        assert np.all(np.abs(X[y == i].mean(axis=0) - spec.centers[i]) < 4 * std / np.sqrt(400))


def test_blob_spec_validation():
    with pytest.raises(ValueError):
        BlobSpec([[0, 0]], [1, 1], [5])
    with pytest.raises(ValueError):
        BlobSpec([[0, 0]], [-1], [5])
    with pytest.raises(ValueError):
        random_blob_spec(5, 2, 3)


def test_order_by_label_stable():
    s = [Sample([float(i)], i, lab) for i, lab in enumerate([1, 0, 1, 0])]
    out = order_by_label(s)
    assert [x.label for x in out] == [0, 0, 1, 1]
    assert [x.features[0] for x in out] == [1, 3, 0, 2]
    assert [x.timestamp for x in out] == [0, 1, 2, 3]


def test_toy_layout():
    toy = toy_dataset(seed=0)
    X = to_matrix(toy)
    assert len(toy) == 999
    assert X.min() == 0.0 and X.max() == 1.0
    labels = [s.label for s in toy]
    assert labels == sorted(labels) and set(labels) == {0, 1, 2}
    y = np.array(labels)
    spread = [X[y == i].std(axis=0).mean() for i in range(3)]
    assert spread[2] > 2 * max(spread[:2])


def test_csv_round_trip(tmp_path):
    spec = random_blob_spec(2, 3, 20, seed=4)
    samples = gen_blobs(spec)
    path = tmp_path / "d.csv"
    assert save_csv(samples, path) == 20
    back = load_csv(path)
    assert np.array_equal(to_matrix(back), to_matrix(samples))
    assert [s.label for s in back] == [s.label for s in samples]
    assert path.read_text().splitlines()[0] == "x0,x1,x2,label"


def test_csv_missing_cells_and_timestamps(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("a,b,when,label\n1,,5,x\n2,3,7,y\n")
    out = load_csv(p, timestamp_column="when")
    assert np.isnan(out[0].features[1])
    assert [s.timestamp for s in out] == [5, 7]
    assert [s.label for s in out] == ["x", "y"]


@pytest.mark.parametrize("body, fragment", [
    ("a,label\n1,0\n2\n", ":3:"),
    ("a,label\nfoo,0\n", "non-numeric"),
    ("a,b\n1,2\n", "label column"),
    ("a,label\ninf,0\n", "non-finite"),
    ("", "empty"),
])
def test_csv_errors(tmp_path, body, fragment):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(DataError, match=fragment):
        load_csv(p)


def test_csv_bad_timestamp(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("a,t,label\n1,x,0\n")
    with pytest.raises(DataError, match="timestamp"):
        load_csv(p, timestamp_column="t")


def test_impute_without_missing_is_identity():
    X = np.arange(12, dtype=float).reshape(4, 3)
    assert np.array_equal(impute_matrix(X), X)


def test_impute_recovers_linear_relation():
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 10, 50)
    X = np.column_stack([x, 2 * x])
    X[[3, 17, 30], 1] = np.nan
    out = impute_matrix(X)
    assert np.allclose(out[[3, 17, 30], 1], 2 * x[[3, 17, 30]], atol=1e-6)


def test_impute_leaves_observed_cells():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(30, 4))
    X[rng.uniform(size=X.shape) < 0.2] = np.nan
    mask = ~np.isnan(X)
    out = impute_matrix(X)
    assert np.array_equal(out[mask], X[mask])
    assert not np.isnan(out).any()


def test_impute_all_missing_column(caplog):
    X = np.array([[1.0, np.nan], [2.0, np.nan]])
    with caplog.at_level(logging.WARNING):
        out = impute_matrix(X)
    assert out[:, 1].tolist() == [0.0, 0.0]
    assert "entirely missing" in caplog.text


def test_impute_rejects_inf():
    with pytest.raises(DataError):
        impute_matrix(np.array([[np.inf, 1.0]]))


def test_impute_samples_keeps_metadata():
    s = [Sample([1.0, np.nan], 3, "a"), Sample([2.0, 4.0], 9, "b"), Sample([3.0, 6.0], 12, "c")]
    out = impute(s)
    assert [(x.timestamp, x.label) for x in out] == [(3, "a"), (9, "b"), (12, "c")]
    assert not np.isnan(to_matrix(out)).any()
