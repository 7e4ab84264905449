import math

import numpy as np
import pytest

import wingbench as wb


@pytest.fixture(scope="module")
def data():
    return wb.generate_dataset(mtow_tons=238, n=300, seed=11)


def test_generator_shapes(data):
    X = np.asarray(data.features)
    Y = np.asarray(data.outputs)
    assert X.shape == (300, 25)
    assert Y.shape == (300, 29)
    assert len(wb.feature_names()) == 25
    assert data.mtow_tons == 238
    # free tip: the outermost station carries no moment
    assert np.all(Y[:, -1] == 0.0)


def test_generator_deterministic(data):
    again = wb.generate_dataset(mtow_tons=238, n=300, seed=11)
    assert np.array_equal(np.asarray(data.outputs), np.asarray(again.outputs))
    assert np.array_equal(np.asarray(data.features), np.asarray(again.features))


def test_beam_closed_form():
    L = 30.0
    x = np.asarray(wb.cosine_stations(L))
    assert x.shape == (29,)
    V, M = wb.shear_and_moment(np.full(29, 500.0), x)
    M_ref = 500.0 * (L - x) ** 2 / 2.0
    assert np.allclose(np.asarray(M), M_ref, rtol=0, atol=1e-9 * M_ref[0])


def test_codec_round_trip(data):
    Y = np.asarray(data.outputs)
    codec = wb.fit_output_codec("poly_pca", data.outputs, data.stations)
    assert codec.encoded_dim() == 4
    Z = np.asarray(wb.codec_encode(codec, data.outputs))
    assert Z.shape == (300, 4)
    back = np.asarray(wb.codec_decode(codec, Z))
    assert back.shape == Y.shape
    r2 = np.asarray(wb.rowwise_r2(data.outputs, back))
    assert codec.train_recon.frac_ge_999 >= 0.95
    assert float(np.median(r2)) > 0.999


def test_fit_predict_and_metrics(data):
    spec = wb.AlgoSpec("rf", n_estimators=30, tree=wb.TreeParams(min_samples_leaf=2), rf_m=8)
    model = wb.multioutput_fit(data.features, data.outputs, spec, seed=5)
    pred = np.asarray(wb.multioutput_predict(model, data.features))
    assert pred.shape == np.asarray(data.outputs).shape

    per_station, mean_r2, excluded = wb.r2_per_station(data.outputs, pred)
    assert len(per_station) == 29
    assert mean_r2 > 0.8
    assert excluded == 0  # the all-zero tip column is predicted exactly

    imp = np.asarray(model.feature_importance)
    assert imp.shape == (25,)
    assert math.isclose(imp.sum(), 1.0, rel_tol=1e-9)


def test_error_metrics():
    y = np.array([4.0, -2.0, 7.0, 1.0])
    assert math.isclose(wb.error_rate(y, 1.1 * y), 0.1, rel_tol=1e-12)
    ecdf = wb.error_ecdf([0.05, 0.01, 0.20, 0.05])
    assert ecdf["g"][-1] == 1.0
    assert all(b >= a for a, b in zip(ecdf["g"], ecdf["g"][1:]))


def test_clustering(data):
    poly = wb.make_piecewise_poly(data.stations)
    matrix, mean, scale = wb.build_cluster_matrix(data, poly)
    assert np.asarray(matrix).shape == (300, 31)
    km = wb.kmeans_fit(matrix, k=2, seed=3)
    assert sorted(set(km.labels)) == [0, 1]
    hist = list(km.distortion_history)
    assert all(b <= a + 1e-9 for a, b in zip(hist, hist[1:]))
