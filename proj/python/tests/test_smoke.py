import json

import numpy as np
import pytest

import ngrc


@pytest.fixture(scope="module")
def torus():
    return ngrc.integrate([1.0, -1.0, 1.0, -1.0], 300.0)


@pytest.fixture(scope="module")
def model(torus):
    return ngrc.train(torus)


def test_vector_field_and_symmetry():
    s = np.array([0.3, -1.2, 2.0, 0.7])
    f = ngrc.vector_field(s)
    x, y, z, u = s
    np.testing.assert_allclose(f, [-x + y, -x * z + u, x * y - 6.0, -0.1 * y])
    mirror = np.array([-1.0, -1.0, 1.0, -1.0])
    np.testing.assert_allclose(ngrc.vector_field(ngrc.symmetry_map(s)), mirror * f)


def test_trajectory_shape(torus):
    assert len(torus) == 6001
    assert torus.samples.shape == (6001, 4)
    assert torus.dt == pytest.approx(0.05)
    np.testing.assert_allclose(torus.times[:3], [0.0, 0.05, 0.1])


def test_model_size_and_fit(model, torus):
    assert ngrc.feature_dim(4, 2) == 45
    assert model.weight_count == 180
    assert model.w_out.shape == (4, 45)
    assert ngrc.training_nrmse(model, torus) < 1e-4


def test_forecast_tracks_truth(model, torus):
    warmup = torus.samples[-2:]
    pred = ngrc.forecast(model, warmup, 200, torus.times[-1])
    truth = ngrc.integrate(torus.samples[-1], 200 * 0.05)
    truth = truth.slice(1, 200)
    assert len(pred) == 200
    assert ngrc.nrmse(pred, truth) < 0.05
    assert ngrc.valid_time(pred, truth) > 0.0


def test_model_round_trip(model, tmp_path):
    path = tmp_path / "model.json"
    ngrc.save_model(path, model)
    again = ngrc.load_model(path)
    np.testing.assert_array_equal(again.w_out, model.w_out)
    assert again.hash() == model.hash()
    assert json.loads(model.to_json())["k"] == 2


def test_classify_and_basin():
    assert ngrc.classify(-3.0) == "chaos_neg"
    assert ngrc.classify(0.0) == "torus"
    assert ngrc.classify(3.0) == "chaos_pos"
    grid, diverged = ngrc.compute_basin("oracle", resolution=(4, 3), horizon=20.0)
    assert grid.shape == (4, 3)
    assert diverged == 0
    assert ngrc.agreement(grid, grid)["overall"] == 1.0


def test_errors():
    with pytest.raises(ngrc.ConfigError):
        ngrc.compute_basin("nope", resolution=(2, 2))
    with pytest.raises(ValueError):
        ngrc.compute_basin("ngrc_oracle_warmup", resolution=(2, 2))
    with pytest.raises(ngrc.NgrcError):
        ngrc.load_model("/nonexistent/model.json")


def test_bad_model_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"version": 1}')
    with pytest.raises(ngrc.FormatError):
        ngrc.load_model(path)


def test_cli_exit_codes(tmp_path):
    assert ngrc.run_cli(["simulate", "--ic", "torus", "--t_span", "1",
                         "--out", str(tmp_path / "t.csv")]) == 0
    assert ngrc.read_trajectory_csv(tmp_path / "t.csv").samples.shape == (21, 4)
    assert ngrc.run_cli(["simulate", "--dt", "-1"]) == 2
