import math

import pytest
from fastapi.testclient import TestClient
from scipy import stats

from app.main import app

client = TestClient(app)


def test_health():
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "healthy"}


def test_cone_conditions():
    response = client.get("/api/conditions/cone", params={"alpha": 2, "s": 4})
    assert response.status_code == 200
    assert response.json() == {"pos_prob": True, "almost_sure": False, "thresholds": [3.0, 5.0]}


def test_cone_conditions_reject_alpha_at_most_one():
    assert client.get("/api/conditions/cone", params={"alpha": 1, "s": 4}).status_code == 422


def test_alpha_near_1():
    response = client.get("/api/conditions/alpha-near-1",
                          params={"alpha": 1.2, "rho_upper": 1, "kappa_upper": 1, "lam": math.pi})
    body = response.json()
    assert body["satisfied"] is True
    assert body["threshold"] == pytest.approx(1.0 + 1.0 / math.pi, abs=1e-12)


def test_cylinder_distance_and_tube_bounds():
    distance = client.get("/api/metric/cylinder-distance", params={"q": 2, "alpha": 2}).json()
    assert distance["distance"] == pytest.approx(0.5)
    bounds = client.get("/api/metric/tube-bounds", params={"q": 2, "alpha": 2, "s": 2}).json()
    assert bounds["upper"] == pytest.approx(1.5)
    assert bounds["ball_lower"] == pytest.approx(0.75)
    assert bounds["global_lower"] == pytest.approx(0.7)


def test_urn_law():
    body = client.get("/api/urn/law", params={"steps": 12, "alpha": 0}).json()
    assert body["steps"] == 12
    assert body["law"] == pytest.approx(stats.binom.pmf(range(13), 12, 0.5).tolist(), abs=1e-12)


def test_d_length():
    response = client.post("/api/metric/d-length", json={
        "weight": {"alpha": 1.0},
        "vertices": [[1.0, 0.0], [2.0, 0.0]],
    })
    assert response.status_code == 200
    body = response.json()
    assert body["length"] == pytest.approx(math.log(2.0), rel=1e-9)
    assert body["mu_length"] == pytest.approx(1.0)


def test_d_length_validation_error():
    response = client.post("/api/metric/d-length", json={"weight": {"alpha": 1.0}, "extra": 1})
    assert response.status_code == 422
    assert isinstance(response.json()["detail"], list)


def test_simulator_errors_keep_their_category():
    response = client.post("/api/metric/d-length", json={
        "weight": {"alpha": 1.5},
        "vertices": [[-1.0, 0.0], [1.0, 0.0]],
    })
    assert response.status_code == 422
    assert response.json()["detail"]["category"] == "runtime.singularity"


def test_shape_constants():
    response = client.post("/api/metric/shape-constants", json={"mu": {"kind": "l1"}, "direction_count": 256})
    body = response.json()
    assert body["rho_upper"] == pytest.approx(1.0, abs=1e-6)
    assert body["rho_lower"] == pytest.approx(math.sqrt(0.5), abs=1e-6)
