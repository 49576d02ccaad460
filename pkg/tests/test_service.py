import pytest
from fastapi.testclient import TestClient

from riskdual.bundled import T1_CONFIG, VANISHING_GAP_CONFIG
from riskdual.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


class TestHealth:
    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}


class TestSolve:
    def test_t1(self, client):
        response = client.post("/solve", json={"config": T1_CONFIG})
        assert response.status_code == 200
        data = response.json()
        assert data["dstar"] == pytest.approx(0.25, abs=1e-3)
        assert data["phat"] == pytest.approx(0.5, abs=1e-12)
        assert data["slater"]["flag"] == "ok"
        assert data["slater"]["witness"] == [0, 0]
        assert data["trajectory"] is None

    def test_trajectory_included_on_request(self, client):
        response = client.post(
            "/solve", json={"config": T1_CONFIG, "iters": 20, "include_trajectory": True}
        )
        data = response.json()
        assert len(data["trajectory"]) == 20
        assert data["trajectory"][0]["lam"] == [0.0]

    def test_config_error_is_422_with_position(self, client):
        bad = T1_CONFIG.replace("c = 0.25", "c = oops")
        response = client.post("/solve", json={"config": bad})
        assert response.status_code == 422
        detail = response.json()["detail"]
        assert "oops" in detail["message"]
        assert detail["line"] is not None

    def test_solver_overrides(self, client):
        response = client.post("/solve", json={"config": T1_CONFIG, "iters": 5})
        assert response.json()["iterations"] == 5


class TestOracle:
    def test_t1(self, client):
        response = client.post("/oracle", json={"config": T1_CONFIG})
        assert response.status_code == 200
        data = response.json()
        assert data["pstar"] == pytest.approx(0.5, abs=1e-12)
        assert data["argmin"] == [0, 0]
        assert data["mixed"] == pytest.approx(0.25, abs=1e-9)
        assert data["dstar_grid"] == pytest.approx(0.25, abs=1e-3)
        assert data["rel_gap"] == pytest.approx(0.5, abs=1e-2)


class TestSweep:
    def test_small_sweep(self, client):
        response = client.post(
            "/sweep", json={"config": VANISHING_GAP_CONFIG, "levels": [2, 4]}
        )
        assert response.status_code == 200
        rows = response.json()["rows"]
        assert [row["n"] for row in rows] == [2, 4]
        assert rows[0]["rel_gap"] == pytest.approx(0.5, abs=1e-9)
        assert rows[0]["pstar_source"] == "brute"

    def test_sweep_without_levels_uses_config(self, client):
        response = client.post(
            "/sweep", json={"config": VANISHING_GAP_CONFIG, "levels": [2], "dual_only": True}
        )
        rows = response.json()["rows"]
        assert rows[0]["pstar"] is None
        assert rows[0]["dstar"] == pytest.approx(0.25, abs=1e-9)


class TestAxioms:
    def test_axioms(self, client):
        response = client.post(
            "/axioms", json={"specs": ["cvar:0.3", "gmsd:square-relu:1:1"], "trials": 50}
        )
        assert response.status_code == 200
        rows = response.json()["rows"]
        assert rows[0]["coherent"] is True
        assert rows[0]["convexity"] <= 1e-9
        assert rows[1]["coherent"] is False
        assert rows[1]["monotonicity"] is None


class TestLossParse:
    def test_ok_with_value(self, client):
        response = client.post(
            "/loss/parse", json={"expr": "abs(z1 - y)", "action": [2.0], "y": 0.5}
        )
        data = response.json()
        assert data["ok"] is True
        assert data["value"] == pytest.approx(1.5)

    def test_error_positions(self, client):
        response = client.post("/loss/parse", json={"expr": "relu(z1"})
        data = response.json()
        assert data["ok"] is False
        assert data["line"] == 1
        assert data["col"] is not None
