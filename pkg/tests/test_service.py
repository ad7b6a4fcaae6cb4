import pytest
from fastapi.testclient import TestClient

from main import app
from tests.conftest import K4_TEXT, P2_TEXT

client = TestClient(app)


def test_maxcut_endpoint():
    response = client.post("/maxcut", json={"graph": {"text": K4_TEXT}})
    assert response.status_code == 200
    body = response.json()
    assert body["kind"] == "maxcut"
    assert body["size"] == 4


def test_partition_endpoint():
    payload = {"graph": {"text": P2_TEXT}, "couplings": {"t": 2, "beta": 0.5, "gamma": 0.1}, "method": "brute"}
    brute = client.post("/partition", json=payload).json()
    mag = client.post("/partition", json={**payload, "method": "mag"}).json()
    assert brute["logZ"] == pytest.approx(mag["logZ"], rel=1e-12)


def test_partition_orthant_needs_signs():
    payload = {"graph": {"text": P2_TEXT}, "couplings": {"t": 2, "beta": 0.5}, "method": "orthant"}
    assert client.post("/partition", json=payload).status_code == 422


def test_spectrum_endpoint():
    payload = {"graph": {"text": K4_TEXT}, "couplings": {"t": 2, "beta": 0.1, "gamma": 0.05}}
    body = client.post("/spectrum", json=payload).json()
    assert body["lambda_min"] == pytest.approx(-0.2)
    assert body["diameter"] == pytest.approx(0.4)
    assert body["paper_bound"] is None


def test_spectrum_endpoint_with_delta():
    payload = {"graph": {"text": K4_TEXT}, "couplings": {"t": 16, "beta": 0.1}, "delta": 0.05}
    body = client.post("/spectrum", json=payload).json()
    assert body["paper_bound"] == pytest.approx(1 + 8 * 16**-0.4)
    assert client.post("/spectrum", json={**payload, "delta": -0.1}).status_code == 422


def test_reduce_and_decide_endpoints():
    payload = {"graph": {"text": K4_TEXT}, "tau": 1.1, "A": 4, "overrides": {"t": 8, "bhat": 2.0, "uhat": 3.0}}
    response = client.post("/reduce", json=payload)
    assert response.status_code == 200
    cert = response.json()
    assert cert["kind"] == "certificate"

    low = cert["log_t1"] + cert["log_k_shift"] - 100.0
    decision = client.post("/decide", json={"certificate": cert, "log_z_hat": low, "ln_r": 0.0}).json()
    assert decision["decision"] == "ALL_CUTS_BELOW_A_OVER_TAU"
    assert decision["both_thresholds_met"] is False


def test_bad_graph_is_rejected():
    response = client.post("/maxcut", json={"graph": {"text": "3 1\n0 5\n"}})
    assert response.status_code == 422
    reversed_edge = client.post("/maxcut", json={"graph": {"text": "3 1\n2 0\n"}})
    assert reversed_edge.status_code == 422


def test_domain_error_is_rejected():
    payload = {"graph": {"text": K4_TEXT}, "tau": 1.1, "A": 1, "overrides": {"t": 8, "bhat": 2.0, "uhat": 3.0}}
    assert client.post("/reduce", json=payload).status_code == 422


def test_malformed_certificate_is_rejected():
    response = client.post("/decide", json={"certificate": {"mode": "lab"}, "log_z_hat": 1.0})
    assert response.status_code == 422
