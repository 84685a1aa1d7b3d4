"""HTTP surface: schemas, endpoints, refusal semantics."""

import pytest
from fastapi.testclient import TestClient

from nscert.service.app import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app, raise_server_exceptions=False)


def scenario_doc(**overrides):
    doc = {
        "d": 3, "n": 2.0, "p": 4.0, "mode": "exponential", "horizon": "infinity",
        "datum": {"norm_n": 0.20, "norm_p": 2.00, "seed": 0},
        "forcing": {"kind": "none"},
    }
    doc.update(overrides)
    return doc


def test_health(client):
    assert client.get("/health").json() == {"status": "ok"}


def test_constants_endpoint_reduced(client):
    r = client.post("/constants", json={"d": 3, "n_list": [2.0], "reduced": True})
    assert r.status_code == 200
    body = r.json()
    assert body["rows"][0]["K"] == pytest.approx(0.20)
    assert body["csv"].startswith("n d lattice K_n")
    assert "evidence" in body["rows"][0]["evidence_note"]


def test_constants_endpoint_validates(client):
    r = client.post("/constants", json={"d": 3, "n_list": [1.0]})
    assert r.status_code == 422
    assert "n > d/2" in r.json()["detail"]


def test_certify_endpoint(client):
    r = client.post("/certify", json={"scenario": scenario_doc()})
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "certified"
    assert "galerkin error certificate" in body["report"]
    g = body["details"]["galerkin_certificate"]
    assert g["min_resolution_reported"] == pytest.approx(2.00)
    assert g["rough_coefficient_reported"] == pytest.approx(6.10)


def test_certify_refusal_reports_diagnostics(client):
    doc = scenario_doc(datum={"norm_n": 1.5, "norm_p": 4.0, "seed": 0})
    r = client.post("/certify", json={"scenario": doc})
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "refused"
    assert body["details"]["refusals"]
    assert "grid_fallback" in body["details"]
    assert any("lhs" in ref for ref in body["details"]["refusals"])


def test_certify_rejects_malformed_scenario(client):
    doc = scenario_doc(mode="sideways")
    r = client.post("/certify", json={"scenario": doc})
    assert r.status_code == 422
    assert "mode" in r.json()["detail"]


def test_certify_rejects_unsanctioned_constants(client):
    doc = scenario_doc(constants={"K_n": 0.1, "K_p": 0.05})
    r = client.post("/certify", json={"scenario": doc})
    assert r.status_code == 422
    assert "allow_custom_constants" in r.json()["detail"]
    doc["allow_custom_constants"] = True
    r2 = client.post("/certify", json={"scenario": doc})
    assert r2.status_code == 200
    assert any(c.get("source") == "user override" for c in r2.json()["details"]["constants"])


def test_run_endpoint_small(client):
    req = {
        "scenario": scenario_doc(datum={"norm_n": 0.20, "norm_p": 0.70, "seed": 5}),
        "g_radius": 1,
        "ref_radius": 2,
        "horizon": 0.5,
        "n_samples": 5,
        "rtol": 1e-6,
    }
    r = client.post("/run", json=req)
    assert r.status_code == 200
    det = r.json()["details"]
    assert det["containment_margin_triangle"] > 0
    assert det["trajectory_csv"].splitlines()[0] == "t,norm_0,norm_n,norm_p,div_defect"


def test_run_refused_without_force(client):
    req = {
        "scenario": scenario_doc(datum={"norm_n": 1.5, "norm_p": 5.0, "seed": 0}),
        "g_radius": 1,
        "horizon": 0.2,
    }
    r = client.post("/run", json=req)
    assert r.status_code == 200
    assert r.json()["status"] == "refused"
    req["force"] = True
    req["n_samples"] = 3
    r2 = client.post("/run", json=req)
    assert r2.status_code == 200
    assert r2.json()["status"] == "ok"


def test_run_zero_datum_all_curves_zero(client):
    req = {
        "scenario": scenario_doc(datum={"norm_n": 0.0, "norm_p": 0.0, "seed": 0}),
        "g_radius": 1,
        "horizon": 0.3,
        "n_samples": 3,
    }
    r = client.post("/run", json=req)
    assert r.status_code == 200
    det = r.json()["details"]
    for row in det["trajectory_csv"].splitlines()[1:]:
        cols = [float(x) for x in row.split(",")]
        assert cols[1] == cols[2] == cols[3] == 0.0


def test_infinity_sanitised_in_json(client):
    r = client.post("/certify", json={"scenario": scenario_doc()})
    det = r.json()["details"]
    assert det["horizon"] == "infinity"
