"""HTTP service contract tests, run against the app in-process."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

import cdprep
from cdprep.adiabatic import EvolutionConfig, convergence_epsilon, evolve
from cdprep.fermion import adiabatic_split, map_hamiltonian
from cdprep.fixtures import fixture_dir, load_fixture, reference_energies
from cdprep.pauli import from_text, simplify, trace_inner_product
from cdprep.service import create_app
from cdprep.simulator import basis_state, ground_state


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


def test_health(client):
    body = client.get("/api/health").json()
    assert body == {"status": "ok", "version": cdprep.__version__}


def test_map_h2_jw_statistics(client):
    r = client.post(
        "/api/map", json={"fixture": "h2_0.7414", "mapping": "jw", "verify": True}
    )
    assert r.status_code == 200
    body = r.json()
    assert body["n_qubits"] == 4
    assert body["n_terms"] == 15
    assert body["max_weight"] == 4
    assert sum(body["weight_histogram"].values()) == 15
    assert body["isospectral"] is True
    assert body["spectral_deviation"] < 1e-9
    assert body["config"]["mapping"] == "jw"


def test_map_dump_reconstructs_the_operator(client):
    body = client.post("/api/map", json={"fixture": "h2_0.7414"}).json()
    rebuilt = from_text(body["dump"])
    direct = map_hamiltonian(load_fixture("h2_0.7414"), "bk")
    difference = simplify(rebuilt + (-1.0) * direct)
    assert abs(trace_inner_product(difference, difference)) < 1e-24


def test_map_inline_fcidump_matches_fixture(client):
    text = (fixture_dir() / "h2_0.7414.fcidump").read_text()
    by_name = client.post("/api/map", json={"fixture": "h2_0.7414"}).json()
    inline = client.post("/api/map", json={"fcidump": text}).json()
    assert inline["dump"] == by_name["dump"]
    assert inline["n_terms"] == by_name["n_terms"]


def test_map_molecule_validation(client):
    both = client.post(
        "/api/map", json={"fixture": "h2_0.7414", "fcidump": "x"}
    )
    assert both.status_code == 422
    assert "exactly one" in both.json()["detail"]
    neither = client.post("/api/map", json={})
    assert neither.status_code == 422
    unknown = client.post(
        "/api/map", json={"fixture": "h2_0.7414", "mapping": "parity"}
    )
    assert unknown.status_code == 422
    assert "mapping" in unknown.json()["detail"]
    missing = client.post("/api/map", json={"fixture": "not_a_molecule"})
    assert missing.status_code == 422
    assert "not_a_molecule" in missing.json()["detail"]


def test_ground_state_matches_direct_solver(client):
    body = client.post("/api/ground-state", json={"fixture": "h2_0.7414"}).json()
    split = adiabatic_split(load_fixture("h2_0.7414"), mapping="bk")
    oracle = ground_state(split.full(), guess_index=split.hf_index)
    assert body["energy"] == pytest.approx(oracle.energy, abs=1e-12)
    assert body["gap"] > 0.1
    refs = reference_energies()["h2_0.7414"]
    assert body["hf_energy"] == pytest.approx(refs["scf_energy"], abs=1e-8)
    assert body["energy"] == pytest.approx(refs["fci_energy"], abs=1e-8)


def test_evolve_matches_core_module(client):
    request = {
        "fixture": "h2_0.7414",
        "n_steps": 10,
        "step_size": 0.2,
        "cd_order": 1,
        "record_trajectory": True,
    }
    body = client.post("/api/evolve", json=request).json()
    split = adiabatic_split(load_fixture("h2_0.7414"), mapping="bk")
    cfg = EvolutionConfig(
        n_steps=10, step_size=0.2, cd_order=1, mapping="bk", record_trajectory=True
    )
    result = evolve(split, basis_state(split.hf_index, split.n_qubits), cfg)
    e0 = ground_state(split.full(), guess_index=split.hf_index).energy
    assert body["epsilon"] == convergence_epsilon(result.final, split.full(), e0)
    assert body["total_time"] == pytest.approx(2.0)
    assert body["final_norm"] == pytest.approx(1.0, abs=1e-10)
    assert len(body["trajectory"]) == 10
    assert np.allclose(body["trajectory"], result.energies)


def test_evolve_rejects_bad_config(client):
    r = client.post(
        "/api/evolve", json={"fixture": "h2_0.7414", "n_steps": 0}
    )
    assert r.status_code == 422
    r = client.post(
        "/api/evolve", json={"fixture": "h2_0.7414", "cd_order": -1}
    )
    assert r.status_code == 422
    r = client.post(
        "/api/evolve", json={"fixture": "h2_0.7414", "term_order": "random"}
    )
    assert r.status_code == 422


def test_sweep_single_cell_consistent_with_evolve(client):
    sweep_body = client.post(
        "/api/sweep",
        json={"fixture": "h2_0.7414", "dt_grid": [0.2], "n_grid": [10], "cd_order": 1},
    ).json()
    evolve_cd = client.post(
        "/api/evolve",
        json={"fixture": "h2_0.7414", "n_steps": 10, "step_size": 0.2, "cd_order": 1},
    ).json()
    evolve_bare = client.post(
        "/api/evolve",
        json={"fixture": "h2_0.7414", "n_steps": 10, "step_size": 0.2},
    ).json()
    (row,) = sweep_body["rows"]
    assert row["eps_cd"] == evolve_cd["epsilon"]
    assert row["eps_bare"] == evolve_bare["epsilon"]
    assert sweep_body["csv"].startswith("# schema=1\n")
    assert len(sweep_body["csv"].splitlines()) == 3


def test_vqe_aga_reaches_the_ground_state(client):
    body = client.post(
        "/api/vqe", json={"fixture": "h2_0.7414", "ansatz": "aga"}
    ).json()
    assert body["label"] == "AGA(1)"
    assert body["n_parameters"] == 2
    assert body["epsilon"] < 1e-6
    assert body["chemical_accuracy"] is True
    assert body["iterations"] <= 2000
    assert len(body["parameters"]) == 2


def test_vqe_uccsd_reports_table_counts(client):
    body = client.post(
        "/api/vqe", json={"fixture": "h2_0.7414", "ansatz": "uccsd", "mapping": "jw"}
    ).json()
    assert body["label"] == "UCCSD"
    assert body["n_parameters"] == 4
    assert body["n_pauli_terms"] == 14
    assert body["epsilon"] < 1e-6


def test_vqe_kupccgsd_parameter_count(client):
    body = client.post(
        "/api/vqe", json={"fixture": "h2_0.7414", "ansatz": "kupccgsd", "k": 3}
    ).json()
    assert body["label"] == "3-UpCCGSD"
    assert body["n_parameters"] == 18


def test_vqe_rejects_unknown_ansatz(client):
    r = client.post("/api/vqe", json={"fixture": "h2_0.7414", "ansatz": "hea"})
    assert r.status_code == 422
    assert "ansatz" in r.json()["detail"]


def test_adapt_grows_two_operators(client):
    body = client.post("/api/adapt", json={"fixture": "h2_0.7414"}).json()
    assert body["label"] == "ADAPT"
    assert body["n_parameters"] == 2
    assert len(body["selections"]) == 2
    assert body["selections"][0]["magnitude"] > 1e-3
    assert body["selections"][1]["norm"] < 1e-3
    assert body["epsilon"] < 1e-6


def test_scan_over_fixture_curve(client):
    body = client.post(
        "/api/scan",
        json={"fixtures": ["h2_0.5000", "h2_0.7414"], "ansatzes": ["aga"]},
    ).json()
    assert [r["bond_distance"] for r in body["rows"]] == [0.5, 0.7414]
    assert all(r["chemical_accuracy"] for r in body["rows"])
    assert all(r["error"] is None for r in body["rows"])
    lines = body["csv"].splitlines()
    assert lines[0] == "# schema=1"
    assert lines[1].startswith("bond_distance,ansatz,")
    assert len(lines) == 4


def test_scan_rejects_disordered_distances(client):
    r = client.post(
        "/api/scan",
        json={"fixtures": ["h2_0.7414", "h2_0.5000"], "ansatzes": ["aga"]},
    )
    assert r.status_code == 422
    assert "increasing" in r.json()["detail"]


def test_scan_records_cell_failure_with_status_200(client):
    r = client.post(
        "/api/scan",
        json={
            "fixtures": ["h2_0.7414"],
            "ansatzes": ["agar", "aga"],
            "mapping": "jw",
        },
    )
    assert r.status_code == 200
    rows = r.json()["rows"]
    assert rows[0]["ansatz"] == "agar"
    assert "weight" in rows[0]["error"]
    assert rows[0]["energy"] is None
    assert rows[1]["error"] is None
    assert rows[1]["chemical_accuracy"] is True


def test_scan_needs_points(client):
    r = client.post("/api/scan", json={"ansatzes": ["aga"]})
    assert r.status_code == 422


def test_agp_check_passes(client):
    body = client.post("/api/agp-check", json={}).json()
    assert body["passed"] is True
    assert len(body["residual_actions"]) == 3
    assert all(c["passed"] for c in body["checks"])
    assert body["text"].startswith("gauge checks on h2_0.7414")
    assert "all checks passed" in body["text"]


def test_every_response_echoes_its_config(client):
    body = client.post(
        "/api/vqe", json={"fixture": "h2_0.7414", "seed": 7}
    ).json()
    cfg = body["config"]
    assert cfg["fixture"] == "h2_0.7414"
    assert cfg["seed"] == 7
    assert cfg["ansatz"] == "aga"
    assert cfg["max_iterations"] == 2000
