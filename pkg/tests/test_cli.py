"""Command-line client tests: exit codes, file emission, determinism."""

import json
import socket
import threading
import time

import pytest

from cdprep.cli import cli, main


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_help_exits_zero(capsys):
    code, out, _ = run(capsys, ["--help"])
    assert code == 0
    for name in (
        "map",
        "ground-state",
        "evolve",
        "sweep",
        "vqe",
        "adapt",
        "scan",
        "agp-check",
        "serve",
    ):
        assert name in out


def test_unknown_subcommand_exits_one(capsys):
    code, _, err = run(capsys, ["frobnicate"])
    assert code == 1
    assert "frobnicate" in err


def test_map_text_statistics(capsys):
    code, out, _ = run(capsys, ["map", "--fixture", "h2_0.7414", "--mapping", "jw"])
    assert code == 0
    assert "n_qubits=4 n_terms=15 max_weight=4" in out
    assert out.startswith("# config ")


def test_map_verify_reports_isospectrality(capsys):
    code, out, _ = run(
        capsys, ["map", "--fixture", "h2_0.7414", "--mapping", "jw", "--verify"]
    )
    assert code == 0
    assert "isospectral=true" in out


def test_map_missing_file_exits_one(capsys):
    code, _, err = run(capsys, ["map", "--fcidump", "/no/such/file.fcidump"])
    assert code == 1
    assert "file.fcidump" in err


def test_map_requires_exactly_one_molecule_source(capsys):
    code, _, err = run(capsys, ["map"])
    assert code == 1
    assert "exactly one" in err


def test_json_output_round_trips(capsys, tmp_path):
    target = tmp_path / "map.json"
    code, _, _ = run(
        capsys,
        ["map", "--fixture", "h2_0.7414", "--format", "json", "-o", str(target)],
    )
    assert code == 0
    raw = target.read_text()
    assert json.dumps(json.loads(raw), sort_keys=True, indent=2) + "\n" == raw


def test_vqe_aga_meets_chemical_accuracy(capsys):
    code, out, _ = run(capsys, ["vqe", "--fixture", "h2_0.7414", "--ansatz", "aga"])
    assert code == 0
    body = json.loads(out)
    assert body["chemical_accuracy"] is True
    assert body["epsilon"] < 1e-6
    assert body["n_parameters"] == 2


def test_vqe_csv_single_row(capsys):
    code, out, _ = run(
        capsys,
        ["vqe", "--fixture", "h2_0.7414", "--ansatz", "uccsd", "--mapping", "jw",
         "--format", "csv"],
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# schema=1"
    assert lines[1].startswith("# config ")
    assert lines[2] == "label,n_parameters,n_pauli_terms,energy,e0,epsilon,chemical_accuracy"
    assert lines[3].startswith("UCCSD,4,14,")
    assert lines[3].endswith(",true")


def test_adapt_csv_reports_two_parameters(capsys):
    code, out, _ = run(
        capsys, ["adapt", "--fixture", "h2_0.7414", "--format", "csv"]
    )
    assert code == 0
    assert out.splitlines()[3].startswith("ADAPT,2,")


def test_sweep_single_cell_matches_evolve(capsys):
    code, sweep_out, _ = run(
        capsys,
        ["sweep", "--fixture", "h2_0.7414", "--dt-grid", "0.2", "--n-grid", "10",
         "--cd-order", "1", "--format", "json"],
    )
    assert code == 0
    code, evolve_out, _ = run(
        capsys,
        ["evolve", "--fixture", "h2_0.7414", "--step-size", "0.2", "--n-steps", "10",
         "--cd-order", "1"],
    )
    assert code == 0
    row = json.loads(sweep_out)["rows"][0]
    assert row["eps_cd"] == json.loads(evolve_out)["epsilon"]


def test_sweep_csv_is_deterministic(capsys, tmp_path):
    argv = ["sweep", "--fixture", "h2_0.7414", "--dt-grid", "0.2,0.4",
            "--n-grid", "5,10"]
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    assert run(capsys, argv + ["-o", str(first)])[0] == 0
    assert run(capsys, argv + ["-o", str(second)])[0] == 0
    assert first.read_bytes() == second.read_bytes()
    lines = first.read_text().splitlines()
    assert lines[0] == "# schema=1"
    assert lines[1].startswith("# config ")
    assert len(lines) == 7


def test_evolve_csv_row(capsys):
    code, out, _ = run(
        capsys,
        ["evolve", "--fixture", "h2_0.7414", "--n-steps", "10", "--step-size", "0.2",
         "--cd-order", "1", "--format", "csv"],
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[2] == "n_steps,step_size,total_time,cd_order,e0,energy,epsilon"
    assert lines[3].startswith("10,0.2,2,1,")


def test_invalid_flag_value_exits_one_before_compute(capsys):
    code, _, err = run(
        capsys, ["evolve", "--fixture", "h2_0.7414", "--n-steps", "many"]
    )
    assert code == 1
    assert "many" in err


def test_config_file_supplies_defaults_and_flags_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# defaults for the bundled molecule\n"
        "fixture=h2_0.7414\n"
        "n-steps=10\n"
        "step_size=0.2\n"
        "cd_order=1\n"
    )
    code, out, _ = run(
        capsys, ["--config", str(cfg), "evolve", "--format", "csv"]
    )
    assert code == 0
    assert out.splitlines()[3].startswith("10,0.2,2,1,")
    code, out, _ = run(
        capsys, ["--config", str(cfg), "evolve", "--n-steps", "25", "--format", "csv"]
    )
    assert code == 0
    assert out.splitlines()[3].startswith("25,0.2,5,1,")


def test_output_dir_env_var(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("CDPREP_OUTPUT_DIR", str(tmp_path))
    code, out, _ = run(
        capsys, ["ground-state", "--fixture", "h2_0.7414", "-o", "gs.json"]
    )
    assert code == 0
    target = tmp_path / "gs.json"
    assert target.is_file()
    assert str(target) in out
    assert json.loads(target.read_text())["energy"] < -1.0


def test_scan_partial_failure_exits_two(capsys):
    code, out, err = run(
        capsys,
        ["scan", "--fixture", "h2_0.7414", "--ansatz", "agar", "--ansatz", "aga",
         "--mapping", "jw"],
    )
    assert code == 2
    assert "warning" in err and "agar" in err
    lines = out.splitlines()
    assert len(lines) == 5
    agar_row, aga_row = lines[3], lines[4]
    assert agar_row.startswith("0.7414,agar,,")
    assert aga_row.endswith(",true")


def test_scan_unknown_ansatz_exits_one_before_compute(capsys):
    code, _, err = run(
        capsys, ["scan", "--fixture", "h2_0.7414", "--ansatz", "hea"]
    )
    assert code == 1
    assert "ansatz" in err


def test_scan_manifest(capsys, tmp_path):
    manifest = tmp_path / "scan.manifest"
    manifest.write_text(
        "molecule=H2\nmapping=bk\nfixture=h2_0.5000,h2_0.7414\nansatz=aga\n"
    )
    code, out, _ = run(capsys, ["scan", "--manifest", str(manifest)])
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 5
    assert lines[3].startswith("0.5,aga,2,")
    assert lines[4].startswith("0.7414,aga,2,")


def test_scan_manifest_missing_point_file_exits_one(capsys, tmp_path):
    manifest = tmp_path / "scan.manifest"
    manifest.write_text("point=0.5:/no/such/file.fcidump\n")
    code, _, err = run(capsys, ["scan", "--manifest", str(manifest)])
    assert code == 1
    assert "not found" in err


def test_scan_csv_determinism(capsys, tmp_path):
    argv = ["scan", "--fixture", "h2_0.7414", "--ansatz", "aga", "--ansatz", "uccsd"]
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    assert run(capsys, argv + ["-o", str(first)])[0] == 0
    assert run(capsys, argv + ["-o", str(second)])[0] == 0
    assert first.read_bytes() == second.read_bytes()


def test_agp_check_text_and_exit_code(capsys):
    code, out, _ = run(capsys, ["agp-check"])
    assert code == 0
    assert "all checks passed" in out


def test_agp_check_json(capsys):
    code, out, _ = run(capsys, ["agp-check", "--format", "json"])
    assert code == 0
    body = json.loads(out)
    assert body["passed"] is True
    assert len(body["checks"]) == 6


def test_fixtures_listing(capsys):
    code, out, _ = run(capsys, ["fixtures"])
    assert code == 0
    assert "h2_0.7414" in out
    assert "lih_1.5500" in out
    assert "beh2_1.3300" in out


@pytest.fixture(scope="module")
def live_server():
    import uvicorn

    from cdprep.service import create_app

    config = uvicorn.Config(
        create_app(), host="127.0.0.1", port=0, log_level="error"
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    while not server.started:
        if time.time() > deadline:
            pytest.fail("service did not start")
        time.sleep(0.05)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def test_remote_server_mode(capsys, live_server):
    code, out, _ = run(
        capsys,
        ["--server", live_server, "ground-state", "--fixture", "h2_0.7414"],
    )
    assert code == 0
    assert json.loads(out)["energy"] == pytest.approx(-1.1372701748276, abs=1e-10)


def test_remote_server_unreachable_exits_one(capsys):
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    code, _, err = run(
        capsys,
        ["--server", f"http://127.0.0.1:{port}", "ground-state",
         "--fixture", "h2_0.7414"],
    )
    assert code == 1
    assert "cannot reach" in err


def test_serve_command_registered():
    assert "serve" in cli.commands
    assert cli.commands["serve"].params[0].name in ("host", "port")
