"""End-to-end command-line behavior, exercised in process."""

import json

import numpy as np
import pytest

from gokbounds.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------------------------------------------------------------- bounds

def test_bounds_table(capsys):
    code, out, _ = run(capsys, "bounds", "--E", "-1,0,2", "--w", "0.5,0.3,0.2")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# schema_version=1 seed=0"
    assert lines[1] == "quantity,lower_prefactor,upper_prefactor,g,G"
    table = {l.split(",")[0]: l.split(",")[1:] for l in lines[2:]}
    assert table["ensemble_state"] == ["0.1", "0.4", "0.2", "0.9"]
    assert table["eigenstate_1"][1] == "5"
    assert table["eigenenergy_1"][:2] == ["-5", "10"]
    assert table["eigenenergy_sum"][1] == "20"


def test_bounds_json_round_trip(capsys):
    code, out, _ = run(capsys, "bounds", "--E", "-1,0,2", "--w", "0.5,0.3,0.2",
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert doc["g"] == pytest.approx(0.2)
    assert doc["a_plus"] == pytest.approx(0.4)


def test_bounds_optimal_weight_lookup(capsys):
    code, out, _ = run(capsys, "bounds", "--w-optimal", "sumE_all", "--D", "4",
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["bound"] == pytest.approx(12.0)
    np.testing.assert_allclose(doc["w"], (1 / 2, 1 / 3, 1 / 6, 0), atol=1e-9)


def test_bounds_degenerate_weights_exit_2(capsys):
    code, _, err = run(capsys, "bounds", "--E", "-1,0,1", "--w", "0.5,0.5,0")
    assert code == 2
    assert "repeated weights" in err


def test_bounds_requires_some_weight_source(capsys):
    code, _, err = run(capsys, "bounds", "--E", "-1,0,2")
    assert code == 2


# ---------------------------------------------------------------- weights

def test_weights_closed_forms(capsys):
    code, out, _ = run(capsys, "weights", "--target", "sumE_K", "--K", "2", "--D", "5")
    assert code == 0
    assert out.splitlines()[2].split(",")[2:] == ["0.75", "0.25", "0", "0", "0"]

    code, out, _ = run(capsys, "weights", "--target", "E_k", "--k", "0", "--D", "3")
    assert code == 0
    assert out.splitlines()[2].split(",")[2:] == ["1", "0", "0"]

    code, out, _ = run(capsys, "weights", "--target", "sumPsi_all", "--E", "-1,0,2")
    assert code == 0
    assert out.splitlines()[2].split(",")[2:] == ["0.75", "0.25", "0"]


def test_weights_grid_verification(capsys):
    code, out, _ = run(capsys, "weights", "--target", "sumE_all", "--D", "3",
                       "--verify", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["verify"]["agrees"] is True


def test_weights_bad_range_exit_2(capsys):
    code, _, _ = run(capsys, "weights", "--target", "E_k", "--k", "5", "--D", "3")
    assert code == 2


# ---------------------------------------------------------------- polytope

def test_polytope_slice_extrema(capsys):
    code, out, _ = run(capsys, "polytope", "--w", "0.5,0.3,0.2", "--E", "-1,0,2",
                       "--delta", "0.1", "--target", "rho", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["min"] == pytest.approx(0.01)
    assert doc["max"] == pytest.approx(0.04)
    assert len(doc["slice_vertices"]) == 2


def test_polytope_oracle_agreement(capsys):
    code, out, _ = run(capsys, "polytope", "--w", "0.5,0.3,0.2", "--E", "-1,0,2",
                       "--delta", "0.1", "--target", "rho", "--oracle",
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["oracle"]["agrees"] is True


def test_polytope_out_of_regime_exit_3(capsys):
    code, _, err = run(capsys, "polytope", "--w", "0.5,0.3,0.2", "--E", "-1,0,2",
                       "--delta", "0.5", "--target", "rho")
    assert code == 3


def test_polytope_gok_minimum(capsys):
    code, out, _ = run(capsys, "polytope", "--w", "0.5,0.3,0.2", "--E", "-1,0,2",
                       "--gok-min", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["min_over_rearrangements"] == pytest.approx(-0.1)
    assert doc["identity_is_minimum"] is True


def test_polytope_cycle_report(capsys):
    code, out, _ = run(capsys, "polytope", "--w", "0.5,0.3,0.2", "--E", "-1,0,2",
                       "--cycle", "0,1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["L"] == 2
    assert doc["delta_E_w"] == pytest.approx(0.2)
    assert doc["satisfied"] is True


# ---------------------------------------------------------------- sample + check

def test_sample_check_round_trip(capsys, tmp_path):
    dest = tmp_path / "records.csv"
    code, _, _ = run(capsys, "sample", "--w", "0.5,0.3,0.2", "--E", "-1,0,2",
                     "--n", "200", "--check", "--out", str(dest), "--seed", "7")
    assert code == 0
    text = dest.read_text()
    assert text.startswith("# schema_version=1 seed=7")

    code, out, _ = run(capsys, "check", "--csv", str(dest),
                       "--w", "0.5,0.3,0.2", "--E", "-1,0,2", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["n_violations"] == 0
    assert doc["n_records"] > 200


def test_check_flags_corrupted_record(capsys, tmp_path):
    dest = tmp_path / "records.csv"
    run(capsys, "sample", "--w", "0.5,0.3,0.2", "--E", "-1,0,2",
        "--n", "50", "--out", str(dest))
    lines = dest.read_text().splitlines()
    # plant an in-regime row whose state error dwarfs its energy error
    cols = lines[1].split(",")
    row = dict(zip(cols, lines[5].split(",")))
    row["delta_E_w"] = "1e-6"
    row["delta_rho_w"] = "0.5"
    lines[5] = ",".join(row[c] for c in cols)
    dest.write_text("\n".join(lines) + "\n")

    code, out, _ = run(capsys, "check", "--csv", str(dest),
                       "--w", "0.5,0.3,0.2", "--E", "-1,0,2", "--format", "json")
    assert code == 3
    doc = json.loads(out)
    assert doc["n_violations"] == 1


def test_sample_envelope_sidecar(capsys, tmp_path):
    env_path = tmp_path / "env.json"
    code, _, _ = run(capsys, "sample", "--w", "0.5,0.3,0.2", "--E", "-1,0,2",
                     "--n", "100", "--out", str(tmp_path / "r.csv"),
                     "--envelope-out", str(env_path))
    assert code == 0
    env = json.loads(env_path.read_text())
    assert env["schema_version"] == 1
    assert "delta_rho_w" in env["envelope"]["quantities"]


def test_sample_unitary_mode(capsys, tmp_path):
    code, _, _ = run(capsys, "sample", "--w", "0.5,0.3,0.2", "--E", "-1,0,2",
                     "--n", "100", "--mode", "unitary", "--check",
                     "--out", str(tmp_path / "u.csv"))
    assert code == 0


# ---------------------------------------------------------------- vqe

def test_vqe_reference_run(capsys, tmp_path):
    code, out, _ = run(capsys, "vqe", "--paper-model", "--weights-exp", "1",
                       "--out", str(tmp_path), "--format", "json")
    assert code == 0
    doc = json.loads(out)
    np.testing.assert_allclose(
        doc["spectrum"], (-1.13483, -0.48575, 0.48575, 1.13483), atol=1e-5)
    runs = doc["runs"]
    assert len(runs) == 1 and runs[0]["converged"] is True
    assert (tmp_path / "trace_n1.csv").exists()
    assert (tmp_path / "bounds_n1.csv").exists()


def test_vqe_zero_iterations(capsys, tmp_path):
    code, out, _ = run(capsys, "vqe", "--paper-model", "--weights-exp", "2",
                       "--max-iter", "0", "--out", str(tmp_path), "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["runs"][0]["iterations"] == 0
    assert doc["runs"][0]["converged"] is False


def test_vqe_inline_model(capsys, tmp_path):
    code, out, _ = run(capsys, "vqe", "--a", "0.3,0.7", "--J", "0,1,0.05",
                       "--weights-exp", "1", "--out", str(tmp_path),
                       "--format", "json")
    assert code == 0
    assert json.loads(out)["runs"][0]["converged"] is True


# ---------------------------------------------------------------- plumbing

def test_vector_file_reference(capsys, tmp_path):
    wfile = tmp_path / "w.txt"
    wfile.write_text("0.5, 0.3, 0.2\n")
    code, out, _ = run(capsys, "bounds", "--E", "-1,0,2", "--w", "@" + str(wfile))
    assert code == 0
    assert "ensemble_state,0.1,0.4" in out


def test_missing_vector_file_exit_4(capsys, tmp_path):
    code, _, _ = run(capsys, "bounds", "--E", "-1,0,2",
                     "--w", "@" + str(tmp_path / "nope.txt"))
    assert code == 4


def test_unknown_flag_exit_2(capsys):
    code, _, _ = run(capsys, "bounds", "--nonsense", "1")
    assert code == 2


def test_malformed_vector_exit_2(capsys):
    code, _, _ = run(capsys, "bounds", "--E", "-1,zap,2", "--w", "0.5,0.3,0.2")
    assert code == 2


def test_seed_is_echoed(capsys, tmp_path):
    code, out, _ = run(capsys, "sample", "--w", "0.5,0.3,0.2", "--E", "-1,0,2",
                       "--n", "10", "--seed", "99")
    assert code == 0
    assert out.splitlines()[0].endswith("seed=99")


def test_csv_is_the_default_format_everywhere(capsys):
    code, out, _ = run(capsys, "weights", "--target", "sumE_all", "--D", "3")
    assert code == 0
    assert out.splitlines()[1].startswith("target,source")
