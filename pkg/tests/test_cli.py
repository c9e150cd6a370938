import json

import pytest

from fermidecay.cli import main
from fermidecay.lattice import LatticeSpec
from fermidecay.model import ModelParams, hubbard_interaction, model_to_dict, save_model


@pytest.fixture
def hubbard_file(tmp_path):
    path = tmp_path / "hubbard.json"
    save_model(path, LatticeSpec(d=1, L=4),
               ModelParams(t=1.0, mu=0.2, beta=1.0),
               hubbard_interaction(1e-4, d=1))
    return path


def test_model_validate_ok(hubbard_file, capsys):
    assert main(["model-validate", "--model", str(hubbard_file)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert "smallness_hubbard" in out


def test_model_validate_hermiticity_violation(tmp_path, capsys):
    data = model_to_dict(LatticeSpec(d=1, L=4), ModelParams(),
                         hubbard_interaction(0.1, d=1))
    data["interaction"][0]["entries"][0]["im"] = 0.5
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    assert main(["model-validate", "--model", str(path)]) == 1
    err = capsys.readouterr().err
    assert "order 2 entry" in err


def test_model_validate_missing_file(tmp_path):
    assert main(["model-validate", "--model", str(tmp_path / "nope.json")]) == 2


def test_model_validate_requires_model():
    assert main(["model-validate"]) == 2


def test_verify_covariance_exit_zero(tmp_path):
    out = tmp_path / "report.json"
    rc = main(["verify", "--suite", "covariance", "--seed", "3",
               "--out", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["passed"] is True
    assert any(c["quantity"] == "free_fermion_consistency"
               for c in payload["checks"])


def test_verify_deterministic_reports(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        rc = main(["verify", "--suite", "taylor", "--seed", "7",
                   "--out", str(path)])
        assert rc == 0
    assert a.read_bytes() == b.read_bytes()


def test_verify_csv_format(tmp_path):
    out = tmp_path / "report.csv"
    rc = main(["verify", "--suite", "taylor", "--seed", "1", "--format", "csv",
               "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "quantity,computed,bound,ratio,pass"
    assert len(lines) > 4


def test_verify_theorem_refuses_oversized_coupling(tmp_path):
    # coupling beyond the threshold: smallness check fails, exit code 1
    out = tmp_path / "report.json"
    rc = main(["verify", "--suite", "theorem", "--coupling-fraction", "1.5",
               "--out", str(out)])
    assert rc == 1
    payload = json.loads(out.read_text())
    assert payload["passed"] is False
    names = [c["quantity"] for c in payload["checks"]]
    assert "smallness_hubbard" in names
    assert not any(n.startswith("envelope_sep") for n in names)


def test_verify_grassmann(tmp_path):
    out = tmp_path / "report.json"
    rc = main(["verify", "--suite", "grassmann", "--seed", "2",
               "--out", str(out)])
    assert rc == 0


def test_table_covariance_decay_row_count(tmp_path):
    out = tmp_path / "decay.csv"
    rc = main(["table", "--kind", "covariance_decay", "--L", "16", "--beta",
               "2", "--mu", "0", "--half-steps", "4", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 18  # header + distances 0..16
    assert lines[0] == "distance,abs_c,envelope,ratio"


def test_table_taylor_rows(tmp_path):
    out = tmp_path / "taylor.csv"
    rc = main(["table", "--kind", "taylor", "--m-max", "3", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 5  # header + m = 0..3


def test_table_envelope_monotone(tmp_path):
    out = tmp_path / "envelope.csv"
    rc = main(["table", "--kind", "envelope", "--out", str(out)])
    assert rc == 0
    import csv as csvmod
    with open(out) as fh:
        rows = list(csvmod.DictReader(fh))
    env = [float(r["envelope_euclidean"]) for r in rows]
    assert all(b < a for a, b in zip(env, env[1:]))


def test_shipped_model_file_validates():
    import pathlib
    path = pathlib.Path(__file__).resolve().parents[1] / "models" / "hubbard_chain_L4.json"
    assert main(["model-validate", "--model", str(path)]) == 0
