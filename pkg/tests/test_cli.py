import json

import pytest

from aimvolcano.cli import SCHEMA_VERSION, SPLIT_COLUMNS, STATE_COLUMNS, SWEEP_COLUMNS, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def strip_timestamp(text):
    d = json.loads(text)
    d["manifest"].pop("timestamp")
    return d


def test_solve_json(capsys):
    code, out, _ = run(capsys, "solve", "coshsech(a=3,b=1)", "--k", "12", "--pair-threshold", "0.2")
    assert code == 0
    d = json.loads(out)
    assert d["manifest"]["schema_version"] == SCHEMA_VERSION
    assert d["manifest"]["command"] == "solve"
    assert d["spec"] == "coshsech(a=3,b=1)"
    assert len(d["bound_states"]) == 6
    assert len(d["pairs"]) == 3


def test_solve_exact_state(capsys):
    code, out, _ = run(capsys, "solve", "coshsech(a=1,b=2)", "--k", "12")
    assert code == 0
    assert any(abs(e + 0.25) < 1e-6 for e in json.loads(out)["bound_states"])


def test_solve_deterministic(capsys):
    _, a, _ = run(capsys, "solve", "coshsech(a=3,b=1)")
    _, b, _ = run(capsys, "solve", "coshsech(a=3,b=1)")
    assert strip_timestamp(a) == strip_timestamp(b)


def test_solve_csv_header(capsys):
    code, out, _ = run(capsys, "solve", "coshsech(a=3,b=1)", "--csv")
    lines = out.splitlines()
    assert code == 0
    assert lines[0].startswith("# manifest: ")
    assert json.loads(lines[0][len("# manifest: "):])["command"] == "solve"
    assert lines[1] == ",".join(STATE_COLUMNS)


@pytest.mark.parametrize("k", ["0", "1"])
def test_k_too_small_is_usage_error(capsys, k):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "coshsech(a=1,b=1)", "--k", k])
    assert exc.value.code == 2


@pytest.mark.parametrize("spec", ["coshsech(a=1)", "nope(a=1,b=1)"])
def test_bad_spec_is_usage_error(spec):
    with pytest.raises(SystemExit) as exc:
        main(["solve", spec])
    assert exc.value.code == 2


def test_solver_failure_exit_code(capsys):
    code, _, _ = run(capsys, "solve", "coshsech(a=3,b=1)", "--window", "1000", "1001")
    assert code == 3


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "p.json"
    cfg.write_text(json.dumps({"family": "coshsech", "a": 1, "b": 1}))
    code, out, _ = run(capsys, "solve", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["spec"] == "coshsech(a=1,b=1)"


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.json"
    code, out, _ = run(capsys, "solve", "coshsech(a=1,b=1)", "-o", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["manifest"]["output"] == str(path)


def test_sweep_tsv(capsys):
    code, out, _ = run(capsys, "sweep", "coshsech(a=20,b=0)", "--param", "b", "--values", "2,6",
                       "--tsv", "--wavelength")
    assert code == 0
    lines = out.splitlines()
    assert lines[1].split("\t") == SWEEP_COLUMNS
    assert len(lines) == 4


def test_sweep_needs_range():
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "coshsech(a=20,b=0)", "--param", "b"])
    assert exc.value.code == 2


def test_split(capsys):
    code, out, _ = run(capsys, "split", "--c-grid", "0,0.01,0.5", "--csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[1] == ",".join(SPLIT_COLUMNS)
    assert "numerical floor" in lines[2]


def test_split_empty_grid():
    with pytest.raises(SystemExit) as exc:
        main(["split", "--c-grid", ""])
    assert exc.value.code == 2


def test_oracle_advisory_banner(capsys):
    code, out, err = run(capsys, "oracle", "coshsech(a=1,b=1)", "--L", "6", "--N", "1500")
    assert code == 0
    assert "ADVISORY" in err
    assert json.loads(out)["mode"] == "advisory"


def test_oracle_inapplicable(capsys):
    code, _, _ = run(capsys, "oracle", "coshsech(a=1,b=1)", "--L", "500", "--N", "100")
    assert code == 4


def test_oracle_grid_shift_second_order(capsys):
    vals = []
    for n in ("1000", "2000"):
        code, out, _ = run(capsys, "oracle", "modified(a=1,b=1,c=0.5)", "--N", n, "--m", "3")
        assert code == 0
        vals.append(json.loads(out)["fd_eigenvalues"][0])
    _, out, _ = run(capsys, "oracle", "modified(a=1,b=1,c=0.5)", "--N", "4000", "--m", "3")
    ref = json.loads(out)["fd_eigenvalues"][0]
    ratio = (vals[0] - ref) / (vals[1] - ref)
    # errors scale like h^2; with a 4000-point reference the ratio is (1/1000^2-1/4000^2)/(1/2000^2-1/4000^2) = 5
    assert 4.0 < ratio < 6.0


def test_units(capsys):
    code, out, _ = run(capsys, "units", "--de", "81.51", "--x0", "10")
    d = json.loads(out)
    assert code == 0
    assert d["wavelength_um"] == pytest.approx(0.4, rel=1e-3)
    assert d["band"] == "visible"
    code, out, _ = run(capsys, "units", "--de", "57.3")
    assert json.loads(out)["wavelength_um"] == pytest.approx(0.569, rel=5e-3)


def test_units_domain_error(capsys):
    code, _, _ = run(capsys, "units", "--de", "-1", "--x0", "10")
    assert code == 2
