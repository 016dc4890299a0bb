import json

import pytest

from lattice_vortex.cli import EXIT_OK, EXIT_SOLVER, EXIT_USAGE, main, render_json


def write_config(path, **overrides):
    cfg = {
        "dimension": 2,
        "domain": {"kind": "box", "size": 3, "center": [0, 0]},
        "vortices": [{"point": [0, 0], "multiplicity": 1}],
        "lambda": 1.0,
        "p": 0,
    }
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))
    return path


def write_exhaust_config(path, **overrides):
    cfg = {
        "dimension": 2,
        "shape": "box",
        "radii": [4, 8, 16],
        "vortices": [{"point": [0, 0], "multiplicity": 1}],
        "lambda": 1.0,
        "p": 0,
        "tolerances": {"global": 1e-3, "decay": 1e-4},
    }
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))
    return path


def test_render_json_fixed_format():
    text = render_json({"b": 1.5, "a": [True, None, 2]})
    assert text.index('"a"') < text.index('"b"')
    assert "1.5" in text
    assert "true" in text and "null" in text


def test_solve_writes_artifacts(tmp_path):
    cfg = write_config(tmp_path / "run.json")
    out = tmp_path / "out"
    assert main(["solve", str(cfg), "--out", str(out)]) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["converged"] is True
    assert summary["iterations"] >= 1
    assert summary["residual_inf"] < 1e-8
    assert (out / "solution.csv").exists()
    assert (out / "trace.csv").exists()
    header = (out / "trace.csv").read_text().splitlines()[0]
    assert header == "k,J,sup_change,residual,l2p2_norm"


def test_solve_deterministic_summary(tmp_path):
    cfg = write_config(tmp_path / "run.json")
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["solve", str(cfg), "--out", str(out1)]) == EXIT_OK
    assert main(["solve", str(cfg), "--out", str(out2)]) == EXIT_OK
    assert (out1 / "summary.json").read_bytes() == (out2 / "summary.json").read_bytes()


def test_solve_empty_vortex_list(tmp_path):
    cfg = write_config(tmp_path / "run.json", vortices=[])
    out = tmp_path / "out"
    assert main(["solve", str(cfg), "--out", str(out)]) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["converged"] is True
    assert summary["iterations"] == 1
    rows = (out / "solution.csv").read_text().splitlines()[1:]
    assert all(float(r.rsplit(",", 1)[1]) == 0.0 for r in rows)


def test_solve_vortex_outside_domain_is_usage_error(tmp_path):
    cfg = write_config(
        tmp_path / "run.json", vortices=[{"point": [9, 9], "multiplicity": 1}]
    )
    out = tmp_path / "out"
    assert main(["solve", str(cfg), "--out", str(out)]) == EXIT_USAGE
    assert not out.exists()  # no partial output


def test_solve_malformed_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", str(bad), "--out", str(tmp_path / "o")]) == EXIT_USAGE
    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"dimension": 2}))
    assert main(["solve", str(missing), "--out", str(tmp_path / "o2")]) == EXIT_USAGE


def test_solve_failure_reports_reason(tmp_path):
    cfg = write_config(tmp_path / "run.json", max_outer_iterations=2)
    out = tmp_path / "out"
    assert main(["solve", str(cfg), "--out", str(out)]) == EXIT_SOLVER
    summary = json.loads((out / "summary.json").read_text())
    assert summary["converged"] is False
    assert summary["failure"]["kind"] == "max_iterations"


def test_solve_dump_matrix(tmp_path):
    cfg = write_config(tmp_path / "run.json")
    out = tmp_path / "out"
    assert main(["solve", str(cfg), "--out", str(out), "--dump-matrix"]) == EXIT_OK
    lines = (out / "matrix.coo").read_text().strip().splitlines()
    i, j, v = lines[0].split()
    int(i), int(j), float(v)
    assert len(lines) >= 49  # 7x7 interior diagonal alone


def test_exhaust_success(tmp_path):
    cfg = write_exhaust_config(tmp_path / "chain.json")
    out = tmp_path / "out"
    assert main(["exhaust", str(cfg), "--out", str(out), "--backend", "direct"]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["success"] is True
    assert report["gaps_strictly_decreasing"] is True
    gaps = [e["gap_to_previous"] for e in report["per_radius"][1:]]
    assert gaps == sorted(gaps, reverse=True)
    decay_lines = (out / "decay.csv").read_text().splitlines()
    assert decay_lines[0] == "shell_radius,sup_abs"
    assert (out / "solution.csv").exists()


def test_exhaust_no_vortices(tmp_path):
    cfg = write_exhaust_config(tmp_path / "chain.json", vortices=[], radii=[2, 4])
    out = tmp_path / "out"
    assert main(["exhaust", str(cfg), "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["per_radius"][1]["gap_to_previous"] == 0.0


def test_exhaust_non_nested_radii_is_usage_error(tmp_path):
    cfg = write_exhaust_config(tmp_path / "chain.json", radii=[8, 4])
    assert main(["exhaust", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_USAGE
    cfg2 = write_exhaust_config(tmp_path / "chain2.json", radii=[4, 4])
    assert main(["exhaust", str(cfg2), "--out", str(tmp_path / "o2")]) == EXIT_USAGE


def test_exhaust_incomplete_certificates_fail(tmp_path):
    # short chain cannot meet the default gap tolerance
    cfg = write_exhaust_config(
        tmp_path / "chain.json", radii=[2, 4], tolerances={"global": 1e-9}
    )
    out = tmp_path / "out"
    assert main(["exhaust", str(cfg), "--out", str(out)]) == EXIT_SOLVER
    report = json.loads((out / "report.json").read_text())
    assert report["success"] is False


def test_verify_passes(capsys):
    assert main(["verify", "--seed", "3", "--sizes", "1,2"]) == EXIT_OK
    output = capsys.readouterr().out
    assert output.count("PASS") == 4


def test_verify_fault_injection_detected(capsys):
    assert main(["verify", "--seed", "3", "--sizes", "1", "--inject-fault", "green_identity"]) == EXIT_SOLVER
    captured = capsys.readouterr()
    assert "green_identity      FAIL" in captured.out or "FAIL" in captured.out
    assert "green_identity" in captured.err


def test_verify_empty_sizes_is_usage_error():
    assert main(["verify", "--sizes", ""]) == EXIT_USAGE


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
