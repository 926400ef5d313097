import csv
import json

import numpy as np
import pytest

from cqoverlap.channel import basis_channel, random_channel
from cqoverlap.cli import main
from cqoverlap.serialization import load_instance, save_instance


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else None)


@pytest.fixture
def basis_file(tmp_path):
    path = tmp_path / "basis.json"
    save_instance(path, basis_channel(3))
    return path


def test_gen_writes_valid_instance(tmp_path, capsys):
    out = tmp_path / "a.json"
    code, rep = run(capsys, "gen", "--n", 2, "--d", 2, "--seed", 1, "--out", out)
    assert code == 0 and rep["command"] == "gen"
    ch, prov = load_instance(out)
    assert (ch.n, ch.d) == (2, 2)
    assert prov == {"generator": "ginibre", "seed": 1, "params": {"n": 2, "d": 2}}


def test_gen_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "gen", "--n", 4, "--d", 3, "--seed", 8, "--out", a)
    run(capsys, "gen", "--n", 4, "--d", 3, "--seed", 8, "--out", b)
    assert a.read_bytes() == b.read_bytes()


def test_gen_rejects_n1(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--n", "1", "--d", "2", "--out", str(tmp_path / "x.json")])
    assert exc.value.code == 2
    assert "n must be >= 2" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--bogus"])
    assert exc.value.code == 2


def test_solve_closed_basis(basis_file, capsys):
    code, rep = run(capsys, "solve", basis_file, "--method", "closed", "--direction", "min")
    assert code == 0
    res = rep["results"]
    assert res["value"] == {"value": 0.0, "tol": 1e-9}
    assert res["pair"] == [1, 2]


def test_solve_oracle_matches_closed(tmp_path, capsys):
    path = tmp_path / "s13.json"
    save_instance(path, random_channel(5, 3, 13))
    code, rep = run(capsys, "solve", path, "--method", "oracle", "--restarts", 200, "--seed", 13)
    assert code == 0
    res = rep["results"]
    assert abs(res["gap_to_closed_form"]["value"]) <= 1e-6
    assert res["within_theorem_bounds"] is True
    assert res["config"]["restarts"] == 200


def test_solve_grid_n4_is_input_error(tmp_path, capsys):
    path = tmp_path / "n4.json"
    save_instance(path, random_channel(4, 2, 0))
    assert main(["solve", str(path), "--method", "grid"]) == 3
    assert "CapacityError" in capsys.readouterr().err


def test_solve_grid_n3(tmp_path, capsys):
    path = tmp_path / "n3.json"
    save_instance(path, random_channel(3, 2, 19))
    code, rep = run(capsys, "solve", path, "--method", "grid", "--resolution", 50)
    assert code == 0 and rep["results"]["gap_to_closed_form"]["value"] >= -1e-9


def test_solve_bad_optimizer_config(tmp_path, basis_file):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"restarts": 0}))
    with pytest.raises(SystemExit) as exc:
        main(["solve", str(basis_file), "--method", "oracle", "--config", str(cfg)])
    assert exc.value.code == 2


def test_invalid_instance_exit3(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    save_instance(bad, basis_channel(2))
    doc = json.loads(bad.read_text())
    doc["channel"]["sigmas"][0] = [[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
    bad.write_text(json.dumps(doc))
    assert main(["validate", str(bad)]) == 3
    assert "TraceNotOne" in capsys.readouterr().err
    bad.write_text("{not json")
    assert main(["solve", str(bad)]) == 3
    assert main(["validate", str(tmp_path / "missing.json")]) == 3


def test_validate_ok(basis_file, capsys):
    code, rep = run(capsys, "validate", basis_file)
    assert code == 0 and rep["results"]["valid"] is True


def test_reduce_so_yes(tmp_path, capsys):
    table = tmp_path / "t.json"
    table.write_text(json.dumps({"0": 1.0, "1": 0.0}))
    code, rep = run(capsys, "reduce", table, "--kind", "so", "--out", tmp_path / "so.json")
    assert code == 0
    res = rep["results"]
    assert res["gap_report"]["verdict"] == "yes-like"
    assert res["min_overlap"]["value"] == 0.0
    ch, _ = load_instance(tmp_path / "so.json")
    assert (ch.n, ch.d) == (2, 4)


def test_reduce_lo_all_zero(tmp_path, capsys):
    table = tmp_path / "t.json"
    table.write_text(json.dumps({"bits": 2, "probs": {"00": 0.0, "01": 0.0, "10": 0.0, "11": 0.0}}))
    code, rep = run(capsys, "reduce", table, "--kind", "lo", "--out", tmp_path / "lo.json")
    assert code == 0
    assert rep["results"]["max_pair_value"]["value"] == pytest.approx(0.5, abs=1e-15)
    assert rep["results"]["gap_report"]["verdict"] == "no-like"


def test_reduce_lo_sparse_five_eighths(tmp_path, capsys):
    table = tmp_path / "t.json"
    table.write_text(json.dumps({"bits": 1, "probs": {"0": 1.0}}))
    code, rep = run(capsys, "reduce", table, "--kind", "lo", "--out", tmp_path / "lo.json")
    res = rep["results"]
    assert code == 0 and res["sparse"] and res["missing_entries"] == 1
    assert res["max_pair_value"]["value"] == pytest.approx(5 / 8, abs=1e-15)
    assert res["gap_report"]["verdict"] == "yes-like"


def test_reduce_bad_table_exit3(tmp_path, capsys):
    table = tmp_path / "t.json"
    table.write_text(json.dumps({"0": 1.5}))
    assert main(["reduce", str(table), "--kind", "so", "--out", str(tmp_path / "x.json")]) == 3


def test_reduce_bad_thresholds(tmp_path):
    table = tmp_path / "t.json"
    table.write_text(json.dumps({"0": 1.0}))
    with pytest.raises(SystemExit) as exc:
        main(["reduce", str(table), "--kind", "lo", "--c", "0.5", "--s", "0.6", "--out", str(tmp_path / "x.json")])
    assert exc.value.code == 2


def test_conjecture_rows_and_exit(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    code, rep = run(capsys, "conjecture", "--n", 5, "--d", 3, "--k", 3, "--instances", 10, "--tuples", 10, "--seed", 101, "--out", out)
    assert code == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 10
    assert list(rows[0]) == ["instance_seed", "n", "d", "k", "lhs", "rhs", "margin"]
    assert rep["results"]["rows"] == 10


def test_conjecture_k2_exit0(tmp_path, capsys):
    code, rep = run(capsys, "conjecture", "--n", 4, "--d", 2, "--k", 2, "--instances", 5, "--tuples", 5, "--out", tmp_path / "s.csv")
    assert code == 0 and rep["results"]["confirmed_candidates"] == 0


def test_conjecture_bad_out_path(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["conjecture", "--n", "4", "--d", "2", "--k", "2", "--out", str(tmp_path / "no" / "dir" / "s.csv")])
    assert exc.value.code == 2


def test_conjecture_bad_k(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["conjecture", "--n", "3", "--d", "2", "--k", "4", "--out", str(tmp_path / "s.csv")])
    assert exc.value.code == 2


def test_swaptest_basis(basis_file, capsys):
    code, rep = run(capsys, "swaptest", basis_file, "--i", 1, "--j", 2, "--shots", 100000, "--seed", 3)
    assert code == 0
    res = rep["results"]
    assert res["so"]["exact_accept"]["value"] == 0.5
    assert res["lo"]["exact_accept"]["value"] == pytest.approx(0.75, abs=1e-15)
    for key in ("so", "lo"):
        emp = res[key]["empirical_accept"]
        assert abs(emp["value"] - res[key]["exact_accept"]["value"]) <= emp["tol"]


def test_swaptest_same_index(basis_file):
    with pytest.raises(SystemExit) as exc:
        main(["swaptest", str(basis_file), "--i", "2", "--j", "2"])
    assert exc.value.code == 2


def test_report_determinism_and_json_out(tmp_path, basis_file, capsys):
    side = tmp_path / "rep.json"
    _, a = run(capsys, "solve", basis_file, "--method", "oracle", "--restarts", 3, "--json-out", side)
    _, b = run(capsys, "solve", basis_file, "--method", "oracle", "--restarts", 3)
    assert json.loads(side.read_text())["results"] == a["results"]
    assert a["results"] == b["results"]
    assert a["tool_version"] and "wall_time" in a


def test_threads_env(basis_file, capsys, monkeypatch):
    monkeypatch.setenv("CQOVERLAP_THREADS", "4")
    _, rep = run(capsys, "validate", basis_file)
    assert rep["threads"] == 4
    monkeypatch.setenv("CQOVERLAP_THREADS", "zero")
    with pytest.raises(SystemExit) as exc:
        main(["validate", str(basis_file)])
    assert exc.value.code == 2


def test_round_trip_solve(tmp_path, capsys):
    first = tmp_path / "a.json"
    run(capsys, "gen", "--n", 5, "--d", 3, "--seed", 2, "--out", first)
    _, r1 = run(capsys, "solve", first)
    ch, prov = load_instance(first)
    second = tmp_path / "b.json"
    save_instance(second, ch, prov)
    _, r2 = run(capsys, "solve", second)
    assert r1["results"]["value"] == r2["results"]["value"]
    assert first.read_bytes() == second.read_bytes()
    assert np.array_equal(load_instance(second)[0].stack, ch.stack)
