import csv
import io
import json
import subprocess
import sys

import pytest

from isingopt.cli import RunConfig, main, run
from isingopt.formats import dumps_instance
from isingopt.reduction import BilpInstance, Constraint

EQ = BilpInstance.build([1.0, 2.0], [Constraint(((0, 1.0), (1, 1.0)), "=", 1.0)])


@pytest.fixture
def eq_file(tmp_path):
    p = tmp_path / "eq.json"
    p.write_text(dumps_instance(EQ, "bilp-json"))
    return p


def strip_wall_time(text):
    doc = json.loads(text)
    doc.pop("wall_time")
    return json.dumps(doc, sort_keys=True)


def run_cfg(cfg):
    out, err = io.StringIO(), io.StringIO()
    code = run(cfg, out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("engine", ["oracle", "anneal", "greedy", "cim"])
def test_engines_on_equality_example(engine, eq_file):
    extra = {"cim": {"ramp_steps": 3000}} if engine == "cim" else {}
    code, out, _ = run_cfg(RunConfig(engine=engine, input=str(eq_file), seed=3, **extra))
    assert code == 0
    sol = json.loads(out)["solution"]
    if engine != "greedy":
        assert sol["x"] == [1, 0] and sol["objective"] == 1.0 and sol["feasible"] is True


def test_report_is_self_describing(eq_file):
    doc = json.loads(run_cfg(RunConfig(engine="anneal", input=str(eq_file), seed=8))[1])
    assert doc["format_version"] == 1 and doc["config"]["seed"] == 8 and doc["result"]["seed"] == 8
    assert doc["params"]["schedule"]["sweeps"] == 500
    assert doc["reduction"]["num_spins"] == 2
    # the embedded config reproduces the run
    again = run_cfg(RunConfig.from_dict(doc["config"]))[1]
    assert strip_wall_time(again) == strip_wall_time(json.dumps(doc))


def test_anneal_finds_feasible_optimum_for_most_seeds(eq_file):
    hits = 0
    for seed in range(100):
        cfg = RunConfig(engine="anneal", input=str(eq_file), seed=seed)
        sol = json.loads(run_cfg(cfg)[1])["solution"]
        hits += sol["feasible"] and sol["objective"] == 1.0
    assert hits >= 90


@pytest.mark.parametrize("engine", ["anneal", "cim", "greedy", "oracle"])
def test_byte_identical_reruns(engine, tmp_path):
    args = ["solve", "--engine", engine, "--generate", "knapsack:n=3", "--seed", "5", "--ramp-steps", "500",
            "--sweeps", "50", "--restarts", "3"]
    texts = []
    out = tmp_path / "report.json"
    for _ in range(2):
        assert main(args + ["--out", str(out)]) == 0
        texts.append(out.read_text())
    assert strip_wall_time(texts[0]) == strip_wall_time(texts[1])
    # only the wall_time line may differ
    a = [ln for ln in texts[0].splitlines() if "wall_time" not in ln]
    b = [ln for ln in texts[1].splitlines() if "wall_time" not in ln]
    assert a == b


def test_csv_and_json_agree(eq_file):
    doc = json.loads(run_cfg(RunConfig(engine="anneal", input=str(eq_file), seed=2))[1])
    row = next(csv.DictReader(io.StringIO(run_cfg(RunConfig(engine="anneal", input=str(eq_file), seed=2,
                                                             report="csv"))[1])))
    assert float(row["best_energy"]) == doc["result"]["best_energy"]
    assert float(row["objective"]) == doc["solution"]["objective"]
    assert int(row["accepted_flips"]) == doc["result"]["accepted_flips"]
    assert row["x"] == " ".join(str(v) for v in doc["solution"]["x"])
    assert row["feasible"] == "true"


def test_trace_file(tmp_path):
    trace = tmp_path / "t.csv"
    code = main(["solve", "--generate", "maxcut-ring:n=6", "--sweeps", "30", "--restarts", "2",
                 "--trace", str(trace), "--out", str(tmp_path / "r.json")])
    assert code == 0
    rows = list(csv.reader(trace.open()))
    assert rows[0] == ["index", "best_energy"] and len(rows) == 31
    values = [float(r[1]) for r in rows[1:]]
    assert values == sorted(values, reverse=True)


def test_missing_input_writes_nothing(tmp_path, capsys):
    out = tmp_path / "out.json"
    code = main(["solve", "--input", str(tmp_path / "nope.json"), "--out", str(out)])
    assert code == 5 and not out.exists()
    rec = json.loads(capsys.readouterr().err)
    assert rec["exit_code"] == 5 and rec["error"] == "FileNotFoundError"


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.lp"
    bad.write_text("min: x + ; bin x;")
    assert main(["solve", "--input", str(bad)]) == 2
    assert json.loads(capsys.readouterr().err)["line"] == 1
    unsat = tmp_path / "unsat.lp"
    unsat.write_text("min: x; x + y >= 3; bin x, y;")
    assert main(["solve", "--input", str(unsat)]) == 3
    capsys.readouterr()
    blow = tmp_path / "blow.json"
    blow.write_text(json.dumps({"format_version": 1, "num_spins": 2, "couplings": [[0, 1, 1e300]],
                                "fields": [0, 0]}))
    assert main(["solve", "--engine", "cim", "--input", str(blow), "--ramp-steps", "50", "--dt", "1e10",
                 "--coupling-strength", "1e10", "--saturation", "1e308"]) == 4
    assert json.loads(capsys.readouterr().err)["step"] is not None
    assert main(["solve", "--engine", "oracle", "--generate", "ising-random:n=30"]) == 1
    capsys.readouterr()
    assert main(["solve", "--generate", "knapsack:n=3", "--sweeps", "0"]) == 2


def test_config_file_with_flag_override(tmp_path, eq_file, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"format_version": 1, "engine": "oracle", "input": str(eq_file), "seed": 1}))
    assert main(["solve", "--config", str(cfg), "--seed", "4"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["config"]["seed"] == 4 and doc["solution"]["x"] == [1, 0]
    cfg.write_text(json.dumps({"engine": "oracle", "bogus": 1}))
    assert main(["solve", "--config", str(cfg)]) == 2


def test_generate_subcommand(tmp_path):
    out = tmp_path / "k.lp"
    assert main(["generate", "knapsack:n=3", "--seed", "7", "--format", "lp-text", "--out", str(out)]) == 0
    assert "max:" in out.read_text()
    assert main(["generate", "maxcut-ring:n=4", "--format", "lp-text"]) == 2


def test_console_entry_point(eq_file):
    proc = subprocess.run([sys.executable, "-m", "isingopt.cli", "solve", "--engine", "oracle",
                           "--input", str(eq_file)], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["solution"]["feasible"]
