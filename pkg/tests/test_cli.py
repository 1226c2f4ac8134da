import json
import subprocess
import sys

from permit_cmra.cli import EXIT_INVALID, EXIT_OK, EXIT_ROUND_LIMIT, main

CONFIG = {
    "goods": [
        {"good_id": 0, "pollutant_name": "GHG", "unit_label": "kgCO2e", "cap": 3},
        {"good_id": 1, "pollutant_name": "NutrientRunoff", "unit_label": "kgNe", "cap": 3},
    ],
    "bidders": [{"correlation": 0.5}, {"correlation": 0.1}],
    "batch": {"instances": 3, "master_seed": 1},
}


def cfg_file(tmp_path, doc=CONFIG):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(doc))
    return str(p)


def test_check(tmp_path, capsys):
    assert main(["check", "--config", cfg_file(tmp_path)]) == EXIT_OK
    assert "valid batch config" in capsys.readouterr().out


def test_check_invalid(tmp_path, capsys):
    doc = json.loads(json.dumps(CONFIG))
    doc["goods"][0]["cap"] = -1
    assert main(["check", "--config", cfg_file(tmp_path, doc)]) == EXIT_INVALID
    assert "goods[0].cap" in capsys.readouterr().err


def test_run(tmp_path):
    out = tmp_path / "run"
    assert main(["run", "--config", cfg_file(tmp_path), "--out", str(out)]) == EXIT_OK
    assert (out / "result.json").exists() and (out / "manifest.json").exists()


def test_run_round_limit(tmp_path):
    doc = dict(CONFIG, engine={"max_rounds": 1})
    assert main(["run", "--config", cfg_file(tmp_path, doc), "--out", str(tmp_path / "o")]) == EXIT_ROUND_LIMIT


def test_batch_overrides_and_plotdata(tmp_path):
    out = tmp_path / "batch"
    rc = main(["batch", "--config", cfg_file(tmp_path), "--out", str(out), "--instances", "2", "--seed", "40"])
    assert rc == EXIT_OK
    doc = json.loads((out / "summary.json").read_text())
    assert [r["seed"] for r in doc["per_instance"]] == [40, 41]
    assert main(["plotdata", "--summary", str(out / "summary.json"), "--out", str(tmp_path / "p")]) == EXIT_OK
    assert (tmp_path / "p" / "fig2_transaction_price.csv").exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "permit_cmra", "check", "--config", cfg_file(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
