import json
import subprocess
import sys
from pathlib import Path

from gibbskit.cli import main, probe_regions

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _body(path: Path) -> list[str]:
    lines = path.read_text().splitlines()
    header = json.loads(lines[0])
    assert header["schema"] == "gibbskit.report/1"
    return lines[1:]


def test_ising_demo_passes(tmp_path, capsys):
    out = tmp_path / "report.jsonl"
    assert main(["--config", str(CONFIGS / "ising-1d.json"), "--out", str(out)]) == 0
    table = capsys.readouterr().out
    assert "FAIL" not in table
    records = [json.loads(line) for line in _body(out)]
    assert records and all(r["pass"] for r in records)
    assert {"check", "property", "region", "boundary", "residual", "tolerance", "pass"} <= set(records[0])


def test_report_body_is_deterministic(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    cfg = str(CONFIGS / "ising-1d.json")
    assert main(["--config", cfg, "--suite", "sample", "--out", str(a)]) == 0
    assert main(["--config", cfg, "--suite", "sample", "--out", str(b)]) == 0
    assert _body(a) == _body(b)


def test_seed_changes_sampler_output(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    cfg = str(CONFIGS / "ising-1d.json")
    main(["--config", cfg, "--suite", "sample", "--out", str(a)])
    main(["--config", cfg, "--suite", "sample", "--seed", "11", "--out", str(b)])
    assert _body(a) != _body(b)


def test_negative_control_fails():
    assert main(["--config", str(CONFIGS / "ising-1d-uniform.json")]) == 1


def test_malformed_model_exits_2(tmp_path, capsys):
    model = tmp_path / "m.json"
    model.write_text(json.dumps({"schema": "gibbskit.model/1", "dimension": 1}))
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"schema": "gibbskit.config/1", "model": "m.json"}))
    assert main(["--config", str(cfg)]) == 2
    assert "invalid" in capsys.readouterr().err


def test_bad_tolerance_scale():
    assert main(["--config", str(CONFIGS / "ising-1d.json"), "--tolerance-scale", "0"]) == 2


def test_golden_mean_config_passes():
    assert main(["--config", str(CONFIGS / "golden-mean.json"), "--suite", "spec-check"]) == 0


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "gibbskit", "--config", str(CONFIGS / "ising-1d.json"), "--suite", "transfer-1d"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    assert "checks passed" in proc.stdout


def test_probe_regions_are_bounded():
    regs = probe_regions(1, 3)
    assert regs and all(1 <= len(r) <= 3 for r in regs)
    assert all(len(r) <= 4 for r in probe_regions(2, 4))
