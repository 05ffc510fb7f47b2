import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from qfi_forge.cli import main


def write_config(tmp_path, **overrides):
    config = {
        "channel": {"kind": "builtin", "name": "dephasing", "p": 0.75},
        "method": "par_bounds",
        "n": 4,
        "options": {"seed": 0},
        "output": {"path": str(tmp_path / "out.csv"), "format": "csv"},
    }
    config.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return path, config


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestRun:
    def test_bounds_series_csv(self, tmp_path):
        path, config = write_config(tmp_path)
        assert main(["run", str(path)]) == 0
        rows = read_csv(tmp_path / "out.csv")
        assert [int(r["n"]) for r in rows] == [1, 2, 3, 4]
        per_use = [float(r["value"]) / int(r["n"]) for r in rows]
        assert per_use[0] == pytest.approx(0.25, abs=1e-6)
        assert all(a <= b + 1e-9 for a, b in zip(per_use, per_use[1:]))

    def test_mop_sweep_rows(self, tmp_path):
        path, _ = write_config(tmp_path, method="mop_parallel", n=[1, 2])
        assert main(["run", str(path)]) == 0
        rows = read_csv(tmp_path / "out.csv")
        assert len(rows) == 2
        vals = [float(r["value"]) for r in rows]
        assert vals[0] == pytest.approx(0.25, abs=1e-5)
        assert vals[1] == pytest.approx(0.5104167, abs=1e-5)

    def test_missing_bond_dim_fails_with_field(self, tmp_path, capsys):
        path, _ = write_config(tmp_path, method="iss_tnet_parallel", n=2)
        assert main(["run", str(path)]) == 1
        assert "mps_bond_dim" in capsys.readouterr().err

    def test_unknown_method(self, tmp_path, capsys):
        path, _ = write_config(tmp_path, method="magic")
        assert main(["run", str(path)]) == 1
        assert "method" in capsys.readouterr().err

    def test_override(self, tmp_path):
        path, _ = write_config(tmp_path, method="par_bounds", n=3)
        assert main(["run", str(path), "--override", "method=ad_bounds"]) == 0
        rows = read_csv(tmp_path / "out.csv")
        assert rows[0]["method"] == "ad_bounds"

    def test_deterministic_output(self, tmp_path):
        path, _ = write_config(tmp_path, method="iss_channel", n=1,
                               options={"seed": 3, "ancilla_dim": 2})
        main(["run", str(path)])
        first = (tmp_path / "out.csv").read_text()
        main(["run", str(path)])
        second = (tmp_path / "out.csv").read_text()

        def strip_wall(text):
            return [",".join(line.split(",")[:-1])
                    for line in text.splitlines()]

        assert strip_wall(first) == strip_wall(second)

    def test_worker_pool(self, tmp_path):
        path, _ = write_config(tmp_path, method="mop_parallel", n=[1, 2])
        assert main(["run", str(path), "--jobs", "2"]) == 0
        rows = read_csv(tmp_path / "out.csv")
        assert [int(r["n"]) for r in rows] == [1, 2]
        assert float(rows[0]["value"]) == pytest.approx(0.25, abs=1e-5)

    def test_json_output(self, tmp_path):
        path, _ = write_config(
            tmp_path, method="mop_channel", n=1,
            output={"path": str(tmp_path / "out.json"), "format": "json"},
        )
        assert main(["run", str(path)]) == 0
        rows = json.loads((tmp_path / "out.json").read_text())
        assert rows[0]["method"] == "mop_channel"
        assert float(rows[0]["value"]) == pytest.approx(0.25, abs=1e-5)

    def test_iss_custom_strategy_file(self, tmp_path):
        strategy = {
            "spaces": [{"label": "IN", "dim": 2}, {"label": "OUT", "dim": 2}],
            "nodes": [
                {"type": "var", "name": "RHO", "spaces": ["IN"],
                 "output_spaces": ["IN"]},
                {"type": "channel", "name": "CH", "in": ["IN"],
                 "out": ["OUT"],
                 "channel": {"kind": "builtin", "name": "dephasing",
                             "p": 0.75}},
                {"type": "var", "name": "PI", "spaces": ["OUT"],
                 "is_measurement": True},
            ],
        }
        sfile = tmp_path / "strategy.json"
        sfile.write_text(json.dumps(strategy))
        path, _ = write_config(
            tmp_path, method="iss_custom", n=1,
            options={"seed": 0, "strategy_file": str(sfile)},
        )
        del_config = json.loads(path.read_text())
        del del_config["channel"]
        path.write_text(json.dumps(del_config))
        assert main(["run", str(path)]) == 0
        rows = read_csv(tmp_path / "out.csv")
        assert float(rows[0]["value"]) == pytest.approx(0.25, abs=1e-5)


class TestCompare:
    def test_align_and_gap_column(self, tmp_path, capsys):
        p1, _ = write_config(tmp_path, method="ad_bounds", n=3,
                             output={"path": str(tmp_path / "bounds.csv"),
                                     "format": "csv"})
        main(["run", str(p1)])
        p2, _ = write_config(tmp_path, method="mop_parallel", n=[1, 2, 3],
                             output={"path": str(tmp_path / "mop.csv"),
                                     "format": "csv"})
        main(["run", str(p2)])
        assert main(["compare", str(tmp_path / "bounds.csv"),
                     str(tmp_path / "mop.csv")]) == 0
        out = capsys.readouterr().out
        lines = out.strip().splitlines()
        assert "gap_to_bound" in lines[0]
        # every gap nonnegative (bounds dominate achieved values)
        for line in lines[1:]:
            gap = float(line.split("\t")[-1])
            assert gap >= -1e-6

    def test_grid_mismatch(self, tmp_path, capsys):
        p1, _ = write_config(tmp_path, method="mop_channel", n=[1],
                             output={"path": str(tmp_path / "a.csv"),
                                     "format": "csv"})
        main(["run", str(p1)])
        rows = read_csv(tmp_path / "a.csv")
        rows[0]["n"] = "7"
        rows[0]["method"] = "iss_channel"
        with open(tmp_path / "b.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
        assert main(["compare", str(tmp_path / "a.csv"),
                     str(tmp_path / "b.csv")]) == 1
        assert "grid" in capsys.readouterr().err

    def test_empty_input_usage_error(self):
        with pytest.raises(SystemExit):
            main(["compare"])


def test_console_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "qfi_forge.cli", "--help"],
        capture_output=True, text=True,
    )
    assert res.returncode == 0
    assert "run" in res.stdout and "compare" in res.stdout
