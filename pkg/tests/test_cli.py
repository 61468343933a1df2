import json
import subprocess
import sys
from pathlib import Path

import pytest
from jsonschema import validate as schema_validate

from normality_lab import cantor_system, save_system
from normality_lab.cli import main

SCHEMA = json.loads(
    (Path(__file__).parent.parent / "src" / "normality_lab" / "schemas"
     / "summary.schema.json").read_text())


@pytest.fixture(scope="module")
def cantor_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("systems") / "cantor.json"
    save_system(cantor_system(), path)
    return str(path)


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr().out
    return code, out


class TestClassifyCommand:
    def test_cantor_base3(self, cantor_file, capsys):
        code, out = run_cli(["classify", "--system", cantor_file,
                             "--base", "3", "--format", "json"], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["results"]["verdict"] == "MatchesObstructionForm"
        assert payload["results"]["normality_witness"]["found"] is False

    def test_cantor_base2(self, cantor_file, capsys):
        code, out = run_cli(["classify", "--system", cantor_file,
                             "--base", "2", "--format", "json"], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["results"]["verdict"] == "FailsItem1"
        assert payload["results"]["normality_witness"] == {
            "found": True, "map": 1}


class TestExitCodes:
    def test_malformed_rational(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"maps": [{"s": "1/0", "t": "0"}], "weights": ["1"]}')
        code = main(["classify", "--system", str(bad), "--base", "2"])
        assert code == 4

    def test_invalid_system(self, tmp_path, capsys):
        bad = tmp_path / "invalid.json"
        bad.write_text(json.dumps({
            "maps": [{"s": "1/3", "t": "0"}, {"s": "1/3", "t": "2/3"}],
            "weights": ["1/2", "1/3"], "hull": ["0", "1"]}))
        code = main(["validate", "--system", str(bad)])
        assert code == 2

    def test_bad_flag(self, cantor_file, capsys):
        code = main(["classify", "--system", cantor_file])  # missing --base
        assert code == 4

    def test_unreadable_system(self, capsys):
        code = main(["validate", "--system", "/nonexistent/x.json"])
        assert code != 0


class TestOutputs:
    def test_csv_deterministic(self, cantor_file, tmp_path, capsys):
        outs = []
        for i in range(2):
            path = tmp_path / f"orbit{i}.csv"
            code = main(["orbit", "--system", cantor_file, "--base", "2",
                         "--length", "50", "--seed", "9",
                         "--out", str(path)])
            assert code == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]

    def test_csv_metadata_header(self, cantor_file, capsys):
        code, out = run_cli(["digits", "--system", cantor_file, "--base", "3",
                             "--count", "5", "--seed", "1"], capsys)
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "# tool=normality-lab"
        assert any(line.startswith("# system_hash=") for line in lines)
        assert any(line.startswith("# parameters=") for line in lines)
        assert "n,digit" in lines

    @pytest.mark.parametrize("argv", [
        ["validate"],
        ["classify", "--base", "3"],
        ["fourier", "--q", "7/3"],
        ["decay", "--j-max", "8", "--per-band", "16"],
        ["orbit", "--base", "2", "--length", "30"],
        ["digits", "--base", "3", "--count", "20"],
        ["normality", "--base", "2", "--length", "200", "--q-max", "3",
         "--guard", "8"],
        ["martingale", "--base", "2", "--q", "1", "--N-list", "20,50"],
    ])
    def test_json_summaries_validate_against_schema(self, cantor_file,
                                                    capsys, argv):
        code, out = run_cli(argv + ["--system", cantor_file,
                                    "--format", "json"], capsys)
        assert code == 0
        schema_validate(json.loads(out), SCHEMA)

    @pytest.mark.parametrize("argv", [
        ["beta-orbit", "--beta", "5/2", "--x", "1/2", "--length", "10"],
        ["power-orbit", "--x", "3/2", "--length", "10"],
        ["correlations", "--source", "uniform", "--length", "500"],
        ["spacings", "--source", "uniform", "--length", "500",
         "--s-grid", "0:3:0.5"],
    ])
    def test_systemless_summaries_validate(self, capsys, argv):
        code, out = run_cli(argv + ["--format", "json"], capsys)
        assert code == 0
        schema_validate(json.loads(out), SCHEMA)

    def test_entry_point_smoke(self, cantor_file):
        proc = subprocess.run(
            [sys.executable, "-m", "normality_lab.cli", "classify",
             "--system", cantor_file, "--base", "3"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert "MatchesObstructionForm" not in proc.stderr


class TestWorkerPool:
    def test_env_override(self, monkeypatch):
        from normality_lab.experiments import parallel_map, pool_size
        monkeypatch.setenv("NORMALITY_LAB_THREADS", "3")
        assert pool_size() == 3
        assert parallel_map(lambda x: x * x, range(7)) == [i * i
                                                           for i in range(7)]

    def test_env_garbage_rejected(self, monkeypatch):
        from normality_lab.errors import ConfigParseError
        from normality_lab.experiments import pool_size
        monkeypatch.setenv("NORMALITY_LAB_THREADS", "many")
        with pytest.raises(ConfigParseError):
            pool_size()

    def test_pool_results_match_serial(self, cantor_file, monkeypatch,
                                       capsys):
        outputs = []
        for threads in ("1", "4"):
            monkeypatch.setenv("NORMALITY_LAB_THREADS", threads)
            code, out = run_cli(["normality", "--system", cantor_file,
                                 "--base", "2", "--length", "300",
                                 "--samples", "4", "--q-max", "3",
                                 "--guard", "8", "--format", "json"], capsys)
            assert code == 0
            outputs.append(out)
        assert outputs[0] == outputs[1]
