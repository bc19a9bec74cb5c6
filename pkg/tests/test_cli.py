import json
import os

import pytest

from scenquery.cli import main
from scenquery.demo import write_demo_dataset


@pytest.fixture(scope="module")
def demo_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("demo")
    program = write_demo_dataset(str(directory))
    return str(directory), program


class TestQuery:
    def test_match_exit_zero_json_lines(self, demo_dir, capsys):
        directory, program = demo_dir
        code = main(["query", "-p", program, "-d", directory, "-m", "10"])
        out = capsys.readouterr().out
        assert code == 0
        lines = [json.loads(line) for line in out.splitlines() if line.strip()]
        assert len(lines) == 1
        report = lines[0]
        assert report["matched"] is True
        assert report["correspondence"]["ped"] == "human.pedestrian.adult_12"
        assert report["stats"]["candidates_tried"] >= 1

    def test_no_match_exit_one(self, demo_dir, tmp_path, capsys):
        directory, program = demo_dir
        empty = tmp_path / "empty"
        empty.mkdir()
        code = main(["query", "-p", program, "-d", str(empty), "-m", "10"])
        capsys.readouterr()
        assert code == 1

    def test_malformed_program_exit_two(self, demo_dir, tmp_path, capsys):
        directory, _ = demo_dir
        bad = tmp_path / "bad.scenic"
        bad.write_text("behavior B():\n  do ()\n")
        code = main(["query", "-p", str(bad), "-d", directory, "-m", "10"])
        err = capsys.readouterr().err
        assert code == 2
        assert "error" in err or ":" in err

    def test_md_format(self, demo_dir, capsys):
        directory, program = demo_dir
        code = main(["query", "-p", program, "-d", directory, "-m", "10",
                     "--format", "md", "--jobs", "1"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.startswith("| trace |")
        assert "True" in out


class TestValidate:
    def test_valid_dir_exit_zero(self, demo_dir, capsys):
        directory, _ = demo_dir
        code = main(["validate", "-d", directory])
        out = capsys.readouterr().out
        assert code == 0
        assert "ok" in out
        assert "warning" in out  # the transcription quirk is reported

    def test_partial_row_listed_as_invariant_error(self, demo_dir, tmp_path, capsys):
        import json as j

        directory, _ = demo_dir
        src = os.path.join(directory, "scene-0103.trace.json")
        data = j.load(open(src))
        data["tracks"][0]["xs"][5] = None  # y remains: partial position row
        bad_dir = tmp_path / "ds"
        bad_dir.mkdir()
        (bad_dir / "bad.trace.json").write_text(j.dumps(data))
        code = main(["validate", "-d", str(bad_dir)])
        out = capsys.readouterr().out
        assert code == 1
        assert "InvariantError" in out and "partial sample row" in out

    def test_ts_mismatch_warns(self, demo_dir, tmp_path, capsys):
        import json as j

        directory, _ = demo_dir
        data = j.load(open(os.path.join(directory, "scene-0103.trace.json")))
        data["tracks"][0]["ts"][3] = 1.75  # off by 0.25 s
        ds = tmp_path / "ds2"
        ds.mkdir()
        (ds / "drift.trace.json").write_text(j.dumps(data))
        code = main(["validate", "-d", str(ds)])
        out = capsys.readouterr().out
        assert code == 0
        assert "warning" in out and "deviates" in out


class TestExport:
    def test_statechart(self, demo_dir, tmp_path, capsys):
        directory, program = demo_dir
        out_path = tmp_path / "chart.puml"
        code = main(["export", "-p", program, "--kind", "statechart",
                     "-o", str(out_path)])
        capsys.readouterr()
        assert code == 0
        text = out_path.read_text()
        for name in ("EgoBehavior", "TryInterrupt", "Try", "Interrupt", "Do",
                     "FollowLaneBehavior", "BrakeBehavior"):
            assert f'"{name}"' in text

    def test_verifier(self, demo_dir, tmp_path, capsys):
        directory, program = demo_dir
        out_path = tmp_path / "machine.ucl"
        code = main(["export", "-p", program, "--kind", "verifier",
                     "-o", str(out_path)])
        capsys.readouterr()
        assert code == 0
        assert "module TryInterrupt_0_0 {" in out_path.read_text()

    def test_smt_requires_trace(self, demo_dir, tmp_path, capsys):
        directory, program = demo_dir
        code = main(["export", "-p", program, "--kind", "smt",
                     "-o", str(tmp_path / "x.smt2")])
        err = capsys.readouterr().err
        assert code == 2 and "--trace" in err

    def test_smt_emission(self, demo_dir, tmp_path, capsys):
        directory, program = demo_dir
        trace = os.path.join(directory, "scene-0103.trace.json")
        out_path = tmp_path / "cond.smt2"
        code = main(["export", "-p", program, "--kind", "smt", "-o", str(out_path),
                     "--trace", trace, "--timestep", "10"])
        capsys.readouterr()
        assert code == 0
        text = out_path.read_text()
        assert text.startswith("(set-logic QF_NRA)")
        assert "(assert (and (<= 1 range0) (<= range0 10)))" in text


class TestBenchCli:
    def test_tiny_bench_md(self, capsys):
        code = main(["bench", "--family", "dountil_n", "--n", "1..2",
                     "--t", "6..6", "-k", "2", "--seed", "3"])
        out = capsys.readouterr().out
        assert code == 0
        assert "| dountil_n (N) |" in out

    def test_tiny_bench_json(self, capsys):
        code = main(["bench", "--family", "do_n", "--n", "1..1",
                     "--t", "6..6", "-k", "1", "--seed", "3",
                     "--format", "json"])
        out = capsys.readouterr().out
        assert code == 0
        payload = json.loads(out.strip().splitlines()[-1])
        assert "do_n" in payload


def test_backend_command(capsys):
    code = main(["backend"])
    out = capsys.readouterr().out
    assert code == 0
    info = json.loads(out)
    assert "compiled" in info
