import json
import threading
from argparse import Namespace
from pathlib import Path

import pytest

from helpers import FIXTURES, solver_script

from rdolt.cli import build_config, main, parse_config_file
from rdolt.errors import ConfigError
from rdolt.model import RunConfig, RunRecord, Task
from rdolt.store import append_run_record, read_run_records

PAPER_QUESTION = ("Take the last letter of each word in the sentence: "
                  "'Artificial intelligence is the future' and concatenate them "
                  "to form a new string.")


def record(i=0):
    return RunRecord(run_id=f"r{i}", task=Task(id=f"t{i}", statement="q"),
                     config=RunConfig(), final_answer=str(i),
                     normalized_answer=str(i))


class TestStore:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "runs.jsonl"
        original = record()
        append_run_record(path, original)
        assert read_run_records(path) == [original]

    def test_concurrent_appends_never_interleave(self, tmp_path):
        path = tmp_path / "runs.jsonl"
        per_thread = 20

        def writer(k):
            for i in range(per_thread):
                append_run_record(path, record(k * per_thread + i))

        threads = [threading.Thread(target=writer, args=(k,)) for k in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        lines = path.read_text().splitlines()
        assert len(lines) == 8 * per_thread
        parsed = [json.loads(line) for line in lines]  # every line complete
        assert {p["run_id"] for p in parsed} == {f"r{i}" for i in range(8 * per_thread)}

    def test_two_sequential_appends(self, tmp_path):
        path = tmp_path / "runs.jsonl"
        append_run_record(path, record(1))
        append_run_record(path, record(2))
        assert [r.run_id for r in read_run_records(path)] == ["r1", "r2"]


class TestConfigFile:
    def test_parse(self, tmp_path):
        cfg = tmp_path / "run.conf"
        cfg.write_text("# comment\nthreshold=35\ntemperature=0.2\nscorer_mode=judge\n")
        values = parse_config_file(cfg)
        assert values == {"threshold": "35", "temperature": "0.2",
                          "scorer_mode": "judge"}

    def test_bad_line(self, tmp_path):
        cfg = tmp_path / "run.conf"
        cfg.write_text("no equals sign\n")
        with pytest.raises(ConfigError):
            parse_config_file(cfg)

    def test_precedence_flag_over_file_over_default(self, tmp_path):
        cfg = tmp_path / "run.conf"
        cfg.write_text("threshold=35\nn_thoughts=5\n")
        args = Namespace(config=str(cfg), threshold=25, n_thoughts=None, scorer=None,
                         kpm_strategy=None, variant=None, model=None,
                         temperature=None, seed=None, backend=None)
        config = build_config(args)
        assert config.threshold == 25   # flag wins
        assert config.n_thoughts == 5   # file beats default
        assert config.temperature == 0.4  # default survives

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.conf"
        cfg.write_text("mystery=1\n")
        args = Namespace(config=str(cfg), threshold=None, n_thoughts=None,
                         scorer=None, kpm_strategy=None, variant=None, model=None,
                         temperature=None, seed=None, backend=None)
        with pytest.raises(ConfigError):
            build_config(args)


class TestCmdRun:
    def test_judge_replay_prints_answer(self, tmp_path, capsys):
        out = tmp_path / "runs.jsonl"
        code = main([
            "run", "--question", PAPER_QUESTION,
            "--backend", f"scripted:{FIXTURES / 'lastletter.json'}",
            "--out", str(out),
        ])
        captured = capsys.readouterr()
        assert code == 0
        assert "lesee" in captured.out
        assert "Easy: 1 round(s), selected 2/3" in captured.out
        stored = read_run_records(out)
        assert stored[0].normalized_answer == "lesee"

    def test_deterministic_scorer_run(self, tmp_path, capsys):
        script = tmp_path / "script.json"
        script.write_text(json.dumps(solver_script(PAPER_QUESTION)))
        out = tmp_path / "runs.jsonl"
        code = main([
            "run", "--question", PAPER_QUESTION, "--scorer", "deterministic",
            "--threshold", "20", "--source", "lastletter",
            "--backend", f"scripted:{script}", "--out", str(out),
        ])
        captured = capsys.readouterr()
        assert code == 0
        assert "lesee" in captured.out

    def test_missing_question_usage_error(self, capsys):
        assert main(["run"]) == 2
        assert "question" in capsys.readouterr().err

    def test_threshold_out_of_range(self, capsys):
        code = main(["run", "--question", "q", "--threshold", "45",
                     "--backend", "scripted:/nonexistent"])
        assert code == 2
        assert "threshold" in capsys.readouterr().err

    def test_grading_with_gold(self, tmp_path, capsys):
        out = tmp_path / "runs.jsonl"
        code = main([
            "run", "--question", PAPER_QUESTION, "--gold", "lesee",
            "--source", "lastletter",
            "--backend", f"scripted:{FIXTURES / 'lastletter.json'}",
            "--out", str(out),
        ])
        assert code == 0
        assert "Grade: correct" in capsys.readouterr().out

    def test_failed_run_persists_record(self, tmp_path, capsys):
        script = tmp_path / "script.json"
        script.write_text(json.dumps(["junk"] * 3))
        out = tmp_path / "runs.jsonl"
        code = main(["run", "--question", "q", "--backend", f"scripted:{script}",
                     "--out", str(out)])
        assert code == 1
        stored = read_run_records(out)
        assert stored[0].status == "failed"

    def test_vanilla_baseline_flag(self, tmp_path, capsys):
        script = tmp_path / "script.json"
        script.write_text(json.dumps(["Final Answer: lesee"]))
        out = tmp_path / "runs.jsonl"
        code = main(["run", "--question", "q", "--vanilla", "--source", "lastletter",
                     "--backend", f"scripted:{script}", "--out", str(out)])
        assert code == 0
        assert "Final answer: lesee" in capsys.readouterr().out

    def test_task_file(self, tmp_path, capsys):
        task_file = tmp_path / "task.json"
        task_file.write_text(json.dumps({
            "id": "file-task", "statement": PAPER_QUESTION, "source": "lastletter",
        }))
        out = tmp_path / "runs.jsonl"
        code = main(["run", "--task-file", str(task_file),
                     "--backend", f"scripted:{FIXTURES / 'lastletter.json'}",
                     "--out", str(out)])
        assert code == 0
        assert read_run_records(out)[0].task.id == "file-task"


class TestCmdBench:
    def make_dataset(self, tmp_path, count=3):
        from rdolt.bench import gen_last_letter
        rows = []
        for item in gen_last_letter([], seed=50, count=count):
            rows.append({"question": item.task.statement,
                         "answer": item.task.gold_answer})
        path = tmp_path / "data.jsonl"
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        return path

    def bench_args(self, tmp_path, dataset, *extra):
        script = tmp_path / "bench_script.json"
        # per-item fresh script is rebuilt by the CLI factory, one script fits all
        return ["bench", "--dataset", str(dataset), "--format", "lastletter_jsonl",
                "--scorer", "deterministic", "--threshold", "20",
                "--backend", f"scripted:{script}", *extra]

    def write_item_script(self, tmp_path, dataset):
        # all items share one scripted reply set only when they share a sentence,
        # so bench CLI tests use a single-item dataset
        rows = [json.loads(line) for line in Path(dataset).read_text().splitlines()]
        script = solver_script(rows[0]["question"])
        (tmp_path / "bench_script.json").write_text(json.dumps(script))

    def test_single_setting_eval(self, tmp_path, capsys):
        dataset = self.make_dataset(tmp_path, count=1)
        self.write_item_script(tmp_path, dataset)
        code = main(self.bench_args(tmp_path, dataset))
        captured = capsys.readouterr()
        assert code == 0
        assert "items attempted: 1" in captured.out

    def test_threshold_sweep_csv(self, tmp_path, capsys):
        dataset = self.make_dataset(tmp_path, count=1)
        self.write_item_script(tmp_path, dataset)
        out_prefix = tmp_path / "report"
        code = main(self.bench_args(tmp_path, dataset, "--sweep", "thresholds",
                                    "--out", str(out_prefix)))
        assert code == 0
        csv_lines = (tmp_path / "report.csv").read_text().strip().splitlines()
        settings = [line.split(",")[1] for line in csv_lines[1:]]
        assert settings == ["default/25", "default/30", "default/35", "default/40"]
        assert "tau>=25" in (tmp_path / "report.txt").read_text()

    def test_thought_sweep_rows(self, tmp_path, capsys):
        dataset = self.make_dataset(tmp_path, count=1)
        rows = [json.loads(line) for line in Path(dataset).read_text().splitlines()]
        # the 7-thought pass needs the larger reply set; generate per count
        responses = []
        for n in (3, 5, 7):
            responses = solver_script(rows[0]["question"], n=n)
        # a fresh factory reloads the same file each run, so include the largest
        (tmp_path / "bench_script.json").write_text(json.dumps(responses))
        code = main(self.bench_args(tmp_path, dataset, "--sweep", "thoughts"))
        captured = capsys.readouterr()
        assert code == 0
        assert "thoughts" in captured.out

    def test_limit(self, tmp_path, capsys):
        dataset = self.make_dataset(tmp_path, count=3)
        self.write_item_script(tmp_path, dataset)
        code = main(self.bench_args(tmp_path, dataset, "--limit", "1"))
        captured = capsys.readouterr()
        assert code == 0
        assert "items attempted: 1" in captured.out

    def test_loader_failure_nonzero(self, tmp_path, capsys):
        missing = tmp_path / "nope.jsonl"
        code = main(["bench", "--dataset", str(missing),
                     "--format", "lastletter_jsonl", "--backend", "scripted:x"])
        assert code == 1
