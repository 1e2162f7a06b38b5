import json

import pytest
from pydantic import ValidationError

from cli_corpus import Corpus, CorpusEntry, CorpusFilterError, CorpusRunner, format_event, main
from sos_compiler import from_sdpa

MOTZKIN = "x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1"
STABLE_MATRIX = "[[-1, 1], [-1, -1]]"


@pytest.fixture(scope="module")
def runner():
    return CorpusRunner()


class TestCommands:
    def test_savings(self, capsys):
        assert main(["savings", "--n", "2", "--d", "4", "--quiet"]) == 0
        assert "vars_saved=105 eqs_saved=36" in capsys.readouterr().out

    def test_savings_table(self, capsys):
        assert main(["savings", "--table", "--n-max", "3", "--d-max", "3", "--quiet"]) == 0
        assert "eqs_saved" in capsys.readouterr().out

    def test_usage_errors(self, capsys):
        assert main(["no-such-command"]) == 2
        assert main(["check-sos", "x1 + $", "--quiet"]) == 2
        assert "PolynomialParseError" in capsys.readouterr().err

    def test_help(self):
        assert main(["--help"]) == 0

    def test_check_sos_json_to_stdout(self, capsys):
        assert main(["check-sos", MOTZKIN, "--json", "-", "--quiet"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["status"] == "infeasible"
        assert report["polynomial"] == MOTZKIN

    def test_check_sos_prints_gram(self, capsys):
        assert main(["check-sos", "x1^2 + x2^2", "--quiet"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("FEASIBLE")
        assert "x1" in out

    def test_export_only(self, tmp_path):
        out = tmp_path / "motzkin.dat-s"
        assert main(["check-sos", MOTZKIN, "--solver", "export-only", "--reduction", "none",
                     "--out", str(out), "--quiet"]) == 0
        assert from_sdpa(out.read_text()).blocks == [10]

    def test_export_sdpa_search(self, capsys):
        assert main(["export-sdpa", "--field", "-x1 + x2", "-x1 - x2", "--degree", "2", "--quiet"]) == 0
        problem = from_sdpa(capsys.readouterr().out)
        assert problem.block_labels == ["V", "-Vdot"]
        assert problem.n_free > 0

    def test_export_sdpa_needs_input(self):
        assert main(["export-sdpa", "--quiet"]) == 2

    def test_common_lyapunov_then_verify(self, tmp_path, capsys):
        report_file = tmp_path / "report.json"
        assert main(["common-lyapunov", "--matrix", STABLE_MATRIX, "--matrix", "[[-2, 0.5], [-0.5, -1]]",
                     "--degree", "2", "--json", str(report_file), "--quiet"]) == 0
        report = json.loads(report_file.read_text())
        assert report["minimal_degree"] == 2
        assert report["certificate"]["kind"] == "lyapunov"

        assert main(["verify", str(report_file), "--quiet"]) == 0
        assert "VERIFIED" in capsys.readouterr().out

        certificate = report["certificate"]
        certificate["gram_blocks"][1]["gram"][0][0] += 1.0
        tampered = tmp_path / "tampered.json"
        tampered.write_text(json.dumps(certificate))
        assert main(["verify", str(tampered), "--quiet"]) == 1

    def test_verify_missing_file(self, tmp_path):
        assert main(["verify", str(tmp_path / "missing.json"), "--quiet"]) == 2

    def test_find_lyapunov_from_system_file(self, tmp_path, capsys):
        system_file = tmp_path / "system.json"
        system_file.write_text(json.dumps({"variables": 2, "matrices": [[[0.5, 0.2], [0.0, 0.5]]], "time": "dt"}))
        assert main(["find-lyapunov", "--system", str(system_file), "--degree", "2", "--quiet"]) == 0
        assert "minimal degree 2" in capsys.readouterr().out

    def test_power_certificate(self, tmp_path):
        report_file = tmp_path / "power.json"
        assert main(["power-cert", "--V", "x1^2 + x2^2", "--field", " -x1^3", " -x2^3", "--k-max", "2",
                     "--json", str(report_file), "--quiet"]) == 0
        report = json.loads(report_file.read_text())
        assert report["k"] == 0
        assert report["certificate"]["kind"] == "power"
        assert main(["verify", str(report_file), "--quiet"]) == 0

    def test_power_precondition_is_usage_error(self, capsys):
        assert main(["power-cert", "--V", "x1^2 - x2^2", "--field", " -x1", " -x2", "--quiet"]) == 2
        assert "PreconditionError" in capsys.readouterr().err

    def test_console_log_goes_to_stderr(self, capsys):
        assert main(["check-sos", "x1^2 + x2^2", "--verbose"]) == 0
        err = capsys.readouterr().err
        assert "SDP blocks" in err


class TestCorpus:
    def test_entries_load(self, runner):
        names = runner.corpus.names()
        assert "motzkin" in names
        assert len(names) == len(set(names))
        assert set(runner.list_entries().columns) >= {"name", "task", "slow"}

    def test_filter_globs(self, runner):
        assert [e.name for e in runner.select("switched-*")] == [
            "switched-stable-pair", "switched-opposite-pair", "switched-schur-pair-dt"]
        assert all(not e.slow for e in runner.select(include_slow=False))

    def test_power_entries(self, runner):
        entries = {e.name: e for e in runner.select("*power*")}
        assert entries["planar-power-degree4-field"].task == "planar-power"
        assert entries["planar-power-degree4-field"].system.to_system().n_vars == 2
        gradient = entries["power-nonsos-form"]
        assert gradient.task == "power"
        assert gradient.system.to_system().n_vars == 3
        assert all(entries[name].slow for name in ("planar-power-degree4-field", "power-nonsos-form"))

    @pytest.mark.slow
    def test_power_entries_run(self, runner):
        report = runner.run("planar-power-degree4-field,power-nonsos-form")
        assert report.mismatches == 0, runner.to_frame(report).to_string()

    def test_filter_suggestion(self, runner):
        with pytest.raises(CorpusFilterError) as info:
            runner.select("motzkn")
        assert info.value.suggestion is not None
        assert info.value.suggestion.startswith("motzkin")

    def test_run_single_entry(self, runner):
        report = runner.run("motzkin")
        assert len(report.entries) == 1
        assert report.exit_code == 0
        frame = runner.to_frame(report)
        assert list(frame["ok"]) == ["yes"]

    def test_cli_corpus_run(self, capsys):
        assert main(["corpus", "run", "--filter", "motzkin,power-linear", "--json", "-", "--quiet"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert [e["name"] for e in report["entries"]] == ["motzkin", "power-linear"]

    def test_cli_corpus_list(self, capsys):
        assert main(["corpus", "list", "--quiet"]) == 0
        assert "example-thc" in capsys.readouterr().out

    def test_cli_unknown_entry(self, capsys):
        assert main(["corpus", "run", "--filter", "motzkn", "--quiet"]) == 2
        assert "did you mean" in capsys.readouterr().err

    def test_entry_validation(self):
        with pytest.raises(ValidationError):
            CorpusEntry(name="x", task="check-sos", expectations=[])
        with pytest.raises(ValidationError):
            CorpusEntry(name="x", task="lyapunov", polynomial="x1^2",
                        expectations=[{"outcome": "feasible", "provenance": "trivial"}])
        entry = {"name": "p", "task": "check-sos", "polynomial": "x1^2",
                 "expectations": [{"outcome": "feasible", "provenance": "trivial"}]}
        with pytest.raises(ValidationError):
            Corpus(entries=[entry, entry])

    @pytest.mark.slow
    def test_full_corpus(self, runner):
        report = runner.run()
        assert report.mismatches == 0, runner.to_frame(report).to_string()

    @pytest.mark.slow
    def test_runs_are_deterministic(self, runner):
        first = runner.to_frame(runner.run(include_slow=False)).drop(columns=["seconds"])
        second = runner.to_frame(runner.run(include_slow=False, jobs=2)).drop(columns=["seconds"])
        assert first.equals(second)


class TestConsole:
    def test_format_degree_event(self):
        message, log_type = format_event("lyapunov_synth", {"stage": "degree", "degree": 4, "mode": "v-sos",
                                                            "status": "feasible", "note": ""})
        assert message == "Degree 4 (v-sos): FEASIBLE"
        assert log_type == "success"

    def test_format_solver_event(self):
        message, log_type = format_event("sdp_solver", {"blocks": [3], "constraints": 6, "status": "infeasible",
                                                        "iterations": 12, "margin": -0.5})
        assert log_type == "solver"
        assert "infeasible after 12 iterations" in message

    def test_format_unknown_event(self):
        message, log_type = format_event("corpus", {"entries": 2})
        assert message == "corpus: entries=2"
        assert log_type == "info"
