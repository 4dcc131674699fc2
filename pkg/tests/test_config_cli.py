import json
import math

import numpy as np
import pytest

from airconsensus.cli import main
from airconsensus.config import ConfigError, PRESET_NAMES, parse_config, preset


def minimal_doc(**overrides):
    doc = {
        "topology": {"kind": "complete", "n": 5},
        "channel": {"law": {"kind": "uniform", "lo": 0.0, "hi": 10.0}, "mode": "iid-per-step"},
        "protocol": {"variant": "superposition", "mixing": 0.5},
        "seed": 42,
    }
    doc.update(overrides)
    return doc


class TestParseConfig:
    def test_minimal_config_resolves_defaults(self):
        cfg = parse_config(minimal_doc())
        assert cfg.tol == 1e-9
        assert cfg.max_steps == 10_000
        assert cfg.resolved["run"] == {"tol": 1e-9, "max_steps": 10_000}
        assert cfg.resolved["initial_state"]["kind"] == "uniform"
        assert cfg.resolved["initial_state"]["hi"] == math.tau
        # derived seeds are echoed explicitly
        assert isinstance(cfg.resolved["channel"]["seed"], int)
        assert isinstance(cfg.resolved["initial_state"]["seed"], int)
        assert cfg.x0.shape == (5,)

    def test_resolved_echo_reparses_to_same_scenario(self):
        cfg = parse_config(minimal_doc())
        again = parse_config(cfg.resolved)
        np.testing.assert_array_equal(cfg.x0, again.x0)
        assert again.channel.seed == cfg.channel.seed
        assert again.resolved == cfg.resolved

    def test_json_text_accepted(self):
        cfg = parse_config(json.dumps(minimal_doc()))
        assert cfg.topology.n == 5

    def test_parse_error_reports_position(self):
        with pytest.raises(ConfigError, match="line 1 column"):
            parse_config("{not json")

    def test_mixing_above_one_rejected_naming_constraint(self):
        doc = minimal_doc()
        doc["protocol"]["mixing"] = 1.2
        with pytest.raises(ConfigError, match=r"open interval \(0, 1\)"):
            parse_config(doc)

    def test_chain_topology_rejected_for_superposition(self):
        doc = minimal_doc(
            topology={"kind": "custom", "n": 3, "arcs": [[1, 2, 1.0], [2, 3, 1.0]]}
        )
        with pytest.raises(ConfigError, match="strongly connected"):
            parse_config(doc)

    def test_classical_step_size_bound_named(self):
        doc = minimal_doc()
        doc["protocol"] = {"variant": "classical", "step_size": 0.9}
        del doc["channel"]
        # complete n=5 with unit weights: in-weight sum 4, bound 0.25
        with pytest.raises(ConfigError, match=r"\(0, 0.25\)"):
            parse_config(doc)

    def test_classical_rejects_channel_section(self):
        doc = minimal_doc()
        doc["protocol"] = {"variant": "classical", "step_size": 0.1}
        with pytest.raises(ConfigError, match="does not use a channel"):
            parse_config(doc)

    def test_problems_are_aggregated(self):
        doc = minimal_doc()
        doc["protocol"]["mixing"] = 2.0
        doc["run"] = {"tol": -1.0}
        doc["bogus"] = {}
        with pytest.raises(ConfigError) as info:
            parse_config(doc)
        text = str(info.value)
        assert "mixing" in text and "run.tol" in text and "bogus" in text

    def test_missing_seed_reported(self):
        doc = minimal_doc()
        del doc["seed"]
        with pytest.raises(ConfigError, match="seed"):
            parse_config(doc)

    def test_explicit_initial_state(self):
        doc = minimal_doc(
            initial_state={"kind": "explicit", "values": [1.0, 2.0, 3.0, 4.0, 5.0]}
        )
        cfg = parse_config(doc)
        np.testing.assert_array_equal(cfg.x0, [1, 2, 3, 4, 5])

    def test_explicit_initial_state_length_checked(self):
        doc = minimal_doc(initial_state={"kind": "explicit", "values": [1.0, 2.0]})
        with pytest.raises(ConfigError, match="length 5"):
            parse_config(doc)

    def test_naive_takes_no_parameters(self):
        doc = minimal_doc()
        doc["protocol"] = {"variant": "naive", "mixing": 0.5}
        with pytest.raises(ConfigError, match="naive variant takes no"):
            parse_config(doc)

    def test_presets_all_parse(self):
        for name in PRESET_NAMES:
            cfg = parse_config(preset(name))
            assert cfg.topology.n in (5, 30)

    def test_unknown_preset(self):
        with pytest.raises(ValueError, match="unknown preset"):
            preset("nope")


class TestCli:
    def test_preset_run_writes_files_and_exits_zero(self, tmp_path, capsys):
        code = main(["--preset", "ti-sigma02", "--out-dir", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "converged" in out
        trace = (tmp_path / "trace.csv").read_text().splitlines()
        assert trace[0] == "step,agent,x"
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["result.converged"] is True
        assert summary["config.protocol.mixing"] == 0.2
        assert abs(
            summary["result.consensus_value"] - summary["result.predicted_value"]
        ) <= 1e-6
        # one row per agent per recorded step
        assert len(trace) == 1 + 5 * (summary["result.steps"] + 1)

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["--preset", "tv-sigma05", "--out-dir", str(a), "--quiet"]) == 0
        assert main(["--preset", "tv-sigma05", "--out-dir", str(b), "--quiet"]) == 0
        assert (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()
        assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()

    def test_seed_override_changes_result(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        main(["--preset", "tv-sigma05", "--out-dir", str(a), "--quiet", "--seed", "1"])
        main(["--preset", "tv-sigma05", "--out-dir", str(b), "--quiet", "--seed", "2"])
        sa = json.loads((a / "summary.json").read_text())
        sb = json.loads((b / "summary.json").read_text())
        assert sa["config.channel.seed"] != sb["config.channel.seed"]
        assert sa["result.consensus_value"] != sb["result.consensus_value"]

    def test_config_file_run(self, tmp_path):
        doc = minimal_doc()
        doc["run"] = {"max_steps": 3}
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(doc))
        code = main(["--config", str(path), "--out-dir", str(tmp_path), "--quiet"])
        assert code == 2  # not converged in 3 steps
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["result.reason"] == "max-steps"

    def test_invalid_config_exits_one(self, tmp_path, capsys):
        doc = minimal_doc()
        doc["protocol"]["mixing"] = 7
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        assert main(["--config", str(path), "--out-dir", str(tmp_path)]) == 1
        assert "open interval (0, 1)" in capsys.readouterr().err

    def test_missing_file_exits_one(self, tmp_path, capsys):
        assert main(["--config", str(tmp_path / "nope.json")]) == 1
        assert "cannot read" in capsys.readouterr().err

    def test_requires_exactly_one_source(self, capsys):
        assert main([]) == 1
        assert "exactly one" in capsys.readouterr().err

    def test_unknown_flag_exits_one(self, capsys):
        assert main(["--frobnicate"]) == 1

    def test_naive_scenario_records_hull_violation(self, tmp_path):
        doc = minimal_doc()
        doc["protocol"] = {"variant": "naive"}
        doc["run"] = {"max_steps": 60}
        path = tmp_path / "naive.json"
        path.write_text(json.dumps(doc))
        code = main(["--config", str(path), "--out-dir", str(tmp_path), "--quiet"])
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert code == 2
        assert summary["result.hull_violated"] is True

    def test_montecarlo_mode(self, tmp_path, capsys):
        code = main(
            ["--preset", "tv-sigma05", "--out-dir", str(tmp_path), "--runs", "10"]
        )
        assert code == 0
        assert "10 runs" in capsys.readouterr().out
        samples = (tmp_path / "samples.csv").read_text().splitlines()
        assert samples[0] == "run,seed,consensus_value,steps,converged"
        assert len(samples) == 11
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["montecarlo.runs"] == 10
        assert summary["montecarlo.non_converged"] == 0

    def test_montecarlo_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        main(["--preset", "tv-sigma05", "--out-dir", str(a), "--runs", "8", "--quiet"])
        main(["--preset", "tv-sigma05", "--out-dir", str(b), "--runs", "8", "--quiet"])
        assert (a / "samples.csv").read_bytes() == (b / "samples.csv").read_bytes()
        assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()

    def test_montecarlo_rejects_single_run(self, capsys):
        assert main(["--preset", "tv-sigma05", "--runs", "1"]) == 1
        assert "at least 2" in capsys.readouterr().err

    def test_quiet_suppresses_output(self, tmp_path, capsys):
        main(["--preset", "ti-sigma02", "--out-dir", str(tmp_path), "--quiet"])
        assert capsys.readouterr().out == ""

    def test_trace_full_precision(self, tmp_path):
        main(["--preset", "ti-sigma02", "--out-dir", str(tmp_path), "--quiet"])
        first_row = (tmp_path / "trace.csv").read_text().splitlines()[1]
        value = first_row.split(",")[2]
        assert float(value) == np.float64(value)  # round-trips exactly
        assert len(value.split(".")[-1]) >= 15


def test_write_failure_reported_with_path(tmp_path, capsys):
    target = tmp_path / "ro"
    target.mkdir()
    (target / "trace.csv").mkdir()  # a directory squatting on the trace filename
    code = main(["--preset", "ti-sigma02", "--out-dir", str(target), "--quiet"])
    assert code == 1
    assert "cannot write" in capsys.readouterr().err
