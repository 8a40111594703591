import json

import pytest

from qobf.cli import main
from qobf.fixtures import standard_fixtures
from qobf.qasm import emit, parse
from qobf.sim import measure_distribution


@pytest.fixture
def qasm_dir(tmp_path):
    for name, circuit in standard_fixtures().items():
        (tmp_path / f"{name}.qasm").write_text(emit(circuit), encoding="utf-8")
    (tmp_path / "x.qasm").write_text("OPENQASM 2.0;\nqreg q[1];\nx q[0];\n")
    (tmp_path / "hzh.qasm").write_text("OPENQASM 2.0;\nqreg q[1];\nh q[0];\nz q[0];\nh q[0];\n")
    (tmp_path / "z.qasm").write_text("OPENQASM 2.0;\nqreg q[1];\nz q[0];\n")
    (tmp_path / "bad.qasm").write_text("OPENQASM 2.0;\nqreg q[1];\ngate foo a { x a; }\n")
    return tmp_path


class TestObfuscate:
    def test_obfuscate_then_verify(self, qasm_dir):
        src = qasm_dir / "bv6.qasm"
        out = qasm_dir / "bv6_obf.qasm"
        assert main(["obfuscate", "--method", "inverse", "--seed", "42", str(src), "-o", str(out)]) == 0
        assert main(["verify", str(src), str(out)]) == 0

    def test_malformed_input_exit_2(self, qasm_dir):
        rc = main(["obfuscate", "--method", "inverse", str(qasm_dir / "bad.qasm"), "-o", "/dev/null"])
        assert rc == 2

    def test_corruption_hook_trips_soundness_gate(self, qasm_dir, capsys):
        rc = main(
            [
                "obfuscate",
                "--method",
                "inverse",
                "--corrupt-output",
                str(qasm_dir / "qaoa_ring4.qasm"),
                "-o",
                str(qasm_dir / "never.qasm"),
            ]
        )
        assert rc == 3
        assert not (qasm_dir / "never.qasm").exists()
        assert "refusing to write" in capsys.readouterr().err

    def test_failing_ruleset_warns_and_copies(self, qasm_dir, capsys):
        rules = qasm_dir / "failing.rules"
        rules.write_text("x: s y s\nx: h y h\n")
        src = qasm_dir / "bv6.qasm"
        out = qasm_dir / "bv6_c.qasm"
        rc = main(
            ["obfuscate", "--method", "cloaked", "--ruleset", str(rules), str(src), "-o", str(out)]
        )
        assert rc == 0
        assert "no applicable rules" in capsys.readouterr().err
        assert out.read_text() == src.read_text()

    def test_report_written(self, qasm_dir):
        out = qasm_dir / "obf.qasm"
        report = qasm_dir / "report.json"
        rc = main(
            [
                "obfuscate", "--method", "composite", "--seed", "7",
                str(qasm_dir / "period7.qasm"), "-o", str(out), "--report", str(report),
            ]
        )
        assert rc == 0
        data = json.loads(report.read_text())
        assert data[0]["equivalent"] is True
        assert data[0]["depth_after"] > data[0]["depth_before"]

    def test_deterministic_output(self, qasm_dir):
        src = qasm_dir / "period7.qasm"
        a, b = qasm_dir / "a.qasm", qasm_dir / "b.qasm"
        args = ["obfuscate", "--method", "delayed", "--seed", "5", str(src)]
        assert main(args + ["-o", str(a)]) == 0
        assert main(args + ["-o", str(b)]) == 0
        assert a.read_text() == b.read_text()


class TestVerify:
    def test_same_file(self, qasm_dir):
        f = str(qasm_dir / "x.qasm")
        assert main(["verify", f, f]) == 0

    def test_x_vs_hzh(self, qasm_dir):
        assert main(["verify", str(qasm_dir / "x.qasm"), str(qasm_dir / "hzh.qasm")]) == 0

    def test_x_vs_z_nonzero(self, qasm_dir):
        assert main(["verify", str(qasm_dir / "x.qasm"), str(qasm_dir / "z.qasm")]) != 0

    def test_qubit_mismatch_exit_2(self, qasm_dir):
        rc = main(["verify", str(qasm_dir / "x.qasm"), str(qasm_dir / "bv6.qasm")])
        assert rc == 2

    def test_prints_fidelity(self, qasm_dir, capsys):
        main(["verify", str(qasm_dir / "x.qasm"), str(qasm_dir / "hzh.qasm"), "--mode", "unitary"])
        out = capsys.readouterr().out
        assert "fidelity=" in out and "equivalent=True" in out


class TestPredicate:
    def test_bell_model(self, tmp_path):
        out = tmp_path / "bell.qasm"
        assert main(["predicate", "--kind", "bell", "-o", str(out)]) == 0
        circuit = parse(out.read_text()).circuit
        assert measure_distribution(circuit) == {"00": 0.5, "11": 0.5}
        model = json.loads((tmp_path / "bell.qasm.model.json").read_text())
        assert model["distribution"] == {"00": 0.5, "11": 0.5}

    def test_multi_pair_model_shows_power(self, tmp_path):
        out = tmp_path / "mp.qasm"
        assert main(["predicate", "--kind", "multi_pair", "--pairs", "8", "-o", str(out)]) == 0
        model = json.loads((tmp_path / "mp.qasm.model.json").read_text())
        assert model["distribution"]["1" * 16] == 1 / 256

    def test_branch_marginal(self, tmp_path):
        out = tmp_path / "branch.qasm"
        assert main(["predicate", "--kind", "branch", "--seed", "5", "-o", str(out)]) == 0
        circuit = parse(out.read_text()).circuit
        dist = measure_distribution(circuit)
        assert all(k[:2] == "11" for k in dist)  # c3 c2 are the two left chars

    def test_bad_params_exit_2(self, tmp_path):
        rc = main(["predicate", "--kind", "multi_pair", "--pairs", "55", "-o", str(tmp_path / "x.qasm")])
        assert rc == 2


class TestWrapCommand:
    def test_wrap_writes_program_and_manifest(self, tmp_path, capsys):
        payload = tmp_path / "payload.py"
        payload.write_text("print('hi')\n")
        out = tmp_path / "wrapped.py"
        rc = main(["wrap", "--payload", str(payload), "--kind", "bell", "-o", str(out)])
        assert rc == 0
        manifest = json.loads((tmp_path / "wrapped.py.manifest.json").read_text())
        assert len(manifest["branches"]) == 4
        printed = capsys.readouterr().out
        assert "bell-00: p=0.5" in printed

    def test_shroud_two_live(self, tmp_path, capsys):
        payload = tmp_path / "payload.py"
        payload.write_text("a = 1\nb = 2\n")
        out = tmp_path / "wrapped.py"
        rc = main(["wrap", "--payload", str(payload), "--kind", "shroud", "-o", str(out)])
        assert rc == 0
        printed = capsys.readouterr().out
        assert "shroud-0: p=1" in printed and "shroud-1: p=1" in printed

    def test_missing_template_exit_2(self, tmp_path):
        payload = tmp_path / "payload.py"
        payload.write_text("x\n")
        rc = main(
            [
                "wrap", "--payload", str(payload), "--kind", "bell",
                "--template", "ghost", "-o", str(tmp_path / "w.py"),
            ]
        )
        assert rc == 2

    def test_missing_payload_exit_2(self, tmp_path):
        rc = main(
            ["wrap", "--payload", str(tmp_path / "nope.py"), "--kind", "bell", "-o", str(tmp_path / "w.py")]
        )
        assert rc == 2


class TestReportCommand:
    def test_json_emission(self, qasm_dir, capsys):
        rc = main(
            ["report", "--methods", "inverse", "--format", "json", str(qasm_dir / "qaoa_ring4.qasm")]
        )
        assert rc == 0
        data = json.loads(capsys.readouterr().out)
        assert data[0]["method"] == "inverse"

    def test_table_emission(self, qasm_dir, capsys):
        rc = main(["report", "--methods", "inverse,cloaked", str(qasm_dir / "bv6.qasm")])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.count("bv6.qasm") == 2

    def test_no_inputs_exit_2(self):
        assert main(["report"]) == 2

    def test_unknown_method_exit_2(self, qasm_dir):
        assert main(["report", "--methods", "magic", str(qasm_dir / "bv6.qasm")]) == 2


class TestMisc:
    def test_usage_error_exit_2(self):
        assert main(["obfuscate"]) == 2

    def test_templates_listed(self, capsys):
        assert main(["templates"]) == 0
        out = capsys.readouterr().out
        assert "qobf-inline" in out
