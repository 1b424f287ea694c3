import json
import os
import subprocess
import sys

import numpy as np
import pytest

from qwk.cli import (
    EXIT_CAP,
    EXIT_FLAG,
    EXIT_SCHEMA,
    EXIT_SEMANTIC,
    canonical_payload_bytes,
    load_spec,
    main,
    parse_channel,
)

SPECS = os.path.join(os.path.dirname(__file__), "..", "specs")
DATA = os.path.join(os.path.dirname(__file__), "data")


def spec_path(name):
    return os.path.join(SPECS, name)


def run_cli(args):
    return main(args)


class TestChannelSchema:
    def test_parse_stochastic(self):
        ch = parse_channel(
            {"kind": "stochastic", "input_alphabet": [0, 1], "output_alphabet": [0, 1],
             "matrix": [[0.9, 0.1], [0.1, 0.9]]}
        )
        assert np.allclose(ch.matrix, [[0.9, 0.1], [0.1, 0.9]])

    def test_parse_kraus_complex_pairs(self):
        ch = parse_channel(
            {"kind": "kraus", "dim_in": 2, "dim_out": 2,
             "operators": [[[[0, 0], [0, -1]], [[0, 1], [0, 0]]]]}
        )
        op = ch.kraus_ops[0]
        assert op[0, 1] == pytest.approx(-1j)
        assert op[1, 0] == pytest.approx(1j)

    def test_missing_kind_rejected(self):
        from qwk.cli import SchemaError

        with pytest.raises(SchemaError):
            parse_channel({"matrix": [[1.0]]})

    def test_load_spec_files(self):
        for name in ("bsc_pair.json", "qubit_wiretap.json", "cq_pair.json"):
            spec = load_spec(spec_path(name))
            assert len(spec) >= 1


class TestCapacityCommand:
    def test_b1_on_bsc_pair(self, tmp_path):
        out = tmp_path / "cap.json"
        rc = run_cli(["capacity", "--formula", "b1", "--spec", spec_path("bsc_pair.json"),
                      "--grid", "64", "--refine", "50", "--seed", "0", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["payload"]["value"] == pytest.approx(0.412295, abs=1e-3)

    def test_e1q_singleton_identity(self, tmp_path):
        out = tmp_path / "cap.json"
        rc = run_cli(["capacity", "--formula", "e1q", "--spec", spec_path("cq_pair.json"),
                      "--grid", "16", "--refine", "10", "--restarts", "2", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["payload"]["value"] == pytest.approx(1.0, abs=1e-6)

    def test_malformed_json_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        rc = run_cli(["capacity", "--formula", "b1", "--spec", str(bad)])
        assert rc == EXIT_SCHEMA

    def test_variant_mismatch_exits_3(self):
        rc = run_cli(["capacity", "--formula", "b1", "--spec", spec_path("cq_pair.json")])
        assert rc == EXIT_SEMANTIC

    def test_unknown_formula_exits_4(self):
        rc = run_cli(["capacity", "--formula", "bogus", "--spec", spec_path("bsc_pair.json")])
        assert rc == EXIT_FLAG


class TestSimulateCommand:
    def test_trials_zero_exits_4(self):
        rc = run_cli(["simulate", "--spec", spec_path("bsc_pair.json"), "--n", "4",
                      "--trials", "0", "--seed", "1"])
        assert rc == EXIT_FLAG

    def test_missing_seed_exits_4(self):
        rc = run_cli(["simulate", "--spec", spec_path("bsc_pair.json"), "--n", "4"])
        assert rc == EXIT_FLAG

    def test_auto_l(self, tmp_path):
        out = tmp_path / "sim.json"
        rc = run_cli(["simulate", "--spec", spec_path("bsc_pair.json"), "--n", "6",
                      "--J", "2", "--L", "auto", "--trials", "50", "--seed", "2",
                      "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["payload"]["sizes"]["auto"]

    def test_cap_exceeded_exits_5(self):
        rc = run_cli(["simulate", "--spec", spec_path("qubit_wiretap.json"), "--n", "20",
                      "--J", "2", "--trials", "2", "--seed", "1"])
        assert rc == EXIT_CAP

    def test_golden_instances_rerun_bit_identically(self, tmp_path):
        for name in ("golden_sim1", "golden_sim2", "golden_sim3"):
            golden = json.load(open(os.path.join(DATA, f"{name}.json")))
            argv = list(golden["manifest"]["argv"])
            # rerun from the recorded manifest into a fresh output location
            out = tmp_path / f"{name}.json"
            idx = argv.index("--out")
            argv[idx + 1] = str(out)
            rc = run_cli(argv)
            assert rc == 0
            fresh = json.loads(out.read_text())
            assert canonical_payload_bytes(fresh["payload"]) == canonical_payload_bytes(
                golden["payload"]
            )


class TestNetCommand:
    def test_bound_printed_exactly(self, tmp_path):
        out = tmp_path / "net.json"
        rc = run_cli(["net", "--tau", "1.0", "--budget", "2", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["payload"]["cardinality_bound"] == 3 ** 32

    def test_budget_zero_exits_4(self):
        rc = run_cli(["net", "--tau", "1.0", "--budget", "0"])
        assert rc == EXIT_FLAG

    def test_singleton_for_large_tau(self, tmp_path):
        out = tmp_path / "net.json"
        rc = run_cli(["net", "--tau", "2.0", "--budget", "5", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["payload"]["n_elements"] == 1


class TestEntangleCommand:
    def test_identity_family_fidelity_one(self, tmp_path):
        out = tmp_path / "ent.json"
        rc = run_cli(["entangle", "--family", spec_path("identity_family.json"),
                      "--n", "1", "--J", "2", "--seed", "5", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["payload"]["min_fidelity"] >= 1 - 1e-9

    def test_two_channel_bound_satisfied(self, tmp_path):
        out = tmp_path / "ent.json"
        rc = run_cli(["entangle", "--family", spec_path("two_channel_family.json"),
                      "--n", "2", "--J", "2", "--L", "2", "--seed", "3", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["payload"]["bound_satisfied"]

    def test_bad_family_exits_2(self, tmp_path):
        bad = tmp_path / "fam.json"
        bad.write_text(json.dumps({"theta": [{"W": {"kind": "stochastic"}}]}))
        rc = run_cli(["entangle", "--family", str(bad), "--seed", "1"])
        assert rc == EXIT_SCHEMA

    def test_missing_seed_exits_4(self):
        rc = run_cli(["entangle", "--family", spec_path("identity_family.json")])
        assert rc == EXIT_FLAG


class TestVerifyCommand:
    def test_unknown_suite_exits_4(self):
        rc = run_cli(["verify", "nonsense"])
        assert rc == EXIT_FLAG

    def test_fidelity_suite_passes(self, tmp_path):
        out = tmp_path / "ver.json"
        rc = run_cli(["verify", "fidelity", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["payload"]["n_fail"] == 0

    def test_gentle_suite_passes(self, tmp_path):
        out = tmp_path / "ver.json"
        rc = run_cli(["verify", "gentle", "--out", str(out)])
        assert rc == 0
        assert json.loads(out.read_text())["payload"]["n_fail"] == 0

    def test_all_aggregates_and_jobs_flag(self, tmp_path):
        out1 = tmp_path / "v1.json"
        out2 = tmp_path / "v2.json"
        assert run_cli(["verify", "all", "--out", str(out1)]) == 0
        assert run_cli(["--jobs", "2", "verify", "all", "--out", str(out2)]) == 0
        p1 = json.loads(out1.read_text())["payload"]
        p2 = json.loads(out2.read_text())["payload"]
        assert p1["n_fail"] == 0
        # parallel collection is deterministic: same records either way
        assert canonical_payload_bytes(p1["records"]) == canonical_payload_bytes(p2["records"])


class TestDeterminism:
    def test_capacity_payload_bytes_stable(self, tmp_path):
        outs = []
        for i in (0, 1):
            out = tmp_path / f"cap{i}.json"
            rc = run_cli(["capacity", "--formula", "b1prime",
                          "--spec", spec_path("bsc_dominated.json"),
                          "--grid", "8", "--refine", "5", "--restarts", "1",
                          "--seed", "4", "--out", str(out)])
            assert rc == 0
            outs.append(json.loads(out.read_text())["payload"])
        assert canonical_payload_bytes(outs[0]) == canonical_payload_bytes(outs[1])

    def test_entangle_payload_bytes_stable(self, tmp_path):
        outs = []
        for i in (0, 1):
            out = tmp_path / f"ent{i}.json"
            rc = run_cli(["entangle", "--family", spec_path("two_channel_family.json"),
                          "--n", "2", "--J", "2", "--L", "2", "--seed", "9",
                          "--out", str(out)])
            assert rc == 0
            outs.append(json.loads(out.read_text())["payload"])
        assert canonical_payload_bytes(outs[0]) == canonical_payload_bytes(outs[1])

    def test_console_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "qwk.cli", "net", "--tau", "2.0", "--budget", "1"],
            capture_output=True,
        )
        assert proc.returncode == 0
