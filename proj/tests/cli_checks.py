# Copyright 2026 The qgt Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""End-to-end checks of the qgt command line.

usage: cli_checks.py <qgt binary> <source dir> <scratch dir>
"""

import filecmp
import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema

QGT, SRC, WORK = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
EXPERIMENTS = ["bell-distribute", "visibility", "truth-table", "entangle", "state-tomo", "process-tomo", "calibrate-fiber"]
failures = []


def qgt(*args, expect=0):
    p = subprocess.run([QGT, *args], capture_output=True, text=True)
    if p.returncode != expect:
        raise AssertionError(f"qgt {' '.join(args)}: exit {p.returncode}, wanted {expect}\n{p.stderr}")
    return p


def check(name, fn):
    try:
        fn()
        print(f"ok    {name}")
    except Exception as e:  # noqa: BLE001
        failures.append(name)
        print(f"FAIL  {name}: {e}")


def report(out):
    return json.loads((out / "report.json").read_text())


shutil.rmtree(WORK, ignore_errors=True)
WORK.mkdir(parents=True)
schema = json.loads((SRC / "schemas" / "report.schema.json").read_text())
jsonschema.Draft202012Validator.check_schema(schema)


def every_experiment_validates():
    for e in EXPERIMENTS:
        out = WORK / "exact" / e
        qgt("run", e, "--shots", "exact", "--out", str(out))
        jsonschema.validate(report(out), schema)
    out = WORK / "netlab"
    qgt("run", "netlab-session", "--trials", "400", "--mode", "corrected", "--out", str(out))
    r = report(out)
    jsonschema.validate(r, schema)
    assert r["outcome_stream_identical"] and r["audit"]["ok"], "netlab run disagrees with the in-process run"


def ideal_truth_table_is_one():
    out = WORK / "tt"
    qgt("run", "truth-table", "--shots", "exact", "--out", str(out))
    v = report(out)["metrics"]["truth_table_fidelity"]["value"]
    assert abs(v - 1.0) < 1e-12, v
    assert (out / "matrices" / "truth_table.csv").exists()


def same_seed_same_bytes():
    a, b = WORK / "det_a", WORK / "det_b"
    for out in (a, b):
        qgt("run", "process-tomo", "--preset", "paper-5m", "--seed", "9", "--out", str(out))
    cmp = filecmp.dircmp(a, b)
    assert not cmp.diff_files and not cmp.left_only and not cmp.right_only, cmp.diff_files
    for sub in ("matrices",):
        c = filecmp.dircmp(a / sub, b / sub)
        assert not c.diff_files, c.diff_files
    assert (a / "counts.jsonl").read_text().count("\n") == 256


def preset_bands():
    for preset, ref in (("paper-5m", 0.9481), ("paper-1km", 0.9304)):
        out = WORK / f"band_{preset}"
        qgt("run", "process-tomo", "--preset", preset, "--out", str(out))
        r = report(out)
        m = r["metrics"]["process_fidelity"]
        assert abs(m["value"] - ref) <= 0.02 and m["within_tolerance"], (preset, m)
        assert "calibration check" in r["calibration_note"]


def invalid_configs_fail_with_json():
    cases = [
        ["run", "truth-table", "--shots", "0"],
        ["run", "no-such-experiment"],
        ["run", "truth-table", "--fiber-km", "-1"],
        ["run", "truth-table", "--preset", "no-such-preset"],
    ]
    bad_cfg = WORK / "bad.json"
    bad_cfg.write_text(json.dumps({"noise": {"source_visibility": 1.5}}))
    cases.append(["run", "state-tomo", "--config", str(bad_cfg)])
    for args in cases:
        p = qgt(*args, expect=2)
        err = json.loads(p.stderr.strip().splitlines()[-1])["error"]
        assert err["exit_code"] == 2 and err["message"], err


def calibrate_noise_examples():
    p = qgt("calibrate-noise", "--param", "source_visibility", "--targets", "state_fidelity=1.0")
    assert abs(json.loads(p.stdout)["value"] - 1.0) < 1e-6
    p = qgt("calibrate-noise", "--param", "phase_jitter_sigma", "--targets", "entangled_fidelity_mean=1.0")
    assert abs(json.loads(p.stdout)["value"]) < 1e-4
    p = qgt("calibrate-noise", "--param", "source_visibility",
            "--targets", "state_fidelity=1.0,process_fidelity=0.5", expect=4)
    assert json.loads(p.stdout)["feasible"] is False


def preset_fits_rerun_from_provenance():
    for name in ("paper-5m", "paper-1km"):
        preset = json.loads((SRC / "data" / "presets" / f"{name}.json").read_text())
        prov = json.loads((SRC / "data" / "presets" / preset["provenance"]).read_text())
        fit = prov["fit"]
        base = WORK / f"{name}.base.json"
        base.write_text(json.dumps({"noise": prov["base_noise"]}))
        targets = ",".join(f"{k}={v!r}" for k, v in fit["targets"].items())
        p = qgt("calibrate-noise", "--base", str(base), "--param", fit["parameter"], "--targets", targets)
        again = json.loads(p.stdout)
        assert again["feasible"] and abs(again["value"] - fit["value"]) < 1e-9, (name, again["value"], fit["value"])
        assert preset["noise"][fit["parameter"]] == fit["value"], name


def circuit_files_are_unitary():
    import numpy as np

    for chip in ("a", "b"):
        path = SRC / "data" / "circuits" / f"chip_{chip}.json"
        emitted = json.loads(qgt("circuit", "--chip", chip).stdout)
        assert emitted == json.loads(path.read_text()), f"chip_{chip}.json is stale"
        u = json.loads(qgt("circuit", "--file", str(path)).stdout)["unitary"]
        d = np.array(u["data"])
        m = (d[:, 0] + 1j * d[:, 1]).reshape(u["rows"], u["cols"])
        assert np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=1e-12), chip


for name, fn in list(globals().items()):
    if callable(fn) and fn.__module__ == "__main__" and name not in {"qgt", "check", "report"}:
        check(name, fn)

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
