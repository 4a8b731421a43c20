"""
Command line tests: reports on standard output, exit codes 0 / 1 / 2
"""

import json
import logging

import pytest
from typer.testing import CliRunner

from src.cli import app
from src.cli_io import serialize_code
from src.corpus import constant_x

runner = CliRunner()


@pytest.fixture(autouse=True)
def fixture_reset_logging():
    yield
    for handler in logging.root.handlers[:]:
        logging.root.removeHandler(handler)


def invoke(*args):
    result = runner.invoke(app, [str(arg) for arg in args])
    report = json.loads(result.stdout) if result.stdout.strip() else None
    return result.exit_code, report


@pytest.fixture(name="instances")
def fixture_instances(data_dir):
    return data_dir / "instances"


@pytest.fixture(name="codes")
def fixture_codes(data_dir):
    return data_dir / "codes"


@pytest.fixture(name="lifted_file")
def fixture_lifted_file(tmp_path, fly_lifted):
    path = tmp_path / "lifted.json"
    path.write_text(serialize_code(fly_lifted), encoding="utf-8")
    return path


def test_reduce_embeds_the_gadget(instances):
    code, report = invoke("reduce", "--instance", instances / "butterfly.json")
    assert code == 0
    assert report["command"] == "reduce"
    assert (report["nodes"], report["edges"], report["adversary_sets"], report["min_cut"]) == (12, 19, 15, 2)
    golden = (instances / "butterfly_reduced.json").read_text(encoding="utf-8")
    assert report["instance"] == json.loads(golden)


def test_reduce_writes_canonical_file(instances, tmp_path):
    out = tmp_path / "reduced.json"
    code, report = invoke("reduce", "--instance", instances / "butterfly.json", "--out", out)
    assert code == 0
    assert report["out"] == str(out)
    assert out.read_text(encoding="utf-8") == (instances / "butterfly_reduced.json").read_text(encoding="utf-8")


def test_reduce_refuses_nec_instance(instances):
    code, report = invoke("reduce", "--instance", instances / "butterfly_reduced.json")
    assert code == 2
    assert report["status"] == "error"
    assert "needs a unicast instance" in report["error"]


def test_lift_xor_code(instances, codes, fly_lifted):
    code, report = invoke("lift", "--instance", instances / "butterfly.json", "--code", codes / "butterfly_xor.json")
    assert code == 0
    assert report["premise_holds"] is True
    assert report["code"] == json.loads(serialize_code(fly_lifted))


def test_lift_refuses_routing_code(instances, codes):
    code, report = invoke(
        "lift", "--instance", instances / "butterfly.json", "--code", codes / "butterfly_routing.json",
    )
    assert code == 1
    assert report["status"] == "premise-violated"
    assert report["counterexample"]["message"] == [0, 1]


def test_forced_lift_exits_negative(instances, codes):
    code, report = invoke(
        "lift", "--instance", instances / "butterfly.json", "--code", codes / "butterfly_routing.json", "--force",
    )
    assert code == 1
    assert report["status"] == "forced"


def test_verify_unicast_codes(instances, codes):
    code, report = invoke("verify", "--instance", instances / "butterfly.json", "--code", codes / "butterfly_xor.json")
    assert (code, report["status"]) == (0, "zero-error")
    code, report = invoke(
        "verify", "--instance", instances / "butterfly.json", "--code", codes / "butterfly_routing.json",
    )
    assert (code, report["status"]) == (1, "counterexample")
    assert report["failing_terminals"] == ["t2"]


def test_verify_lifted_code(instances, lifted_file):
    code, report = invoke("verify", "--instance", instances / "butterfly_reduced.json", "--code", lifted_file)
    assert code == 0
    assert report["evaluations"] == 64


def test_extract_returns_the_xor_code(instances, codes, lifted_file):
    code, report = invoke("extract", "--instance", instances / "butterfly_reduced.json", "--code", lifted_file)
    assert code == 0
    assert report["chain"]["1"]["a->z"] == [0, 1]
    assert report["code"] == json.loads((codes / "butterfly_xor.json").read_text(encoding="utf-8"))


def test_extract_refuses_corrupted_lift(instances, tmp_path, fly_reduced, fly_lifted):
    path = tmp_path / "broken.json"
    path.write_text(serialize_code(constant_x(fly_lifted, fly_reduced)), encoding="utf-8")
    code, report = invoke("extract", "--instance", instances / "butterfly_reduced.json", "--code", path)
    assert code == 1
    assert report["status"] == "premise-violated"


def test_classify_corrupted_lift(instances, tmp_path, fly_reduced, fly_lifted):
    path = tmp_path / "broken.json"
    path.write_text(serialize_code(constant_x(fly_lifted, fly_reduced)), encoding="utf-8")
    code, report = invoke("classify", "--instance", instances / "butterfly_reduced.json", "--code", path)
    assert code == 0
    assert report["total"] == 4
    assert report["good"] == [0, 1]
    assert report["epsilon"] == "1/2"


def test_audit_of_lifted_code(instances, lifted_file):
    code, report = invoke(
        "audit", "--instance", instances / "butterfly_reduced.json", "--code", lifted_file, "--l", 2, "--information",
    )
    assert code == 0
    assert report["status"] == "holds"
    assert len(report["rows"]) == 16
    assert report["bijections"]["verified"] is True
    assert report["information"]


def test_oracle_verdicts(instances, codes):
    code, report = invoke("oracle", "--instance", instances / "bottleneck.json", "--n", 1)
    assert (code, report["note"]) == (1, "infeasible at n=1")

    code, report = invoke("oracle", "--instance", instances / "butterfly.json", "--n", 1)
    assert (code, report["status"]) == (0, "feasible")
    assert report["witness"] == json.loads((codes / "butterfly_xor.json").read_text(encoding="utf-8"))

    code, report = invoke("oracle", "--instance", instances / "butterfly.json", "--n", 1, "--budget", 7)
    assert (code, report["status"]) == (2, "exhausted-budget")


def test_oracle_with_hint(instances, lifted_file):
    code, report = invoke(
        "oracle", "--instance", instances / "butterfly_reduced.json", "--n", 1, "--code", lifted_file,
    )
    assert code == 0
    assert report["candidates"] == 0


@pytest.mark.parametrize("args, expected_code, expected_status", [
    (["--n", 10, "--eps", 0, "--l", 10], 0, "ok"),
    (["--n", 10, "--eps", 0, "--l", 1], 1, "vacuous"),
    (["--n", 10, "--eps", 0.25, "--l", 1], 1, "vacuous"),
])
def test_bound(args, expected_code, expected_status):
    code, report = invoke("bound", *args)
    assert (code, report["status"]) == (expected_code, expected_status)


def test_bound_value_at_zero_error():
    _, report = invoke("bound", "--n", 10, "--eps", 0, "--l", 10)
    assert report["value"] == pytest.approx(7.0)


def test_mincut(instances):
    code, report = invoke("mincut", "--instance", instances / "butterfly.json")
    assert code == 0
    assert report["per_pair"] == [1, 1]

    code, report = invoke("mincut", "--instance", instances / "butterfly.json", "--from", "s1", "--to", "t1")
    assert report["cuts"] == [{"from": "s1", "to": "t1", "value": 1, "cut_edges": ["e4"]}]

    code, report = invoke("mincut", "--instance", instances / "crossed_pairs.json")
    assert (code, report["status"]) == (1, "disconnected")
    assert report["per_pair"] == [0, 0]


def test_info_sweep():
    code, report = invoke("info", "--samples", 20, "--seed", 3)
    assert code == 0
    assert (report["status"], report["failures"]) == ("holds", 0)


def test_info_on_edges(instances, lifted_file):
    code, report = invoke(
        "info", "--instance", instances / "butterfly_reduced.json", "--code", lifted_file,
        "--edges", "a_1", "--against", "b_1",
    )
    assert code == 0
    assert report["entropy"] == pytest.approx(1.0)
    assert report["mutual_information"] == pytest.approx(1.0)


def test_info_needs_arguments():
    code, report = invoke("info")
    assert code == 2
    assert "--edges" in report["error"]


def test_malformed_document(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{oops", encoding="utf-8")
    code, report = invoke("mincut", "--instance", path)
    assert code == 2
    assert "line 1 column" in report["error"]


def test_missing_document(tmp_path):
    code, report = invoke("verify", "--instance", tmp_path / "absent.json", "--code", tmp_path / "absent.json")
    assert (code, report["status"]) == (2, "error")


def test_report_dir_receives_text_report(tmp_path):
    code, _ = invoke("--report-dir", tmp_path, "bound", "--n", 10, "--eps", 0, "--l", 10)
    assert code == 0
    reports = list(tmp_path.glob("bound_report_*.txt"))
    assert len(reports) == 1
    assert "NETWORK REDUCTION REPORT" in reports[0].read_text(encoding="utf-8")


def test_internal_value_errors_are_not_usage_refusals(instances, monkeypatch):
    def broken_reduce(inst):
        raise ValueError("internal failure")

    monkeypatch.setattr("src.cli.reduce", broken_reduce)
    result = runner.invoke(app, ["reduce", "--instance", str(instances / "butterfly.json")])
    assert result.exit_code != 2
    assert isinstance(result.exception, ValueError)
    assert "internal failure" in str(result.exception)


def test_bad_arguments_are_usage_refusals(instances, lifted_file):
    code, report = invoke("bound", "--n", 10, "--eps=-1", "--l", 2)
    assert (code, report["status"]) == (2, "error")
    assert "eps must be nonnegative" in report["error"]

    code, report = invoke("mincut", "--instance", instances / "butterfly.json", "--from", "ghost", "--to", "t1")
    assert code == 2
    assert "unknown node: ghost" in report["error"]

    code, report = invoke(
        "info", "--instance", instances / "butterfly_reduced.json", "--code", lifted_file,
        "--edges", "a_1", "--against", "a_1",
    )
    assert code == 2
    assert "overlap" in report["error"]


@pytest.mark.parametrize("args", [
    ["oracle", "--instance", "unused.json", "--n", 0],
    ["bound", "--n", 10, "--eps", 0, "--l", 0],
    ["info", "--samples", -1],
])
def test_out_of_range_options_exit_two(args):
    code, _ = invoke(*args)
    assert code == 2


def test_role_free_nec_instance_is_refused(tmp_path, instances, lifted_file):
    document = json.loads((instances / "butterfly_reduced.json").read_text(encoding="utf-8"))
    document.pop("roles")
    path = tmp_path / "plain_nec.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    code, report = invoke("classify", "--instance", path, "--code", lifted_file)
    assert code == 2
    assert "reduced instance" in report["error"]
