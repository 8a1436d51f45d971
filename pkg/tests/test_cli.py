import json

from cyclectx.cli import main


def run(tmp_path, argv, name="out.json"):
    out = tmp_path / name
    code = main(argv + ["--out", str(out)])
    return code, out.read_text() if out.exists() else ""


class TestDemo5:
    def test_json_verdict_and_value(self, tmp_path):
        code, payload = run(tmp_path, ["demo5", "--format", "json"])
        assert code == 0
        doc = json.loads(payload)
        assert doc["verdict"] is True
        assert abs(doc["counterfactual"]["value"] - 1 / 9) < 1e-10
        assert doc["convention"] == "flip-on-outcome-1"
        assert len(doc["pairwise"]) == 4

    def test_text_renders_fraction(self, tmp_path):
        code, payload = run(tmp_path, ["demo5", "--format", "text"], "out.txt")
        assert code == 0
        assert "1/9" in payload
        assert "contradiction certified" in payload

    def test_simulated_zeros_sit_below_even_harsh_tolerances(self, tmp_path):
        # the record-level forbidden entries are products of near-exact
        # zeros, so they survive a 1e-20 threshold comfortably
        code, _ = run(tmp_path, ["demo5", "--format", "json", "--tol-prob", "1e-20"])
        assert code == 0

    def test_impossible_possibility_threshold_fails(self, tmp_path):
        code, payload = run(tmp_path, ["demo5", "--format", "json", "--eps", "0.9"])
        assert code == 1
        assert json.loads(payload)["verdict"] is False

    def test_byte_stable(self, tmp_path):
        _, a = run(tmp_path, ["demo5", "--format", "json"], "a.json")
        _, b = run(tmp_path, ["demo5", "--format", "json"], "b.json")
        assert a == b

    def test_csv_format(self, tmp_path):
        code, payload = run(tmp_path, ["demo5", "--format", "csv"], "out.csv")
        assert code == 0
        assert payload.splitlines()[0] == "key,value"


class TestContextuality:
    def test_odd_five(self, tmp_path):
        code, payload = run(tmp_path, ["contextuality", "--n", "5", "--kind", "odd",
                                       "--format", "json"])
        assert code == 0
        doc = json.loads(payload)
        assert doc["contextual"] is True
        assert doc["witness"]["context"] == [1, 5]

    def test_even_four(self, tmp_path):
        code, payload = run(tmp_path, ["contextuality", "--n", "4", "--kind", "even",
                                       "--format", "json"])
        assert code == 0
        assert json.loads(payload)["contextual"] is True

    def test_parity_usage_error(self, tmp_path):
        code = main(["contextuality", "--n", "4", "--kind", "odd"])
        assert code == 2

    def test_behavior_document_shape(self, tmp_path):
        _, payload = run(tmp_path, ["contextuality", "--n", "4", "--kind", "unified",
                                    "--format", "json"])
        doc = json.loads(payload)["behavior"]
        assert doc["n"] == 4
        assert doc["kind"] == "unified"
        assert doc["tables"]["1,2"]["0,1"] == 0


class TestSearch:
    def test_five_cycle_dim3(self, tmp_path):
        code, payload = run(tmp_path, ["search", "--n", "5", "--dim", "3",
                                       "--seed", "1", "--format", "json"])
        assert code == 0
        doc = json.loads(payload)
        assert doc["success"] is True and doc["dim"] == 3

    def test_four_cycle_dim4(self, tmp_path):
        code, payload = run(tmp_path, ["search", "--n", "4", "--dim", "4",
                                       "--seed", "1", "--format", "json"])
        assert code == 0
        assert json.loads(payload)["success"] is True

    def test_dim2_failure(self, tmp_path):
        code, payload = run(tmp_path, ["search", "--n", "5", "--dim", "2",
                                       "--seed", "1", "--budget", "1200",
                                       "--format", "json"])
        assert code == 1
        doc = json.loads(payload)
        assert doc["success"] is False
        assert doc["best_objective"] > 0

    def test_env_seed_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CYCLECTX_SEED", "9")
        _, payload = run(tmp_path, ["search", "--n", "4", "--dim", "4",
                                    "--seed", "1", "--format", "json"])
        assert json.loads(payload)["seed"] == 9

    def test_bad_env_seed(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CYCLECTX_SEED", "not-a-number")
        assert main(["search", "--n", "4"]) == 2


class TestVerifyAll:
    def test_nmax_guard(self):
        assert main(["verify-all", "--n-max", "13"]) == 2
        assert main(["verify-all", "--n-max", "3"]) == 2

    def test_small_run_passes(self, tmp_path):
        code, payload = run(tmp_path, ["verify-all", "--n-max", "5",
                                       "--format", "json"])
        assert code == 0
        doc = json.loads(payload)
        assert doc["passed"] is True
        assert [c["id"] for c in doc["criteria"]] == \
            ["C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8"]

    def test_text_lines(self, tmp_path):
        code, payload = run(tmp_path, ["verify-all", "--n-max", "5",
                                       "--format", "text"], "out.txt")
        assert code == 0
        lines = payload.splitlines()
        assert lines[0].startswith("C1 ") and lines[0].endswith("PASS")
        assert lines[-1] == "all criteria passed"


class TestUsage:
    def test_small_n_rejected(self):
        assert main(["contextuality", "--n", "3"]) == 2

    def test_negative_tolerance_rejected(self):
        assert main(["demo5", "--tol-prob", "-1"]) == 2
