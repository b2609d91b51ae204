import json

import pytest

from qchkit import cli

FLAT_CHART = {"name": "flat", "metric": ["1", "0", "0", "0", "1", "0", "0", "1", "0", "1"], "omega": ["1", "0", "0", "0", "0", "1"],
              "dist": ["1", "0", "0", "0"]}


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestCheck:
    def test_flat_all_suites(self, capsys):
        code, out, _ = run(capsys, "check", "--fixture", "flat_c2", "--points", "5")
        rep = json.loads(out)
        assert code == 0 and rep["verdict"] == "pass"
        assert set(rep["config"]["suites"]) == {
            "algebra", "kahler", "qch", "gray1", "gray2", "semisym", "weyl", "lee", "gauduchon", "foliation"
        }
        for pt in rep["points"]:
            for c in pt["checks"].values():
                assert c["residual"] < 1e-12

    def test_calabi_seeded(self, capsys):
        code, out, _ = run(
            capsys, "check", "--fixture", "calabi", "--param", "C=1",
            "--suite", "kahler,semisym,qch,gray1,gauduchon", "--points", "20", "--seed", "42",
        )
        rep = json.loads(out)
        assert code == 0 and len(rep["points"]) == 20
        assert all(p["checks"]["two_a_plus_b"]["residual"] < 1e-7 for p in rep["points"])
        assert rep["config"]["order"] == 2  # analytic theta keeps order 2

    def test_fubini_study_expected_fail(self, capsys):
        code, out, _ = run(capsys, "check", "--fixture", "fubini_study", "--suite", "gray1")
        rep = json.loads(out)
        assert code == 0
        s = rep["summary"]["gray1"]
        assert s["expected"] == "fail" and s["observed"] == "fail" and s["best_residual"] > 1e-3

    def test_mismatch_exit_1(self, capsys):
        code, out, err = run(capsys, "check", "--fixture", "fubini_study", "--suite", "gray1", "--tol", "gray1=10")
        assert code == 1 and "mismatch: gray1" in err
        assert json.loads(out)["verdict"] == "fail"

    def test_designated_point_of_calabi_general(self, capsys):
        code, out, _ = run(capsys, "check", "--fixture", "calabi_general", "--suite", "semisym", "--point", "0,0,2,0")
        assert code == 0
        assert json.loads(out)["points"][0]["checks"]["semisym"]["residual"] > 1e-4

    def test_chart_file_and_out(self, tmp_path, capsys):
        chart = tmp_path / "flat.json"
        chart.write_text(json.dumps(FLAT_CHART))
        dest = tmp_path / "rep.json"
        code, out, _ = run(capsys, "check", "--chart", str(chart), "--suite", "algebra,kahler", "--out", str(dest))
        assert code == 0 and out == ""
        assert json.loads(dest.read_text())["config"]["source"]["chart"] == str(chart)

    def test_order_forced_without_theta(self, tmp_path, capsys):
        chart = tmp_path / "flat.json"
        chart.write_text(json.dumps(FLAT_CHART))
        code, out, _ = run(capsys, "check", "--chart", str(chart), "--suite", "gauduchon", "--points", "2")
        assert code == 0 and json.loads(out)["config"]["order"] == 3

    def test_byte_identical(self, capsys):
        argv = ("check", "--fixture", "calabi_general", "--points", "6", "--seed", "7")
        _, first, _ = run(capsys, *argv, "--workers", "1")
        _, second, _ = run(capsys, *argv, "--workers", "4")
        assert first == second


class TestInputErrors:
    @pytest.mark.parametrize(
        "argv",
        [
            ("check", "--fixture", "nope"),
            ("check", "--fixture", "calabi", "--param", "C=-1"),
            ("check", "--fixture", "calabi", "--point", "0,0,-1,0"),
            ("check", "--fixture", "calabi", "--box", "0:1,0:1,-2:-1,0:1"),
            ("check", "--fixture", "flat_c2", "--tol", "nosuch=1"),
            ("check", "--chart", "/nonexistent/chart.json"),
            ("eval", "--fixture", "calabi", "--point", "0,0,0,0", "tau"),
        ],
    )
    def test_exit_2(self, capsys, argv):
        code, out, err = run(capsys, *argv)
        assert code == 2 and out == "" and err.startswith("qchkit: error:")

    def test_bad_expression_in_chart(self, tmp_path, capsys):
        chart = tmp_path / "bad.json"
        chart.write_text(json.dumps({**FLAT_CHART, "metric": ["1", "0", "0", "0", "1", "0", "0", "1", "0", "2 $"]}))
        code, _, err = run(capsys, "check", "--chart", str(chart))
        assert code == 2 and "offset" in err

    def test_argparse_rejects_bad_suite(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["check", "--fixture", "flat_c2", "--suite", "curvature"])
        assert exc.value.code == 2


class TestEvalAndFixtures:
    def test_fixtures_listing(self, capsys):
        code, out, _ = run(capsys, "fixtures")
        names = [e["name"] for e in json.loads(out)]
        assert code == 0 and "calabi" in names and "product_spheres" in names
        assert run(capsys, "fixtures")[1] == out

    def test_flat_riemann(self, capsys):
        _, out, _ = run(capsys, "eval", "--fixture", "flat_c2", "--point", "0,0,0,0", "riemann")
        flat = [x for a in json.loads(out)["riemann"] for b in a for c in b for x in c]
        assert len(flat) == 256 and all(x == 0 for x in flat)

    def test_product_coeffs(self, capsys):
        _, out, _ = run(capsys, "eval", "--fixture", "product_spheres", "--param", "kappa1=1", "--param", "kappa2=1",
                        "--point", "0,0,0,0", "coeffs")
        v = json.loads(out)
        assert v["a"] == pytest.approx(1, abs=1e-6) and v["b"] == pytest.approx(-2, abs=1e-6)
        assert v["c"] == pytest.approx(2, abs=1e-6)

    def test_calabi_tau_equals_kappa(self, capsys):
        _, tau, _ = run(capsys, "eval", "--fixture", "calabi", "--point", "0,0,1,0", "tau")
        _, kap, _ = run(capsys, "eval", "--fixture", "calabi", "--point", "0,0,1,0", "kappa")
        assert json.loads(tau)["tau"] == pytest.approx(json.loads(kap)["kappa"], abs=1e-7)

    def test_eval_chart_gamma(self, tmp_path, capsys):
        chart = tmp_path / "flat.json"
        chart.write_text(json.dumps(FLAT_CHART))
        code, out, _ = run(capsys, "eval", "--chart", str(chart), "--point", "1,2,3,4", "gamma")
        assert code == 0 and json.loads(out)["point"] == [1, 2, 3, 4]
