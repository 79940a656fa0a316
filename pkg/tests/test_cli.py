import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from varindex.cli import main


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def analyze_json(path, capsys, *extra):
    code, out, err = run(["analyze", path, "--format", "json", *extra], capsys)
    assert code == 0, err
    return json.loads(out)


def test_analyze_real4(real4_csv, capsys):
    r = analyze_json(real4_csv, capsys)
    assert abs(r["gvi"] - 0.1397) <= 5e-4 and abs(r["mvi"] - 0.0771) <= 5e-4
    assert [pm["class"] for pm in r["per_margin"]] == ["Under"] * 4
    assert r["schema_version"] == 1 and r["n"] == 90 and r["k"] == 4
    assert r["det_corr"] == pytest.approx(np.linalg.det(np.array(r["corr"])), abs=1e-5)
    assert r["classification_gvi"] == "Under"


def test_text_and_json_numbers_agree(real4_csv, capsys):
    r = analyze_json(real4_csv, capsys)
    code, text, _ = run(["analyze", real4_csv], capsys)
    assert code == 0
    assert f"GVI = {r['gvi']:.6g}" in text
    assert f"MVI = {r['mvi']:.6g}" in text
    assert f"[{r['ci_gvi']['lower']:.6g}, {r['ci_gvi']['upper']:.6g}]" in text


def test_precision_flag(real4_csv, capsys):
    code, out, _ = run(["--precision", "3", "analyze", real4_csv, "--format", "json"], capsys)
    assert json.loads(out)["gvi"] == 0.14


def test_ci_consistent_with_se(real4_csv, capsys):
    r = analyze_json(real4_csv, capsys, "--level", "0.9")
    half = (r["ci_gvi"]["upper"] - r["ci_gvi"]["lower"]) / 2
    assert half == pytest.approx(1.6448536 * r["se_gvi"], rel=1e-4)
    assert r["ci_gvi"]["level"] == 0.9


def test_analyze_with_bootstrap(real4_csv, capsys):
    r = analyze_json(real4_csv, capsys, "--bootstrap", "200", "--seed", "4")
    assert r["bootstrap"]["replicates"] == 200 and r["bootstrap"]["seed"] == 4
    assert r["bootstrap"]["se_gvi"] > 0


def test_analyze_single_column(tmp_path, capsys):
    p = tmp_path / "one.csv"
    p.write_text("1\n3\n4\n8\n")
    r = analyze_json(p, capsys)
    assert r["gvi"] == r["mvi"] and "k = 1" in r["note"]


def test_analyze_negative_value(tmp_path, capsys):
    p = tmp_path / "neg.csv"
    p.write_text("1,2\n-1,3\n")
    code, out, err = run(["analyze", p], capsys)
    assert code == 2 and out == "" and "nonpositive" in err


def test_analyze_missing_file(tmp_path, capsys):
    code, out, err = run(["analyze", tmp_path / "nope.csv"], capsys)
    assert code == 2 and out == ""


def test_analyze_constant_column_is_numeric_error(tmp_path, capsys):
    p = tmp_path / "const.csv"
    p.write_text("1,2\n2,2\n3,2\n")
    code, out, err = run(["analyze", p], capsys)
    assert code == 3 and out == "" and "degenerate" in err


def test_family_examples(capsys):
    code, out, _ = run(["family", "mo", "--params", '{"mu":[1,1],"mu0":1}', "--format", "json"],
                       capsys)
    r = json.loads(out)
    assert r["gvi"] == pytest.approx(2 / 3, abs=5e-6) and r["mvi"] == 0.5
    assert r["excess_gvi"] == pytest.approx(7 / 6, abs=5e-6) and r["form"] == "closed"
    code, out, _ = run(["family", "weibull-margin", "--params", '{"beta":0.3}', "--format",
                        "json"], capsys)
    assert abs(json.loads(out)["vi"] - 29.24) <= 0.01
    code, out, _ = run(["family", "mst", "--params", '{"p":[2,2],"lambda":1}', "--mean", "1,1",
                        "--format", "json"], capsys)
    r = json.loads(out)
    assert r["gvi"] == 1.25 and r["mvi"] == 0.75


def test_family_text_labels(capsys):
    code, out, _ = run(["family", "exp", "--params", '{"mu":[1,1],"rho":[[1,0.5],[0.5,1]]}'],
                       capsys)
    assert code == 0 and "canonical" in out and "excess form" in out


def test_family_monte_carlo_label(capsys):
    params = '{"alpha0":1,"alpha1":2,"alpha2":3,"alpha1p":0,"alpha2p":0}'
    code, out, _ = run(["family", "an", "--params", params, "--n", "5000", "--format", "json"],
                       capsys)
    assert code == 0 and json.loads(out)["form"] == "monte-carlo"


@pytest.mark.parametrize("argv", [
    ["family", "mo", "--params", '{"mu":[1,-1],"mu0":1}'],
    ["family", "mo", "--params", '{"mu":[1,1]}'],
    ["family", "mo", "--params", "not json"],
    ["family", "tg", "--params", '{"alpha1":1,"alpha2":1,"beta1":1,"beta2":1,"gamma":0.5,"delta":1}'],
    ["family", "mst", "--params", '{"p":[2,2]}'],
])
def test_family_invalid(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2 and out == "" and err


def _scenario(tmp_path, marginals, corr, n=2000, seed=5):
    p = tmp_path / "spec.json"
    p.write_text(json.dumps({"n": n, "seed": seed, "marginals": marginals, "target_corr": corr}))
    return p


def test_simulate_independent_exponentials(tmp_path, capsys):
    spec = _scenario(tmp_path, [{"kind": "exponential", "mean": 1}] * 2, [[1, 0], [0, 1]], 20_000)
    out = tmp_path / "d.csv"
    code, _, _ = run(["simulate", spec, "-o", out], capsys)
    assert code == 0
    r = analyze_json(out, capsys)
    assert r["n"] == 20_000 and r["gvi"] == pytest.approx(r["mvi"], abs=0.02)
    side = json.loads((tmp_path / "d.csv.json").read_text())
    assert {"matched_gaussian_corr", "repaired", "achieved_corr", "target_corr"} <= set(side)


def test_simulate_same_seed_identical(tmp_path, capsys):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    for path in (a, b):
        assert run(["simulate", "three_variate_under", "-o", path, "--n", "300"], capsys)[0] == 0
    assert run(["simulate", "three_variate_under", "-o", c, "--n", "300", "--seed", "77"],
               capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_simulate_six_variate_equi(tmp_path, capsys):
    out = tmp_path / "six.csv"
    assert run(["simulate", "six_variate", "-o", out], capsys)[0] == 0
    r = analyze_json(out, capsys, "--tol", "0.1")
    assert r["classification_gvi"] == "Equi"


def test_simulate_errors(tmp_path, capsys):
    bad = _scenario(tmp_path, [{"kind": "exponential", "mean": 1}] * 2, [[1, 0.5], [0.4, 1]])
    code, out, err = run(["simulate", bad, "-o", tmp_path / "x.csv"], capsys)
    assert code == 2 and out == ""
    infeasible = _scenario(tmp_path, [{"kind": "exponential", "mean": 1}] * 2,
                           [[1, -0.9], [-0.9, 1]])
    code, out, err = run(["simulate", infeasible, "-o", tmp_path / "y.csv"], capsys)
    assert code == 3 and "infeasible" in err and "attainable interval" in err
    assert not (tmp_path / "y.csv").exists()


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_convergence_halfwidths_decrease(tmp_path, capsys):
    prefix = tmp_path / "cv"
    code, _, _ = run(["convergence", "six_variate", "--sizes", "500,1000,5000",
                      "--replicates", "20", "-o", prefix], capsys)
    assert code == 0
    rows = _read(f"{prefix}_table.csv")
    hw = [float(r["gvi_halfwidth"]) for r in rows]
    assert hw[0] > hw[1] > hw[2]
    mw = [float(r["mvi_halfwidth"]) for r in rows]
    assert mw[0] > mw[1] > mw[2]
    long = _read(f"{prefix}_boxplot.csv")
    assert len(long) == 3 * 20 * 2
    assert set(long[0]) == {"replicate", "n", "index", "value"}


def test_convergence_under_varied(tmp_path, capsys):
    prefix = tmp_path / "u"
    assert run(["convergence", "three_variate_under", "--sizes", "1000,3000",
                "--replicates", "20", "-o", prefix], capsys)[0] == 0
    for r in _read(f"{prefix}_table.csv"):
        assert float(r["gvi"]) < 1 and float(r["mvi"]) < 1


def test_convergence_single_replicate(tmp_path, capsys):
    prefix = tmp_path / "one"
    assert run(["convergence", "three_variate_under", "--sizes", "100",
                "--replicates", "1", "-o", prefix], capsys)[0] == 0
    assert len(_read(f"{prefix}_table.csv")) == 1


@pytest.mark.parametrize("extra", [["--sizes", "1000,500"], ["--budget", "10"]])
def test_convergence_invalid(tmp_path, capsys, extra):
    code, out, err = run(["convergence", "three_variate_under", "-o", tmp_path / "z", *extra],
                         capsys)
    assert code == 2 and out == ""


def test_console_entry_point(real4_csv):
    res = subprocess.run([sys.executable, "-m", "varindex", "analyze", str(real4_csv),
                          "--format", "json"], capture_output=True, text=True)
    assert res.returncode == 0
    assert abs(json.loads(res.stdout)["gvi"] - 0.1397) <= 5e-4
