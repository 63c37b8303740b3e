import json
import math
from pathlib import Path

import numpy as np
import pytest

from coherent_sampling.cli import main
from coherent_sampling.modelspec import ModelSpecError, dump_superposition, load_model
from coherent_sampling.gaussian import make_cat

MODELS = Path(__file__).resolve().parent.parent / "models"


def _write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def _read_csv(path):
    lines = [l for l in Path(path).read_text().splitlines() if not l.startswith("#")]
    return lines[0].split(","), np.array([[float(v) for v in l.split(",")] for l in lines[1:]])


# -- model documents ------------------------------------------------------------------


def test_model_documents_load():
    assert load_model(MODELS / "cat.json").gaussian.chi == 2
    assert load_model(MODELS / "gkp.json").gaussian.chi == 15
    m = load_model({"type": "finite", "dim": 2, "components": [[1, 0], [0, 1]], "coeffs": [0.6, [0, 0.8]],
                    "povm": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]})
    assert m.finite[0].coeffs[1] == 0.8j


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"alpha": [1, 1]}, "type"),
        ({"type": "cat"}, "alpha"),
        ({"type": "cat", "alpha": "x"}, "alpha"),
        ({"type": "gkp", "kappa": 0.6, "delta": 0.3, "zmax": 1.5}, "zmax"),
        ({"type": "gkp", "kappa": -1, "delta": 0.3, "zmax": 7}, "kappa"),
        ({"type": "gaussian_superposition", "modes": 1, "components": [{"c": 1, "gamma": [[1, 0], [0, 2]],
                                                                        "d": [0, 0]}]}, "components[0].gamma"),
        ({"type": "gaussian_superposition", "modes": 1, "components": [{"c": 1, "gamma": [[1, 0], [0, 1]],
                                                                        "d": [0]}]}, "components[0].d"),
        ({"type": "gaussian_superposition", "modes": 1, "components": [{"c": 2, "gamma": [[1, 0], [0, 1]],
                                                                        "d": [0, 0]}]}, "normalize"),
        ({"type": "finite", "dim": 2, "components": [[1, 0]], "coeffs": [1],
          "povm": [[[1, 0], [0, 0]], [[0, 0], [0, 0.5]]]}, "povm"),
        ({"type": "spin"}, "type"),
    ],
)
def test_model_errors_name_the_field(doc, field):
    with pytest.raises(ModelSpecError, match=field.replace("[", r"\[").replace("]", r"\]")):
        load_model(doc)


def test_json_syntax_error_reports_line(tmp_path):
    p = _write(tmp_path, "bad.json", '{\n  "type": "cat",\n  "alpha": [1, 1,]\n}')
    with pytest.raises(ModelSpecError, match="line 3"):
        load_model(p)


def test_dump_roundtrip():
    sup, _ = make_cat(0.5 - 0.3j)
    back = load_model(dump_superposition(sup)).gaussian
    np.testing.assert_allclose(back.coeffs, sup.coeffs)
    np.testing.assert_allclose(back.gram, sup.gram)


# -- density ------------------------------------------------------------------------


def test_density_vacuum_origin(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["density", "--model", str(MODELS / "vacuum.json"), "--grid=-1:1:0.5", "--out", str(out)]) == 0
    header, rows = _read_csv(out)
    assert header == ["re_beta", "im_beta", "density"]
    assert rows.shape == (25, 3)
    origin = rows[(rows[:, 0] == 0) & (rows[:, 1] == 0)][0, 2]
    assert origin == pytest.approx(1 / math.pi, rel=1e-14)
    raw = out.read_bytes()
    assert b"\r" not in raw and raw.startswith(b"# ")


def test_density_cat_riemann_sum(tmp_path):
    out = tmp_path / "cat.csv"
    assert main(["density", "--model", str(MODELS / "cat.json"), "--grid=-5:5:0.1", "--out", str(out)]) == 0
    _, rows = _read_csv(out)
    assert rows.shape == (101 * 101, 3)
    assert rows[:, 2].sum() * 0.1**2 == pytest.approx(1, abs=1e-3)


def test_density_cat_coarse_grid(tmp_path):
    # 101 x 101 points over [-3, 3]^2 miss about 0.4% of the mass
    out = tmp_path / "cat.csv"
    assert main(["density", "--model", str(MODELS / "cat.json"), "--grid=-3:3:0.06", "--out", str(out)]) == 0
    _, rows = _read_csv(out)
    assert rows.shape == (10201, 3)
    assert rows[:, 2].sum() * 0.06**2 == pytest.approx(0.996, abs=1e-3)


def test_density_gkp_nonnegative(tmp_path):
    out = tmp_path / "gkp.csv"
    assert main(["density", "--model", str(MODELS / "gkp.json"), "--grid=-8:8:0.01", "--out", str(out)]) == 0
    header, rows = _read_csv(out)
    assert header == ["x", "density"] and rows.shape == (1601, 2)
    assert rows[:, 1].min() >= 0


def test_density_finite(tmp_path, capsys):
    p = _write(tmp_path, "f.json", {"type": "finite", "dim": 2, "components": [[1, 0], [0, 1]], "coeffs": [0.6, 0.8],
                                    "povm": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]})
    assert main(["density", "--model", p]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "outcome,probability"
    probs = [float(l.split(",")[1]) for l in lines[1:]]
    assert probs == pytest.approx([0.36, 0.64], abs=1e-15)


# -- sample ------------------------------------------------------------------------


def test_sample_outputs_and_determinism(tmp_path):
    args = ["sample", "--model", str(MODELS / "cat.json"), "--samples", "2000", "--seed", "7"]
    assert main(args + ["--out", str(tmp_path / "a.csv")]) == 0
    assert main(args + ["--out", str(tmp_path / "b.csv")]) == 0
    for suffix in (".csv", ".hist.csv"):
        assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()
    summary = json.loads((tmp_path / "a.summary.json").read_text())
    assert summary["seed"] == 7 and summary["n_samples"] == 2000 and summary["n_failed"] == 0
    assert summary["k_factor"] == pytest.approx(2 / (1 + math.exp(-4)))
    assert summary["bin_width"] == 0.25
    header, rows = _read_csv(tmp_path / "a.csv")
    assert header == ["index", "trials", "failed", "x1", "p1"]
    assert rows.shape == (2000, 5)
    assert rows[:, 1].mean() == pytest.approx(summary["mean_trials"])
    hheader, hist = _read_csv(tmp_path / "a.hist.csv")
    assert hheader == ["re_beta_center", "im_beta_center", "normalized_count", "density"]
    assert hist[:, 2].sum() * 0.25**2 == pytest.approx(1, abs=1e-9)


def test_sample_failure_exit_code(tmp_path, capsys):
    code = main(["sample", "--model", str(MODELS / "cat.json"), "--samples", "500", "--budget", "1"])
    assert code == 1
    summary = json.loads(capsys.readouterr().out)
    assert summary["status"] == "failed" and summary["n_failed"] > 0


def test_sample_homodyne_histogram(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["sample", "--model", str(MODELS / "gkp.json"), "--samples", "500", "--grid=-8:8:1",
                 "--out", str(out)]) == 0
    summary = json.loads((tmp_path / "g.summary.json").read_text())
    assert summary["measurement"] == "homodyne" and summary["bin_width"] == 0.1
    header, hist = _read_csv(tmp_path / "g.hist.csv")
    assert header == ["x_center", "normalized_count", "density"] and hist.shape == (160, 3)


@pytest.mark.parametrize(
    "argv",
    [
        ["sample", "--model", "cat.json", "--samples", "0"],
        ["sample", "--model", "cat.json", "--delta", "1.5"],
        ["sample", "--model", "cat.json", "--seed", "-1"],
        ["density", "--model", "cat.json", "--grid", "1:0:0.1"],
        ["density"],
        ["frobnicate"],
        ["verify", "nonsense"],
    ],
)
def test_usage_errors(argv, capsys):
    argv = [str(MODELS / a) if a == "cat.json" else a for a in argv]
    assert main(argv) == 2


def test_parse_error_exit_code(tmp_path):
    p = _write(tmp_path, "bad.json", "{")
    assert main(["density", "--model", p]) == 2
    assert main(["density", "--model", str(tmp_path / "missing.json")]) == 2


# -- verify and sparsify --------------------------------------------------------------


def test_verify_clean(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "pinching", "discrete", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["passed"]
    assert report["suites"]["pinching"][0]["min_margin"] >= 0


def test_verify_faulty_povm(capsys):
    assert main(["verify", "discrete", "--model", str(MODELS / "qubit_faulty_povm.json")]) == 1
    captured = capsys.readouterr()
    report = json.loads(captured.out)
    failed = [c["name"] for c in report["model"]["checks"] if not c["passed"]]
    assert failed == ["povm.completeness"]
    assert "completeness" in captured.err


def test_verify_gaussian_model(capsys):
    assert main(["verify", "discrete", "--model", str(MODELS / "cat.json")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert {c["name"] for c in report["model"]["checks"]} == {"mixture_bound", "normalization"}


def test_sparsify_roundtrip(tmp_path):
    out = tmp_path / "sp.json"
    assert main(["sparsify", "--model", str(MODELS / "gkp.json"), "--epsilon", "0.45", "--out", str(out)]) == 0
    report = json.loads((tmp_path / "sp.report.json").read_text())
    assert report["distance"] <= 0.9 and report["coeff_norm"] <= math.sqrt(2) * 0.45
    sparse = load_model(out).gaussian
    assert sparse.chi == report["chi"]
    assert main(["sample", "--model", str(out), "--measurement", "hom", "--samples", "100"]) == 0
    assert main(["sparsify", "--model", str(MODELS / "cat.json"), "--epsilon", "0.7"]) == 2
