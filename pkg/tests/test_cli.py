import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from bcfkit.cli import main

DAMPED = {"kind": "damped_vibration", "eta": 0.3, "Lambda": 100, "Omega": 180, "X": 0.03}
LOGNORMAL = {"kind": "log_normal", "S": 0.3, "sigma": 0.7, "omega_c": 38}
MODEL = {"n": 5, "terms": [{"p": 1.27e4, "poles": [[183, 9.17], [67.6, 178], [1.76, 11.1]]}]}


def write(path, obj):
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(path)


def read_csv(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    assert lines[0].startswith("# manifest=manifest.json config_hash=")
    rows = list(csv.reader(lines[1:]))
    return rows[0], np.array(rows[1:], dtype=float)


@pytest.fixture
def files(tmp_path):
    return {
        "damped": write(tmp_path / "dv.json", DAMPED),
        "lognormal": write(tmp_path / "ln.json", LOGNORMAL),
        "model": write(tmp_path / "model.json", MODEL),
        "config": write(tmp_path / "cfg.json", {"n": 5, "poles_per_term": [3], "multistarts": 4}),
    }


def test_fit_writes_result_and_overlay(tmp_path, files):
    out = tmp_path / "fit"
    assert main(["fit", files["damped"], files["config"], "--out", str(out)]) == 0
    result = json.loads((out / "fit_result.json").read_text())
    manifest = json.loads((out / "manifest.json").read_text())
    assert result["manifest"]["config_hash"] == manifest["config_hash"]
    assert result["model"]["n"] == 5 and result["residual_J"] < 0.05
    header, data = read_csv(out / "fit_overlay.csv")
    assert header == ["omega_invcm", "target", "fit", "diff"]
    assert np.allclose(data[:, 3], data[:, 2] - data[:, 1], rtol=1e-12, atol=1e-14)
    assert {i["path"] for i in manifest["inputs"]} == {files["damped"], files["config"]}


def test_fit_is_reproducible(tmp_path, files):
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert main(["fit", files["lognormal"], files["config"], "--out", str(o)]) == 0
    for name in ("fit_result.json", "fit_overlay.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_fit_accepts_tabulated_target(tmp_path, files):
    w = np.geomspace(1, 4000, 2000)
    from bcfkit import DampedVibration
    J = DampedVibration(0.3, 100.0, 180.0, 0.03)(w)
    target = write(tmp_path / "tab.json", {"omega": w.tolist(), "J": J.tolist()})
    assert main(["fit", target, files["config"], "--out", str(tmp_path / "o")]) == 0


def test_even_n_is_rejected_with_reason(tmp_path, files, capsys):
    cfg = write(tmp_path / "bad.json", {"n": 4, "poles_per_term": [3]})
    assert main(["fit", files["damped"], cfg, "--out", str(tmp_path / "o")]) == 2
    assert "exponential-integral" in capsys.readouterr().err


def test_broken_json_reports_position(tmp_path, files, capsys):
    cfg = write(tmp_path / "broken.json", '{"n": 5, "poles_per_term": [3],')
    assert main(["fit", files["damped"], cfg]) == 2
    assert "broken.json:1:32" in capsys.readouterr().err


def test_schema_violation_names_field(tmp_path, files, capsys):
    cfg = write(tmp_path / "cfg2.json", {"n": 5, "poles_per_term": "three"})
    assert main(["fit", files["damped"], cfg]) == 2
    assert "poles_per_term" in capsys.readouterr().err


def test_missing_file(tmp_path, files):
    assert main(["fit", str(tmp_path / "nope.json"), files["config"]]) == 4


def test_decompose_outputs(tmp_path, files):
    out = tmp_path / "dec"
    rc = main(["decompose", files["model"], "--temp-kelvin", "77", "--L", "2",
               "--t-count", "11", "--oracle", "--out", str(out)])
    assert rc == 0
    bcf = json.loads((out / "bcf.json").read_text())
    assert len(bcf["modes"]) == 8
    header, data = read_csv(out / "bcf.csv")
    assert header == ["t_invcm", "t_fs", "re_alpha", "im_alpha", "re_exact", "im_exact", "abs_err"]
    assert np.max(data[:, 6]) <= 1e-2 * data[0, 4]
    _, g = read_csv(out / "lineshape.csv")
    assert g[0, 1] == 0.0


def test_fit_result_feeds_decompose(tmp_path, files):
    fit_dir, dec_dir = tmp_path / "fit", tmp_path / "dec"
    assert main(["fit", files["damped"], files["config"], "--out", str(fit_dir)]) == 0
    result = fit_dir / "fit_result.json"
    assert main(["decompose", str(result), "--temp-kelvin", "77", "--L", "2",
                 "--t-count", "3", "--out", str(dec_dir)]) == 0
    bcf = json.loads((dec_dir / "bcf.json").read_text())
    assert bcf["model"] == json.loads(result.read_text())["model"]


def test_decompose_needs_temperature(files):
    with pytest.raises(SystemExit) as exc:
        main(["decompose", files["model"]])
    assert exc.value.code == 2


def test_decompose_zero_scheme_warns(tmp_path, files, capsys):
    rc = main(["decompose", files["model"], "--temp-kelvin", "77", "--scheme", "zero",
               "--t-count", "5", "--out", str(tmp_path / "z")])
    assert rc == 0
    assert "warning" in capsys.readouterr().err


def test_spectrum_with_comparison(tmp_path, files):
    out = tmp_path / "sp"
    rc = main(["spectrum", files["model"], "--temp-kelvin", "77", "--L", "2",
               "--exact", files["damped"], "--gamma-add", "5", "--n-points", "65536",
               "--out", str(out)])
    assert rc == 0
    cmp = json.loads((out / "compare.json").read_text())
    assert 0 <= cmp["l1"] < 0.1
    header, data = read_csv(out / "spectrum.csv")
    assert header == ["omega_invcm", "A"]
    assert data[:, 0].min() >= -1000 and data[:, 0].max() <= 4000


def test_spectrum_unresolved_is_numerical_error(tmp_path, files, capsys):
    rc = main(["spectrum", files["model"], "--temp-kelvin", "77", "--L", "2",
               "--gamma-add", "0", "--n-points", "4096", "--out", str(tmp_path / "u")])
    assert rc == 3
    assert "decayed" in capsys.readouterr().err


def test_coth_pade_closed_form(tmp_path):
    out = tmp_path / "coth"
    assert main(["coth", "--scheme", "pade", "--L", "1", "--out", str(out)]) == 0
    header, terms = read_csv(out / "coth_terms.csv")
    assert header == ["ell", "im_xi", "eta"]
    assert terms[0, 1] == pytest.approx(np.sqrt(15), rel=1e-12)
    assert terms[0, 2] == pytest.approx(2.5, rel=1e-12)
    summary = json.loads((out / "coth_summary.json").read_text())
    assert "max_rel_err" in json.dumps(summary)


def test_threads_do_not_change_results(tmp_path, files):
    env = dict(os.environ)
    outs = []
    for threads in ("1", "4"):
        env["BCFKIT_THREADS"] = threads
        o = tmp_path / f"t{threads}"
        subprocess.run([sys.executable, "-m", "bcfkit.cli", "fit", files["lognormal"],
                        files["config"], "--out", str(o)], check=True, env=env)
        outs.append(o)
    assert (outs[0] / "fit_result.json").read_bytes() == (outs[1] / "fit_result.json").read_bytes()


def test_documented_schemas_match_shipped_ones():
    from pathlib import Path
    import bcfkit
    shipped = Path(bcfkit.__file__).parent / "schemas"
    docs = Path(__file__).resolve().parents[1] / "docs" / "schemas"
    names = sorted(p.name for p in shipped.glob("*.json"))
    assert names == sorted(p.name for p in docs.glob("*.json"))
    for name in names:
        assert (shipped / name).read_bytes() == (docs / name).read_bytes()
