import csv
import io
import json

import pytest

from adiabreak import cli
from adiabreak.specfun import GAMMA, GammaConstants


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_survival_csv(capsys):
    code, out, _ = run(capsys, "survival", "--epsilon", "0.02,0.01,0.005")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert tuple(rows[0]) == cli.SURVIVAL_COLUMNS
    assert len(rows) == 4
    for r in rows[1:]:
        eps, surv = float(r[0]), float(r[2])
        assert abs(surv - 2 ** -0.5) < 5 * eps
        assert r[3] == "" and r[8] == "false"


def test_survival_json_and_determinism(tmp_path, capsys):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (out1, out2):
        assert cli.main(["survival", "--epsilon", "0.05,0.02", "--out", str(path), "--workers", "2"]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert b"\r" not in out1.read_bytes()
    doc = json.loads((tmp_path / "a.json").read_text())
    assert doc["schema_version"] == cli.SCHEMA_VERSION
    assert set(doc) == {"schema_version", "config", "records", "fits"}
    assert [r["epsilon"] for r in doc["records"]] == [0.05, 0.02]
    assert 0 < doc["fits"]["survival_constant_max"] < 5


def test_survival_oracle_mode(capsys):
    code, out, _ = run(capsys, "survival", "--epsilon", "0.1", "--mode", "oracle_ode", "--L", "0.5")
    assert code == 0
    row = list(csv.reader(io.StringIO(out)))[1]
    assert abs(float(row[2]) - float(row[3])) < 1e-8


def test_sweep_spacings():
    assert cli.sweep_values(None, 0.1, 3, "dyadic") == (0.1, 0.05, 0.025)
    assert cli.sweep_values(0.01, 0.1, 2, "log") == pytest.approx((0.01, 0.1))
    with pytest.raises(cli.ConfigError):
        cli.sweep_values(0.01, 0.1, 0, "log")


def test_excluded_flags_in_sweep(capsys):
    code, out, _ = run(capsys, "survival", "--eps-min", "0.002", "--eps-max", "0.05",
                       "--count", "40", "--spacing", "log", "--L", "1")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))[1:]
    assert any(r[8] == "true" for r in rows) and any(r[8] == "false" for r in rows)


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\nepsilon = 0.05\nL = 0\nmode = closed_form\n")
    code, out, _ = run(capsys, "survival", "--config", str(cfg))
    assert code == 0 and out.splitlines()[1].startswith("0.050000000000000003,")
    code, out, _ = run(capsys, "survival", "--config", str(cfg), "--epsilon", "0.1")
    assert out.splitlines()[1].startswith("0.10000000000000001,")


@pytest.mark.parametrize("argv", [
    ["survival", "--epsilon", "1.5"],
    ["survival", "--epsilon", "0.1", "--L", "-1"],
    ["survival"],
    ["survival", "--epsilon", "0.1", "--mode", "nope"],
    ["trajectory", "--epsilon", "0.1", "--n-samples", "1"],
    ["excluded", "--L", "0"],
    ["bogus"],
])
def test_invalid_config_exit_code(argv, capsys):
    assert cli.main(argv) == 2


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("no equals sign here\n")
    assert cli.main(["survival", "--config", str(cfg)]) == 2
    cfg.write_text("colour = red\n")
    assert cli.main(["survival", "--config", str(cfg)]) == 2
    assert cli.main(["survival", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_computational_failure_exit_code(capsys, monkeypatch):
    def boom(*a, **k):
        raise ArithmeticError("forced")

    monkeypatch.setattr(cli.scenario, "run", boom)
    code, _, err = run(capsys, "survival", "--epsilon", "0.1")
    assert code == 1 and "forced" in err


def test_trajectory(capsys):
    code, out, _ = run(capsys, "trajectory", "--epsilon", "0.1", "--n-samples", "11")
    assert code == 0
    rows = [list(map(float, r)) for r in list(csv.reader(io.StringIO(out)))[1:]]
    assert len(rows) == 11
    t, re_l, im_l, re_m, im_m, _ = rows[0]
    assert t == -10.0 and abs(re_l - 1) < 1e-14 and abs(im_l) < 1e-14
    assert abs(re_m - 3.1415926535897931 ** -0.25) < 1e-14 and abs(im_m) < 1e-14
    assert max(abs(r[5]) for r in rows) <= 1e-10


def test_trajectory_l_positive(tmp_path):
    out = tmp_path / "t.csv"
    assert cli.main(["trajectory", "--epsilon", "0.1", "--L", "0.5", "--n-samples", "31", "--out", str(out)]) == 0
    rows = [list(map(float, r)) for r in list(csv.reader(out.open()))[1:]]
    assert rows[0][0] == -15.0 and rows[-1][0] == 15.0
    assert max(abs(r[5]) for r in rows) <= 1e-10
    doc = json.loads((tmp_path / "t.json").read_text())
    assert abs(doc["fits"]["abs_l0_over_2c1_sqrt_eps_abs_kappa"] - 1) < 1e-10


def test_verify_fast(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    doc = json.loads(out)
    assert doc["fits"]["all_passed"] is True
    assert {r["suite"] for r in doc["records"]} == {"specfun", "invariants", "oracle_ode"}


def test_verify_negative_control():
    bad = GammaConstants(gamma_3_4=GAMMA.gamma_3_4 * (1 + 1e-6))
    passed, doc = cli.cmd_verify("fast", constants=bad)
    assert not passed
    spec = next(r for r in doc["records"] if r["suite"] == "specfun")
    assert spec["detail"]["gamma_reflection"]["passed"] is False


def test_excluded(tmp_path):
    out = tmp_path / "ex.csv"
    assert cli.main(["excluded", "--L", "1", "--delta", "0.5", "--c-excl", "0.05",
                     "--scan-points", "50", "--out", str(out)]) == 0
    text = out.read_text()
    intervals, scan = text.split("\n\n")
    rows = [list(map(float, r)) for r in list(csv.reader(io.StringIO(intervals)))[1:]]
    centers = [r[1] for r in rows]
    assert all(a > b for a, b in zip(centers, centers[1:]))
    for n, _, radius in rows[1:]:
        assert radius == pytest.approx(0.05 * n ** -2.25)
    assert scan.startswith(",".join(cli.SCAN_COLUMNS))
    doc = json.loads((tmp_path / "ex.json").read_text())
    assert 0 < doc["fits"]["covering_measure"] <= doc["fits"]["range_length"]


def test_fmt():
    assert cli.fmt(0.1) == "0.10000000000000001"
    assert cli.fmt(None) == "" and cli.fmt(True) == "true" and cli.fmt(3) == "3"
