import json

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from fracsym.cli.__main__ import cli
from fracsym.cli.commands import cmd_verify
from fracsym.core import symmetrize
from fracsym.core.config import OUTPUT_DIR_ENV, VERSION
from fracsym.core.symmetrize import CrossingProfile, SymmetrizedDatum


@pytest.fixture
def runner(monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    return CliRunner()


def _summary(out_dir):
    return json.loads((out_dir / "summary.json").read_text(encoding="utf-8"))


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert VERSION in result.output


def test_help(runner):
    result = runner.invoke(cli, ["help"])
    assert result.exit_code == 0
    assert "verify" in result.output
    result = runner.invoke(cli, ["help", "verify"])
    assert "comparison.csv" in result.output
    result = runner.invoke(cli, ["help", "nope"])
    assert result.exit_code == 1


def test_specialfn_check(runner, tmp_path):
    result = runner.invoke(cli, ["specialfn-check", "-o", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "FRACSYM-RESULT status=pass code=0" in result.output
    table = pd.read_csv(tmp_path / "specialfn_check.csv")
    assert list(table.columns) == ["name", "value", "expected", "error", "tol", "passed"]
    assert table["passed"].all()
    assert _summary(tmp_path)["status"] == "pass"
    assert (tmp_path / "run.log").read_text(encoding="utf-8").strip()


def test_verify_linear(runner, tmp_path):
    result = runner.invoke(cli, ["verify", "--p", "2", "--n-cells", "64", "-o", str(tmp_path)])
    assert result.exit_code == 0, result.output
    lines = (tmp_path / "comparison.csv").read_text().splitlines()
    assert lines[0] == "r,conc_u_sharp,conc_v,slack"
    assert len(lines) > 2
    for name in ["key_inequality.csv", "holder_step.csv"]:
        assert (tmp_path / name).read_text().splitlines()[0] == "r,lhs,rhs,slack"
    summary = _summary(tmp_path)
    assert summary["code"] == 0
    assert summary["worst_violation"] <= summary["tolerance"]


def test_verify_is_deterministic(runner, tmp_path):
    args = ["verify", "--n-cells", "32", "--grad-tol", "1e-9"]
    first, second = tmp_path / "a", tmp_path / "b"
    assert runner.invoke(cli, args + ["-o", str(first)]).exit_code == 0
    assert runner.invoke(cli, args + ["-o", str(second)]).exit_code == 0
    for name in ["comparison.csv", "key_inequality.csv", "holder_step.csv"]:
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_verify_plots(runner, tmp_path):
    result = runner.invoke(
        cli, ["verify", "--p", "2", "--n-cells", "32", "--emit-plots", "-o", str(tmp_path)]
    )
    assert result.exit_code == 0, result.output
    assert (tmp_path / "comparison.svg").exists()
    assert (tmp_path / "comparison_profiles.svg").exists()


def test_verify_flipped_datum_fails(runner, tmp_path, monkeypatch):
    original = symmetrize.build_g

    def flipped(*args, **kwargs):
        datum = original(*args, **kwargs)
        return SymmetrizedDatum(
            datum.g.with_values(-datum.g.values), datum.H, datum.perimeter, datum.zero_mass_cells
        )

    monkeypatch.setattr(symmetrize, "build_g", flipped)
    result = runner.invoke(cli, ["verify", "--p", "2", "--n-cells", "32", "-o", str(tmp_path)])
    assert result.exit_code == 1
    assert "status=assertion_failed code=1" in result.output
    assert _summary(tmp_path)["status"] == "assertion_failed"


def test_verify_key_inequality_violation_fails(runner, tmp_path, monkeypatch):
    original = cmd_verify.key_inequality_check

    def inflated(*args, **kwargs):
        profile = original(*args, **kwargs)
        return CrossingProfile(profile.radii, profile.lhs + 1.0, profile.rhs)

    monkeypatch.setattr(cmd_verify, "key_inequality_check", inflated)
    result = runner.invoke(cli, ["verify", "--p", "2", "--n-cells", "32", "-o", str(tmp_path)])
    assert result.exit_code == 1
    assert "status=assertion_failed code=1" in result.output
    summary = _summary(tmp_path)
    assert "穿越积分不等式" in summary["reason"]
    assert summary["key_inequality_min_slack"] < -0.5


def test_out_of_range_parameter(runner, tmp_path):
    result = runner.invoke(cli, ["verify", "--s", "1.2", "-o", str(tmp_path)])
    assert result.exit_code == 2
    assert "code=2" in result.output


def test_bad_config_file(runner, tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("s=0.5\nfoo=1\n", encoding="utf-8")
    result = runner.invoke(cli, ["verify", "-c", str(conf), "-o", str(tmp_path)])
    assert result.exit_code == 2
    assert "第 2 行" in result.output


def test_nonconvergence_exit_code(runner, tmp_path):
    result = runner.invoke(
        cli, ["verify", "--n-cells", "32", "--max-iters", "1", "-o", str(tmp_path)]
    )
    assert result.exit_code == 3
    assert "status=nonconvergence code=3" in result.output
    assert _summary(tmp_path)["code"] == 3


def test_regularity_rejects_default_parameters(runner, tmp_path):
    # 默认 s = 1/2, p = 3 时 sp >= N
    result = runner.invoke(cli, ["regularity", "-o", str(tmp_path)])
    assert result.exit_code == 2
    assert "code=2" in result.output


def test_regularity_sweep(runner, tmp_path):
    result = runner.invoke(
        cli,
        [
            "regularity",
            "--s", "0.25",
            "--m", "1.5",
            "--n-cells", "32",
            "--grad-tol", "1e-9",
            "-j", "2",
            "-o", str(tmp_path),
        ],
    )
    assert result.exit_code == 0, result.output
    table = pd.read_csv(tmp_path / "regularity.csv")
    assert set(table["branch"]) == {"lorentz", "linf"}
    assert len(table) == 3 * 4
    assert len(_summary(tmp_path)["m_values"]) == 4


def test_figure1(runner, tmp_path):
    result = runner.invoke(cli, ["figure1", "--n-cells", "64", "-o", str(tmp_path)])
    assert result.exit_code == 0, result.output
    u_table = pd.read_csv(tmp_path / "figure1_u.csv")
    assert list(u_table.columns) == ["x", "f", "u"]
    v_table = pd.read_csv(tmp_path / "figure1_v.csv")
    assert list(v_table.columns) == ["x", "f_sharp", "u_sharp", "v_nl"]
    np.testing.assert_allclose(v_table["f_sharp"], 1.0 - np.abs(v_table["x"]), atol=1e-12)
    power = (tmp_path / "power_comparison.csv").read_text().splitlines()[0]
    assert power == "r,conc_u_pow,conc_v_pow,slack"
    assert "v_nl" in _summary(tmp_path)["diagnostics"]


def test_dump_config_roundtrip(runner, tmp_path):
    dumped = tmp_path / "dumped.conf"
    result = runner.invoke(cli, ["verify", "--s", "0.25", "--n-cells", "48", "--dump-config", str(dumped)])
    assert result.exit_code == 0, result.output
    text = dumped.read_text(encoding="utf-8")
    assert "s=0.25\n" in text
    assert "n_cells=48\n" in text
    assert not (tmp_path / "summary.json").exists()

    result = runner.invoke(cli, ["verify", "-c", str(dumped), "--dump-config", "-"])
    assert result.exit_code == 0
    for line in text.splitlines()[1:]:
        assert line in result.output


def test_output_dir_from_environment(runner, tmp_path, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(target))
    result = runner.invoke(cli, ["specialfn-check"])
    assert result.exit_code == 0, result.output
    assert (target / "summary.json").exists()


def test_conf_check(runner):
    result = runner.invoke(cli, ["conf", "check", "s", "0.3"])
    assert result.exit_code == 0
    assert "s: 0.3 (有效)" in result.output
    result = runner.invoke(cli, ["conf", "check", "log_level", "debug"])
    assert "log_level: DEBUG (有效)" in result.output
    assert runner.invoke(cli, ["conf", "check", "s", "3"]).exit_code == 1
    assert runner.invoke(cli, ["conf", "check", "bogus", "1"]).exit_code == 1
    assert runner.invoke(cli, ["conf", "check", "source", "csv:/no/such/file.csv"]).exit_code == 1


def test_conf_dump(runner):
    result = runner.invoke(cli, ["conf", "dump", "--p", "2.5"])
    assert result.exit_code == 0
    assert "p=2.5\n" in result.output
    assert "n_cells=256\n" in result.output
