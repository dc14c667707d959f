import numpy as np
import pytest

from fracsym.core.config import DEFAULT_CONFIG, OUTPUT_DIR_ENV
from fracsym.core.config.experiment_config import (
    ExperimentConfig,
    build_source,
    dump_config,
    parse_config,
    read_config_file,
    validate_key,
)
from fracsym.core.errors import ConfigError
from fracsym.core.rearrange import GridFunction, write_grid_csv


def _write(tmp_path, text, name="run.conf"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_defaults():
    cfg = parse_config(environ={})
    assert cfg.model_dump() == DEFAULT_CONFIG
    solver = cfg.solver_config()
    assert solver.grad_tol == DEFAULT_CONFIG["grad_tol"]
    assert solver.max_iters == DEFAULT_CONFIG["max_iters"]


def test_parse_file(tmp_path):
    path = _write(
        tmp_path,
        "# 注释\n\nexperiment=figure1\ns = 0.25\np=2.5\nemit_plots=true\nlog_level=debug\n",
    )
    cfg = parse_config(path, environ={})
    assert cfg.experiment == "figure1"
    assert cfg.s == 0.25
    assert cfg.p == 2.5
    assert cfg.emit_plots is True
    assert cfg.log_level == "DEBUG"


def test_overrides_beat_file(tmp_path):
    path = _write(tmp_path, "s=0.25\nn_cells=64\n")
    cfg = parse_config(path, {"s": 0.75, "n_cells": None}, environ={})
    assert cfg.s == 0.75
    assert cfg.n_cells == 64


@pytest.mark.parametrize(
    "text,line_no",
    [
        ("p=3\ns=1.5\n", 2),
        ("s=0.5\nbogus=1\n", 2),
        ("s=0.5\n\ns=0.3\n", 3),
        ("no equals sign\n", 1),
        ("# c\ns=\n", 2),
        ("n_cells=4\n", 1),
        ("log_level=loud\n", 1),
    ],
)
def test_file_errors_carry_line_numbers(tmp_path, text, line_no):
    path = _write(tmp_path, text)
    with pytest.raises(ConfigError) as exc_info:
        parse_config(path, environ={})
    assert exc_info.value.line_no == line_no
    assert f"第 {line_no} 行" in str(exc_info.value)


def test_field_error_names_key(tmp_path):
    path = _write(tmp_path, "s=1.5\n")
    with pytest.raises(ConfigError, match="s: s 必须在"):
        parse_config(path, environ={})


def test_override_error_has_no_line_number(tmp_path):
    path = _write(tmp_path, "s=0.25\n")
    with pytest.raises(ConfigError) as exc_info:
        parse_config(path, {"s": 2.0}, environ={})
    assert exc_info.value.line_no is None


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "missing.conf")


def test_unknown_override():
    with pytest.raises(ConfigError):
        parse_config(overrides={"bogus": 1}, environ={})


def test_summability_and_domain_checks():
    with pytest.raises(ConfigError, match="可积性"):
        parse_config(overrides={"s": 0.25, "p": 3.0, "m": 1.0}, environ={})
    with pytest.raises(ConfigError):
        parse_config(overrides={"domain_left": 1.0, "domain_right": -1.0}, environ={})


def test_output_dir_precedence(tmp_path):
    env = {OUTPUT_DIR_ENV: "from_env"}
    assert parse_config(environ=env).output_dir == "from_env"
    path = _write(tmp_path, "output_dir=from_file\n")
    assert parse_config(path, environ=env).output_dir == "from_file"
    assert parse_config(path, {"output_dir": "from_cli"}, environ=env).output_dir == "from_cli"


def test_env_output_dir_from_process(monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, "elsewhere")
    assert parse_config().output_dir == "elsewhere"


def test_dump_roundtrip(tmp_path):
    cfg = parse_config(
        overrides={"s": 0.1 + 0.2, "grad_tol": 3e-9, "emit_plots": True, "source": "tent"},
        environ={},
    )
    text = dump_config(cfg)
    assert text.startswith("# fracsym ")
    assert "s=0.30000000000000004\n" in text
    assert "emit_plots=true\n" in text
    path = _write(tmp_path, text)
    assert parse_config(path, environ={}) == cfg


def test_config_is_frozen():
    cfg = parse_config(environ={})
    with pytest.raises(Exception):
        cfg.s = 0.3
    with pytest.raises(Exception):
        ExperimentConfig(**DEFAULT_CONFIG, extra_key=1)


@pytest.mark.parametrize(
    "source,expected",
    [
        ("abs_x", lambda x: np.abs(x)),
        ("const", lambda x: np.ones_like(x)),
        ("tent", lambda x: 1.0 - np.abs(x)),
    ],
)
def test_builtin_sources(source, expected):
    cfg = parse_config(overrides={"source": source, "n_cells": 32}, environ={})
    f = cfg.source_function()
    assert f.n_cells == 32
    np.testing.assert_allclose(f.values, expected(f.centers))


def test_csv_source_is_resampled(tmp_path):
    data = GridFunction.from_callable(lambda x: 1.0 - np.abs(x), -1.0, 1.0, 16)
    csv = tmp_path / "f.csv"
    write_grid_csv(data, csv)
    cfg = parse_config(overrides={"source": f"csv:{csv}", "n_cells": 40}, environ={})
    f = build_source(cfg)
    assert f.n_cells == 40
    assert f.integral() == pytest.approx(data.integral(), rel=1e-12)


def test_csv_source_errors(tmp_path):
    missing = parse_config(overrides={"source": f"csv:{tmp_path / 'none.csv'}"}, environ={})
    with pytest.raises(ConfigError):
        missing.source_function()
    data = GridFunction.from_callable(np.ones_like, 0.0, 2.0, 16)
    csv = tmp_path / "f.csv"
    write_grid_csv(data, csv)
    shifted = parse_config(overrides={"source": f"csv:{csv}"}, environ={})
    with pytest.raises(ConfigError, match="不一致"):
        shifted.source_function()
    with pytest.raises(ConfigError):
        parse_config(overrides={"source": "gaussian"}, environ={})


def test_problem_spec_from_config():
    cfg = parse_config(overrides={"n_cells": 32}, environ={})
    spec = cfg.problem_spec()
    assert (spec.s, spec.p, spec.N, spec.m) == (cfg.s, cfg.p, cfg.N, cfg.m)
    assert spec.f.n_cells == 32
    assert cfg.problem_spec(m=5.0).m == 5.0


def test_validate_key():
    assert validate_key("s", "0.3") == 0.3
    assert validate_key("log_level", "warning") == "WARNING"
    with pytest.raises(ConfigError):
        validate_key("s", "2")
    with pytest.raises(ConfigError):
        validate_key("bogus", "1")
