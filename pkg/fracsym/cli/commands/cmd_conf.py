from functools import partial
from pathlib import Path
from typing import Any, Callable

import click

from fracsym.core.config.default import DEFAULT_CONFIG, LOG_LEVELS, SOURCES
from fracsym.core.config.experiment_config import (
    CSV_SOURCE_PREFIX,
    dump_config,
    parse_config,
    validate_key,
)
from fracsym.core.errors import ConfigError

from ..utils.options import config_options, split_overrides


def _validate_log_level(value: str) -> str:
    """验证日志级别"""
    value = value.upper()
    if value not in LOG_LEVELS:
        raise click.ClickException(f"日志级别必须是 {'/'.join(LOG_LEVELS)} 之一")
    return value


def _validate_source(value: str) -> str:
    """验证源项, csv 源项要求文件存在"""
    if value.startswith(CSV_SOURCE_PREFIX):
        path = Path(value[len(CSV_SOURCE_PREFIX):])
        if not path.exists():
            raise click.ClickException(f"源项文件不存在: {path}")
        return value
    if value not in SOURCES:
        raise click.ClickException(f"源项必须是 {', '.join(SOURCES)} 或 csv:<路径>")
    return value


def _validate_field(key: str, value: str) -> Any:
    """用实验配置模型校验单个键, 其余键取默认值"""
    try:
        return validate_key(key, value)
    except ConfigError as e:
        raise click.ClickException(str(e))


# 配置键到验证器函数的映射
CONFIG_VALIDATORS: dict[str, Callable[[str], Any]] = {
    key: partial(_validate_field, key) for key in DEFAULT_CONFIG
}
CONFIG_VALIDATORS["log_level"] = _validate_log_level
CONFIG_VALIDATORS["source"] = _validate_source


@click.group(name="conf")
def conf():
    """配置管理命令

    支持的配置项:

    - experiment: verify/figure1/regularity/specialfn-check

    - N, s, p, m: 维数, 分数阶 s in (0,1), p >= 2, 源项可积指标

    - domain_left, domain_right: 区间端点

    - source: abs_x/const/tent 或 csv:<路径>

    - n_cells, grad_tol, max_iters, line_search_shrink, initial_step, weight_scheme: 离散与求解器参数

    - output_dir, emit_plots, jobs, log_level, tolerance_scale: 运行参数
    """
    pass


@conf.command(name="dump")
@config_options
def dump(**options) -> None:
    """输出解析后的完整配置"""
    config_path, overrides = split_overrides(options)
    try:
        cfg = parse_config(config_path, overrides)
    except ConfigError as e:
        raise click.ClickException(str(e))
    click.echo(dump_config(cfg), nl=False)


@conf.command(name="check")
@click.argument("key")
@click.argument("value")
def check(key: str, value: str) -> None:
    """校验单个配置项的值"""
    if key not in CONFIG_VALIDATORS.keys():
        raise click.ClickException(f"不支持的配置项: {key}")
    validated_value = CONFIG_VALIDATORS[key](value)
    click.echo(f"{key}: {validated_value} (有效)")
