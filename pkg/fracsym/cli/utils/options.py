"""实验子命令共用的命令行选项, 每个选项对应一个配置键, 未给出时取配置文件或默认值"""

from typing import Any

import click

from fracsym.core.config.default import LOG_LEVELS, SOURCES
from fracsym.core.nonlocal_op import WEIGHT_SCHEMES

_CONFIG_OPTIONS = [
    click.option("--config", "-c", "config_path", type=click.Path(dir_okay=False), help="key=value 格式的配置文件"),
    click.option("--N", "N", type=int, help="空间维数"),
    click.option("--s", "s", type=float, help="分数阶 s, 取值 (0,1)"),
    click.option("--p", "p", type=float, help="p >= 2"),
    click.option("--m", "m", type=float, help="源项的可积指标"),
    click.option("--domain-left", type=float, help="区间左端点"),
    click.option("--domain-right", type=float, help="区间右端点"),
    click.option("--source", type=str, help=f"源项: {', '.join(SOURCES)} 或 csv:<路径>"),
    click.option("--n-cells", type=int, help="网格单元数"),
    click.option("--grad-tol", type=float, help="相对梯度停止阈值"),
    click.option("--max-iters", type=int, help="最大迭代次数"),
    click.option("--line-search-shrink", type=float, help="线搜索回溯因子"),
    click.option("--initial-step", type=float, help="初始步长系数"),
    click.option("--output-dir", "-o", type=str, help="输出目录, 默认读取 FRACSYM_OUTPUT_DIR"),
    click.option("--emit-plots/--no-emit-plots", default=None, help="是否写出 SVG 图"),
    click.option("--jobs", "-j", type=int, help="扫描时的最大工作线程数"),
    click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), help="日志级别"),
    click.option("--tolerance-scale", type=float, help="默认判定容差的倍数"),
    click.option("--weight-scheme", type=click.Choice(WEIGHT_SCHEMES), help="离散权重方案"),
]


def config_options(func):
    """配置文件与逐键覆盖的选项"""
    for option in reversed(_CONFIG_OPTIONS):
        func = option(func)
    return func


def experiment_options(func):
    """config_options 加上 --dump-config"""
    func = click.option(
        "--dump-config",
        "dump_target",
        type=str,
        metavar="PATH",
        help="只写出解析后的完整配置 (PATH 为 - 时写到 stdout), 不运行实验",
    )(func)
    return config_options(func)


def split_overrides(options: dict[str, Any]) -> tuple[str | None, dict[str, Any]]:
    """把 click 收到的参数拆成 (配置文件路径, 覆盖项)"""
    options = dict(options)
    config_path = options.pop("config_path", None)
    return config_path, {k: v for k, v in options.items() if v is not None}
