from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import click
from filelock import FileLock, Timeout
from pydantic import ValidationError

from fracsym.core import LogManager, RunLogBuffer, logger
from fracsym.core.config.experiment_config import (
    ExperimentConfig,
    dump_config,
    parse_config,
)
from fracsym.core.errors import (
    ConfigError,
    ConvergenceError,
    FracSymError,
    ParameterRangeError,
)

from .report import write_run_log, write_summary

EXIT_PASS = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3

# 实验函数: (配置, 输出目录) -> 摘要, 摘要中必须有 passed 和 reason
ExperimentFn = Callable[[ExperimentConfig, Path], dict[str, Any]]


@dataclass
class RunOutcome:
    status: str
    code: int
    reason: str


def get_output_dir(cfg: ExperimentConfig) -> Path:
    """获取并创建输出目录"""
    path = Path(cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def classify_exception(e: Exception) -> RunOutcome:
    """把异常翻译成退出码"""
    if isinstance(e, ConvergenceError):
        return RunOutcome("nonconvergence", EXIT_CONVERGENCE, str(e))
    if isinstance(e, (ConfigError, ParameterRangeError, ValidationError)):
        return RunOutcome("config_error", EXIT_CONFIG, str(e))
    return RunOutcome("assertion_failed", EXIT_ASSERTION, str(e))


def echo_result(outcome: RunOutcome) -> None:
    """在 stderr 上输出一行机器可读的结果"""
    reason = " ".join(outcome.reason.split()) or "-"
    click.echo(
        f"FRACSYM-RESULT status={outcome.status} code={outcome.code} reason={reason}",
        err=True,
    )


def load_experiment_config(
    experiment: str, config_path: str | None, overrides: dict[str, Any]
) -> ExperimentConfig:
    """解析配置, 失败时输出结果行并以退出码 2 结束

    命令名决定 experiment, 配置文件中的 experiment 会被覆盖。
    """
    try:
        return parse_config(config_path, {**overrides, "experiment": experiment})
    except ConfigError as e:
        outcome = classify_exception(e)
        echo_result(outcome)
        raise click.exceptions.Exit(outcome.code)


def write_dump(cfg: ExperimentConfig, target: str) -> None:
    """写出完整配置, target 为 - 时写到 stdout"""
    text = dump_config(cfg)
    if target == "-":
        click.echo(text, nl=False)
        return
    Path(target).write_text(text, encoding="utf-8")
    click.echo(f"配置已写入 {target}", err=True)


def execute(cfg: ExperimentConfig, experiment_fn: ExperimentFn) -> int:
    """在输出目录锁内运行一次实验, 写出 run.log 与 summary.json

    Returns:
        int: 退出码, 0 通过, 1 断言失败, 2 配置错误, 3 求解不收敛
    """
    out_dir = get_output_dir(cfg)
    buffer = RunLogBuffer()
    handler = LogManager.attach_run_buffer(logger, buffer)
    LogManager.set_level(logger, cfg.log_level)
    lock = FileLock(out_dir / "fracsym.lock", timeout=5)
    try:
        with lock.acquire():
            logger.info(f"开始实验 {cfg.experiment}, 输出目录 {out_dir}")
            for line in dump_config(cfg).splitlines()[1:]:
                logger.info(f"  {line}")
            summary: dict[str, Any] = {"experiment": cfg.experiment}
            try:
                summary.update(experiment_fn(cfg, out_dir))
                passed = bool(summary.pop("passed"))
                outcome = RunOutcome(
                    "pass" if passed else "assertion_failed",
                    EXIT_PASS if passed else EXIT_ASSERTION,
                    summary.get("reason", ""),
                )
            except (FracSymError, ValidationError) as e:
                outcome = classify_exception(e)
                logger.error(f"实验 {cfg.experiment} 失败: {e}")
            logger.info(f"实验结束: status={outcome.status}, code={outcome.code}")
            summary.update(status=outcome.status, code=outcome.code, reason=outcome.reason)
            write_summary(summary, out_dir / "summary.json")
            write_run_log(buffer, out_dir / "run.log")
    except Timeout:
        raise click.ClickException(f"无法获取输出目录锁 {out_dir / 'fracsym.lock'}, 请检查是否有其他实验正在写入")
    finally:
        LogManager.detach_run_buffer(logger, handler)
    echo_result(outcome)
    return outcome.code
