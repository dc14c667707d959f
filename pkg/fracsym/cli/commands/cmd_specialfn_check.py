import sys
from pathlib import Path
from typing import Any

import click

from fracsym.core.config.experiment_config import ExperimentConfig
from fracsym.core.oracle_table import run_oracle_table

from ..utils.basic import execute, load_experiment_config, write_dump
from ..utils.options import experiment_options, split_overrides
from ..utils.report import write_table_csv

ORACLE_COLUMNS = ["name", "value", "expected", "error", "tol", "passed"]


def run_specialfn_check(cfg: ExperimentConfig, out_dir: Path) -> dict[str, Any]:
    results = run_oracle_table()
    rows = [
        {
            "name": r.name,
            "value": r.value,
            "expected": r.expected,
            "error": r.error,
            "tol": r.tol,
            "passed": r.passed,
        }
        for r in results
    ]
    write_table_csv(rows, ORACLE_COLUMNS, out_dir / "specialfn_check.csv")
    for r in results:
        mark = "通过" if r.passed else "失败"
        click.echo(f"  [{mark}] {r.name}: {r.value:.15g} (误差 {r.error:.2e}, 容差 {r.tol:.0e})")
    failed = [r.name for r in results if not r.passed]
    return {
        "passed": not failed,
        "reason": f"未通过: {', '.join(failed)}" if failed else f"{len(results)} 个锚点全部通过",
        "checked": len(results),
        "failed": failed,
    }


@click.command(name="specialfn-check")
@experiment_options
def specialfn_check(dump_target: str | None, **options) -> None:
    """检查特殊函数与常数的锚点值 (2F1, gamma, Theta, 分数阶周长)"""
    config_path, overrides = split_overrides(options)
    cfg = load_experiment_config("specialfn-check", config_path, overrides)
    if dump_target:
        write_dump(cfg, dump_target)
        return
    sys.exit(execute(cfg, run_specialfn_check))
