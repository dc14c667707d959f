import sys
from pathlib import Path
from typing import Any

import click
import numpy as np

from fracsym.core import logger
from fracsym.core.config.experiment_config import ExperimentConfig
from fracsym.core.rearrange import GridFunction
from fracsym.core.symmetrize import (
    flux_comparison,
    power_comparison,
    solve_radial_nonlinear,
)

from ..utils.basic import execute, load_experiment_config, write_dump
from ..utils.options import experiment_options, split_overrides
from ..utils.report import (
    plot_concentration,
    plot_profiles,
    write_comparison_csv,
    write_crossing_csv,
    write_profiles_csv,
)
from .cmd_verify import run_comparison

POWER_COLUMNS = ["r", "conc_u_pow", "conc_v_pow", "slack"]


def _radially_nonincreasing(fn: GridFunction, tol: float) -> bool:
    """对称网格上的剖面从中心向两侧不增"""
    values = fn.values
    half = values.size // 2
    right = values[half:]
    left = values[: values.size - half][::-1]
    return bool(np.all(np.diff(right) <= tol) and np.all(np.diff(left) <= tol))


def run_figure1(cfg: ExperimentConfig, out_dir: Path) -> dict[str, Any]:
    """比较定理之外, 以 f^# 为数据求解非线性径向问题, 写出三组数据

    figure1_u.csv: x,f,u
    figure1_v.csv: x,f_sharp,u_sharp,v_nl
    power_comparison.csv: r,conc_u_pow,conc_v_pow,slack, (u^#)^{p-1} 与 v_nl^{p-1} 的集中度
    """
    report, summary = run_comparison(cfg, out_dir)
    spec = cfg.problem_spec()
    res_nl = solve_radial_nonlinear(spec, cfg.solver_config(), cfg.n_cells, cfg.weight_scheme)
    u, v_nl = report.profiles["u"], res_nl.u
    f_sharp, u_sharp = report.profiles["f_sharp"], report.profiles["u_sharp"]

    power = power_comparison(u, v_nl, spec.p)
    flux = flux_comparison(u, v_nl, spec)
    write_profiles_csv(out_dir / "figure1_u.csv", {"f": report.profiles["f"], "u": u})
    write_profiles_csv(
        out_dir / "figure1_v.csv", {"f_sharp": f_sharp, "u_sharp": u_sharp, "v_nl": v_nl}
    )
    write_comparison_csv(power, out_dir / "power_comparison.csv", POWER_COLUMNS)
    write_crossing_csv(flux, out_dir / "flux_comparison.csv")
    if cfg.emit_plots:
        plot_profiles(out_dir / "figure1_u.svg", "u", {"u": u})
        plot_profiles(out_dir / "figure1_v.svg", "v", {"u#": u_sharp, "v_nl": v_nl})
        plot_concentration(out_dir / "power_comparison.svg", power, labels=("(u#)^(p-1)", "v^(p-1)"))

    tol = report.tolerance_used
    failures = [summary["reason"]] if not summary["passed"] else []
    if min(float(u.values.min()), float(v_nl.values.min())) < -tol:
        failures.append("解出现负值")
    if not _radially_nonincreasing(v_nl, tol):
        failures.append("v_nl 不是径向不增的")
    if not _radially_nonincreasing(u_sharp, 0.0):
        failures.append("u# 不是径向不增的")
    if not power.passed:
        logger.warning(f"(p-1) 次幂比较出现超出容差的违背: {power.worst_violation:.3e}")

    summary.update(
        passed=not failures,
        reason="; ".join(failures) if failures else "比较定理成立, 剖面非负且径向不增",
        power_worst_violation=power.worst_violation,
        power_tolerance=power.tolerance_used,
        flux_min_slack=flux.min_slack,
    )
    summary["diagnostics"] = {**summary["diagnostics"], "v_nl": res_nl.diagnostics()}
    return summary


@click.command(name="figure1")
@experiment_options
def figure1(dump_target: str | None, **options) -> None:
    """复现一维算例: u, 对称化后的 u# 与 v_nl, 以及 (p-1) 次幂的集中度比较

    默认 N=1, p=3, s=1/2, f=|x|, 区间 (-1,1)。(p-1) 次幂比较只作为数值证据记录。
    """
    config_path, overrides = split_overrides(options)
    cfg = load_experiment_config("figure1", config_path, overrides)
    if dump_target:
        write_dump(cfg, dump_target)
        return
    sys.exit(execute(cfg, run_figure1))
