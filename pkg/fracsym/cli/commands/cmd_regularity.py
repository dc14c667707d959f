import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path
from typing import Any

import click

from fracsym.core import logger
from fracsym.core.config.experiment_config import ExperimentConfig
from fracsym.core.nonlocal_op import ProblemSpec
from fracsym.core.rearrange import GridFunction
from fracsym.core.symmetrize import (
    RegularityRecord,
    regularity_exponents,
    regularity_record,
    regularity_sweep_values,
    solve_problem,
)

from ..utils.basic import execute, load_experiment_config, write_dump
from ..utils.options import experiment_options, split_overrides
from ..utils.report import write_table_csv

# 源项振幅覆盖 10 倍范围
AMPLITUDES = (1.0, math.sqrt(10.0), 10.0)
RATIO_SPREAD_TOL = 1e-6
REGULARITY_COLUMNS = ["amplitude", "m", "q", "lorentz_index", "ratio", "branch", "u_norm", "f_norm"]


def sweep_m_values(cfg: ExperimentConfig) -> list[float]:
    """可容许区间内的 3 个 m, 再加上配置中的 m (若不重复)"""
    values = regularity_sweep_values(cfg.N, cfg.s, cfg.p)
    # 临界指标等不合法的 m 在这里直接报错
    regularity_exponents(cfg.N, cfg.s, cfg.p, cfg.m)
    if not any(math.isclose(cfg.m, v, rel_tol=1e-12) for v in values):
        values.append(cfg.m)
    return values


def _records_for_amplitude(
    cfg: ExperimentConfig, base: GridFunction, amplitude: float, m_values: list[float]
) -> list[tuple[float, RegularityRecord]]:
    f = base.with_values(amplitude * base.values)
    spec = ProblemSpec(s=cfg.s, p=cfg.p, f=f, N=cfg.N, m=m_values[0])
    u = solve_problem(spec, cfg.solver_config(), cfg.n_cells, cfg.weight_scheme).u
    records = []
    for m in m_values:
        spec_m = ProblemSpec(s=cfg.s, p=cfg.p, f=f, N=cfg.N, m=m)
        records.append((amplitude, regularity_record(spec_m, cfg.solver_config(), cfg.n_cells, u=u)))
    logger.info(f"振幅 {amplitude:.6g} 完成")
    return records


def run_regularity(cfg: ExperimentConfig, out_dir: Path) -> dict[str, Any]:
    """对 3 个振幅的源项求解, 计算每个 m 的 ||u||_q / ||f||^{1/(p-1)}

    比值只依赖 f 的形状, 同一 m 下各振幅的比值最大/最小须不超过 1 + 1e-6。
    """
    m_values = sweep_m_values(cfg)
    base = cfg.source_function()
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        batches = list(
            pool.map(lambda a: _records_for_amplitude(cfg, base, a, m_values), AMPLITUDES)
        )
    rows = [{"amplitude": a, **asdict(rec)} for batch in batches for a, rec in batch]
    write_table_csv(rows, REGULARITY_COLUMNS, out_dir / "regularity.csv")

    failures, spreads = [], {}
    for m in m_values:
        ratios = [row["ratio"] for row in rows if row["m"] == m]
        if not all(math.isfinite(r) and r > 0 for r in ratios):
            failures.append(f"m={m:.6g} 时比值不是有限正数")
            continue
        spread = max(ratios) / min(ratios)
        spreads[f"{m:.12g}"] = spread
        logger.info(f"m = {m:.6g}: 比值 {min(ratios):.10g}, 振幅间的最大/最小 {spread:.12g}")
        if spread > 1.0 + RATIO_SPREAD_TOL:
            failures.append(f"m={m:.6g} 时比值随振幅变化: 最大/最小 = {spread:.12g}")

    return {
        "passed": not failures,
        "reason": "; ".join(failures) if failures else "各振幅下比值一致",
        "m_values": m_values,
        "ratio_spread": spreads,
        "records": rows,
    }


@click.command(name="regularity")
@experiment_options
def regularity(dump_target: str | None, **options) -> None:
    """正则性估计的缩放检验, 要求 sp < N

    m 取 [pN/((p-1)N+sp), N/(sp)) 内的 3 个值加上配置中的 m; m > N/(sp) 时走 L^inf 分支。
    --jobs 限制并行求解的线程数。结果写入 regularity.csv。
    """
    config_path, overrides = split_overrides(options)
    cfg = load_experiment_config("regularity", config_path, overrides)
    if dump_target:
        write_dump(cfg, dump_target)
        return
    sys.exit(execute(cfg, run_regularity))
