"""
实验产物的写出: CSV、SVG 静态图、run.log 与 summary.json

CSV 统一用 %.17g 写浮点数、\\n 换行, 相同配置两次运行得到逐字节相同的文件。
"""

import json
import math
from pathlib import Path
from typing import Any

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from fracsym.core import RunLogBuffer, logger  # noqa: E402
from fracsym.core.config.experiment_config import ExperimentConfig  # noqa: E402
from fracsym.core.rearrange import GridFunction  # noqa: E402
from fracsym.core.symmetrize import ComparisonReport, CrossingProfile  # noqa: E402

plt.rcParams["svg.hashsalt"] = "fracsym"

COMPARISON_COLUMNS = ["r", "conc_u_sharp", "conc_v", "slack"]
CROSSING_COLUMNS = ["r", "lhs", "rhs", "slack"]


def _write_frame(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    logger.debug(f"写出 {path}")
    return path


def write_comparison_csv(
    report: ComparisonReport, path: Path, columns: list[str] = COMPARISON_COLUMNS
) -> Path:
    """默认表头 r,conc_u_sharp,conc_v,slack, slack = conc_v - conc_u_sharp"""
    data = (report.radii, report.conc_u_sharp, report.conc_v, report.slack)
    frame = pd.DataFrame(dict(zip(columns, data)), columns=columns)
    return _write_frame(frame, path)


def write_crossing_csv(profile: CrossingProfile, path: Path) -> Path:
    """表头 r,lhs,rhs,slack"""
    frame = pd.DataFrame(
        {"r": profile.radii, "lhs": profile.lhs, "rhs": profile.rhs, "slack": profile.slack},
        columns=CROSSING_COLUMNS,
    )
    return _write_frame(frame, path)


def write_profiles_csv(path: Path, columns: dict[str, GridFunction]) -> Path:
    """同一网格上的若干剖面, 表头 x 加上各列名"""
    grids = list(columns.values())
    first = grids[0]
    for other in grids[1:]:
        if not first.same_grid(other):
            raise ValueError(f"剖面 {other!r} 与 {first!r} 不在同一网格上")
    frame = pd.DataFrame({"x": first.centers, **{k: v.values for k, v in columns.items()}})
    return _write_frame(frame, path)


def write_table_csv(rows: list[dict[str, Any]], columns: list[str], path: Path) -> Path:
    return _write_frame(pd.DataFrame(rows, columns=columns), path)


def _save_svg(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.debug(f"写出 {path}")
    return path


def plot_profiles(path: Path, title: str, curves: dict[str, GridFunction]) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, fn in curves.items():
        ax.step(fn.centers, fn.values, where="mid", label=label)
    ax.set_xlabel("x")
    ax.set_title(title)
    ax.legend()
    return _save_svg(fig, path)


def plot_concentration(path: Path, report: ComparisonReport, labels=("u#", "v")) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(report.radii, report.conc_u_sharp, label=labels[0])
    ax.plot(report.radii, report.conc_v, "--", label=labels[1])
    ax.set_xlabel("r")
    ax.set_ylabel("mass on (-r, r)")
    ax.legend()
    return _save_svg(fig, path)


def emit_report(
    report: ComparisonReport, cfg: ExperimentConfig, out_dir: Path, name: str = "comparison"
) -> list[Path]:
    """写出比较报告 <name>.csv, emit_plots 时另外写出集中度曲线与剖面图

    Returns:
        list[Path]: 写出的文件
    """
    out_dir = Path(out_dir)
    written = [write_comparison_csv(report, out_dir / f"{name}.csv")]
    if cfg.emit_plots:
        written.append(plot_concentration(out_dir / f"{name}.svg", report))
        profiles = {k: v for k, v in report.profiles.items() if k in ("u_sharp", "v", "f_sharp", "g")}
        if profiles:
            written.append(plot_profiles(out_dir / f"{name}_profiles.svg", cfg.experiment, profiles))
    logger.info(f"报告已写出: {', '.join(p.name for p in written)}")
    return written


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    return value


def write_summary(summary: dict[str, Any], path: Path) -> Path:
    path.write_text(
        json.dumps(_jsonable(summary), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return path


def write_run_log(buffer: RunLogBuffer, path: Path) -> Path:
    path.write_text("\n".join(buffer.lines()) + "\n", encoding="utf-8")
    return path
