"""
默认配置。命令行参数会覆盖配置文件中的值, 配置文件会覆盖这里的默认值。
"""

VERSION = "0.3.1"

# 输出目录的环境变量兜底
OUTPUT_DIR_ENV = "FRACSYM_OUTPUT_DIR"

EXPERIMENTS = ["verify", "figure1", "regularity", "specialfn-check"]
SOURCES = ["abs_x", "const", "tent"]  # 另外支持 csv:<path>

# 默认配置, 扁平的 key=value 结构
DEFAULT_CONFIG = {
    "experiment": "verify",
    "N": 1,
    "s": 0.5,
    "p": 3.0,
    "m": 2.0,
    "domain_left": -1.0,
    "domain_right": 1.0,
    "source": "abs_x",
    "n_cells": 256,
    "grad_tol": 1e-8,
    "max_iters": 50000,
    "line_search_shrink": 0.5,
    "initial_step": 1.0,
    "output_dir": "fracsym_output",
    "emit_plots": False,
    "jobs": 1,
    "log_level": "INFO",
    "tolerance_scale": 1.0,
    "weight_scheme": "cell_exact",
}

# 求解器相关的键, 构造 SolverConfig 时使用
DEFAULT_SOLVER_CONFIG = {
    key: DEFAULT_CONFIG[key]
    for key in ("grad_tol", "max_iters", "line_search_shrink", "initial_step")
}

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]

# 数值容差, 测试中的 oracle 以这些值为准
TOLERANCES = {
    "hyp2f1_rel": 1e-10,
    "hyp2f1_switch_x": 0.95,
    "hyp2f1_max_terms": 200000,
    "kernel_diag_floor": 1e-12,
    "perimeter_rel": 1e-9,
    "solver_log_every": 500,
}
