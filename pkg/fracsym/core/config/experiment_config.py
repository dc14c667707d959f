"""
实验配置: 扁平 key=value 文本格式的解析、校验与写出

格式:
    # 注释
    experiment=verify
    s=0.5
    source=csv:data/f.csv

空行和 # 开头的行被忽略。优先级: 命令行参数 > 配置文件 > 环境变量 FRACSYM_OUTPUT_DIR
(只作用于 output_dir) > DEFAULT_CONFIG。
"""

import math
import os
from pathlib import Path
from typing import Literal, Mapping, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from fracsym.core.config.default import (
    DEFAULT_CONFIG,
    LOG_LEVELS,
    OUTPUT_DIR_ENV,
    SOURCES,
    VERSION,
)
from fracsym.core.errors import ConfigError, FracSymError
from fracsym.core.nonlocal_op import (
    MIN_CELLS,
    WEIGHT_SCHEMES,
    ProblemSpec,
    SolverConfig,
    resample,
    summability_lower_bound,
)
from fracsym.core.rearrange import GridFunction, read_grid_csv

CSV_SOURCE_PREFIX = "csv:"


class ExperimentConfig(BaseModel):
    """一次实验运行的完整配置, 未知的键直接报错"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    experiment: Literal["verify", "figure1", "regularity", "specialfn-check"]
    N: int
    s: float
    p: float
    m: float
    domain_left: float
    domain_right: float
    source: str
    n_cells: int
    grad_tol: float
    max_iters: int
    line_search_shrink: float
    initial_step: float
    output_dir: str
    emit_plots: bool
    jobs: int
    log_level: str
    tolerance_scale: float
    weight_scheme: str

    @field_validator("N")
    @classmethod
    def _check_dimension(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"维数 N 必须是正整数, 当前为 {v}")
        return v

    @field_validator("s")
    @classmethod
    def _check_s(cls, v: float) -> float:
        if not (0.0 < v < 1.0):
            raise ValueError(f"s 必须在 (0,1) 内, 当前为 {v}")
        return v

    @field_validator("p")
    @classmethod
    def _check_p(cls, v: float) -> float:
        if not v >= 2.0:
            raise ValueError(f"只考虑退化情形 p >= 2, 当前为 {v}")
        return v

    @field_validator("m")
    @classmethod
    def _check_m(cls, v: float) -> float:
        if math.isnan(v) or v < 1.0:
            raise ValueError(f"可积指标 m 必须 >= 1, 当前为 {v}")
        return v

    @field_validator("source")
    @classmethod
    def _check_source(cls, v: str) -> str:
        if v in SOURCES:
            return v
        if v.startswith(CSV_SOURCE_PREFIX) and len(v) > len(CSV_SOURCE_PREFIX):
            return v
        raise ValueError(f"源项必须是 {', '.join(SOURCES)} 或 csv:<路径>, 当前为 {v}")

    @field_validator("n_cells")
    @classmethod
    def _check_n_cells(cls, v: int) -> int:
        if v < MIN_CELLS:
            raise ValueError(f"n_cells 至少为 {MIN_CELLS}, 当前为 {v}")
        return v

    @field_validator("grad_tol", "initial_step", "tolerance_scale")
    @classmethod
    def _check_positive(cls, v: float) -> float:
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"必须是有限正数, 当前为 {v}")
        return v

    @field_validator("max_iters", "jobs")
    @classmethod
    def _check_positive_int(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"必须是正整数, 当前为 {v}")
        return v

    @field_validator("line_search_shrink")
    @classmethod
    def _check_shrink(cls, v: float) -> float:
        if not (0.0 < v < 1.0):
            raise ValueError(f"line_search_shrink 必须在 (0,1) 内, 当前为 {v}")
        return v

    @field_validator("log_level")
    @classmethod
    def _check_log_level(cls, v: str) -> str:
        v = v.upper()
        if v not in LOG_LEVELS:
            raise ValueError(f"日志级别必须是 {'/'.join(LOG_LEVELS)} 之一")
        return v

    @field_validator("weight_scheme")
    @classmethod
    def _check_weight_scheme(cls, v: str) -> str:
        if v not in WEIGHT_SCHEMES:
            raise ValueError(f"权重方案必须是 {', '.join(WEIGHT_SCHEMES)} 之一")
        return v

    @model_validator(mode="after")
    def _check_problem(self) -> "ExperimentConfig":
        if not self.domain_left < self.domain_right:
            raise ValueError(
                f"区间端点必须满足 domain_left < domain_right: ({self.domain_left}, {self.domain_right})"
            )
        bound, strict = summability_lower_bound(self.N, self.s, self.p)
        if (strict and not self.m > bound) or (not strict and not self.m >= bound):
            op = ">" if strict else ">="
            raise ValueError(
                f"源项可积性不足: 要求 m {op} {bound:.6g} (N={self.N}, s={self.s}, p={self.p}), 当前 m={self.m}"
            )
        return self

    @property
    def domain(self) -> tuple[float, float]:
        return self.domain_left, self.domain_right

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            grad_tol=self.grad_tol,
            max_iters=self.max_iters,
            line_search_shrink=self.line_search_shrink,
            initial_step=self.initial_step,
        )

    def source_function(self) -> GridFunction:
        return build_source(self)

    def problem_spec(self, m: float = None) -> ProblemSpec:
        return ProblemSpec(
            s=self.s,
            p=self.p,
            f=self.source_function(),
            N=self.N,
            m=self.m if m is None else m,
        )


def build_source(cfg: ExperimentConfig) -> GridFunction:
    """按配置构造源项 f

    abs_x: f = |x|; const: f = 1; tent: f = max(1 - |x|, 0);
    csv:<path>: 读取 x,value 表, 区间须与配置一致, 再守恒地重采样到 n_cells。
    """
    left, right, n = cfg.domain_left, cfg.domain_right, cfg.n_cells
    if cfg.source == "abs_x":
        return GridFunction.from_callable(np.abs, left, right, n)
    if cfg.source == "const":
        return GridFunction.from_callable(np.ones_like, left, right, n)
    if cfg.source == "tent":
        return GridFunction.from_callable(lambda x: np.maximum(1.0 - np.abs(x), 0.0), left, right, n)
    path = Path(cfg.source[len(CSV_SOURCE_PREFIX):])
    if not path.exists():
        raise ConfigError(f"源项文件 {path} 不存在")
    try:
        f = read_grid_csv(path)
    except FracSymError as e:
        raise ConfigError(f"源项文件 {path} 无法使用: {e}") from e
    if not (
        math.isclose(f.domain_left, left, abs_tol=1e-9)
        and math.isclose(f.domain_right, right, abs_tol=1e-9)
    ):
        raise ConfigError(
            f"源项文件 {path} 的区间 ({f.domain_left:.10g}, {f.domain_right:.10g}) 与配置的区间 ({left}, {right}) 不一致"
        )
    return resample(GridFunction(left, right, f.values), n)


def read_config_file(path) -> tuple[dict, dict]:
    """读取 key=value 配置文件

    Returns:
        tuple[dict, dict]: (键到字符串值的映射, 键到行号的映射)

    Raises:
        ConfigError: 文件不存在、行格式错误、未知的键或重复的键, 带行号
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"配置文件 {path} 不存在")
    values, lines = {}, {}
    with open(path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"无法解析 '{line}', 应为 key=value", line_no)
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in DEFAULT_CONFIG:
                raise ConfigError(f"未知的配置项 {key}", line_no)
            if key in values:
                raise ConfigError(f"配置项 {key} 重复出现 (首次在第 {lines[key]} 行)", line_no)
            if not value:
                raise ConfigError(f"配置项 {key} 没有值", line_no)
            values[key] = value
            lines[key] = line_no
    return values, lines


def _format_error(err: ValidationError) -> tuple[str, Optional[str]]:
    first = err.errors()[0]
    key = str(first["loc"][0]) if first["loc"] else None
    msg = first["msg"].removeprefix("Value error, ")
    return (f"{key}: {msg}" if key else msg), key


def parse_config(
    path=None,
    overrides: Mapping[str, object] = None,
    environ: Mapping[str, str] = None,
) -> ExperimentConfig:
    """解析并校验实验配置

    Args:
        path: 配置文件路径, 为 None 时只使用默认值与 overrides
        overrides (Mapping): 命令行参数, 值为 None 的项视为未给出
        environ (Mapping): 环境变量, 默认为 os.environ

    Raises:
        ConfigError: 解析或校验失败, 来自配置文件的错误带行号
    """
    environ = os.environ if environ is None else environ
    data = dict(DEFAULT_CONFIG)
    lines = {}
    if path is not None:
        file_values, lines = read_config_file(path)
        data.update(file_values)
    else:
        file_values = {}
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    for key in overrides:
        if key not in DEFAULT_CONFIG:
            raise ConfigError(f"未知的配置项 {key}")
    if "output_dir" not in file_values and "output_dir" not in overrides:
        env_dir = environ.get(OUTPUT_DIR_ENV)
        if env_dir:
            data["output_dir"] = env_dir
    data.update(overrides)
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        message, key = _format_error(e)
        line_no = lines.get(key) if key not in overrides else None
        raise ConfigError(message, line_no) from e


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(cfg: ExperimentConfig) -> str:
    """按 DEFAULT_CONFIG 的键顺序写出完整配置, 浮点数用 repr 保证重新解析后完全一致"""
    data = cfg.model_dump()
    lines = [f"# fracsym {VERSION} 实验配置"]
    lines += [f"{key}={_format_value(data[key])}" for key in DEFAULT_CONFIG]
    return "\n".join(lines) + "\n"


def validate_key(key: str, value: str) -> object:
    """单独校验一个键, 其余键取默认值

    Returns:
        object: 校验并转换后的值
    """
    if key not in DEFAULT_CONFIG:
        raise ConfigError(f"未知的配置项 {key}")
    cfg = parse_config(overrides={key: value}, environ={})
    return getattr(cfg, key)
