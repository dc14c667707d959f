"""
重排与对称化工具

网格函数 GridFunction 表示一维均匀网格上的单元平均值, 区间外隐式取零。
重排按单元值排序定义, 对分片常数数据是精确的, 因而分布函数与所有 L^p 和在离散层面严格保持。
"""

import enum
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import pandas as pd

from fracsym.core.errors import MeasureMismatchError, ParameterRangeError

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True, eq=False)
class GridFunction:
    """均匀网格上的单元平均函数, 区间外取零"""

    domain_left: float
    domain_right: float
    values: np.ndarray
    """长度为 n_cells 的单元平均值"""

    def __post_init__(self):
        if not self.domain_left < self.domain_right:
            raise ParameterRangeError(
                f"区间端点必须满足 left < right: ({self.domain_left}, {self.domain_right})"
            )
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size == 0:
            raise ParameterRangeError("网格函数至少需要一个单元")
        if not np.all(np.isfinite(values)):
            raise ParameterRangeError("网格函数的值必须是有限实数")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "domain_left", float(self.domain_left))
        object.__setattr__(self, "domain_right", float(self.domain_right))

    @classmethod
    def from_callable(
        cls, fn: Callable[[np.ndarray], np.ndarray], left: float, right: float, n_cells: int
    ) -> "GridFunction":
        """在单元中心对 fn 取样"""
        h = (right - left) / n_cells
        centers = left + (np.arange(n_cells) + 0.5) * h
        return cls(left, right, np.broadcast_to(fn(centers), centers.shape))

    @classmethod
    def zeros(cls, left: float, right: float, n_cells: int) -> "GridFunction":
        return cls(left, right, np.zeros(n_cells))

    @property
    def n_cells(self) -> int:
        return self.values.size

    @property
    def measure(self) -> float:
        return self.domain_right - self.domain_left

    @property
    def h(self) -> float:
        return self.measure / self.n_cells

    @property
    def edges(self) -> np.ndarray:
        return self.domain_left + np.arange(self.n_cells + 1) * self.h

    @property
    def centers(self) -> np.ndarray:
        return self.domain_left + (np.arange(self.n_cells) + 0.5) * self.h

    @property
    def is_symmetric(self) -> bool:
        return math.isclose(self.domain_left, -self.domain_right, abs_tol=1e-12 * self.measure)

    def integral(self) -> float:
        return float(self.values.sum() * self.h)

    def lp_norm(self, q: float) -> float:
        if math.isinf(q):
            return float(np.abs(self.values).max())
        return float((np.sum(np.abs(self.values) ** q) * self.h) ** (1.0 / q))

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.domain_left, self.domain_right, values)

    def same_grid(self, other: "GridFunction") -> bool:
        return (
            self.n_cells == other.n_cells
            and math.isclose(self.domain_left, other.domain_left, abs_tol=1e-12)
            and math.isclose(self.domain_right, other.domain_right, abs_tol=1e-12)
        )

    def __repr__(self):
        return (
            f"GridFunction(({self.domain_left}, {self.domain_right}), "
            f"n_cells={self.n_cells})"
        )


@dataclass(frozen=True, eq=False)
class ConcentrationCurve:
    radii: np.ndarray
    """递增的非负半径"""
    masses: np.ndarray
    """每个半径上的 int_{B_r} f"""


@dataclass(frozen=True)
class TruncationParams:
    t: float
    h: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.h)):
            raise ParameterRangeError(f"截断参数必须有限: t={self.t}, h={self.h}")
        if self.t < 0 or self.h <= 0:
            raise ParameterRangeError(f"截断参数要求 t >= 0, h > 0: t={self.t}, h={self.h}")


class Relation(str, enum.Enum):
    LESS_OR_EQUAL = "LESS_OR_EQUAL"
    GREATER_OR_EQUAL = "GREATER_OR_EQUAL"
    EQUAL = "EQUAL"
    INCOMPARABLE = "INCOMPARABLE"


@dataclass(frozen=True)
class CompareResult:
    relation: Relation
    worst_violation: float
    """对所判定关系的最大违背量, 关系成立时不超过 tolerance"""
    max_excess: float
    """max_r (int_{B_r} f - int_{B_r} g)"""
    max_deficit: float
    """max_r (int_{B_r} g - int_{B_r} f)"""
    tolerance: float


def distribution_function(f: GridFunction, t: float) -> float:
    """分布函数 mu_f(t) = |{|f| > t}|"""
    if t < 0:
        raise ParameterRangeError(f"阈值 t 必须非负: t={t}")
    return float(np.count_nonzero(np.abs(f.values) > t) * f.h)


def _sorted_abs(f: GridFunction) -> np.ndarray:
    return np.sort(np.abs(f.values), kind="stable")[::-1]


def decreasing_rearrangement(f: GridFunction) -> GridFunction:
    """一维递减重排 f*, 定义在 (0, |Omega|) 上, 单元宽度不变"""
    return GridFunction(0.0, f.measure, _sorted_abs(f))


def _schwarz_positions(n: int) -> np.ndarray:
    """第 k 大的值放置的单元下标, 从中心向两侧交替, 先左后右"""
    k = np.arange(n)
    if n % 2 == 0:
        left = n // 2 - 1 - k // 2
        right = n // 2 + k // 2
        return np.where(k % 2 == 0, left, right)
    c = n // 2
    return np.where(k == 0, c, np.where(k % 2 == 1, c - (k + 1) // 2, c + k // 2))


def schwarz_profile(f: GridFunction) -> GridFunction:
    """Schwarz 对称重排 f^#, 定义在对称区间 (-|Omega|/2, |Omega|/2) 上

    偶数个单元时最大的两个值放在中间两个单元, 相同值按原下标顺序排列。
    """
    order = np.argsort(-np.abs(f.values), kind="stable")
    ranked = np.abs(f.values)[order]
    values = np.empty(f.n_cells)
    values[_schwarz_positions(f.n_cells)] = ranked
    half = f.measure / 2
    return GridFunction(-half, half, values)


def radial_profile(f_sharp: GridFunction) -> GridFunction:
    """取对称区间上偶函数的右半部分, 作为 (0, R) 上的径向剖面

    奇数个单元时先把每个单元一分为二, 对分片常数函数没有误差。
    """
    if not f_sharp.is_symmetric:
        raise ParameterRangeError("径向剖面只对对称区间上的函数有定义")
    values = f_sharp.values
    if f_sharp.n_cells % 2 == 1:
        values = np.repeat(values, 2)
    return GridFunction(0.0, f_sharp.domain_right, values[values.size // 2 :])


def _primitive(f: GridFunction, x: np.ndarray) -> np.ndarray:
    """F(x) = int_{left}^{x} f, 区间外为常数"""
    cumulative = np.concatenate(([0.0], np.cumsum(f.values) * f.h))
    return np.interp(x, f.edges, cumulative)


def concentration_function(f: GridFunction, radii: ArrayLike) -> ConcentrationCurve:
    """质量集中函数 r -> int_{-r}^{r} f, 按单元重叠精确积分

    超出区间的半径自动截断, 区间外贡献为零。
    """
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if np.any(radii < 0):
        raise ParameterRangeError("半径必须非负")
    masses = _primitive(f, radii) - _primitive(f, -radii)
    return ConcentrationCurve(radii, masses)


def boundary_radii(*functions: GridFunction) -> np.ndarray:
    """所有单元边界对应的半径 (含 0) 的并集, 升序"""
    radii = np.concatenate([np.abs(fn.edges) for fn in functions] + [np.zeros(1)])
    return np.unique(radii)


def concentration_compare(
    f: GridFunction, g: GridFunction, tol: float = None
) -> CompareResult:
    """比较两个剖面的质量集中度

    LESS_OR_EQUAL 表示 f < g (f 不比 g 集中), 即所有半径上 int_{B_r} f <= int_{B_r} g + tol。

    Args:
        f (GridFunction): 非负径向剖面
        g (GridFunction): 非负径向剖面, 与 f 的区间测度相同
        tol (float): 容差, 默认取两者较大的单元宽度

    Raises:
        MeasureMismatchError: 两个区间测度相差超过一个单元宽度
    """
    h = max(f.h, g.h)
    if tol is None:
        tol = h
    if tol < 0:
        raise ParameterRangeError(f"容差必须非负: tol={tol}")
    if abs(f.measure - g.measure) > h * (1 + 1e-12):
        raise MeasureMismatchError(
            f"区间测度不一致: |Omega_f| = {f.measure}, |Omega_g| = {g.measure}"
        )
    radii = boundary_radii(f, g)
    diff = concentration_function(f, radii).masses - concentration_function(g, radii).masses
    excess = float(max(diff.max(), 0.0))
    deficit = float(max((-diff).max(), 0.0))
    if excess <= tol and deficit <= tol:
        relation, worst = Relation.EQUAL, max(excess, deficit)
    elif excess <= tol:
        relation, worst = Relation.LESS_OR_EQUAL, excess
    elif deficit <= tol:
        relation, worst = Relation.GREATER_OR_EQUAL, deficit
    else:
        relation, worst = Relation.INCOMPARABLE, min(excess, deficit)
    return CompareResult(relation, worst, excess, deficit, float(tol))


def truncation_g(tp: TruncationParams, theta: ArrayLike) -> ArrayLike:
    """截断函数 G_{t,h}(theta) = min(max(theta - t, 0), h)"""
    out = np.clip(np.asarray(theta, dtype=float) - tp.t, 0.0, tp.h)
    return float(out) if out.ndim == 0 else out


def riesz_f(p: float, tp: TruncationParams, u: ArrayLike, v: ArrayLike) -> ArrayLike:
    """F(u,v) = u^p + v^p - |u-v|^{p-2}(u-v)(G(u) - G(v)), 对 u, v >= 0 非负且超模"""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    d = u - v
    out = u**p + v**p - np.abs(d) ** (p - 2) * d * (truncation_g(tp, u) - truncation_g(tp, v))
    return float(out) if out.ndim == 0 else out


def lorentz_norm(f: GridFunction, p: float, q: float, subdivisions: int = 8) -> float:
    """Lorentz 拟范数 ||f||_{p,q}

    v_bar(sigma) = (1/sigma) int_0^sigma f* 在离散重排上是分片有理函数, 可精确得到;
    q < inf 时在每个单元上用 subdivisions 段复合中点公式积分 (v_bar sigma^{1/p})^q / sigma,
    第一个单元上 v_bar 为常数, 直接用闭式。q = inf 时在单元端点与单元内驻点上取上确界。

    Args:
        f (GridFunction): 任意网格函数, 内部先做递减重排
        p (float): 第一指标, > 1
        q (float): 第二指标, (0, inf]
    """
    if not p > 1:
        raise ParameterRangeError(f"Lorentz 范数要求 p > 1: p={p}")
    if not q > 0:
        raise ParameterRangeError(f"Lorentz 范数要求 q > 0: q={q}")
    v = _sorted_abs(f)
    h = f.h
    if not np.any(v):
        return 0.0
    left_edges = np.arange(v.size) * h
    prefix = np.concatenate(([0.0], np.cumsum(v)[:-1])) * h

    if math.isinf(q):
        right_edges = left_edges + h
        best = float(np.max((prefix + v * h) * right_edges ** (1.0 / p - 1.0)))
        # 单元内 (C + v(sigma - a)) sigma^{1/p - 1} 的驻点 sigma* = (p-1)(C - v a) / v
        nz = v > 0
        crit = np.full(v.size, np.nan)
        crit[nz] = (p - 1) * (prefix[nz] - v[nz] * left_edges[nz]) / v[nz]
        inside = nz & (crit > left_edges) & (crit < right_edges)
        if np.any(inside):
            sig = crit[inside]
            vals = (prefix[inside] + v[inside] * (sig - left_edges[inside])) * sig ** (1.0 / p - 1.0)
            best = max(best, float(vals.max()))
        return best

    first = v[0] ** q * (p / q) * h ** (q / p)
    if v.size == 1:
        return float(first ** (1.0 / q))
    offsets = (np.arange(subdivisions) + 0.5) * h / subdivisions
    sigma = left_edges[1:, None] + offsets[None, :]
    mass = prefix[1:, None] + v[1:, None] * offsets[None, :]
    integrand = (mass / sigma) ** q * sigma ** (q / p - 1.0)
    total = first + float(integrand.sum()) * h / subdivisions
    if not math.isfinite(total):
        raise ParameterRangeError(f"Lorentz 范数积分发散: p={p}, q={q}")
    return float(total ** (1.0 / q))


def integral_mean(f: GridFunction, N: int, r: ArrayLike) -> ArrayLike:
    """球上积分平均 U(r) = r^{-N} int_0^r f(rho) rho^{N-1} drho

    f 是 (0, R) 上的径向剖面, 按单元精确积分, R 之外取零。
    """
    if f.domain_left < 0:
        raise ParameterRangeError("integral_mean 需要 [0, R) 上的径向剖面")
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r_arr <= 0):
        raise ParameterRangeError("integral_mean 要求 r > 0")
    a = f.edges[:-1]
    b = f.edges[1:]
    upper = np.clip(r_arr[:, None], a[None, :], b[None, :])
    pieces = f.values[None, :] * (upper**N - a[None, :] ** N) / N
    out = pieces.sum(axis=1) / r_arr**N
    return float(out[0]) if np.ndim(r) == 0 else out


def hardy_littlewood_sides(f: GridFunction, g: GridFunction) -> tuple[float, float]:
    """返回 (int |f g|, int f* g*), 前者不超过后者"""
    if not f.same_grid(g):
        raise MeasureMismatchError("Hardy-Littlewood 检验需要两个函数在同一网格上")
    lhs = float(np.sum(np.abs(f.values * g.values)) * f.h)
    rhs = float(np.sum(_sorted_abs(f) * _sorted_abs(g)) * f.h)
    return lhs, rhs


def convex_dominance(f: GridFunction, g: GridFunction, phi: Callable) -> float:
    """sum phi(|g|) h - sum phi(|f|) h; 当 f < g 且 phi 凸, phi(0)=0 时非负"""
    return float(np.sum(phi(np.abs(g.values))) * g.h - np.sum(phi(np.abs(f.values))) * f.h)


def discrete_riesz_sides(
    f: GridFunction,
    g: GridFunction,
    W: Callable[[np.ndarray], np.ndarray],
    F: Callable[[np.ndarray, np.ndarray], np.ndarray] = None,
) -> tuple[float, float]:
    """离散 Riesz 重排不等式的两侧

    lhs = sum_{i,j} F(f_i, g_j) W(x_i - x_j) h^2, rhs 用 f^#, g^# 计算。
    F 默认为乘积 u v, W 应为对称递减函数。
    """
    if not f.same_grid(g):
        raise MeasureMismatchError("Riesz 检验需要两个函数在同一网格上")
    F = F or np.multiply

    def side(a: GridFunction, b: GridFunction) -> float:
        x = a.centers
        kernel = W(x[:, None] - x[None, :])
        return float(np.sum(F(a.values[:, None], b.values[None, :]) * kernel) * a.h**2)

    return side(f, g), side(schwarz_profile(f), schwarz_profile(g))


def mass_of_powers(f: GridFunction, power: float) -> GridFunction:
    """|f|^power, 用于比较幂次的质量集中度"""
    return f.with_values(np.abs(f.values) ** power)


def write_grid_csv(f: GridFunction, path) -> None:
    """写出 CSV, 表头 x,value, 每行一个单元中心, 17 位有效数字"""
    frame = pd.DataFrame({"x": f.centers, "value": f.values})
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")


def read_grid_csv(path) -> GridFunction:
    """读取 write_grid_csv 写出的 CSV, 单元中心必须等距"""
    frame = pd.read_csv(path, float_precision="round_trip")
    if list(frame.columns) != ["x", "value"]:
        raise ParameterRangeError(f"CSV 表头必须为 x,value, 实际为 {','.join(frame.columns)}")
    x = frame["x"].to_numpy(dtype=float)
    if x.size < 2:
        raise ParameterRangeError("CSV 至少需要两行数据才能确定网格")
    h = (x[-1] - x[0]) / (x.size - 1)
    if h <= 0 or not np.allclose(np.diff(x), h, rtol=1e-9, atol=0.0):
        raise ParameterRangeError("CSV 中的 x 必须严格递增且等距")
    return GridFunction(x[0] - h / 2, x[-1] + h / 2, frame["value"].to_numpy(dtype=float))
