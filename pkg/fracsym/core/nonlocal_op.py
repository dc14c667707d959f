"""
区间上的离散分数阶 p-Laplace 算子

A(u)_i = gamma [ sum_j w_ij phi(u_i - u_j) + T_i phi(u_i) ],  phi(t) = |t|^{p-2} t

其中 w_ij 为单元对的相互作用权重, T_i 为区间外零延拓贡献的尾部权重 (闭式积分, 没有截断误差)。
能量泛函

J(u) = (gamma h / 2p) [ sum_{i,j} w_ij |u_i - u_j|^p + 2 sum_i T_i |u_i|^p ] - h sum_i f_i u_i

满足 grad J(u) = h (A(u) - f)。DiscreteOperator 构造后不可变, 可在线程间共享。
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from fracsym.core import logger
from fracsym.core.config.default import TOLERANCES
from fracsym.core.errors import (
    ConfigError,
    ConvergenceError,
    ParameterRangeError,
)
from fracsym.core.rearrange import GridFunction, TruncationParams, truncation_g
from fracsym.core.specialfn import gamma_norm_const

WEIGHT_SCHEMES = ("cell_exact", "midpoint")
MIN_CELLS = 8
# 非单调 Armijo 条件参考的历史能量个数
_NONMONOTONE_WINDOW = 10
_ARMIJO_C = 1e-4
_MAX_BACKTRACKS = 60
_ROUNDING_SLACK = 1e-13


def summability_lower_bound(N: int, s: float, p: float) -> tuple[float, bool]:
    """源项 f in L^m 所需的最小 m

    Returns:
        tuple[float, bool]: (下界, 是否为严格不等式)
    """
    sp = s * p
    if sp < N:
        return p * N / ((p - 1) * N + sp), False
    if sp == N:
        return 1.0, True
    return 1.0, False


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """一个 Dirichlet 问题 (-Delta_p)^s u = f, u = 0 在区间外"""

    s: float
    p: float
    f: GridFunction
    """源项, 其定义区间即问题的区间"""
    N: int = 1
    m: float = math.inf
    """源项的可积指标"""

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ParameterRangeError(f"维数 N 必须是正整数: N={self.N}")
        if not (0.0 < self.s < 1.0):
            raise ParameterRangeError(f"s 必须在 (0,1) 内: s={self.s}")
        if not self.p >= 2.0:
            raise ParameterRangeError(f"只考虑退化情形 p >= 2: p={self.p}")
        bound, strict = summability_lower_bound(self.N, self.s, self.p)
        if (strict and not self.m > bound) or (not strict and not self.m >= bound):
            op = ">" if strict else ">="
            raise ParameterRangeError(
                f"源项可积性不足: 要求 m {op} {bound:.6g} (N={self.N}, s={self.s}, p={self.p}), 当前 m={self.m}"
            )

    @property
    def domain(self) -> tuple[float, float]:
        return self.f.domain_left, self.f.domain_right

    @property
    def sp(self) -> float:
        return self.s * self.p

    @property
    def gamma(self) -> float:
        return gamma_norm_const(self.N, self.s, self.p)

    def with_source(self, f: GridFunction, p: float = None) -> "ProblemSpec":
        return ProblemSpec(s=self.s, p=self.p if p is None else p, f=f, N=self.N, m=self.m)


@dataclass(frozen=True)
class SolverConfig:
    grad_tol: float = 1e-8
    """相对梯度范数 ||A(u) - f|| / ||f|| 的停止阈值"""
    max_iters: int = 50000
    line_search_shrink: float = 0.5
    initial_step: float = 1.0
    log_every: int = field(default=TOLERANCES["solver_log_every"])

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ParameterRangeError(f"grad_tol 必须为正: {self.grad_tol}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ParameterRangeError(f"max_iters 必须是正整数: {self.max_iters}")
        if not (0.0 < self.line_search_shrink < 1.0):
            raise ParameterRangeError(
                f"line_search_shrink 必须在 (0,1) 内: {self.line_search_shrink}"
            )
        if not self.initial_step > 0:
            raise ParameterRangeError(f"initial_step 必须为正: {self.initial_step}")


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    domain_left: float
    domain_right: float
    s: float
    p: float
    interaction_weights: np.ndarray
    """对称的 n x n 权重矩阵, 对角线为零"""
    tail_weights: np.ndarray
    weight_scheme: str = "cell_exact"

    @property
    def n_cells(self) -> int:
        return self.tail_weights.size

    @property
    def h(self) -> float:
        return (self.domain_right - self.domain_left) / self.n_cells

    @property
    def sp(self) -> float:
        return self.s * self.p

    @property
    def centers(self) -> np.ndarray:
        return self.domain_left + (np.arange(self.n_cells) + 0.5) * self.h

    def zeros(self) -> GridFunction:
        return GridFunction.zeros(self.domain_left, self.domain_right, self.n_cells)

    def grid_function(self, values: np.ndarray) -> GridFunction:
        return GridFunction(self.domain_left, self.domain_right, values)

    def check_grid(self, *functions: GridFunction):
        for fn in functions:
            if fn.n_cells != self.n_cells or not math.isclose(
                fn.domain_left, self.domain_left, abs_tol=1e-12
            ) or not math.isclose(fn.domain_right, self.domain_right, abs_tol=1e-12):
                raise ParameterRangeError(
                    f"网格函数 {fn!r} 与算子网格 ({self.domain_left}, {self.domain_right}) x {self.n_cells} 不一致"
                )


@dataclass(frozen=True, eq=False)
class SolveResult:
    u: GridFunction
    iterations: int
    grad_norm: float
    """||grad J(u)||_2"""
    relative_grad: float
    """||A(u) - f|| / ||f||"""
    weak_residual: float
    converged: bool = True

    def diagnostics(self) -> dict:
        return {
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "relative_grad": self.relative_grad,
            "weak_residual": self.weak_residual,
            "converged": self.converged,
        }


def resample(f: GridFunction, n_cells: int) -> GridFunction:
    """按单元重叠把 f 守恒地转到同一区间上的 n_cells 个单元"""
    if f.n_cells == n_cells:
        return f
    cumulative = np.concatenate(([0.0], np.cumsum(f.values) * f.h))
    new_edges = f.domain_left + np.arange(n_cells + 1) * (f.measure / n_cells)
    prim = np.interp(new_edges, f.edges, cumulative)
    return GridFunction(f.domain_left, f.domain_right, np.diff(prim) / (f.measure / n_cells))


def _cell_integral(d: np.ndarray, h: float, beta: float) -> np.ndarray:
    """int_{|t - d| < h/2} |t|^{-(1+beta)} dt, d >= h"""
    return ((d - h / 2) ** (-beta) - (d + h / 2) ** (-beta)) / beta


def _adjacent_pair_weight(h: float, beta: float) -> float:
    """相邻单元对的双重积分 (1/h) int_0^h int_0^h (a+b)^{-(1+beta)} db da, 要求 beta < 1

    beta >= 1 时积分发散, 退回到单元中心对相邻单元的积分。
    """
    if beta >= 1.0:
        return float(_cell_integral(np.float64(h), h, beta))
    return h ** (-beta) * (2.0 - 2.0 ** (1.0 - beta)) / (beta * (1.0 - beta))


def kernel_weights(
    left: float, right: float, n_cells: int, beta: float, weight_scheme: str = "cell_exact"
) -> tuple[np.ndarray, np.ndarray]:
    """核 |x - y|^{-(1+beta)} 在均匀网格上的相互作用权重与尾部权重

    Returns:
        tuple[np.ndarray, np.ndarray]: (对称 Toeplitz 矩阵 W, 尾部向量 T), 均为只读
    """
    h = (right - left) / n_cells
    offsets = np.arange(n_cells) * h
    column = np.zeros(n_cells)
    if weight_scheme == "cell_exact":
        column[1:] = _cell_integral(offsets[1:], h, beta)
    else:
        column[1:] = h / offsets[1:] ** (1.0 + beta)
        column[1] = _adjacent_pair_weight(h, beta)
    weights = linalg.toeplitz(column)
    weights.flags.writeable = False
    x = left + (np.arange(n_cells) + 0.5) * h
    tail = ((right - x) ** (-beta) + (x - left) ** (-beta)) / beta
    tail.flags.writeable = False
    return weights, tail


def build_operator(
    spec: ProblemSpec, n_cells: int, weight_scheme: str = "cell_exact"
) -> DiscreteOperator:
    """组装一维离散算子

    cell_exact: w_ij = int_{cell j} |x_i - y|^{-(1+sp)} dy, 闭式;
    midpoint: w_ij = h / |x_i - x_j|^{1+sp}, 相邻单元换成单元对的精确双重积分
    (sp >= 1 时该积分发散, 改用单元中心对相邻单元的积分)。
    同一单元内的主值贡献对单元常数函数为零, 直接略去。
    尾部 T_i = [(b - x_i)^{-sp} + (x_i - a)^{-sp}] / sp, 为区间外的精确积分。

    Raises:
        ParameterRangeError: N >= 2 (只支持一维区间求解)
        ConfigError: n_cells < 8 或权重方案未知
    """
    if spec.N != 1:
        raise ParameterRangeError(f"离散求解只支持 N = 1, 当前 N = {spec.N}")
    if n_cells < MIN_CELLS:
        raise ConfigError(f"n_cells 至少为 {MIN_CELLS}, 当前为 {n_cells}")
    if weight_scheme not in WEIGHT_SCHEMES:
        raise ConfigError(f"未知的权重方案 {weight_scheme}, 可选 {', '.join(WEIGHT_SCHEMES)}")
    a, b = spec.domain
    weights, tail = kernel_weights(a, b, n_cells, spec.sp, weight_scheme)
    logger.debug(f"组装离散算子: n={n_cells}, s={spec.s}, p={spec.p}, 权重方案 {weight_scheme}")
    return DiscreteOperator(a, b, spec.s, spec.p, weights, tail, weight_scheme)


def total_interaction(op: DiscreteOperator) -> np.ndarray:
    """sum_j w_ij + T_i; cell_exact 方案下恒等于 2 (h/2)^{-sp} / sp"""
    return op.interaction_weights.sum(axis=1) + op.tail_weights


def _phi(t: np.ndarray, p: float) -> np.ndarray:
    if p == 2.0:
        return t
    return np.abs(t) ** (p - 2) * t


def _apply_values(op: DiscreteOperator, gamma: float, p: float, u: np.ndarray) -> np.ndarray:
    diff = u[:, None] - u[None, :]
    inner = np.einsum("ij,ij->i", op.interaction_weights, _phi(diff, p))
    return gamma * (inner + op.tail_weights * _phi(u, p))


def apply(op: DiscreteOperator, gamma: float, p: float, u: GridFunction) -> GridFunction:
    """离散算子 A(u), (p-1) 次齐次且单调"""
    op.check_grid(u)
    return op.grid_function(_apply_values(op, gamma, p, u.values))


def _energy_values(
    op: DiscreteOperator, gamma: float, p: float, f: np.ndarray, u: np.ndarray
) -> float:
    diff = np.abs(u[:, None] - u[None, :])
    pair = float(np.einsum("ij,ij->", op.interaction_weights, diff**p))
    tail = float(np.dot(op.tail_weights, np.abs(u) ** p))
    return gamma * op.h / (2 * p) * (pair + 2 * tail) - op.h * float(np.dot(f, u))


def energy(
    op: DiscreteOperator, gamma: float, p: float, f: GridFunction, u: GridFunction
) -> float:
    """离散能量 J(u), 严格凸"""
    op.check_grid(f, u)
    return _energy_values(op, gamma, p, f.values, u.values)


def energy_gradient(
    op: DiscreteOperator, gamma: float, p: float, f: GridFunction, u: GridFunction
) -> GridFunction:
    """grad J(u) = h (A(u) - f)"""
    op.check_grid(f, u)
    return op.grid_function(op.h * (_apply_values(op, gamma, p, u.values) - f.values))


def weak_residual(
    op: DiscreteOperator, gamma: float, p: float, f: GridFunction, u: GridFunction
) -> float:
    """离散弱形式残差 max_i |<A(u) - f, e_i>| h, i 只取内部单元 (去掉两端单元)"""
    op.check_grid(f, u)
    residual = _apply_values(op, gamma, p, u.values) - f.values
    return float(np.max(np.abs(residual[1:-1])) * op.h)


def truncated_pairing(
    op: DiscreteOperator, gamma: float, p: float, u: GridFunction, tp: TruncationParams
) -> float:
    """用截断函数 G_{t,h}(u) 作检验函数时弱形式的左端 sum_i A(u)_i G(u_i) h"""
    op.check_grid(u)
    test = truncation_g(tp, u.values)
    return float(np.dot(_apply_values(op, gamma, p, u.values), test) * op.h)


def lq_norm(u: GridFunction, q: float) -> float:
    return u.lp_norm(q)


def sup_norm(u: GridFunction) -> float:
    return u.lp_norm(math.inf)


def solve_nonlinear_detailed(
    spec: ProblemSpec,
    cfg: SolverConfig,
    n_cells: int,
    weight_scheme: str = "cell_exact",
) -> SolveResult:
    """以零初值最小化离散能量 J, 返回解及诊断信息

    下降方向为负梯度, 步长取 Barzilai-Borwein 建议值, 再做非单调 Armijo 回溯。
    步长规则对源项的缩放是等变的: 求解 lambda^{p-1} f 的迭代序列恰为求解 f 时的 lambda 倍。

    Raises:
        ConvergenceError: max_iters 次迭代后相对梯度仍大于 grad_tol
    """
    f_grid = resample(spec.f, n_cells)
    op = build_operator(spec, n_cells, weight_scheme)
    gamma, p, h = spec.gamma, spec.p, op.h
    f = f_grid.values
    f_norm = float(np.linalg.norm(f))
    u = np.zeros(n_cells)
    if f_norm == 0.0:
        logger.info("源项恒为零, 解为零")
        return SolveResult(op.grid_function(u), 0, 0.0, 0.0, 0.0)

    def grad_of(x: np.ndarray) -> np.ndarray:
        return h * (_apply_values(op, gamma, p, x) - f)

    J = _energy_values(op, gamma, p, f, u)
    g = grad_of(u)
    g_norm = float(np.linalg.norm(g))
    history = [J]
    alpha = cfg.initial_step * g_norm ** ((2.0 - p) / (p - 1.0))
    rel = g_norm / (f_norm * h)

    for it in range(1, cfg.max_iters + 1):
        ref = max(history[-_NONMONOTONE_WINDOW:])
        # 能量差接近舍入误差时放宽 Armijo 条件
        slack = _ROUNDING_SLACK * abs(ref)
        step = alpha
        for _ in range(_MAX_BACKTRACKS):
            trial = u - step * g
            J_trial = _energy_values(op, gamma, p, f, trial)
            if J_trial <= ref - _ARMIJO_C * step * g_norm**2 + slack:
                break
            step *= cfg.line_search_shrink
        else:
            # 回溯失败说明已到舍入误差水平
            logger.warning(f"第 {it} 次迭代线搜索失败, 相对梯度 {rel:.3e}")
            break
        g_new = grad_of(trial)
        s_vec = trial - u
        y_vec = g_new - g
        sy = float(np.dot(s_vec, y_vec))
        if sy > 0:
            alpha = float(np.dot(s_vec, s_vec)) / sy
        else:
            y_norm = float(np.linalg.norm(y_vec))
            alpha = float(np.linalg.norm(s_vec)) / y_norm if y_norm > 0 else step
        u, g, J = trial, g_new, J_trial
        g_norm = float(np.linalg.norm(g))
        history.append(J)
        rel = g_norm / (f_norm * h)
        if cfg.log_every and it % cfg.log_every == 0:
            logger.debug(f"迭代 {it}: J = {J:.12e}, 相对梯度 {rel:.3e}")
        if rel <= cfg.grad_tol:
            u_grid = op.grid_function(u)
            res = weak_residual(op, gamma, p, f_grid, u_grid)
            logger.info(f"非线性求解收敛: {it} 次迭代, 相对梯度 {rel:.3e}")
            return SolveResult(u_grid, it, g_norm, rel, res)

    logger.error(f"非线性求解未收敛: 相对梯度 {rel:.3e} > {cfg.grad_tol:.1e}")
    raise ConvergenceError(
        f"非线性求解在 {cfg.max_iters} 次迭代内未收敛, 最后的相对梯度为 {rel:.3e}",
        last_residual=rel,
        iterations=it,
    )


def solve_nonlinear(
    spec: ProblemSpec, cfg: SolverConfig, n_cells: int, weight_scheme: str = "cell_exact"
) -> GridFunction:
    """离散 Dirichlet 问题的解, 即离散能量的唯一极小点"""
    return solve_nonlinear_detailed(spec, cfg, n_cells, weight_scheme).u


def stiffness_matrix(op: DiscreteOperator, gamma: float) -> np.ndarray:
    """p = 2 时 A(u) = M u 的对称正定矩阵 M = gamma (diag(sum_j w_ij + T_i) - W)"""
    return gamma * (np.diag(total_interaction(op)) - op.interaction_weights)


def solve_linear_detailed(
    spec: ProblemSpec, n_cells: int, weight_scheme: str = "cell_exact"
) -> SolveResult:
    """p = 2 时直接用 Cholesky 分解求解线性系统"""
    if spec.p != 2.0:
        raise ParameterRangeError(f"solve_linear 只适用于 p = 2, 当前 p = {spec.p}")
    f_grid = resample(spec.f, n_cells)
    op = build_operator(spec, n_cells, weight_scheme)
    gamma = spec.gamma
    matrix = stiffness_matrix(op, gamma)
    try:
        factor = linalg.cho_factor(matrix, lower=True, check_finite=True)
    except linalg.LinAlgError as e:
        logger.error(f"刚度矩阵的 Cholesky 分解失败: {e}")
        raise ConvergenceError(f"刚度矩阵不是正定的, 组装可能有误: {e}") from e
    u = linalg.cho_solve(factor, f_grid.values)
    residual = matrix @ u - f_grid.values
    f_norm = float(np.linalg.norm(f_grid.values))
    rel = float(np.linalg.norm(residual)) / f_norm if f_norm > 0 else 0.0
    u_grid = op.grid_function(u)
    logger.debug(f"线性求解完成: n={n_cells}, 相对残差 {rel:.3e}")
    return SolveResult(
        u_grid,
        1,
        float(np.linalg.norm(residual)) * op.h,
        rel,
        float(np.max(np.abs(residual))) * op.h,
    )


def solve_linear(
    spec: ProblemSpec, n_cells: int, weight_scheme: str = "cell_exact"
) -> GridFunction:
    return solve_linear_detailed(spec, n_cells, weight_scheme).u
