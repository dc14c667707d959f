"""
对称化线性问题与比较定理的验证流程

流程: 求解原问题得到 u -> Schwarz 重排得到 u^# -> 由 f^# 构造径向数据 g ->
在对称区间上求解线性问题 (-Delta)^s v = g -> 比较 u^# 与 v 的质量集中度。

另外提供证明中间步骤的离散检验 (穿越积分不等式与 Holder 步), 以及开放问题中
(p-1) 次幂比较的数值证据。
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from fracsym.core import logger
from fracsym.core.errors import DegenerateMassError, ParameterRangeError
from fracsym.core.nonlocal_op import (
    ProblemSpec,
    SolveResult,
    SolverConfig,
    kernel_weights,
    resample,
    solve_linear_detailed,
    solve_nonlinear_detailed,
)
from fracsym.core.rearrange import (
    GridFunction,
    boundary_radii,
    concentration_function,
    lorentz_norm,
    mass_of_powers,
    radial_profile,
    schwarz_profile,
)
from fracsym.core.specialfn import (
    frac_perimeter,
    gamma_norm_const,
    sphere_area,
)


@dataclass(frozen=True, eq=False)
class SymmetrizedDatum:
    g: GridFunction
    """对称区间上的径向数据"""
    H: float
    perimeter: float
    """H 中使用的 P_s(B_1)"""
    zero_mass_cells: int = 0
    """触发零质量约定的单元个数"""


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    radii: np.ndarray
    conc_u_sharp: np.ndarray
    conc_v: np.ndarray
    worst_violation: float
    """max_r (conc_u_sharp - conc_v)"""
    tolerance_used: float
    solver_diagnostics: dict = field(default_factory=dict)
    profiles: dict = field(default_factory=dict)
    """参与比较的网格函数, 例如 u, u_sharp, f_sharp, g, v"""

    @property
    def slack(self) -> np.ndarray:
        return self.conc_v - self.conc_u_sharp

    @property
    def passed(self) -> bool:
        return self.worst_violation <= self.tolerance_used


@dataclass(frozen=True, eq=False)
class CrossingProfile:
    """逐半径的不等式两端, slack = rhs - lhs"""

    radii: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def slack(self) -> np.ndarray:
        return self.rhs - self.lhs

    @property
    def min_slack(self) -> float:
        return float(self.slack.min()) if self.slack.size else 0.0


@dataclass(frozen=True)
class RegularityRecord:
    m: float
    q: float
    """目标可积指标, L^inf 情形为 inf"""
    lorentz_index: Optional[float]
    """Lorentz 空间的第二指标 Nm/(N+sm(p-2)), L^inf 情形为 None"""
    ratio: float
    """||u||_q / ||f||^{1/(p-1)}"""
    branch: str
    """取值 lorentz 或 linf"""
    u_norm: float
    f_norm: float


def _exponent_a(N: int, s: float, p: float) -> float:
    return (N - s) * (p - 2) / (p - 1)


def h_const(N: int, s: float, p: float) -> float:
    """对称化问题中的常数

    H = gamma(N,s,2) / (N omega_N) * P_s(B_1)^{(p-2)/(p-1)} / gamma(N,s,p)^{1/(p-1)},
    p = 2 时退化为 1/(N omega_N)。
    """
    lead = gamma_norm_const(N, s, 2.0) / sphere_area(N)
    if p == 2.0:
        return 1.0 / sphere_area(N)
    per = frac_perimeter(N, s)
    return lead * per ** ((p - 2) / (p - 1)) / gamma_norm_const(N, s, p) ** (1 / (p - 1))


def _ball_mass(profile: GridFunction, N: int, r: np.ndarray) -> np.ndarray:
    """径向剖面在 B_r 上的质量 N omega_N int_0^r f rho^{N-1}"""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    pos = r > 0
    a = profile.edges[:-1]
    b = profile.edges[1:]
    upper = np.clip(r[pos, None], a[None, :], b[None, :])
    out[pos] = sphere_area(N) * np.sum(profile.values * (upper**N - a**N) / N, axis=1)
    return out


def g_mass_curve(
    f_sharp: GridFunction, N: int, s: float, p: float, radii, H: float = None
) -> np.ndarray:
    """int_{B_r} g = N omega_N H r^a M(r)^{1/(p-1)}, M(r) = int_{B_r} f^#"""
    H = h_const(N, s, p) if H is None else H
    radii = np.asarray(radii, dtype=float)
    mass = _ball_mass(radial_profile(f_sharp), N, radii)
    return sphere_area(N) * H * radii ** _exponent_a(N, s, p) * mass ** (1 / (p - 1))


def build_g(
    f_sharp: GridFunction, N: int, s: float, p: float, strict: bool = False
) -> SymmetrizedDatum:
    """构造对称化问题的径向数据

    g(r) = H r^a [ a r^{-N} M(r)^{1/(p-1)} + (N omega_N / (p-1)) M(r)^{(2-p)/(p-1)} f^#(r) ],
    a = (N-s)(p-2)/(p-1), 在单元中心取值; p > 2 时含 r = 0 的中心单元取精确单元平均,
    以保持 g 在原点附近的质量。M(r) = 0 的单元按零质量约定取 g = 0。

    Args:
        f_sharp (GridFunction): 对称区间上非负、径向不增的剖面
        strict (bool): 为 True 时遇到零质量单元直接报错

    Raises:
        DegenerateMassError: strict 模式下出现零质量单元
    """
    if not f_sharp.is_symmetric:
        raise ParameterRangeError("build_g 需要对称区间上的重排剖面")
    if np.any(f_sharp.values < 0):
        raise ParameterRangeError("build_g 需要非负的重排剖面")
    H = h_const(N, s, p)
    perimeter = frac_perimeter(N, s)
    if p == 2.0:
        return SymmetrizedDatum(f_sharp.with_values(f_sharp.values.copy()), H, perimeter)
    a = _exponent_a(N, s, p)
    area = sphere_area(N)
    n, h = f_sharp.n_cells, f_sharp.h
    centre = [n // 2] if n % 2 else [n // 2 - 1, n // 2]
    outer = np.ones(n, dtype=bool)
    outer[centre] = False

    r = np.abs(f_sharp.centers)
    mass = _ball_mass(radial_profile(f_sharp), N, r)
    values = np.zeros(n)
    live = outer & (mass > 0)
    rl, ml = r[live], mass[live]
    values[live] = H * rl**a * (
        a * rl ** (-N) * ml ** (1 / (p - 1))
        + area / (p - 1) * ml ** ((2 - p) / (p - 1)) * f_sharp.values[live]
    )
    # 中心单元: 用 int_{B_r} g 的闭式求精确平均, N = 1 时偶数网格的每个中心单元占半个球
    if n % 2 == 0:
        G = g_mass_curve(f_sharp, N, s, p, [h], H=H)[0]
        values[centre] = G / (2 * h)
    else:
        G = g_mass_curve(f_sharp, N, s, p, [h / 2], H=H)[0]
        values[centre] = G / h
    zero_cells = int(np.count_nonzero(outer & ~live)) + (len(centre) if G == 0 else 0)
    if zero_cells and strict:
        raise DegenerateMassError(f"{zero_cells} 个单元上 int_(B_r) f^# = 0")
    if zero_cells:
        logger.info(f"构造 g 时有 {zero_cells} 个单元触发零质量约定")
    return SymmetrizedDatum(f_sharp.with_values(values), H, perimeter, zero_cells)


def default_tolerance(f: GridFunction, s: float, p: float, scale: float = 1.0) -> float:
    """h^{min(1,2s)} ||f||_1^{1/(p-1)}"""
    l1 = float(np.sum(np.abs(f.values)) * f.h)
    return scale * f.h ** min(1.0, 2 * s) * l1 ** (1 / (p - 1))


def _snap_radii(grid: GridFunction, radii) -> np.ndarray:
    """把半径向下对齐到对称网格的单元边界半径"""
    edges = boundary_radii(grid)
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    idx = np.searchsorted(edges, radii * (1 + 1e-12), side="right") - 1
    return edges[np.clip(idx, 0, edges.size - 1)]


def _crossing_sums(
    values: np.ndarray, grid: GridFunction, beta: float, power: float, radii: np.ndarray
) -> np.ndarray:
    """sum_{i in B_r} [ sum_{j not in B_r} w_ij |v_i - v_j|^power + T_i |v_i|^power ] h"""
    weights, tail = kernel_weights(grid.domain_left, grid.domain_right, grid.n_cells, beta)
    x = np.abs(grid.centers)
    pair = weights * np.abs(values[:, None] - values[None, :]) ** power
    tails = tail * np.abs(values) ** power
    out = np.zeros(radii.size)
    for k, r in enumerate(radii):
        inside = x < r
        if not np.any(inside):
            continue
        out[k] = (pair[np.ix_(inside, ~inside)].sum() + tails[inside].sum()) * grid.h
    return out


def key_inequality_check(
    u: GridFunction, f: GridFunction, spec: ProblemSpec, radii=None
) -> CrossingProfile:
    """穿越积分不等式的离散检验

    gamma int_{B_r} int_{B_r^c} |u^#(x) - u^#(y)|^{p-1} / |x-y|^{N+sp} <= int_{B_r} f^#,
    左端用与求解器相同的权重在对称网格上计算, 半径对齐到单元边界。
    """
    u_sharp = schwarz_profile(u)
    f_sharp = schwarz_profile(f)
    radii = boundary_radii(u_sharp) if radii is None else _snap_radii(u_sharp, radii)
    lhs = spec.gamma * _crossing_sums(u_sharp.values, u_sharp, spec.sp, spec.p - 1, radii)
    rhs = concentration_function(f_sharp, radii).masses
    return CrossingProfile(radii, lhs, rhs)


def holder_step_check(u: GridFunction, spec: ProblemSpec, radii=None) -> CrossingProfile:
    """Holder 步的离散检验

    int_{B_r} int_{B_r^c} |u^# (x) - u^#(y)| / |x-y|^{N+2s}
        <= r^a P_s(B_1)^{(p-2)/(p-1)} ( int_{B_r} int_{B_r^c} |u^#(x) - u^#(y)|^{p-1} / |x-y|^{N+sp} )^{1/(p-1)}
    """
    s, p, N = spec.s, spec.p, spec.N
    u_sharp = schwarz_profile(u)
    radii = boundary_radii(u_sharp) if radii is None else _snap_radii(u_sharp, radii)
    lhs = _crossing_sums(u_sharp.values, u_sharp, 2 * s, 1.0, radii)
    inner = _crossing_sums(u_sharp.values, u_sharp, s * p, p - 1, radii)
    per = frac_perimeter(N, s)
    rhs = radii ** _exponent_a(N, s, p) * per ** ((p - 2) / (p - 1)) * inner ** (1 / (p - 1))
    return CrossingProfile(radii, lhs, rhs)


def solve_problem(
    spec: ProblemSpec, cfg: SolverConfig, n_cells: int, weight_scheme: str = "cell_exact"
) -> SolveResult:
    """p = 2 时直接求解线性系统, 否则最小化离散能量"""
    if spec.p == 2.0:
        return solve_linear_detailed(spec, n_cells, weight_scheme)
    return solve_nonlinear_detailed(spec, cfg, n_cells, weight_scheme)


def verify_theorem(
    spec: ProblemSpec,
    cfg: SolverConfig,
    n_cells: int,
    tolerance: float = None,
    tolerance_scale: float = 1.0,
    weight_scheme: str = "cell_exact",
) -> ComparisonReport:
    """验证 u^# < v (质量集中度意义下)

    Args:
        spec (ProblemSpec): 原问题
        cfg (SolverConfig): 非线性求解器配置, p = 2 时用直接法
        n_cells (int): 网格单元数
        tolerance (float): 判定容差, 默认 h^{min(1,2s)} ||f||_1^{1/(p-1)} 乘以 tolerance_scale
        weight_scheme (str): 两个求解共用的权重方案

    Returns:
        ComparisonReport: worst_violation <= tolerance_used 即通过
    """
    if spec.N != 1:
        raise ParameterRangeError(f"verify_theorem 只支持 N = 1, 当前 N = {spec.N}")
    f = resample(spec.f, n_cells)
    spec = spec.with_source(f)
    logger.info(f"求解原问题: s={spec.s}, p={spec.p}, n={n_cells}")
    res_u = solve_problem(spec, cfg, n_cells, weight_scheme)
    u_sharp = schwarz_profile(res_u.u)
    f_sharp = schwarz_profile(f)
    datum = build_g(f_sharp, spec.N, spec.s, spec.p)
    logger.info(f"构造对称化数据: H = {datum.H:.10g}, P_s(B_1) = {datum.perimeter:.10g}")
    sym_spec = ProblemSpec(s=spec.s, p=2.0, f=datum.g, N=spec.N)
    res_v = solve_linear_detailed(sym_spec, n_cells, weight_scheme)

    radii = boundary_radii(u_sharp)
    conc_u = concentration_function(u_sharp, radii).masses
    conc_v = concentration_function(res_v.u, radii).masses
    worst = float(np.max(conc_u - conc_v))
    tol = default_tolerance(f, spec.s, spec.p, tolerance_scale) if tolerance is None else tolerance
    logger.info(f"比较完成: 最大违背 {worst:.3e}, 容差 {tol:.3e}")
    return ComparisonReport(
        radii,
        conc_u,
        conc_v,
        worst,
        tol,
        solver_diagnostics={
            "u": res_u.diagnostics(),
            "v": res_v.diagnostics(),
            "zero_mass_cells": datum.zero_mass_cells,
            "H": datum.H,
            "perimeter": datum.perimeter,
        },
        profiles={
            "f": f,
            "u": res_u.u,
            "u_sharp": u_sharp,
            "f_sharp": f_sharp,
            "g": datum.g,
            "v": res_v.u,
        },
    )


def solve_radial_nonlinear(
    spec: ProblemSpec, cfg: SolverConfig, n_cells: int, weight_scheme: str = "cell_exact"
) -> SolveResult:
    """在对称区间上以 f^# 为数据求解非线性问题 (-Delta_p)^s v = f^#"""
    f_sharp = schwarz_profile(resample(spec.f, n_cells))
    return solve_problem(spec.with_source(f_sharp), cfg, n_cells, weight_scheme)


def power_comparison(
    u: GridFunction, v_nl: GridFunction, p: float, tol: float = None
) -> ComparisonReport:
    """比较 (u^#)^{p-1} 与 v_nl^{p-1} 的质量集中度, 只记录不断言"""
    u_pow = mass_of_powers(schwarz_profile(u), p - 1)
    v_pow = mass_of_powers(v_nl, p - 1)
    radii = boundary_radii(u_pow, v_pow)
    conc_u = concentration_function(u_pow, radii).masses
    conc_v = concentration_function(v_pow, radii).masses
    tol = max(u_pow.h, v_pow.h) if tol is None else tol
    return ComparisonReport(
        radii,
        conc_u,
        conc_v,
        float(np.max(conc_u - conc_v)),
        tol,
        profiles={"u_pow": u_pow, "v_pow": v_pow},
    )


def flux_comparison(
    u: GridFunction, v_nl: GridFunction, spec: ProblemSpec, radii=None
) -> CrossingProfile:
    """u^# 与 v_nl 的穿越积分比较 int_{B_r} int_{B_r^c} |w(x)-w(y)|^{p-1} / |x-y|^{N+sp}

    slack = v_nl 一侧 - u^# 一侧, 只作为数值证据记录。
    """
    u_sharp = schwarz_profile(u)
    radii = boundary_radii(u_sharp) if radii is None else _snap_radii(u_sharp, radii)
    lhs = _crossing_sums(u_sharp.values, u_sharp, spec.sp, spec.p - 1, radii)
    rhs = _crossing_sums(v_nl.values, v_nl, spec.sp, spec.p - 1, radii)
    return CrossingProfile(radii, lhs, rhs)


def g_summability_exponent(N: int, s: float, p: float, m: float) -> float:
    """g 的可积指标 t

    sp < N 时 t = Nm(p-1)/(N+sm(p-2)); N = 1, s >= 1/2 时取 (1, (p-1)/(1+s(p-2))) 的中点;
    p = 2 时 g = f^#, 直接返回 m。
    """
    if p == 2.0:
        return m
    if s * p < N:
        return N * m * (p - 1) / (N + s * m * (p - 2))
    if N == 1 and s >= 0.5:
        return 0.5 * (1.0 + (p - 1) / (1 + s * (p - 2)))
    raise ParameterRangeError(f"N={N}, s={s}, p={p} 时没有可用的 g 可积指标")


def regularity_exponents(N: int, s: float, p: float, m: float) -> tuple[float, Optional[float], str]:
    """返回 (q, Lorentz 第二指标, 分支)

    Raises:
        ParameterRangeError: sp >= N, m = N/(sp), 或 m 低于可积性下界
    """
    sp = s * p
    if not sp < N:
        raise ParameterRangeError(
            f"正则性估计要求 sp < N, 当前 sp = {sp:.6g}, N = {N}"
        )
    critical = N / sp
    if math.isclose(m, critical, rel_tol=1e-12):
        raise ParameterRangeError(f"m = N/(sp) = {critical:.6g} 是临界指标, 不在估计范围内")
    if m > critical:
        return math.inf, None, "linf"
    lower = p * N / ((p - 1) * N + sp)
    if m < lower:
        raise ParameterRangeError(f"m 必须满足 m >= pN/((p-1)N+sp) = {lower:.6g}, 当前 m = {m}")
    q = N * m * (p - 1) / (N - s * m * p)
    return q, N * m / (N + s * m * (p - 2)), "lorentz"


def regularity_sweep_values(N: int, s: float, p: float, count: int = 3) -> list[float]:
    """在 [pN/((p-1)N+sp), N/(sp)) 内等距取 count 个 m"""
    sp = s * p
    if not sp < N:
        raise ParameterRangeError(
            f"正则性扫描要求 sp < N, 当前 sp = {sp:.6g}, N = {N}"
        )
    lo = p * N / ((p - 1) * N + sp)
    hi = N / sp
    return [lo + k * (hi - lo) / count for k in range(count)]


def regularity_record(
    spec: ProblemSpec,
    cfg: SolverConfig,
    n_cells: int,
    u: GridFunction = None,
    weight_scheme: str = "cell_exact",
) -> RegularityRecord:
    """正则性估计的数值记录: ratio = ||u||_q / ||f||^{1/(p-1)}

    Lorentz 分支的范数为 ||f||_{m, Nm/(N+sm(p-2))}, L^inf 分支为 ||f||_m。
    u 已知时不再重复求解。
    """
    q, index, branch = regularity_exponents(spec.N, spec.s, spec.p, spec.m)
    f = resample(spec.f, n_cells)
    if u is None:
        u = solve_problem(spec.with_source(f), cfg, n_cells, weight_scheme).u
    if branch == "linf":
        f_norm = f.lp_norm(spec.m)
    else:
        f_norm = lorentz_norm(f, spec.m, index)
    u_norm = u.lp_norm(q)
    ratio = u_norm / f_norm ** (1 / (spec.p - 1)) if f_norm > 0 else 0.0
    return RegularityRecord(spec.m, q, index, ratio, branch, u_norm, f_norm)
