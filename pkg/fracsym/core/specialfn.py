"""
特殊函数与常数

提供 Gauss 超几何函数 2F1、归一化常数 gamma(N,s,p)、单位球体积 omega_N、
径向核 Theta_{N,s,p} 以及球的分数阶周长 P_s(B_R)。

约定:
    径向核 Theta 取两个单位球面上的角平均 (对 N=1 即 {-1,+1} 上的两点平均),
    因此 Theta(r, rho) * max(r, rho)^{N+sp} -> 1 (远场渐近)。
    以 alpha_N 为前因子的闭式与按 N omega_N 归一化的双重积分都可经 normalization 参数取得。

所有函数都是输入的纯函数, 可在多线程中并发调用。
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from fracsym.core.config.default import TOLERANCES
from fracsym.core.errors import (
    ConvergenceError,
    ParameterRangeError,
    SingularityError,
)

_BLOCK = 256

THETA_NORMALIZATIONS = ("average", "surface", "alpha")


def _is_nonpositive_integer(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def _near_integer(v: float, eps: float = 1e-9) -> bool:
    return abs(v - round(v)) < eps


@dataclass(frozen=True)
class HypergeometricParams:
    a: float
    b: float
    c: float
    x: float
    """自变量, 取值于 [0, 1]"""

    def __post_init__(self):
        if _is_nonpositive_integer(self.c):
            raise ParameterRangeError(f"c 不能是零或负整数: c={self.c}")
        if not (0.0 <= self.x <= 1.0) or math.isnan(self.x):
            raise ParameterRangeError(f"x 必须在 [0, 1] 内: x={self.x}")

    @property
    def excess(self) -> float:
        """c - a - b, 决定 x -> 1 时的行为"""
        return self.c - self.a - self.b

    def euler(self) -> "HypergeometricParams":
        """Euler 变换后的参数 (c-a, c-b; c; x)"""
        return HypergeometricParams(self.c - self.a, self.c - self.b, self.c, self.x)


@dataclass(frozen=True)
class KernelParams:
    N: int
    """空间维数"""
    s: float
    p: float

    def __post_init__(self):
        _check_nsp(self.N, self.s, self.p)

    @property
    def sp(self) -> float:
        return self.s * self.p

    @property
    def alpha_N(self) -> float:
        """闭式核公式中的角常数 2 pi^{(N-1)/2} / Gamma((N-1)/2), N=1 时 Gamma(0) 退化, 返回 nan"""
        if self.N == 1:
            return float("nan")
        return 2.0 * math.pi ** ((self.N - 1) / 2) / special.gamma((self.N - 1) / 2)

    @property
    def surface_normalization(self) -> float:
        """按 (1/(N omega_N)) 双重球面积分定义的核与角平均核之比, 等于 N omega_N"""
        return self.N * unit_ball_volume(self.N)

    def normalization_factor(self, normalization: str) -> float:
        """角平均核到指定归一化的换算因子

        average: 1, 远场 Theta * rho^{N+sp} -> 1;
        surface: N omega_N, 对应 (1/(N omega_N)) 双重球面积分;
        alpha: alpha_N, 对应以 alpha_N 为前因子的闭式, 远场 Theta * rho^{N+sp} / alpha_N -> 1。
        """
        if normalization == "average":
            return 1.0
        if normalization == "surface":
            return self.surface_normalization
        if normalization == "alpha":
            if self.N == 1:
                raise ParameterRangeError("N = 1 时 alpha_N 退化, 只能使用 average 或 surface 归一化")
            return self.alpha_N
        raise ParameterRangeError(
            f"未知的核归一化 {normalization}, 可选 {', '.join(THETA_NORMALIZATIONS)}"
        )


def _check_nsp(N: int, s: float, p: float):
    if int(N) != N or N < 1:
        raise ParameterRangeError(f"维数 N 必须是正整数: N={N}")
    if not (0.0 < s < 1.0):
        raise ParameterRangeError(f"s 必须在 (0,1) 内: s={s}")
    if not p >= 2.0:
        raise ParameterRangeError(f"只考虑退化情形 p >= 2: p={p}")


def _sum_series(a: float, b: float, c: float, x: float, rel_tol: float) -> float:
    """直接对超几何级数分块求和"""
    if x == 0.0:
        return 1.0
    max_terms = TOLERANCES["hyp2f1_max_terms"]
    # 所有因子在 n > n_pos 之后为正, 之后尾项可以用几何级数控制
    n_pos = int(max(abs(a), abs(b), abs(c))) + 2
    total = 1.0
    term = 1.0
    n = 0
    while n < max_terms:
        k = np.arange(n, n + _BLOCK, dtype=float)
        ratios = (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x
        terms = term * np.cumprod(ratios)
        total += math.fsum(terms)
        term = terms[-1]
        n += _BLOCK
        if term == 0.0:
            # a 或 b 为非正整数, 级数截断为多项式
            return total
        if n <= n_pos:
            continue
        r = max(ratios[-1], x)
        if r >= 1.0:
            continue
        tail = abs(term) * r / (1.0 - r)
        if tail <= rel_tol * abs(total) * 1e-2:
            return total
    raise ConvergenceError(
        f"2F1({a}, {b}; {c}; {x}) 级数在 {max_terms} 项内未收敛",
        last_residual=abs(term),
        iterations=n,
    )


def _gauss_sum(a: float, b: float, c: float) -> float:
    """2F1(a,b;c;1) = Gamma(c)Gamma(c-a-b) / (Gamma(c-a)Gamma(c-b)), 要求 c > a+b"""
    return float(
        special.gamma(c)
        * special.gamma(c - a - b)
        * special.rgamma(c - a)
        * special.rgamma(c - b)
    )


def _near_one(a: float, b: float, c: float, x: float, rel_tol: float):
    """x 接近 1 时的求值, c-a-b 非整数时使用关于 1-x 的连接公式"""
    d = c - a - b
    if _near_integer(d):
        # 整数 c-a-b 时连接公式含对数项, 交给 scipy 的实现
        val = float(special.hyp2f1(a, b, c, x))
        if not math.isfinite(val):
            raise ConvergenceError(f"2F1({a}, {b}; {c}; {x}) 在 x->1 的对数情形下求值失败")
        return val
    y = 1.0 - x
    a1 = special.gamma(c) * special.gamma(d) * special.rgamma(c - a) * special.rgamma(c - b)
    a2 = special.gamma(c) * special.gamma(-d) * special.rgamma(a) * special.rgamma(b)
    first = a1 * _sum_series(a, b, 1.0 - d, y, rel_tol) if a1 != 0.0 else 0.0
    second = (
        a2 * y**d * _sum_series(c - a, c - b, 1.0 + d, y, rel_tol) if a2 != 0.0 else 0.0
    )
    return float(first + second)


def gauss_2f1(params: HypergeometricParams, rel_tol: float = None) -> float:
    """计算 Gauss 超几何函数 2F1(a,b;c;x), x in [0,1]

    x <= 0.95 时直接对级数求和; x = 1 时使用 Gauss 求和公式 (要求 c > a+b);
    0.95 < x < 1 时: 若 c-a-b < 0 先做 Euler 变换
    2F1(a,b;c;x) = (1-x)^{c-a-b} 2F1(c-a,c-b;c;x), 再用关于 1-x 的连接公式求值;
    c-a-b 为整数时连接公式含对数项, 交给 scipy.special.hyp2f1。

    Args:
        params (HypergeometricParams): 参数 a, b, c 与自变量 x
        rel_tol (float): 相对容差, 默认 1e-10

    Returns:
        float: 2F1(a,b;c;x)

    Raises:
        ParameterRangeError: x = 1 但 c <= a+b
        ConvergenceError: 级数与变换均未达到容差
    """
    rel_tol = rel_tol or TOLERANCES["hyp2f1_rel"]
    a, b, c, x = params.a, params.b, params.c, params.x
    if _is_nonpositive_integer(a) or _is_nonpositive_integer(b):
        return _sum_series(a, b, c, x, rel_tol)
    if x == 1.0:
        if params.excess <= 0:
            raise ParameterRangeError(
                f"x=1 时要求 c > a+b, 当前 c-a-b={params.excess}"
            )
        return _gauss_sum(a, b, c)
    if x <= TOLERANCES["hyp2f1_switch_x"]:
        return _sum_series(a, b, c, x, rel_tol)
    if params.excess < 0 and not _near_integer(params.excess):
        return (1.0 - x) ** params.excess * gauss_2f1(params.euler(), rel_tol)
    return _near_one(a, b, c, x, rel_tol)


def gauss_2f1_scaled(params: HypergeometricParams, rel_tol: float = None) -> float:
    """计算 (1-x)^{a+b-c} 2F1(a,b;c;x), 适用于 c-a-b <= 0 的情形

    由 Euler 变换等于 2F1(c-a,c-b;c;x), 在 x=1 处有限。
    """
    rel_tol = rel_tol or TOLERANCES["hyp2f1_rel"]
    if params.excess > 0:
        raise ParameterRangeError(
            f"gauss_2f1_scaled 只用于 c-a-b <= 0, 当前 c-a-b={params.excess}"
        )
    return gauss_2f1(params.euler(), rel_tol)


def gauss_2f1_derivative(params: HypergeometricParams, rel_tol: float = None) -> float:
    """2F1'(a,b;c;x) = (ab/c) 2F1(a+1,b+1;c+1;x)"""
    a, b, c = params.a, params.b, params.c
    if a == 0.0 or b == 0.0:
        return 0.0
    shifted = HypergeometricParams(a + 1.0, b + 1.0, c + 1.0, params.x)
    return a * b / c * gauss_2f1(shifted, rel_tol)


def unit_ball_volume(N: int) -> float:
    """单位球体积 omega_N = pi^{N/2} / Gamma(N/2 + 1)"""
    if int(N) != N or N < 1:
        raise ParameterRangeError(f"维数 N 必须是正整数: N={N}")
    return float(math.pi ** (N / 2) / special.gamma(N / 2 + 1))


def sphere_area(N: int) -> float:
    """R^N 中单位球面的面积 N omega_N"""
    return N * unit_ball_volume(N)


def gamma_norm_const(N: int, s: float, p: float) -> float:
    """分数阶 p-Laplace 算子的归一化常数

    gamma(N,s,p) = sp 2^{2s-2} (1-s) / pi^{(N-1)/2}
                   * Gamma((N+sp)/2) / (Gamma((p+1)/2) Gamma(2-s))
    """
    _check_nsp(N, s, p)
    sp = s * p
    return float(
        sp
        * 2.0 ** (2 * s - 2)
        * (1 - s)
        / math.pi ** ((N - 1) / 2)
        * special.gamma((N + sp) / 2)
        / (special.gamma((p + 1) / 2) * special.gamma(2 - s))
    )


def fractional_laplacian_limit_constants(N: int, p: float) -> tuple[float, float]:
    """s -> 1 时 (1-s) 乘以线性与 p 次奇异积分分别收敛到的常数

    Returns:
        tuple[float, float]: (pi^{N/2} / (4 Gamma((N+2)/2)),
                              pi^{(N-1)/2} Gamma((p+1)/2) / (p Gamma((N+p)/2)))
    """
    c_lin = math.pi ** (N / 2) / (4 * special.gamma((N + 2) / 2))
    c_p = (
        math.pi ** ((N - 1) / 2)
        * special.gamma((p + 1) / 2)
        / (p * special.gamma((N + p) / 2))
    )
    return float(c_lin), float(c_p)


def _theta_scaled(N: int, beta: float, r: float, rho: float) -> float:
    """角平均核乘以 |r-rho|^{1+beta}, 指数为 N+beta; 对角线上取极限值"""
    if r < 0 or rho < 0:
        raise ParameterRangeError(f"半径必须非负: r={r}, rho={rho}")
    big, small = max(r, rho), min(r, rho)
    if big == 0.0:
        raise SingularityError("r = rho = 0 处核无定义")
    if N == 1:
        return 0.5 * (1.0 + ((big - small) / (big + small)) ** (1.0 + beta))
    x = (small / big) ** 2
    params = HypergeometricParams((N + beta) / 2, beta / 2 + 1.0, N / 2, x)
    scaled = gauss_2f1_scaled(params)
    # |r-rho| / (1-x) = big^2 / (big + small)
    return scaled * big ** (-(N + beta)) * (big * big / (big + small)) ** (1.0 + beta)


def _theta(N: int, beta: float, r: float, rho: float, floor: float = None) -> float:
    floor = TOLERANCES["kernel_diag_floor"] if floor is None else floor
    gap = abs(r - rho)
    if gap == 0.0:
        raise SingularityError(f"核在对角线 r = rho = {r} 上奇异")
    if gap < floor * max(r, rho):
        raise SingularityError(
            f"|r - rho| = {gap} 低于溢出保护阈值 {floor} * max(r, rho)"
        )
    if N == 1:
        e = 1.0 + beta
        return 0.5 * (gap ** (-e) + (r + rho) ** (-e))
    return _theta_scaled(N, beta, r, rho) / gap ** (1.0 + beta)


def radial_kernel_theta(
    kp: KernelParams,
    r: float,
    rho: float,
    floor: float = None,
    normalization: str = "average",
) -> float:
    """径向核 Theta_{N,s,p}(r, rho)

    默认为 |r x' - rho y'|^{-(N+sp)} 在 x', y' 跑遍单位球面时的角平均。
    N >= 2 时等于 max(r,rho)^{-(N+sp)} 2F1((N+sp)/2, sp/2+1; N/2; (min/max)^2);
    N = 1 时为两点平均 (1/2)[|r-rho|^{-(1+sp)} + (r+rho)^{-(1+sp)}]。
    其他归一化见 KernelParams.normalization_factor。

    Args:
        kp (KernelParams): 维数与指数
        r (float): 半径, >= 0
        rho (float): 半径, >= 0
        floor (float): 溢出保护, |r-rho| 小于 floor*max(r,rho) 时报错
        normalization (str): average / surface / alpha

    Raises:
        SingularityError: r = rho 或过于接近对角线
        ParameterRangeError: 未知的归一化, 或 N = 1 时要求 alpha
    """
    factor = kp.normalization_factor(normalization)
    return factor * _theta(kp.N, kp.sp, r, rho, floor)


def radial_kernel_theta_scaled(kp: KernelParams, r: float, rho: float) -> float:
    """Theta(r, rho) * |r - rho|^{1+sp}, 在对角线上连续延拓"""
    return _theta_scaled(kp.N, kp.sp, r, rho)


def kernel_angular_quadrature(kp: KernelParams, r: float, rho: float) -> float:
    """用单角度数值积分计算角平均, 作为闭式的参照值

    Theta = |S^{N-2}| / |S^{N-1}| * int_0^pi sin^{N-2}(t) (r^2+rho^2-2 r rho cos t)^{-(N+sp)/2} dt
    """
    N, e = kp.N, kp.N + kp.sp
    if N == 1:
        return 0.5 * (abs(r - rho) ** (-(1 + kp.sp)) + (r + rho) ** (-(1 + kp.sp)))
    weight = sphere_area(N - 1) / sphere_area(N) if N > 2 else 1.0 / math.pi

    def integrand(t):
        return math.sin(t) ** (N - 2) * (r * r + rho * rho - 2 * r * rho * math.cos(t)) ** (
            -e / 2
        )

    val, _ = integrate.quad(integrand, 0.0, math.pi, epsabs=0.0, epsrel=1e-12, limit=200)
    return weight * val


@lru_cache(maxsize=64)
def _unit_perimeter(N: int, s: float) -> float:
    if N == 1:
        return 2.0 ** (2 - s) / (s * (1 - s))
    rel = TOLERANCES["perimeter_rel"]

    def inner(r: float) -> float:
        # rho = r + w, w = (1-r) e^t; 已提出因子 (1-r)^{-s}
        def integrand(t: float) -> float:
            w = (1.0 - r) * math.exp(t)
            rho = r + w
            return _theta_scaled(N, s, r, rho) * rho ** (N - 1) * math.exp(-s * t)

        val, _ = integrate.quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=rel, limit=200)
        return val

    def outer(r: float) -> float:
        return r ** (N - 1) * inner(r)

    val, err = integrate.quad(
        outer, 0.0, 1.0, weight="alg", wvar=(0.0, -s), epsabs=0.0, epsrel=rel, limit=200
    )
    if not math.isfinite(val) or err > 1e-6 * abs(val):
        raise ConvergenceError(
            f"P_s(B_1) 的数值积分未收敛: N={N}, s={s}, 误差估计 {err}",
            last_residual=err,
        )
    return sphere_area(N) ** 2 * val


def frac_perimeter(N: int, s: float, R: float = 1.0) -> float:
    """球 B_R 的分数阶 s-周长 P_s(B_R) = int_{B_R} int_{B_R^c} |x-y|^{-(N+s)}

    N = 1 时为闭式 2^{2-s} / (s(1-s)) * R^{1-s}; N >= 2 时化为关于 (r, rho) 的
    二重径向积分, 内层在 rho = 1 处按对数尺度展开, 外层以代数权 (1-r)^{-s} 处理界面奇性。
    P_s(B_R) = R^{N-s} P_s(B_1)。

    Raises:
        ConvergenceError: 数值积分未收敛
    """
    if int(N) != N or N < 1:
        raise ParameterRangeError(f"维数 N 必须是正整数: N={N}")
    if not (0.0 < s < 1.0):
        raise ParameterRangeError(f"s 必须在 (0,1) 内: s={s}")
    if not R > 0:
        raise ParameterRangeError(f"半径 R 必须为正: R={R}")
    return _unit_perimeter(int(N), float(s)) * R ** (N - s)


def perimeter_limits(N: int, s: float) -> tuple[float, float]:
    """返回 (s P_s(B_1), (1-s) P_s(B_1))

    s -> 0 时前者趋于 N omega_N * omega_N, s -> 1 时后者趋于 omega_{N-1} * N omega_N
    (N=1 时 omega_0 = 1)。
    """
    per = frac_perimeter(N, s)
    return s * per, (1 - s) * per
