"""
特殊函数锚点表, 供 `fracsym specialfn-check` 使用

每一项给出库函数的计算值、独立得到的期望值 (闭式或单角度数值积分) 与容差。
"""

import math
from dataclasses import dataclass
from typing import Callable, List

from scipy import special

from fracsym.core import logger
from fracsym.core.specialfn import (
    HypergeometricParams,
    KernelParams,
    frac_perimeter,
    gamma_norm_const,
    gauss_2f1,
    kernel_angular_quadrature,
    radial_kernel_theta,
    sphere_area,
    unit_ball_volume,
)


@dataclass(frozen=True)
class OracleCase:
    name: str
    compute: Callable[[], float]
    expected: Callable[[], float]
    tol: float
    relative: bool = True


@dataclass(frozen=True)
class OracleResult:
    name: str
    value: float
    expected: float
    error: float
    tol: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.error) and self.error <= self.tol


def ball_perimeter_closed_form(N: int, s: float) -> float:
    """2^{1-s} pi^{(N-1)/2} N omega_N Gamma((1-s)/2) / (s (N-s) Gamma((N-s)/2))"""
    return (
        2.0 ** (1 - s)
        * math.pi ** ((N - 1) / 2)
        * sphere_area(N)
        * special.gamma((1 - s) / 2)
        / (s * (N - s) * special.gamma((N - s) / 2))
    )


def _classical_constant(N: int, s: float) -> float:
    return 4.0**s * s * special.gamma((N + 2 * s) / 2) / (math.pi ** (N / 2) * special.gamma(1 - s))


def _hyp(a, b, c, x):
    return lambda: gauss_2f1(HypergeometricParams(a, b, c, x))


def _theta(N, s, p, r, rho):
    return lambda: radial_kernel_theta(KernelParams(N, s, p), r, rho)


ORACLE_CASES: List[OracleCase] = [
    OracleCase("2F1(0.7,1.3;2.1;0)", _hyp(0.7, 1.3, 2.1, 0.0), lambda: 1.0, 0.0),
    OracleCase("2F1(0.5,0.5;2;1)", _hyp(0.5, 0.5, 2.0, 1.0), lambda: 4 / math.pi, 1e-10),
    OracleCase("2F1(1,1;2;0.5)", _hyp(1.0, 1.0, 2.0, 0.5), lambda: 2 * math.log(2), 1e-10),
    OracleCase(
        "2F1(1,1;2;0.99)", _hyp(1.0, 1.0, 2.0, 0.99), lambda: -math.log(0.01) / 0.99, 1e-10
    ),
    OracleCase(
        "2F1(0.3,0.4;1.6;0.98)",
        _hyp(0.3, 0.4, 1.6, 0.98),
        lambda: float(special.hyp2f1(0.3, 0.4, 1.6, 0.98)),
        1e-9,
    ),
    OracleCase("gamma(1,0.5,2)", lambda: gamma_norm_const(1, 0.5, 2.0), lambda: 1 / math.pi, 1e-12),
    OracleCase(
        "gamma(2,0.5,2)", lambda: gamma_norm_const(2, 0.5, 2.0), lambda: _classical_constant(2, 0.5), 1e-12
    ),
    OracleCase(
        "gamma(3,0.3,2)", lambda: gamma_norm_const(3, 0.3, 2.0), lambda: _classical_constant(3, 0.3), 1e-12
    ),
    OracleCase("omega_3", lambda: unit_ball_volume(3), lambda: 4 * math.pi / 3, 1e-14),
    OracleCase("Theta(1,0.5,2; 1,2)", _theta(1, 0.5, 2.0, 1.0, 2.0), lambda: 5 / 9, 1e-14),
    OracleCase(
        "Theta(3,0.5,2; 0.3,0.7)",
        _theta(3, 0.5, 2.0, 0.3, 0.7),
        lambda: kernel_angular_quadrature(KernelParams(3, 0.5, 2.0), 0.3, 0.7),
        1e-8,
    ),
    OracleCase(
        "Theta_alpha(2,0.4,3; 1,1000) * 1000^{N+sp} / alpha_N",
        lambda: radial_kernel_theta(KernelParams(2, 0.4, 3.0), 1.0, 1000.0, normalization="alpha")
        * 1000.0**3.2
        / KernelParams(2, 0.4, 3.0).alpha_N,
        lambda: 1.0,
        1e-3,
    ),
    OracleCase("P_0.5(B_1), N=1", lambda: frac_perimeter(1, 0.5), lambda: 8 * math.sqrt(2), 1e-12),
    OracleCase("P_0.5(B_2), N=1", lambda: frac_perimeter(1, 0.5, 2.0), lambda: 16.0, 1e-12),
    OracleCase(
        "P_0.5(B_1), N=2",
        lambda: frac_perimeter(2, 0.5),
        lambda: ball_perimeter_closed_form(2, 0.5),
        1e-5,
    ),
]


def run_oracle_table(cases: List[OracleCase] = None) -> List[OracleResult]:
    """逐项计算锚点, 单项抛出的异常记为失败而不中断整张表"""
    results = []
    for case in cases or ORACLE_CASES:
        expected = case.expected()
        try:
            value = case.compute()
        except Exception as e:
            logger.error(f"锚点 {case.name} 计算失败: {e}")
            results.append(OracleResult(case.name, math.nan, expected, math.inf, case.tol))
            continue
        error = abs(value - expected)
        if case.relative and expected != 0:
            error /= abs(expected)
        results.append(OracleResult(case.name, value, expected, error, case.tol))
        logger.debug(f"锚点 {case.name}: {value:.15g} (期望 {expected:.15g})")
    return results
