"""
fracsym 异常体系

所有库函数只抛出 FracSymError 的子类, CLI 负责把它们翻译成退出码:

- ConfigError / ParameterRangeError -> 2
- ConvergenceError -> 3
- 其余断言失败 -> 1
"""


class FracSymError(Exception):
    """fracsym 所有异常的基类"""


class ParameterRangeError(FracSymError, ValueError):
    """参数超出允许范围, 例如 s 不在 (0,1) 内或 p < 2"""


class SingularityError(FracSymError, ArithmeticError):
    """在核函数的奇异点 (对角线 r = rho) 上求值"""


class ConvergenceError(FracSymError, ArithmeticError):
    """级数、数值积分或迭代求解器未能在给定容差内收敛"""

    def __init__(
        self, message: str, last_residual: float = None, iterations: int = None
    ):
        super().__init__(message)
        self.last_residual = last_residual
        self.iterations = iterations


class MeasureMismatchError(FracSymError, ValueError):
    """比较质量集中度时两个区间的测度不一致"""


class DegenerateMassError(FracSymError, ArithmeticError):
    """构造 g 时在零质量的单元上需要负幂"""


class ConfigError(FracSymError, ValueError):
    """配置文件解析或校验失败"""

    def __init__(self, message: str, line_no: int = None):
        if line_no is not None:
            message = f"第 {line_no} 行: {message}"
        super().__init__(message)
        self.line_no = line_no
