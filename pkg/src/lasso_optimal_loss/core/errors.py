"""
Errors - 领域异常定义

所有领域异常同时继承 ValueError，调用方按 ValueError 捕获的旧习惯依然有效。
"""

from typing import Optional


class LassoLossError(Exception):
    """本包所有异常的基类"""


class DimensionError(LassoLossError, ValueError):
    """维度不合法（奇数p、p>n、k>p、下标越界、长度不一致等）"""


class DomainError(LassoLossError, ValueError):
    """参数超出定义域（p<=1、覆盖概率不在(0,1)内、λ<0、β₁=0等）"""


class ConfigError(LassoLossError, ValueError):
    """实验配置无法解析或不合法

    Attributes:
        message: 不含行号前缀的错误描述
        line: 出错的行号（从1开始），与行无关的错误为None
    """

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.message = message
        if line is not None:
            message = f"第{line}行: {message}"
        super().__init__(message)


class DataParseError(LassoLossError, ValueError):
    """数据文件解析失败

    Attributes:
        row: 出错的数据行号（从1开始，不含表头）
        column: 出错的列名
    """

    def __init__(self, message: str, row: Optional[int] = None,
                 column: Optional[str] = None):
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f"第{row}行")
        if column is not None:
            location.append(f"列'{column}'")
        if location:
            message = f"{'，'.join(location)}: {message}"
        super().__init__(message)


class ZeroVarianceColumnError(LassoLossError, ValueError):
    """标准化时遇到方差为零的列"""

    def __init__(self, column: int, label: Optional[str] = None):
        self.column = column
        self.label = label
        name = label if label is not None else str(column)
        super().__init__(f"列 {name} 方差为零，无法标准化")


class NonConvergenceError(LassoLossError, ArithmeticError):
    """坐标下降在 max_sweeps 次扫描内未收敛

    Attributes:
        lambda_value: 未收敛时的 λ
        sweeps: 已执行的扫描次数
        max_change: 最后一次扫描的最大系数变化量
    """

    def __init__(self, lambda_value: float, sweeps: int, max_change: float):
        self.lambda_value = lambda_value
        self.sweeps = sweeps
        self.max_change = max_change
        super().__init__(
            f"λ={lambda_value:.6g} 处坐标下降未收敛："
            f"{sweeps}次扫描后最大系数变化为{max_change:.3g}"
        )


class InsufficientDataError(LassoLossError, ValueError):
    """数据不足以完成统计检验"""
