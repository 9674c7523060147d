"""
Oracle Bounds - 两个oracle不等式损失上界

相容性条件上界：   L ≤ 64σ²p₀(t² + 2log p)/(nψ₀²)，成立概率 > 1 - 2e^{-t²/2}
限制特征值上界：   L ≤ 16A²σ²p₀ log(p)/(nκ²)，成立概率 ≥ 1 - p^{1-A²/8}
正交设计下 ψ₀ = κ = 1。
"""

import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Optional

import pandas as pd

from .errors import DimensionError, DomainError


class BoundKind(Enum):
    COMPAT = "compat"
    RE = "re"


@dataclass(frozen=True)
class BoundParams:
    """上界参数

    Attributes:
        n: 样本量
        p: 预测变量个数
        p0: 真模型非零系数个数
        sigma2: 噪声方差
        psi0: 相容性常数 ψ₀
        kappa: 限制特征值常数 κ
        t: 相容性上界的概率参数
        A: 限制特征值上界的概率参数
    """
    n: int
    p: int
    p0: int
    sigma2: float
    psi0: float = 1.0
    kappa: float = 1.0
    t: float = 1.0
    A: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.p0 < 1:
            raise DomainError(f"n 和 p0 必须为正，当前 n={self.n}, p0={self.p0}")
        if self.p < 2:
            raise DomainError(f"上界要求 p >= 2（log p 在 p=1 时退化），当前为{self.p}")
        for name in ("sigma2", "psi0", "kappa", "t", "A"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} 必须为正，当前为{getattr(self, name)}")


@dataclass(frozen=True)
class BoundPoint:
    """上界曲线上的一点"""
    p: int
    bound: float
    ratio: float


def _check_coverage(coverage: float) -> None:
    if not 0.0 < coverage < 1.0:
        raise DomainError(f"覆盖概率必须在(0,1)内，当前为{coverage}")


def bound_compat(params: BoundParams) -> float:
    """64σ²p₀(t² + 2log p)/(nψ₀²)"""
    return (64.0 * params.sigma2 * params.p0 * (params.t ** 2 + 2.0 * math.log(params.p))
            / (params.n * params.psi0 ** 2))


def bound_re(params: BoundParams) -> float:
    """16A²σ²p₀ log(p)/(nκ²)"""
    return (16.0 * params.A ** 2 * params.sigma2 * params.p0 * math.log(params.p)
            / (params.n * params.kappa ** 2))


def solve_t(coverage: float) -> float:
    """解 1 - 2e^{-t²/2} = coverage：t = √(2ln(2/(1-coverage)))"""
    _check_coverage(coverage)
    return math.sqrt(2.0 * math.log(2.0 / (1.0 - coverage)))


def solve_A(coverage: float, p: int) -> float:
    """解 1 - p^{1-A²/8} = coverage：A = √(8(1 - ln(1-coverage)/ln p))"""
    _check_coverage(coverage)
    if p < 2:
        raise DomainError(f"solve_A 要求 p >= 2，当前为{p}")
    return math.sqrt(8.0 * (1.0 - math.log(1.0 - coverage) / math.log(p)))


def coverage_compat(t: float) -> float:
    """相容性上界的成立概率 1 - 2e^{-t²/2}"""
    return 1.0 - 2.0 * math.exp(-t * t / 2.0)


def coverage_re(A: float, p: int) -> float:
    """限制特征值上界的成立概率 1 - p^{1-A²/8}"""
    return 1.0 - p ** (1.0 - A * A / 8.0)


def bound_at(kind: BoundKind, n: int, p: int, p0: int, sigma2: float, coverage: float,
             psi0: float = 1.0, kappa: float = 1.0, fixed_A: Optional[float] = None) -> float:
    """在给定覆盖概率下求上界值（A 默认按每个 p 重新求解）"""
    params = BoundParams(n=n, p=p, p0=p0, sigma2=sigma2, psi0=psi0, kappa=kappa)
    if kind is BoundKind.COMPAT:
        return bound_compat(replace(params, t=solve_t(coverage)))
    A = fixed_A if fixed_A is not None else solve_A(coverage, p)
    return bound_re(replace(params, A=A))


def bound_ratio_curve(kind: BoundKind, n: int, p_list: list[int], p0: int, sigma2: float,
                      coverage: float, psi0: float = 1.0, kappa: float = 1.0,
                      fixed_A: Optional[float] = None) -> list[BoundPoint]:
    """上界隐含的损失比 bound(p)/bound(p0)

    Raises:
        DimensionError: 列表中出现 p < p0
    """
    if any(p < p0 for p in p_list):
        raise DimensionError(f"p 列表中的每个值都必须不小于 p0={p0}")
    reference = bound_at(kind, n, p0, p0, sigma2, coverage, psi0, kappa, fixed_A)
    points = []
    for p in p_list:
        value = bound_at(kind, n, p, p0, sigma2, coverage, psi0, kappa, fixed_A)
        points.append(BoundPoint(p=p, bound=value, ratio=value / reference))
    return points


def curve_to_csv(points: list[BoundPoint], path: str | Path) -> None:
    frame = pd.DataFrame([(pt.p, pt.bound, pt.ratio) for pt in points],
                         columns=["p", "bound", "ratio"])
    frame.to_csv(path, index=False, float_format="%.10g")
