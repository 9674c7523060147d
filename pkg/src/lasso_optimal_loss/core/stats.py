"""
Stats - 共用统计工具

标准正态CDF/分位数、含无穷值的中位数、二项标准误，以及配对样本的
Wilcoxon符号秩检验（小样本精确分布，大样本正态近似）。
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import stats as sps
from scipy.special import ndtr, ndtri

from .errors import DimensionError, DomainError, InsufficientDataError

EXACT_MAX_PAIRS = 20


class WilcoxonMethod(Enum):
    AUTO = "auto"
    EXACT = "exact"
    APPROX = "approx"


@dataclass(frozen=True)
class WilcoxonResult:
    """Wilcoxon符号秩检验结果

    Attributes:
        statistic: 正秩和 W⁺
        n_effective: 非零差值的配对数
        p_two_sided: 双侧p值
        p_greater: 单侧p值（备择：x 倾向大于 y）
        p_less: 单侧p值（备择：x 倾向小于 y）
        alpha: 显著性水平
        significant_at: 双侧p值 < alpha
        method: 实际使用的方法
    """
    statistic: float
    n_effective: int
    p_two_sided: float
    p_greater: float
    p_less: float
    alpha: float
    significant_at: bool
    method: WilcoxonMethod


def normal_cdf(x: float) -> float:
    """标准正态分布函数 Φ(x)"""
    if not math.isfinite(x):
        raise DomainError(f"x 必须有限，当前为{x}")
    return float(ndtr(x))


def normal_quantile(prob: float) -> float:
    """标准正态分位数 Φ⁻¹(p)，p ∈ (0,1)"""
    if not 0.0 < prob < 1.0:
        raise DomainError(f"概率必须在(0,1)内，当前为{prob}")
    return float(ndtri(prob))


def median(values: Sequence[float]) -> float:
    """中位数，偶数个取中间两数的平均；允许 +∞（排在所有有限值之后）

    Raises:
        DomainError: 空输入或含NaN
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise DomainError("不能对空列表求中位数")
    if np.any(np.isnan(arr)):
        raise DomainError("中位数输入不能含NaN")
    ordered = np.sort(arr)
    mid = ordered.size // 2
    if ordered.size % 2 == 1:
        return float(ordered[mid])
    low, high = ordered[mid - 1], ordered[mid]
    if low == high:
        return float(low)
    return float((low + high) / 2.0)


def binomial_standard_error(frequency: float, count: int) -> float:
    """二项比例的标准误 √(f(1-f)/n)"""
    if count < 1:
        raise DomainError(f"样本数至少为1，当前为{count}")
    return math.sqrt(frequency * (1.0 - frequency) / count)


def _exact_upper_tail(ranks: np.ndarray, statistic: float) -> tuple[float, float]:
    """零假设下 W⁺ 的精确分布：返回 (P(W⁺ >= w), P(W⁺ <= w))

    平均秩乘2后为整数，逐个秩做生成函数卷积，等价于枚举全部 2^n 种符号。
    """
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:total + 1 - r]
        counts = counts + shifted
    counts /= 2.0 ** len(doubled)

    w = int(round(2.0 * statistic))
    upper = float(counts[w:].sum())
    lower = float(counts[:w + 1].sum())
    return min(upper, 1.0), min(lower, 1.0)


def _approx_tails(ranks: np.ndarray, statistic: float) -> tuple[float, float]:
    """带连续性校正与结校正的正态近似：返回 (P(W⁺ >= w), P(W⁺ <= w))"""
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var -= float(np.sum(tie_counts ** 3 - tie_counts)) / 48.0
    sd = math.sqrt(var)
    upper = float(sps.norm.sf((statistic - mean - 0.5) / sd))
    lower = float(sps.norm.cdf((statistic - mean + 0.5) / sd))
    return upper, lower


def wilcoxon_signed_rank(x: Sequence[float], y: Sequence[float], alpha: float = 0.05,
                         method: WilcoxonMethod = WilcoxonMethod.AUTO) -> WilcoxonResult:
    """配对样本的Wilcoxon符号秩检验

    差值 d = x - y，零差值丢弃，结取平均秩。非零配对数不超过20时使用精确
    分布，否则使用正态近似。

    Raises:
        DimensionError: x 与 y 长度不同或为空
        DomainError: alpha 不在 (0,1) 内
        InsufficientDataError: 全部差值为零
    """
    x_arr = np.asarray(x, dtype=np.float64)
    y_arr = np.asarray(y, dtype=np.float64)
    if x_arr.shape != y_arr.shape or x_arr.ndim != 1 or x_arr.size < 1:
        raise DimensionError(f"配对样本长度必须相同且非空：{x_arr.shape} vs {y_arr.shape}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"显著性水平必须在(0,1)内，当前为{alpha}")

    d = x_arr - y_arr
    d = d[d != 0]
    if d.size == 0:
        raise InsufficientDataError("全部差值为零，检验没有信息")

    ranks = sps.rankdata(np.abs(d))
    statistic = float(ranks[d > 0].sum())

    chosen = method
    if method is WilcoxonMethod.AUTO:
        chosen = WilcoxonMethod.EXACT if d.size <= EXACT_MAX_PAIRS else WilcoxonMethod.APPROX
    if chosen is WilcoxonMethod.EXACT:
        p_greater, p_less = _exact_upper_tail(ranks, statistic)
    else:
        p_greater, p_less = _approx_tails(ranks, statistic)

    p_two = min(1.0, 2.0 * min(p_greater, p_less))
    return WilcoxonResult(
        statistic=statistic,
        n_effective=int(d.size),
        p_two_sided=p_two,
        p_greater=p_greater,
        p_less=p_less,
        alpha=alpha,
        significant_at=p_two < alpha,
        method=chosen,
    )
