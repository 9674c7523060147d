"""
Design - 数据生成过程与设计矩阵模块

本模块负责生成模拟所用的设计矩阵（三角函数正交设计、独立高斯设计、
效应编码交互项扩展），以及按稀疏真模型 y = Xβ₀ + ε 生成响应。
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DimensionError, DomainError
from .random_stream import RngStream


class DesignKind(Enum):
    """设计矩阵来源"""
    TRIG = "trig"
    IID_GAUSSIAN = "gaussian"
    FILE = "file"
    INTERACTION_EXPANDED = "interaction"


@dataclass(frozen=True)
class Design:
    """n×p 确定性设计矩阵

    Attributes:
        values: n×p 实数矩阵（只读）
        kind: 设计来源
        column_labels: 列标签
    """
    values: np.ndarray
    kind: DesignKind
    column_labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise DimensionError(f"设计矩阵必须是非空二维矩阵，当前形状为{values.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("设计矩阵包含非有限值")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

        labels = list(self.column_labels) or [f"x{j + 1}" for j in range(values.shape[1])]
        if len(labels) != values.shape[1]:
            raise DimensionError(f"列标签数{len(labels)}与列数{values.shape[1]}不一致")
        object.__setattr__(self, "column_labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def select(self, columns: int | list[int]) -> "Design":
        """取前 columns 列（整数）或指定列（列表）组成的新设计"""
        if isinstance(columns, int):
            if not 1 <= columns <= self.p:
                raise DimensionError(f"列数必须在1到{self.p}之间，当前为{columns}")
            idx = list(range(columns))
        else:
            idx = list(columns)
        return Design(
            values=self.values[:, idx],
            kind=self.kind,
            column_labels=[self.column_labels[j] for j in idx],
        )

    def to_csv(self, path: str | Path) -> None:
        """导出为带表头的CSV（每行一个观测）"""
        frame = pd.DataFrame(self.values, columns=self.column_labels)
        frame.to_csv(path, index=False, float_format="%.17g")


@dataclass(frozen=True)
class GeneratingModel:
    """稀疏真模型

    Attributes:
        beta0: 列下标到非零系数的映射
        sigma2: 噪声方差 σ²（0表示无噪声）
    """
    beta0: dict[int, float]
    sigma2: float

    def __post_init__(self):
        if self.sigma2 < 0 or not math.isfinite(self.sigma2):
            raise DomainError(f"噪声方差必须非负且有限，当前为{self.sigma2}")
        for index, value in self.beta0.items():
            if index < 0:
                raise DimensionError(f"系数下标必须非负，当前为{index}")
            if value == 0:
                raise DomainError(f"稀疏系数表中不能存放零系数（下标{index}）")

    @classmethod
    def from_coefficients(cls, coefficients: list[float], sigma2: float) -> "GeneratingModel":
        """由前若干列的系数列表构建，自动略去零系数"""
        beta0 = {j: float(b) for j, b in enumerate(coefficients) if b != 0}
        return cls(beta0=beta0, sigma2=sigma2)

    @property
    def p0(self) -> int:
        return len(self.beta0)

    def dense(self, p: int) -> np.ndarray:
        """返回长度为 p 的稠密系数向量"""
        self._check_columns(p)
        beta = np.zeros(p)
        for index, value in self.beta0.items():
            beta[index] = value
        return beta

    def mean(self, design: Design) -> np.ndarray:
        """真均值 μ = Xβ₀"""
        return design.values @ self.dense(design.p)

    def _check_columns(self, p: int) -> None:
        bad = [j for j in self.beta0 if j >= p]
        if bad:
            raise DimensionError(f"系数下标{bad}超出设计矩阵列数{p}")


@dataclass(frozen=True)
class Realization:
    """一次响应实现

    Attributes:
        y: 响应向量
        mu: 真均值 Xβ₀
        seed: 主种子
        replicate_index: 重复编号
    """
    y: np.ndarray
    mu: np.ndarray
    seed: int
    replicate_index: int

    def to_csv(self, path: str | Path) -> None:
        frame = pd.DataFrame({"y": self.y, "mu": self.mu})
        frame.to_csv(path, index=False, float_format="%.17g")


def gen_trig_design(n: int, p: int, normalize: bool = False) -> Design:
    """生成三角函数设计矩阵

    x_{i,2j-1} = sin(2πj(i-1)/n)，x_{i,2j} = cos(2πj(i-1)/n)，j = 1..p/2。
    未标准化时各列平方范数为 n/2（p = n 时的 Nyquist 列对除外：正弦列恒为零，
    余弦列平方范数为 n）。normalize 时各非零列缩放为单位范数，使 XᵀX = I。

    Raises:
        DimensionError: p 为奇数、p > n 或 n < 2
    """
    if n < 2:
        raise DimensionError(f"三角设计要求 n >= 2，当前为{n}")
    if p < 2 or p % 2 != 0:
        raise DimensionError(f"三角设计要求 p 为不小于2的偶数，当前为{p}")
    if p > n:
        raise DimensionError(f"三角设计要求 p <= n，当前 p={p}, n={n}")

    i = np.arange(n, dtype=np.float64)
    j = np.arange(1, p // 2 + 1, dtype=np.float64)
    angle = 2.0 * np.pi * np.outer(i, j) / n

    values = np.empty((n, p))
    values[:, 0::2] = np.sin(angle)
    values[:, 1::2] = np.cos(angle)
    # sin(kπ) 的浮点残差清零，保证 Nyquist 正弦列精确为零
    values[np.abs(values) < 1e-12] = 0.0

    if normalize:
        norms = np.linalg.norm(values, axis=0)
        nonzero = norms > 0
        values[:, nonzero] /= norms[nonzero]

    labels = []
    for k in range(1, p // 2 + 1):
        labels.extend([f"sin{k}", f"cos{k}"])
    return Design(values=values, kind=DesignKind.TRIG, column_labels=labels)


def gen_gaussian_design(n: int, p: int, rng: RngStream) -> Design:
    """生成元素独立标准正态的设计矩阵（允许 p > n）"""
    if n < 1 or p < 1:
        raise DimensionError(f"n 和 p 必须为正，当前 n={n}, p={p}")
    values = rng.normals((n, p))
    return Design(values=values, kind=DesignKind.IID_GAUSSIAN)


def expand_interactions(base: Design, max_order: int) -> Design:
    """效应编码交互项扩展

    对 i = 1..k 取所有 i 个不同基础列的乘积，每列缩放为单位范数，
    共 Σ_{i=1}^k C(p,i) 列。列标签用冒号连接参与交互的基础列标签。

    Raises:
        DimensionError: k < 1 或 k > p
    """
    p = base.p
    if not 1 <= max_order <= p:
        raise DimensionError(f"交互阶数必须在1到{p}之间，当前为{max_order}")

    columns: list[np.ndarray] = []
    labels: list[str] = []
    for order in range(1, max_order + 1):
        for combo in combinations(range(p), order):
            product = np.prod(base.values[:, list(combo)], axis=1)
            norm = np.linalg.norm(product)
            # 全零乘积列无法缩放，保持为零
            columns.append(product / norm if norm > 0 else product)
            labels.append(":".join(base.column_labels[j] for j in combo))

    return Design(
        values=np.column_stack(columns),
        kind=DesignKind.INTERACTION_EXPANDED,
        column_labels=labels,
    )


def full_factorial(p: int) -> Design:
    """2^p 平衡全因子 ±1 效应编码设计"""
    if p < 1:
        raise DimensionError(f"因子数必须为正，当前为{p}")
    levels = np.array(np.meshgrid(*[[-1.0, 1.0]] * p, indexing="ij"))
    values = levels.reshape(p, -1).T
    return Design(values=values, kind=DesignKind.FILE,
                  column_labels=[f"f{j + 1}" for j in range(p)])


def gen_response(design: Design, model: GeneratingModel, rng: RngStream,
                 replicate: int) -> Realization:
    """生成一次响应 y = μ + ε

    ε 取自子流 rng.substream(replicate)，相同参数下结果完全一致，
    与其他重复的生成顺序无关。

    Raises:
        DimensionError: β₀ 下标超出设计矩阵列数
    """
    mu = model.mean(design)
    if model.sigma2 == 0:
        y = mu.copy()
    else:
        noise = rng.substream(replicate).normals(design.n)
        y = mu + math.sqrt(model.sigma2) * noise
    return Realization(y=y, mu=mu, seed=rng.master_seed, replicate_index=replicate)


def is_orthogonal(values: np.ndarray, rtol: float = 1e-9) -> bool:
    """判断各列是否两两正交（非对角元绝对值不超过 rtol·n）"""
    gram = values.T @ values
    off = gram - np.diag(np.diag(gram))
    return bool(np.max(np.abs(off), initial=0.0) <= rtol * values.shape[0])


def column_norms_squared(values: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->j", values, values)
