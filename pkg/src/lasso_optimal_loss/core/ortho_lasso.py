"""
Ortho Lasso - 正交设计下Lasso的精确解

XᵀX = I 时Lasso系数为软阈值 sgn(z_j)(|z_j| - λ)₊，损失曲线 nL_p(λ) 关于 λ
分段二次。本模块给出损失曲线、精确全局最优 λ*、引理分支判定以及网格暴力
求解（作为测试基准）。所有损失均以 nL 的形式存储，需要 L 时由调用方除以 n。
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DimensionError, DomainError

# 候选点分块求值，避免 p 很大时一次性分配 (2p+1)×p 矩阵
_CHUNK = 256


class CaseTag(Enum):
    """引理分支标记"""
    SIGN_MISMATCH = "SignMismatch"
    NO_DETERIORATION = "NoDeterioration"
    DETERIORATION = "Deterioration"


@dataclass(frozen=True)
class OrthoInstance:
    """正交设计下的单非零系数实例

    Attributes:
        beta1: 唯一的非零真系数 β₁
        z: 最小二乘系数 z = Xᵀy（长度 p）
        n: 样本量
        sigma2: 噪声方差 σ²
    """
    beta1: float
    z: np.ndarray
    n: int = 1
    sigma2: float = 1.0

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.z, dtype=np.float64))
        if z.ndim != 1 or z.size < 1:
            raise DimensionError("z 必须是非空一维向量")
        if self.beta1 == 0:
            raise DomainError("β₁ 不能为零")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @property
    def p(self) -> int:
        return self.z.size

    @property
    def theta(self) -> np.ndarray:
        """真系数向量 (β₁, 0, ..., 0)"""
        theta = np.zeros(self.p)
        theta[0] = self.beta1
        return theta


@dataclass(frozen=True)
class OrthoOptimum:
    """最优调参结果

    Attributes:
        lambda_star: λ*_p
        n_loss: nL_p(λ*_p)
        deteriorated: nL_p(λ*_p) > nL_1(λ*_1)
        case_tag: 引理分支
    """
    lambda_star: float
    n_loss: float
    deteriorated: bool
    case_tag: CaseTag


def soft_threshold(z_j, lam: float):
    """软阈值 sgn(z)(|z| - λ)₊，标量输入返回 float，数组输入逐元素计算

    Raises:
        DomainError: λ < 0
    """
    if lam < 0:
        raise DomainError(f"λ 必须非负，当前为{lam}")
    result = np.sign(z_j) * np.maximum(np.abs(z_j) - lam, 0.0)
    return float(result) if np.ndim(result) == 0 else result


def _weights(z: np.ndarray, weights: Optional[np.ndarray]) -> np.ndarray:
    if weights is None:
        return np.ones_like(z)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != z.shape:
        raise DimensionError(f"权重长度{w.shape}与 z 长度{z.shape}不一致")
    if np.any(w <= 0):
        raise DomainError("权重必须为正")
    return w


def lasso_loss(theta: np.ndarray, z: np.ndarray, lambdas,
               weights: Optional[np.ndarray] = None) -> np.ndarray:
    """Σ_j (θ_j - sgn(z_j)(|z_j| - λw_j)₊)²，对 lambdas 逐点求值"""
    theta = np.asarray(theta, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    w = _weights(z, weights)
    lams = np.atleast_1d(np.asarray(lambdas, dtype=np.float64))
    a, s = np.abs(z), np.sign(z)

    out = np.empty(lams.size)
    for start in range(0, lams.size, _CHUNK):
        block = lams[start:start + _CHUNK, None]
        fitted = s * np.maximum(a - block * w, 0.0)
        out[start:start + _CHUNK] = np.sum((theta - fitted) ** 2, axis=1)
    return out


def loss_curve(inst: OrthoInstance, lam: float) -> float:
    """nL_p(λ) = (β₁ - β̂_{λ1})² + Σ_{j≥2} β̂²_{λj}"""
    if lam < 0:
        raise DomainError(f"λ 必须非负，当前为{lam}")
    return float(lasso_loss(inst.theta, inst.z, lam)[0])


def exact_lasso_minimum(theta, z, weights: Optional[np.ndarray] = None
                        ) -> tuple[float, float]:
    """分段二次损失曲线的精确全局最小

    按 |z_j|/w_j 降序排列后，相邻节点之间活跃集固定，损失为 λ 的二次函数，
    驻点 λ = Σ_A w_j(|z_j| - θ_j s_j) / Σ_A w_j²。候选集为 0、全部节点以及
    截断到所在区间的驻点；在候选集上求值取最小，并列时取最小的 λ。

    Returns:
        (λ*, 最小损失)
    """
    theta = np.asarray(theta, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if z.size == 0:
        raise DimensionError("z 不能为空")
    w = _weights(z, weights)
    a, s = np.abs(z), np.sign(z)

    knots = a / w
    order = np.argsort(-knots, kind="stable")
    sorted_knots = knots[order]
    lower = np.append(sorted_knots[1:], 0.0)

    numerator = np.cumsum((w * (a - theta * s))[order])
    denominator = np.cumsum((w * w)[order])
    stationary = np.clip(numerator / denominator, lower, sorted_knots)

    candidates = np.unique(np.concatenate(([0.0], sorted_knots, stationary)))
    losses = lasso_loss(theta, z, candidates, w)
    best = int(np.argmin(losses))
    return float(candidates[best]), float(losses[best])


def exact_refit_minimum(theta, z, weights: Optional[np.ndarray] = None
                        ) -> tuple[float, float]:
    """Lasso+OLS（在Lasso选出的支撑集上做最小二乘）沿路径的精确最小损失

    正交设计下支撑集上的OLS系数就是 z_j，支撑集为按 |z_j|/w_j 排序的前k个。
    只考虑路径上真实出现的支撑集（节点严格分开且节点为正）。

    Returns:
        (λ*, 最小损失)，λ* 为实现该支撑集的最小 λ
    """
    theta = np.asarray(theta, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if z.size == 0:
        raise DimensionError("z 不能为空")
    w = _weights(z, weights)
    knots = np.abs(z) / w
    order = np.argsort(-knots, kind="stable")
    sorted_knots = knots[order]

    base = float(np.sum(theta ** 2))
    gains = ((theta - z) ** 2 - theta ** 2)[order]
    losses = base + np.concatenate(([0.0], np.cumsum(gains)))
    lams = np.append(sorted_knots, 0.0)

    p = z.size
    valid = np.zeros(p + 1, dtype=bool)
    valid[0] = True
    for k in range(1, p + 1):
        valid[k] = sorted_knots[k - 1] > 0 and (k == p or sorted_knots[k - 1] > sorted_knots[k])

    best_k = 0
    for k in range(p + 1):
        if valid[k] and losses[k] <= losses[best_k]:
            best_k = k
    return float(lams[best_k]), float(losses[best_k])


def classify_case(beta1: float, z: np.ndarray) -> CaseTag:
    """按符号与间隔条件判定引理分支

    符号不符时无恶化；符号相符时，|β₁| <= |z₁| - max_{j≥2}|z_j| 则无恶化（取等号时两者损失均为0），否则恶化。
    """
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    if beta1 == 0:
        raise DomainError("β₁ 不能为零")
    if np.sign(z[0]) != np.sign(beta1):
        return CaseTag.SIGN_MISMATCH
    if z.size == 1:
        return CaseTag.NO_DETERIORATION
    gap = abs(z[0]) - float(np.max(np.abs(z[1:])))
    if abs(beta1) <= gap:
        return CaseTag.NO_DETERIORATION
    return CaseTag.DETERIORATION


def optimal_single(beta1: float, z1: float) -> OrthoOptimum:
    """只用真预测变量时的最优损失 nL_1(λ*_1)

    Raises:
        DomainError: β₁ = 0
    """
    if beta1 == 0:
        raise DomainError("β₁ 不能为零")
    if np.sign(z1) != np.sign(beta1):
        return OrthoOptimum(lambda_star=abs(z1), n_loss=beta1 ** 2,
                            deteriorated=False, case_tag=CaseTag.SIGN_MISMATCH)
    if abs(beta1) <= abs(z1):
        return OrthoOptimum(lambda_star=abs(z1) - abs(beta1), n_loss=0.0,
                            deteriorated=False, case_tag=CaseTag.NO_DETERIORATION)
    return OrthoOptimum(lambda_star=0.0, n_loss=(beta1 - z1) ** 2,
                        deteriorated=False, case_tag=CaseTag.NO_DETERIORATION)


def optimal_multi(inst: OrthoInstance) -> OrthoOptimum:
    """p 个预测变量时的精确全局最优 λ*_p 与 nL_p(λ*_p)"""
    lam, loss = exact_lasso_minimum(inst.theta, inst.z)
    tag = classify_case(inst.beta1, inst.z)
    return OrthoOptimum(lambda_star=lam, n_loss=loss,
                        deteriorated=tag is CaseTag.DETERIORATION, case_tag=tag)


def oracle_grid_min(inst: OrthoInstance, grid_points: int) -> tuple[float, float]:
    """在 [0, max|z_j|] 的均匀网格上暴力求最小损失

    Raises:
        DomainError: grid_points < 2
    """
    if grid_points < 2:
        raise DomainError(f"网格点数至少为2，当前为{grid_points}")
    grid = np.linspace(0.0, float(np.max(np.abs(inst.z))), grid_points)
    losses = lasso_loss(inst.theta, inst.z, grid)
    best = int(np.argmin(losses))
    return float(grid[best]), float(losses[best])
