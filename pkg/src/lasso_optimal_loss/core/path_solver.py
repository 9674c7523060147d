"""
Path Solver - 一般设计矩阵的Lasso正则化路径求解器

目标函数 ½||y - β₀ - Xβ||² + λΣ|β_j|，截距不惩罚。
采用带热启动和活跃集策略的循环坐标下降，λ 网格从 λ_max 对数等距递减。
支持在Lasso选出的支撑集上做OLS重拟合（Lasso+OLS），以及沿路径的损失/测试MSE评估。
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from .design import Design
from .errors import ConfigError, DimensionError, NonConvergenceError, ZeroVarianceColumnError

logger = logging.getLogger(__name__)


@dataclass
class FitConfig:
    """路径拟合配置

    Attributes:
        intercept: 是否拟合不惩罚的截距
        standardize: 是否先把各列缩放为单位范数（系数仍按原尺度报告）
        lambda_count: 对数网格点数 K
        lambda_ratio: λ_min/λ_max
        lambdas: 显式 λ 列表（严格递减），给出时忽略 K 与 ratio
        tol: 坐标下降收敛阈值（系数最大变化量）
        max_sweeps: 每个 λ 的扫描次数上限
        warm_start: 是否用上一个 λ 的解作为初值
    """
    intercept: bool = True
    standardize: bool = True
    lambda_count: int = 100
    lambda_ratio: float = 1e-4
    lambdas: Optional[list[float]] = None
    tol: float = 1e-8
    max_sweeps: int = 100_000
    warm_start: bool = True

    def validate(self) -> None:
        """校验配置

        Raises:
            ConfigError: 网格或收敛参数不合法
        """
        if self.lambdas is not None:
            lams = np.asarray(self.lambdas, dtype=np.float64)
            if lams.ndim != 1 or lams.size < 1:
                raise ConfigError("显式 λ 列表不能为空")
            if np.any(lams < 0) or not np.all(np.isfinite(lams)):
                raise ConfigError("λ 必须为非负有限数")
            if np.any(np.diff(lams) >= 0):
                raise ConfigError("显式 λ 列表必须严格递减")
        else:
            if self.lambda_count < 2:
                raise ConfigError(f"λ 网格点数至少为2，当前为{self.lambda_count}")
            if not 0.0 < self.lambda_ratio < 1.0:
                raise ConfigError(f"λ_min/λ_max 必须在(0,1)内，当前为{self.lambda_ratio}")
        if not self.tol > 0:
            raise ConfigError(f"收敛阈值必须为正，当前为{self.tol}")
        if self.max_sweeps < 1:
            raise ConfigError(f"扫描次数上限必须为正，当前为{self.max_sweeps}")


@dataclass(frozen=True)
class RegularizationPath:
    """正则化路径（构造后不可变）

    Attributes:
        lambdas: 严格递减的 λ 序列
        coefs: 形状 (K, p) 的原尺度系数
        intercepts: 各 λ 的截距
        active_sets: 各 λ 的非零系数下标
    """
    lambdas: np.ndarray
    coefs: np.ndarray
    intercepts: np.ndarray
    active_sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for name in ("lambdas", "coefs", "intercepts"):
            getattr(self, name).setflags(write=False)

    @property
    def p(self) -> int:
        return self.coefs.shape[1]

    def __len__(self) -> int:
        return self.lambdas.size

    def predict(self, values: np.ndarray) -> np.ndarray:
        """每个 λ 的拟合值，形状 (K, n)"""
        return self.coefs @ np.asarray(values, dtype=np.float64).T + self.intercepts[:, None]

    def to_csv(self, path: str | Path, labels: Optional[list[str]] = None) -> None:
        """按 (lambda, term, value) 长表导出，每个 λ 先写截距行"""
        labels = labels or [f"x{j + 1}" for j in range(self.p)]
        records = []
        for k, lam in enumerate(self.lambdas):
            records.append((lam, "(intercept)", self.intercepts[k]))
            records.extend((lam, labels[j], self.coefs[k, j]) for j in range(self.p))
        frame = pd.DataFrame(records, columns=["lambda", "term", "value"])
        frame.to_csv(path, index=False, float_format="%.17g")


class PathCriterion(Enum):
    L2_LOSS_VS_MU = "L2LossVsMu"
    TEST_MSE = "TestMSE"


@dataclass(frozen=True)
class TestSet:
    """独立测试集"""
    values: np.ndarray
    y: np.ndarray

    __test__ = False


@dataclass(frozen=True)
class RefitResult:
    """支撑集上的OLS重拟合结果

    Attributes:
        coef: 长度 p 的系数（支撑集外为0）
        intercept: 截距
        degenerate: 支撑集列秩亏时为True（此时返回最小范数解）
        rank: 支撑集（中心化后）的数值秩
    """
    coef: np.ndarray
    intercept: float
    degenerate: bool
    rank: int


@dataclass(frozen=True)
class PathEvaluation:
    """沿路径评估准则的结果

    Attributes:
        lambda_star: 准则最小处的 λ（并列取最小 λ）
        min_value: 最小准则值
        criterion: 评估准则
        index: λ_star 在路径中的位置
        values: 每个 λ 的准则值
        refit: 是否经过OLS重拟合
    """
    lambda_star: float
    min_value: float
    criterion: PathCriterion
    index: int
    values: np.ndarray = field(repr=False)
    refit: bool = False


@dataclass(frozen=True)
class _Workspace:
    """中心化/标准化后的工作量"""
    x: np.ndarray
    y: np.ndarray
    x_mean: np.ndarray
    y_mean: float
    scale: np.ndarray
    norms2: np.ndarray


def _prepare(design: Design | np.ndarray, y: np.ndarray, config: FitConfig) -> _Workspace:
    values = design.values if isinstance(design, Design) else np.asarray(design, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if values.ndim != 2 or y.shape != (values.shape[0],):
        raise DimensionError(f"响应长度{y.shape}与设计矩阵形状{values.shape}不一致")

    if config.intercept:
        x_mean = values.mean(axis=0)
        y_mean = float(y.mean())
    else:
        x_mean = np.zeros(values.shape[1])
        y_mean = 0.0
    x = values - x_mean
    yc = y - y_mean

    norms = np.linalg.norm(x, axis=0)
    # 相对阈值判定零方差列，容忍中心化带来的舍入误差
    degenerate = norms <= 1e-12 * max(1.0, float(np.max(np.abs(values), initial=0.0))) * np.sqrt(x.shape[0])
    if config.standardize:
        if np.any(degenerate):
            column = int(np.flatnonzero(degenerate)[0])
            labels = design.column_labels if isinstance(design, Design) else None
            raise ZeroVarianceColumnError(column, labels[column] if labels else None)
        scale = norms
        x = x / scale
    else:
        scale = np.ones(x.shape[1])
        x[:, degenerate] = 0.0
    norms2 = np.einsum("ij,ij->j", x, x)
    return _Workspace(x=x, y=yc, x_mean=x_mean, y_mean=y_mean, scale=scale, norms2=norms2)


def lambda_max(design: Design | np.ndarray, y: np.ndarray, config: FitConfig) -> float:
    """使全部惩罚系数为零的最小 λ：max_j |x_jᵀ(y - ȳ)|（按配置先中心化/标准化）

    Raises:
        ZeroVarianceColumnError: 开启标准化时存在零方差列
    """
    work = _prepare(design, y, config)
    return float(np.max(np.abs(work.x.T @ work.y), initial=0.0))


def _objective(work: _Workspace, b: np.ndarray, residual: np.ndarray, lam: float) -> float:
    return 0.5 * float(residual @ residual) + lam * float(np.sum(np.abs(b)))


def _sweep(work: _Workspace, b: np.ndarray, residual: np.ndarray, lam: float,
           columns: np.ndarray) -> float:
    """对给定列做一轮坐标更新，原地修改 b 与残差，返回最大系数变化量"""
    max_change = 0.0
    x, norms2 = work.x, work.norms2
    for j in columns:
        c = norms2[j]
        old = b[j]
        rho = float(x[:, j] @ residual) + c * old
        new = np.sign(rho) * max(abs(rho) - lam, 0.0) / c
        if new != old:
            residual -= (new - old) * x[:, j]
            b[j] = new
            max_change = max(max_change, abs(new - old))
    return max_change


def coordinate_descent(work: _Workspace, lam: float, b: np.ndarray, tol: float,
                       max_sweeps: int, trace: Optional[list[float]] = None) -> tuple[np.ndarray, int]:
    """固定 λ 下的循环坐标下降（活跃集策略）

    先全量扫描确定活跃集，再只在活跃集上迭代至收敛，
    然后全量扫描检查活跃集是否稳定。trace 不为空时记录每轮扫描后的目标函数值。

    Returns:
        (系数, 扫描次数)

    Raises:
        NonConvergenceError: 扫描次数达到上限仍未收敛
    """
    b = b.copy()
    residual = work.y - work.x @ b
    usable = np.flatnonzero(work.norms2 > 0)
    sweeps = 0
    max_change = np.inf

    while sweeps < max_sweeps:
        max_change = _sweep(work, b, residual, lam, usable)
        sweeps += 1
        if trace is not None:
            trace.append(_objective(work, b, residual, lam))
        if max_change < tol:
            return b, sweeps

        active = usable[b[usable] != 0]
        while sweeps < max_sweeps:
            inner_change = _sweep(work, b, residual, lam, active)
            sweeps += 1
            if trace is not None:
                trace.append(_objective(work, b, residual, lam))
            if inner_change < tol:
                break

    raise NonConvergenceError(lam, sweeps, float(max_change))


def _lambda_grid(lam_max: float, config: FitConfig) -> np.ndarray:
    if config.lambdas is not None:
        return np.asarray(config.lambdas, dtype=np.float64)
    if lam_max == 0:
        return np.array([0.0])
    exponents = np.arange(config.lambda_count) / (config.lambda_count - 1)
    grid = lam_max * config.lambda_ratio ** exponents
    grid[0] = lam_max
    return grid


def fit_path(design: Design | np.ndarray, y: np.ndarray, config: Optional[FitConfig] = None,
             trace: Optional[dict[int, list[float]]] = None) -> RegularizationPath:
    """沿 λ 网格拟合Lasso路径

    Args:
        design: 设计矩阵
        y: 响应
        config: 拟合配置，None 时使用默认配置
        trace: 不为空时按 λ 下标记录每轮扫描后的目标函数值

    Returns:
        RegularizationPath: 原尺度系数，截距为 ȳ - x̄ᵀβ̂

    Raises:
        ConfigError: 配置不合法
        ZeroVarianceColumnError: 开启标准化时存在零方差列
        NonConvergenceError: 坐标下降未收敛
    """
    config = config or FitConfig()
    config.validate()
    work = _prepare(design, y, config)
    if work.x.shape[0] < 2:
        raise DimensionError(f"拟合路径至少需要2个观测，当前为{work.x.shape[0]}")

    lam_max = float(np.max(np.abs(work.x.T @ work.y), initial=0.0))
    lambdas = _lambda_grid(lam_max, config)
    p = work.x.shape[1]

    coefs = np.zeros((lambdas.size, p))
    b = np.zeros(p)
    total_sweeps = 0
    for k, lam in enumerate(lambdas):
        lam_trace = [] if trace is not None else None
        if k == 0 and config.lambdas is None:
            # 网格起点就是 λ_max，全部惩罚系数精确为零
            b, sweeps = np.zeros(p), 0
        else:
            start = b if config.warm_start else np.zeros(p)
            b, sweeps = coordinate_descent(work, float(lam), start, config.tol,
                                           config.max_sweeps, lam_trace)
        if trace is not None:
            trace[k] = lam_trace
        total_sweeps += sweeps
        coefs[k] = b / work.scale

    intercepts = work.y_mean - coefs @ work.x_mean
    active_sets = tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in coefs)
    logger.debug("路径拟合完成: n=%d, p=%d, K=%d, λ_max=%.6g, 总扫描次数=%d",
                 work.x.shape[0], p, lambdas.size, lam_max, total_sweeps)
    return RegularizationPath(lambdas=lambdas, coefs=coefs, intercepts=intercepts,
                              active_sets=active_sets)


def kkt_violation(design: Design | np.ndarray, y: np.ndarray, path: RegularizationPath,
                  config: Optional[FitConfig] = None) -> np.ndarray:
    """每个 λ 下次梯度最优性条件的最大违背量（在工作尺度上）

    非活跃列：(|x_jᵀr| - λ)₊；活跃列：|x_jᵀr - λ·sgn(β_j)|。
    """
    config = config or FitConfig()
    work = _prepare(design, y, config)
    violations = np.empty(len(path))
    usable = work.norms2 > 0
    for k, lam in enumerate(path.lambdas):
        b = path.coefs[k] * work.scale
        residual = work.y - work.x @ b
        grad = work.x.T @ residual
        active = (b != 0) & usable
        inactive = ~active & usable
        v_inactive = np.maximum(np.abs(grad[inactive]) - lam, 0.0)
        v_active = np.abs(grad[active] - lam * np.sign(b[active]))
        violations[k] = max(np.max(v_inactive, initial=0.0), np.max(v_active, initial=0.0))
    return violations


def refit_ols(design: Design | np.ndarray, y: np.ndarray, support, intercept: bool = True) -> RefitResult:
    """在支撑集列上做最小二乘（SVD秩显示求解），支撑集外系数为0

    秩亏时返回最小范数解并置 degenerate 标志。
    """
    values = design.values if isinstance(design, Design) else np.asarray(design, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (values.shape[0],):
        raise DimensionError(f"响应长度{y.shape}与设计矩阵行数{values.shape[0]}不一致")
    support = sorted(int(j) for j in support)
    if any(not 0 <= j < values.shape[1] for j in support):
        raise DimensionError(f"支撑集下标超出范围: {support}")

    coef = np.zeros(values.shape[1])
    y_mean = float(y.mean()) if intercept else 0.0
    if not support:
        return RefitResult(coef=coef, intercept=y_mean, degenerate=False, rank=0)

    xs = values[:, support]
    x_mean = xs.mean(axis=0) if intercept else np.zeros(len(support))
    solution, _, rank, _ = np.linalg.lstsq(xs - x_mean, y - y_mean, rcond=None)
    coef[support] = solution
    return RefitResult(coef=coef, intercept=y_mean - float(x_mean @ solution),
                       degenerate=bool(rank < len(support)), rank=int(rank))


def evaluate_path(path: RegularizationPath, design: Design | np.ndarray, target,
                  criterion: PathCriterion, refit: bool = False,
                  y: Optional[np.ndarray] = None, intercept: bool = True) -> PathEvaluation:
    """沿路径逐个 λ 求准则值并取最小（并列取最小 λ）

    Args:
        path: 正则化路径
        design: 训练设计矩阵（重拟合与 L2LossVsMu 使用）
        target: L2LossVsMu 时为真均值 μ；TestMSE 时为 TestSet
        criterion: 评估准则
        refit: 是否在每个 λ 的活跃集上做OLS重拟合（Lasso+OLS）
        y: 训练响应，refit 时必需
        intercept: 重拟合是否带截距
    """
    values = design.values if isinstance(design, Design) else np.asarray(design, dtype=np.float64)
    if values.shape[1] != path.p:
        raise DimensionError(f"设计矩阵列数{values.shape[1]}与路径系数维数{path.p}不一致")
    if refit and y is None:
        raise DimensionError("重拟合需要提供训练响应 y")

    if criterion is PathCriterion.L2_LOSS_VS_MU:
        eval_x = values
        reference = np.asarray(target, dtype=np.float64)
    else:
        eval_x = np.asarray(target.values, dtype=np.float64)
        reference = np.asarray(target.y, dtype=np.float64)
    if reference.shape != (eval_x.shape[0],) or eval_x.shape[1] != path.p:
        raise DimensionError("评估目标与设计矩阵维数不一致")

    if refit:
        cache: dict[tuple[int, ...], RefitResult] = {}
        coefs = np.empty_like(path.coefs)
        intercepts = np.empty(len(path))
        for k, support in enumerate(path.active_sets):
            if support not in cache:
                cache[support] = refit_ols(values, y, support, intercept)
            coefs[k] = cache[support].coef
            intercepts[k] = cache[support].intercept
    else:
        coefs, intercepts = path.coefs, path.intercepts

    fitted = coefs @ eval_x.T + intercepts[:, None]
    scores = np.mean((reference - fitted) ** 2, axis=1)
    index = int(np.flatnonzero(scores == scores.min())[-1])
    return PathEvaluation(lambda_star=float(path.lambdas[index]), min_value=float(scores[index]),
                          criterion=criterion, index=index, values=scores, refit=refit)
