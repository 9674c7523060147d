"""
Experiments - 蒙特卡洛实验框架

本模块负责按配置运行各类最优损失比实验：固定 n 改变 p（正交/高斯设计）、
n 与 p 同时增长、Lasso+OLS 两阶段比较、测试集MSE比以及恶化概率定理的
蒙特卡洛检验。每个重复使用独立的随机子流，结果与线程数无关。
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pandas as pd

from .design import (Design, DesignKind, GeneratingModel, column_norms_squared,
                     gen_gaussian_design, gen_response, gen_trig_design, is_orthogonal)
from .errors import ConfigError, DomainError
from .oracle_bounds import BoundKind, bound_at
from .ortho_lasso import OrthoInstance, exact_lasso_minimum, exact_refit_minimum
from .path_solver import FitConfig, PathCriterion, TestSet, evaluate_path, fit_path
from .random_stream import RngStream
from .stats import median
from .theory import (DeteriorationQuery, McOutcome, mc_prob_deterioration,
                     prob_deterioration, prob_deterioration_given_sign)

logger = logging.getLogger(__name__)

# 随机流编号：不同用途的随机数互不干扰
STREAM_DESIGN = 1
STREAM_RESPONSE = 2
STREAM_TEST_DESIGN = 3
STREAM_TEST_NOISE = 4

ProgressCallback = Callable[[int, int, str], None]


class ExperimentKind(Enum):
    ORTHO_RATIO_VS_P = "OrthoRatioVsP"
    BOUND_CONSERVATISM = "BoundConservatism"
    GROWING_N = "GrowingN"
    GAUSSIAN_RATIO_VS_P = "GaussianRatioVsP"
    LASSO_PLUS_OLS = "LassoPlusOls"
    MSE_RATIO = "MseRatio"
    MC_THEOREM_CHECK = "McTheoremCheck"


class SolverChoice(Enum):
    AUTO = "auto"
    PATH = "path"


@dataclass
class ExperimentConfig:
    """实验配置

    Attributes:
        kind: 实验类型
        design: 设计类型（trig 或 gaussian）
        normalize: 三角设计是否标准化为单位范数列
        n: 样本量（McTheoremCheck 中 n = 0 表示直接抽取 z）
        n_grid: GrowingN 的样本量序列
        p_grid: 预测变量个数序列
        p0: 真预测变量个数
        beta0: 前 p0 列的真系数
        sigma2_list: 噪声方差列表
        replicates: 重复次数
        master_seed: 主种子
        fit: 路径求解配置
        solver: auto 时正交设计自动使用精确解
        test_set_size: 高斯设计 MseRatio 的测试集大小（None 表示等于 n；三角设计恒用训练设计）
        p1_rule: GrowingN 的基准 p 规则（"2log" 或整数）
        p2_rule: GrowingN 的比较 p 规则（"n" 或整数）
        beta1: McTheoremCheck 的非零系数
        sigma: McTheoremCheck 的噪声标准差
        coverage: 上界叠加使用的覆盖概率
    """
    kind: ExperimentKind = ExperimentKind.ORTHO_RATIO_VS_P
    design: DesignKind = DesignKind.TRIG
    normalize: bool = False
    n: int = 100
    n_grid: list[int] = field(default_factory=list)
    p_grid: list[int] = field(default_factory=lambda: [6, 10, 20, 50, 100])
    p0: int = 6
    beta0: list[float] = field(default_factory=lambda: [6.0, 5.0, 4.0, 3.0, 2.0, 1.0])
    sigma2_list: list[float] = field(default_factory=lambda: [4.0, 400.0])
    replicates: int = 1000
    master_seed: int = 20140501
    fit: FitConfig = field(default_factory=lambda: FitConfig(intercept=False, standardize=False))
    solver: SolverChoice = SolverChoice.AUTO
    test_set_size: Optional[int] = None
    p1_rule: str = "2log"
    p2_rule: str = "n"
    beta1: float = 3.0
    sigma: float = 1.0
    coverage: float = 0.95

    def validate(self) -> None:
        """在任何计算之前检查配置

        Raises:
            ConfigError: 配置违反设计约束
        """
        if self.replicates < 1:
            raise ConfigError(f"replicates 至少为1，当前为{self.replicates}")
        if self.design not in (DesignKind.TRIG, DesignKind.IID_GAUSSIAN):
            raise ConfigError(f"实验只支持 trig 或 gaussian 设计，当前为{self.design.value}")
        if not 0.0 < self.coverage < 1.0:
            raise ConfigError(f"coverage 必须在(0,1)内，当前为{self.coverage}")
        self.fit.validate()
        if self.kind is ExperimentKind.MC_THEOREM_CHECK:
            self._validate_mc()
            return

        if self.p0 < 1 or len(self.beta0) != self.p0 or any(b == 0 for b in self.beta0):
            raise ConfigError(f"beta0 必须恰好包含 p0={self.p0} 个非零系数，当前为{self.beta0}")
        if not self.sigma2_list or any(not s > 0 for s in self.sigma2_list):
            raise ConfigError(f"sigma2_list 必须非空且全部为正，当前为{self.sigma2_list}")
        if self.kind is ExperimentKind.MSE_RATIO and self.test_set_size is not None \
                and self.test_set_size < 1:
            raise ConfigError(f"test_set_size 必须为正，当前为{self.test_set_size}")

        for n in self.sample_sizes():
            if n < 2:
                raise ConfigError(f"样本量 n 至少为2，当前为{n}")
            baseline, p_values = self.p_settings(n)
            if baseline < self.p0:
                raise ConfigError(f"n={n} 时基准 p={baseline} 小于 p0={self.p0}（检查 p1_rule）")
            for p in p_values:
                if p < baseline:
                    raise ConfigError(f"p={p} 小于基准 p={baseline}")
                if self.design is DesignKind.TRIG and p > n:
                    raise ConfigError(f"三角设计要求 p <= n，当前 p={p}, n={n}")
                # p = n 时最后一个正弦列恒为零，无法标准化
                if self.design is DesignKind.TRIG and p == n and self.fit.standardize:
                    raise ConfigError(f"三角设计 p = n = {n} 时含全零列，不能与 standardize=true 同时使用")

    def _validate_mc(self) -> None:
        if self.beta1 == 0 or not self.sigma > 0:
            raise ConfigError(f"需要 beta1 ≠ 0 且 sigma > 0，当前 beta1={self.beta1}, sigma={self.sigma}")
        if not self.p_grid:
            raise ConfigError("p_grid 不能为空")
        for p in self.p_grid:
            if p < 2:
                raise ConfigError(f"定理要求 p >= 2，当前为{p}")
            if self.n > 0:
                if self.design is not DesignKind.TRIG:
                    raise ConfigError("定理检验只支持三角设计或直接抽取 z（n=0）")
                if p % 2 != 0 or p >= self.n:
                    raise ConfigError(f"三角设计定理检验要求 p 为偶数且 p < n，当前 p={p}, n={self.n}")

    def sample_sizes(self) -> list[int]:
        if self.kind is ExperimentKind.GROWING_N:
            if not self.n_grid:
                raise ConfigError("GrowingN 需要非空的 n_grid")
            return list(self.n_grid)
        return [self.n]

    def p_settings(self, n: int) -> tuple[int, list[int]]:
        """返回 (基准 p, 比较 p 列表)，三角设计中的奇数 p 向上取偶"""
        if self.kind is ExperimentKind.GROWING_N:
            p_values = [_apply_rule(self.p1_rule, n), _apply_rule(self.p2_rule, n)]
        else:
            p_values = list(self.p_grid)
        if not p_values:
            raise ConfigError("p_grid 不能为空")
        if self.design is DesignKind.TRIG:
            p_values = [p + (p % 2) for p in p_values]
        if self.kind is ExperimentKind.GROWING_N:
            return p_values[0], p_values
        return self.p0, sorted(set(p_values))


def _apply_rule(rule: str, n: int) -> int:
    text = str(rule).strip()
    if text == "2log":
        return int(round(2.0 * math.log(n)))
    if text == "n":
        return n
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"无效的 p 规则: {rule!r}") from None


@dataclass(frozen=True)
class ReplicateRecord:
    """单次重复、单个 p 的记录（比值可由两个损失重新算出）"""
    n: int
    p: int
    p_baseline: int
    sigma2: float
    replicate: int
    loss_p: float
    loss_baseline: float
    ratio: float
    lambda_star: float
    lambda_max: float
    at_lambda_max: bool
    refit_loss_p: float = math.nan
    refit_loss_baseline: float = math.nan
    refit_ratio: float = math.nan


@dataclass(frozen=True)
class McRecord:
    """定理检验的单次重复记录"""
    n: int
    p: int
    replicate: int
    sign_match: bool
    deteriorated: bool
    n_loss_p: float
    n_loss_single: float


@dataclass(frozen=True)
class BoundOverlay:
    """叠加到汇总表上的上界设置"""
    coverage: float = 0.95
    kinds: tuple[BoundKind, ...] = (BoundKind.COMPAT, BoundKind.RE)
    psi0: float = 1.0
    kappa: float = 1.0
    fixed_A: Optional[float] = None


@dataclass
class ExperimentResult:
    """实验结果

    Attributes:
        kind: 实验类型
        rows: 每个 (设置, 重复) 一行
        summary: 每个设置一行的汇总
        metadata: 配置回显与求解器设置
    """
    kind: ExperimentKind
    rows: pd.DataFrame
    summary: pd.DataFrame
    metadata: dict


@dataclass(frozen=True)
class _Optimum:
    loss: float
    lambda_star: float
    lambda_max: float
    refit_loss: float = math.nan


def loss_ratio(loss_p: float, loss_baseline: float) -> float:
    """最优损失比：0/0 记为1，x/0 记为无穷"""
    if loss_baseline == 0:
        return 1.0 if loss_p == 0 else math.inf
    return loss_p / loss_baseline


def _closed_form_ready(values: np.ndarray, config: FitConfig) -> bool:
    """精确解适用条件：非零列两两正交，带截距时各列均值为零"""
    scale = float(np.max(np.abs(values), initial=1.0))
    if config.intercept and np.any(np.abs(values.mean(axis=0)) > 1e-9 * scale):
        return False
    norms2 = column_norms_squared(values)
    nonzero = norms2 > 1e-12 * values.shape[0] * scale * scale
    if config.standardize and not np.all(nonzero):
        return False
    return is_orthogonal(values[:, nonzero])


def _closed_form_optimum(values: np.ndarray, y: np.ndarray, mu: np.ndarray,
                         config: FitConfig, refit: bool) -> _Optimum:
    """正交设计下的精确最优损失 L(λ*) = ||μ - ŷ||²/n"""
    n = values.shape[0]
    norms2 = column_norms_squared(values)
    scale = float(np.max(np.abs(values), initial=1.0))
    keep = norms2 > 1e-12 * n * scale * scale
    x = values[:, keep]
    root = np.sqrt(norms2[keep])

    extra = 0.0
    mu_c = mu
    if config.intercept:
        extra = n * (float(y.mean()) - float(mu.mean())) ** 2
        mu_c = mu - mu.mean()
    z = (x.T @ y) / root
    theta = (x.T @ mu_c) / root
    weights = np.ones_like(root) if config.standardize else 1.0 / root
    outside = max(float(mu_c @ mu_c) - float(theta @ theta), 0.0)

    lam_max = float(np.max(np.abs(z) / weights, initial=0.0))
    if z.size == 0:
        return _Optimum(loss=(outside + extra) / n, lambda_star=0.0, lambda_max=0.0,
                        refit_loss=(outside + extra) / n if refit else math.nan)
    lam, n_loss = exact_lasso_minimum(theta, z, weights)
    refit_loss = math.nan
    if refit:
        _, refit_n_loss = exact_refit_minimum(theta, z, weights)
        refit_loss = (refit_n_loss + outside + extra) / n
    return _Optimum(loss=(n_loss + outside + extra) / n, lambda_star=lam,
                    lambda_max=lam_max, refit_loss=refit_loss)


def _path_optimum(values: np.ndarray, y: np.ndarray, target, criterion: PathCriterion,
                  config: FitConfig, refit: bool) -> _Optimum:
    path = fit_path(values, y, config)
    shrunk = evaluate_path(path, values, target, criterion)
    refit_loss = math.nan
    if refit:
        refit_loss = evaluate_path(path, values, target, criterion, refit=True, y=y,
                                   intercept=config.intercept).min_value
    return _Optimum(loss=shrunk.min_value, lambda_star=shrunk.lambda_star,
                    lambda_max=float(path.lambdas[0]), refit_loss=refit_loss)


@dataclass(frozen=True)
class _Setting:
    """某个样本量下共享的设计与测试集"""
    n: int
    design: Design
    baseline: int
    p_values: list[int]
    closed_form: dict[int, bool]
    test_values: Optional[np.ndarray] = None


class ExperimentRunner:
    """实验运行器

    负责构建各样本量下的设计矩阵，把 (n, σ², 重复) 作为独立工作单元
    分发到线程池，并按固定顺序收集结果。
    """

    def __init__(self, config: ExperimentConfig):
        config.validate()
        self.config = config
        self.refit = config.kind is ExperimentKind.LASSO_PLUS_OLS
        self.criterion = (PathCriterion.TEST_MSE if config.kind is ExperimentKind.MSE_RATIO
                          else PathCriterion.L2_LOSS_VS_MU)
        self.settings = [self._build_setting(n) for n in config.sample_sizes()]

    def _build_setting(self, n: int) -> _Setting:
        config = self.config
        baseline, p_values = config.p_settings(n)
        p_max = max(p_values)
        if config.design is DesignKind.TRIG:
            design = gen_trig_design(n, p_max, normalize=config.normalize)
        else:
            design = gen_gaussian_design(n, p_max, RngStream(config.master_seed, STREAM_DESIGN, (n,)))

        closed_form = {}
        for p in set(p_values) | {baseline}:
            closed_form[p] = (config.solver is SolverChoice.AUTO
                              and self.criterion is PathCriterion.L2_LOSS_VS_MU
                              and _closed_form_ready(design.values[:, :p], config.fit))

        test_values = None
        if self.criterion is PathCriterion.TEST_MSE:
            if config.design is DesignKind.TRIG:
                test_values = design.values
            else:
                size = config.test_set_size or n
                test_values = gen_gaussian_design(
                    size, p_max, RngStream(config.master_seed, STREAM_TEST_DESIGN, (n,))).values
        return _Setting(n=n, design=design, baseline=baseline, p_values=p_values,
                        closed_form=closed_form, test_values=test_values)

    def work_items(self) -> list[tuple[int, float, int]]:
        return [(index, sigma2, r)
                for index in range(len(self.settings))
                for sigma2 in self.config.sigma2_list
                for r in range(self.config.replicates)]

    def _optimum(self, setting: _Setting, p: int, y: np.ndarray, mu: np.ndarray,
                 test: Optional[TestSet]) -> _Optimum:
        values = setting.design.values[:, :p]
        if setting.closed_form[p]:
            return _closed_form_optimum(values, y, mu, self.config.fit, self.refit)
        target = mu if test is None else TestSet(values=test.values[:, :p], y=test.y)
        return _path_optimum(values, y, target, self.criterion, self.config.fit, self.refit)

    def run_item(self, item: tuple[int, float, int]) -> list[ReplicateRecord]:
        """运行一个工作单元：同一个 y 在所有 p 与基准上拟合"""
        index, sigma2, r = item
        setting = self.settings[index]
        config = self.config
        model = GeneratingModel.from_coefficients(config.beta0, sigma2)
        response_rng = RngStream(config.master_seed, STREAM_RESPONSE, (setting.n,))
        realization = gen_response(setting.design, model, response_rng, r)

        test = None
        if setting.test_values is not None:
            mu_test = setting.test_values @ model.dense(setting.test_values.shape[1])
            noise_rng = RngStream(config.master_seed, STREAM_TEST_NOISE, (setting.n,)).substream(r)
            noise = noise_rng.normals(mu_test.size)
            test = TestSet(values=setting.test_values, y=mu_test + math.sqrt(sigma2) * noise)

        base = self._optimum(setting, setting.baseline, realization.y, realization.mu, test)
        records = []
        for p in setting.p_values:
            if p == setting.baseline:
                opt = base
            else:
                opt = self._optimum(setting, p, realization.y, realization.mu, test)
            at_max = opt.lambda_max == 0 or opt.lambda_star >= opt.lambda_max * (1 - 1e-12)
            records.append(ReplicateRecord(
                n=setting.n, p=p, p_baseline=setting.baseline, sigma2=sigma2, replicate=r,
                loss_p=opt.loss, loss_baseline=base.loss, ratio=loss_ratio(opt.loss, base.loss),
                lambda_star=opt.lambda_star, lambda_max=opt.lambda_max, at_lambda_max=at_max,
                refit_loss_p=opt.refit_loss, refit_loss_baseline=base.refit_loss,
                refit_ratio=(loss_ratio(opt.refit_loss, base.refit_loss)
                             if self.refit else math.nan),
            ))
        return records

    def run(self, threads: int = 1,
            progress_callback: Optional[ProgressCallback] = None) -> list[ReplicateRecord]:
        items = self.work_items()
        total = len(items)
        records: list[ReplicateRecord] = []
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            for done, item_records in enumerate(pool.map(self.run_item, items), start=1):
                records.extend(item_records)
                if progress_callback:
                    n = self.settings[items[done - 1][0]].n
                    progress_callback(done, total, f"n={n} σ²={items[done - 1][1]:g}")
        return records


def _trig_draw(n: int):
    """按标准化三角设计 y = β₁x₁ + σε 抽取 z = Xᵀy 的抽样函数"""
    designs: dict[int, Design] = {}

    def draw(q: DeteriorationQuery, rng: RngStream, replicate: int) -> OrthoInstance:
        if q.p not in designs:
            designs[q.p] = gen_trig_design(n, q.p, normalize=True)
        design = designs[q.p]
        noise = rng.substream(replicate).normals(n)
        y = q.beta1 * design.values[:, 0] + q.sigma * noise
        return OrthoInstance(beta1=q.beta1, z=design.values.T @ y, n=n, sigma2=q.sigma ** 2)
    return draw


def _run_mc(config: ExperimentConfig,
            progress_callback: Optional[ProgressCallback]) -> tuple[pd.DataFrame, pd.DataFrame]:
    records: list[McRecord] = []
    summary_rows = []
    rng = RngStream(config.master_seed, STREAM_RESPONSE)
    p_values = sorted(set(config.p_grid))
    for done, p in enumerate(p_values, start=1):
        q = DeteriorationQuery(beta1=config.beta1, sigma=config.sigma, p=p)
        outcomes: list[McOutcome] = []
        draw = _trig_draw(config.n) if config.n > 0 else None
        estimate = mc_prob_deterioration(q, config.replicates, rng.substream(p), draw, outcomes)
        records.extend(McRecord(n=config.n, p=p, replicate=o.replicate, sign_match=o.sign_match,
                                deteriorated=o.deteriorated, n_loss_p=o.n_loss_p,
                                n_loss_single=o.n_loss_single) for o in outcomes)
        summary_rows.append({
            "p": p,
            "replicates": estimate.replicates,
            "frequency": estimate.frequency,
            "standard_error": estimate.standard_error,
            "theory": prob_deterioration(q),
            "sign_matches": estimate.sign_matches,
            "conditional_frequency": estimate.conditional_frequency,
            "conditional_standard_error": estimate.conditional_standard_error,
            "theory_given_sign": prob_deterioration_given_sign(q),
        })
        if progress_callback:
            progress_callback(done, len(p_values), f"p={p}")
    rows = pd.DataFrame([asdict(r) for r in records], columns=list(McRecord.__dataclass_fields__))
    return rows, pd.DataFrame(summary_rows)


def _metadata(config: ExperimentConfig) -> dict:
    meta = {
        "kind": config.kind.value,
        "design": config.design.value,
        "normalize": config.normalize,
        "replicates": config.replicates,
        "master_seed": config.master_seed,
        "sigma2_list": list(config.sigma2_list),
        "solver": config.solver.value,
        "fit": {k: v for k, v in asdict(config.fit).items() if k != "warm_start"},
    }
    if config.kind is ExperimentKind.MC_THEOREM_CHECK:
        meta.update(n=config.n, p_grid=sorted(set(config.p_grid)),
                    beta1=config.beta1, sigma=config.sigma)
        return meta

    meta.update(p0=config.p0, beta0=list(config.beta0), coverage=config.coverage)
    settings = []
    for n in config.sample_sizes():
        baseline, p_values = config.p_settings(n)
        settings.append({"n": n, "p_baseline": baseline, "p_values": p_values})
    meta["settings"] = settings
    if config.design is DesignKind.TRIG:
        requested = ([_apply_rule(config.p1_rule, n) for n in config.sample_sizes()]
                     + [_apply_rule(config.p2_rule, n) for n in config.sample_sizes()]
                     if config.kind is ExperimentKind.GROWING_N else list(config.p_grid))
        meta["rounded_up_to_even"] = sorted({p for p in requested if p % 2})
    if config.kind is ExperimentKind.MSE_RATIO:
        # 三角设计的测试集复用训练设计的行
        meta["test_set_size"] = (config.n if config.design is DesignKind.TRIG
                                 else config.test_set_size or config.n)
    return meta


def run_experiment(config: ExperimentConfig, threads: int = 1,
                   progress_callback: Optional[ProgressCallback] = None) -> ExperimentResult:
    """运行实验

    Args:
        config: 实验配置（先整体校验，违反约束时不做任何计算）
        threads: 工作线程数，不影响结果
        progress_callback: 进度回调函数，参数为(已完成数, 总数, 当前设置)

    Returns:
        ExperimentResult: 逐重复记录、汇总表和元数据

    Raises:
        ConfigError: 配置不合法
    """
    config.validate()
    logger.info("开始实验 %s：重复%d次，σ²=%s", config.kind.value, config.replicates,
                config.sigma2_list)

    if config.kind is ExperimentKind.MC_THEOREM_CHECK:
        rows, summary = _run_mc(config, progress_callback)
        result = ExperimentResult(kind=config.kind, rows=rows, summary=summary,
                                  metadata=_metadata(config))
        logger.info("实验完成：%d 行记录", len(rows))
        return result

    runner = ExperimentRunner(config)
    records = runner.run(threads, progress_callback)
    rows = pd.DataFrame([asdict(r) for r in records],
                        columns=list(ReplicateRecord.__dataclass_fields__))
    if config.kind is not ExperimentKind.LASSO_PLUS_OLS:
        rows = rows.drop(columns=["refit_loss_p", "refit_loss_baseline", "refit_ratio"])

    metadata = _metadata(config)
    metadata["closed_form_p"] = sorted(
        {p for s in runner.settings for p, used in s.closed_form.items() if used})
    result = ExperimentResult(kind=config.kind, rows=rows, summary=pd.DataFrame(),
                              metadata=metadata)
    overlay = (BoundOverlay(coverage=config.coverage)
               if config.kind is ExperimentKind.BOUND_CONSERVATISM else None)
    result.summary = summarize(result, overlay)
    logger.info("实验完成：%d 行记录，%d 个设置", len(rows), len(result.summary))
    return result


def _mean(values: pd.Series) -> float:
    return float(np.mean(values.to_numpy(dtype=np.float64)))


def summarize(result: ExperimentResult, overlay: Optional[BoundOverlay] = None) -> pd.DataFrame:
    """按 (n, p, σ²) 汇总为可直接绘图的表

    有上界叠加时追加各上界的取值、上界隐含比值、保守度（上界/中位损失）
    以及上界在各重复中的实际覆盖率。

    Raises:
        DomainError: 结果为空
    """
    if result.rows.empty:
        raise DomainError("实验结果为空，无法汇总")
    if result.kind is ExperimentKind.MC_THEOREM_CHECK:
        return result.summary

    refit = "refit_loss_p" in result.rows.columns
    p0 = int(result.metadata.get("p0", 1))
    out = []
    for (n, p, sigma2), group in result.rows.groupby(["n", "p", "sigma2"], sort=True):
        baseline = int(group["p_baseline"].iloc[0])
        median_loss = median(group["loss_p"].tolist())
        row = {
            "n": int(n), "p": int(p), "p_baseline": baseline, "sigma2": float(sigma2),
            "replicates": len(group),
            "median_ratio": median(group["ratio"].tolist()),
            "mean_ratio": _mean(group["ratio"]),
            "median_loss": median_loss,
            "mean_loss": _mean(group["loss_p"]),
            "median_loss_baseline": median(group["loss_baseline"].tolist()),
            "frac_at_lambda_max": _mean(group["at_lambda_max"].astype(float)),
        }
        if refit:
            row["median_refit_loss"] = median(group["refit_loss_p"].tolist())
            row["median_refit_ratio"] = median(group["refit_ratio"].tolist())
            row["mean_refit_ratio"] = _mean(group["refit_ratio"])
        if overlay is not None:
            for kind in overlay.kinds:
                bound = bound_at(kind, int(n), int(p), p0, float(sigma2), overlay.coverage,
                                 overlay.psi0, overlay.kappa, overlay.fixed_A)
                reference = bound_at(kind, int(n), baseline, p0, float(sigma2), overlay.coverage,
                                     overlay.psi0, overlay.kappa, overlay.fixed_A)
                name = kind.value
                row[f"bound_{name}"] = bound
                row[f"bound_ratio_{name}"] = bound / reference
                row[f"conservatism_{name}"] = bound / median_loss if median_loss > 0 else math.inf
                row[f"coverage_{name}"] = _mean((group["loss_p"] <= bound).astype(float))
        out.append(row)
    return pd.DataFrame(out)


def write_outputs(result: ExperimentResult, out_dir: str | Path) -> list[Path]:
    """写出 rows.csv、summary.csv 与 metadata.json

    Returns:
        list[Path]: 写出的文件
    """
    path = Path(out_dir)
    _ensure_output_dir(path)
    rows_path = path / "rows.csv"
    summary_path = path / "summary.csv"
    meta_path = path / "metadata.json"
    result.rows.to_csv(rows_path, index=False, float_format="%.17g")
    result.summary.to_csv(summary_path, index=False, float_format="%.17g")
    meta_path.write_text(json.dumps(result.metadata, indent=2, sort_keys=True, ensure_ascii=False)
                         + "\n", encoding="utf-8")
    return [rows_path, summary_path, meta_path]


def _ensure_output_dir(path: Path) -> None:
    if not path.exists():
        path.mkdir(parents=True, exist_ok=True)
