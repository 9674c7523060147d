"""
Dataset Analysis - 主效应Lasso与含两两交互Lasso的比较

对每次随机划分，在训练集上分别拟合只含主效应的Lasso（MEL）和含全部
两两交互项的Lasso（APL），在测试集上取各自路径上的最小MSE，
用Wilcoxon符号秩检验判断APL是否显著变差，并列出在所有划分中都被
选中的交互项。
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pandas as pd

from .dataset import Dataset, DatasetSplit, make_splits
from .design import Design, expand_interactions
from .errors import InsufficientDataError
from .path_solver import FitConfig, PathCriterion, TestSet, evaluate_path, fit_path
from .stats import WilcoxonResult, median, wilcoxon_signed_rank

logger = logging.getLogger(__name__)


@dataclass
class AnalysisConfig:
    """分析配置

    Attributes:
        splits: 随机划分次数 m
        fraction: 训练集比例
        seed: 划分种子
        alpha: 显著性水平
        standardize: 拟合前是否标准化各列
        lambda_count: λ 网格点数
        lambda_ratio: λ_min/λ_max
    """
    splits: int = 20
    fraction: float = 0.5
    seed: int = 1
    alpha: float = 0.05
    standardize: bool = True
    lambda_count: int = 100
    lambda_ratio: float = 1e-4

    def fit_config(self) -> FitConfig:
        return FitConfig(intercept=True, standardize=self.standardize,
                         lambda_count=self.lambda_count, lambda_ratio=self.lambda_ratio)


@dataclass(frozen=True)
class SplitOutcome:
    """单次划分的结果"""
    index: int
    train_size: int
    test_size: int
    mel_mse: float
    apl_mse: float
    ratio: float
    mel_lambda: float
    apl_lambda: float
    dropped_columns: tuple[str, ...]
    selected_interactions: tuple[str, ...]


@dataclass
class AnalysisReport:
    """分析报告

    Attributes:
        header: 报告头（数据来源、划分设置、标准化等）
        outcomes: 每次划分的结果
        wilcoxon: 检验结果，无法检验时为None
        wilcoxon_message: 无法检验的原因
        stable_interactions: 在所有划分中都被选中的交互项
    """
    header: dict
    outcomes: list[SplitOutcome]
    wilcoxon: Optional[WilcoxonResult] = None
    wilcoxon_message: str = ""
    stable_interactions: list[str] = field(default_factory=list)

    @property
    def median_ratio(self) -> float:
        return median([o.ratio for o in self.outcomes])

    @property
    def apl_significantly_worse(self) -> bool:
        """APL 的测试MSE显著高于 MEL（双侧检验显著且正秩和占优）"""
        if self.wilcoxon is None:
            return False
        w = self.wilcoxon
        return w.significant_at and w.statistic > w.n_effective * (w.n_effective + 1) / 4

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{
            "split": o.index,
            "train_size": o.train_size,
            "test_size": o.test_size,
            "mel_mse": o.mel_mse,
            "apl_mse": o.apl_mse,
            "ratio": o.ratio,
            "mel_lambda": o.mel_lambda,
            "apl_lambda": o.apl_lambda,
            "dropped_columns": ";".join(o.dropped_columns),
            "selected_interactions": ";".join(o.selected_interactions),
        } for o in self.outcomes])

    def format_text(self) -> str:
        lines = [f"# {key}: {value}" for key, value in self.header.items()]
        lines.append("split,mel_mse,apl_mse,ratio")
        lines.extend(f"{o.index},{o.mel_mse:.6g},{o.apl_mse:.6g},{o.ratio:.4f}"
                     for o in self.outcomes)
        lines.append(f"median_ratio: {self.median_ratio:.4f}")
        if self.wilcoxon is None:
            lines.append(f"wilcoxon: {self.wilcoxon_message}")
        else:
            w = self.wilcoxon
            lines.append(f"wilcoxon: W+={w.statistic:g}, n_effective={w.n_effective}, "
                         f"p_two_sided={w.p_two_sided:.6g}, p_greater={w.p_greater:.6g}, "
                         f"p_less={w.p_less:.6g}, method={w.method.value}")
            verdict = "APL显著变差" if self.apl_significantly_worse else (
                "APL显著变好" if w.significant_at else "无显著差异")
            lines.append(f"decision (alpha={w.alpha:g}): {verdict}")
        lines.append("stable_interactions: " + (", ".join(self.stable_interactions) or "(none)"))
        return "\n".join(lines) + "\n"


def _varying_columns(values: np.ndarray) -> np.ndarray:
    """训练集上非常数列的布尔掩码"""
    return np.ptp(values, axis=0) > 0


def _min_test_mse(design: Design, split: DatasetSplit, y: np.ndarray,
                  config: FitConfig) -> tuple[float, float, list[str], list[str]]:
    """在训练集上拟合路径，返回 (最小测试MSE, λ*, λ*处选中的列, 被丢弃的常数列)"""
    train_x = design.values[split.train]
    keep = _varying_columns(train_x)
    dropped = [label for label, k in zip(design.column_labels, keep) if not k]
    labels = [label for label, k in zip(design.column_labels, keep) if k]
    if not labels:
        mse = float(np.mean((y[split.test] - y[split.train].mean()) ** 2))
        return mse, 0.0, [], dropped

    path = fit_path(train_x[:, keep], y[split.train], config)
    test = TestSet(values=design.values[split.test][:, keep], y=y[split.test])
    evaluation = evaluate_path(path, train_x[:, keep], test, PathCriterion.TEST_MSE)
    selected = [labels[j] for j in path.active_sets[evaluation.index]]
    return evaluation.min_value, evaluation.lambda_star, selected, dropped


def build_designs(dataset: Dataset) -> tuple[Design, Design]:
    """构造 (MEL, APL) 设计

    两者的列都缩放为单位范数，MEL 恰好是 APL 的前 p 列。
    """
    base = dataset.design()
    mel = expand_interactions(base, 1)
    apl = expand_interactions(base, 2) if base.p >= 2 else mel
    return mel, apl


def analyze_dataset(dataset: Dataset, config: AnalysisConfig,
                    progress_callback: Optional[Callable[[int, int, str], None]] = None
                    ) -> AnalysisReport:
    """MEL/APL 比较

    Args:
        dataset: 数据集
        config: 分析配置
        progress_callback: 进度回调函数，参数为(当前划分, 总数, 说明)

    Returns:
        AnalysisReport: 每次划分的MSE与比值、检验结果和稳定交互项
    """
    mel, apl = build_designs(dataset)
    fit = config.fit_config()
    splits = make_splits(dataset.n, config.splits, config.fraction, config.seed)

    outcomes = []
    for split_index, split in enumerate(splits):
        if progress_callback:
            progress_callback(split_index, len(splits), f"split {split_index + 1}")
        mel_mse, mel_lambda, _, mel_dropped = _min_test_mse(mel, split, dataset.y, fit)
        apl_mse, apl_lambda, apl_selected, apl_dropped = _min_test_mse(apl, split, dataset.y, fit)
        ratio = apl_mse / mel_mse if mel_mse > 0 else float("inf")
        dropped = tuple(dict.fromkeys(mel_dropped + apl_dropped))
        outcomes.append(SplitOutcome(
            index=split_index + 1, train_size=split.train.size, test_size=split.test.size,
            mel_mse=mel_mse, apl_mse=apl_mse, ratio=ratio,
            mel_lambda=mel_lambda, apl_lambda=apl_lambda, dropped_columns=dropped,
            selected_interactions=tuple(label for label in apl_selected if ":" in label),
        ))
        logger.info("第%d次划分：MEL MSE=%.6g，APL MSE=%.6g，比值=%.4f",
                    split_index + 1, mel_mse, apl_mse, ratio)

    header = {
        "source": dataset.source or "(memory)",
        "response": dataset.response,
        "n": dataset.n,
        "p_main": mel.p,
        "p_apl": apl.p,
        "splits": config.splits,
        "fraction": config.fraction,
        "seed": config.seed,
        "alpha": config.alpha,
        "standardize": config.standardize,
    }
    report = AnalysisReport(header=header, outcomes=outcomes)

    common = set(outcomes[0].selected_interactions)
    for outcome in outcomes[1:]:
        common &= set(outcome.selected_interactions)
    report.stable_interactions = [label for label in apl.column_labels if label in common]

    if len(outcomes) < 2:
        report.wilcoxon_message = "只有1次划分，至少需要2次划分才能进行Wilcoxon检验"
    else:
        try:
            report.wilcoxon = wilcoxon_signed_rank([o.apl_mse for o in outcomes],
                                                   [o.mel_mse for o in outcomes], config.alpha)
        except InsufficientDataError as e:
            report.wilcoxon_message = str(e)
    if report.wilcoxon_message:
        logger.warning("Wilcoxon检验未进行：%s", report.wilcoxon_message)
    return report


def write_report(report: AnalysisReport, out_path: str | Path) -> None:
    """按划分写出CSV（表头信息写为注释行）"""
    path = Path(out_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        for key, value in report.header.items():
            f.write(f"# {key}: {value}\n")
        report.to_frame().to_csv(f, index=False, float_format="%.10g")
