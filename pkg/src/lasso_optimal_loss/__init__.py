"""
Lasso Optimal Loss - 最优调参Lasso的损失恶化分析

正交设计下最优损失的精确理论、恶化概率公式、一般设计的Lasso路径求解、
两个oracle不等式上界、可复现的蒙特卡洛实验框架以及数据集上的
主效应/交互项Lasso比较。
"""

__version__ = "1.0.0"
__author__ = "Lasso Optimal Loss Team"

from .core.design import Design, DesignKind, GeneratingModel, gen_trig_design, gen_response
from .core.ortho_lasso import OrthoInstance, OrthoOptimum, soft_threshold, optimal_multi
from .core.theory import DeteriorationQuery, prob_deterioration, table1
from .core.path_solver import FitConfig, RegularizationPath, fit_path, evaluate_path
from .core.oracle_bounds import BoundKind, bound_ratio_curve
from .core.stats import wilcoxon_signed_rank
from .core.experiments import ExperimentConfig, ExperimentResult, run_experiment
from .core.config_manager import ConfigManager

__all__ = [
    # Design
    "Design",
    "DesignKind",
    "GeneratingModel",
    "gen_trig_design",
    "gen_response",
    # Ortho Lasso
    "OrthoInstance",
    "OrthoOptimum",
    "soft_threshold",
    "optimal_multi",
    # Theory
    "DeteriorationQuery",
    "prob_deterioration",
    "table1",
    # Path Solver
    "FitConfig",
    "RegularizationPath",
    "fit_path",
    "evaluate_path",
    # Oracle Bounds
    "BoundKind",
    "bound_ratio_curve",
    # Stats
    "wilcoxon_signed_rank",
    # Experiments
    "ExperimentConfig",
    "ExperimentResult",
    "run_experiment",
    # Config Manager
    "ConfigManager",
]
