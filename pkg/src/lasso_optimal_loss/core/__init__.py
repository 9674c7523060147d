"""
Core module - 核心计算模块

包含设计矩阵与数据生成、正交设计精确解、恶化概率理论、Lasso路径求解、
oracle上界、统计检验、蒙特卡洛实验、配置管理与数据集分析。
"""

from .errors import (LassoLossError, DimensionError, DomainError, ConfigError, DataParseError,
                     ZeroVarianceColumnError, NonConvergenceError, InsufficientDataError)
from .random_stream import RngStream, parse_seed
from .design import (Design, DesignKind, GeneratingModel, Realization, gen_trig_design,
                     gen_gaussian_design, expand_interactions, full_factorial, gen_response)
from .ortho_lasso import (CaseTag, OrthoInstance, OrthoOptimum, soft_threshold, loss_curve,
                          optimal_single, optimal_multi, oracle_grid_min,
                          exact_lasso_minimum, exact_refit_minimum, classify_case)
from .theory import (DeteriorationQuery, McEstimate, prob_deterioration,
                     prob_deterioration_given_sign, anova_predictor_count, table1,
                     mc_prob_deterioration)
from .path_solver import (FitConfig, RegularizationPath, PathCriterion, PathEvaluation,
                          TestSet, RefitResult, lambda_max, fit_path, refit_ols,
                          evaluate_path, kkt_violation)
from .oracle_bounds import (BoundKind, BoundParams, bound_compat, bound_re, solve_t, solve_A,
                            coverage_compat, coverage_re, bound_ratio_curve)
from .stats import WilcoxonResult, normal_cdf, median, wilcoxon_signed_rank
from .experiments import (ExperimentKind, ExperimentConfig, ExperimentResult, BoundOverlay,
                          run_experiment, summarize, write_outputs)
from .config_manager import ConfigManager
from .dataset import Dataset, DatasetSplit, load_dataset, make_split
from .dataset_analysis import AnalysisConfig, AnalysisReport, analyze_dataset

__all__ = [
    "LassoLossError", "DimensionError", "DomainError", "ConfigError", "DataParseError",
    "ZeroVarianceColumnError", "NonConvergenceError", "InsufficientDataError",
    "RngStream", "parse_seed",
    "Design", "DesignKind", "GeneratingModel", "Realization", "gen_trig_design",
    "gen_gaussian_design", "expand_interactions", "full_factorial", "gen_response",
    "CaseTag", "OrthoInstance", "OrthoOptimum", "soft_threshold", "loss_curve",
    "optimal_single", "optimal_multi", "oracle_grid_min", "exact_lasso_minimum",
    "exact_refit_minimum", "classify_case",
    "DeteriorationQuery", "McEstimate", "prob_deterioration", "prob_deterioration_given_sign",
    "anova_predictor_count", "table1", "mc_prob_deterioration",
    "FitConfig", "RegularizationPath", "PathCriterion", "PathEvaluation", "TestSet",
    "RefitResult", "lambda_max", "fit_path", "refit_ols", "evaluate_path", "kkt_violation",
    "BoundKind", "BoundParams", "bound_compat", "bound_re", "solve_t", "solve_A",
    "coverage_compat", "coverage_re", "bound_ratio_curve",
    "WilcoxonResult", "normal_cdf", "median", "wilcoxon_signed_rank",
    "ExperimentKind", "ExperimentConfig", "ExperimentResult", "BoundOverlay",
    "run_experiment", "summarize", "write_outputs",
    "ConfigManager",
    "Dataset", "DatasetSplit", "load_dataset", "make_split",
    "AnalysisConfig", "AnalysisReport", "analyze_dataset",
]
