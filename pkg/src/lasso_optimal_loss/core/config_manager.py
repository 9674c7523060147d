"""
Config Manager - 实验配置管理模块

本模块负责解析和保存 key=value 格式的实验配置文件，并提供复现各图表
数据所需的内置预设配置。

配置文件格式：
    # 注释行与空行被忽略
    kind=OrthoRatioVsP
    p_grid=6,10,20,50,100
    sigma2_list=4,400
    master_seed=0x2014
"""

import logging
import re
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Optional

from .design import DesignKind
from .errors import ConfigError, DomainError
from .experiments import ExperimentConfig, ExperimentKind, SolverChoice
from .random_stream import parse_seed

logger = logging.getLogger(__name__)

_TRUE = {"true", "yes", "1"}
_FALSE = {"false", "no", "0"}


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise ValueError(f"无效的布尔值: {text!r}（可用 true/false/yes/no/1/0）")


def _parse_int_list(text: str) -> list[int]:
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise ValueError("列表不能为空")
    return [int(item) for item in items]


def _parse_float_list(text: str) -> list[float]:
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise ValueError("列表不能为空")
    return [float(item) for item in items]


def _parse_optional_int(text: str) -> Optional[int]:
    value = text.strip().lower()
    return None if value in ("", "none") else int(value)


def _parse_kind(text: str) -> ExperimentKind:
    for kind in ExperimentKind:
        if kind.value.lower() == text.strip().lower():
            return kind
    names = ", ".join(k.value for k in ExperimentKind)
    raise ValueError(f"未知的实验类型 {text!r}（可选: {names}）")


def _parse_design(text: str) -> DesignKind:
    value = text.strip().lower()
    if value not in (DesignKind.TRIG.value, DesignKind.IID_GAUSSIAN.value):
        raise ValueError(f"未知的设计类型 {text!r}（可选: trig, gaussian）")
    return DesignKind(value)


def _parse_seed(text: str) -> int:
    try:
        return parse_seed(text)
    except DomainError as e:
        raise ValueError(str(e)) from None


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(_format_value(v) for v in value)
    if hasattr(value, "value"):
        return str(value.value)
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# 配置键 -> (所属对象, 字段名, 解析函数)，顺序即保存顺序
_SCHEMA: dict[str, tuple[str, str, Callable[[str], Any]]] = {
    "kind": ("experiment", "kind", _parse_kind),
    "design": ("experiment", "design", _parse_design),
    "normalize": ("experiment", "normalize", _parse_bool),
    "n": ("experiment", "n", int),
    "n_grid": ("experiment", "n_grid", _parse_int_list),
    "p_grid": ("experiment", "p_grid", _parse_int_list),
    "p0": ("experiment", "p0", int),
    "beta0": ("experiment", "beta0", _parse_float_list),
    "sigma2_list": ("experiment", "sigma2_list", _parse_float_list),
    "replicates": ("experiment", "replicates", int),
    "master_seed": ("experiment", "master_seed", _parse_seed),
    "intercept": ("fit", "intercept", _parse_bool),
    "standardize": ("fit", "standardize", _parse_bool),
    "lambda_count": ("fit", "lambda_count", int),
    "lambda_ratio": ("fit", "lambda_ratio", float),
    "tol": ("fit", "tol", float),
    "max_sweeps": ("fit", "max_sweeps", int),
    "solver": ("experiment", "solver", lambda text: SolverChoice(text.strip().lower())),
    "test_set_size": ("experiment", "test_set_size", _parse_optional_int),
    "p1_rule": ("experiment", "p1_rule", str.strip),
    "p2_rule": ("experiment", "p2_rule", str.strip),
    "beta1": ("experiment", "beta1", float),
    "sigma": ("experiment", "sigma", float),
    "coverage": ("experiment", "coverage", float),
}


class ConfigManager:
    """实验配置管理器

    负责以下功能：
    - 解析 key=value 配置文本（错误带行号）
    - 从文件加载、保存配置（保存时键顺序固定）
    - 列出和获取内置预设
    """

    _ORTHO_P_GRID = [6, 8, 10, 14, 20, 30, 40, 50, 60, 70, 80, 90, 100]
    _GAUSSIAN_P_GRID = [6, 10, 20, 50, 100, 200, 500, 1000]
    # 概率表中出现的全部预测变量个数
    _TABLE1_P_GRID = [2, 3, 4, 6, 8, 10, 14, 15, 21, 36, 41, 55, 56, 92, 162, 175, 385]

    # 正交设计（三角函数）图表：原始列、无截距
    FIG1_CONFIG = {
        "kind": "OrthoRatioVsP", "design": "trig", "normalize": False, "n": 100,
        "p_grid": _ORTHO_P_GRID, "p0": 6, "beta0": [6, 5, 4, 3, 2, 1],
        "sigma2_list": [4, 400], "replicates": 1000, "master_seed": 20140501,
        "intercept": False, "standardize": False,
    }

    PRESETS: dict[str, dict[str, Any]] = {
        "fig1": FIG1_CONFIG,
        "fig2": {**FIG1_CONFIG, "kind": "BoundConservatism"},
        "fig3": {**FIG1_CONFIG, "kind": "GrowingN", "n_grid": [50, 100, 200, 400, 600, 800, 1000],
                 "p1_rule": "2log", "p2_rule": "n"},
        "fig4": {**FIG1_CONFIG, "kind": "GaussianRatioVsP", "design": "gaussian",
                 "p_grid": _GAUSSIAN_P_GRID, "sigma2_list": [9, 625],
                 "intercept": True, "standardize": True},
        "fig5": {**FIG1_CONFIG, "kind": "LassoPlusOls"},
        "appendixB": {**FIG1_CONFIG, "kind": "MseRatio", "design": "gaussian",
                      "p_grid": [6, 100, 500, 1000], "sigma2_list": [9, 625],
                      "intercept": True, "standardize": True, "test_set_size": 100},
        "table1": {"kind": "McTheoremCheck", "n": 0, "p_grid": _TABLE1_P_GRID,
                   "beta1": 3.0, "sigma": 1.0, "replicates": 10000, "master_seed": 20140501},
        "mc-check": {"kind": "McTheoremCheck", "design": "trig", "n": 100, "p_grid": [2, 10, 50],
                     "beta1": 3.0, "sigma": 1.0, "replicates": 10000, "master_seed": 20140501},
    }

    def parse_text(self, text: str) -> ExperimentConfig:
        """解析配置文本

        Args:
            text: key=value 格式的配置文本

        Returns:
            ExperimentConfig: 已校验的实验配置

        Raises:
            ConfigError: 格式错误、未知键、重复键、取值无效或配置不合法（带行号）
        """
        values: dict[str, str] = {}
        lines: dict[str, int] = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"缺少 '=': {raw.strip()!r}", line=number)
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _SCHEMA:
                raise ConfigError(f"未知的配置键 {key!r}", line=number)
            if key in values:
                raise ConfigError(f"配置键 {key!r} 重复（首次出现在第{lines[key]}行）", line=number)
            values[key] = value
            lines[key] = number
        return self._build(values, lines)

    def from_mapping(self, mapping: dict[str, Any]) -> ExperimentConfig:
        """由键值映射构建配置（值可以是文本或已解析的 Python 值）"""
        values = {key: _format_value(value) for key, value in mapping.items()}
        unknown = [key for key in values if key not in _SCHEMA]
        if unknown:
            raise ConfigError(f"未知的配置键 {unknown}")
        return self._build(values, {})

    def _build(self, values: dict[str, str], lines: dict[str, int]) -> ExperimentConfig:
        experiment: dict[str, Any] = {}
        fit: dict[str, Any] = {}
        for key, text in values.items():
            target, name, parser = _SCHEMA[key]
            try:
                parsed = parser(text)
            except ValueError as e:
                raise ConfigError(f"配置键 {key!r} 的取值无效: {e}", line=lines.get(key)) from None
            (fit if target == "fit" else experiment)[name] = parsed

        config = ExperimentConfig(**experiment)
        config.fit = replace(config.fit, **fit)
        try:
            config.validate()
        except ConfigError as e:
            if e.line is not None:
                raise
            raise ConfigError(e.message, line=self._blame(e.message, lines)) from None
        return config

    @staticmethod
    def _blame(message: str, lines: dict[str, int]) -> Optional[int]:
        """把校验错误归到最可能相关的配置行"""
        for key, number in sorted(lines.items(), key=lambda item: item[1]):
            if re.search(rf"(?<![A-Za-z0-9_]){re.escape(key)}(?![A-Za-z0-9_])", message):
                return number
        return max(lines.values()) if lines else None

    def load(self, path: str | Path) -> ExperimentConfig:
        """加载配置文件

        Raises:
            FileNotFoundError: 如果文件不存在
            ConfigError: 如果内容无效
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"配置文件不存在: {path}")
        logger.debug("加载配置 %s", path)
        return self.parse_text(path.read_text(encoding="utf-8"))

    def to_text(self, config: ExperimentConfig) -> str:
        """按固定键顺序序列化配置"""
        lines = [f"# {config.kind.value}"]
        for key, (target, name, _) in _SCHEMA.items():
            source = config.fit if target == "fit" else config
            value = getattr(source, name)
            if key == "n_grid" and not value:
                continue
            lines.append(f"{key}={_format_value(value)}")
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path, config: ExperimentConfig) -> None:
        """保存配置文件（内容确定，重复保存字节一致）"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text(config), encoding="utf-8")

    def list_presets(self) -> list[str]:
        return sorted(self.PRESETS)

    def get_preset(self, name: str) -> ExperimentConfig:
        """获取内置预设

        Raises:
            ConfigError: 预设不存在
        """
        if name not in self.PRESETS:
            raise ConfigError(f"预设 '{name}' 不存在（可选: {', '.join(self.list_presets())}）")
        return self.from_mapping(self.PRESETS[name])
