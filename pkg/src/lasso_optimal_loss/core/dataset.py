"""
Dataset - 用户数据集读取与训练/测试划分

读取带表头的数值CSV（一列为响应，其余为预测变量），逐单元格检查数值
合法性（报告按行优先的第一个非法单元格）；随机划分由种子和划分序号唯一确定。
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .design import Design, DesignKind
from .errors import DataParseError, DomainError
from .random_stream import RngStream

logger = logging.getLogger(__name__)

STREAM_SPLIT = 5


@dataclass(frozen=True)
class Dataset:
    """数值数据集

    Attributes:
        x: n×p 预测变量矩阵
        y: 响应向量
        labels: 预测变量列名
        response: 响应列名
        source: 来源文件
    """
    x: np.ndarray
    y: np.ndarray
    labels: list[str]
    response: str
    source: str = ""

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def design(self) -> Design:
        return Design(values=self.x, kind=DesignKind.FILE, column_labels=self.labels)


def _describe_bad_cell(cell: str, value: float) -> str:
    if not cell:
        return "单元格为空"
    if np.isnan(value):
        return f"非数值单元格 {cell!r}"
    return f"非有限数值 {cell!r}"


def load_dataset(path: str | Path, response: str) -> Dataset:
    """读取CSV数据集

    Args:
        path: CSV文件路径（首行为表头）
        response: 响应列名

    Returns:
        Dataset: 数值数据集

    Raises:
        FileNotFoundError: 文件不存在
        DataParseError: 缺少响应列、非数值单元格或数据过少（带行号/列名）
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"数据文件不存在: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataParseError(f"无法解析CSV: {e}") from None

    frame.columns = [str(c).strip() for c in frame.columns]
    if response not in frame.columns:
        raise DataParseError(f"缺少响应列（现有列: {', '.join(frame.columns)}）", column=response)
    predictors = [c for c in frame.columns if c != response]
    if not predictors:
        raise DataParseError("除响应列外没有预测变量列")
    if len(frame) < 4:
        raise DataParseError(f"数据行数过少（{len(frame)}行，至少需要4行）")

    # 缺失的尾部字段由 pandas 填为 NaN
    text = frame.apply(lambda col: col.where(col.notna(), "").astype(str).str.strip())
    values = text.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        i, j = (int(k) for k in bad[0])
        raise DataParseError(_describe_bad_cell(text.iat[i, j], values[i, j]),
                             row=i + 1, column=frame.columns[j])

    y_index = list(frame.columns).index(response)
    x = np.delete(values, y_index, axis=1)
    logger.info("读取数据集 %s：%d 行，%d 个预测变量", path.name, x.shape[0], x.shape[1])
    return Dataset(x=x, y=values[:, y_index], labels=predictors, response=response,
                   source=str(path))


@dataclass(frozen=True)
class DatasetSplit:
    """一次训练/测试划分

    Attributes:
        train: 训练集行下标（升序）
        test: 测试集行下标（升序）
        split_seed: 划分种子
        fraction: 训练集比例
    """
    train: np.ndarray
    test: np.ndarray
    split_seed: int
    fraction: float

    def __post_init__(self):
        overlap = np.intersect1d(self.train, self.test)
        if overlap.size:
            raise DomainError(f"训练集与测试集有重叠行: {overlap.tolist()}")


def make_split(n: int, fraction: float, seed: int, index: int = 0) -> DatasetSplit:
    """生成第 index 次随机划分

    训练集大小为 round(fraction·n)，并保证训练集至少2行、测试集至少1行。

    Raises:
        DomainError: fraction 不在 (0,1) 内或 n < 3
    """
    if not 0.0 < fraction < 1.0:
        raise DomainError(f"训练集比例必须在(0,1)内，当前为{fraction}")
    if n < 3:
        raise DomainError(f"划分至少需要3行数据，当前为{n}")
    order = np.argsort(RngStream(seed, STREAM_SPLIT, (index,)).uniforms(n), kind="stable")
    size = min(max(int(round(fraction * n)), 2), n - 1)
    return DatasetSplit(train=np.sort(order[:size]), test=np.sort(order[size:]),
                        split_seed=seed, fraction=fraction)


def make_splits(n: int, count: int, fraction: float, seed: int) -> list[DatasetSplit]:
    if count < 1:
        raise DomainError(f"划分次数至少为1，当前为{count}")
    return [make_split(n, fraction, seed, index) for index in range(count)]
