"""
Theory - 恶化概率的解析公式与蒙特卡洛验证

正交设计、单一非零系数时，加入多余预测变量后最优损失变差（恶化）的概率：
  P(恶化) = Φ(|β₁|/σ) - 1/(2p)
  P(恶化 | 符号正确) = 1 - 1/(2pΦ(|β₁|/σ))
并给出ANOVA交互项计数、概率表以及对应的蒙特卡洛估计。
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pandas as pd

from .errors import DimensionError, DomainError
from .ortho_lasso import CaseTag, OrthoInstance, optimal_multi, optimal_single
from .random_stream import RngStream
from .stats import binomial_standard_error, normal_cdf

logger = logging.getLogger(__name__)

TABLE1_ORDERS = ("Main Effects", "Two-Way Interactions",
                 "Three-Way Interactions", "Four-Way Interactions")
TABLE1_P_MAIN = (2, 4, 6, 8, 10)
# 印刷正态表的精度：Φ(3) 查表为 0.9987
TABLE1_PHI_DECIMALS = 4
# 已发表概率表中与公式不一致的单元格：(行, 列) -> 已发表的取值
TABLE1_PUBLISHED_DEVIATIONS = {
    ("Two-Way Interactions", "p=2"): 0.8362,
    ("Three-Way Interactions", "p=4"): 0.9602,
    ("Four-Way Interactions", "p=4"): 0.9630,
}


@dataclass(frozen=True)
class DeteriorationQuery:
    """恶化概率查询

    Attributes:
        beta1: 非零真系数 β₁
        sigma: 噪声标准差 σ
        p: 预测变量个数（要求 p >= 2）
    """
    beta1: float
    sigma: float
    p: int

    def __post_init__(self):
        if self.beta1 == 0:
            raise DomainError("β₁ 不能为零")
        if not self.sigma > 0:
            raise DomainError(f"σ 必须为正，当前为{self.sigma}")
        if self.p <= 1:
            raise DomainError(f"定理要求 p > 1，当前为{self.p}")

    @property
    def snr(self) -> float:
        return abs(self.beta1) / self.sigma


@dataclass(frozen=True)
class McEstimate:
    """蒙特卡洛恶化频率

    Attributes:
        frequency: 恶化频率
        standard_error: 二项标准误
        conditional_frequency: 符号正确条件下的恶化频率（无符号正确样本时为None）
        conditional_standard_error: 条件频率的标准误
        replicates: 重复次数
        sign_matches: 符号正确的样本数
    """
    frequency: float
    standard_error: float
    conditional_frequency: Optional[float]
    conditional_standard_error: Optional[float]
    replicates: int
    sign_matches: int


@dataclass(frozen=True)
class McOutcome:
    """单次重复的结果"""
    replicate: int
    sign_match: bool
    deteriorated: bool
    n_loss_p: float
    n_loss_single: float


def prob_deterioration(q: DeteriorationQuery, phi: Optional[float] = None) -> float:
    """P(L_p(λ*_p)/L_1(λ*_1) > 1) = Φ(|β₁|/σ) - 1/(2p)

    phi 可显式给出 Φ(|β₁|/σ) 的取值（例如按印刷正态表四舍五入后的值）。
    """
    phi = normal_cdf(q.snr) if phi is None else phi
    return phi - 1.0 / (2 * q.p)


def prob_deterioration_given_sign(q: DeteriorationQuery) -> float:
    """P(恶化 | sgn(z₁) = sgn(β₁)) = 1 - 1/(2pΦ(|β₁|/σ))"""
    return 1.0 - 1.0 / (2 * q.p * normal_cdf(q.snr))


def anova_predictor_count(p_main: int, order: int) -> int:
    """含全部 k 阶及以下交互项的预测变量个数 Σ_{i=1}^k C(p,i)

    Raises:
        DimensionError: k < 1 或 k > p_main
    """
    if not 1 <= order <= p_main:
        raise DimensionError(f"交互阶数必须在1到{p_main}之间，当前为{order}")
    return sum(math.comb(p_main, i) for i in range(1, order + 1))


def table1(beta1: float = 3.0, sigma: float = 1.0,
           phi_decimals: Optional[int] = TABLE1_PHI_DECIMALS) -> pd.DataFrame:
    """恶化概率表：行为交互阶数，列为主效应个数

    k > p_main 的单元格为缺失（NaN）。默认先把 Φ(|β₁|/σ) 按印刷正态表
    四舍五入到4位再代入公式，phi_decimals=None 时使用精确的 Φ。
    单元格保留4位小数。

    默认设置下 β₁=3、σ=1 的18个单元格中有15个与已发表的表一致；
    其余3个（见 TABLE1_PUBLISHED_DEVIATIONS）无论 Φ 取精确值还是查表值
    都无法由公式得到：Two-Way p=2 公式给出 0.8320，Three-Way p=4 给出
    0.9630，Four-Way p=4 给出 0.9654。
    """
    phi = normal_cdf(abs(beta1) / sigma)
    if phi_decimals is not None:
        phi = round(phi, phi_decimals)

    data: dict[str, list[float]] = {}
    for p_main in TABLE1_P_MAIN:
        column = []
        for order, _ in enumerate(TABLE1_ORDERS, start=1):
            if order > p_main:
                column.append(float("nan"))
                continue
            p = anova_predictor_count(p_main, order)
            q = DeteriorationQuery(beta1=beta1, sigma=sigma, p=p)
            column.append(round(prob_deterioration(q, phi=phi), 4))
        data[f"p={p_main}"] = column
    return pd.DataFrame(data, index=pd.Index(TABLE1_ORDERS, name="Model"))


def table1_to_csv(table: pd.DataFrame, path: str | Path) -> None:
    """按原表布局导出CSV，缺失单元格写为 '-'"""
    table.to_csv(path, na_rep="-", float_format="%.4f")


def draw_instance(q: DeteriorationQuery, rng: RngStream, replicate: int) -> OrthoInstance:
    """按 z₁ ~ N(β₁, σ²)、z_j ~ N(0, σ²) 抽取一个实例"""
    z = q.sigma * rng.substream(replicate).normals(q.p)
    z[0] += q.beta1
    return OrthoInstance(beta1=q.beta1, z=z, n=q.p, sigma2=q.sigma ** 2)


def mc_prob_deterioration(q: DeteriorationQuery, replicates: int, rng: RngStream,
                          draw: Optional[Callable[[DeteriorationQuery, RngStream, int], OrthoInstance]] = None,
                          outcomes: Optional[list[McOutcome]] = None) -> McEstimate:
    """蒙特卡洛估计恶化频率

    恶化与否取自精确解的分支标记而不是两个浮点损失的比较。

    Args:
        q: 查询参数
        replicates: 重复次数
        rng: 随机数流，第 r 次重复使用子流 r
        draw: 实例抽样函数，默认直接抽取 z（见 draw_instance）
        outcomes: 不为空时逐次追加每次重复的结果
    """
    draw = draw or draw_instance
    if replicates < 1:
        raise DomainError(f"重复次数至少为1，当前为{replicates}")

    deteriorated = 0
    matched = 0
    matched_deteriorated = 0
    for r in range(replicates):
        inst = draw(q, rng, r)
        multi = optimal_multi(inst)
        single = optimal_single(inst.beta1, float(inst.z[0]))
        if multi.case_tag is not CaseTag.SIGN_MISMATCH:
            matched += 1
            if multi.deteriorated:
                matched_deteriorated += 1
        if multi.deteriorated:
            deteriorated += 1
        if outcomes is not None:
            outcomes.append(McOutcome(replicate=r, sign_match=multi.case_tag is not CaseTag.SIGN_MISMATCH,
                                      deteriorated=multi.deteriorated, n_loss_p=multi.n_loss,
                                      n_loss_single=single.n_loss))
        # 分支标记与精确损失必须一致：未恶化时两者相等
        if not multi.deteriorated and not math.isclose(
                multi.n_loss, single.n_loss, rel_tol=1e-9, abs_tol=1e-12):
            logger.warning("第%d次重复：分支标记与精确损失不一致 (%.6g vs %.6g)",
                           r, multi.n_loss, single.n_loss)

    frequency = deteriorated / replicates
    conditional = matched_deteriorated / matched if matched else None
    logger.debug("p=%d 恶化频率 %.4f（%d次重复）", q.p, frequency, replicates)
    return McEstimate(
        frequency=frequency,
        standard_error=binomial_standard_error(frequency, replicates),
        conditional_frequency=conditional,
        conditional_standard_error=(
            binomial_standard_error(conditional, matched) if matched else None),
        replicates=replicates,
        sign_matches=matched,
    )


def ratio_witness(beta1: float, z1: float, z2: float) -> tuple[float, float]:
    """无穷期望比值的见证构造：0 < β₁ < z₁ < z₂ 时单变量最优损失为0而多变量为正

    Returns:
        (nL_1(λ*_1), nL_2(λ*_2))
    """
    if not 0 < beta1 < z1 < z2:
        raise DomainError("见证区域要求 0 < β₁ < z₁ < z₂")
    single = optimal_single(beta1, z1)
    multi = optimal_multi(OrthoInstance(beta1=beta1, z=np.array([z1, z2])))
    return single.n_loss, multi.n_loss
