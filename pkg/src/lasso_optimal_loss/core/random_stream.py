"""
Random Stream - 可复现随机数流

每条流由 (master_seed, stream_id, 子流路径) 唯一确定，底层使用计数器型
Philox 生成器，正态变量由均匀变量经逆CDF变换得到。因此任意子流的取值与
其他子流的消费顺序无关，并行调度不会改变结果。
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import DomainError

SEED_BITS = 64
_UNIFORM_BITS = 53


def parse_seed(text: str | int) -> int:
    """解析64位种子，支持十进制和0x十六进制

    Raises:
        DomainError: 如果无法解析或超出64位无符号范围
    """
    if isinstance(text, int):
        value = text
    else:
        raw = text.strip().lower()
        try:
            value = int(raw, 16) if raw.startswith("0x") else int(raw, 10)
        except ValueError:
            raise DomainError(f"无效的种子: {text!r}") from None
    if not 0 <= value < 2 ** SEED_BITS:
        raise DomainError(f"种子必须是64位无符号整数，当前为{value}")
    return value


@dataclass(frozen=True)
class RngStream:
    """确定性随机数流

    Attributes:
        master_seed: 64位主种子
        stream_id: 流编号（区分设计矩阵、响应噪声、测试集等用途）
        lineage: 子流路径，例如 (replicate,)
    """
    master_seed: int
    stream_id: int
    lineage: tuple[int, ...] = ()

    def __post_init__(self):
        parse_seed(self.master_seed)
        if self.stream_id < 0 or any(i < 0 for i in self.lineage):
            raise DomainError("流编号和子流下标必须非负")

    def substream(self, index: int) -> "RngStream":
        """派生第 index 个子流"""
        return RngStream(self.master_seed, self.stream_id, self.lineage + (index,))

    def _generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=self.master_seed,
            spawn_key=(self.stream_id,) + self.lineage,
        )
        return np.random.Generator(np.random.Philox(seq))

    def uniforms(self, size: int | tuple[int, ...]) -> np.ndarray:
        """返回 (0,1) 开区间上的均匀变量（从流的开头开始取）"""
        gen = self._generator()
        k = gen.integers(0, 2 ** _UNIFORM_BITS, size=size, dtype=np.int64)
        return (k.astype(np.float64) + 0.5) / float(2 ** _UNIFORM_BITS)

    def normals(self, size: int | tuple[int, ...]) -> np.ndarray:
        """返回标准正态变量（逆CDF法）"""
        return ndtri(self.uniforms(size))
