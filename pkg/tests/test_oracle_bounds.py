"""
Oracle Bounds Tests - oracle不等式上界测试
"""

import math
import os
import shutil
import tempfile

import pandas as pd
import pytest
from hypothesis import given, strategies as st, settings

from src.lasso_optimal_loss.core.errors import DimensionError, DomainError
from src.lasso_optimal_loss.core.oracle_bounds import (
    BoundKind, BoundParams, bound_at, bound_compat, bound_ratio_curve, bound_re,
    coverage_compat, coverage_re, curve_to_csv, solve_A, solve_t,
)


coverages = st.floats(min_value=0.01, max_value=0.999)


class TestBoundValues:
    """上界数值测试"""

    def test_compat_example(self):
        params = BoundParams(n=100, p=100, p0=6, sigma2=4.0, t=solve_t(0.95))
        assert bound_compat(params) == pytest.approx(254.8, abs=0.1)

    def test_re_example(self):
        params = BoundParams(n=100, p=100, p0=6, sigma2=4.0, A=solve_A(0.95, 100))
        assert bound_re(params) == pytest.approx(233.5, abs=0.1)

    def test_linearity(self):
        base = BoundParams(n=100, p=50, p0=6, sigma2=4.0, t=1.5, A=3.0)
        doubled = BoundParams(n=100, p=50, p0=6, sigma2=8.0, t=1.5, A=3.0)
        assert bound_compat(doubled) == pytest.approx(2 * bound_compat(base))
        larger_n = BoundParams(n=300, p=50, p0=6, sigma2=4.0, t=1.5, A=3.0)
        assert bound_re(larger_n) == pytest.approx(bound_re(base) / 3)
        kappa2 = BoundParams(n=100, p=50, p0=6, sigma2=4.0, kappa=2.0, A=3.0)
        assert bound_re(kappa2) == pytest.approx(bound_re(base) / 4)

    @pytest.mark.parametrize("kwargs", [
        {"p": 1}, {"n": 0}, {"p0": 0}, {"sigma2": 0.0}, {"psi0": -1.0}, {"t": 0.0},
    ])
    def test_invalid_params(self, kwargs):
        values = {"n": 100, "p": 10, "p0": 6, "sigma2": 4.0}
        values.update(kwargs)
        with pytest.raises(DomainError):
            BoundParams(**values)


class TestSolvers:
    """Property 12: 覆盖概率反解

    **Feature: lasso-optimal-loss, Property 12: 覆盖概率反解**

    *For any* 覆盖概率 c ∈ (0,1)，反解得到的 t 与 A 代回后覆盖概率为 c。
    """

    @given(coverages)
    @settings(max_examples=100)
    def test_t_round_trip(self, coverage: float):
        assert coverage_compat(solve_t(coverage)) == pytest.approx(coverage, abs=1e-9)

    @given(coverages, st.integers(min_value=2, max_value=100_000))
    @settings(max_examples=100)
    def test_A_round_trip(self, coverage: float, p: int):
        assert coverage_re(solve_A(coverage, p), p) == pytest.approx(coverage, abs=1e-9)

    def test_examples(self):
        assert solve_t(0.95) == pytest.approx(2.71621, abs=1e-5)
        assert solve_t(1 - 2 * math.exp(-0.5)) == pytest.approx(1.0)
        assert solve_A(0.95, 100) == pytest.approx(3.6337, abs=1e-4)
        assert solve_A(1 - 1 / 50, 50) == pytest.approx(4.0)

    def test_monotonicity(self):
        assert solve_t(0.99) > solve_t(0.95) > solve_t(0.5)
        assert solve_A(0.95, 10) > solve_A(0.95, 100) > solve_A(0.95, 1000)

    @pytest.mark.parametrize("coverage", [0.0, 1.0, -0.5, 1.5])
    def test_coverage_out_of_range(self, coverage: float):
        with pytest.raises(DomainError):
            solve_t(coverage)
        with pytest.raises(DomainError):
            solve_A(coverage, 10)


class TestRatioCurve:
    """Property 13: 上界隐含比值曲线

    **Feature: lasso-optimal-loss, Property 13: 上界隐含比值曲线**

    *For any* 上界类型，p = p0 时比值为1，比值随 p 严格增加。
    """

    @pytest.fixture(autouse=True)
    def setup_temp_dir(self):
        self.temp_dir = tempfile.mkdtemp()
        yield
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_compat_ratio_example(self):
        points = bound_ratio_curve(BoundKind.COMPAT, 100, [6, 100], 6, 4.0, 0.95)
        assert points[0].ratio == 1.0
        assert points[-1].ratio == pytest.approx(1.513, abs=1e-3)
        assert points[-1].bound == pytest.approx(254.8, abs=0.1)

    @given(st.sampled_from(list(BoundKind)), st.integers(min_value=2, max_value=20),
           coverages)
    @settings(max_examples=50)
    def test_strictly_increasing(self, kind: BoundKind, p0: int, coverage: float):
        p_list = list(range(p0, p0 + 40))
        points = bound_ratio_curve(kind, 100, p_list, p0, 4.0, coverage, fixed_A=3.0)
        ratios = [pt.ratio for pt in points]
        assert ratios[0] == pytest.approx(1.0)
        assert all(b > a for a, b in zip(ratios, ratios[1:]))

    def test_resolved_A_changes_curve(self):
        """默认每个 p 重新求解 A，与固定 A 的曲线不同"""
        resolved = bound_ratio_curve(BoundKind.RE, 100, [6, 100], 6, 4.0, 0.95)
        fixed = bound_ratio_curve(BoundKind.RE, 100, [6, 100], 6, 4.0, 0.95, fixed_A=3.0)
        assert resolved[-1].ratio != pytest.approx(fixed[-1].ratio)
        assert fixed[-1].ratio == pytest.approx(math.log(100) / math.log(6))
        assert bound_at(BoundKind.RE, 100, 100, 6, 4.0, 0.95) == pytest.approx(233.5, abs=0.1)

    def test_p_below_p0(self):
        with pytest.raises(DimensionError):
            bound_ratio_curve(BoundKind.COMPAT, 100, [5, 6], 6, 4.0, 0.95)

    def test_csv(self):
        path = os.path.join(self.temp_dir, "curve.csv")
        curve_to_csv(bound_ratio_curve(BoundKind.COMPAT, 100, [6, 50, 100], 6, 4.0, 0.95), path)
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["p", "bound", "ratio"]
        assert frame["p"].tolist() == [6, 50, 100]
        assert frame["ratio"].iloc[-1] == pytest.approx(1.513, abs=1e-3)
