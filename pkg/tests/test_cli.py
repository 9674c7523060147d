"""
CLI Tests - 命令行接口测试
"""

import io
import shutil
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from src.lasso_optimal_loss.cli import run
from src.lasso_optimal_loss.cli.commands import EXIT_DATA, EXIT_OK, EXIT_USAGE


SMALL_CONFIG = """\
kind=OrthoRatioVsP
n=32
p_grid=6,8,16
sigma2_list=4
replicates=3
master_seed=11
"""


def invoke(*argv: str) -> tuple[int, str]:
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


class TestTheoryCommand:
    """theory 子命令测试"""

    def test_prob(self):
        assert invoke("theory", "prob", "--beta1", "3", "--sigma", "1", "--p", "2") == (EXIT_OK, "0.7487\n")

    def test_prob_given_sign_csv(self):
        code, text = invoke("theory", "prob", "--p", "10", "--given-sign", "--csv")
        assert code == EXIT_OK
        assert text.splitlines() == ["beta1,sigma,p,given_sign,probability", "3,1,10,true,0.9499"]

    @pytest.mark.parametrize("argv", [
        ("theory", "prob", "--p", "1"),
        ("theory", "prob", "--p", "4", "--beta1", "0"),
        ("theory", "count", "--p-main", "2", "--order", "3"),
    ])
    def test_domain_errors(self, argv):
        code, text = invoke(*argv)
        assert code == EXIT_USAGE
        assert text == ""

    def test_count(self):
        assert invoke("theory", "count", "--p-main", "4", "--order", "2") == (EXIT_OK, "10\n")

    def test_table1_csv(self):
        code, text = invoke("theory", "table1", "--csv")
        assert code == EXIT_OK
        lines = text.splitlines()
        assert lines[0] == "Model,p=2,p=4,p=6,p=8,p=10"
        assert len(lines) == 5

    def test_table1_text(self):
        code, text = invoke("theory", "table1")
        assert code == EXIT_OK
        assert "Main Effects" in text and "0.8737" in text and "0.9154" in text

    def test_table1_exact_phi(self):
        code, text = invoke("theory", "table1", "--csv", "--exact-phi")
        assert code == EXIT_OK
        assert text.splitlines()[1].startswith("Main Effects,0.7487,0.8737,0.9153,")
        assert invoke("theory", "table1", "--exact-phi", "--phi-decimals", "3")[0] == EXIT_USAGE

    def test_missing_required(self):
        assert invoke("theory", "prob")[0] == EXIT_USAGE
        assert invoke()[0] == EXIT_USAGE


class TestBoundsCommand:
    """bounds 子命令测试"""

    @pytest.fixture(autouse=True)
    def setup_temp_dir(self):
        self.temp_dir = tempfile.mkdtemp()
        yield
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_compat_curve_file(self):
        path = Path(self.temp_dir) / "curve.csv"
        code, text = invoke("bounds", "--kind", "compat", "--n", "100", "--p0", "6",
                            "--p-max", "100", "--sigma2", "4", "--out", str(path))
        assert code == EXIT_OK and text == ""
        frame = pd.read_csv(path)
        assert frame["p"].tolist() == list(range(6, 101))
        assert frame["ratio"].iloc[0] == 1.0
        assert frame["ratio"].iloc[-1] == pytest.approx(1.513, abs=1e-3)

    def test_stdout_with_step(self):
        code, text = invoke("bounds", "--kind", "re", "--n", "100", "--p0", "6",
                            "--p-max", "100", "--p-step", "10", "--sigma2", "4", "--fixed-A", "3")
        assert code == EXIT_OK
        frame = pd.read_csv(io.StringIO(text))
        assert frame["p"].tolist() == [6, 16, 26, 36, 46, 56, 66, 76, 86, 96, 100]
        assert frame["ratio"].iloc[-1] == pytest.approx(np.log(100) / np.log(6))

    @pytest.mark.parametrize("extra", [["--coverage", "1.0"], ["--p-min", "3"], ["--p-step", "0"]])
    def test_invalid(self, extra):
        code, _ = invoke("bounds", "--kind", "compat", "--n", "100", "--p0", "6",
                         "--p-max", "100", "--sigma2", "4", *extra)
        assert code == EXIT_USAGE


class TestSimulateCommand:
    """simulate 子命令测试"""

    @pytest.fixture(autouse=True)
    def setup_temp_dir(self):
        self.temp_dir = tempfile.mkdtemp()
        self.config = Path(self.temp_dir) / "small.cfg"
        self.config.write_text(SMALL_CONFIG, encoding="utf-8")
        yield
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def out_dir(self, name: str) -> Path:
        return Path(self.temp_dir) / name

    def test_run_writes_files(self):
        out = self.out_dir("run")
        code, text = invoke("simulate", str(self.config), "--out", str(out))
        assert code == EXIT_OK
        for name in ("rows.csv", "summary.csv", "metadata.json"):
            assert (out / name).exists()
            assert str(out / name) in text
        assert len(pd.read_csv(out / "rows.csv")) == 9

    def test_refuses_non_empty_dir(self):
        out = self.out_dir("run")
        assert invoke("simulate", str(self.config), "--out", str(out))[0] == EXIT_OK
        assert invoke("simulate", str(self.config), "--out", str(out))[0] == EXIT_USAGE
        assert invoke("simulate", str(self.config), "--out", str(out), "--force")[0] == EXIT_OK

    def test_threads_do_not_change_output(self):
        one, three = self.out_dir("one"), self.out_dir("three")
        assert invoke("simulate", str(self.config), "--out", str(one), "--threads", "1")[0] == EXIT_OK
        assert invoke("simulate", str(self.config), "--out", str(three), "--threads", "3")[0] == EXIT_OK
        for name in ("rows.csv", "summary.csv"):
            assert (one / name).read_bytes() == (three / name).read_bytes()

    def test_overrides_and_overlay(self):
        out = self.out_dir("overlay")
        code, _ = invoke("simulate", str(self.config), "--out", str(out), "--replicates", "2",
                         "--seed", "0x10", "--overlay")
        assert code == EXIT_OK
        summary = pd.read_csv(out / "summary.csv")
        assert "conservatism_compat" in summary.columns
        assert (summary["replicates"] == 2).all()
        assert '"master_seed": 16' in (out / "metadata.json").read_text(encoding="utf-8")

    def test_list_presets(self):
        code, text = invoke("simulate", "--list-presets")
        assert code == EXIT_OK
        assert "fig1\tOrthoRatioVsP" in text.splitlines()

    def test_errors(self):
        assert invoke("simulate", str(self.config))[0] == EXIT_USAGE
        assert invoke("simulate", "--preset", "nope", "--out", str(self.out_dir("x")))[0] == EXIT_USAGE
        missing = str(Path(self.temp_dir) / "missing.cfg")
        assert invoke("simulate", missing, "--out", str(self.out_dir("y")))[0] == EXIT_DATA
        bad = Path(self.temp_dir) / "bad.cfg"
        bad.write_text("n=32\nreplicates=0\n", encoding="utf-8")
        assert invoke("simulate", str(bad), "--out", str(self.out_dir("z")))[0] == EXIT_USAGE
        assert not self.out_dir("z").exists()


class TestAnalyzeCommand:
    """analyze 子命令测试"""

    @pytest.fixture(autouse=True)
    def setup_temp_dir(self):
        self.temp_dir = tempfile.mkdtemp()
        rng = np.random.default_rng(2)
        a, b = rng.normal(size=(2, 40))
        frame = pd.DataFrame({"a": a, "b": b, "y": 2 * a * b + 0.1 * rng.normal(size=40)})
        self.data = Path(self.temp_dir) / "data.csv"
        frame.to_csv(self.data, index=False)
        yield
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_single_split_message(self):
        code, text = invoke("analyze", str(self.data), "--response", "y", "--splits", "1")
        assert code == EXIT_OK
        assert "只有1次划分" in text
        assert text.startswith("# source: ")

    def test_report_file(self):
        out = Path(self.temp_dir) / "splits.csv"
        code, text = invoke("analyze", str(self.data), "--response", "y", "--splits", "3",
                            "--out", str(out))
        assert code == EXIT_OK
        assert "wilcoxon: W+=" in text
        assert len(pd.read_csv(out, comment="#")) == 3

    @pytest.mark.parametrize("flag", ["--standardize", "--no-standardize"])
    def test_main_effects_only(self, flag):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(80, 8))
        frame = pd.DataFrame(x, columns=[f"x{j + 1}" for j in range(8)])
        frame["y"] = x[:, :5] @ np.array([2.0, 1.5, 1.0, -1.0, 0.5]) + 1.5 * rng.normal(size=80)
        path = Path(self.temp_dir) / "main.csv"
        frame.to_csv(path, index=False)
        code, text = invoke("analyze", str(path), "--response", "y", "--splits", "20", flag)
        assert code == EXIT_OK
        assert "APL显著变差" in text

    def test_data_errors(self):
        assert invoke("analyze", str(self.data), "--response", "nope")[0] == EXIT_DATA
        missing = str(Path(self.temp_dir) / "missing.csv")
        assert invoke("analyze", missing, "--response", "y")[0] == EXIT_DATA
        assert invoke("analyze", str(self.data), "--response", "y", "--splits", "0")[0] == EXIT_USAGE
