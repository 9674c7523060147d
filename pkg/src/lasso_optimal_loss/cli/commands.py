"""
Commands - 子命令实现

退出码：0 成功，2 用法/参数错误，3 数据错误，4 数值失败。
结果写到标准输出或文件，日志只写标准错误。
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

from ..core.config_manager import ConfigManager
from ..core.dataset import load_dataset
from ..core.dataset_analysis import AnalysisConfig, analyze_dataset, write_report
from ..core.errors import (ConfigError, DataParseError, DimensionError, DomainError,
                           InsufficientDataError, NonConvergenceError, ZeroVarianceColumnError)
from ..core.experiments import BoundOverlay, run_experiment, summarize, write_outputs
from ..core.oracle_bounds import BoundKind, bound_ratio_curve, curve_to_csv
from ..core.random_stream import parse_seed
from ..core.theory import (TABLE1_PHI_DECIMALS, DeteriorationQuery, anova_predictor_count,
                           prob_deterioration, prob_deterioration_given_sign, table1,
                           table1_to_csv)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

OUTPUT_FILES = ("rows.csv", "summary.csv", "metadata.json")


class UsageError(Exception):
    """命令行用法错误（退出码2）"""


def _seed(text: str) -> int:
    try:
        return parse_seed(text)
    except DomainError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lasso-optimal-loss",
        description="最优调参Lasso的损失恶化：理论计算、蒙特卡洛实验、oracle上界与数据集分析",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="日志详细程度（-v INFO，-vv DEBUG）")
    sub = parser.add_subparsers(dest="command", required=True)

    theory = sub.add_parser("theory", help="恶化概率的解析公式")
    theory_sub = theory.add_subparsers(dest="theory_command", required=True)
    prob = theory_sub.add_parser("prob", help="P(恶化) = Φ(|β₁|/σ) - 1/(2p)")
    prob.add_argument("--beta1", type=float, default=3.0)
    prob.add_argument("--sigma", type=float, default=1.0)
    prob.add_argument("--p", type=int, required=True)
    prob.add_argument("--given-sign", action="store_true", help="符号正确条件下的恶化概率")
    prob.add_argument("--csv", action="store_true", help="输出CSV")
    tab = theory_sub.add_parser("table1", help="ANOVA交互模型的恶化概率表")
    tab.add_argument("--beta1", type=float, default=3.0)
    tab.add_argument("--sigma", type=float, default=1.0)
    phi = tab.add_mutually_exclusive_group()
    phi.add_argument("--phi-decimals", type=int, default=TABLE1_PHI_DECIMALS,
                     help="先把 Φ(|β₁|/σ) 四舍五入到指定位数（默认4位，即印刷正态表的取值）")
    phi.add_argument("--exact-phi", action="store_true", help="使用精确的 Φ，不做四舍五入")
    tab.add_argument("--csv", action="store_true", help="输出CSV")
    count = theory_sub.add_parser("count", help="含k阶及以下交互项的预测变量个数")
    count.add_argument("--p-main", type=int, required=True)
    count.add_argument("--order", type=int, required=True)

    simulate = sub.add_parser("simulate", help="运行蒙特卡洛实验")
    source = simulate.add_mutually_exclusive_group(required=True)
    source.add_argument("config", nargs="?", help="key=value 配置文件")
    source.add_argument("--preset", help="内置预设名")
    source.add_argument("--list-presets", action="store_true", help="列出内置预设")
    simulate.add_argument("--out", help="输出目录")
    simulate.add_argument("--threads", type=int, default=1, help="工作线程数（不影响结果）")
    simulate.add_argument("--force", action="store_true", help="允许写入非空目录")
    simulate.add_argument("--replicates", type=int, default=None, help="覆盖配置中的重复次数")
    simulate.add_argument("--seed", type=_seed, default=None, help="覆盖配置中的主种子")
    simulate.add_argument("--overlay", action="store_true", help="在汇总表中叠加两个oracle上界")

    bounds = sub.add_parser("bounds", help="oracle上界隐含的损失比曲线")
    bounds.add_argument("--kind", choices=[k.value for k in BoundKind], required=True)
    bounds.add_argument("--n", type=int, required=True)
    bounds.add_argument("--p0", type=int, required=True)
    bounds.add_argument("--p-min", type=int, default=None, help="默认等于 p0")
    bounds.add_argument("--p-max", type=int, required=True)
    bounds.add_argument("--p-step", type=int, default=1)
    bounds.add_argument("--sigma2", type=float, required=True)
    bounds.add_argument("--coverage", type=float, default=0.95)
    bounds.add_argument("--psi0", type=float, default=1.0)
    bounds.add_argument("--kappa", type=float, default=1.0)
    bounds.add_argument("--fixed-A", type=float, default=None, dest="fixed_A",
                        help="限制特征值上界使用固定的 A（默认每个 p 重新求解）")
    bounds.add_argument("--out", help="输出CSV文件（默认标准输出）")

    analyze = sub.add_parser("analyze", help="MEL与APL的训练/测试比较")
    analyze.add_argument("dataset", help="CSV数据文件")
    analyze.add_argument("--response", required=True, help="响应列名")
    analyze.add_argument("--splits", type=int, default=20)
    analyze.add_argument("--fraction", type=float, default=0.5)
    analyze.add_argument("--seed", type=_seed, default=1)
    analyze.add_argument("--alpha", type=float, default=0.05)
    analyze.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=True)
    analyze.add_argument("--lambda-count", type=int, default=100)
    analyze.add_argument("--out", help="逐划分结果CSV")
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def cmd_theory(args: argparse.Namespace, out: TextIO) -> int:
    if args.theory_command == "prob":
        q = DeteriorationQuery(beta1=args.beta1, sigma=args.sigma, p=args.p)
        value = prob_deterioration_given_sign(q) if args.given_sign else prob_deterioration(q)
        if args.csv:
            out.write("beta1,sigma,p,given_sign,probability\n")
            out.write(f"{args.beta1:g},{args.sigma:g},{args.p},{str(args.given_sign).lower()},"
                      f"{value:.4f}\n")
        else:
            out.write(f"{value:.4f}\n")
    elif args.theory_command == "table1":
        decimals = None if args.exact_phi else args.phi_decimals
        table = table1(beta1=args.beta1, sigma=args.sigma, phi_decimals=decimals)
        if args.csv:
            table1_to_csv(table, out)
        else:
            out.write(table.to_string(float_format=lambda v: f"{v:.4f}", na_rep="-") + "\n")
    else:
        out.write(f"{anova_predictor_count(args.p_main, args.order)}\n")
    return EXIT_OK


def _prepare_out_dir(path: Path, force: bool) -> bool:
    """检查输出目录，返回目录是否由本次调用创建"""
    if path.exists():
        if not path.is_dir():
            raise UsageError(f"输出路径不是目录: {path}")
        if any(path.iterdir()) and not force:
            raise UsageError(f"输出目录非空: {path}（使用 --force 覆盖）")
        return False
    path.mkdir(parents=True)
    return True


def _remove_partial(path: Path, created: bool) -> None:
    for name in OUTPUT_FILES:
        if (path / name).exists():
            (path / name).unlink()
    if created and path.exists() and not any(path.iterdir()):
        path.rmdir()


def cmd_simulate(args: argparse.Namespace, out: TextIO) -> int:
    manager = ConfigManager()
    if args.list_presets:
        for name in manager.list_presets():
            out.write(f"{name}\t{manager.PRESETS[name]['kind']}\n")
        return EXIT_OK
    if not args.out:
        raise UsageError("simulate 需要 --out 输出目录")
    if args.threads < 1:
        raise UsageError(f"--threads 至少为1，当前为{args.threads}")

    config = manager.get_preset(args.preset) if args.preset else manager.load(args.config)
    if args.replicates is not None:
        config.replicates = args.replicates
    if args.seed is not None:
        config.master_seed = args.seed
    config.validate()

    out_dir = Path(args.out)
    created = _prepare_out_dir(out_dir, args.force)

    def progress(current: int, total: int, label: str) -> None:
        logger.debug("进度 %d/%d (%s)", current, total, label)

    try:
        result = run_experiment(config, threads=args.threads, progress_callback=progress)
        if args.overlay:
            result.summary = summarize(result, BoundOverlay(coverage=config.coverage))
        written = write_outputs(result, out_dir)
    except BaseException:
        _remove_partial(out_dir, created)
        raise
    for path in written:
        out.write(f"{path}\n")
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace, out: TextIO) -> int:
    p_min = args.p0 if args.p_min is None else args.p_min
    if args.p_step < 1:
        raise UsageError(f"--p-step 至少为1，当前为{args.p_step}")
    if p_min < 2 or args.p_max < p_min:
        raise DomainError(f"p 范围必须满足 2 <= p_min <= p_max，当前为 {p_min}..{args.p_max}")
    p_list = list(range(p_min, args.p_max + 1, args.p_step))
    if p_list[-1] != args.p_max:
        p_list.append(args.p_max)
    points = bound_ratio_curve(BoundKind(args.kind), args.n, p_list, args.p0, args.sigma2,
                               args.coverage, psi0=args.psi0, kappa=args.kappa,
                               fixed_A=args.fixed_A)
    curve_to_csv(points, args.out if args.out else out)
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace, out: TextIO) -> int:
    if args.splits < 1:
        raise UsageError(f"--splits 至少为1，当前为{args.splits}")
    if not 0.0 < args.alpha < 1.0:
        raise UsageError(f"--alpha 必须在(0,1)内，当前为{args.alpha}")
    dataset = load_dataset(args.dataset, args.response)
    config = AnalysisConfig(splits=args.splits, fraction=args.fraction, seed=args.seed,
                            alpha=args.alpha, standardize=args.standardize,
                            lambda_count=args.lambda_count)
    report = analyze_dataset(dataset, config)
    out.write(report.format_text())
    if args.out:
        write_report(report, args.out)
    return EXIT_OK


_COMMANDS = {
    "theory": cmd_theory,
    "simulate": cmd_simulate,
    "bounds": cmd_bounds,
    "analyze": cmd_analyze,
}


def run(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    """解析参数并执行子命令

    Returns:
        int: 退出码
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    _configure_logging(args.verbose)
    out = out or sys.stdout

    try:
        return _COMMANDS[args.command](args, out)
    except (UsageError, ConfigError, DimensionError, DomainError) as e:
        print(f"错误: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, DataParseError, ZeroVarianceColumnError,
            InsufficientDataError) as e:
        print(f"数据错误: {e}", file=sys.stderr)
        return EXIT_DATA
    except NonConvergenceError as e:
        print(f"数值错误: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
