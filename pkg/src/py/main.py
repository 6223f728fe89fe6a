#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
qramsim项目主执行入口
含噪桶链QRAM模拟：单次查询、保真度扫描、旋转对比、预言机交叉验证与粗粒化错误率报告
"""

import sys
import json
import argparse
import logging
from dataclasses import replace
from pathlib import Path

# 添加项目根目录到Python路径
current_dir = Path(__file__).parent
sys.path.insert(0, str(current_dir))

from utils.config_util import load_config
from utils.log_util import LogUtil, log_error, log_info

EXIT_BOUND_VIOLATION = 2


def _experiment(args):
    """读取配置并用命令行参数覆盖"""
    from steps.step07_harness.experiment_config import ExperimentConfig
    config = load_config(args.config)
    experiment = ExperimentConfig.from_dict(config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.out:
        overrides["output_dir"] = args.out
    if args.n is not None:
        overrides["n_min"], overrides["n_max"] = args.n[0], args.n[-1]
    if args.epsilon:
        overrides["epsilons"] = args.epsilon
    for name in ("noise_kind", "twirl", "variant", "init", "schedule", "address"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if args.doubling:
        overrides["doubling"] = True
    return replace(experiment, **overrides)


def run_query(args):
    """单次查询：一个 (n, ε) 点的保真度与两种调度的层数对比"""
    try:
        from steps.step01_topology.tree_topology import build_tree
        from steps.step03_circuit.query_circuit import layer_count_summary
        from steps.step07_harness.sweep_runner import SweepResult, memory_for, cell_seed, run_cell
        log_info("=== 执行单次查询 ===")
        config = _experiment(args).normalized()
        n = config.n_min
        tree = build_tree(n, config.router_model)
        summary = layer_count_summary(tree, memory_for(n, cell_seed(config.seed, n, 0)))
        for kind, counts in summary.items():
            log_info(f"调度 {kind}: D={counts['downstream']}, τ={counts['tau']}")
        row = run_cell(config, n, 0, workers=config.workers)
        log_info(f"n={n}, ε={row.epsilon}: F={row.mean:.6f}±{row.stderr:.1e}, "
                 f"界 {row.bound_name}={row.bound:.3e}, {'满足' if row.satisfied else '违反'}")
        SweepResult(config=config, rows=[row]).write(stem="query")
        if args.dump_frame:
            _dump_frame(config, tree, args.dump_frame)
        log_info("✅ 单次查询完成")
        return True
    except Exception as e:
        log_error(f"❌ 单次查询失败: {e}")
        return False


def _dump_frame(config, tree, path):
    from steps.step03_circuit.query_circuit import build_query_circuit
    from steps.step05_twirl.delayed_twirl import sample_twirl_frame
    from steps.step07_harness.sweep_runner import cell_seed, memory_for
    if config.twirl != "in-situ":
        raise ValueError("--dump-frame 只用于 in-situ 旋转")
    seed = cell_seed(config.seed, tree.depth, 0)
    circuit = build_query_circuit(tree, memory_for(tree.depth, seed), config.schedule, doubled_layout=True)
    frame = sample_twirl_frame(circuit, seed)
    Path(path).write_text(frame.dump(circuit.layout) + '\n', encoding='utf-8')
    log_info(f"旋转帧已写入: {path}")


def run_sweep(args):
    """保真度扫描；--enforce 时超出界返回退出码 2"""
    try:
        from steps.step07_harness.sweep_runner import run_sweep as sweep
        log_info("=== 执行保真度扫描 ===")
        result = sweep(_experiment(args))
        result.write(stem="sweep")
        for row in result.rows:
            log_info(f"n={row.n:2d} τ={row.tau:3d} ε={row.epsilon:.1e} 1-F={row.infidelity:.3e}"
                     f"±{row.stderr:.1e} {row.bound_name}={row.bound:.3e} {'✓' if row.satisfied else '✗'}")
        if args.fit:
            from steps.step07_harness.scaling_fit import fit_scaling_exponent
            for eps in result.config.epsilons:
                fit = fit_scaling_exponent([r for r in result.rows if r.epsilon == eps],
                                           samples=result.config.bootstrap_samples, seed=result.config.seed)
                log_info(f"ε={eps:.1e}: 标度指数 {fit.exponent:.2f} [{fit.ci_low:.2f}, {fit.ci_high:.2f}]")
        violations = result.violations()
        if violations and args.enforce:
            log_error(f"❌ {len(violations)} 个网格点超出界")
            return EXIT_BOUND_VIOLATION
        log_info("✅ 保真度扫描完成")
        return True
    except Exception as e:
        log_error(f"❌ 保真度扫描失败: {e}")
        return False


def run_twirl_compare(args):
    """同一噪声下比较不同旋转模式"""
    try:
        from steps.step07_harness.sweep_runner import twirl_compare
        log_info("=== 执行旋转对比 ===")
        result = twirl_compare(_experiment(args), modes=args.modes)
        result.write(stem="twirl_compare")
        log_info("✅ 旋转对比完成")
        return True
    except Exception as e:
        log_error(f"❌ 旋转对比失败: {e}")
        return False


def run_verify(args):
    """预言机交叉验证"""
    try:
        from steps.step07_harness.oracle_checks import verify_suite
        log_info("=== 执行预言机交叉验证 ===")
        config = _experiment(args)
        report = verify_suite(config.trials, config.seed, config.workers,
                              config.density_dim_cap, config.exhaustive_config_cap)
        out_dir = Path(config.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "verify.json", 'w', encoding='utf-8') as f:
            json.dump(report, f, ensure_ascii=False, indent=2)
        if report["passed"]:
            log_info("✅ 预言机交叉验证完成")
            return True
        log_error("❌ 预言机交叉验证失败: 存在不一致的实例")
        return False
    except Exception as e:
        log_error(f"❌ 预言机交叉验证失败: {e}")
        return False


def run_ghz(args):
    """GHZ 地址下相干 Z 与匹配泡利 Z 噪声的对比"""
    try:
        from steps.step07_harness.ghz_experiment import ghz_coherent_experiment
        log_info("=== 执行 GHZ 相干噪声实验 ===")
        report = ghz_coherent_experiment(_experiment(args), args.kappa)
        for label, result in report.results().items():
            csv_path, _ = result.write(stem=f"ghz_{label}")
        with open(csv_path.parent / "ghz_fit.json", 'w', encoding='utf-8') as f:
            json.dump(report.to_dict(), f, ensure_ascii=False, indent=2)
        violations = len(report.violations())
        if args.enforce and (violations or not report.separated):
            log_error(f"❌ {violations} 个网格点超出界，标度分离: {report.separated}")
            return EXIT_BOUND_VIOLATION
        log_info("✅ GHZ 相干噪声实验完成")
        return True
    except Exception as e:
        log_error(f"❌ GHZ 相干噪声实验失败: {e}")
        return False


def run_reset_free_queries(args):
    """免重置连续加倍查询"""
    try:
        from steps.step07_harness.sweep_runner import run_reset_free
        log_info("=== 执行免重置查询 ===")
        config = _experiment(args).normalized()
        estimates = run_reset_free(config, config.n_min, config.epsilons[0], args.queries)
        out_dir = Path(config.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "reset_free.json", 'w', encoding='utf-8') as f:
            json.dump([e.to_dict() for e in estimates], f, ensure_ascii=False, indent=2)
        log_info("✅ 免重置查询完成")
        return True
    except Exception as e:
        log_error(f"❌ 免重置查询失败: {e}")
        return False


def run_grain(args):
    """粗粒化有效错误率 ε_d 报告"""
    try:
        from steps.step01_topology.coarse_graining import all_grainings, effective_error_rates
        from steps.step01_topology.tree_topology import build_tree
        from steps.step02_state.register_layout import RegisterLayout
        from steps.step07_harness.sweep_runner import build_noise_model
        log_info("=== 执行粗粒化错误率统计 ===")
        config = _experiment(args)
        n = config.n_min
        tree = build_tree(n, config.router_model)
        layout = RegisterLayout.from_tree(tree)
        model = build_noise_model(config, tree, layout, config.epsilons[0])
        rates = effective_error_rates(all_grainings(tree, args.max_d or n), model)
        for d, eps_d in sorted(rates.rates.items()):
            log_info(f"d={d}: ε_d={eps_d:.3e}")
        out_dir = Path(config.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "grain.json", 'w', encoding='utf-8') as f:
            json.dump(rates.to_dict(), f, ensure_ascii=False, indent=2)
        log_info("✅ 粗粒化错误率统计完成")
        return True
    except Exception as e:
        log_error(f"❌ 粗粒化错误率统计失败: {e}")
        return False


def main():
    """主函数，处理命令行参数"""
    parser = argparse.ArgumentParser(
        description="qramsim - 含噪桶链QRAM模拟器",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
使用示例:
  # 单次查询
  python main.py query --n 2 --epsilon 1e-3 --noise depolarizing

  # 随机噪声扫描，超出界时以退出码2结束
  python main.py sweep --n 1 4 --epsilon 1e-3 3e-3 1e-2 --enforce

  # 相干噪声下比较原位旋转
  python main.py twirl-compare --variant two-level --init all-zero --noise coherent-z --modes none in-situ

  # 预言机交叉验证
  python main.py verify --trials 100000

  # 粗粒化错误率
  python main.py grain --config config.json --n 2

  # GHZ 地址下的相干噪声
  python main.py ghz --n 2 5 --kappa 1e-4 --enforce

  # 免重置连续查询
  python main.py reset-free --variant two-level --init random-basis --n 2 --epsilon 1e-3 --queries 5
        """
    )
    parser.add_argument("command", choices=["query", "sweep", "twirl-compare", "verify", "grain", "ghz", "reset-free"],
                        help="执行命令")
    parser.add_argument("--config", "-c", help="配置文件路径（默认项目根目录的config.json）")
    parser.add_argument("--seed", type=int, help="主种子")
    parser.add_argument("--trials", type=int, help="每个网格点的轨迹数")
    parser.add_argument("--out", "-o", help="结果目录")
    parser.add_argument("--workers", type=int, help="进程数（0为物理核数）")
    parser.add_argument("--n", type=int, nargs='+', help="深度，或 最小 最大")
    parser.add_argument("--epsilon", type=float, nargs='+', help="名义错误率")
    parser.add_argument("--noise", dest="noise_kind",
                        choices=["depolarizing", "pauli-x", "pauli-z", "dephasing", "coherent-z", "amplitude-damping"],
                        help="逐位点噪声类型")
    parser.add_argument("--twirl", choices=["none", "in-situ", "edge-classical"], help="旋转模式")
    parser.add_argument("--variant", choices=["three-level", "two-level"], help="路由器类型")
    parser.add_argument("--init", choices=["all-wait", "all-zero", "random-basis", "random-phase", "supplied"],
                        help="路由器初始化")
    parser.add_argument("--schedule", choices=["serial", "pipelined"], help="调度方式")
    parser.add_argument("--address", choices=["uniform", "ghz", "basis", "random"], help="地址输入态")
    parser.add_argument("--doubling", action="store_true", help="查询加倍")
    parser.add_argument("--enforce", action="store_true", help="sweep / ghz: 超出界时退出码为2")
    parser.add_argument("--fit", action="store_true", help="sweep: 拟合标度指数")
    parser.add_argument("--modes", nargs='+', default=["none", "in-situ"],
                        choices=["none", "in-situ", "edge-classical"], help="twirl-compare: 对比的旋转模式")
    parser.add_argument("--dump-frame", help="query: 写出一个原位旋转帧")
    parser.add_argument("--max-d", type=int, help="grain: 最大粗粒化尺度")
    parser.add_argument("--kappa", type=float, default=1e-4, help="ghz: 相干转角 κ（需满足 κ·τ·n ≪ 1）")
    parser.add_argument("--queries", type=int, default=3, help="reset-free: 连续查询次数")
    parser.add_argument("--verbose", "-v", action="store_true", help="输出DEBUG日志")

    args = parser.parse_args()
    if args.verbose:
        LogUtil.set_level(logging.DEBUG)
    if args.n is not None and len(args.n) > 2:
        parser.error("--n 接受一个深度或 最小 最大 两个值")

    commands = {
        "query": run_query,
        "sweep": run_sweep,
        "twirl-compare": run_twirl_compare,
        "verify": run_verify,
        "grain": run_grain,
        "ghz": run_ghz,
        "reset-free": run_reset_free_queries,
    }
    result = commands[args.command](args)

    if result == EXIT_BOUND_VIOLATION:
        log_error("❌ 任务执行失败: 界检查未通过")
        sys.exit(EXIT_BOUND_VIOLATION)
    if result:
        log_info("✅ 任务执行成功")
        sys.exit(0)
    else:
        log_error("❌ 任务执行失败")
        sys.exit(1)


if __name__ == "__main__":
    main()
