"""
Interface de linha de comando do MorreyLab.

Subcomandos: predict, solve, analyze, verify {fp, stummel, embedding} e
bench. Cada comando grava as saídas (CSV/JSON) em --out e, por último,
o manifest.json com os hashes; --check confere um manifesto existente.

Colunas dos CSV:
  solution.csv    x, y, flag, value
  convergence.csv iter, energy, residual, step, kappa
  profile.csv     radius, excess
  fp.csv          ball_x, ball_y, radius, lhs, rhs_core, ratio, phi_id
  bench.csv       id, p, lambda, alpha_pred, alpha_hat, pass

Códigos de saída: 0 aprovado, 1 propriedade violada, 2 erro de uso,
3 falha do solver.
"""

import argparse
import json
import logging
import os
import sys
import time
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from ..analysis import (
    AnalysisError,
    ExponentReport,
    ProfileSettings,
    campanato_excess,
    fit_exponent,
    fp_battery,
    plot_profile,
    profile_radii,
)
from ..bench import (
    BenchmarkCase,
    case_matrix,
    default_matrix,
    parse_case,
    radial_case,
    results_frame,
    run_suite,
    sharpness_witness,
    solve_case,
)
from ..database import ResultsStore
from ..grid import Grid, gradient, read_node_table, write_node_table
from ..solver import SolverConfig, SolverError
from ..spaces import (
    DEFAULT_BALL_RATIO,
    BallFamily,
    MorreyIndex,
    check_embedding,
    embedding_refinement_study,
    morrey_norm,
    predicted_alpha,
    stummel_decay_slope,
)
from ..utils.config import get_setting, load_config
from ..utils.exceptions import HypothesisError, MorreyLabError
from ..utils.helpers import format_timestamp, write_json
from ..utils.logger import configure_root_logger
from .manifest import RunManifest, check_manifest

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_SOLVER = 3

# Expoentes padrão das verificações de propriedades
FP_DEFAULT_P = 1.5
STUMMEL_DEFAULT_P = 1.0
STUMMEL_RADII = (0.4, 0.05)
EMBEDDING_DEFAULTS = {'q': 2.0, 'mu': 1.0, 'p': 1.0, 'lambda': 1.5}

SMOOTH_NOTE = "exponent unbounded (smooth)"


class UsageError(MorreyLabError):
    """Exceção para argumentos ou arquivos de entrada inválidos."""
    pass


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group('problema')
    group.add_argument('--p', type=float, help='expoente do p-Laplaciano (ou da desigualdade verificada)')
    group.add_argument('--lambda', dest='lam', type=float, help='expoente de Morrey λ')
    group.add_argument('--n', type=int, default=2, help='dimensão (padrão: 2)')
    group.add_argument('--gamma', type=float, help='teto γ (padrão: theory.gamma)')
    group.add_argument('--s', type=float, help='expoente da fonte radial c|x|^{-s}')
    group.add_argument('--c', type=float, help='amplitude da fonte radial')
    group.add_argument('--case', help="caso de referência: radial-<s>, serrin-<γ> or affine-<a> (f ≡ 0)")
    group.add_argument('--grid-h', dest='grid_h', type=float, help='espaçamento da malha (padrão: grid.h)')
    group.add_argument('--domain', choices=['disk', 'square', 'annulus'], help='domínio (padrão: grid.domain)')

    solver = common.add_argument_group('solver')
    solver.add_argument('--tol', type=float, help='tolerância do resíduo')
    solver.add_argument('--max-iter', dest='max_iter', type=int, help='iterações por estágio')
    solver.add_argument('--solver-config', dest='solver_config', help="arquivo 'chave = valor' do solver")

    run = common.add_argument_group('execução')
    run.add_argument('--seed', type=int, help='semente (padrão: analysis.seed)')
    run.add_argument('--out', help='diretório de saída (padrão: output.dir/<comando>)')
    run.add_argument('--config', help='arquivo JSON de configuração')
    run.add_argument('--plot', action='store_true', help='grava PNG ao lado dos CSV')
    run.add_argument('--oracle', action='store_true', help='usa a solução exata em vez do solver')
    run.add_argument('--check', action='store_true', help='confere o manifesto de --out e sai')
    return common


def build_parser() -> argparse.ArgumentParser:
    """Monta o parser com os subcomandos."""
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog='morreylab',
        description='Laboratório numérico para -Δ_p u = f com f em espaços de Morrey.',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split('\n\n', 1)[1],
    )
    sub = parser.add_subparsers(dest='command', required=True)

    sub.add_parser('predict', parents=[common], help='expoente α previsto')
    sub.add_parser('solve', parents=[common], help='resolve um caso e grava a solução')

    analyze = sub.add_parser('analyze', parents=[common], help='mede o expoente de Hölder de Du')
    analyze.add_argument('--solution', help='solution.csv gravado por solve')
    analyze.add_argument('--center', type=float, nargs=2, metavar=('X', 'Y'), help='centro das bolas (padrão: origem)')

    verify = sub.add_parser('verify', parents=[common], help='baterias de propriedades')
    verify.add_argument('property', choices=['fp', 'stummel', 'embedding'])
    verify.add_argument('--trials', type=int, help='pares (tenda, bola) da bateria fp')
    verify.add_argument('--q', type=float, help='expoente q do espaço menor (embedding)')
    verify.add_argument('--mu', type=float, help='expoente μ do espaço menor (embedding)')

    bench = sub.add_parser('bench', parents=[common], help='suíte de casos de referência')
    bench.add_argument('--matrix', choices=['default', 'empty', 'custom'], default='default')
    bench.add_argument('--ps', type=float, nargs='*', default=[], help='valores de p (matriz custom)')
    bench.add_argument('--ss', type=float, nargs='*', default=[], help='valores de s (matriz custom)')
    bench.add_argument('--gammas', type=float, nargs='*', default=[], help='valores de γ de Serrin (matriz custom)')
    bench.add_argument('--witness', action='store_true', help='roda a testemunha de otimalidade nos casos de Serrin')
    return parser


# ----------------------------------------------------------------------
# Auxiliares
# ----------------------------------------------------------------------

def _out_dir(args: argparse.Namespace, config: Dict[str, Any]) -> str:
    out = args.out or os.path.join(get_setting(config, 'output.dir', 'runs'), args.command)
    os.makedirs(out, exist_ok=True)
    return out


def _threads(config: Dict[str, Any]) -> int:
    return max(1, int(get_setting(config, 'parallel.threads', 1)))


def _gamma(args: argparse.Namespace, config: Dict[str, Any]) -> float:
    return args.gamma if args.gamma is not None else float(get_setting(config, 'theory.gamma', 0.9))


def _grid(args: argparse.Namespace, config: Dict[str, Any], case: Optional[BenchmarkCase] = None) -> Grid:
    h = args.grid_h if args.grid_h is not None else float(get_setting(config, 'grid.h', 1.0 / 64.0))
    domain = args.domain or (case.domain_kind if case is not None else get_setting(config, 'grid.domain', 'disk'))
    return Grid(domain, h)


def _check_p(p: float, n: int) -> None:
    if p > n:
        error_msg = f"p > n: p={p:g}, n={n}"
        logger.error(error_msg)
        raise HypothesisError(error_msg)


def _case(args: argparse.Namespace, config: Dict[str, Any], p: Optional[float] = None) -> BenchmarkCase:
    """Caso a partir de --case ou de --s/--c (padrão: radial-0.5)."""
    p = p if p is not None else (args.p if args.p is not None else 2.0)
    _check_p(p, args.n)
    gamma = _gamma(args, config)
    if args.case:
        return parse_case(args.case, p, args.n, gamma)
    s = args.s if args.s is not None else 0.5
    return radial_case(s, args.c, p, args.n, gamma)


def _solver_config(args: argparse.Namespace, config: Dict[str, Any], p: float) -> SolverConfig:
    """Padrões < config.json < arquivo do solver < flags."""
    cfg = SolverConfig.from_settings(config, p=p)
    if args.solver_config:
        try:
            cfg = SolverConfig.from_file(args.solver_config, base=cfg)
        except SolverError as e:
            raise UsageError(str(e)) from e
    overrides = {'p': p}
    if args.tol is not None:
        overrides['tol'] = args.tol
    if args.max_iter is not None:
        overrides['max_iter'] = args.max_iter
    return cfg.replace(**overrides)


def _emit(summary: Dict[str, Any]) -> None:
    print(json.dumps(summary, indent=2, ensure_ascii=False, sort_keys=True, default=str))


def _grid_spec(grid: Grid) -> Dict[str, Any]:
    return {'domain': grid.domain_kind.value, 'h': grid.h, 'nx': grid.nx, 'ny': grid.ny}


# ----------------------------------------------------------------------
# Comandos
# ----------------------------------------------------------------------

def cmd_predict(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    if args.p is None or args.lam is None:
        error_msg = "predict requires --p and --lambda"
        logger.error(error_msg)
        raise UsageError(error_msg)
    out = _out_dir(args, config)
    manifest = RunManifest.start('predict', config)
    prediction = predicted_alpha(args.p, args.lam, args.n, _gamma(args, config))
    print(prediction)
    manifest.add_output(out, write_json(prediction.to_json(), os.path.join(out, 'prediction.json')))
    manifest.summary = prediction.to_json()
    manifest.write(out, passed=True)
    return EXIT_PASS


def cmd_solve(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    case = _case(args, config)
    grid = _grid(args, config, case)
    cfg = _solver_config(args, config, case.p)
    out = _out_dir(args, config)
    manifest = RunManifest.start('solve', config, _grid_spec(grid))

    result = solve_case(case, grid, cfg)
    exact = case.exact_field(grid)
    idx = grid.domain_indices
    summary = {
        'case': case.to_json(),
        'grid': _grid_spec(grid),
        'solver': cfg.to_text().splitlines(),
        'residual': result.residual,
        'iterations': result.iterations,
        'max_error': float(np.max(np.abs(result.u.values[idx] - exact.values[idx]))),
    }
    manifest.add_output(out, write_node_table(result.u, os.path.join(out, 'solution.csv')))
    manifest.add_output(out, result.write_history(os.path.join(out, 'convergence.csv')))
    manifest.add_output(out, write_json(summary, os.path.join(out, 'solve.json')))
    manifest.summary = {'residual': result.residual, 'iterations': result.iterations}
    manifest.write(out, passed=True)
    _emit({'residual': result.residual, 'iterations': result.iterations, 'max_error': summary['max_error']})
    return EXIT_PASS


def _solution_metadata(path: str) -> Dict[str, Any]:
    meta_path = os.path.join(os.path.dirname(os.path.abspath(path)), 'solve.json')
    if not os.path.exists(meta_path):
        return {}
    with open(meta_path, 'r', encoding='utf-8') as f:
        return json.load(f)


def cmd_analyze(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    out = _out_dir(args, config)
    tol = float(get_setting(config, 'analysis.exponent_tol', 0.05))
    explicit_lambda = args.lam is not None

    if args.oracle or not args.solution:
        case = _case(args, config)
        grid = _grid(args, config, case)
        G = case.exact_gradient(grid)
        p, lam = case.p, case.lambda_true
    else:
        meta = _solution_metadata(args.solution)
        grid_meta = meta.get('grid', {})
        h = args.grid_h if args.grid_h is not None else grid_meta.get('h', get_setting(config, 'grid.h'))
        domain = args.domain or grid_meta.get('domain', get_setting(config, 'grid.domain', 'disk'))
        grid = Grid(domain, h)
        u = read_node_table(grid, args.solution)
        G = gradient(u)
        case_meta = meta.get('case', {})
        p = args.p if args.p is not None else case_meta.get('p', 2.0)
        lam = args.lam if explicit_lambda else case_meta.get('lambda_true')

    manifest = RunManifest.start('analyze', config, _grid_spec(grid))
    center = tuple(args.center) if args.center else (0.0, 0.0)
    settings = ProfileSettings.from_settings(config)
    window = settings.window(grid, center)
    if window[1] <= 4.0 * grid.h:
        error_msg = f"balls exit domain: center {center} is {grid.distance_to_boundary(center):.4g} from ∂Ω"
        logger.error(error_msg)
        raise AnalysisError(error_msg)

    predicted = None
    if lam is not None:
        try:
            predicted = predicted_alpha(p, lam, args.n, _gamma(args, config)).alpha
        except HypothesisError:
            if explicit_lambda:
                raise
            logger.warning(f"Sem previsão para p={p:g}, λ={lam:g}")

    profile = campanato_excess(G, center, settings.radii(grid, window[1]), p)
    manifest.add_output(out, profile.write_csv(os.path.join(out, 'profile.csv')))
    if profile.all_zero:
        report = ExponentReport(None, window, None, predicted, True, note=SMOOTH_NOTE)
        fit = None
    else:
        fit = fit_exponent(profile, window)
        passed = True if predicted is None else bool(fit.alpha_hat >= predicted - tol)
        report = ExponentReport(fit.alpha_hat, fit.r_window, fit.rms_residual, predicted, passed)
    if args.plot or get_setting(config, 'output.plots', False):
        manifest.add_output(out, plot_profile(profile, fit, os.path.join(out, 'profile.png')))

    summary = report.to_json()
    manifest.add_output(out, write_json(summary, os.path.join(out, 'report.json')))
    manifest.summary = summary
    manifest.write(out, passed=report.passed)
    _emit(summary)
    return EXIT_PASS if report.passed else EXIT_VIOLATION


def _verify_fp(args, config, grid, f, case, out, manifest) -> bool:
    p = args.p if args.p is not None else FP_DEFAULT_P
    lam = args.lam if args.lam is not None else case.lambda_true
    norm = morrey_norm(f, MorreyIndex(1.0, lam), BallFamily.from_settings(grid, config)).value
    trials = args.trials if args.trials is not None else int(get_setting(config, 'analysis.trials', 50))
    seed = args.seed if args.seed is not None else int(get_setting(config, 'analysis.seed', 42))
    battery = fp_battery(
        f, p, lam, norm,
        trials=trials,
        seed=seed,
        tol=float(get_setting(config, 'analysis.fp_trend_tol', 0.05)),
        threads=_threads(config),
    )
    path = os.path.join(out, 'fp.csv')
    battery.to_frame().to_csv(path, index=False, float_format='%.17g')
    manifest.add_output(out, path)
    summary = battery.to_json()
    summary.update({'p': p, 'lambda': lam, 'morrey_norm': norm, 'seed': seed})
    manifest.add_output(out, write_json(summary, os.path.join(out, 'fp.json')))
    manifest.summary = summary
    _emit(summary)
    return battery.passed


def _verify_stummel(args, config, grid, f, case, out, manifest) -> bool:
    p = args.p if args.p is not None else STUMMEL_DEFAULT_P
    lam = args.lam if args.lam is not None else case.lambda_true
    r_hi, r_lo = STUMMEL_RADII
    r_lo = max(r_lo, 5.0 * grid.h)
    radii = profile_radii(r_hi, r_lo)
    fam = BallFamily.from_settings(grid, config, r_min=r_lo)
    near = np.hypot(fam.centers[:, 0], fam.centers[:, 1]) <= r_hi
    centers = fam.centers[near] if np.any(near) else fam.centers
    report = stummel_decay_slope(f, p, radii, centers, lam, float(get_setting(config, 'analysis.exponent_tol', 0.05)))
    summary = report.to_json()
    summary.update({'p': p, 'lambda': lam})
    manifest.add_output(out, write_json(summary, os.path.join(out, 'stummel.json')))
    manifest.summary = summary
    _emit(summary)
    return report.passed


def _verify_embedding(args, config, grid, f, case, out, manifest) -> bool:
    q = args.q if args.q is not None else EMBEDDING_DEFAULTS['q']
    mu = args.mu if args.mu is not None else EMBEDDING_DEFAULTS['mu']
    p = args.p if args.p is not None else EMBEDDING_DEFAULTS['p']
    lam = args.lam if args.lam is not None else EMBEDDING_DEFAULTS['lambda']
    from_idx, to_idx = MorreyIndex(q, mu, grid.n), MorreyIndex(p, lam, grid.n)
    report_family = BallFamily.from_settings(grid, config)
    report = check_embedding(f, from_idx, to_idx, report_family)

    # mesma família de raios em h e h/2
    study = embedding_refinement_study(
        lambda x, y: case.source(np.hypot(x, y)),
        from_idx,
        to_idx,
        [grid.h, 0.5 * grid.h],
        grid.domain_kind.value,
        (0.0, 0.0) if case.singular else None,
        r_min=float(report_family.radii[-1]),
        ratio=float(get_setting(config, 'spaces.ball_ratio', DEFAULT_BALL_RATIO)),
    )
    path = os.path.join(out, 'embedding_refinement.csv')
    study.to_csv(path, index=False, float_format='%.17g')
    manifest.add_output(out, path)
    drift = float(study['drift'].iloc[-1])
    drift_tol = float(get_setting(config, 'spaces.embedding_drift_tol', 0.1))

    summary = report.to_json()
    summary.update({'drift': drift, 'drift_tol': drift_tol})
    summary['pass'] = bool(np.isfinite(report.ratio) and drift <= drift_tol)
    manifest.add_output(out, write_json(summary, os.path.join(out, 'embedding.json')))
    manifest.summary = summary
    _emit(summary)
    return summary['pass']


VERIFIERS: Dict[str, Callable[..., bool]] = {
    'fp': _verify_fp,
    'stummel': _verify_stummel,
    'embedding': _verify_embedding,
}


def cmd_verify(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    # o p das flags é o expoente da desigualdade; o caso usa p = 2
    case = _case(args, config, p=2.0)
    grid = _grid(args, config, case)
    f = case.source_field(grid)
    out = _out_dir(args, config)
    manifest = RunManifest.start(f'verify {args.property}', config, _grid_spec(grid))
    passed = VERIFIERS[args.property](args, config, grid, f, case, out, manifest)
    manifest.write(out, passed=passed)
    return EXIT_PASS if passed else EXIT_VIOLATION


def _bench_cases(args: argparse.Namespace, config: Dict[str, Any]) -> List[BenchmarkCase]:
    if args.matrix == 'empty':
        return []
    if args.matrix == 'custom' or args.ps or args.ss or args.gammas:
        return case_matrix(args.ps, args.ss, args.n, args.gammas, _gamma(args, config))
    return default_matrix(args.n)


def cmd_bench(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    cases = _bench_cases(args, config)
    out = _out_dir(args, config)
    h = args.grid_h if args.grid_h is not None else float(get_setting(config, 'grid.h', 1.0 / 64.0))
    manifest = RunManifest.start('bench', config, {'h': h})
    cfg = _solver_config(args, config, 2.0)
    tol = float(get_setting(config, 'analysis.exponent_tol', 0.05))

    profile = ProfileSettings.from_settings(config)
    results = run_suite(cases, h, cfg, args.oracle, tol, _threads(config), profile)
    table = results_frame(results)
    path = os.path.join(out, 'bench.csv')
    table.to_csv(path, index=False, float_format='%.17g')
    manifest.add_output(out, path)

    summary: Dict[str, Any] = {
        'cases': [r.to_json() for r in results],
        'passed': sum(r.passed for r in results),
        'total': len(results),
    }
    if args.witness:
        summary['witness'] = [
            sharpness_witness(case, oracle=args.oracle, cfg=cfg, profile=profile).to_json()
            for case in cases if case.family == 'serrin'
        ]
    manifest.add_output(out, write_json(summary, os.path.join(out, 'bench.json')))

    passed = all(r.passed for r in results) and all(w['pass'] for w in summary.get('witness', []))
    db_path = get_setting(config, 'database.path')
    if db_path:
        with ResultsStore(db_path) as store:
            run_id = store.start_run('bench', config, manifest.started_at, out)
            store.add_case_results(run_id, table.to_dict('records'))
            store.finish_run(run_id, passed, format_timestamp(time.time()))

    manifest.summary = {'passed': summary['passed'], 'total': summary['total']}
    manifest.write(out, passed=passed)
    print(table.to_string(index=False) if len(table) else "(nenhum caso)")
    return EXIT_PASS if passed else EXIT_VIOLATION


COMMANDS: Dict[str, Callable[[argparse.Namespace, Dict[str, Any]], int]] = {
    'predict': cmd_predict,
    'solve': cmd_solve,
    'analyze': cmd_analyze,
    'verify': cmd_verify,
    'bench': cmd_bench,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Executa um subcomando e devolve o código de saída."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PASS if e.code in (0, None) else EXIT_USAGE

    config = load_config(args.config)
    configure_root_logger(get_setting(config, 'logging.level'), get_setting(config, 'logging.file'))

    if args.check:
        out = args.out or os.path.join(get_setting(config, 'output.dir', 'runs'), args.command)
        try:
            problems = check_manifest(out)
        except MorreyLabError as e:
            print(f"erro: {e}", file=sys.stderr)
            return EXIT_USAGE
        for problem in problems:
            print(problem, file=sys.stderr)
        return EXIT_PASS if not problems else EXIT_VIOLATION

    try:
        return COMMANDS[args.command](args, config)
    except SolverError as e:
        print(f"erro do solver: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except MorreyLabError as e:
        print(f"erro: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as e:
        print(f"erro: {e}", file=sys.stderr)
        return EXIT_USAGE
