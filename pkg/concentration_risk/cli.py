"""
Command-line interface.

Results go to stdout (or ``--output``), logs to stderr. Exit codes: 0 on
success, 1 on usage errors, 2 on invalid input, 3 on numerical failures.
"""
import argparse
import glob
import json
import logging
import os
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

import pandas as pd
import requests

from concentration_risk import __version__
from concentration_risk.engines.context import EngineContext
from concentration_risk.engines.results import GaResult
from concentration_risk.engines.valuation import thresholds
from concentration_risk.errors import ConcentrationRiskError, InvalidParameterError, MarketDataError
from concentration_risk.evaluation import (convergence_trace, evaluate_methods, render_text, sensitivity_battery,
                                           write_report)
from concentration_risk.marketdata.curves import load_yield_curve, save_yield_curve
from concentration_risk.marketdata.fed import FederalReserveCurveClient
from concentration_risk.neural import TrainConfig, ga_neural, load_model, save_model, train
from concentration_risk.portfolio.io import load_portfolio, save_portfolio
from concentration_risk.portfolio.models import ACTUARIAL, MTM, Portfolio
from concentration_risk.portfolio.transitions import load_transition_matrix
from concentration_risk.sampler import SamplerConfig, prepare_real_portfolio, write_portfolio_batch
from concentration_risk.sampler.batch import MANIFEST_NAME
from concentration_risk.settings import deep_merge, load_settings

EXIT_OK = 0
EXIT_USAGE = 1

MODEL_ALIASES = {'act': ACTUARIAL, 'actuarial': ACTUARIAL, 'mtm': MTM}
GA_METHODS = ('exact', 'analytic', 'nn', 'all')
LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'
HANDLER_NAME = 'concentration_risk.cli'

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Argument parser raising instead of exiting, so main can map usage errors to exit 1."""

    def error(self, message):
        raise _UsageError(message, self.format_usage())


class _UsageError(Exception):
    def __init__(self, message: str, usage: str):
        super().__init__(message)
        self.usage = usage


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, help='Simulation seed (overrides settings)')
    common.add_argument('--threads', type=int, help='Worker threads (overrides settings)')
    common.add_argument('--config', help='JSON or TOML settings file merged over the defaults')
    common.add_argument('--output', help='Output file or directory (default: stdout)')
    common.add_argument('--percent', action='store_true', help='Report GA values in percent of exposure')
    common.add_argument('--log-level', default='WARNING',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'])
    common.add_argument('--json-errors', action='store_true', help='Print errors as JSON on stderr')
    common.add_argument('--curve', help='Yield curve JSON (overrides settings)')
    common.add_argument('--matrix', help='Transition matrix CSV in percent (default: shipped matrix)')
    return common


def _model_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--model', required=True, choices=sorted(MODEL_ALIASES), help='Loss model')


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per operation."""
    common = _common_options()
    parser = _Parser(prog='concentration_risk', description='Granularity adjustment of credit portfolios')
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest='command', metavar='command', parser_class=_Parser)
    commands.required = True

    var = commands.add_parser('var', parents=[common], help='Value at risk of the portfolio loss')
    _model_option(var)
    var.add_argument('--portfolio', required=True)
    var.add_argument('--q', type=float)
    var.add_argument('--sims', type=int)
    mode = var.add_mutually_exclusive_group()
    mode.add_argument('--is', dest='method', action='store_const', const='is', help='Importance sampling (default)')
    mode.add_argument('--plain', dest='method', action='store_const', const='plain', help='Plain Monte Carlo')
    var.add_argument('--paths-csv', help='Write per-path loss,weight CSV')
    var.set_defaults(method='is', handler=cmd_var)

    ga = commands.add_parser('ga', parents=[common], help='Granularity adjustment')
    _model_option(ga)
    ga.add_argument('--portfolio', required=True)
    ga.add_argument('--method', choices=GA_METHODS, default='exact')
    ga.add_argument('--q', type=float)
    ga.add_argument('--sims', type=int)
    ga.add_argument('--nn-model', help='Trained model file (methods nn and all)')
    ga.add_argument('--json', action='store_true', help='Print the full result with diagnostics')
    ga.set_defaults(handler=cmd_ga)

    tr = commands.add_parser('train', parents=[common], help='Train a neural GA model')
    _model_option(tr)
    tr.add_argument('--n-iter', type=int)
    tr.add_argument('--sims', type=int, help='Monte Carlo paths per label')
    tr.add_argument('--hidden', help='Comma-separated hidden widths, e.g. 64,64,64')
    tr.add_argument('--epochs', type=int)
    tr.add_argument('--batch-size', type=int)
    tr.add_argument('--learning-rate', type=float)
    tr.add_argument('--max-obligors', type=int)
    tr.add_argument('--label-cache', help='Directory caching labelled portfolios')
    tr.add_argument('--history', help='Training history CSV')
    tr.add_argument('--progress', action='store_true', help='Show progress bars')
    tr.set_defaults(handler=cmd_train)

    sample = commands.add_parser('sample-portfolios', parents=[common], help='Sample synthetic portfolios')
    _model_option(sample)
    sample.add_argument('--count', type=int, required=True)
    sample.set_defaults(handler=cmd_sample)

    ev = commands.add_parser('eval', parents=[common], help='Error tables against Monte Carlo')
    _model_option(ev)
    ev.add_argument('--portfolios', required=True, help='Directory of portfolio CSVs')
    ev.add_argument('--nn-model')
    ev.add_argument('--sims', type=int)
    ev.add_argument('--progress', action='store_true')
    ev.set_defaults(handler=cmd_eval)

    sens = commands.add_parser('sensitivity', parents=[common], help='Sensitivity battery')
    _model_option(sens)
    sens.add_argument('--portfolio', required=True)
    sens.add_argument('--nn-model')
    sens.add_argument('--exact', action='store_true', help='Include the Monte Carlo GA')
    sens.add_argument('--sims', type=int)
    sens.set_defaults(handler=cmd_sensitivity)

    conv = commands.add_parser('convergence', parents=[common], help='Plain vs IS convergence trace')
    _model_option(conv)
    conv.add_argument('--portfolio', required=True)
    conv.add_argument('--k-max', type=int, default=100000)
    conv.add_argument('--block', type=int)
    conv.add_argument('--paths-dir', help='Directory for per-path loss,weight CSVs')
    conv.set_defaults(handler=cmd_convergence)

    th = commands.add_parser('thresholds', parents=[common], help='Dump migration thresholds')
    th.set_defaults(handler=cmd_thresholds)

    prep = commands.add_parser('prepare', parents=[common], help='Actuarial and MtM views of rated exposures')
    prep.add_argument('--exposures', required=True, help='CSV with obligor_id,exposure,rating,elgd')
    prep.set_defaults(handler=cmd_prepare)

    curve = commands.add_parser('curve', parents=[common], help='Fetch a Federal Reserve NSS curve')
    curve.add_argument('--date', required=True, help='ISO date')
    curve.set_defaults(handler=cmd_curve)
    return parser


def _configure_logging(level: str) -> None:
    root = logging.getLogger()
    for handler in list(root.handlers):
        if handler.get_name() == HANDLER_NAME:
            root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.set_name(HANDLER_NAME)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(getattr(logging, level))


def _settings(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {}
    if args.seed is not None:
        overrides['seed'] = args.seed
    if args.threads is not None:
        overrides['threads'] = args.threads
    return load_settings(args.config, overrides)


def _engines(args: argparse.Namespace, settings: Dict[str, Any]) -> EngineContext:
    curve = load_yield_curve(args.curve) if args.curve else None
    matrix = load_transition_matrix(args.matrix, settings['portfolio']['default_label']) if args.matrix else None
    engines = EngineContext.from_settings(settings, curve=curve, matrix=matrix)
    if getattr(args, 'q', None) is not None:
        engines = engines.with_q(args.q)
    if getattr(args, 'sims', None) is not None:
        engines = engines.with_sims(args.sims)
    return engines


def _load(path: str, kind: str, engines: EngineContext) -> Portfolio:
    return load_portfolio(path, kind, matrix=engines.matrix, lgd_nu=engines.lgd_nu,
                          max_obligors=engines.max_obligors, accrual=engines.mtm.accrual if kind == MTM else None)


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        directory = os.path.dirname(os.path.abspath(output))
        os.makedirs(directory, exist_ok=True)
        with open(output, 'w', encoding='utf-8') as f:
            f.write(text if text.endswith('\n') else text + '\n')
    else:
        print(text)


def _emit_frame(frame: pd.DataFrame, output: Optional[str]) -> None:
    _emit(frame.to_csv(index=False), output)


def _json(data: Any) -> str:
    return json.dumps(data, indent=2, default=float)


def cmd_var(args: argparse.Namespace) -> int:
    settings = _settings(args)
    engines = _engines(args, settings)
    kind = MODEL_ALIASES[args.model]
    portfolio = _load(args.portfolio, kind, engines)
    estimate, samples = engines.var(portfolio, args.method)
    if args.paths_csv:
        samples.to_csv(args.paths_csv)
    result = {
        'model_kind': kind,
        'method': args.method,
        'q': engines.q(kind),
        'var': estimate,
        'n_sims': len(samples),
        'effective_sample_size': samples.effective_sample_size(),
        'portfolio_sha256': portfolio.digest(),
    }
    if samples.diagnostics:
        result['diagnostics'] = samples.diagnostics
    _emit(_json(result), args.output)
    return EXIT_OK


def cmd_ga(args: argparse.Namespace) -> int:
    settings = _settings(args)
    engines = _engines(args, settings)
    kind = MODEL_ALIASES[args.model]
    portfolio = _load(args.portfolio, kind, engines)
    if args.method in ('nn', 'all') and not args.nn_model:
        raise InvalidParameterError(f"Method {args.method} needs --nn-model")

    result = GaResult(kind, diagnostics={'portfolio_sha256': portfolio.digest()})
    if args.method in ('exact', 'all'):
        result = result.merge(engines.ga_exact(portfolio))
    if args.method == 'analytic':
        result = result.merge(GaResult(kind, analytic=engines.ga_analytic(portfolio)))
    if args.method in ('nn', 'all'):
        result = result.merge(ga_neural(load_model(args.nn_model, expected_kind=kind), portfolio, engines))

    if args.json or args.method == 'all':
        _emit(_json(result.to_dict(percent=args.percent)), args.output)
    else:
        value = result.value('neural' if args.method == 'nn' else args.method)
        _emit(repr(float(value) * (100.0 if args.percent else 1.0)), args.output)
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    if not args.output:
        raise InvalidParameterError("train needs --output for the model file")
    settings = _settings(args)
    if args.max_obligors:
        limit = args.max_obligors
        sampler = settings['sampler']
        settings = deep_merge(settings, {
            'portfolio': {'max_obligors': limit},
            'sampler': {'n_min': min(sampler['n_min'], limit), 'n_max': min(sampler['n_max'], limit)},
        })
    engines = _engines(args, settings)
    kind = MODEL_ALIASES[args.model]
    hidden = tuple(int(h) for h in args.hidden.split(',')) if args.hidden else None
    cfg = TrainConfig.from_settings(settings, n_iter=args.n_iter, sims_per_label=args.sims, hidden=hidden,
                                    epochs=args.epochs, batch_size=args.batch_size,
                                    learning_rate=args.learning_rate,
                                    label_cache_dir=args.label_cache, history_path=args.history,
                                    progress=args.progress)
    sampler_cfg = SamplerConfig.from_settings(settings)
    model = train(kind, cfg, sampler_cfg, engines.with_sims(cfg.sims_per_label))
    save_model(model, args.output)
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    if not args.output:
        raise InvalidParameterError("sample-portfolios needs --output for the target directory")
    settings = _settings(args)
    engines = _engines(args, settings)
    manifest = write_portfolio_batch(SamplerConfig.from_settings(settings), MODEL_ALIASES[args.model], args.count,
                                     int(settings['seed']), args.output, engines.matrix)
    print(_json({'directory': args.output, 'count': manifest['count'], 'config_sha256': manifest['config_sha256']}))
    return EXIT_OK


def _portfolio_files(directory: str) -> List[str]:
    manifest_path = os.path.join(directory, MANIFEST_NAME)
    if os.path.exists(manifest_path):
        with open(manifest_path, 'r', encoding='utf-8') as f:
            return [os.path.join(directory, name) for name in json.load(f)['files']]
    return sorted(glob.glob(os.path.join(directory, '*.csv')))


def cmd_eval(args: argparse.Namespace) -> int:
    settings = _settings(args)
    engines = _engines(args, settings)
    kind = MODEL_ALIASES[args.model]
    files = _portfolio_files(args.portfolios)
    if not files:
        raise InvalidParameterError(f"No portfolio files in {args.portfolios}")
    portfolios = [_load(path, kind, engines) for path in files]
    model = load_model(args.nn_model, expected_kind=kind) if args.nn_model else None
    section = settings['evaluation']
    engines = engines.with_sims(args.sims or section['mc_sims'])
    report = evaluate_methods(portfolios, engines, model, mc_seed_offset=section['mc_seed_offset'],
                              small_limit=section['small_portfolio_limit'], progress=args.progress)
    report.per_portfolio.insert(1, 'file', [os.path.basename(path) for path in files])
    _write_or_print(report, args.output)
    return EXIT_OK


def _write_or_print(report, output: Optional[str]) -> None:
    if output:
        write_report(report, output)
    else:
        print(render_text(report), end='')


def cmd_sensitivity(args: argparse.Namespace) -> int:
    settings = _settings(args)
    engines = _engines(args, settings)
    kind = MODEL_ALIASES[args.model]
    portfolio = _load(args.portfolio, kind, engines)
    model = load_model(args.nn_model, expected_kind=kind) if args.nn_model else None
    report = sensitivity_battery(portfolio, engines, model, include_exact=args.exact,
                                 bump=settings['evaluation']['weight_bump'])
    if args.percent:
        for frame in report.frames().values():
            for column in [c for c in frame.columns if c.startswith(('ga_', 'delta_'))]:
                frame[column] = frame[column] * 100.0
    _write_or_print(report, args.output)
    return EXIT_OK


def cmd_convergence(args: argparse.Namespace) -> int:
    settings = _settings(args)
    engines = _engines(args, settings)
    kind = MODEL_ALIASES[args.model]
    portfolio = _load(args.portfolio, kind, engines)
    trace = convergence_trace(portfolio, engines, args.k_max, args.block or settings['evaluation']['trace_block'],
                              paths_dir=args.paths_dir)
    _emit_frame(trace, args.output)
    return EXIT_OK


def cmd_thresholds(args: argparse.Namespace) -> int:
    settings = _settings(args)
    engines = _engines(args, settings)
    _emit_frame(thresholds(engines.matrix).to_frame().reset_index(), args.output)
    return EXIT_OK


def cmd_prepare(args: argparse.Namespace) -> int:
    if not args.output:
        raise InvalidParameterError("prepare needs --output for the target directory")
    settings = _settings(args)
    engines = _engines(args, settings)
    frame = pd.read_csv(args.exposures, dtype={'obligor_id': str, 'rating': str})
    real = settings['real_portfolio']
    actuarial, mtm = prepare_real_portfolio(frame, engines.matrix, coupon=real['coupon'], maturity=real['maturity'],
                                            xi=engines.crplus.xi, q=engines.crplus.q, lgd_nu=engines.lgd_nu,
                                            max_obligors=engines.max_obligors)
    save_portfolio(actuarial, os.path.join(args.output, 'actuarial.csv'))
    save_portfolio(mtm, os.path.join(args.output, 'mtm.csv'))
    print(_json({'directory': args.output, 'omega_clamped': actuarial.metadata['omega_clamped'],
                 'omega_zero_pd': actuarial.metadata['omega_zero_pd']}))
    return EXIT_OK


def cmd_curve(args: argparse.Namespace) -> int:
    curve = FederalReserveCurveClient().fetch_nss(args.date)
    if args.output:
        save_yield_curve(curve, args.output)
    else:
        print(str(curve))
    return EXIT_OK


def _report_error(error: ConcentrationRiskError, json_errors: bool) -> None:
    if json_errors:
        print(json.dumps(error.to_dict(), default=str), file=sys.stderr)
    else:
        print(f"error: {error.message}", file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one command.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])

    Returns:
        int: Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"{e.usage}error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return EXIT_OK if not e.code else EXIT_USAGE

    _configure_logging(args.log_level)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except ConcentrationRiskError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        _report_error(e, args.json_errors)
        return e.exit_code
    except requests.RequestException as e:
        error = MarketDataError(f"Download failed: {str(e)}")
        logger.error(error.message)
        _report_error(error, args.json_errors)
        return error.exit_code
