import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from core.errors import TorsionError
from core.materials import PRESETS
from utils.helpers import (
    OUTPUT_FORMATS,
    parse_assignments,
    parse_grid,
    parse_number,
    thread_cap,
    to_json,
    validate_run_config,
)
from workflow.workflow_engine import COMMANDS, RunConfig, WorkflowEngine, build_run_workflow

logger = logging.getLogger(__name__)

EXIT_MODULE_ERROR = 1
EXIT_USAGE_ERROR = 2
LOG_FORMAT = '%(asctime)s %(name)s %(levelname)s %(message)s'


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):

    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='torsion-lab',
                     description="Torsional stiffness of generalized continua")
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('--model', action='append', default=[],
                        help="Model tag (repeat for compare)")
    parser.add_argument('--params', help="JSON parameter document")
    parser.add_argument('--preset', choices=sorted(PRESETS),
                        help="Named parameter set")
    parser.add_argument('--set', dest='overrides', action='append', default=[],
                        help="key=value override, e.g. mu_c=1/2 or Lc=inf")
    parser.add_argument('--R', type=float, help="Cylinder radius")
    parser.add_argument('--Lc-grid', dest='Lc_grid', help="min:max:count[:log]")
    parser.add_argument('--vary', help="NAME=v1,v2,... one curve per value (curve only)")
    parser.add_argument('--source', choices=['closed_form', 'oracle'], default='closed_form',
                        help="Profile source (profile only)")
    parser.add_argument('--samples', type=int, default=101, help="Radial samples (profile only)")
    parser.add_argument('--out', help="Output file; stdout when omitted")
    parser.add_argument('--format', choices=OUTPUT_FORMATS,
                        help="Output format (default csv, json for fit)")
    parser.add_argument('--seed', type=int, help="Seed of synthetic fit observations")
    parser.add_argument('--data', help="Observation CSV for fit")
    parser.add_argument('--fit-config', dest='fit_config', help="JSON fit configuration")
    parser.add_argument('--strict', action='store_true',
                        help="Fail on an unidentifiable fit")
    parser.add_argument('--allow-indefinite', dest='allow_indefinite', action='store_true',
                        help="Accept parameters failing the positivity check")
    parser.add_argument('--verbose', '-v', action='store_true')
    return parser


def _vary(text: Optional[str]):
    if not text:
        return None, None
    if '=' not in text:
        raise UsageError(f"--vary must read NAME=v1,v2,..., got {text!r}")
    name, values = text.split('=', 1)
    return name.strip(), [parse_number(v) for v in values.split(',') if v.strip()]


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fit_config = None
    if args.fit_config:
        with open(args.fit_config, 'r', encoding='utf-8') as f:
            fit_config = json.load(f)
    vary, vary_values = _vary(args.vary)
    R = args.R
    if R is None and not args.preset:
        R = 1.0
    return RunConfig(
        command=args.command,
        models=list(args.model),
        preset=args.preset,
        params_file=args.params,
        overrides=parse_assignments(args.overrides),
        R=R,
        Lc_grid=parse_grid(args.Lc_grid) if args.Lc_grid else None,
        out=args.out,
        format=args.format or ('json' if args.command == 'fit' else 'csv'),
        seed=args.seed,
        allow_indefinite=args.allow_indefinite,
        data_file=args.data,
        fit_config=fit_config,
        vary=vary,
        vary_values=vary_values,
        source=args.source,
        n_samples=args.samples,
        strict=args.strict,
        max_workers=thread_cap(),
    )


def _check(config: RunConfig):
    if config.command == 'fit':
        if config.fit_config is None:
            raise UsageError("fit needs --fit-config")
        files = [config.data_file]
        R = 1.0
    else:
        files = [config.params_file]
        R = config.R if config.R is not None else 1.0
        if config.command in ('curve', 'profile', 'limits') and not (config.models or config.preset):
            raise UsageError(f"{config.command} needs --model or --preset")
        if config.command == 'compare' and not config.models:
            raise UsageError("compare needs at least one --model")
    report = validate_run_config(config.command, R, config.Lc_grid, files, config.format)
    for warning in report['warnings']:
        logger.warning(warning)
    if not report['valid']:
        raise UsageError("; ".join(report['issues']))


def _fail(payload, status: int) -> int:
    sys.stderr.write(to_json(payload) + '\n')
    return status


def run(config: RunConfig) -> int:
    out = Path(config.out) if config.out else None
    existed = out is not None and out.exists()

    result = WorkflowEngine(build_run_workflow(config)).execute()
    for entry in result.get('execution_log', []):
        logger.debug("block %s (%s): %s", entry['block_id'], entry['block_type'], entry['status'])
    if result['status'] != 'success':
        if out is not None and out.exists() and not existed:
            out.unlink()
        return _fail(result['error'], EXIT_MODULE_ERROR)

    results = result['results']
    if out is None:
        sys.stdout.write(results['export']['text'])
    if config.command == 'verify':
        deviation = results['verify']['max_deviation']
        sys.stderr.write(f"max relative deviation: {deviation:.3e}\n")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format=LOG_FORMAT, stream=sys.stderr)
        config = config_from_args(args)
        _check(config)
    except UsageError as e:
        return _fail({'error': 'UsageError', 'message': str(e)}, EXIT_USAGE_ERROR)
    except TorsionError as e:
        return _fail(e.to_dict(), EXIT_USAGE_ERROR)
    except (OSError, json.JSONDecodeError) as e:
        return _fail({'error': type(e).__name__, 'message': str(e)}, EXIT_USAGE_ERROR)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
