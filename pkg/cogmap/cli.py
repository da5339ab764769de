"""
Command-line interface for cognitive-map experiments.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from . import __version__
from .config.manager import ConfigurationManager
from .models.config import ExperimentConfig, Variant
from .models.exceptions import CogMapError, ConfigurationError
from .models.run_result import ExperimentReport, StageStatus
from .orchestrator import ExperimentOrchestrator
from .services.error_handler import ErrorHandler

COMMANDS = ("gen-dataset", "train", "analyze", "dream", "sweep-alpha", "report")


def validate_config_file(config_path: str) -> str:
    """
    Validate that the configuration file exists and is YAML or JSON.

    Raises:
        argparse.ArgumentTypeError: If the file doesn't exist or has another suffix
    """
    path = Path(config_path)
    if not path.is_file():
        raise argparse.ArgumentTypeError(f"Configuration file does not exist: {config_path}")
    if path.suffix.lower() not in ['.yaml', '.yml', '.json']:
        raise argparse.ArgumentTypeError(f"Configuration file must be YAML or JSON: {config_path}")
    return str(path.absolute())


def float_list(value: str) -> List[float]:
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected comma-separated numbers, got '{value}'")


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', '-c', type=validate_config_file,
                        help='Path to configuration file (YAML or JSON format)')
    common.add_argument('--verbose', '-v', action='store_true',
                        help='Enable verbose (DEBUG) logging')
    common.add_argument('--log-file', type=str, help='Path to the JSON log file')
    common.add_argument('--jobs', '-j', type=int, help='Grid cells run in parallel')
    common.add_argument('--experiment', type=str, help='Experiment directory name')
    return common


def _cell_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--dataset', type=str, help='Dataset file')
    parser.add_argument('--variant', nargs='+', help='VAE, VAEGAN_pixel or VAEGAN_layer')
    parser.add_argument('--tau', type=int, nargs='+', help='Prediction offsets')
    parser.add_argument('--zdim', type=int, nargs='+', help='Latent dimensions')
    parser.add_argument('--seed', type=int, nargs='+', help='Training seeds')
    parser.add_argument('--out', type=str, help='Output root (overrides COGMAP_OUT)')


def create_argument_parser() -> argparse.ArgumentParser:
    """
    Create and configure the argument parser for the CLI.

    Returns:
        argparse.ArgumentParser: Configured argument parser
    """
    parser = argparse.ArgumentParser(
        prog='cogmap',
        description='Cognitive-map experiments: maze datasets, VAE and VAE/GAN predictors, '
                    'latent-space analyses and closed-loop dynamics',
        epilog='''
Examples:
  %(prog)s gen-dataset --out ./data/maze.cgds --frames 480 --size 64
  %(prog)s train --config config.yaml --variant VAEGAN_pixel --tau 5 --seed 1
  %(prog)s dream --config config.yaml --tau 0 5 30
  %(prog)s report --config config.yaml --jobs 4
        ''',
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--create-sample-config', metavar='PATH',
                        help='Write a configuration file with every default and exit')

    common = _common_parser()
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')

    gen = commands.add_parser('gen-dataset', parents=[common], help='Render the maze dataset')
    gen.add_argument('--out', type=str, help='Dataset file to write')
    gen.add_argument('--frames', type=int, help='Number of frames')
    gen.add_argument('--size', type=int, choices=[16, 32, 64], help='Frame size in pixels')
    gen.add_argument('--seed', type=int, help='Junction decision seed')
    gen.add_argument('--force', action='store_true', help='Overwrite an existing dataset')

    train = commands.add_parser('train', parents=[common], help='Train the grid cells')
    _cell_arguments(train)
    train.add_argument('--alpha', type=float, help='GAN weight (ignored for VAE)')
    train.add_argument('--iters', type=int, help='Training iterations')
    train.add_argument('--resume', type=str, help='Checkpoint to resume a single cell from')

    analyze = commands.add_parser('analyze', parents=[common], help='Latent-space analyses')
    _cell_arguments(analyze)
    analyze.add_argument('--alpha', type=float, help='GAN weight of the analyzed cells')
    analyze.add_argument('--iters', type=int, help='Final training iteration')
    analyze.add_argument('--untrained', action='store_true',
                         help='Analyze freshly initialized bundles of cells without checkpoints')

    dream = commands.add_parser('dream', parents=[common], help='Closed-loop experiments')
    _cell_arguments(dream)
    dream.add_argument('--alpha', type=float, help='GAN weight of the cells')
    dream.add_argument('--iters', type=int, help='Final training iteration')
    dream.add_argument('--iterations', type=int, help='Closed-loop iterations per run')
    dream.add_argument('--stride', type=int, help='Frames between start frames')

    sweep = commands.add_parser('sweep-alpha', parents=[common], help='GAN-weight sweep')
    sweep.add_argument('--dataset', type=str, help='Dataset file')
    sweep.add_argument('--alphas', type=float_list, help='Comma-separated GAN weights')
    sweep.add_argument('--tau', type=int, help='Prediction offset')
    sweep.add_argument('--variant', type=str, help='Variant trained at every alpha')
    sweep.add_argument('--seed', type=int, nargs='+', help='Seeds')
    sweep.add_argument('--iters', type=int, help='Training iterations')
    sweep.add_argument('--out', type=str, help='Output root (overrides COGMAP_OUT)')

    report = commands.add_parser('report', parents=[common],
                                 help='Run the whole pipeline and assemble the report tables')
    _cell_arguments(report)
    report.add_argument('--iters', type=int, help='Training iterations')
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Map parsed flags to configuration fields; absent flags map to None."""
    get = lambda name: getattr(args, name, None)  # noqa: E731
    overrides: Dict[str, Any] = {
        'jobs': get('jobs'),
        'experiment': get('experiment'),
        'logging_file_path': get('log_file'),
        'logging_level': 'DEBUG' if get('verbose') else None,
        'iters': get('iters'),
        'alpha': get('alpha'),
    }
    if args.command == 'gen-dataset':
        overrides.update(dataset=get('out'), frames=get('frames'), size=get('size'),
                         dataset_seed=get('seed'))
    elif args.command == 'sweep-alpha':
        overrides.update(dataset=get('dataset'), out=get('out'), sweep_alphas=get('alphas'),
                         sweep_tau=get('tau'), sweep_variant=get('variant'), seeds=get('seed'))
    else:
        overrides.update(dataset=get('dataset'), out=get('out'), variants=get('variant'),
                         taus=get('tau'), zdims=get('zdim'), seeds=get('seed'),
                         dream_iterations=get('iterations'), start_stride=get('stride'))
    return overrides


def warn_ignored_alpha(args: argparse.Namespace, config: ExperimentConfig) -> None:
    if getattr(args, 'alpha', None) is None:
        return
    ignored = [v for v in config.variants if Variant.parse(v) is not Variant.VAEGAN_PIXEL]
    if ignored:
        logging.getLogger(__name__).warning(
            f"--alpha is ignored for {', '.join(ignored)}",
            extra={'context': {'alpha': args.alpha, 'variants': ignored}})


def run_command(args: argparse.Namespace, orchestrator: ExperimentOrchestrator) -> ExperimentReport:
    command = args.command
    if command == 'gen-dataset':
        orchestrator.generate_dataset(force=args.force)
    elif command == 'train':
        cells = orchestrator.config.grid_cells()
        if args.resume and len(cells) != 1:
            raise ConfigurationError("--resume needs exactly one grid cell "
                                     "(give --variant, --tau, --zdim and --seed)",
                                     error_code="RESUME_NEEDS_CELL", context={"cells": len(cells)})
        orchestrator.train(cells, resume_from=args.resume)
    elif command == 'analyze':
        orchestrator.analyze(allow_untrained=args.untrained)
    elif command == 'dream':
        orchestrator.dream()
    elif command == 'sweep-alpha':
        orchestrator.sweep()
    elif command == 'report':
        return orchestrator.run_pipeline()
    return orchestrator.finish()


def print_summary(report: ExperimentReport) -> None:
    print("\n" + "=" * 60)
    print("EXPERIMENT COMPLETED")
    print("=" * 60)
    print(f"Success Rate: {report.success_rate:.1f}%")
    print(f"Total Stages: {report.total_stages}")
    print(f"Execution Time: {report.total_execution_time:.2f}s")


def execute(args: argparse.Namespace) -> int:
    """
    Execute one subcommand.

    Returns:
        int: 0 on success, 2 when some grid cells failed, 1 on error, 130 on interrupt
    """
    logger = logging.getLogger(__name__)
    handler = ErrorHandler(logger)
    orchestrator: Optional[ExperimentOrchestrator] = None
    try:
        config = ConfigurationManager().resolve(args.config, collect_overrides(args))
        orchestrator = ExperimentOrchestrator(config)
        orchestrator.initialize()
        warn_ignored_alpha(args, config)

        report = run_command(args, orchestrator)
        stamp = report.start_time.strftime('%Y%m%d_%H%M%S')
        logs = orchestrator.experiment_dir / "runs"
        orchestrator.generate_manifest(str(logs / f"{args.command}_manifest_{stamp}.json"))
        orchestrator.save_summary(str(logs / f"{args.command}_summary_{stamp}.txt"))
        print_summary(report)

        status = report.overall_status
        if status == StageStatus.FAILED:
            print("✗ Every stage failed", file=sys.stderr)
            return 1
        if status == StageStatus.PARTIAL:
            print(f"⚠ {report.failed_stages + report.partial_stages} stages failed")
            return 2
        print("✓ All stages completed successfully")
        return 0

    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        print(f"Configuration Error: {e}", file=sys.stderr)
        for step in handler.get_error_remediation_steps(e):
            print(f"  - {step}", file=sys.stderr)
        return 1

    except CogMapError as e:
        logger.error(f"{type(e).__name__}: {e}", extra={'context': e.context})
        print(f"Error: {e}", file=sys.stderr)
        for step in handler.get_error_remediation_steps(e):
            print(f"  - {step}", file=sys.stderr)
        return 1

    except KeyboardInterrupt:
        logger.warning("Interrupted by user")
        print("\nInterrupted by user", file=sys.stderr)
        return 130

    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        print(f"Unexpected Error: {e}", file=sys.stderr)
        print("Please check the logs for more details.", file=sys.stderr)
        return 1

    finally:
        if orchestrator is not None:
            orchestrator.cleanup()


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main entry point for the CLI application.

    Returns:
        int: Exit code
    """
    parser = create_argument_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if args.create_sample_config:
        ConfigurationManager().create_sample_config(args.create_sample_config)
        print(f"Sample configuration written to {args.create_sample_config}")
        return 0
    if not args.command:
        parser.print_help()
        return 1
    return execute(args)


if __name__ == '__main__':
    sys.exit(main())
