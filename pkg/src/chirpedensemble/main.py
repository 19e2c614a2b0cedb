import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from chirpedensemble.config import SUPPORTED_FORMATS, settings
from chirpedensemble.core.conditions import check_prop2, check_theorem1
from chirpedensemble.exceptions import ChirpedEnsembleError, ConfigError, NumericError
from chirpedensemble.logging_config import setup_logging
from chirpedensemble.schemas.config_schemas import RunConfig
from chirpedensemble.schemas.record_schemas import RunResult
from chirpedensemble.services import frames_service, persistence_service, sweep_service
from chirpedensemble.services.config_loader import ensemble_from_config, load_config, pulses_from_config, resolve_eps1
from chirpedensemble.utils.filename_utils import FilenameData, generate_output_filename

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONDITIONS = 3
EXIT_NUMERIC = 4


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, type=Path, help="TOML or JSON run configuration.")
    common.add_argument("--out", type=Path, default=None, help="Output directory.")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--steps-per-period", type=int, default=None, dest="steps_per_period")
    common.add_argument("--samples", type=int, default=None, dest="n_samples")
    common.add_argument(
        "--format",
        action="append",
        choices=SUPPORTED_FORMATS,
        default=None,
        dest="formats",
        help="Output format; repeat for several.",
    )
    common.add_argument("--verbose", action="store_true", help="Log at DEBUG level.")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Chirped-pulse population inversion for ensembles of quantum systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", parents=[common], help="Check the gap conditions over the box.")
    check.add_argument("--strict", action="store_true", help="Exit with status 3 when a condition fails.")
    check.add_argument("--prop2", action="store_true", help="Also check the doubled-window condition.")
    check.add_argument("--margin", type=float, default=0.0)
    check.add_argument("--grid", action="store_true", help="Evaluate on a grid instead of box vertices.")

    for name, help_text in (
        ("simulate", "Propagate one system and write its trajectory."),
        ("sweep", "Fidelity curves for every configured alpha."),
        ("concat", "Populations under the concatenated pulse."),
    ):
        command = sub.add_parser(name, parents=[common], help=help_text)
        command.add_argument("--eps1", type=float, default=None, help="Overrides run.eps1.")

    sub.add_parser("scaling", parents=[common], help="Final distance along run.eps1_list and its slope.")

    frames = sub.add_parser("frames", parents=[common], help="Frame-cascade diagnostics per eps.")
    frames.add_argument("--no-residuals", action="store_true", dest="no_residuals")
    frames.add_argument("--no-adiabatic", action="store_true", dest="no_adiabatic")
    frames.add_argument(
        "--propagation", action="store_true", help="Also compare full and RWA propagations."
    )
    return parser


def _output_dir(args: argparse.Namespace, config: RunConfig) -> Path:
    if args.out is not None:
        return args.out
    return Path(config.output.directory or settings.OUTPUT_DIR)


def _formats(args: argparse.Namespace, config: RunConfig) -> List[str]:
    return list(dict.fromkeys(args.formats or config.output.formats or settings.DEFAULT_FORMATS))


def _database_url(args: argparse.Namespace) -> Optional[str]:
    # --out keeps the record store next to the other files
    return None if args.out is not None else settings.DATABASE_URL


def _cmd_check(args: argparse.Namespace, config: RunConfig) -> int:
    ens = ensemble_from_config(config)
    eps1 = resolve_eps1(config)
    pulses = pulses_from_config(config, eps1, config.run.eps2_for(eps1))
    checker = check_prop2 if args.prop2 else check_theorem1
    all_hold = True
    for index, (segment, pulse) in enumerate(zip(config.pulse.segments, pulses)):
        p, q = (segment.p, segment.q) if segment.p is not None else (config.run.p, config.run.q)
        report = checker(
            ens,
            p,
            q,
            pulse.v0,
            pulse.v1,
            margin=args.margin,
            method="grid" if args.grid else "vertex",
        )
        all_hold = all_hold and report.holds
        print(f"segment {index + 1}: pair ({p}, {q}), window ({pulse.v0:g}, {pulse.v1:g})")
        print(report.as_table())
    if not all_hold and args.strict:
        logger.error("Condition check failed.")
        return EXIT_CONDITIONS
    return EXIT_OK


def _finish(result: RunResult, args: argparse.Namespace, config: RunConfig) -> int:
    persistence_service.persist(
        result, _output_dir(args, config), _formats(args, config), database_url=_database_url(args)
    )
    if result.degraded:
        logger.error("At least one propagation exceeded the norm drift tolerance.")
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace, config: RunConfig) -> int:
    resolution = sweep_service.Resolution.from_config(config, args.steps_per_period, args.n_samples, args.workers)
    result, traj = sweep_service.run_simulate(config, resolution, args.eps1)
    record = result.records[0]
    name = generate_output_filename(
        FilenameData("trajectory", config.run.p, config.run.q, record.eps1, record.eps2, ".csv")
    )
    persistence_service.trajectory_to_csv(traj, _output_dir(args, config) / name)
    print(f"final fidelity {record.fidelity:.6f}, distance {record.distance:.3e}")
    return _finish(result, args, config)


def _cmd_sweep(args: argparse.Namespace, config: RunConfig) -> int:
    resolution = sweep_service.Resolution.from_config(config, args.steps_per_period, args.n_samples, args.workers)
    return _finish(sweep_service.run_fid_curves(config, resolution, args.eps1), args, config)


def _cmd_concat(args: argparse.Namespace, config: RunConfig) -> int:
    resolution = sweep_service.Resolution.from_config(config, args.steps_per_period, args.n_samples, args.workers)
    return _finish(sweep_service.run_concat(config, resolution, args.eps1), args, config)


def _cmd_scaling(args: argparse.Namespace, config: RunConfig) -> int:
    resolution = sweep_service.Resolution.from_config(config, args.steps_per_period, args.n_samples, args.workers)
    result = sweep_service.run_scaling(config, resolution)
    if result.fit is not None:
        print(f"slope {result.fit.slope:.4f} (residual {result.fit.residual:.2e}, reliable={result.fit.reliable})")
    return _finish(result, args, config)


def _cmd_frames(args: argparse.Namespace, config: RunConfig) -> int:
    steps = args.steps_per_period or config.run.steps_per_period or settings.DEFAULT_STEPS_PER_PERIOD
    rows = frames_service.run_frames(
        config,
        steps_per_period=steps,
        include_residuals=not args.no_residuals,
        include_propagation=args.propagation,
        include_adiabatic=not args.no_adiabatic,
    )
    formats = [f for f in _formats(args, config) if f != "sqlite"] or ["csv"]
    persistence_service.persist_lemmas(rows, _output_dir(args, config), formats)
    return EXIT_OK


COMMANDS = {
    "check": _cmd_check,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "concat": _cmd_concat,
    "scaling": _cmd_scaling,
    "frames": _cmd_frames,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging("DEBUG" if args.verbose else settings.LOG_LEVEL)
    logger.info(f"Starting {settings.APP_NAME} {args.command}...")
    try:
        config = load_config(args.config)
        return COMMANDS[args.command](args, config)
    except ConfigError as e:
        position = f" (line {e.line}, column {e.column})" if e.line is not None else ""
        field = f" [field {e.field}]" if e.field else ""
        logger.error(f"Configuration error{position}{field}: {e}")
        return EXIT_CONFIG
    except NumericError as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERIC
    except ChirpedEnsembleError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_CONFIG
    except Exception:
        logger.exception(f"Unexpected failure in '{args.command}'.")
        return 1


if __name__ == "__main__":
    sys.exit(main())
