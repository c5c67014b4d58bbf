#!/usr/bin/env python3
"""
Main entry point for the p-elastica toolkit

Subcommands:
    special  evaluate a p-elliptic special function
    curve    build a curve and write it as CSV, JSON or SVG
    hooked   classify and verify a hooked p-elastica
    probe    run the discrete stability probe on a flat-core curve
    verify   run the identity suite

Exit status is 0 on success, 1 on invalid input or unwritable output, and
2 on numerical failure (including failed identity or boundary checks).
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, ValidationError

from config import LOGGING_CONFIG, default_output_dir, load_probe_settings, validate_config
from utils import pelliptic
from utils.curve_factory import FAMILIES, build_curve_from_parameters
from utils.curves import loop_lambda
from utils.errors import ConfigError, DomainError, NumericalError
from utils.hooked import HookedProblem, build_hooked_report, flatcore_constant
from utils.identity_suite import CHECKS, run_identity_suite
from utils.serialization import (
    format_float,
    to_jsonable,
    write_curve_csv,
    write_curve_json,
    write_json,
    write_probe_csv,
    write_rows_csv,
    write_suite_csv,
    write_trajectories,
)
from utils.stability import probe_stability
from utils.svg_render import render_svg

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_NUMERICAL = 2

Subcommand = Literal["special", "curve", "hooked", "probe", "verify"]
OutputFormat = Literal["csv", "json", "svg"]

DEFAULT_FORMATS = {"special": "json", "curve": "csv", "hooked": "json", "probe": "json", "verify": "json"}
COMMON_KEYS = {"subcommand", "seed", "log_level", "out", "format", "tracked", "trajectories"}

SPECIAL_FUNCTIONS: Dict[str, Tuple[Callable[..., float], Tuple[str, ...]]] = {
    "F1p": (pelliptic.F1p, ("x", "q")),
    "K1p": (pelliptic.K1p, ("q",)),
    "E1p_inc": (pelliptic.E1p_inc, ("x", "q")),
    "E1p": (pelliptic.E1p, ("q",)),
    "Qp": (pelliptic.Qp, ("q",)),
    "solve_modulus": (pelliptic.solve_modulus, ("r",)),
    "am1p": (pelliptic.am1p, ("x", "q")),
    "snp": (pelliptic.snp, ("x", "q")),
    "cnp": (pelliptic.cnp, ("x", "q")),
    "cnp_derivative": (pelliptic.cnp_derivative, ("x", "q")),
    "sechp": (pelliptic.sechp, ("x",)),
    "sechp_derivative": (pelliptic.sechp_derivative, ("x",)),
    "tanhp": (pelliptic.tanhp, ("x",)),
    "cn_power_integral": (pelliptic.cn_power_integral, ("q",)),
    "cn_power_closed_form": (pelliptic.cn_power_closed_form, ("q",)),
    "flatcore_constant": (flatcore_constant, ()),
    "loop_lambda": (loop_lambda, ()),
}


class CliConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    subcommand: Subcommand
    parameters: Dict[str, Any]
    output_path: Optional[Path] = None
    format: OutputFormat = "json"
    seed: Optional[int] = None
    log_level: str = "INFO"
    tracked: bool = False
    trajectories: Optional[Path] = None

    def resolved_output(self) -> Path:
        if self.output_path is not None:
            return self.output_path
        return default_output_dir() / f"{self.subcommand}.{self.format}"


class CliArgumentParser(argparse.ArgumentParser):
    """Argument errors raise ConfigError instead of exiting"""

    def error(self, message):
        raise ConfigError(message)


def setup_logging(log_level: str = "INFO"):
    """Configure logging for the application"""
    log_file = Path(LOGGING_CONFIG["file"])
    log_file.parent.mkdir(parents=True, exist_ok=True)

    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format=LOGGING_CONFIG["format"],
        handlers=[
            logging.FileHandler(log_file),
            logging.StreamHandler(sys.stdout)
        ],
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    common = CliArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="Seed for every random draw (default: probe configuration)")
    common.add_argument("--log-level", type=str, default=LOGGING_CONFIG["level"],
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Set logging level (default: INFO)")
    common.add_argument("--out", type=Path, help="Output file (default: $PELASTICA_OUTPUT_DIR/<subcommand>.<format>)")
    common.add_argument("--format", type=str, choices=["csv", "json", "svg"], help="Output format")

    parser = CliArgumentParser(
        prog="pelastica",
        description="Degenerate p-elastica toolkit: special functions, curves, hooked curves and stability probes",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=CliArgumentParser)

    special = sub.add_parser("special", parents=[common], help="Evaluate a p-elliptic special function")
    special.add_argument("--p", type=float, required=True)
    special.add_argument("--fn", type=str, required=True, choices=sorted(SPECIAL_FUNCTIONS))
    special.add_argument("--q", type=float)
    special.add_argument("--x", type=float)
    special.add_argument("--r", type=float)

    curve = sub.add_parser("curve", parents=[common], help="Build a curve")
    family = curve.add_mutually_exclusive_group(required=True)
    for name in FAMILIES:
        family.add_argument(f"--{name.replace('_', '-')}", dest="family", action="store_const", const=name)
    curve.add_argument("--p", type=float)
    curve.add_argument("--q", type=float)
    curve.add_argument("--s-lo", type=float)
    curve.add_argument("--s-hi", type=float)
    curve.add_argument("--sign", type=str, choices=["+", "-"])
    curve.add_argument("--L", type=float)
    curve.add_argument("--ell", type=float)
    curve.add_argument("--n", type=int)
    curve.add_argument("--N", type=int)
    curve.add_argument("--signs", type=str)
    curve.add_argument("--flat-lengths", type=float, nargs="+")
    curve.add_argument("--uniform", action="store_true", help="Equal flat lengths from --r")
    curve.add_argument("--r", type=float)
    curve.add_argument("--mirrored", action="store_true")
    curve.add_argument("--M", type=int, help="Samples per piece")

    hooked = sub.add_parser("hooked", parents=[common], help="Classify and verify a hooked p-elastica")
    hooked.add_argument("--p", type=float, required=True)
    hooked.add_argument("--ell", type=float, required=True)
    hooked.add_argument("--L", type=float, required=True)
    hooked.add_argument("--n", type=int, default=1)
    hooked.add_argument("--signs", type=str)
    hooked.add_argument("--mirrored", action="store_true")
    hooked.add_argument("--M", type=int, default=1000)

    probe = sub.add_parser("probe", parents=[common], help="Run the stability probe")
    probe.add_argument("--config", type=str, help="JSON probe configuration")
    probe.add_argument("--p", type=float)
    probe.add_argument("--N", type=int)
    probe.add_argument("--signs", type=str)
    probe.add_argument("--flat-lengths", type=float, nargs="+")
    probe.add_argument("--uniform", action="store_true")
    probe.add_argument("--r", type=float)
    probe.add_argument("--eps", type=float)
    probe.add_argument("--slide", type=float, help="Fraction of the length each seed slides the curve along itself")
    probe.add_argument("--seeds", type=int)
    probe.add_argument("--M", type=int)
    probe.add_argument("--max-iter", type=int)
    probe.add_argument("--gtol", type=float)
    probe.add_argument("--workers", type=int)
    probe.add_argument("--tracked", action="store_true", help="Run as a tracked ZenML pipeline")
    probe.add_argument("--trajectories", type=Path, help="Directory for per-seed trajectory CSVs")

    verify = sub.add_parser("verify", parents=[common], help="Run the identity suite")
    verify.add_argument("--checks", nargs="*", choices=sorted(CHECKS))
    verify.add_argument("--tracked", action="store_true", help="Run as a tracked ZenML pipeline")

    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> CliConfig:
    args = build_parser().parse_args(argv)
    values = vars(args)
    fmt = values.get("format")
    if fmt is None and values.get("out") is not None and values["out"].suffix.lstrip(".") in ("csv", "json", "svg"):
        fmt = values["out"].suffix.lstrip(".")
    try:
        return CliConfig(
            subcommand=args.subcommand,
            parameters={k: v for k, v in values.items() if k not in COMMON_KEYS},
            output_path=values.get("out"),
            format=fmt or DEFAULT_FORMATS[args.subcommand],
            seed=values.get("seed"),
            log_level=values.get("log_level") or "INFO",
            tracked=bool(values.get("tracked")),
            trajectories=values.get("trajectories"),
        )
    except ValidationError as e:
        raise ConfigError(str(e)) from e


def _run_special(config: CliConfig) -> int:
    params = config.parameters
    fn, arg_names = SPECIAL_FUNCTIONS[params["fn"]]
    missing = [name for name in arg_names if params.get(name) is None]
    if missing:
        raise ConfigError(f"{params['fn']} needs --{', --'.join(missing)}")
    args = [params[name] for name in arg_names]
    value = float(fn(params["p"], *args))
    print(format_float(value))

    if config.output_path is not None:
        record = {"fn": params["fn"], "p": params["p"], **{name: params[name] for name in arg_names}, "value": value}
        if config.format == "json":
            write_json(record, config.output_path)
        elif config.format == "csv":
            write_rows_csv([record], list(record), config.output_path)
        else:
            raise ConfigError("special values cannot be rendered as SVG")
    return EXIT_OK


def _write_curve(curve, config: CliConfig, extra: Optional[Dict[str, Any]] = None) -> Path:
    path = config.resolved_output()
    if config.format == "csv":
        return write_curve_csv(curve, path)
    if config.format == "svg":
        return render_svg(curve, path)
    return write_curve_json(curve, path, extra)


def _run_curve(config: CliConfig) -> int:
    params = dict(config.parameters)
    if params.get("family") == "flatcore" and params.get("uniform"):
        params["flat_lengths"] = None
    curve = build_curve_from_parameters(params)
    path = _write_curve(curve, config)
    print(f"{params['family']} curve: length={format_float(curve.length)}, samples={len(curve.s)} -> {path}")
    return EXIT_OK


def _run_hooked(config: CliConfig) -> int:
    params = config.parameters
    prob = HookedProblem(p=params["p"], ell=params["ell"], L=params["L"])
    report, curve = build_hooked_report(prob, n=params["n"], M=params["M"],
                                        signs=params.get("signs"), mirrored=params["mirrored"])
    payload = {"problem": prob.model_dump(), "mirrored": params["mirrored"], **report}
    if config.format == "json":
        path = write_json(payload, config.resolved_output())
    else:
        path = _write_curve(curve, config)

    bc = report["bc_report"]
    print(f"branch={report['branch']} n={report['n']} "
          f"energy_closed_form={format_float(report['energy_closed_form'])} "
          f"energy_quadrature={format_float(report['energy_quadrature'])} "
          f"bc={'pass' if bc['pass'] else 'fail'} -> {path}")
    return EXIT_OK if bc["pass"] else EXIT_NUMERICAL


def _probe_overrides(config: CliConfig) -> Dict[str, Any]:
    params = config.parameters
    overrides = {
        "p": params.get("p"),
        "N": params.get("N"),
        "signs": params.get("signs"),
        "flat_lengths": params.get("flat_lengths"),
        "r": params.get("r"),
        "eps": params.get("eps"),
        "slide": params.get("slide"),
        "seeds": params.get("seeds"),
        "M": params.get("M"),
        "max_iter": params.get("max_iter"),
        "gtol": params.get("gtol"),
        "workers": params.get("workers"),
        "seed": config.seed,
    }
    if params.get("uniform"):
        overrides["uniform"] = True
    return overrides


def _run_probe(config: CliConfig) -> int:
    if config.format == "svg":
        raise ConfigError("probe reports are written as JSON or CSV")
    if config.tracked:
        return _run_tracked("probe", config)

    settings = load_probe_settings(config.parameters.get("config"), _probe_overrides(config))
    spec = settings.flat_core_spec()
    report = probe_stability(spec, eps=settings.eps, n_seeds=settings.seeds, M=settings.M,
                             max_iter=settings.max_iter, gtol=settings.gtol, slide=settings.slide,
                             seed=settings.seed, workers=settings.workers)
    payload = to_jsonable(report)
    path = config.resolved_output()
    if config.format == "json":
        write_json(payload, path)
    else:
        write_probe_csv(payload, path)

    if config.trajectories is not None:
        write_trajectories(
            {str(o.seed): {"history": o.history, "bound_samples": o.bound_samples} for o in report.seeds},
            config.trajectories,
        )

    print(f"verdict={report.verdict} E_ref={format_float(report.E_ref)} "
          f"bound_checks={report.bound_checks} bound_failures={report.bound_failures} -> {path}")
    return EXIT_OK


def _run_verify(config: CliConfig) -> int:
    if config.format == "svg":
        raise ConfigError("identity suite reports are written as JSON or CSV")
    if config.tracked:
        return _run_tracked("verify", config)

    results = run_identity_suite(config.parameters.get("checks") or None)
    path = config.resolved_output()
    if config.format == "json":
        write_json(results, path)
    else:
        write_suite_csv(results, path)

    for name, result in results["checks"].items():
        print(f"{result['status']:4s}  {name}: {result['message']}")
    print(f"passed {results['passed']}/{results['passed'] + results['failed']} -> {path}")
    return EXIT_OK if results["suite_status"] == "pass" else EXIT_NUMERICAL


def _run_tracked(subcommand: str, config: CliConfig) -> int:
    output_dir = str(config.resolved_output().parent)
    logger.info(f"🚀 Starting tracked {subcommand} pipeline")
    logger.info(f"📊 Output path: {output_dir}")

    if subcommand == "probe":
        from pipelines.probe_pipeline import probe_pipeline

        result = probe_pipeline(
            config_path=config.parameters.get("config"),
            overrides={k: v for k, v in _probe_overrides(config).items() if v is not None},
            output_path=output_dir,
            trajectories_path=str(config.trajectories) if config.trajectories else None,
        )
    else:
        from pipelines.verification_pipeline import verification_pipeline

        result = verification_pipeline(output_path=output_dir, checks=config.parameters.get("checks") or None)

    logger.info("✅ Pipeline executed successfully!")
    logger.info(f"📝 Pipeline Run ID: {result.id}")
    logger.info(f"📈 Pipeline Status: {result.status}")
    return EXIT_OK


HANDLERS: Dict[str, Callable[[CliConfig], int]] = {
    "special": _run_special,
    "curve": _run_curve,
    "hooked": _run_hooked,
    "probe": _run_probe,
    "verify": _run_verify,
}


def run(config: CliConfig) -> int:
    """Dispatch a parsed command line; returns the exit status."""
    try:
        return HANDLERS[config.subcommand](config)
    except (DomainError, ValidationError) as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_DOMAIN
    except OSError as e:
        logger.error(f"❌ Cannot write output: {e}")
        return EXIT_DOMAIN
    except ImportError as e:
        logger.error(f"❌ Tracked runs need ZenML installed: {e}")
        return EXIT_DOMAIN
    except NumericalError as e:
        logger.error(f"❌ Numerical failure: {type(e).__name__}: {e}")
        return EXIT_NUMERICAL


def main(argv: Optional[List[str]] = None):
    """Main entry point with command line arguments"""
    try:
        config = parse_args(argv)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        sys.exit(EXIT_DOMAIN)

    setup_logging(config.log_level)
    if not validate_config():
        logger.warning("Configuration validation reported problems; continuing with defaults")

    sys.exit(run(config))


if __name__ == "__main__":
    main()
