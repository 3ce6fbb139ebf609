"""
Command-line driver for the quantum filter simulator

    python cli.py operator [--attenuator-r 0.75] [--phi 0.0]
    python cli.py scenario entangle
    python cli.py error-analysis --eta 0.88
    python cli.py sweep --eta-min 0.8 --eta-max 1.0 --steps 5
    python cli.py circuit circuits/filter.json --input p1H=1,p2H=1

Exit codes: 0 success, 1 numerical contract violation, 2 usage or parse error.
"""
import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from config import get_config, setup_logging
from filter_circuit import (
    POLARIZATION_BASIS,
    ContractViolation,
    circuit_report,
    load_circuit,
    operator_report,
)
from fock_state import FockError
from scenarios import SCENARIO_NAMES, error_analysis, run_scenario, sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONTRACT = 1
EXIT_USAGE = 2


class RunConfig(BaseModel):
    command: Literal["operator", "scenario", "error-analysis", "sweep", "circuit"]
    scenario_name: Optional[str] = None
    eta: Optional[float] = Field(None, ge=0.0, le=1.0)
    dark: Optional[float] = Field(None, ge=0.0, le=1.0)
    circuit_path: Optional[Path] = None
    output_format: Literal["json", "csv", "text"] = "json"
    seed: Optional[int] = None

    # operator
    attenuator_r: float = Field(0.75, ge=0.0, le=1.0)
    attenuator_mode: Literal["p1V", "p2V"] = "p2V"
    phi: Optional[float] = None

    # scenario
    ch: Optional[complex] = None
    cv: Optional[complex] = None
    c1: Optional[complex] = None
    c2: Optional[complex] = None
    photons: int = Field(3, ge=2)
    swap_paths: bool = False

    # error analysis and sweep
    dark_rate: Optional[float] = Field(None, ge=0.0)
    window: Optional[float] = Field(None, ge=0.0)
    eta_min: float = Field(0.8, ge=0.0, le=1.0)
    eta_max: float = Field(1.0, ge=0.0, le=1.0)
    steps: int = Field(5, ge=1)
    workers: Optional[int] = Field(None, ge=1)

    # circuit
    input_occupation: Optional[Dict[str, int]] = None

    @model_validator(mode="after")
    def _required_per_command(self):
        if self.command == "scenario" and self.scenario_name not in SCENARIO_NAMES:
            raise ValueError(f"scenario name must be one of {', '.join(SCENARIO_NAMES)}")
        if self.command == "circuit" and self.circuit_path is None:
            raise ValueError("the circuit command needs a circuit file")
        if self.eta_min > self.eta_max:
            raise ValueError("--eta-min must not exceed --eta-max")
        return self


# --- formatting ---
def _round(value):
    """Six significant digits everywhere, so identical runs print identical bytes."""
    if isinstance(value, float):
        return float(f"{value:.6g}")
    if isinstance(value, dict):
        return {key: _round(v) for key, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(v) for v in value]
    return value


def _flatten(data, prefix: str = "") -> Dict[str, object]:
    rows: Dict[str, object] = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            rows.update(_flatten(value, name + "."))
        elif isinstance(value, list) and value and isinstance(value[0], (int, float)) and len(value) == 2:
            rows[name] = f"({value[0]:.6g}, {value[1]:.6g})"
        else:
            rows[name] = value
    return rows


def _format_scalar(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return json.dumps(value) if isinstance(value, (list, dict)) else str(value)


def render(data: dict, output_format: str) -> str:
    data = _round(data)
    if output_format == "json":
        return json.dumps(data, indent=2, sort_keys=True)
    flat = _flatten(data)
    if output_format == "text":
        width = max((len(key) for key in flat), default=0)
        return "\n".join(f"{key.ljust(width)}  {_format_scalar(value)}" for key, value in flat.items())
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["field", "value"])
    for key, value in flat.items():
        writer.writerow([key, _format_scalar(value)])
    return buffer.getvalue().rstrip("\n")


def _operator_csv(report: dict) -> str:
    """Comment lines carry the phase and acceptances; the table is the 4x8 matrix."""
    buffer = io.StringIO()
    mode = "auto" if report["auto_compensation"] else "fixed"
    buffer.write(f"# compensation_phi: {report['compensation_phi']:.6g} ({mode})\n")
    acceptance = " ".join(f"{basis}={p:.6g}" for basis, p in report["acceptance"].items())
    buffer.write(f"# acceptance: {acceptance}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([f"{basis}_{part}" for basis in POLARIZATION_BASIS for part in ("re", "im")])
    for row in report["entries"]:
        writer.writerow([f"{x:.6g}" for pair in row for x in pair])
    return buffer.getvalue().rstrip("\n")


def _sweep_csv(reports: List[dict]) -> str:
    scalar = [key for key, value in reports[0].items() if isinstance(value, (int, float))]
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(scalar)
    for report in reports:
        writer.writerow([f"{report[key]:.6g}" for key in scalar])
    return buffer.getvalue().rstrip("\n")


# --- commands ---
def cmd_operator(config: RunConfig) -> str:
    report = operator_report(config.attenuator_r, config.attenuator_mode, config.phi).model_dump()
    if config.output_format == "csv":
        return _operator_csv(report)
    return render(report, config.output_format)


def _random_max_entangled(seed: int):
    """c1 and c2 with one shared phase, so the drawn state is maximally entangled."""
    rng = np.random.default_rng(seed)
    alpha, theta, phi = rng.uniform(0.0, 2.0 * np.pi, size=3)
    common = complex(np.exp(1j * theta))
    return common * float(np.cos(alpha)), common * float(np.sin(alpha)), float(phi)


def cmd_scenario(config: RunConfig) -> str:
    kwargs = dict(photons=config.photons, eta=config.eta, dark=config.dark or 0.0,
                  swap_paths=config.swap_paths)
    if config.ch is not None:
        kwargs["ch"] = config.ch
    if config.cv is not None:
        kwargs["cv"] = config.cv
    if config.phi is not None:
        kwargs["phi"] = config.phi
    if config.c1 is not None or config.c2 is not None:
        kwargs["c1"] = config.c1 if config.c1 is not None else 0.0
        kwargs["c2"] = config.c2 if config.c2 is not None else 0.0
    elif config.scenario_name == "max-entangled" and config.seed is not None:
        kwargs["c1"], kwargs["c2"], kwargs["phi"] = _random_max_entangled(config.seed)
    report = run_scenario(config.scenario_name, **kwargs)
    return render(report.model_dump(), config.output_format)


def cmd_error_analysis(config: RunConfig) -> str:
    settings = get_config()
    eta = settings.eta if config.eta is None else config.eta
    dark = settings.dark if config.dark is None else config.dark
    report = error_analysis(eta, dark, config.dark_rate, config.window)
    return render(report.model_dump(), config.output_format)


def cmd_sweep(config: RunConfig) -> str:
    dark = get_config().dark if config.dark is None else config.dark
    etas = np.linspace(config.eta_min, config.eta_max, config.steps)
    reports = [r.model_dump() for r in sweep(etas, dark, config.workers)]
    if config.output_format == "csv":
        return _sweep_csv(_round(reports))
    if config.output_format == "text":
        return "\n\n".join(render(r, "text") for r in reports)
    return json.dumps(_round(reports), indent=2, sort_keys=True)


def cmd_circuit(config: RunConfig) -> str:
    circuit = load_circuit(config.circuit_path)
    report = circuit_report(circuit, config.input_occupation)
    return render(report.model_dump(), config.output_format)


COMMANDS = {
    "operator": cmd_operator,
    "scenario": cmd_scenario,
    "error-analysis": cmd_error_analysis,
    "sweep": cmd_sweep,
    "circuit": cmd_circuit,
}


# --- argument parsing ---
def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _occupation(text: str) -> Dict[str, int]:
    occupation = {}
    for item in filter(None, text.split(",")):
        label, sep, count = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected LABEL=COUNT, got {item!r}")
        try:
            occupation[label.strip()] = int(count)
        except ValueError:
            raise argparse.ArgumentTypeError(f"photon count must be an integer in {item!r}") from None
    return occupation


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--format", dest="output_format", choices=["json", "csv", "text"], default="json",
                        help="Output format")
    shared.add_argument("--log-level", default=None, help="Logging level (default from LOG_LEVEL)")
    shared.add_argument("--seed", type=int, default=None, help="Random seed for randomized demos")

    p = argparse.ArgumentParser(description="Two-photon polarization filter simulator")
    sub = p.add_subparsers(dest="command", required=True)

    op = sub.add_parser("operator", parents=[shared], help="Effective 4x4 polarization operator")
    op.add_argument("--attenuator-r", type=float, default=0.75, help="Attenuator reflectivity")
    op.add_argument("--attenuator-mode", choices=["p1V", "p2V"], default="p2V",
                    help="V rail carrying the attenuator")
    op.add_argument("--phi", type=float, default=None, help="Compensation phase (default: automatic)")

    sc = sub.add_parser("scenario", parents=[shared], help="Run a prebuilt scenario")
    sc.add_argument("scenario_name", metavar="NAME", help=f"One of: {', '.join(SCENARIO_NAMES)}")
    sc.add_argument("--ch", type=_complex, default=None, help="Qubit H coefficient")
    sc.add_argument("--cv", type=_complex, default=None, help="Qubit V coefficient")
    sc.add_argument("--c1", type=_complex, default=None, help="Entangled-state coefficient c1")
    sc.add_argument("--c2", type=_complex, default=None, help="Entangled-state coefficient c2")
    sc.add_argument("--phi", type=float, default=None, help="Entangled-state relative phase")
    sc.add_argument("--photons", type=int, default=3, help="Photon number for encode-n")
    sc.add_argument("--eta", type=float, default=None, help="Detector efficiency (default: ideal detectors)")
    sc.add_argument("--dark", type=float, default=None, help="Dark-count probability per window")
    sc.add_argument("--swap-paths", action="store_true", help="Feed the filtered photons into opposite inputs")

    ea = sub.add_parser("error-analysis", parents=[shared], help="Detector error analysis")
    ea.add_argument("--eta", type=float, default=None, help="Detector efficiency")
    ea.add_argument("--dark", type=float, default=None, help="Dark-count probability per window")
    ea.add_argument("--dark-rate", type=float, default=None, help="Dark counts per second")
    ea.add_argument("--window", type=float, default=None, help="Detection window in seconds")

    sw = sub.add_parser("sweep", parents=[shared], help="Error analysis over an efficiency grid")
    sw.add_argument("--eta-min", type=float, default=0.8)
    sw.add_argument("--eta-max", type=float, default=1.0)
    sw.add_argument("--steps", type=int, default=5)
    sw.add_argument("--dark", type=float, default=None)
    sw.add_argument("--workers", type=int, default=None)

    ci = sub.add_parser("circuit", parents=[shared], help="Run a circuit file")
    ci.add_argument("circuit_path", metavar="PATH", type=Path, help="Circuit JSON file")
    ci.add_argument("--input", dest="input_occupation", type=_occupation, default=None,
                    help="Input occupation LABEL=COUNT,... (overrides the file)")
    return p


def parse_config(argv: Optional[List[str]] = None) -> Tuple[RunConfig, Optional[str]]:
    args = vars(build_parser().parse_args(argv))
    log_level = args.pop("log_level", None)
    fields = {key: value for key, value in args.items() if value is not None}
    return RunConfig(**fields), log_level


def main(argv: Optional[List[str]] = None) -> int:
    try:
        config, log_level = parse_config(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except (ValidationError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    setup_logging(log_level)
    logger.info("command %s started", config.command)
    try:
        output = COMMANDS[config.command](config)
    except ContractViolation as e:
        logger.warning("contract violation: %s", e)
        print(f"contract violation: {e}", file=sys.stderr)
        return EXIT_CONTRACT
    except (FockError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    print(output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
