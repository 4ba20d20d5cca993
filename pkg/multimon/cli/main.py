"""
multimon command line.

    python -m multimon analyze trimon-design-table
    python -m multimon sweep device.json --flux 0:0.25:0.05
    python -m multimon compile program.txt --format json
    python -m multimon simulate bell.json --lengths 50,100,200,400
    python -m multimon optimize target.json --budget 500
    python -m multimon presets

Exit codes: 0 success, 2 invalid input or infeasible design, 1 any other error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import ValidationError

from multimon import __version__
from multimon.circuit import get_preset
from multimon.cli.io import FORMATS, load_model, render, resolve_netlist, write_output
from multimon.cli.manifest import build_manifest
from multimon.errors import ConfigurationError, MultimonError, ProgramParseError
from multimon.pulsesim.experiments import load_experiment
from multimon.services.commands import (
    AnalyzeRequest,
    BenchmarkRequest,
    CommandOutput,
    CompileRequest,
    OptimizeRequest,
    SimulateRequest,
    SweepRequest,
    analyze,
    compile_,
    optimize,
    presets,
    simulate,
    sweep,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2


def parse_range(text: str) -> List[float]:
    """'a:b:step' -> [a, b, step]."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric range {text!r}")


def parse_window(text: str) -> List[float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected f_min:f_max, got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric window {text!r}")


def parse_list(cast):
    def parse(text: str):
        try:
            return [cast(p) for p in text.split(",") if p.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid list {text!r}")
    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="Write the output to this file instead of stdout")
    common.add_argument("--seed", type=int, help="Random seed for commands that sample")
    common.add_argument("--reproducible", action="store_true", help="Omit timestamps from the embedded manifest")
    common.add_argument("--format", choices=FORMATS, help="Output format (default: csv for sweep, text otherwise)")
    common.add_argument("-v", "--verbose", action="store_true", help="Log progress at INFO level")

    parser = argparse.ArgumentParser(
        prog="multimon",
        description="Design, analysis and pulse simulation of multimon superconducting circuits.",
    )
    parser.add_argument("--version", action="version", version=f"multimon {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("analyze", parents=[common], help="Modes, Kerr terms, spacing and dispersive shifts")
    p.add_argument("netlist", help="Netlist JSON file or preset name")
    p.add_argument("--omega-r", type=float, default=7.3, help="Cavity frequency in GHz")
    p.add_argument("--g-ref", type=float, default=70.0, help="Reference-mode coupling in MHz")
    p.add_argument("--reference-mode", default="A")
    p.add_argument("--detuning-reference", choices=["qubit_frequency", "appendix"], default="qubit_frequency")
    p.add_argument("--order", type=int, default=4, choices=[4, 6, 8])
    p.add_argument("--second-order", action="store_true")
    p.add_argument("--window", type=parse_window, default=[3.0, 8.0], help="Transition band f_min:f_max in GHz")
    p.add_argument("--min-separation", type=float, default=30.0, help="Minimum line separation in MHz")

    p = commands.add_parser("sweep", parents=[common], help="Re-solve the device over a flux grid")
    p.add_argument("netlist", help="Netlist JSON file or preset name")
    p.add_argument("--flux", type=parse_range, default=[0.0, 0.25, 0.05], help="start:stop:step in Phi0")
    p.add_argument("--order", type=int, default=4, choices=[4, 6, 8])
    p.add_argument("--second-order", action="store_true")
    p.add_argument("--workers", type=int, help="Solve flux points in parallel threads")

    p = commands.add_parser("optimize", parents=[common], help="Search asymmetries for a spectroscopic target")
    p.add_argument("target", help="JSON document with target, seed and optional knobs")
    p.add_argument("--budget", type=int, help="Maximum objective evaluations")

    p = commands.add_parser("compile", parents=[common], help="Compile a gate program to conditional pulses")
    p.add_argument("program", help="Gate program text file")
    p.add_argument("--qubits", type=int, default=3)

    p = commands.add_parser("simulate", parents=[common], help="Simulate a state preparation with tomography")
    p.add_argument("experiment", help="Experiment JSON file")
    p.add_argument("--lengths", type=parse_list(float), help="Comma-separated pi lengths for a fidelity sweep")
    p.add_argument("--benchmark", metavar="TRANSITION", help="Randomized benchmarking of one transition")
    p.add_argument("--rb-lengths", type=parse_list(int), default=[1, 5, 10, 20, 40, 80])
    p.add_argument("--trials", type=int, default=10)

    p = commands.add_parser("presets", parents=[common], help="List presets or print one as a netlist")
    p.add_argument("name", nargs="?")
    return parser


def _dispatch(args: argparse.Namespace) -> tuple:
    """Run the selected command; returns (output, inputs, resolved options)."""
    if args.command == "analyze":
        request = AnalyzeRequest(
            netlist=resolve_netlist(args.netlist),
            omega_r=args.omega_r,
            g_ref_mhz=args.g_ref,
            reference_mode=args.reference_mode,
            detuning_reference=args.detuning_reference,
            order=args.order,
            second_order=args.second_order,
            frequency_window=tuple(args.window),
            min_separation_mhz=args.min_separation,
        )
        return analyze(request), [args.netlist], request.model_dump(mode="json", exclude={"netlist"})

    if args.command == "sweep":
        start, stop, step = args.flux
        request = SweepRequest(
            netlist=resolve_netlist(args.netlist),
            flux_start=start,
            flux_stop=stop,
            flux_step=step,
            order=args.order,
            second_order=args.second_order,
            workers=args.workers,
        )
        return sweep(request), [args.netlist], request.model_dump(mode="json", exclude={"netlist"})

    if args.command == "optimize":
        request = load_model(args.target, OptimizeRequest)
        if args.budget is not None:
            request = request.model_copy(update={"budget": args.budget})
        return optimize(request), [args.target], request.model_dump(mode="json")

    if args.command == "compile":
        path = Path(args.program)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ProgramParseError(f"cannot read program: {e}", path=str(path))
        request = CompileRequest(program=text, count=args.qubits, source=str(path))
        return compile_(request), [args.program], {"qubits": args.qubits}

    if args.command == "simulate":
        experiment = load_experiment(args.experiment)
        if args.seed is not None:
            experiment = experiment.model_copy(update={"seed": args.seed})
        benchmark = None
        if args.benchmark:
            benchmark = BenchmarkRequest(transition=args.benchmark, lengths=args.rb_lengths, trials=args.trials)
        request = SimulateRequest(experiment=experiment, lengths=args.lengths, benchmark=benchmark)
        return simulate(request), [args.experiment], request.model_dump(mode="json")

    if args.name:
        netlist = get_preset(args.name)
        return CommandOutput(document=netlist.to_document()), [args.name], {}
    return presets(), [], {}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    try:
        output, inputs, options = _dispatch(args)
        fmt = args.format or ("csv" if args.command == "sweep" else "text")
        manifest = build_manifest(args.command, inputs, options, seed=args.seed, reproducible=args.reproducible)
        write_output(render(output.document, manifest, fmt, output.csv_text), args.out)
    except ValidationError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ConfigurationError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (MultimonError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR

    if not output.ok:
        print("error: no feasible design found", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
