"""
Command-line entry point: ``python -m app.cli.decoder <subcommand> [flags]``.

Results are printed as JSON on stdout (or written to ``--out``); tabular
results can be written as CSV with ``--format csv``. Domain errors are logged
and end the process with exit status 2.
"""
import argparse
import csv
import json
import sys
from io import StringIO
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ValidationError

from app.core.config import get_settings
from app.core.exceptions import DecoderToolkitError
from app.core.logging import LoggerConfig
from app.schemas.analysis import AnsatzFamily, OverheadFamily
from app.schemas.decoder import BPConfig, BPVariant, DecoderName, DecoderSpec
from app.schemas.experiment import CodeSpec, ExperimentSpec
from app.services import ansatz, dem_text, fragility, montecarlo, overhead, threshold
from app.services.circuit import SpamMode, memory_circuit
from app.services.codes import CodeFamily, build_layout, export_layout
from app.services.decoders import build_decoder
from app.services.dem import build_dem
from app.services.noise import NoiseModel
from app.services.sampler import ShotBatch, sample

settings = get_settings()

logger = LoggerConfig.setup_logger("app")


# argument helpers -------------------------------------------------------

def _add_code_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--code", choices=[f.value for f in CodeFamily], default=CodeFamily.CSS.value)
    parser.add_argument("-L", type=int, help="Square lattice size (sets --dx and --dz)")
    parser.add_argument("--dx", type=int, help="Logical-X distance")
    parser.add_argument("--dz", type=int, help="Logical-Z distance")


def _add_noise_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-p", type=float, required=True, help="Noise strength p")
    parser.add_argument("--eta", type=float, default=1.0, help="Z bias")
    parser.add_argument("--rounds", type=int, help="Noisy rounds (default max(dx, dz))")
    parser.add_argument("--basis", choices=["X", "Y", "Z"], default="X")
    parser.add_argument("--spam", choices=[s.value for s in SpamMode], default=SpamMode.PERFECT.value)


def _add_decoder_args(parser: argparse.ArgumentParser, multiple: bool = False) -> None:
    names = [d.value for d in DecoderName]
    if multiple:
        parser.add_argument("--decoder", nargs="+", choices=names, default=[DecoderName.MWPM.value])
    else:
        parser.add_argument("--decoder", choices=names, default=DecoderName.MWPM.value)
    parser.add_argument("--bp-iters", type=int, default=settings.BP_MAX_ITER)
    parser.add_argument("--bp-variant", choices=[v.value for v in BPVariant], default=settings.BP_VARIANT)


def _add_sampling_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--shots", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    parser.add_argument("--workers", type=int, help="Worker processes (default WORKERS setting)")


def _add_output_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, help="Output path (default stdout)")
    parser.add_argument("--format", choices=["json", "csv"], default="json")


def _code_spec(args: argparse.Namespace) -> CodeSpec:
    d_x = args.L if args.L is not None else args.dx
    d_z = args.L if args.L is not None else args.dz
    if d_x is None:
        raise SystemExit("one of -L or --dx is required")
    return CodeSpec(family=CodeFamily(args.code), d_x=d_x, d_z=d_z)


def _decoder_spec(args: argparse.Namespace, name: str) -> DecoderSpec:
    return DecoderSpec(
        name=DecoderName(name),
        bp=BPConfig(max_iter=args.bp_iters, variant=BPVariant(args.bp_variant)),
    )


def _layout(args: argparse.Namespace):
    code = _code_spec(args)
    return build_layout(code.family, code.d_x, code.d_z)


def _circuit(args: argparse.Namespace):
    return memory_circuit(_layout(args), NoiseModel(args.p, args.eta), args.rounds, args.basis, SpamMode(args.spam))


# output ------------------------------------------------------------------

def _emit_text(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {out}")


def _emit(result, args: argparse.Namespace) -> None:
    """JSON for one model or a list of models; CSV for a list when --format csv."""
    rows: Sequence = result if isinstance(result, list) else [result]
    if args.format == "csv":
        dumped = [r.model_dump(mode="json") if isinstance(r, BaseModel) else r for r in rows]
        columns: List[str] = list(dumped[0]) if dumped else []
        lines = _csv_lines(columns, ([json.dumps(v) if isinstance(v, (dict, list)) else v for v in d.values()] for d in dumped))
        _emit_text(lines, args.out)
        return
    if isinstance(result, list):
        payload = json.dumps([r.model_dump(mode="json") for r in result], indent=2)
    else:
        payload = result.model_dump_json(indent=2)
    _emit_text(payload, args.out)


def _csv_lines(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buffer = StringIO()
    writer = csv.writer(buffer)
    writer.writerow(columns)
    writer.writerows(rows)
    return buffer.getvalue()


# subcommands -------------------------------------------------------------

def cmd_build_code(args: argparse.Namespace) -> int:
    _emit(export_layout(_layout(args)), args)
    return 0


def cmd_dem(args: argparse.Namespace) -> int:
    circuit = _circuit(args)
    if args.circuit_out:
        _emit_text(circuit.to_text(), args.circuit_out)
    dem = build_dem(circuit, decompose=not args.raw)
    _emit_text(dem_text.serialize(dem), args.out)
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    batch = sample(_circuit(args), args.shots, args.seed)
    if args.out is None:
        raise SystemExit("sample needs --out (.b8 or .csv)")
    if args.out.suffix == ".b8":
        batch.to_b8(args.out)
    else:
        batch.to_csv(args.out)
    logger.info(f"Wrote {args.shots} shots to {args.out}")
    return 0


def cmd_decode(args: argparse.Namespace) -> int:
    if args.shots_in is not None:
        circuit = _circuit(args)
        dem = build_dem(circuit, decompose=True)
        batch = ShotBatch.from_b8(args.shots_in, dem.num_detectors, dem.num_observables)
        decoder = build_decoder(dem, _decoder_spec(args, args.decoder))
        predicted = decoder.predict(batch.detector_bits)
        failures = int(np.any(predicted != batch.observable_bits, axis=1).sum())
        _emit_text(json.dumps({"shots": batch.shots, "failures": failures}, indent=2), args.out)
        return 0
    spec = ExperimentSpec(
        code=_code_spec(args),
        decoder=_decoder_spec(args, args.decoder),
        p=args.p,
        eta=args.eta,
        rounds=args.rounds,
        basis=args.basis,
        spam=SpamMode(args.spam),
        shots=args.shots,
        seed=args.seed,
    )
    point = montecarlo.run_point(spec, workers=args.workers, telemetry_path=args.telemetry)
    _emit(point, args)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    specs = [
        ExperimentSpec(
            code=CodeSpec(family=CodeFamily(args.code), d_x=L, d_z=L),
            decoder=_decoder_spec(args, name),
            p=p,
            eta=args.eta,
            rounds=args.rounds,
            basis=args.basis,
            spam=SpamMode(args.spam),
            shots=args.shots,
            seed=args.seed,
        )
        for name in args.decoder
        for L in args.sizes
        for p in args.ps
    ]
    checkpoint = args.checkpoint or Path(settings.CHECKPOINT_PATH)
    points = montecarlo.run_points(specs, checkpoint_path=checkpoint, workers=args.workers)
    if args.format == "csv" and args.out is not None:
        montecarlo.points_to_csv(points, args.out)
    else:
        _emit(points, args)
    return 0


def _points(args: argparse.Namespace):
    points = montecarlo.load_points(args.points)
    if args.decoder:
        points = [p for p in points if p.spec.decoder.name.value == args.decoder]
    if not points:
        raise SystemExit(f"no points in {args.points}")
    return points


def cmd_fit_threshold(args: argparse.Namespace) -> int:
    _emit(threshold.fit_threshold(_points(args)), args)
    return 0


def cmd_fit_ansatz(args: argparse.Namespace) -> int:
    _emit(ansatz.fit_ansatz(_points(args), AnsatzFamily(args.family)), args)
    return 0


def cmd_overhead(args: argparse.Namespace) -> int:
    if args.curve:
        start, stop, num = args.curve
        values = np.geomspace(start, stop, int(num)).tolist()
        _emit(overhead.overhead_curve(values, target=args.target, eta=args.eta), args)
        return 0
    solution = overhead.solve_overhead(
        OverheadFamily(args.family), p=args.p, p_cx=args.p_cx, target=args.target, eta=args.eta
    )
    _emit(solution, args)
    return 0


def cmd_zdist(args: argparse.Namespace) -> int:
    _emit(fragility.z_distance_scan(args.L_max, args.L_min, CodeFamily(args.code)), args)
    return 0


def cmd_spam_ratio(args: argparse.Namespace) -> int:
    result = fragility.spam_ratio(
        _code_spec(args),
        p=args.p,
        eta=args.eta,
        shots=args.shots,
        rounds=args.rounds,
        decoder=_decoder_spec(args, args.decoder),
        seed=args.seed,
        basis=args.basis,
        workers=args.workers,
    )
    _emit(result, args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decoder", description="Belief-matching decoding toolkit")
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-code", help="Export a code layout")
    _add_code_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_build_code)

    p = sub.add_parser("dem", help="Build a memory circuit and print its detector error model")
    _add_code_args(p)
    _add_noise_args(p)
    _add_output_args(p)
    p.add_argument("--raw", action="store_true", help="Skip hyperedge decomposition")
    p.add_argument("--circuit-out", type=Path, help="Also write the circuit text")
    p.set_defaults(func=cmd_dem)

    p = sub.add_parser("sample", help="Sample detection events and observable flips")
    _add_code_args(p)
    _add_noise_args(p)
    _add_sampling_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("decode", help="Sample and decode one point, or decode a .b8 file")
    _add_code_args(p)
    _add_noise_args(p)
    _add_decoder_args(p)
    _add_sampling_args(p)
    _add_output_args(p)
    p.add_argument("--in", dest="shots_in", type=Path, help="Decode shots from a .b8 file")
    p.add_argument("--telemetry", type=Path, help="Per-shot telemetry CSV")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("sweep", help="Run a grid of points with checkpointing")
    p.add_argument("--code", choices=[f.value for f in CodeFamily], default=CodeFamily.CSS.value)
    p.add_argument("--sizes", type=int, nargs="+", required=True)
    p.add_argument("--ps", type=float, nargs="+", required=True)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--rounds", type=int)
    p.add_argument("--basis", choices=["X", "Y", "Z"], default="X")
    p.add_argument("--spam", choices=[s.value for s in SpamMode], default=SpamMode.PERFECT.value)
    p.add_argument("--checkpoint", type=Path, help="JSON-lines checkpoint (default CHECKPOINT_PATH)")
    _add_decoder_args(p, multiple=True)
    _add_sampling_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit-threshold", help="Critical-exponent threshold fit")
    p.add_argument("--points", type=Path, default=Path(settings.CHECKPOINT_PATH))
    p.add_argument("--decoder", choices=[d.value for d in DecoderName])
    _add_output_args(p)
    p.set_defaults(func=cmd_fit_threshold)

    p = sub.add_parser("fit-ansatz", help="Below-threshold ansatz fit")
    p.add_argument("--points", type=Path, default=Path(settings.CHECKPOINT_PATH))
    p.add_argument("--decoder", choices=[d.value for d in DecoderName])
    p.add_argument("--family", choices=[f.value for f in AnsatzFamily], required=True)
    _add_output_args(p)
    p.set_defaults(func=cmd_fit_ansatz)

    p = sub.add_parser("overhead", help="Qubits needed to reach a target logical error rate")
    p.add_argument("--family", choices=[f.value for f in OverheadFamily], default=OverheadFamily.XY.value)
    group = p.add_mutually_exclusive_group()
    group.add_argument("-p", type=float, help="Noise strength p")
    group.add_argument("--p-cx", type=float, help="CNOT infidelity")
    group.add_argument("--curve", type=float, nargs=3, metavar=("START", "STOP", "NUM"), help="Tabulate over p_CX")
    p.add_argument("--eta", type=float, help="Bias for p_CX conversion (default: that of the fits)")
    p.add_argument("--target", type=float, default=overhead.DEFAULT_TARGET)
    _add_output_args(p)
    p.set_defaults(func=cmd_overhead)

    p = sub.add_parser("zdist", help="Z-type distance scan")
    p.add_argument("--code", choices=[f.value for f in CodeFamily], default=CodeFamily.XY_DEFORMED.value)
    p.add_argument("--L-max", dest="L_max", type=int, required=True)
    p.add_argument("--L-min", dest="L_min", type=int, default=3)
    _add_output_args(p)
    p.set_defaults(func=cmd_zdist)

    p = sub.add_parser("spam-ratio", help="Noisy-SPAM over perfect-SPAM logical error rate")
    _add_code_args(p)
    _add_noise_args(p)
    _add_decoder_args(p)
    _add_sampling_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_spam_ratio)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        LoggerConfig.set_level(args.log_level)
    try:
        return args.func(args)
    except (DecoderToolkitError, ValidationError) as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
