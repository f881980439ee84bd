"""
Line-oriented text format for detector error models.

    # comment
    detector(2, 4, 1) D7
    logical_observable L0
    error(0.001) D0 D1
    error(0.002) D0 D1 ^ D2 D3 L0

``^`` separates decomposition parts; each part lists its own detectors and
observables and the mechanism flips their XOR. Repeated targets cancel.
"""
from __future__ import annotations

import re
from dataclasses import replace
from typing import Dict, List, Optional, Tuple

from app.core.exceptions import DemParseError
from app.services.dem import DetectorErrorModel, ErrorMechanism, symmetric_difference

_ERROR = re.compile(r"^error\(([^)]*)\)(.*)$")
_DETECTOR = re.compile(r"^detector(?:\(([^)]*)\))?\s+D(\d+)$")
_OBSERVABLE = re.compile(r"^logical_observable\s+L(\d+)$")


def _targets(part) -> str:
    detectors, observables = part
    return " ".join([f"D{d}" for d in detectors] + [f"L{k}" for k in observables])


def format_mechanism(m: ErrorMechanism) -> str:
    body = " ^ ".join(_targets(p) for p in m.parts)
    return f"error({m.probability!r}) {body}".rstrip()


def serialize(dem: DetectorErrorModel) -> str:
    lines = [f"# {dem.num_detectors} detectors, {dem.num_observables} observables, {len(dem)} mechanisms"]
    for i, coord in enumerate(dem.detector_coords):
        lines.append(f"detector({', '.join(str(c) for c in coord)}) D{i}")
    if dem.num_detectors and len(dem.detector_coords) < dem.num_detectors:
        lines.append(f"detector D{dem.num_detectors - 1}")
    for k in range(dem.num_observables):
        lines.append(f"logical_observable L{k}")
    lines.extend(format_mechanism(m) for m in dem.mechanisms)
    return "\n".join(lines) + "\n"


def _parse_part(text: str, line_number: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    detectors: List[int] = []
    observables: List[int] = []
    for token in text.split():
        if re.fullmatch(r"D\d+", token):
            detectors.append(int(token[1:]))
        elif re.fullmatch(r"L\d+", token):
            observables.append(int(token[1:]))
        else:
            raise DemParseError(f"unexpected target {token!r}", line_number)
    return symmetric_difference(detectors), symmetric_difference(observables)


def _parse_probability(text: str, line_number: int) -> float:
    try:
        p = float(text)
    except ValueError:
        raise DemParseError(f"invalid probability {text!r}", line_number) from None
    if not 0.0 <= p <= 1.0:
        raise DemParseError(f"probability {p} outside [0, 1]", line_number)
    return p


def parse(text: str) -> DetectorErrorModel:
    """
    Parse DEM text. Detector and observable counts are one past the largest
    index mentioned anywhere.

    Raises:
        DemParseError: on the first malformed line
    """
    mechanisms: List[ErrorMechanism] = []
    coords: Dict[int, Tuple[int, ...]] = {}
    max_detector = max_observable = -1
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _ERROR.match(line)
        if match:
            probability = _parse_probability(match.group(1), line_number)
            parts = [_parse_part(chunk, line_number) for chunk in match.group(2).split("^")]
            if len(parts) > 1 and any(not d for d, _ in parts):
                raise DemParseError("empty decomposition part", line_number)
            detectors = symmetric_difference(*(d for d, _ in parts))
            observables = symmetric_difference(*(o for _, o in parts))
            decomposition: Optional[Tuple] = tuple(parts) if len(parts) > 1 else None
            mechanisms.append(ErrorMechanism(probability, detectors, observables, decomposition))
            for d, o in parts:
                max_detector = max([max_detector, *d])
                max_observable = max([max_observable, *o])
            continue
        match = _DETECTOR.match(line)
        if match:
            index = int(match.group(2))
            if match.group(1):
                try:
                    coords[index] = tuple(int(float(c)) for c in match.group(1).split(","))
                except ValueError:
                    raise DemParseError(f"invalid coordinates {match.group(1)!r}", line_number) from None
            max_detector = max(max_detector, index)
            continue
        match = _OBSERVABLE.match(line)
        if match:
            max_observable = max(max_observable, int(match.group(1)))
            continue
        raise DemParseError(f"unrecognised instruction {line.split()[0]!r}", line_number)

    num_detectors = max_detector + 1
    detector_coords: Tuple[Tuple[int, ...], ...] = ()
    if coords and len(coords) == num_detectors:
        detector_coords = tuple(coords[i] for i in range(num_detectors))
    return DetectorErrorModel(
        num_detectors=num_detectors,
        num_observables=max_observable + 1,
        mechanisms=tuple(mechanisms),
        detector_coords=detector_coords,
    )


def canonical(dem: DetectorErrorModel) -> DetectorErrorModel:
    """Mechanisms sorted by signature; the form :func:`serialize` output is written in."""
    return replace(dem, mechanisms=tuple(sorted(dem.mechanisms, key=lambda m: m.signature)))
