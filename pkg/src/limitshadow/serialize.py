"""Text formats: pseudo-orbit CSV, deviation CSV and JSON certificates.

Every file starts with (or contains) ``schema_version`` so readers can
reject formats they do not understand.  Outputs never contain timestamps,
so repeated runs with the same inputs are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import BadParameter
from .pseudo_orbit import PseudoOrbit, tail_from_description
from .systems import (
    BITS,
    HyperbolicToralMap,
    Sft,
    SymbolicPoint,
    TorusPoint,
    build_north_south,
    build_sft,
    build_toral_system,
)

SCHEMA_VERSION = 1


def fmt(x: float) -> str:
    """Scientific notation with 17 significant digits."""
    return f"{float(x):.16e}"


# -- systems and points ----------------------------------------------------


def system_from_descriptor(d: dict):
    kind = d["kind"]
    if kind == "toral":
        return build_toral_system(d["matrix"])
    if kind == "sft":
        return build_sft(d["transitions"])
    if kind == "northsouth":
        return build_north_south(d["a"])
    raise BadParameter(f"unknown system kind {kind!r}")


def encode_point(system, p) -> str:
    """Lossless text form of a point."""
    if isinstance(system, HyperbolicToralMap):
        return ":".join(f"{c:x}" for c in p.num)
    if isinstance(system, Sft):
        return p.encode()
    return repr(float(p))


def decode_point(system, text: str):
    if isinstance(system, HyperbolicToralMap):
        return TorusPoint(tuple(int(c, 16) for c in text.split(":")))
    if isinstance(system, Sft):
        return SymbolicPoint.decode(text)
    return float(text)


def point_coords(system, p) -> list[str]:
    """Human-readable coordinate columns."""
    if isinstance(system, HyperbolicToralMap):
        return [fmt(c) for c in p.coords]
    if isinstance(system, Sft):
        return [str(p.symbol(0))]
    return [fmt(p)]


def _coord_names(system) -> list[str]:
    if isinstance(system, HyperbolicToralMap):
        return [f"x{k}" for k in range(system.n)]
    if isinstance(system, Sft):
        return ["symbol0"]
    return ["x0"]


# -- pseudo-orbits ---------------------------------------------------------


def pseudo_orbit_to_csv(po: PseudoOrbit) -> str:
    """CSV of the window with tail descriptors in ``#`` header lines."""
    sysm = po.system
    buf = io.StringIO()
    buf.write(f"# limitshadow pseudo-orbit schema_version={SCHEMA_VERSION}\n")
    buf.write(f"# system = {json.dumps(sysm.descriptor(), sort_keys=True)}\n")
    buf.write(f"# W = {po.W}\n")
    buf.write(f"# left_tail = {json.dumps(po.left_tail.describe(), sort_keys=True)}\n")
    buf.write(f"# right_tail = {json.dumps(po.right_tail.describe(), sort_keys=True)}\n")
    if isinstance(sysm, HyperbolicToralMap):
        buf.write(f"# exact column: coordinate numerators over 2^{BITS}, hexadecimal\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", *_coord_names(sysm), "error", "exact"])
    for i in range(-po.W, po.W + 1):
        p = po.point(i)
        w.writerow([i, *point_coords(sysm, p), fmt(po.error(i)), encode_point(sysm, p)])
    return buf.getvalue()


def pseudo_orbit_from_csv(text: str) -> PseudoOrbit:
    meta, rows = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, sep, val = line[1:].partition("=")
            if sep:
                meta[key.strip()] = val.strip()
        elif line.strip():
            rows.append(line)
    if meta.get("limitshadow pseudo-orbit schema_version") != str(SCHEMA_VERSION):
        raise BadParameter("not a limitshadow pseudo-orbit file of a supported schema version")
    system = system_from_descriptor(json.loads(meta["system"]))
    reader = csv.DictReader(io.StringIO("\n".join(rows)))
    pts = [decode_point(system, r["exact"]) for r in reader]
    left = tail_from_description(json.loads(meta["left_tail"]))
    right = tail_from_description(json.loads(meta["right_tail"]))
    po = PseudoOrbit(system, pts, left, right)
    if po.W != int(meta["W"]):
        raise BadParameter("row count does not match W")
    return po


def write_pseudo_orbit(path, po: PseudoOrbit) -> None:
    Path(path).write_text(pseudo_orbit_to_csv(po))


def read_pseudo_orbit(path) -> PseudoOrbit:
    return pseudo_orbit_from_csv(Path(path).read_text())


# -- certificates ----------------------------------------------------------


def deviation_csv(cert) -> str:
    """Rows ``i, error, deviation`` over the certificate window."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "error", "deviation"])
    for k, i in enumerate(range(-cert.W, cert.W + 1)):
        w.writerow([i, fmt(cert.errors[k]), fmt(cert.deviations[k])])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def certificate_to_dict(cert) -> dict:
    sysm = cert.system
    d = {
        "schema_version": SCHEMA_VERSION,
        "type": "shadow",
        "system": sysm.descriptor(),
        "method": cert.method,
        "W": cert.W,
        "shadow_point": encode_point(sysm, cert.shadow_point),
        "shadow_coords": point_coords(sysm, cert.shadow_point),
        "verdict": cert.verdict,
        "eps": cert.eps,
        "orbit_residual": cert.orbit_residual,
        "truncation_bound": cert.truncation_bound,
        "tail_bound": cert.tail_bound.to_dict(),
        "deviations": [float(v) for v in cert.deviations],
        "errors": [float(v) for v in cert.errors],
        "repairs": [list(r) for r in cert.repairs],
    }
    if cert.trace is not None:
        d["trace"] = cert.trace.to_dict()
    return _jsonable(d)


def nonshadow_to_dict(cert) -> dict:
    idx, counts = np.unique(cert.violation_index, return_counts=True)
    return _jsonable({
        "schema_version": SCHEMA_VERSION,
        "type": "nonshadow",
        "system": cert.system.descriptor() if cert.system is not None else None,
        "eps": cert.eps,
        "window": cert.window,
        "grid_step": cert.grid_step,
        "mesh": cert.mesh,
        "n_candidates": cert.n_candidates,
        "certified": cert.certified,
        "certified_eps": cert.certified_eps,
        "max_slack": float(cert.slack.max()),
        "min_violation": float(cert.violation_magnitude[cert.violation_index <= cert.window].min())
        if (cert.violation_index <= cert.window).any() else None,
        "violations_by_index": {int(i): int(c) for i, c in zip(idx, counts) if i <= cert.window},
        "survivor": None if cert.survivor is None else encode_point(cert.system, cert.survivor),
        "survivor_deviation": cert.survivor_deviation,
    })


def candidates_csv(cert) -> str:
    """Per-candidate record: coordinates, violation index, magnitude and slack."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    dim = cert.candidates.shape[1]
    w.writerow(["k", *[f"c{j}" for j in range(dim)], "violation_index", "violation", "slack"])
    for k in range(cert.n_candidates):
        w.writerow([
            k, *[fmt(v) for v in cert.candidates[k]], int(cert.violation_index[k]),
            fmt(cert.violation_magnitude[k]), fmt(cert.slack[k]),
        ])
    return buf.getvalue()


def dump_json(d: dict) -> str:
    return json.dumps(d, indent=1) + "\n"


def load_certificate(path) -> dict:
    d = json.loads(Path(path).read_text())
    if d.get("schema_version") != SCHEMA_VERSION:
        raise BadParameter(f"unsupported certificate schema {d.get('schema_version')!r}")
    return d


def certificate_point(d: dict):
    """Decode the shadow point of a loaded certificate."""
    system = system_from_descriptor(d["system"])
    return system, decode_point(system, d["shadow_point"])
