"""Command-line experiment runner.

Subcommands::

    limitshadow shadow   [options]   build a pseudo-orbit, shadow it, write CSV + certificate
    limitshadow certify  [options]   grid-certify that a pseudo-orbit has no eps-shadow
    limitshadow analyze  [options]   constants, periodic points and heteroclinic relations
    limitshadow verify   SUITE       run a fixed-seed check bundle

Options may also come from a flat ``key = value`` file given with
``--config``; flags override file values.  Exit status is 0 on success
(and on a verdict matching ``--expect``), 1 on a verdict mismatch or a
failed computation, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analysis, serialize, shadowing, suites
from .errors import BadParameter, BadWindow, NonDecayingInput, ShadowError, UnknownSuite
from .pseudo_orbit import ErrorSchedule, generate_pseudo_orbit, splice_orbits
from .systems import (
    HyperbolicToralMap,
    NorthSouthCircleMap,
    Sft,
    SymbolicPoint,
    TorusPoint,
    build_north_south,
    build_toral_system,
    cat_map,
    full_shift,
    golden_mean_shift,
    load_sft,
)

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2

# Help text per config key; also the documentation of every default.
HELP = {
    "system": "cat | toral:a,b,c,d | golden | full:k | sft:PATH | northsouth:a",
    "splice": "splice recipe 'Y,X' (past orbit of Y, future orbit of X); points are "
              "coordinates joined by ':', 'sink'/'source', or SFT words; empty = use --schedule",
    "schedule": "error schedule KIND:AMPLITUDE for generated pseudo-orbits",
    "start": "seed point x_0 of a generated pseudo-orbit; empty = drawn from --seed",
    "seed": "random seed of the pseudo-orbit generator",
    "kicks": "extra exact errors 'i@r,...' inserted at window indices i",
    "input": "read the pseudo-orbit from this CSV instead of building one",
    "window": "half-width W of the window [-W, W]",
    "eps": "target shadowing accuracy",
    "tail_terms": "truncation length of the toral series; 0 = automatic",
    "grid": "grid step of the certifier",
    "method": "direct | pipeline",
    "expect": "expected verdict; empty = accept any successful run",
    "out": "deviation CSV (shadow) or candidate CSV (certify)",
    "cert": "certificate JSON path",
    "po_out": "also write the pseudo-orbit CSV here",
    "period_bound": "largest period enumerated by analyze",
    "report": "analyze: write the JSON report here",
}


@dataclass
class ExperimentConfig:
    system: str = "cat"
    splice: str = ""
    schedule: str = "inv_linear:0.3"
    start: str = ""
    seed: int = 7
    kicks: str = ""
    input: str = ""
    window: int = 200
    eps: float = 0.05
    tail_terms: int = 0
    grid: float = 1e-4
    method: str = "direct"
    expect: str = ""
    out: str = "deviations.csv"
    cert: str = "certificate.json"
    po_out: str = ""
    period_bound: int = 2
    report: str = ""

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            try:
                setattr(self, f.name, _FIELD_TYPES[f.name](v))
            except (TypeError, ValueError):
                raise BadParameter(f"{f.name}: cannot read {v!r} as {_FIELD_TYPES[f.name].__name__}") from None
        if self.method not in ("direct", "pipeline"):
            raise BadParameter(f"method: expected direct or pipeline, got {self.method!r}")

    def to_text(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)!s}\n" for f in fields(self))

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        return cls(**parse_config_text(text))


_FIELD_TYPES = {"seed": int, "window": int, "tail_terms": int, "period_bound": int, "eps": float, "grid": float}
_FIELD_TYPES.update({f.name: str for f in fields(ExperimentConfig) if f.name not in _FIELD_TYPES})


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; unknown keys are errors."""
    known, out = {f.name for f in fields(ExperimentConfig)}, {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        if not sep:
            raise BadParameter(f"config line {n}: expected key = value")
        if key not in known:
            raise BadParameter(f"config line {n}: unknown key {key!r}")
        out[key] = val.strip()
    return out


# -- building systems and pseudo-orbits -------------------------------------


def parse_system(text: str):
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    if name == "cat" and not arg:
        return cat_map()
    if name == "toral":
        vals = [int(v) for v in arg.split(",")]
        k = int(round(len(vals) ** 0.5))
        if k * k != len(vals):
            raise BadParameter(f"system: toral needs a square number of integers, got {len(vals)}")
        return build_toral_system([vals[i * k:(i + 1) * k] for i in range(k)])
    if name == "golden" and not arg:
        return golden_mean_shift()
    if name == "full":
        return full_shift(int(arg or 2))
    if name == "sft" and arg:
        return load_sft(arg)
    if name == "northsouth":
        return build_north_south(float(arg or 0.1))
    raise BadParameter(f"system: unrecognized {text!r}")


def parse_point(system, text: str):
    text = text.strip()
    if isinstance(system, NorthSouthCircleMap):
        named = {"sink": system.sink, "source": system.source}
        return named[text] if text in named else float(Fraction(text)) % 1.0
    if isinstance(system, Sft):
        p = SymbolicPoint.decode(text) if "|" in text else SymbolicPoint.periodic(tuple(int(c) for c in text))
        if not system.is_admissible(p):
            raise BadParameter(f"point {text!r} is not admissible")
        return p
    coords = [Fraction(c) for c in text.split(":")]
    if len(coords) != system.n:
        raise BadParameter(f"point {text!r} has {len(coords)} coordinates, expected {system.n}")
    return TorusPoint.from_coords(coords)


def _random_start(system, seed: int):
    rng = np.random.default_rng(seed)
    if isinstance(system, HyperbolicToralMap):
        return TorusPoint.from_coords(rng.random(system.n))
    if isinstance(system, Sft):
        return system.random_point(rng, -4, 8)
    return float(rng.random())


def _parse_kicks(text: str) -> dict:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        i, sep, r = item.partition("@")
        if not sep:
            raise BadParameter(f"kicks: expected i@r, got {item!r}")
        out[int(i)] = float(r)
    return out


def build_pseudo_orbit(cfg: ExperimentConfig, system):
    if cfg.input:
        return serialize.read_pseudo_orbit(cfg.input)
    if cfg.window < 1:
        raise BadWindow(f"window = {cfg.window} < 1")
    if cfg.splice:
        parts = cfg.splice.split(",")
        if len(parts) != 2:
            raise BadParameter(f"splice: expected 'Y,X', got {cfg.splice!r}")
        return splice_orbits(system, parse_point(system, parts[0]), parse_point(system, parts[1]), W=cfg.window)
    start = parse_point(system, cfg.start) if cfg.start else _random_start(system, cfg.seed)
    return generate_pseudo_orbit(system, start, ErrorSchedule.parse(cfg.schedule), cfg.window, cfg.seed,
                                 kicks=_parse_kicks(cfg.kicks))


# -- subcommands ------------------------------------------------------------


def _write(path: str, text: str) -> None:
    if path:
        Path(path).write_text(text)


def _finish(verdict: str, expect: str) -> int:
    if expect and verdict != expect:
        print(f"verdict {verdict} does not match expected {expect}")
        return EXIT_MISMATCH
    return EXIT_OK


def _certify(cfg: ExperimentConfig, system, po) -> int:
    cert = shadowing.certify_unshadowable(system, po, cfg.eps, cfg.window, cfg.grid)
    d = serialize.nonshadow_to_dict(cert)
    _write(cfg.cert, serialize.dump_json(d))
    _write(cfg.out, serialize.candidates_csv(cert))
    verdict = "unshadowable" if cert.certified else "survivor"
    print(f"candidates {cert.n_candidates}  max slack {serialize.fmt(d['max_slack'])}")
    if cert.certified:
        print(f"no orbit stays within {serialize.fmt(cert.certified_eps)} on [-{cfg.window}, {cfg.window}]")
    else:
        print(f"survivor {serialize.encode_point(system, cert.survivor)}  "
              f"max deviation {serialize.fmt(cert.survivor_deviation)}")
    print(f"verdict {verdict}")
    return _finish(verdict, cfg.expect)


def run_shadow(cfg: ExperimentConfig) -> int:
    """Shadow the configured pseudo-orbit and write the deviation CSV and certificate."""
    system = parse_system(cfg.system)
    po = build_pseudo_orbit(cfg, system)
    _write(cfg.po_out, serialize.pseudo_orbit_to_csv(po))
    if isinstance(system, NorthSouthCircleMap) and not (cfg.expect and cfg.expect != "unshadowable"):
        # no solver applies to this map; only the negative certificate can be produced
        return _certify(cfg, system, po)
    kw = {}
    if isinstance(system, HyperbolicToralMap) and cfg.tail_terms > 0:
        kw["tail_terms"] = cfg.tail_terms
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonDecayingInput)
        if cfg.method == "pipeline":
            cert = shadowing.two_sided_limit_shadow(system, po, cfg.eps, **kw)
        else:
            cert = shadowing.shadow(system, po, **kw)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _write(cfg.out, serialize.deviation_csv(cert))
    _write(cfg.cert, serialize.dump_json(serialize.certificate_to_dict(cert)))
    print(f"verdict {cert.verdict}")
    print(f"max deviation {serialize.fmt(cert.deviations.max())}  eps {serialize.fmt(cert.eps)}")
    print(f"orbit residual {serialize.fmt(cert.orbit_residual)}  truncation {serialize.fmt(cert.truncation_bound)}")
    return _finish(cert.verdict, cfg.expect)


def run_certify(cfg: ExperimentConfig) -> int:
    system = parse_system(cfg.system)
    po = build_pseudo_orbit(cfg, system)
    _write(cfg.po_out, serialize.pseudo_orbit_to_csv(po))
    return _certify(cfg, system, po)


def run_analyze(cfg: ExperimentConfig) -> int:
    system = parse_system(cfg.system)
    exp = analysis.expansivity_constant(system)
    rep = {
        "schema_version": serialize.SCHEMA_VERSION,
        "system": system.descriptor(),
        "expansivity_constant": float(exp) if exp else None,
        "shadowing_constant": None,
        "specification_spacing": None,
        "periodic_points": [],
        "relations": [],
    }
    if exp:
        rep["shadowing_constant"] = analysis.shadowing_constant(system, cfg.eps)
        rep["specification_spacing"] = analysis.specification_spacing(system, cfg.eps)
    recs = analysis.periodic_points(system, cfg.period_bound)
    for r in recs:
        rep["periodic_points"].append({
            "point": serialize.encode_point(system, r.point),
            "period": r.period, "index": r.index, "hyperbolic": r.hyperbolic,
            "rational": r.exact(),
        })
    for a in range(len(recs)):
        for b in range(a, len(recs)):
            rel = analysis.heteroclinic_relate(system, recs[a], recs[b])
            rep["relations"].append({"p": a, "q": b, "related": rel.related, "same_index": rel.same_index})
    print(f"system {json.dumps(rep['system'], sort_keys=True)}")
    print(f"expansivity constant {rep['expansivity_constant']}")
    print(f"shadowing constant at eps={cfg.eps!r}: {rep['shadowing_constant']}")
    print(f"specification spacing at eps={cfg.eps!r}: {rep['specification_spacing']}")
    print(f"periodic points of period <= {cfg.period_bound}: {len(recs)}")
    for k, p in enumerate(rep["periodic_points"]):
        where = ", ".join(f"{a}/{b}" for a, b in p["rational"]) if p["rational"] else p["point"]
        print(f"  [{k}] period {p['period']} index {p['index']} point {where}")
    unrelated = [(r["p"], r["q"]) for r in rep["relations"] if not r["related"]]
    print(f"heteroclinic pairs: {len(rep['relations']) - len(unrelated)} related, {len(unrelated)} unrelated")
    _write(cfg.report, serialize.dump_json(rep))
    return EXIT_OK


def run_verify(name: str) -> int:
    if name not in suites.SUITES:
        raise UnknownSuite(f"unknown suite {name!r}; choose from {', '.join(suites.SUITES)}")
    return EXIT_OK if suites.run_suite(name) else EXIT_MISMATCH


# -- argument parsing -------------------------------------------------------


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="flat key = value file; flags override its values")
    p.add_argument("--dump-config", action="store_true", help="print the effective configuration and exit")
    for f in fields(ExperimentConfig):
        flag = "--" + f.name.replace("_", "-")
        p.add_argument(flag, dest=f.name, type=_FIELD_TYPES[f.name], default=None,
                       help=f"{HELP[f.name]} (default: {f.default!r})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="limitshadow", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("shadow", "shadow a pseudo-orbit and write the deviation CSV and certificate"),
        ("certify", "certify on a grid that a pseudo-orbit has no eps-shadow"),
        ("analyze", "expansivity, shadowing constant, spacing, periodic points, relations"),
    ):
        _add_config_flags(sub.add_parser(name, help=text, description=text))
    v = sub.add_parser("verify", help="run a fixed-seed check bundle", description="run a fixed-seed check bundle")
    v.add_argument("suite", help=f"one of: {', '.join(suites.SUITES)}")
    return parser


def config_from_args(args) -> ExperimentConfig:
    values = parse_config_text(Path(args.config).read_text()) if args.config else {}
    for f in fields(ExperimentConfig):
        if getattr(args, f.name) is not None:
            values[f.name] = getattr(args, f.name)
    return ExperimentConfig(**values)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "verify":
            return run_verify(args.suite)
        cfg = config_from_args(args)
        if args.dump_config:
            sys.stdout.write(cfg.to_text())
            return EXIT_OK
        return {"shadow": run_shadow, "certify": run_certify, "analyze": run_analyze}[args.command](cfg)
    except (BadParameter, BadWindow, OSError) as exc:
        print(f"limitshadow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ShadowError as exc:
        print(f"limitshadow: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MISMATCH

