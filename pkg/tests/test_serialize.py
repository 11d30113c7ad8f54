"""Text formats round-trip losslessly."""

import json

import numpy as np
import pytest

from limitshadow import serialize
from limitshadow.errors import BadParameter
from limitshadow.pseudo_orbit import ErrorSchedule, PseudoOrbit, generate_pseudo_orbit, splice_orbits
from limitshadow.shadowing import shadow_linear, shadow_sft
from limitshadow.systems import SymbolicPoint, build_north_south, cat_map, golden_mean_shift, torus_point

CAT, GM, NS = cat_map(), golden_mean_shift(), build_north_south(0.1)


@pytest.mark.parametrize("po", [
    generate_pseudo_orbit(CAT, torus_point(0.3, 0.6), ErrorSchedule("inv_linear", 0.3), 20, 7),
    splice_orbits(GM, SymbolicPoint.periodic((0,)), SymbolicPoint.periodic((0, 1)), W=8),
    splice_orbits(NS, NS.sink, NS.source, W=5),
])
def test_pseudo_orbit_roundtrip(po, tmp_path):
    path = tmp_path / "po.csv"
    serialize.write_pseudo_orbit(path, po)
    back = serialize.read_pseudo_orbit(path)
    assert back.W == po.W
    for i in range(-po.W - 10, po.W + 11):
        assert back.point(i) == po.point(i)
    assert serialize.pseudo_orbit_to_csv(back) == path.read_text()


def test_pseudo_orbit_schema_checked():
    text = serialize.pseudo_orbit_to_csv(splice_orbits(NS, NS.sink, NS.source, W=3))
    with pytest.raises(BadParameter):
        serialize.pseudo_orbit_from_csv(text.replace("schema_version=1", "schema_version=9"))


def test_number_format():
    assert serialize.fmt(0.1) == "1.0000000000000001e-01"
    assert float(serialize.fmt(np.pi)) == np.pi


def test_certificate_json_roundtrip(tmp_path):
    po = splice_orbits(CAT, torus_point(0, 0), torus_point(0.1, 0.2), W=30)
    cert = shadow_linear(CAT, po)
    d = serialize.certificate_to_dict(cert)
    path = tmp_path / "c.json"
    path.write_text(serialize.dump_json(d))
    loaded = serialize.load_certificate(path)
    assert loaded["schema_version"] == serialize.SCHEMA_VERSION
    system, z = serialize.certificate_point(loaded)
    assert z == cert.shadow_point and system.rows == CAT.rows
    assert loaded["verdict"] == "two_sided_limit_shadowed"


def test_sft_certificate_point():
    po = splice_orbits(GM, SymbolicPoint.periodic((0,)), SymbolicPoint.periodic((0, 1)), W=8)
    cert = shadow_sft(GM, po)
    d = json.loads(serialize.dump_json(serialize.certificate_to_dict(cert)))
    _, z = serialize.certificate_point(d)
    assert z.canonical() == cert.shadow_point.canonical()


def test_deviation_csv_shape():
    po = splice_orbits(CAT, torus_point(0, 0), torus_point(0.1, 0.2), W=10)
    lines = serialize.deviation_csv(shadow_linear(CAT, po)).splitlines()
    assert lines[0] == "i,error,deviation" and len(lines) == 22
