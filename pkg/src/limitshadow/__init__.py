"""Constructive shadowing of pseudo-orbits on hyperbolic toral maps,
subshifts of finite type and a north-south circle map."""

from .analysis import (
    expansivity_constant,
    find_attracting_set,
    find_repelling_set,
    heteroclinic_relate,
    periodic_points,
    shadowing_constant,
    specification_spacing,
    stable_unstable_intersection,
)
from .pseudo_orbit import ErrorSchedule, PseudoOrbit, classify, generate_pseudo_orbit, replace_points, splice_orbits
from .shadowing import (
    Specification,
    certify_unshadowable,
    shadow,
    shadow_linear,
    shadow_sft,
    shadow_specification,
    two_sided_limit_shadow,
)
from .systems import (
    SymbolicPoint,
    TorusPoint,
    build_north_south,
    build_sft,
    build_toral_system,
    cat_map,
    full_shift,
    golden_mean_shift,
    load_sft,
    torus_point,
)

__version__ = "0.1.0"
