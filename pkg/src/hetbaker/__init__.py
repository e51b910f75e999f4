"""Heterochaos baker maps and the Dyck/Motzkin shifts."""

from .dyck import (
    UNIT,
    ZERO,
    Alphabet,
    HeightProfile,
    ReducedForm,
    Window,
    build_follower_graph,
    count_words,
    enumerate_words,
    follower_state,
    height_profile,
    is_admissible,
    make_periodic_word,
    multiply,
    reduce,
    rho_star,
    window_closure_check,
)
from .maps import (
    Box,
    Params,
    PeriodicOrbit,
    apply_F,
    apply_f2,
    apply_f3,
    apply_f3_inv,
    cylinder_box,
    jacobian_branch,
    orbit_coding,
    periodic_orbit_from_word,
    point_from_window,
    region_index,
)

__version__ = "0.1.0"
