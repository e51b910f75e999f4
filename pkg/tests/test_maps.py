import math
from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from hetbaker.dyck import Window, enumerate_words, height_profile, is_admissible
from hetbaker.maps import (
    BoundaryOrbitError,
    Box,
    CodingError,
    EmptyCylinderError,
    Params,
    apply_F,
    apply_f2,
    apply_f3,
    apply_f3_inv,
    as_fraction,
    branch_image,
    central_log_sum,
    cylinder_box,
    jacobian_branch,
    jacobian_det,
    orbit_coding,
    periodic_orbit_from_word,
    point_from_window,
    region_index,
)

P = Params(2, F(1, 4), F(1, 8))


def unit_fractions(max_den=997):
    return st.builds(F, st.integers(0, 10**6), st.integers(2, max_den)).map(lambda f: f - math.floor(f))


points3 = st.tuples(unit_fractions(), unit_fractions(), unit_fractions())


def test_params_validation():
    assert P.c0 == F(1, 2) and P.c1 == F(1, 6) and P.c2 == F(1, 3)
    assert Params(3, F(1, 5)).b == F(1, 5)
    with pytest.raises(ValueError):
        Params(2, F(1, 2))
    with pytest.raises(ValueError):
        Params(1, F(1, 4))
    with pytest.raises(ValueError):
        as_fraction("0.25")
    assert as_fraction("3/12") == F(1, 4)


def test_region_examples():
    assert region_index(P, (0.1, 0.5)) == 1
    assert region_index(P, (0.6, 0.2)) == 3
    assert region_index(P, (0.6, 0.5)) == 4
    assert region_index(P, (F(1, 4), F(0))) == 2
    assert region_index(P, (F(1), F(1))) == 4


def test_apply_F_examples():
    assert apply_F(P, F(1, 10)) == F(2, 5)
    assert apply_F(P, F(3, 4)) == F(1, 2)
    assert apply_F(P, F(0)) == 0
    assert apply_F(P, 0.1) == pytest.approx(0.4)


def test_apply_f2_examples():
    assert apply_f2(P, (F(1, 10), F(1, 2))) == (F(2, 5), F(1, 4))
    assert apply_f2(P, (F(3, 5), F(1, 5))) == (F(1, 5), F(2, 5))
    assert apply_f2(P, (F(3, 5), F(7, 10))) == (F(1, 5), F(2, 5))


def test_apply_f3_examples():
    assert apply_f3(P, (F(1, 10), F(1, 2), F(2, 5))) == (F(2, 5), F(1, 4), F(3, 10))
    assert apply_f3(P, (F(3, 5), F(1, 5), F(2, 5))) == (F(1, 5), F(2, 5), F(4, 5))
    assert apply_f3(P, (F(0), F(0), F(0))) == (0, 0, 0)
    fl = apply_f3(P, (0.6, 0.2, 0.4))
    assert fl == pytest.approx((0.2, 0.4, 0.8))


def test_inverse_examples_and_boundary():
    for q in [(F(2, 5), F(1, 4), F(3, 10)), (F(1, 5), F(2, 5), F(4, 5))]:
        assert apply_f3(P, apply_f3_inv(P, q)) == q
    # left branches fill z < 1 - mb, right branches z > 1 - mb
    assert branch_image(P, 1)[2] == (0, F(3, 4))
    assert branch_image(P, 3)[2] == (F(3, 4), F(7, 8))
    with pytest.raises(ValueError):
        apply_f3_inv(P, (F(1, 2), F(1, 3), F(3, 4)))


@settings(max_examples=300)
@given(points3)
def test_inverse_round_trip(p):
    q = apply_f3(P, p)
    try:
        back = apply_f3_inv(P, q)
    except ValueError:
        assume(False)
    assert back == p


def test_orbit_coding_examples():
    w = orbit_coding(P, (F(1, 10), F(1, 2), F(2, 5)), 2)
    assert w.symbols == (1, 2) and w.start == 0
    with pytest.raises(CodingError) as err:
        orbit_coding(P, (F(1, 2), F(1, 3), F(1, 3)), 3)
    assert err.value.index == 0
    with pytest.raises(ValueError):
        orbit_coding(P, (F(1, 10), F(1, 2)), 2, 1)


@settings(max_examples=100)
@given(points3, st.integers(1, 20))
def test_conjugacy_with_shift(p, n):
    try:
        w = orbit_coding(P, p, n + 1)
    except CodingError:
        assume(False)
    assert orbit_coding(P, apply_f3(P, p), n).symbols == w.symbols[1:]
    assert is_admissible(w.symbols, P.alphabet)


@settings(max_examples=100)
@given(points3, st.integers(1, 6), st.integers(0, 6))
def test_coding_window_cylinder_contains_point(p, nf, nb):
    try:
        w = orbit_coding(P, p, nf, nb)
    except CodingError:
        assume(False)
    assert is_admissible(w.symbols, P.alphabet)
    assert cylinder_box(P, w).contains(p)


def test_cylinder_examples():
    assert cylinder_box(P, [1]).intervals == ((0, F(1, 4)), (0, 1), (0, 1))
    assert cylinder_box(P, [1, 3]).intervals == ((F(1, 8), F(1, 4)), (0, 1), (0, 1))
    assert cylinder_box(P, [1, 4]).is_empty
    assert cylinder_box(P, [1, 3], dim=2).intervals == ((F(1, 8), F(1, 4)), (0, 1))


def test_backward_cylinder_is_branch_image():
    for i in range(1, 5):
        box = cylinder_box(P, Window((i,), -1))
        assert box.intervals == branch_image(P, i)


def test_cylinder_window_must_touch_zero():
    with pytest.raises(ValueError):
        cylinder_box(P, Window((1, 3), 1))
    with pytest.raises(ValueError):
        cylinder_box(P, Window((1, 3), -1), dim=2)


def test_cylinder_equivalence_short_words():
    for n in range(1, 6):
        for w in product(range(1, 5), repeat=n):
            for start in (0, -n, -(n // 2)):
                box = cylinder_box(P, Window(w, start))
                assert (not box.is_empty) == is_admissible(w, P.alphabet), (w, start)


@settings(max_examples=100)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=6), st.integers(1, 4),
       st.booleans(), st.integers(0, 6))
def test_nesting(word, extra, left, shift):
    start = -min(shift, len(word))
    w = Window(tuple(word), start)
    if left:
        ext = Window((extra,) + w.symbols, start - 1)
    else:
        ext = Window(w.symbols + (extra,), start)
    assert cylinder_box(P, ext).subset_of(cylinder_box(P, w))


def test_point_from_window():
    widths = []
    for k in range(1, 6):
        box, c = point_from_window(P, Window((1, 3) * k))
        assert box.contains(c)
        widths.append(box.diameters[0])
    assert all(b < a for a, b in zip(widths, widths[1:]))
    assert widths[-1] <= widths[0] / 8**4
    with pytest.raises(EmptyCylinderError):
        point_from_window(P, Window((1, 4)))


def test_jacobian_examples():
    assert jacobian_branch(P, 1) == (4, F(1, 2), F(3, 4))
    assert jacobian_branch(P, 3) == (2, 2, F(1, 8))


@pytest.mark.parametrize("m", [2, 3, 5])
def test_volume_preserved_at_c2_c1(m):
    q = Params(m, F(1, m + 1), F(1, m * (m + 1)))
    for i in range(1, 2 * m + 1):
        assert jacobian_det(q, i) == 1


@given(st.lists(st.integers(1, 4), max_size=30))
def test_central_sum_law(word):
    H = height_profile(word, P.alphabet).values[-1]
    assert central_log_sum(P, word) == pytest.approx(-H * math.log(2), abs=1e-9)


def test_periodic_neutral_continuum():
    orb = periodic_orbit_from_word(P, [1, 3])
    assert orb.x_star == F(1, 7)
    assert orb.multipliers[1] == 1 and orb.neutral and orb.unstable_dim is None
    lo, hi = orb.y_fix
    assert lo < hi
    assert orb.to_json()["unstable_dim"] == "neutral"


@pytest.mark.parametrize("word,central,dim", [([1, 1, 3], F(1, 2), 1), ([1, 3, 3], 2, 2)])
def test_periodic_boundary_examples(word, central, dim):
    # y* = 0 sits on the edge of the y-cells, so the orbit is flagged but still solved
    with pytest.raises(BoundaryOrbitError) as err:
        periodic_orbit_from_word(P, word)
    orb = err.value.orbit
    assert orb.multipliers[1] == central and orb.unstable_dim == dim
    assert orb.y_fix == 0


@pytest.mark.parametrize("word,y,central,dim", [
    ([1, 2, 1, 3], F(2, 3), F(1, 4), 1),
    ([1, 3, 3, 4], F(1, 3), 4, 2),
])
def test_periodic_interior_orbits(word, y, central, dim):
    orb = periodic_orbit_from_word(P, word)
    assert orb.y_fix == y
    assert orb.multipliers[1] == central and orb.unstable_dim == dim
    p = orb.points[0]
    for _ in word:
        p = apply_f3(P, p)
    assert p == orb.points[0]
    assert orbit_coding(P, orb.points[0], 2 * len(word)).symbols == tuple(word) * 2


def test_periodic_rejects_inadmissible():
    with pytest.raises(ValueError):
        periodic_orbit_from_word(P, [1, 4])
    with pytest.raises(ValueError):
        periodic_orbit_from_word(P, [1, 1, 3, 4])  # a1 a1 b1 b2 closes the wrong bracket
    with pytest.raises(ValueError):
        periodic_orbit_from_word(P, [])


def test_box_json():
    b = Box(((F(1, 8), F(1, 4)), (F(0), F(1))))
    assert b.to_json() == {"empty": False, "intervals": [["1/8", "1/4"], ["0", "1"]]}
    assert b.center == (F(3, 16), F(1, 2))


def test_every_admissible_short_word_cylinder_nonempty_square():
    for w in enumerate_words(P.alphabet, 4):
        assert not cylinder_box(P, w, dim=2).is_empty
