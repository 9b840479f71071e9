import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fqdist import PinSpec, Point, PointSet, field_of_order, generate, make_field, norm, pin_slice, valid_pins
from fqdist.errors import BadDimension, EmptySet, FieldMismatch, NoSqrtMinusOne
from fqdist.vecspace import (
    decode,
    encode,
    isotropic_line,
    projection_size,
    random_factors,
    random_set,
    sphere,
)

from oracles import OracleField, pin_slice as oracle_pin_slice


def test_index_encoding_round_trip():
    f = make_field(3, 2)
    idx = np.arange(9 ** 3)
    coords = decode(f, 3, idx)
    assert coords[10].tolist() == [1, 1, 0]
    assert np.array_equal(encode(f, coords), idx)


def test_pointset_basics():
    f = make_field(5)
    E = PointSet.from_points(f, 2, [(1, 2), (0, 0), (1, 2)])
    assert E.size == 2
    assert (1, 2) in E and (2, 1) not in E
    assert sorted(E.points()) == [(0, 0), (1, 2)]
    with pytest.raises(ValueError):
        PointSet.from_points(f, 2, [(5, 0)])
    with pytest.raises(BadDimension):
        PointSet.from_points(f, 2, [(1, 2, 3)])


def test_set_algebra():
    f = make_field(5)
    A = PointSet.from_points(f, 2, [(0, 0), (1, 1)])
    B = PointSet.from_points(f, 2, [(1, 1), (2, 3)])
    assert A.union(B).size == 3
    assert A.issubset(A.union(B)) and not A.issubset(B)
    assert sorted(A.translate([4, 4]).points()) == [(0, 0), (4, 4)]
    assert sorted(B.permute([1, 0]).points()) == [(1, 1), (3, 2)]
    with pytest.raises(FieldMismatch):
        A.union(PointSet.from_points(make_field(7), 2, [(0, 0)]))
    assert hash(A) == hash(PointSet.from_points(f, 2, [(1, 1), (0, 0)]))


def test_norm_on_points():
    f = make_field(3, 2)
    assert int(norm(Point(f, (3, 1)))) == 0  # x^2 + 1 = 0
    assert int(norm(Point(f, (1, 1)))) == 2


def test_pin_slice_is_reembedded_projection():
    f = make_field(3, 2)
    E = PointSet.from_points(f, 2, [(0, 1), (4, 7), (8, 2), (5, 5), (1, 3), (7, 0)])
    Ez = pin_slice(E, PinSpec(1, 3))
    assert sorted(Ez.points()) == oracle_pin_slice(E.points(), 1, 3)
    assert not Ez.issubset(E)  # the slice need not lie in E
    assert projection_size(E, 1) == Ez.size == 6


def test_pin_errors():
    f = make_field(5)
    E = PointSet.from_points(f, 2, [(1, 2)])
    with pytest.raises(BadDimension):
        pin_slice(E, PinSpec(3, 0))
    with pytest.raises(EmptySet):
        pin_slice(PointSet(f, 2, []), PinSpec(1, 0))
    assert valid_pins(E, 1) == {1}
    assert PinSpec.parse("2,3") == PinSpec(2, 3)


@pytest.mark.parametrize("q", [5, 9, 13, 17, 25])
def test_isotropic_line_is_null(q):
    f = field_of_order(q)
    Z = isotropic_line(f)
    assert Z.size == q
    assert set(f.add(f.square(Z.coords[:, 0]), f.square(Z.coords[:, 1])).tolist()) == {0}


def test_isotropic_line_q5_frozen():
    assert sorted(isotropic_line(make_field(5)).points()) == [(0, 0), (1, 2), (2, 4), (3, 1), (4, 3)]


def test_isotropic_line_absent_for_q_3_mod_4():
    with pytest.raises(NoSqrtMinusOne):
        isotropic_line(make_field(7))


def test_sphere_matches_oracle():
    f = make_field(3, 2)
    o = OracleField(3, 2)
    S = sphere(f, 2, 5)
    brute = [(a, b) for b in range(9) for a in range(9) if o.norm((a, b)) == 5]
    assert sorted(S.points()) == sorted(brute)


def test_generators_are_seeded():
    f = make_field(7)
    assert random_set(f, 3, 40, 11) == random_set(f, 3, 40, 11)
    assert random_set(f, 3, 40, 11) != random_set(f, 3, 40, 12)
    assert random_factors(f, [2, 3], 5) == random_factors(f, [2, 3], 5)
    E = generate("random_product", f, 2, seed=5, sizes=[2, 3])
    assert E.size == 6
    assert generate("full", f, 2).size == 49
    assert generate("grid", f, 3, m=2).size == 8
    with pytest.raises(ValueError):
        generate("nope", f)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([3, 4, 5, 7, 9]), st.integers(1, 3), st.data())
def test_slice_size_equals_projection(q, d, data):
    f = field_of_order(q)
    n = data.draw(st.integers(1, min(q ** d, 40)))
    E = random_set(f, d, n, data.draw(st.integers(0, 10 ** 6)))
    j = data.draw(st.integers(1, d))
    z = data.draw(st.integers(0, q - 1))
    Ez = pin_slice(E, PinSpec(j, z))
    assert Ez.size == projection_size(E, j)
    assert set(Ez.coords[:, j - 1].tolist()) == {z}
    assert sorted(Ez.points()) == oracle_pin_slice(E.points(), j, z)
