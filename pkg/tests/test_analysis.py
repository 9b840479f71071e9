from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fqdist import PinSpec, PointSet, field_of_order, make_field, pin_slice
from fqdist.analysis import (
    DiagnosticsReport,
    best_pin,
    best_slice,
    character_energy,
    check_ir_threshold,
    check_shparlinski,
    check_sumproduct,
    cs_chain,
    diagnose,
    is_product_set,
    second_moment_bound,
    second_moment_identity,
    theorem_check_distpinned,
    theorem_check_dot,
)
from fqdist.errors import BudgetExceeded, EmptySet, EvenCharacteristic, ZeroPin
from fqdist.vecspace import full_space, product_set, random_factors, random_set

import oracles


def _oracle_terms(E, pin, metric):
    o = oracles.OracleField(E.field.p, E.field.k)
    Ez = oracles.pin_slice(E.points(), pin.j, pin.z)
    W = len(Ez) * oracles.triple_count(o, Ez, E.points(), metric)
    R = len(Ez) * oracles.character_energy(o, Ez, E.points(), metric) / o.q
    return W, R


@pytest.mark.parametrize("metric", ["distance", "dot"])
@pytest.mark.parametrize("q,d,n,seed", [(5, 2, 9, 1), (9, 2, 20, 2), (7, 3, 30, 3), (3, 3, 12, 4)])
def test_identity_terms_match_oracle(metric, q, d, n, seed):
    E = random_set(field_of_order(q), d, n, seed)
    pin = PinSpec(2, 1)
    r = second_moment_identity(E, pin, metric)
    W, R = _oracle_terms(E, pin, metric)
    assert r.W_term == W
    assert r.R_term == pytest.approx(R, abs=1e-7)
    assert r.main_term == Fraction(r.size_Ez ** 2 * n ** 2, q)
    assert r.passed


def test_cs_chain_exact():
    f = make_field(5)
    E = PointSet.from_points(f, 2, [(0, 0), (1, 2), (3, 4), (2, 2), (4, 0)])
    r = cs_chain(E, E)
    # spectrum [11, 4, 2, 8, 0]
    assert (r.first_moment, r.second_moment, r.support_size) == (25, 205, 4)
    assert r.cs_lower_bound == 4  # ceil(625 / 205)
    assert r.passed


def test_cs_chain_flags_empty():
    f = make_field(5)
    with pytest.raises(EmptySet):
        cs_chain(PointSet(f, 2, []), full_space(f, 2))


def test_bound_full_space_tight():
    # E = F_q^d, any pin: E_z is a hyperplane slice of size q^(d-1)
    f = make_field(7)
    E = full_space(f, 2)
    r = second_moment_bound(E, PinSpec(1, 3), "distance")
    assert r.size_Ez == 7
    assert r.passed
    assert r.kappa_emp <= 2


def test_bound_rejections():
    E = random_set(make_field(2, 2), 2, 6, 0)
    with pytest.raises(EvenCharacteristic):
        second_moment_bound(E, PinSpec(1, 1))
    E = random_set(make_field(5), 2, 6, 0)
    with pytest.raises(ZeroPin):
        theorem_check_dot(E, PinSpec(1, 0))


def test_budget():
    E = random_set(make_field(13), 2, 100, 0)
    Ez = pin_slice(E, PinSpec(1, 1))
    with pytest.raises(BudgetExceeded):
        character_energy(Ez, E, "distance", budget=1000)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([3, 5, 7, 9, 11, 13, 25]), st.integers(2, 3), st.data())
def test_theorems_hold(q, d, data):
    f = field_of_order(q)
    n = data.draw(st.integers(1, min(q ** d, 200)))
    E = random_set(f, d, n, data.draw(st.integers(0, 10 ** 6)))
    j = data.draw(st.integers(1, d))
    z = data.draw(st.sampled_from(sorted(E.coords[:, j - 1].tolist())))
    r = theorem_check_distpinned(E, PinSpec(j, z))
    assert r.passed, r.flags
    if z:
        assert theorem_check_dot(E, PinSpec(j, z)).passed


def test_full_report_with_identity():
    E = random_set(field_of_order(13), 3, 169, 5)
    r = theorem_check_distpinned(E, PinSpec(2, 3), with_identity=True)
    assert r.passed
    assert set(r.flags) >= {"identity", "R_le_A_minus_B", "second_moment_bound", "derived_guarantee"}
    assert r.identity_residual < r.identity_tolerance
    assert "stated_guarantee" in r.observed
    d = r.to_dict()
    assert d["C"] == str(r.C) and d["passed"] is True
    assert DiagnosticsReport(**{k: v for k, v in vars(r).items()}).passed


def test_product_set_slice():
    f = make_field(7)
    E = product_set(f, [[0, 1, 5], [2, 3], [1, 4, 6]])
    assert is_product_set(E)
    assert not is_product_set(PointSet.from_points(f, 2, [(0, 0), (1, 1)]))
    assert best_pin(E) == PinSpec(2, 2)
    pin, r = best_slice(E)
    assert r.size_Ez == 9
    assert r.flags["pigeonhole_slice"] and r.flags["pinned_in_delta"]
    assert r.passed


@pytest.mark.parametrize("q", [5, 9, 13])
def test_best_slice_random_products(q):
    f = field_of_order(q)
    for seed in range(5):
        E = product_set(f, random_factors(f, [3, 2, 4], seed))
        _, r = best_slice(E)
        assert r.passed


def test_best_slice_char_two():
    f = make_field(2, 2)
    E = product_set(f, [[0, 1], [1, 2, 3]])
    _, r = best_slice(E)
    assert r.passed
    assert "derived_guarantee" not in r.flags


def test_sumproduct_q101():
    f = make_field(101)
    A = PointSet(f, 1, range(1, 34))
    rep = check_sumproduct(A)
    assert rep.values["premise_three_quarters"]
    assert rep.passed


def test_sumproduct_small_set_observed_only():
    f = make_field(101)
    rep = check_sumproduct(PointSet(f, 1, [1, 2, 3]))
    assert "nonzero_covered" in rep.observed
    assert rep.flags["size_bound"]


def test_shparlinski():
    f = make_field(31)
    A = PointSet(f, 1, range(2, 14))
    rep = check_shparlinski(A, 3)
    assert rep.passed
    with pytest.raises(ZeroPin):
        check_shparlinski(A, 0)


def test_ir_threshold():
    f = make_field(5)
    assert check_ir_threshold(full_space(f, 3)).flags["delta_full"]  # 5^6 >= 16 * 5^4
    small = check_ir_threshold(random_set(f, 2, 4, 0))
    assert not small.flags and "delta_full" in small.observed


def test_diagnose_merges():
    E = random_set(make_field(7), 2, 20, 2)
    r = diagnose(E, PinSpec(1, 3), "distance")
    assert {"cs_chain", "identity", "second_moment_bound", "derived_guarantee"} <= set(r.flags)
    assert r.passed
    r = diagnose(E, PinSpec(1, 0), "dot")
    assert "second_moment_bound" not in r.flags and r.passed
