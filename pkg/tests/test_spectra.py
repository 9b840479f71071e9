import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fqdist import (
    PinSpec,
    PointSet,
    aa_plus_aa,
    aa_plus_za,
    distance_set,
    distance_spectrum,
    dot_spectrum,
    field_of_order,
    make_field,
    pair_difference_counts,
    pinned_distance_set,
)
from fqdist import kernels
from fqdist.errors import EmptySet, FieldMismatch, MemoryCap
from fqdist.spectra import norm_table, ntt_params, spectrum
from fqdist.vecspace import full_space, product_set, interval_grid, isotropic_line, random_set

import oracles

# Frozen spectra, produced by oracles.distance_spectrum / oracles.dot_spectrum.
E5 = [(0, 0), (1, 2), (3, 4), (2, 2), (4, 0)]
E9 = [(0, 1), (4, 7), (8, 2), (5, 5), (1, 3), (7, 0)]


def test_frozen_spectrum_f5():
    f = make_field(5)
    E = PointSet.from_points(f, 2, E5)
    assert distance_spectrum(E, E).counts.tolist() == [11, 4, 2, 8, 0]
    assert dot_spectrum(E, E).counts.tolist() == [11, 5, 2, 3, 4]


def test_frozen_spectrum_f9():
    f = make_field(3, 2)
    E = PointSet.from_points(f, 2, E9)
    assert distance_spectrum(E, E).counts.tolist() == [10, 4, 2, 2, 6, 2, 2, 4, 4]
    assert dot_spectrum(E, E).counts.tolist() == [4, 5, 4, 3, 0, 4, 5, 7, 4]
    Ez = PointSet.from_points(f, 2, oracles.pin_slice(E9, 1, 3))
    assert distance_spectrum(Ez, E).counts.tolist() == [10, 3, 2, 2, 7, 3, 2, 5, 2]


def test_grid_spectrum_all_engines():
    f = make_field(5)
    G = interval_grid(f, 2, 2)
    for engine, fft in (("direct", False), ("conv", False), ("conv", True)):
        assert distance_spectrum(G, G, engine, fft=fft).counts.tolist() == [4, 8, 4, 0, 0]


def test_dot_spectrum_full_f3():
    f = make_field(3)
    F = full_space(f, 2)
    assert dot_spectrum(F, F).counts.tolist() == [33, 24, 24]


@pytest.mark.parametrize("q", [3, 4, 5, 7, 8, 9])
@pytest.mark.parametrize("d", [2, 3])
def test_full_space_distance_set_is_field(q, d):
    assert distance_set(full_space(field_of_order(q), d)) == frozenset(range(q))


@pytest.mark.parametrize("q", [5, 9, 13])
def test_isotropic_line_distance_set(q):
    assert distance_set(isotropic_line(field_of_order(q))) == {0}
    assert distance_set(isotropic_line(field_of_order(q)), exclude_zero=True) == frozenset()


def test_pinned_distance_set_contained():
    f = make_field(7)
    E = product_set(f, [[0, 2, 3], [1, 5]])
    pin = PinSpec(1, 2)
    assert pinned_distance_set(E, pin) <= distance_set(E)
    with pytest.raises(EmptySet):
        pinned_distance_set(PointSet(f, 2, []), pin)


def test_moments():
    f = make_field(5)
    E = PointSet.from_points(f, 2, E5)
    s = distance_spectrum(E, E)
    assert s.first_moment == 25
    assert s.second_moment == 11 ** 2 + 4 ** 2 + 2 ** 2 + 8 ** 2
    assert s.support() == {0, 1, 2, 3}
    assert s.support(exclude_zero=True) == {1, 2, 3}


def test_csv_header():
    f = make_field(5)
    E = PointSet.from_points(f, 2, E5)
    text = distance_spectrum(E, E).to_csv(seed=4)
    lines = text.splitlines()
    assert lines[0] == "# p=5,k=1,d=2,F=5,E=5,metric=distance,engine=direct,seed=4"
    assert lines[1] == "t,count"
    assert lines[2:] == ["0,11", "1,4", "2,2", "3,8", "4,0"]


def test_mismatched_spaces():
    A = full_space(make_field(5), 2)
    B = full_space(make_field(7), 2)
    with pytest.raises(FieldMismatch):
        distance_spectrum(A, B)
    with pytest.raises(ValueError):
        spectrum(A, A, "dot", "conv")


def test_conv_cap(monkeypatch):
    import fqdist.spectra as sp
    monkeypatch.setattr(sp, "CONV_CAP", 10)
    E = full_space(make_field(5), 2)
    with pytest.raises(MemoryCap):
        pair_difference_counts(E, E)


def test_ntt_params():
    P, w = ntt_params(7, 1000)
    assert P % 7 == 1 and P > 1000
    assert pow(w, 7, P) == 1 and w != 1


def test_difference_counts_match_brute():
    f = make_field(2, 2)
    o = oracles.OracleField(2, 2)
    F = random_set(f, 2, 7, 1)
    E = random_set(f, 2, 9, 2)
    N = pair_difference_counts(F, E)
    brute = np.zeros(16, dtype=np.int64)
    for x in F.points():
        for y in E.points():
            v = [o.sub(a, b) for a, b in zip(x, y)]
            brute[v[0] + 4 * v[1]] += 1
    assert np.array_equal(N, brute)


def test_norm_table_read_only():
    t = norm_table(make_field(3), 2)
    assert t.tolist() == [0, 1, 1, 1, 2, 2, 1, 2, 2]
    with pytest.raises(ValueError):
        t[0] = 1


def test_threads_do_not_change_result(monkeypatch):
    import fqdist.spectra as sp
    f = make_field(7)
    E = random_set(f, 3, 300, 9)
    single = distance_spectrum(E, E).counts
    monkeypatch.setattr(sp, "CHUNK_ROWS", 17)
    monkeypatch.setenv("FQDIST_THREADS", "4")
    assert np.array_equal(distance_spectrum(E, E).counts, single)


def test_sum_product_sets():
    f = make_field(7)
    A = PointSet(f, 1, [1, 2])
    # A.A = {1, 2, 4}; sums of two products
    assert aa_plus_aa(A) == {2, 3, 4, 5, 6, 1}
    assert aa_plus_za(A, 3) == {f.add(a, b) for a in (1, 2, 4) for b in (3, 6)}


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(2, 1), (2, 2), (3, 1), (2, 3), (5, 1), (3, 2), (7, 1)]), st.integers(1, 3), st.data())
def test_spectra_match_oracle(pk, d, data):
    f = make_field(*pk)
    o = oracles.OracleField(*pk)
    cap = min(f.q ** d, 25)
    F = random_set(f, d, data.draw(st.integers(1, cap)), data.draw(st.integers(0, 10 ** 6)))
    E = random_set(f, d, data.draw(st.integers(1, cap)), data.draw(st.integers(0, 10 ** 6)))
    dist = oracles.distance_spectrum(o, F.points(), E.points())
    assert distance_spectrum(F, E).counts.tolist() == dist
    assert distance_spectrum(F, E, "conv").counts.tolist() == dist
    assert dot_spectrum(F, E).counts.tolist() == oracles.dot_spectrum(o, F.points(), E.points())


@pytest.mark.parametrize("name", sorted(kernels.BACKENDS))
def test_backends_agree(name):
    k = kernels.get(name)
    ref = kernels.get("python")
    # 2048 and 1031 sit above the pair-table cutoff and take the slow paths
    for q, d in ((4, 3), (9, 2), (13, 2), (8, 3), (2048, 2), (1031, 2), (3 ** 7, 1)):
        f = field_of_order(q)
        F = random_set(f, d, 50, q)
        E = random_set(f, d, 60, q + 1)
        t = f.kernel_tables()
        for metric in ("distance", "dot"):
            a = k.form_counts(np.ascontiguousarray(F.coords), np.ascontiguousarray(E.coords), t, metric)
            b = ref.form_counts(np.ascontiguousarray(F.coords), np.ascontiguousarray(E.coords), t, metric)
            assert np.array_equal(a, b)
            assert k.form_energy(np.ascontiguousarray(F.coords), np.ascontiguousarray(E.coords), t, metric) == \
                ref.form_energy(np.ascontiguousarray(F.coords), np.ascontiguousarray(E.coords), t, metric)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get("fortran")
