"""Incidence spectra nu(t) and their supports.

Two engines for the distance form:

* ``direct`` enumerates every pair (x, y) in F x E through the kernels.
* ``conv`` counts difference vectors N(v) = #{(x, y) : x - y = v} with an
  exact number-theoretic transform over (Z_p)^{kd}, one length-p axis at a
  time, then sums N over norm classes.  ``fft=True`` swaps the exact
  transform for a floating FFT whose output is rounded and rejected if any
  entry sits 0.4 or more from an integer.

Work over F is split into fixed-size chunks; ``FQDIST_THREADS`` sets how
many run at once.  Integer merges make the result independent of that.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import BadDimension, EmptySet, MemoryCap, ToleranceExceeded
from .ffield import FieldSpec, is_prime
from .vecspace import PinSpec, PointSet, decode, norms, pin_slice, same_space

CONV_CAP = 1 << 24
CHUNK_ROWS = 4096
METRICS = ("distance", "dot")


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("FQDIST_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class Spectrum:
    field: FieldSpec
    counts: np.ndarray
    metric: str = "distance"
    engine: str = "direct"
    size_F: int = 0
    size_E: int = 0
    meta: dict = dc_field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, Spectrum):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.counts, other.counts)

    def __getitem__(self, t: int) -> int:
        return int(self.counts[t])

    @property
    def first_moment(self) -> int:
        return sum(int(c) for c in self.counts)

    @property
    def second_moment(self) -> int:
        return sum(int(c) * int(c) for c in self.counts)

    def support(self, exclude_zero: bool = False) -> frozenset[int]:
        return support(self, exclude_zero)

    def to_csv(self, seed=None) -> str:
        f = self.field
        lines = [
            f"# p={f.p},k={f.k},d={self.meta.get('d', '')},F={self.size_F},E={self.size_E},"
            f"metric={self.metric},engine={self.engine},seed={'' if seed is None else seed}",
            "t,count",
        ]
        lines += [f"{t},{int(c)}" for t, c in enumerate(self.counts)]
        return "\n".join(lines) + "\n"


def support(s: Spectrum, exclude_zero: bool = False) -> frozenset[int]:
    out = {int(t) for t in np.flatnonzero(s.counts)}
    if exclude_zero:
        out.discard(0)
    return frozenset(out)


def _chunked(fn, F: np.ndarray, combine):
    chunks = [F[i:i + CHUNK_ROWS] for i in range(0, max(F.shape[0], 1), CHUNK_ROWS)]
    threads = thread_count()
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(fn, chunks))
    else:
        parts = [fn(c) for c in chunks]
    return combine(parts)


def _check_metric(metric: str) -> None:
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")


def form_spectrum(F: PointSet, E: PointSet, metric: str = "distance", backend: str | None = None) -> Spectrum:
    """Direct pair enumeration for either form."""
    _check_metric(metric)
    same_space(F, E)
    k = kernels.get(backend)
    t = F.field.kernel_tables()
    E_c = np.ascontiguousarray(E.coords)
    counts = _chunked(
        lambda chunk: k.form_counts(np.ascontiguousarray(chunk), E_c, t, metric),
        F.coords,
        lambda parts: np.sum(parts, axis=0, dtype=np.int64),
    )
    return Spectrum(F.field, np.asarray(counts, dtype=np.int64), metric, "direct", F.size, E.size, {"d": F.d})


def distance_spectrum(F: PointSet, E: PointSet, engine: str = "direct", fft: bool = False,
                      backend: str | None = None) -> Spectrum:
    """counts[t] = #{(x, y) in F x E : ||x - y|| = t}."""
    same_space(F, E)
    if engine == "direct":
        return form_spectrum(F, E, "distance", backend)
    if engine != "conv":
        raise ValueError(f"unknown engine {engine!r}")
    N = pair_difference_counts(F, E, fft=fft)
    table = norm_table(F.field, F.d)
    counts = np.zeros(F.field.q, dtype=np.int64)
    np.add.at(counts, table, N)
    return Spectrum(F.field, counts, "distance", "conv-fft" if fft else "conv", F.size, E.size, {"d": F.d})


def dot_spectrum(F: PointSet, E: PointSet, backend: str | None = None) -> Spectrum:
    """counts[t] = #{(x, y) in F x E : x.y = t}."""
    return form_spectrum(F, E, "dot", backend)


def spectrum(F: PointSet, E: PointSet, metric: str = "distance", engine: str = "direct") -> Spectrum:
    _check_metric(metric)
    if metric == "dot":
        if engine != "direct":
            raise ValueError("the dot form only has the direct engine")
        return dot_spectrum(F, E)
    return distance_spectrum(F, E, engine)


def pinned_distance_set(E: PointSet, pin: PinSpec, exclude_zero: bool = False) -> frozenset[int]:
    if E.size == 0:
        raise EmptySet("pinned distance set of an empty set")
    return support(distance_spectrum(pin_slice(E, pin), E), exclude_zero)


def distance_set(E: PointSet, exclude_zero: bool = False) -> frozenset[int]:
    return support(distance_spectrum(E, E), exclude_zero)


# -- convolution engine ------------------------------------------------------

@lru_cache(maxsize=32)
def norm_table(field: FieldSpec, d: int) -> np.ndarray:
    """||v|| for every v in F_q^d, indexed like PointSet indices."""
    n = field.q ** d
    if n > CONV_CAP:
        raise MemoryCap(f"q^d = {n} exceeds conv cap {CONV_CAP}")
    dtype = np.uint8 if field.q <= 256 else np.uint32
    table = norms(field, decode(field, d, np.arange(n, dtype=np.int64))).astype(dtype)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=32)
def ntt_params(p: int, bound: int) -> tuple[int, int]:
    """Prime P = 1 (mod p) above bound with a primitive p-th root of unity w."""
    P = (bound // p + 1) * p + 1
    while not is_prime(P):
        P += p
    if P >= 1 << 31:
        raise MemoryCap("NTT modulus would overflow 64-bit products")
    e = (P - 1) // p
    for h in range(2, P):
        w = pow(h, e, P)
        if w != 1:
            return P, w
    raise AssertionError("no root of unity")  # pragma: no cover


def _ntt_axis(X: np.ndarray, axis: int, M: np.ndarray, P: int) -> np.ndarray:
    X = np.moveaxis(X, axis, -1)
    out = np.zeros_like(X)
    p = M.shape[0]
    for j in range(p):
        out = (out + X[..., j:j + 1] * M[:, j]) % P
    return np.moveaxis(out, -1, axis)


def _ntt(X: np.ndarray, w: int, P: int) -> np.ndarray:
    p = X.shape[0]
    M = np.array([[pow(w, a * b, P) for b in range(p)] for a in range(p)], dtype=np.int64)
    for axis in range(X.ndim):
        X = _ntt_axis(X, axis, M, P)
    return X


def pair_difference_counts(F: PointSet, E: PointSet, fft: bool = False) -> np.ndarray:
    """N(v) = #{(x, y) in F x E : x - y = v} for every v in F_q^d."""
    same_space(F, E)
    f = F.field
    n = f.q ** F.d
    if n > CONV_CAP:
        raise MemoryCap(f"q^d = {n} exceeds conv cap {CONV_CAP}")
    m = f.k * F.d
    shape = (f.p,) * m
    a = F.indicator.astype(np.int64).reshape(shape)
    b = E.indicator.astype(np.int64).reshape(shape)
    if fft:
        raw = np.fft.ifftn(np.fft.fftn(a) * np.conj(np.fft.fftn(b))).real
        N = np.rint(raw)
        if raw.size and np.max(np.abs(raw - N)) >= 0.4:
            raise ToleranceExceeded("FFT rounding residual >= 0.4")
        return N.astype(np.int64).reshape(n)
    P, w = ntt_params(f.p, max(n, 2))
    w_inv = pow(w, P - 2, P)
    prod = (_ntt(a, w, P) * _ntt(b, w_inv, P)) % P
    N = _ntt(prod, w_inv, P)
    scale = pow(pow(f.p, m, P), P - 2, P)
    return ((N * scale) % P).reshape(n)


# -- sum-product sets ---------------------------------------------------------

def _line_values(A: PointSet) -> np.ndarray:
    if A.d != 1:
        raise BadDimension("sum-product sets need a subset of F_q (d = 1)")
    return A.indices


def product_set(A: PointSet) -> np.ndarray:
    f = A.field
    a = _line_values(A)
    return np.unique(f.mul(a[:, None], a[None, :]))


def _sumset(field: FieldSpec, X: np.ndarray, Y: np.ndarray) -> frozenset[int]:
    if X.size == 0 or Y.size == 0:
        return frozenset()
    return frozenset(int(v) for v in np.unique(field.add(X[:, None], Y[None, :])))


def aa_plus_aa(A: PointSet) -> frozenset[int]:
    """{a1 a2 + a3 a4 : a_i in A}."""
    AA = product_set(A)
    return _sumset(A.field, AA, AA)


def aa_plus_za(A: PointSet, z: int) -> frozenset[int]:
    """{a1 a2 + z a3 : a_i in A}."""
    f = A.field
    AA = product_set(A)
    zA = np.unique(f.mul(_line_values(A), z))
    return _sumset(f, AA, zA)
