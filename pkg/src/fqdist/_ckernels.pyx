# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled counting kernels; drop-in replacements for ``_pykernels``.

Prime fields use plain modular arithmetic.  Extension fields use the q x q
add/mul/subsq tables when the field ships them, and digit-wise addition with
log/exp multiplication otherwise.
"""
import numpy as np

ctypedef long long i64
ctypedef int i32


cdef struct Ctx:
    i64 p
    i64 q
    int k
    int d
    bint distance
    bint tables
    const i64* pw
    const i64* sq
    const i64* neg
    const i64* log
    const i64* exp
    const i32* add
    const i32* mul
    const i32* subsq


cdef inline i64 digit_add(const Ctx* c, i64 a, i64 b) noexcept nogil:
    cdef i64 s, r = 0
    cdef int i
    for i in range(c.k):
        s = a % c.p + b % c.p
        if s >= c.p:
            s -= c.p
        r += s * c.pw[i]
        a //= c.p
        b //= c.p
    return r


cdef inline i64 log_mul(const Ctx* c, i64 a, i64 b) noexcept nogil:
    if a == 0 or b == 0:
        return 0
    return c.exp[c.log[a] + c.log[b]]


cdef inline i64 form_value(const Ctx* c, const i64* x, const i64* y) noexcept nogil:
    cdef i64 acc = 0, diff, term
    cdef int i
    if c.k == 1:
        for i in range(c.d):
            if c.distance:
                diff = x[i] - y[i]
                acc += diff * diff
            else:
                acc += x[i] * y[i]
        return acc % c.p
    if c.tables:
        for i in range(c.d):
            if c.distance:
                term = c.subsq[x[i] * c.q + y[i]]
            else:
                term = c.mul[x[i] * c.q + y[i]]
            acc = c.add[acc * c.q + term]
        return acc
    for i in range(c.d):
        if c.distance:
            term = c.sq[digit_add(c, x[i], c.neg[y[i]])]
        else:
            term = log_mul(c, x[i], y[i])
        acc = digit_add(c, acc, term)
    return acc


cdef class _Tables:
    """Keeps contiguous copies alive while a Ctx points into them."""

    cdef object arrays
    cdef Ctx ctx

    def __init__(self, t, int d, str metric):
        cdef const i64[::1] pw, sq, neg, log, exp
        cdef const i32[:, ::1] add, mul, subsq
        arrs = {
            "pw": np.ascontiguousarray(t.pw, dtype=np.int64),
            "sq": np.ascontiguousarray(t.sq, dtype=np.int64),
            "neg": np.ascontiguousarray(t.neg, dtype=np.int64),
            "log": np.ascontiguousarray(t.log, dtype=np.int64),
            "exp": np.ascontiguousarray(t.exp, dtype=np.int64),
            "add": np.ascontiguousarray(t.add, dtype=np.int32),
            "mul": np.ascontiguousarray(t.mul, dtype=np.int32),
            "subsq": np.ascontiguousarray(t.subsq, dtype=np.int32),
        }
        self.arrays = arrs
        pw, sq, neg, log, exp = arrs["pw"], arrs["sq"], arrs["neg"], arrs["log"], arrs["exp"]
        self.ctx.p = t.p
        self.ctx.q = t.q
        self.ctx.k = t.k
        self.ctx.d = d
        self.ctx.distance = metric == "distance"
        self.ctx.pw = &pw[0]
        self.ctx.sq = &sq[0]
        self.ctx.neg = &neg[0]
        self.ctx.log = &log[0]
        self.ctx.exp = &exp[0]
        self.ctx.tables = arrs["add"].shape[0] == t.q
        if self.ctx.tables:
            add, mul, subsq = arrs["add"], arrs["mul"], arrs["subsq"]
            self.ctx.add = &add[0, 0]
            self.ctx.mul = &mul[0, 0]
            self.ctx.subsq = &subsq[0, 0]
        else:
            self.ctx.add = self.ctx.mul = self.ctx.subsq = NULL


def _points(A):
    return np.ascontiguousarray(A, dtype=np.int64)


def form_counts(F, E, t, metric):
    Fa, Ea = _points(F), _points(E)
    counts_arr = np.zeros(t.q, dtype=np.int64)
    if Fa.shape[0] == 0 or Ea.shape[0] == 0:
        return counts_arr
    cdef _Tables tab = _Tables(t, Fa.shape[1], metric)
    cdef const Ctx* c = &tab.ctx
    cdef const i64[:, ::1] Fv = Fa
    cdef const i64[:, ::1] Ev = Ea
    cdef i64[::1] counts = counts_arr
    cdef Py_ssize_t x, y, n = Fv.shape[0], m = Ev.shape[0]
    with nogil:
        for x in range(n):
            for y in range(m):
                counts[form_value(c, &Fv[x, 0], &Ev[y, 0])] += 1
    return counts_arr


def distance_counts(F, E, t):
    return form_counts(F, E, t, "distance")


def dot_counts(F, E, t):
    return form_counts(F, E, t, "dot")


def form_energy(F, E, t, metric):
    """sum over x in F, v in F_q of #{y in E : form(x, y) = v}**2."""
    Fa, Ea = _points(F), _points(E)
    if Fa.shape[0] == 0 or Ea.shape[0] == 0:
        return 0
    cdef _Tables tab = _Tables(t, Fa.shape[1], metric)
    cdef const Ctx* c = &tab.ctx
    cdef const i64[:, ::1] Fv = Fa
    cdef const i64[:, ::1] Ev = Ea
    hist_arr = np.zeros(t.q, dtype=np.int64)
    vals_arr = np.empty(Ea.shape[0], dtype=np.int64)
    cdef i64[::1] hist = hist_arr
    cdef i64[::1] vals = vals_arr
    cdef Py_ssize_t x, y, n = Fv.shape[0], m = Ev.shape[0]
    cdef i64 v, total = 0
    with nogil:
        for x in range(n):
            for y in range(m):
                v = form_value(c, &Fv[x, 0], &Ev[y, 0])
                vals[y] = v
                hist[v] += 1
            for y in range(m):
                v = vals[y]
                if hist[v]:
                    total += hist[v] * hist[v]
                    hist[v] = 0
    return int(total)


def char_energy(G, trs, cos_tab, sin_tab):
    cdef const i64[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.int64)
    cdef const i64[:, ::1] T = np.ascontiguousarray(trs, dtype=np.int64)
    cdef const double[::1] cs = np.ascontiguousarray(cos_tab, dtype=np.float64)
    cdef const double[::1] sn = np.ascontiguousarray(sin_tab, dtype=np.float64)
    cdef Py_ssize_t q = T.shape[0], n = Gv.shape[0], m = Gv.shape[1]
    cdef Py_ssize_t s, x, y
    cdef i64 idx
    cdef double re, im, total = 0.0
    if n == 0 or m == 0:
        return 0.0
    with nogil:
        for s in range(1, q):
            for x in range(n):
                re = 0.0
                im = 0.0
                for y in range(m):
                    idx = T[s, Gv[x, y]]
                    re += cs[idx]
                    im += sn[idx]
                total += re * re + im * im
    return total
