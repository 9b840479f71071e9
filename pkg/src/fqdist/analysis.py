"""Step-by-step verification of the pinned distance and dot-product bounds.

Notation follows the proofs: for a set E and pin (j, z), E_z is the pinned
slice, nu(t) counts pairs (x, y) in E_z x E with form(x, y) = t, and

    sum_t nu(t)^2  <=  W  =  |E_z| * #{(x, y, y') : form(x, y) = form(x, y')}
                       =  |E_z|^2 |E|^2 / q  +  R

where R (called II for the dot form) is a character sum.  Extending x over
the whole hyperplane {x_j = z} gives R <= A - B with

    A = q^(d-1) |E_z| * #{(y, y') : pi_j(y) = pi_j(y'), constraint(y_j, y'_j)}
    B = q^(d-2) |E_z| * #{(y, y') : pi_j(y) = pi_j(y')}

Everything except R is an exact integer or Fraction.  Only the constants
that follow from the displayed second-moment bounds, qC/(C + kappa), are
asserted; the stated kappa*C/(kappa*C + 1) forms are recorded in
``observed`` and never fail a check.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field as dc_field, fields
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import (
    BudgetExceeded,
    EmptySet,
    EvenCharacteristic,
    ToleranceExceeded,
    ZeroPin,
)
from .ffield import FieldSpec
from .spectra import (
    Spectrum,
    aa_plus_aa,
    aa_plus_za,
    distance_set,
    spectrum,
    support,
)
from .vecspace import (
    PinSpec,
    PointSet,
    dots,
    encode,
    make_rng,
    norms,
    pin_slice,
    projection_size,
    same_space,
    valid_pins,
)

KAPPA = {"distance": 3, "dot": 2}
CHAR_BUDGET = 50_000_000
TRACE_TABLE_CAP = 4096
NONNEG_TOL = 1e-9
REL_TOL = 1e-6


@dataclass
class DiagnosticsReport:
    metric: str
    q: int
    d: int
    p: int = 0
    k: int = 0
    pin_j: int | None = None
    pin_z: int | None = None
    z_valid: bool | None = None
    size_E: int = 0
    size_Ez: int = 0
    first_moment: int | None = None
    second_moment: int | None = None
    main_term: Fraction | None = None
    W_term: int | None = None
    R_term: float | None = None
    identity_residual: float | None = None
    identity_tolerance: float | None = None
    A_term: Fraction | None = None
    B_term: Fraction | None = None
    kappa_bound: int | None = None
    kappa_emp: float | None = None
    support_size: int | None = None
    cs_lower_bound: int | None = None
    C: Fraction | None = None
    guarantee_derived: Fraction | None = None
    guarantee_stated: Fraction | None = None
    flags: dict = dc_field(default_factory=dict)
    observed: dict = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def merge(self, other: "DiagnosticsReport") -> "DiagnosticsReport":
        for f in fields(self):
            if f.name in ("flags", "observed"):
                continue
            v = getattr(other, f.name)
            if v is not None and getattr(self, f.name) is None:
                setattr(self, f.name, v)
        self.flags.update(other.flags)
        self.observed.update(other.observed)
        return self

    def to_dict(self) -> dict:
        out = {}
        for key, v in asdict(self).items():
            out[key] = _plain(v)
        out["passed"] = self.passed
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    def flat(self) -> dict:
        """One-level mapping for CSV rows."""
        out = {}
        for key, v in self.to_dict().items():
            if key == "flags":
                out.update({f"flag_{n}": b for n, b in v.items()})
            elif key == "observed":
                out.update({f"obs_{n}": b for n, b in v.items()})
            else:
                out[key] = v
        return out

    def summary(self) -> str:
        d = self.to_dict()
        lines = [f"{k}={v}" for k, v in d.items() if k not in ("flags", "observed") and v is not None]
        lines += [f"flag.{n}={'PASS' if b else 'FAIL'}" for n, b in self.flags.items()]
        lines += [f"observed.{n}={b}" for n, b in self.observed.items()]
        return "\n".join(lines)


def _plain(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


@dataclass
class CheckReport:
    """Outcome of a whole-set check (sum-product, threshold)."""

    check: str
    q: int
    values: dict = dc_field(default_factory=dict)
    flags: dict = dc_field(default_factory=dict)
    observed: dict = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def to_dict(self) -> dict:
        return {"check": self.check, "q": self.q, **{k: _plain(v) for k, v in self.values.items()},
                "flags": _plain(self.flags), "observed": _plain(self.observed), "passed": self.passed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def summary(self) -> str:
        d = self.to_dict()
        lines = [f"{k}={v}" for k, v in d.items() if k not in ("flags", "observed")]
        lines += [f"flag.{n}={'PASS' if b else 'FAIL'}" for n, b in self.flags.items()]
        lines += [f"observed.{n}={b}" for n, b in self.observed.items()]
        return "\n".join(lines)


# -- helpers -----------------------------------------------------------------

def _new_report(E: PointSet, metric: str) -> DiagnosticsReport:
    f = E.field
    return DiagnosticsReport(metric=metric, q=f.q, d=E.d, p=f.p, k=f.k, size_E=E.size)


def _require_nonempty(*sets: PointSet) -> None:
    if any(s.size == 0 for s in sets):
        raise EmptySet("diagnostics need nonempty sets")


def _require_odd(field: FieldSpec) -> None:
    if field.p == 2:
        raise EvenCharacteristic("second-moment checks need odd characteristic")


def _pinned(E: PointSet, pin: PinSpec, report: DiagnosticsReport) -> PointSet:
    _require_nonempty(E)
    pin.check(E.field, E.d)
    Ez = pin_slice(E, pin)
    report.pin_j, report.pin_z = pin.j, pin.z
    report.z_valid = pin.z in valid_pins(E, pin.j)
    report.size_Ez = Ez.size
    return Ez


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def cs_from_spectrum(s: Spectrum) -> tuple[int, int, int, int, bool]:
    """(sum nu, sum nu^2, |support|, certified lower bound, chain holds)."""
    first, second = s.first_moment, s.second_moment
    supp = len(support(s))
    if second == 0:
        return first, second, supp, 0, first == 0
    return first, second, supp, ceil_div(first * first, second), first * first <= supp * second


# -- operations ----------------------------------------------------------------

def cs_chain(F: PointSet, E: PointSet, metric: str = "distance", engine: str = "direct") -> DiagnosticsReport:
    """(sum nu)^2 <= |support| * sum nu^2, in exact integers."""
    _require_nonempty(F, E)
    same_space(F, E)
    r = _new_report(E, metric)
    r.size_Ez = F.size
    s = spectrum(F, E, metric, engine)
    first, second, supp, lb, ok = cs_from_spectrum(s)
    r.first_moment, r.second_moment, r.support_size, r.cs_lower_bound = first, second, supp, lb
    r.flags["mass"] = first == F.size * E.size
    r.flags["cs_chain"] = ok
    r.flags["cs_lower_bound"] = lb <= supp
    return r


def phase_matrix(Ez: PointSet, E: PointSet, metric: str) -> np.ndarray:
    """g(x, y) whose characters expand the second moment.

    distance: ||y|| - 2 x.y   (so g(x,y) - g(x,y') = ||x-y|| - ||x-y'||)
    dot:      x.y
    """
    f = E.field
    xy = dots(f, np.asarray(Ez.coords), np.asarray(E.coords))
    if metric == "dot":
        return xy
    two = f.from_int(2)
    return f.sub(norms(f, E.coords)[None, :], f.mul(xy, two))


def trace_product_table(field: FieldSpec) -> np.ndarray:
    """T[s, t] = tr(s * t)."""
    if field.q > TRACE_TABLE_CAP:
        raise BudgetExceeded(f"q={field.q} too large for character tables")
    x = field.elements()
    return field.trace_table[field.mul(x[:, None], x[None, :])]


def character_energy(Ez: PointSet, E: PointSet, metric: str, budget: int = CHAR_BUDGET,
                     backend: str | None = None) -> tuple[float, int]:
    """sum_{s != 0} sum_{x in Ez} |sum_{y in E} chi(s g(x, y))|^2 and summand count."""
    f = E.field
    summands = (f.q - 1) * Ez.size * E.size
    if summands > budget:
        raise BudgetExceeded(f"{summands} character evaluations exceed budget {budget}")
    G = phase_matrix(Ez, E, metric)
    roots = f.roots_of_unity
    energy = kernels.get(backend).char_energy(
        np.ascontiguousarray(G), trace_product_table(f),
        np.ascontiguousarray(roots.real), np.ascontiguousarray(roots.imag))
    return float(energy), summands


def expansion_identity_holds(Ez: PointSet, E: PointSet, metric: str, trials: int = 200, seed=0) -> bool:
    """Check form(x,y) - form(x,y') = g(x,y) - g(x,y') on random triples."""
    f = E.field
    rng = make_rng(seed)
    X = np.asarray(Ez.coords)[rng.integers(0, Ez.size, trials)]
    Y = np.asarray(E.coords)[rng.integers(0, E.size, trials)]
    Y2 = np.asarray(E.coords)[rng.integers(0, E.size, trials)]

    def dot(a, b):
        acc = np.zeros(a.shape[0], dtype=np.int64)
        for i in range(a.shape[1]):
            acc = f.add(acc, f.mul(a[:, i], b[:, i]))
        return acc

    if metric == "dot":
        lhs = f.sub(dot(X, Y), dot(X, Y2))
        rhs = dot(X, f.sub(Y, Y2))
    else:
        two = f.from_int(2)
        lhs = f.sub(norms(f, f.sub(X, Y)), norms(f, f.sub(X, Y2)))
        g1 = f.sub(norms(f, Y), f.mul(two, dot(X, Y)))
        g2 = f.sub(norms(f, Y2), f.mul(two, dot(X, Y2)))
        rhs = f.sub(g1, g2)
    return bool(np.array_equal(lhs, rhs))


def second_moment_identity(E: PointSet, pin: PinSpec, metric: str = "distance",
                           budget: int = CHAR_BUDGET, strict: bool = True, seed=0) -> DiagnosticsReport:
    """W = |E_z|^2 |E|^2 / q + R, with W counted exactly and R by characters."""
    r = _new_report(E, metric)
    Ez = _pinned(E, pin, r)
    f = E.field
    t = f.kernel_tables()
    triples = kernels.get().form_energy(np.ascontiguousarray(Ez.coords), np.ascontiguousarray(E.coords), t, metric)
    W = Ez.size * triples
    main = Fraction(Ez.size ** 2 * E.size ** 2, f.q)
    energy, summands = character_energy(Ez, E, metric, budget)
    R = Ez.size * energy / f.q
    residual = abs(float(W - main) - R)
    tol = REL_TOL * max(summands, 1)
    s = spectrum(Ez, E, metric)
    r.first_moment, r.second_moment = s.first_moment, s.second_moment
    r.W_term, r.main_term, r.R_term = W, main, R
    r.identity_residual, r.identity_tolerance = residual, tol
    r.flags["identity"] = residual < tol
    r.flags["R_nonnegative"] = R >= -NONNEG_TOL
    r.flags["cs_triple"] = r.second_moment <= W
    r.flags["expansion_identity"] = expansion_identity_holds(Ez, E, metric, seed=seed)
    if strict and not r.flags["identity"]:
        raise ToleranceExceeded(f"identity residual {residual} >= {tol}")
    return r


def _grouped_indicator(E: PointSet, j: int) -> np.ndarray:
    """M[g, a] = 1 iff some y in E has pi_j(y) = g-th class and y_j = a."""
    c = np.asarray(E.coords)
    rest = np.delete(c, j - 1, axis=1)
    keys = encode(E.field, rest) if rest.shape[1] else np.zeros(c.shape[0], dtype=np.int64)
    _, group = np.unique(keys, return_inverse=True)
    M = np.zeros((int(group.max()) + 1, E.field.q), dtype=np.int64)
    M[group, c[:, j - 1]] = 1
    return M


def _pair_count(M: np.ndarray, cond: np.ndarray) -> int:
    return int(np.sum((M @ cond.astype(np.int64)) * M))


def ab_counts(E: PointSet, pin: PinSpec, metric: str) -> dict:
    """Raw pair counts behind the A and B terms."""
    f = E.field
    z = pin.z
    M = _grouped_indicator(E, pin.j)
    a = f.elements()[:, None]
    b = f.elements()[None, :]
    B_count = int(np.sum(M.sum(axis=1) ** 2))
    if metric == "distance":
        two_z = f.mul(f.from_int(2), z)
        cond = f.mul(two_z, f.sub(a, b)) == f.sub(f.sq_table[a], f.sq_table[b])
        split = (a == b) | ((f.add(a, b) == two_z) & (a != b))
        return {"A": _pair_count(M, cond), "A_split": _pair_count(M, split), "B": B_count}
    cond = f.mul(z, f.sub(a, b)) == 0
    return {"A": _pair_count(M, cond), "B": B_count}


def second_moment_bound(E: PointSet, pin: PinSpec, metric: str = "distance",
                        R_term: float | None = None) -> DiagnosticsReport:
    """sum nu^2 <= |E|^2 |E_z|^2 / q + kappa q^(d-1) |E| |E_z| with the A/B split."""
    f = E.field
    _require_odd(f)
    if metric == "dot" and pin.z == 0:
        raise ZeroPin("the dot-product bound needs z != 0")
    r = _new_report(E, metric)
    Ez = _pinned(E, pin, r)
    q, d = f.q, E.d
    s = spectrum(Ez, E, metric)
    first, second, supp, lb, ok = cs_from_spectrum(s)
    r.first_moment, r.second_moment, r.support_size, r.cs_lower_bound = first, second, supp, lb
    nn = E.size * Ez.size
    main = Fraction(nn * nn, q)
    unit = Fraction(q ** d, q) * nn  # q^(d-1) |E| |E_z|
    kappa = KAPPA[metric]
    r.main_term, r.kappa_bound = main, kappa
    r.kappa_emp = float(max(Fraction(0), second - main) / unit)
    r.flags["mass"] = first == nn
    r.flags["cs_chain"] = ok
    r.flags["second_moment_bound"] = second <= main + kappa * unit
    if metric == "distance":
        r.flags["second_moment_bound_kappa2"] = second <= main + 2 * unit
    counts = ab_counts(E, pin, metric)
    r.A_term = Fraction(q ** d, q) * Ez.size * counts["A"]
    r.B_term = Fraction(q ** d, q * q) * Ez.size * counts["B"]
    r.flags["B_bound"] = r.B_term <= unit
    r.flags["A_bound"] = r.A_term <= 2 * unit
    if "A_split" in counts:
        r.flags["A_split"] = counts["A"] == counts["A_split"]
    if R_term is not None:
        r.R_term = R_term
        r.flags["R_le_A_minus_B"] = R_term <= float(r.A_term - r.B_term) + REL_TOL * max(float(unit), 1.0)
    return r


def _theorem(E: PointSet, pin: PinSpec, metric: str, with_identity: bool) -> DiagnosticsReport:
    f = E.field
    _require_odd(f)
    if metric == "dot" and pin.z == 0:
        raise ZeroPin("the dot-product check needs z != 0")
    R = None
    ident = None
    if with_identity:
        ident = second_moment_identity(E, pin, metric)
        R = ident.R_term
    r = second_moment_bound(E, pin, metric, R_term=R)
    if ident is not None:
        r.merge(ident)
    kappa = KAPPA[metric]
    C = Fraction(E.size * r.size_Ez, f.q ** E.d)
    r.C = C
    r.guarantee_derived = f.q * C / (C + kappa)
    r.guarantee_stated = f.q * kappa * C / (kappa * C + 1)
    r.flags["derived_guarantee"] = r.support_size >= r.guarantee_derived
    r.observed["stated_guarantee"] = r.support_size >= r.guarantee_stated
    return r


def theorem_check_distpinned(E: PointSet, pin: PinSpec, with_identity: bool = False) -> DiagnosticsReport:
    """|Delta_z^j(E)| >= qC/(C+3), C = |E||E_z|/q^d."""
    return _theorem(E, pin, "distance", with_identity)


def theorem_check_dot(E: PointSet, pin: PinSpec, with_identity: bool = False) -> DiagnosticsReport:
    """|{x.y : x in E_z, y in E}| >= qC/(C+2), z != 0."""
    return _theorem(E, pin, "dot", with_identity)


def is_product_set(E: PointSet) -> bool:
    return E.size > 0 and math.prod(len(valid_pins(E, j)) for j in range(1, E.d + 1)) == E.size


def best_pin(E: PointSet) -> PinSpec:
    """Pin maximising |E_z|; ties go to the smallest j, then smallest valid z."""
    _require_nonempty(E)
    best_j = max(range(1, E.d + 1), key=lambda j: (projection_size(E, j), -j))
    return PinSpec(best_j, min(valid_pins(E, best_j)))


def best_slice(E: PointSet) -> tuple[PinSpec, DiagnosticsReport]:
    """Pick the largest slice and run the pinned distance check on it."""
    pin = best_pin(E)
    if E.field.p == 2:
        r = cs_chain(pin_slice(E, pin), E)
        r.pin_j, r.pin_z, r.z_valid = pin.j, pin.z, True
    else:
        r = theorem_check_distpinned(E, pin)
    product = is_product_set(E)
    slice_ok = r.size_Ez ** E.d >= E.size ** (E.d - 1)
    pinned = support(spectrum(pin_slice(E, pin), E))
    contained = pinned <= distance_set(E)
    target = r.flags if product else r.observed
    target["pigeonhole_slice"] = slice_ok
    target["pinned_in_delta"] = contained
    return pin, r


def check_sumproduct(A: PointSet) -> CheckReport:
    """A.A + A.A against both sum-product statements.

    C_size is taken as large as the premise allows, (|A|/q^(2/3))^2, which
    makes the second bound q|A|^3 / (q^2 + |A|^3) exactly.
    """
    f = A.field
    q = f.q
    S = aa_plus_aa(A)
    n = A.size
    rep = CheckReport("sumproduct", q)
    rep.values.update(size_A=n, result_size=len(S))
    big = n ** 4 > q ** 3
    rep.values["premise_three_quarters"] = big
    nonzero_covered = set(range(1, q)) <= S
    if big:
        rep.flags["nonzero_covered"] = nonzero_covered
    else:
        rep.observed["nonzero_covered"] = nonzero_covered
    bound = Fraction(q * n ** 3, q * q + n ** 3)
    rep.values["C_size"] = n * n / q ** (4 / 3)
    rep.values["size_bound"] = bound
    rep.flags["size_bound"] = len(S) >= bound
    return rep


def check_shparlinski(A: PointSet, z: int) -> CheckReport:
    """|A.A + zA| via the pinned dot-product bound on A x A."""
    f = A.field
    _require_odd(f)
    if z == 0:
        raise ZeroPin("z must be nonzero")
    q = f.q
    n = A.size
    S = aa_plus_za(A, z)
    rep = CheckReport("shparlinski", q)
    C = Fraction(n ** 3, q * q)
    rep.values.update(size_A=n, z=z, z_in_A=bool(z in set(A.indices.tolist())),
                      result_size=len(S), C=C, guarantee_derived=q * C / (C + 2))
    c_stated = n / q ** (2 / 3)
    stated = 2 * c_stated / (2 * c_stated + 1) * q
    rep.values["guarantee_stated"] = stated
    rep.flags["derived_guarantee"] = len(S) >= q * C / (C + 2)
    rep.observed["stated_guarantee"] = len(S) >= stated
    return rep


def check_ir_threshold(E: PointSet) -> CheckReport:
    """|E| >= 4 q^((d+1)/2) should force Delta(E) = F_q."""
    f = E.field
    q, d = f.q, E.d
    rep = CheckReport("ir_threshold", q)
    premise = E.size * E.size >= 16 * q ** (d + 1)
    D = distance_set(E) if E.size else frozenset()
    rep.values.update(d=d, size_E=E.size, premise=premise, support_size=len(D))
    if premise:
        rep.flags["delta_full"] = len(D) == q
    else:
        rep.observed["delta_full"] = len(D) == q
    return rep


CHECKS = ("cs_chain", "identity", "bound", "distpinned", "dot")


def diagnose(E: PointSet, pin: PinSpec, metric: str = "distance", checks=CHECKS,
             engine: str = "direct") -> DiagnosticsReport:
    """Run the requested per-(E, pin) checks and merge them into one report."""
    checks = list(checks)
    r = _new_report(E, metric)
    Ez = _pinned(E, pin, r)
    if "cs_chain" in checks:
        r.merge(cs_chain(Ez, E, metric, engine if metric == "distance" else "direct"))
    R = None
    if "identity" in checks:
        ident = second_moment_identity(E, pin, metric, strict=False)
        R = ident.R_term
        r.merge(ident)
    odd = E.field.p != 2
    if "bound" in checks and odd and not (metric == "dot" and pin.z == 0):
        r.merge(second_moment_bound(E, pin, metric, R_term=R))
    theorem = "distpinned" if metric == "distance" else "dot"
    if theorem in checks and odd and not (metric == "dot" and pin.z == 0):
        r.merge(_theorem(E, pin, metric, False))
    return r


FLAG_NAMES = (
    "mass", "cs_chain", "cs_lower_bound", "identity", "R_nonnegative", "cs_triple",
    "expansion_identity", "second_moment_bound", "second_moment_bound_kappa2", "B_bound",
    "A_bound", "A_split", "R_le_A_minus_B", "derived_guarantee", "pigeonhole_slice",
    "pinned_in_delta", "delta_full",
)
OBSERVED_NAMES = ("stated_guarantee",)
REPORT_COLUMNS = tuple(f.name for f in fields(DiagnosticsReport) if f.name not in ("flags", "observed"))
