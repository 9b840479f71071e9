"""Experiment sweeps and extremal search.

A sweep is the cross product fields x dims x sizes x seeds.  Each
(cell, seed index) gets its own PCG64 stream seeded from
sha256(config hash, cell id, seed index), so a cell's set does not depend
on which worker runs it or on what ran before.  Rows are written in cell
order through one writer; ``FQDIST_THREADS`` sets the worker count.

CSV columns are fixed (see ``COLUMNS``); flag columns hold True/False or
are blank when the check did not run.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator

import numpy as np

from . import __version__, kernels
from .analysis import (
    FLAG_NAMES,
    OBSERVED_NAMES,
    REPORT_COLUMNS,
    best_pin,
    check_ir_threshold,
    diagnose,
)
from .errors import BadFactorization, CapExceeded, FqdistError
from .ffield import FieldSpec, field_of_order, make_field
from .spectra import distance_set
from .vecspace import (
    PinSpec,
    PointSet,
    generate,
    make_rng,
    product_set,
    random_factors,
    valid_pins,
)

FAMILIES = ("random", "product", "full_space", "isotropic_line", "interval_grid", "sphere")
PIN_POLICIES = ("all", "best", "fixed")
SWEEP_CHECKS = ("cs_chain", "identity", "bound", "distpinned", "dot", "ir_threshold")
DEFAULT_POINT_CAP = 1 << 16

PROVENANCE = ("row_id", "cell_id", "config_hash", "code_version", "backend", "timestamp")
CELL_COLUMNS = ("family", "n_target", "seed_index", "seed", "engine")
COLUMNS = (PROVENANCE + CELL_COLUMNS + REPORT_COLUMNS
           + tuple(f"flag_{n}" for n in FLAG_NAMES)
           + tuple(f"obs_{n}" for n in OBSERVED_NAMES) + ("passed",))


@dataclass
class ExperimentConfig:
    fields: list = dc_field(default_factory=list)
    dims: list = dc_field(default_factory=list)
    family: str = "random"
    sizes: list = dc_field(default_factory=list)
    alphas: list = dc_field(default_factory=list)
    pin_policy: str = "best"
    pin: tuple | None = None
    metric: str = "distance"
    engine: str = "direct"
    seeds: int = 1
    base_seed: int = 0
    checks: list = dc_field(default_factory=lambda: ["cs_chain"])
    family_params: dict = dc_field(default_factory=dict)
    point_cap: int = DEFAULT_POINT_CAP
    output: str | None = None
    jsonl: bool = False
    timestamps: bool = False

    def __post_init__(self):
        self.fields = [tuple(int(v) for v in f) if isinstance(f, (list, tuple)) else _pk(int(f))
                       for f in self.fields]
        self.dims = [int(d) for d in self.dims]
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if self.pin_policy not in PIN_POLICIES:
            raise ValueError(f"pin_policy must be one of {PIN_POLICIES}")
        if self.pin_policy == "fixed":
            if self.pin is None:
                raise ValueError("pin_policy 'fixed' needs pin = [j, z]")
            self.pin = tuple(int(v) for v in self.pin)
        bad = set(self.checks) - set(SWEEP_CHECKS)
        if bad:
            raise ValueError(f"unknown checks {sorted(bad)}")
        for d in self.dims:
            if d < 1:
                raise ValueError("dimensions must be >= 1")
            for a in self.alphas:
                if not 0 < a <= d:
                    raise ValueError(f"alpha {a} outside (0, {d}]")
        if self.metric not in ("distance", "dot"):
            raise ValueError("metric must be 'distance' or 'dot'")
        if self.engine not in ("direct", "conv"):
            raise ValueError("engine must be 'direct' or 'conv'")

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        return cls(**data)

    def hash(self) -> str:
        body = asdict(self)
        for key in ("output", "jsonl", "timestamps"):
            body.pop(key)
        blob = json.dumps(body, sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _pk(q: int) -> tuple[int, int]:
    f = field_of_order(q)
    return f.p, f.k


def load_config(path) -> ExperimentConfig:
    """Read a TOML (default) or JSON (``.json``) config file."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        data = json.loads(text)
    else:
        try:
            import tomllib
        except ImportError:  # Python < 3.11
            import tomli as tomllib
        data = tomllib.loads(text)
    data = data.get("sweep", data)
    return ExperimentConfig.from_mapping(data)


@dataclass(frozen=True)
class Cell:
    p: int
    k: int
    d: int
    size: float | int | None
    seed_index: int

    @property
    def cell_id(self) -> str:
        size = "-" if self.size is None else f"{self.size:g}" if isinstance(self.size, float) else str(self.size)
        return f"p{self.p}k{self.k}-d{self.d}-n{size}-s{self.seed_index}"


def cells(config: ExperimentConfig) -> list[Cell]:
    if config.family in ("random", "product", "interval_grid", "sphere"):
        sizes = [int(s) for s in config.sizes] + [float(a) for a in config.alphas]
        if config.family in ("interval_grid", "sphere") and not sizes:
            sizes = [None]
    else:
        sizes = [None]
    return [Cell(p, k, d, s, i)
            for (p, k) in config.fields for d in config.dims for s in sizes
            for i in range(config.seeds)]


def cell_seed(config_hash: str, cell_id: str, seed_index: int, base_seed: int = 0) -> int:
    blob = f"{config_hash}|{cell_id}|{seed_index}|{base_seed}".encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "little")


def _target(cell: Cell, q: int) -> int | None:
    if cell.size is None:
        return None
    if isinstance(cell.size, float):
        return max(1, round(q ** cell.size))
    return cell.size


def build_set(config: ExperimentConfig, cell: Cell, field: FieldSpec, seed: int) -> tuple[PointSet, int | None]:
    q, d = field.q, cell.d
    n = _target(cell, q)
    fam = config.family
    extra = dict(config.family_params)
    if fam == "random":
        if n > q ** d:
            raise CapExceeded(f"cell {cell.cell_id}: |E|={n} exceeds q^d={q ** d}", cell.cell_id)
        return generate("random", field, d, seed, n=n), n
    if fam == "product":
        m = min(q, max(1, round(n ** (1 / d))))
        return product_set(field, random_factors(field, [m] * d, seed)), m ** d
    if fam == "interval_grid":
        m = extra.get("m", n if n is not None else q)
        return generate("interval_grid", field, d, seed, m=min(int(m), q)), None
    if fam == "sphere":
        return generate("sphere", field, d, seed, t=int(extra.get("t", n if n is not None else 1))), None
    return generate(fam, field, d, seed), None


def pins_for(config: ExperimentConfig, E: PointSet) -> list[PinSpec]:
    if E.size == 0:
        return []
    if config.pin_policy == "fixed":
        return [PinSpec(*config.pin)]
    if config.pin_policy == "best":
        pin = best_pin(E)
        if config.metric == "dot" and pin.z == 0:
            nonzero = sorted(valid_pins(E, pin.j) - {0})
            if nonzero:
                pin = PinSpec(pin.j, nonzero[0])
        return [pin]
    return [PinSpec(j, z) for j in range(1, E.d + 1) for z in sorted(valid_pins(E, j))]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_cell(config: ExperimentConfig, cell: Cell, config_hash: str) -> list[dict]:
    q = cell.p ** cell.k
    if q ** cell.d > config.point_cap * 64 or q ** cell.d > (1 << 28):
        raise CapExceeded(f"cell {cell.cell_id}: q^d={q ** cell.d} over cap", cell.cell_id)
    field = make_field(cell.p, cell.k)
    seed = cell_seed(config_hash, cell.cell_id, cell.seed_index, config.base_seed)
    E, n_target = build_set(config, cell, field, seed)
    if E.size > config.point_cap:
        raise CapExceeded(f"cell {cell.cell_id}: |E|={E.size} exceeds point cap {config.point_cap}",
                          cell.cell_id)
    rows = []
    checks = [c for c in config.checks if c != "ir_threshold"]
    ir = check_ir_threshold(E) if "ir_threshold" in config.checks else None
    pins = pins_for(config, E)
    if not pins:
        pins = [None]
    stamp = datetime.now(timezone.utc).isoformat() if config.timestamps else ""
    for pin in pins:
        row = {c: "" for c in COLUMNS}
        if pin is not None and checks:
            rep = diagnose(E, pin, config.metric, checks, config.engine)
            flat = rep.flat()
            passed = rep.passed
        else:
            flat = {"q": q, "d": cell.d, "size_E": E.size}
            passed = True
        if ir is not None:
            flat["flag_delta_full"] = ir.flags.get("delta_full", "")
            passed = passed and ir.passed
        row.update({k: _fmt(v) for k, v in flat.items() if k in row})
        pin_tag = "" if pin is None else f"-j{pin.j}z{pin.z}"
        row.update(
            row_id=cell.cell_id + pin_tag, cell_id=cell.cell_id, config_hash=config_hash,
            code_version=__version__, backend=kernels.BACKEND, timestamp=stamp,
            family=config.family, n_target=_fmt(n_target), seed_index=str(cell.seed_index),
            seed=str(seed), engine=config.engine, p=str(cell.p), k=str(cell.k), passed=str(passed),
        )
        rows.append(row)
    return rows


def _cell_rows(config: ExperimentConfig, skip) -> Iterator[list[dict]]:
    h = config.hash()
    todo = [c for c in cells(config) if c.cell_id not in skip]
    threads = max(1, int(os.environ.get("FQDIST_THREADS", "1") or 1))
    if threads == 1:
        for c in todo:
            yield run_cell(config, c, h)
        return
    with ThreadPoolExecutor(threads) as pool:
        yield from pool.map(lambda c: run_cell(config, c, h), todo)


def sweep(config: ExperimentConfig, skip=frozenset()) -> Iterator[dict]:
    """Yield result rows in cell order, skipping cell ids in ``skip``."""
    for rows in _cell_rows(config, skip):
        yield from rows


def _resume_state(path: Path, config_hash: str | None = None) -> set[str]:
    """Cell ids already on disk.

    The last cell in the file is dropped and recomputed, since an
    interrupted run may have written it only partly.
    """
    if not path.exists() or path.stat().st_size == 0:
        return set()
    raw = path.read_bytes().decode()
    reader = csv.DictReader(io.StringIO(raw))
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise FqdistError(f"{path} has a different column layout; refusing to append")
    rows = [r for r in reader if r.get("passed") in ("True", "False")]
    if config_hash is not None and any(r["config_hash"] != config_hash for r in rows):
        raise FqdistError(f"{path} was written by a different config; refusing to append")
    if rows:
        last = rows[-1]["cell_id"]
        rows = [r for r in rows if r["cell_id"] != last]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    path.write_text(buf.getvalue())
    return {r["cell_id"] for r in rows}


@dataclass
class SweepSummary:
    rows: int = 0
    failed: int = 0
    skipped_cells: int = 0

    @property
    def ok(self) -> bool:
        return self.failed == 0


def run_sweep(config: ExperimentConfig, output=None) -> SweepSummary:
    """Run a sweep to CSV (and JSON lines when configured), resuming if possible.

    A CapExceeded error leaves every earlier cell on disk; rerunning the
    same config picks up where it stopped.
    """
    output = output or config.output
    summary = SweepSummary()
    if output is None:
        for row in sweep(config):
            summary.rows += 1
            summary.failed += row["passed"] != "True"
        return summary
    path = Path(output)
    done = _resume_state(path, config.hash())
    summary.skipped_cells = len(done)
    new = not path.exists() or path.stat().st_size == 0
    jpath = path.with_suffix(".jsonl") if config.jsonl else None
    if jpath is not None and not done:
        jpath.write_text("")
    with path.open("a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=COLUMNS, lineterminator="\n")
        if new:
            writer.writeheader()
            fh.flush()
        for rows in _cell_rows(config, done):
            writer.writerows(rows)
            fh.flush()
            if jpath is not None:
                with jpath.open("a") as jh:
                    jh.writelines(json.dumps(r) + "\n" for r in rows)
            summary.rows += len(rows)
            summary.failed += sum(r["passed"] != "True" for r in rows)
    return summary


# -- extremal search -----------------------------------------------------------

def product_distance_set(field: FieldSpec, factors) -> frozenset[int]:
    """Delta(A_1 x ... x A_d) as the sumset of the squared difference sets."""
    acc = np.zeros(1, dtype=np.int64)
    for a in factors:
        a = np.asarray(sorted(a), dtype=np.int64)
        diff = np.unique(field.square(field.sub(a[:, None], a[None, :]).ravel()))
        acc = np.unique(field.add(acc[:, None], diff[None, :]).ravel())
    return frozenset(int(v) for v in acc)


@dataclass
class SearchResult:
    pointset: PointSet
    factors: list
    delta_size: int
    initial_delta: int
    baseline_delta: int | None
    trail: list = dc_field(default_factory=list)


def _factor_sizes(field: FieldSpec, d: int, target_size, sizes) -> list[int]:
    if sizes is None:
        if target_size is None:
            raise BadFactorization("need target_size or sizes")
        m = round(target_size ** (1 / d))
        if m ** d != target_size:
            raise BadFactorization(f"{target_size} is not a perfect {d}-th power; pass sizes")
        sizes = [m] * d
    sizes = [int(s) for s in sizes]
    if len(sizes) != d or any(not 1 <= s <= field.q for s in sizes):
        raise BadFactorization(f"factor sizes {sizes} do not fit d={d}, q={field.q}")
    return sizes


def isotropic_grid_delta(field: FieldSpec, m: int) -> int | None:
    """|Delta({0..m-1} x i{0..m-1})|, or None when -1 is not a square."""
    i = field.sqrt_minus_one()
    if i is None:
        return None
    a = list(range(m))
    return len(product_distance_set(field, [a, [field.mul(v, i) for v in a]]))


def search_extremal(field: FieldSpec | int, d: int, target_size=None, sizes=None, steps: int = 1000,
                    seed=0, restarts: int = 1, family: str = "product") -> SearchResult:
    """Hill-climb over product sets to make |Delta(E)| small.

    One move swaps a single element of one factor; the move is kept when
    |Delta| does not grow.  ``steps`` is split evenly across ``restarts``,
    each restart drawing fresh factors.  Nothing here claims optimality.
    """
    if family != "product":
        raise ValueError("only the product family is searchable")
    if isinstance(field, int):
        field = field_of_order(field)
    sizes = _factor_sizes(field, d, target_size, sizes)
    q = field.q
    rng = make_rng(seed)
    per = [steps // restarts + (1 if r < steps % restarts else 0) for r in range(restarts)]
    best = None
    initial = None
    trail = []
    for r, budget in enumerate(per):
        factors = [sorted(int(v) for v in rng.choice(q, size=s, replace=False)) for s in sizes]
        score = len(product_distance_set(field, factors))
        if initial is None:
            initial = score
        trail.append((r, 0, score, True))
        for step in range(1, budget + 1):
            i = int(rng.integers(d))
            inside = factors[i]
            outside = sorted(set(range(q)) - set(inside))
            if not outside:
                trail.append((r, step, score, False))
                continue
            drop = inside[int(rng.integers(len(inside)))]
            add = outside[int(rng.integers(len(outside)))]
            cand = [list(f) for f in factors]
            cand[i] = sorted(set(inside) - {drop} | {add})
            cand_score = len(product_distance_set(field, cand))
            accepted = cand_score <= score
            if accepted:
                factors, score = cand, cand_score
            trail.append((r, step, score, accepted))
        if best is None or score < best[1]:
            best = (factors, score)
    factors, score = best
    baseline = isotropic_grid_delta(field, sizes[0]) if d == 2 and sizes[0] == sizes[1] else None
    return SearchResult(product_set(field, factors), factors, score, initial, baseline, trail)


def delta_size(E: PointSet) -> int:
    return len(distance_set(E))
