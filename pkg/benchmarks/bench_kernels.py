"""Compare the compiled and numpy kernel backends (and the conv engine).

    python3 benchmarks/bench_kernels.py [--repeat 3] [--csv out.csv]

Every timing is the best of ``--repeat`` runs.  Results are checked for
equality across backends before anything is reported.
"""
import argparse
import csv
import sys
import time

import numpy as np

from fqdist import field_of_order, kernels
from fqdist.analysis import phase_matrix, trace_product_table
from fqdist.spectra import distance_spectrum
from fqdist.vecspace import PinSpec, pin_slice, random_set

CASES = [
    # (q, d, |E|)
    (13, 2, 150),
    (9, 3, 500),
    (27, 2, 600),
    (31, 3, 2000),
    (49, 2, 2000),
]


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_case(q, d, n, repeat):
    f = field_of_order(q)
    E = random_set(f, d, n, q * 100 + d)
    Ez = pin_slice(E, PinSpec(1, 1))
    C = np.ascontiguousarray(E.coords)
    Z = np.ascontiguousarray(Ez.coords)
    t = f.kernel_tables()
    G = np.ascontiguousarray(phase_matrix(Ez, E, "distance"))
    trs = trace_product_table(f)
    roots = f.roots_of_unity
    cos_t, sin_t = np.ascontiguousarray(roots.real), np.ascontiguousarray(roots.imag)
    rows = []
    ref = {}
    for name in sorted(kernels.BACKENDS):
        k = kernels.get(name)
        jobs = {
            "form_counts": lambda: k.form_counts(C, C, t, "distance"),
            "form_energy": lambda: k.form_energy(Z, C, t, "distance"),
            "char_energy": lambda: k.char_energy(G, trs, cos_t, sin_t),
        }
        for kernel, fn in jobs.items():
            secs, out = best_of(fn, repeat)
            if kernel in ref:
                same = np.allclose(out, ref[kernel], rtol=1e-9) if kernel == "char_energy" else np.array_equal(out, ref[kernel])
                if not same:
                    raise SystemExit(f"backend mismatch: {kernel} q={q} d={d}")
            else:
                ref[kernel] = out
            rows.append({"q": q, "d": d, "n": n, "backend": name, "kernel": kernel, "seconds": secs})
    secs, conv = best_of(lambda: distance_spectrum(E, E, "conv").counts, repeat)
    assert np.array_equal(conv, ref["form_counts"])
    rows.append({"q": q, "d": d, "n": n, "backend": "numpy", "kernel": "conv_engine", "seconds": secs})
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--csv")
    args = ap.parse_args(argv)
    rows = []
    for case in CASES:
        rows += bench_case(*case, args.repeat)
    base = {(r["q"], r["d"], r["kernel"]): r["seconds"] for r in rows if r["backend"] == "python"}
    print(f"{'q':>3} {'d':>2} {'|E|':>5}  {'kernel':<12} {'backend':<7} {'seconds':>9} {'speedup':>8}")
    for r in rows:
        b = base.get((r["q"], r["d"], r["kernel"]))
        speed = f"{b / r['seconds']:7.1f}x" if b and r["backend"] != "python" else ""
        print(f"{r['q']:>3} {r['d']:>2} {r['n']:>5}  {r['kernel']:<12} {r['backend']:<7} {r['seconds']:9.4f} {speed:>8}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    if "cython" not in kernels.BACKENDS:
        print("compiled backend not built; only the numpy fallback was timed", file=sys.stderr)


if __name__ == "__main__":
    main()
