"""Compare the jit-compiled kernels against the pure-numpy reference.

Backend selection happens once at import time (MFTR_NO_NUMBA=1 forces the
reference), so each backend is measured in its own subprocess and the parent
merges the results into one table::

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --repeats 9 --solve
"""

import argparse
import json
import os
import subprocess
import sys
import time

SHAPES = ((14, 690), (112, 6_499), (500, 4_000))
OPS = ("value", "gradient", "hvp", "curvature_diagonal")


def best_of(repeats, fn):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def worker(repeats, solve):
    import numpy as np

    import mftr
    from mftr import LossKind, LossModel

    rng = np.random.Generator(np.random.PCG64(7))
    rows = []
    for n, q in SHAPES:
        d = mftr.Dataset(np.asfortranarray(rng.standard_normal((n, q))),
                         np.where(rng.random(q) < 0.5, 1.0, -1.0))
        w = rng.standard_normal(n) * 0.1
        v = rng.standard_normal(n)
        for kind in (LossKind.LOG_LOSS, LossKind.LEAST_SQUARES):
            model = LossModel.for_dataset(kind, d)
            calls = {
                "value": lambda: model.value(d, w),
                "gradient": lambda: model.gradient(d, w),
                "hvp": lambda: model.hvp(d, w, v),
                "curvature_diagonal": lambda: model.curvature_diagonal(d, w),
            }
            for op in OPS:
                calls[op]()  # warm the jit cache before timing
                rows.append({"n": n, "q": q, "loss": kind.value, "op": op,
                             "seconds": best_of(repeats, calls[op])})
    if solve:
        from mftr.synth import australian_like

        d = australian_like()
        model = LossModel.for_dataset(LossKind.LEAST_SQUARES, d)
        cfg = mftr.TrustRegionConfig(full_solver="stcg", full_solver_max_iter=2)
        run = lambda: mftr.minimize(d, model, cfg, mftr.ClassicalTR(), np.zeros(d.n))
        run()
        rows.append({"n": d.n, "q": d.q, "loss": "ls", "op": "minimize(tr)",
                     "seconds": best_of(max(1, repeats // 3), run)})
    print(json.dumps({"backend": mftr.active_backend(), "rows": rows}))


def run_backend(no_numba, args):
    env = dict(os.environ)
    if no_numba:
        env["MFTR_NO_NUMBA"] = "1"
    else:
        env.pop("MFTR_NO_NUMBA", None)
    cmd = [sys.executable, os.path.abspath(__file__), "--worker",
           "--repeats", str(args.repeats)]
    if args.solve:
        cmd.append("--solve")
    out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5,
                    help="timings keep the best of this many calls (default 5)")
    ap.add_argument("--solve", action="store_true",
                    help="also time a full trust-region solve per backend")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.worker:
        worker(args.repeats, args.solve)
        return 0

    fast = run_backend(False, args)
    ref = run_backend(True, args)
    if fast["backend"] == ref["backend"]:
        print(f"note: both subprocesses report the {ref['backend']} backend "
              f"(numba unavailable?)", file=sys.stderr)

    print(f"{'n':>5} {'q':>6} {'loss':<4} {'op':<18} "
          f"{fast['backend']:>12} {ref['backend']:>12} {'speedup':>8}")
    for a, b in zip(fast["rows"], ref["rows"]):
        assert (a["n"], a["q"], a["loss"], a["op"]) == (b["n"], b["q"], b["loss"], b["op"])
        ratio = b["seconds"] / a["seconds"] if a["seconds"] > 0 else float("inf")
        print(f"{a['n']:>5} {a['q']:>6} {a['loss']:<4} {a['op']:<18} "
              f"{a['seconds']:>11.2e}s {b['seconds']:>11.2e}s {ratio:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
