"""Acceptance gate: one test per numbered criterion, end to end.

Criteria 5-9 drive the packaged CLI on the bundled synthetic stand-ins for
the two small benchmark datasets, reading results back from the CSV and
manifest artifacts exactly as a user would. Each test finishes with a
single PASS line summarizing the measured quantities.
"""

import json
import statistics
import time
from dataclasses import dataclass

import numpy as np
import pytest

import mftr
from mftr import (
    ClassicalTR,
    FixedAlpha,
    LossKind,
    LossModel,
    SketchedTR,
    Status,
    SvdTR,
    TrustRegionConfig,
    cauchy_point,
    minimize,
    steihaug_cg,
    truncated_svd,
)
from mftr.cli import main as cli_main

from conftest import small_instance
from test_projection import jacobi_eigenvalues

GRAD_TOL = 1e-6


def run_cli(args):
    try:
        code = cli_main(args)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    return code


@dataclass(frozen=True)
class LoggedRun:
    dataset: str  # path
    loss: str
    solver: str  # "cp" or "stcg:2"
    method: str
    t: int | None
    seed: int
    csv: str
    iterations: int
    final_grad_norm: float
    status: str


def read_manifest(csv_path):
    return json.loads(csv_path.with_suffix(".manifest.json").read_text())


def launch(root, dataset, loss, solver, method, tag, t=None, seed=1, repeats=1):
    """One CLI invocation; returns the per-seed LoggedRun list."""
    base = root / f"{tag}.csv"
    args = [
        "run", "--dataset", str(dataset), "--loss", loss, "--method", method,
        "--full-solver", solver, "--grad-tol", str(GRAD_TOL),
        "--seed", str(seed), "--repeats", str(repeats), "--output", str(base),
    ]
    if t is not None:
        args += ["--t", str(t)]
    assert run_cli(args) == 0, f"CLI run failed for {tag}"
    runs = []
    for i in range(repeats):
        s = seed + i
        csv_path = base if repeats == 1 else base.with_name(f"{base.stem}_seed{s}{base.suffix}")
        m = read_manifest(csv_path)
        assert m["status"] == "converged", f"{tag} seed {s} did not converge"
        runs.append(LoggedRun(
            dataset=str(dataset), loss=loss, solver=solver, method=method,
            t=m["t"], seed=s, csv=str(csv_path), iterations=m["iterations"],
            final_grad_norm=m["final_grad_norm"], status=m["status"],
        ))
    return runs


@pytest.fixture(scope="session")
def protocol(data_dir, tmp_path_factory):
    """All benchmark runs behind criteria 5-8, cached for the session."""
    root = tmp_path_factory.mktemp("acceptance")
    aus = data_dir / "australian_like.libsvm"
    mush = data_dir / "mushroom_like.libsvm"

    t0 = time.perf_counter()
    c5 = launch(root, aus, "ll", "stcg:2", "tr", "c5_aus_ll_tr")[0]
    c5_seconds = time.perf_counter() - t0

    combos = {}
    for ds_name, path, loss in (("australian", aus, "ls"), ("mushroom", mush, "ll")):
        t50 = 7 if ds_name == "australian" else 56
        for solver in ("cp", "stcg:2"):
            s = solver.split(":")[0]
            tag = f"{ds_name}_{s}"
            combos[(ds_name, solver)] = {
                "tr": launch(root, path, loss, solver, "tr", f"{tag}_tr")[0],
                "svd": launch(root, path, loss, solver, "svdtr", f"{tag}_svd", t=t50)[0],
                "str": launch(root, path, loss, solver, "str", f"{tag}_str",
                              t=t50, seed=1, repeats=5),
            }
    trend = {}
    for t in (4, 10):  # t=7 already ran as part of criterion 6
        trend[t] = launch(root, aus, "ls", "stcg:2", "str", f"trend_t{t}",
                          t=t, seed=1, repeats=5)
    trend[7] = combos[("australian", "stcg:2")]["str"]

    return {"root": root, "aus": aus, "mush": mush, "c5": c5,
            "c5_seconds": c5_seconds, "combos": combos, "trend": trend}


def all_logged_runs(protocol):
    runs = [protocol["c5"]]
    for entry in protocol["combos"].values():
        runs += [entry["tr"], entry["svd"]] + entry["str"]
    for t, reps in protocol["trend"].items():
        if t != 7:
            runs += reps
    return runs


def read_csv_columns(path):
    lines = open(path).read().splitlines()
    header = lines[0].split(",")
    cols = {name: [] for name in header}
    for line in lines[1:]:
        for name, cell in zip(header, line.split(",")):
            cols[name].append(cell)
    return cols


# --- criterion 1: derivative correctness ------------------------------------


def test_criterion_1_derivatives():
    rng = np.random.Generator(np.random.PCG64(1001))
    start = time.perf_counter()
    checked = 0
    for trial in range(20):
        n = int(rng.integers(2, 11))
        q = int(rng.integers(3, 13))
        d = small_instance(9000 + trial, n=n, q=q)
        kind = LossKind.LOG_LOSS if trial % 2 == 0 else LossKind.LEAST_SQUARES
        model = LossModel.for_dataset(kind, d)
        w = rng.standard_normal(n)
        v = rng.standard_normal(n)
        h = 1e-6

        g = model.gradient(d, w)
        g_fd = np.empty(n)
        for j in range(n):
            e = np.zeros(n)
            e[j] = h
            g_fd[j] = (model.value(d, w + e) - model.value(d, w - e)) / (2.0 * h)
        assert np.linalg.norm(g - g_fd) <= 1e-5 * max(1.0, np.linalg.norm(g_fd))

        hv = model.hvp(d, w, v)
        hv_fd = (model.gradient(d, w + h * v) - model.gradient(d, w - h * v)) / (2.0 * h)
        assert np.linalg.norm(hv - hv_fd) <= 1e-4 * max(1.0, np.linalg.norm(hv_fd))
        checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    print(f"criterion 1 PASS: {checked} instances, gradients to 1e-5 and "
          f"hvp to 1e-4 in {elapsed:.3f}s")


# --- criterion 2: subproblem oracles ----------------------------------------


def test_criterion_2_subproblem_oracles():
    rng = np.random.Generator(np.random.PCG64(1002))
    start = time.perf_counter()
    for dim in (2, 6, 13, 20):
        A = rng.standard_normal((dim, dim))
        H = A @ A.T + 0.1 * np.eye(dim)
        g = rng.standard_normal(dim)
        exact = -np.linalg.solve(H, g)
        res = steihaug_cg(g, lambda v: H @ v, 2.0 * np.linalg.norm(exact),
                          max_iter=3 * dim, rtol=1e-14)
        assert np.linalg.norm(res.step - exact) <= 1e-8 * np.linalg.norm(exact)

    dominated = 0
    for trial in range(100):
        dim = int(rng.integers(2, 9))
        A = rng.standard_normal((dim, dim))
        H = A @ A.T + 0.1 * np.eye(dim) if trial % 2 == 0 else 0.5 * (A + A.T)
        g = rng.standard_normal(dim)
        delta = float(rng.uniform(0.1, 3.0))
        cp = cauchy_point(g, lambda v: H @ v, delta)
        cg = steihaug_cg(g, lambda v: H @ v, delta, max_iter=int(rng.integers(1, dim + 2)))
        assert np.linalg.norm(cp.step) <= delta * (1.0 + 1e-12)
        assert np.linalg.norm(cg.step) <= delta * (1.0 + 1e-12)
        assert cg.predicted_decrease >= cp.predicted_decrease - 1e-12
        dominated += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    print(f"criterion 2 PASS: dense-solve match to 1e-8, Cauchy dominance on "
          f"{dominated} instances in {elapsed:.3f}s")


# --- criterion 3: SVD oracle -------------------------------------------------


def test_criterion_3_svd_oracle():
    rng = np.random.Generator(np.random.PCG64(1003))
    cases = 0
    for n, q in ((4, 7), (18, 11), (50, 35), (29, 50)):
        X = rng.standard_normal((n, q)) * rng.uniform(0.2, 2.0, size=(n, 1))
        eigs = jacobi_eigenvalues(X @ X.T)
        for t in (1, min(n, q) // 3 + 1, min(n, q)):
            S = truncated_svd(X, t)
            energy = float(np.sum((S.matrix @ X) ** 2))
            assert energy == pytest.approx(float(np.sum(eigs[:t])), rel=1e-8)
            assert np.allclose(S.matrix @ S.matrix.T, np.eye(t), atol=1e-8)
            cases += 1
    print(f"criterion 3 PASS: energy matches the Jacobi oracle to 1e-8 on {cases} cases")


# --- criterion 4: TR-equivalence ---------------------------------------------


def test_criterion_4_tr_equivalence(aus):
    model = LossModel.for_dataset(LossKind.LEAST_SQUARES, aus)
    cfg = TrustRegionConfig(full_solver="stcg", full_solver_max_iter=2,
                            grad_tol=GRAD_TOL, alpha_strategy=FixedAlpha(0.0))
    w0 = np.zeros(aus.n)
    base, sketched = [], []
    minimize(aus, model, cfg, ClassicalTR(), w0, observer=base.append)
    minimize(aus, model, cfg, SketchedTR(t=7, base_seed=1), w0, observer=sketched.append)
    assert len(base) == len(sketched)
    for a, b in zip(base, sketched):
        assert np.array_equal(a.w, b.w)
        assert np.array_equal(a.step_h, b.step_h)
        assert a.rho == b.rho and a.delta == b.delta and a.accepted == b.accepted
    print(f"criterion 4 PASS: alpha=0 sketched run reproduces classical TR "
          f"bit-for-bit over {len(base)} iterations")


# --- criterion 5: classical TR convergence ------------------------------------


def test_criterion_5_classical_tr_convergence(protocol):
    run = protocol["c5"]
    assert run.status == "converged"
    assert run.iterations <= 10_000
    assert run.final_grad_norm <= GRAD_TOL
    cols = read_csv_columns(run.csv)
    fs = [float(x) for x in cols["f"]]
    assert all(f1 <= f0 for f0, f1 in zip(fs, fs[1:]))
    assert protocol["c5_seconds"] < 60.0
    print(f"criterion 5 PASS: log-loss TR converged in {run.iterations} iterations "
          f"({protocol['c5_seconds']:.2f}s), f monotone over {len(fs)} records")


# --- criterion 6: systematic reduction at t = 50% -----------------------------


def test_criterion_6_reduction_at_half_dimension(protocol):
    lines = []
    reductions = 0
    for (ds, solver), entry in protocol["combos"].items():
        tr_count = entry["tr"].iterations
        svd_count = entry["svd"].iterations
        str_med = statistics.median([r.iterations for r in entry["str"]])
        assert str_med <= tr_count, f"{ds}/{solver}: STR {str_med} > TR {tr_count}"
        assert svd_count <= tr_count, f"{ds}/{solver}: SVDTR {svd_count} > TR {tr_count}"
        reduced = str_med < tr_count or svd_count < tr_count
        reductions += reduced
        lines.append(f"{ds}/{solver}: TR={tr_count} STR50={str_med} SVDTR50={svd_count}"
                     f"{' (reduced)' if reduced else ''}")
    assert reductions >= 3, f"only {reductions} of 4 combos show a reduction"
    print("criterion 6 PASS: " + "; ".join(lines))


# --- criterion 7: monotone-in-t trend ----------------------------------------


def test_criterion_7_monotone_trend(protocol):
    meds = [statistics.median([r.iterations for r in protocol["trend"][t]])
            for t in (4, 7, 10)]
    inversions = [max(0, b - a) for a, b in zip(meds, meds[1:])]
    n_inv = sum(1 for v in inversions if v > 0)
    assert n_inv <= 1, f"medians {meds} invert twice"
    assert max(inversions) <= 5, f"medians {meds} invert by more than 5"
    print(f"criterion 7 PASS: STR medians at t=25/50/75% are {meds} "
          f"(inversions {inversions})")


# --- criterion 8: safeguard soundness ----------------------------------------


def replay_with_observer(run):
    """Re-execute a logged run in-process and hand back the snapshots."""
    d = mftr.load_libsvm(run.dataset)
    model = LossModel.for_dataset(LossKind(run.loss), d)
    kind, _, arg = run.solver.partition(":")
    cfg = TrustRegionConfig(
        full_solver=kind, full_solver_max_iter=int(arg) if arg else 1,
        grad_tol=GRAD_TOL, max_outer=10_000,
    )
    if run.method == "str":
        method = SketchedTR(t=run.t, base_seed=run.seed)
    elif run.method == "svdtr":
        method = SvdTR(t=run.t)
    else:
        method = ClassicalTR()
    snaps = []
    _, hist, status = minimize(d, model, cfg, method, np.zeros(d.n),
                               observer=snaps.append)
    assert status is Status.CONVERGED
    # the replay must be the logged trajectory, not merely a similar one
    assert len(hist) - 1 == run.iterations
    assert hist[-1].grad_norm == run.final_grad_norm
    return d, model, snaps


def test_criterion_8_safeguard_soundness(protocol):
    # (a) from the logged CSVs: accepted rows strictly decrease f
    accepted_rows = 0
    used_rows = 0
    for run in all_logged_runs(protocol):
        cols = read_csv_columns(run.csv)
        fs = [float(x) for x in cols["f"]]
        acc = [x == "1" for x in cols["accepted"]]
        assert len(fs) == run.iterations + 1
        for k in range(len(fs) - 1):
            if acc[k]:
                assert fs[k + 1] < fs[k]
            else:
                assert fs[k + 1] == fs[k]
        accepted_rows += sum(acc)
        used_rows += sum(x == "1" for x in cols["pl_used"])
    assert used_rows > 0

    # (b) replay the correction-bearing runs and re-test the strict decrease
    # at every iteration that logged pl_used=true
    audited = 0
    for (ds, solver), entry in protocol["combos"].items():
        for run in [entry["svd"]] + entry["str"][:2]:
            d, model, snaps = replay_with_observer(run)
            for s in snaps:
                corr = s.correction
                if corr is not None and corr.used:
                    f_half = model.value(d, s.w_half)
                    f_cand = model.value(d, s.w_half + corr.step_full)
                    assert f_cand < f_half
                    audited += 1
    assert audited > 0
    print(f"criterion 8 PASS: {accepted_rows} accepted rows decrease f; "
          f"{audited} of {used_rows} logged corrections re-verified against "
          f"the strict-decrease test")


# --- criterion 9: determinism -------------------------------------------------


def strip_wall_column(path):
    return [line.rsplit(",", 1)[0] for line in open(path).read().splitlines()]


def test_criterion_9_deterministic_reruns(protocol, tmp_path):
    spot_checks = 0
    for (ds, solver), entry in protocol["combos"].items():
        run = entry["str"][2]  # third seed of each sweep
        rerun_csv = tmp_path / f"rerun_{ds}_{solver.split(':')[0]}.csv"
        code = run_cli([
            "run", "--dataset", run.dataset, "--loss", run.loss,
            "--method", "str", "--t", str(run.t), "--full-solver", run.solver,
            "--grad-tol", str(GRAD_TOL), "--seed", str(run.seed),
            "--output", str(rerun_csv),
        ])
        assert code == 0
        assert strip_wall_column(rerun_csv) == strip_wall_column(run.csv)
        spot_checks += 1
    print(f"criterion 9 PASS: {spot_checks} seeded reruns byte-identical "
          f"outside the wall-clock column")
