"""Benchmark harness: run the optimizers on LIBSVM files, log convergence.

Two subcommands. ``run`` executes one method on one dataset (optionally
repeated across consecutive seeds) and writes one convergence-history CSV
plus a JSON manifest per repeat. ``compare`` executes several run
configurations against the same dataset and emits a summary table of
median iteration counts, sorted fastest first.

Configuration comes from command-line flags, optionally seeded from a
``key=value`` config file; flags override the file. All randomness is
seeded, so re-running an identical configuration reproduces the CSV
byte-for-byte except for the wall-clock column.

Exit codes: 0 success (including iteration/time budget exhaustion),
2 unusable invocation or unreadable dataset file, 3 dataset parse error,
4 numeric failure (partial CSV is kept).
"""

import argparse
import json
import math
import statistics
import sys
from dataclasses import dataclass
from pathlib import Path

from .dataset import LibsvmFormatError, load_libsvm
from .driver import (
    BacktrackingAlpha,
    ClassicalTR,
    FixedAlpha,
    SketchedTR,
    Status,
    SvdTR,
    TrustRegionConfig,
    minimize,
)
from .losses import LossKind, LossModel
from .projection import prng_description

EXIT_OK = 0
EXIT_UNREADABLE = 2
EXIT_PARSE = 3
EXIT_NUMERIC = 4

CSV_COLUMNS = (
    "iter", "f", "grad_norm", "delta", "rho",
    "ph_norm", "pl_norm", "pl_used", "accepted", "wall_time_s",
)

_DEFAULTS = {
    "loss": None,
    "method": None,
    "t": None,
    "full_solver": "stcg:2",
    "grad_tol": "1e-6",
    "max_outer": "10000",
    "time_budget_s": "inf",
    "seed": "1",
    "alpha": "fixed:1.0",
    "output": None,
    "repeats": "1",
}

_EPILOG = """\
defaults: full-solver stcg:2, grad-tol 1e-6, max-outer 10000, seed 1,
alpha fixed:1.0, repeats 1 (repeats r uses seeds seed..seed+r-1).
trust-region constants (fixed): eta1=0.1 eta2=0.75 gamma1=0.25 gamma2=0.5
delta0=1 delta_max=1e6 grow_factor=2.
t grammar: an integer dimension, or a percentage of n like '50%'
(resolved t = max(1, round(pct*n/100))); required for str/svdtr,
ignored for tr. alpha grammar: 'fixed:<value>' or 'backtrack'.
exit codes: 0 ok, 2 bad invocation/unreadable file, 3 parse error,
4 numeric failure."""


@dataclass(frozen=True)
class RunSpec:
    """One fully resolved run request (method x dataset x budgets)."""

    dataset_path: Path
    loss: LossKind
    method: str  # "tr" | "str" | "svdtr"
    t_spec: str | None
    solver_kind: str  # "cp" | "stcg"
    solver_max_iter: int
    grad_tol: float
    max_outer: int
    time_budget_s: float
    seed: int
    alpha: FixedAlpha | BacktrackingAlpha
    output_path: Path | None
    repeats: int


def parse_t_spec(spec, n):
    """Resolve a t request against the feature dimension n."""
    text = spec.strip()
    if text.endswith("%"):
        pct = float(text[:-1])
        if not 0.0 < pct <= 100.0:
            raise ValueError(f"percentage t must be in (0, 100], got {text!r}")
        return max(1, round(pct * n / 100.0))
    t = int(text)
    if not 1 <= t <= n:
        raise ValueError(f"t={t} outside [1, n={n}]")
    return t


def parse_full_solver(text):
    """'cp' or 'stcg:<max_iter>' (bare 'stcg' means one inner iteration)."""
    name, _, arg = text.strip().partition(":")
    if name == "cp":
        if arg:
            raise ValueError(f"cp takes no argument, got {text!r}")
        return "cp", 1
    if name == "stcg":
        max_iter = int(arg) if arg else 1
        if max_iter < 1:
            raise ValueError(f"stcg max_iter must be >= 1, got {text!r}")
        return "stcg", max_iter
    raise ValueError(f"unknown full solver {text!r} (expected cp or stcg:<max_iter>)")


def parse_alpha(text):
    """'fixed:<value>' or 'backtrack'."""
    name, _, arg = text.strip().partition(":")
    if name == "fixed":
        return FixedAlpha(float(arg) if arg else 1.0)
    if name == "backtrack":
        return BacktrackingAlpha(float(arg) if arg else 1.0)
    raise ValueError(f"unknown alpha strategy {text!r} (expected fixed:<v> or backtrack)")


def read_config_file(path):
    """Parse a key=value config file into a string-valued dict."""
    entries = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        if key == "dataset_path":
            key = "dataset"
        if key == "output_path":
            key = "output"
        if key not in _DEFAULTS and key != "dataset":
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        entries[key] = value.strip()
    return entries


def assemble_spec(entries):
    """Build a RunSpec from merged string-valued settings."""
    missing = [k for k in ("dataset", "loss", "method") if not entries.get(k)]
    if missing:
        raise ValueError(f"missing required settings: {', '.join(missing)}")
    method = entries["method"].strip()
    if method not in ("tr", "str", "svdtr"):
        raise ValueError(f"unknown method {method!r} (expected tr, str or svdtr)")
    loss_text = entries["loss"].strip()
    try:
        loss = LossKind(loss_text)
    except ValueError:
        raise ValueError(f"unknown loss {loss_text!r} (expected ll or ls)") from None
    t_spec = entries.get("t")
    if method != "tr" and not t_spec:
        raise ValueError(f"method {method} requires t")
    solver_kind, solver_max_iter = parse_full_solver(entries["full_solver"])
    grad_tol = float(entries["grad_tol"])
    if grad_tol <= 0.0:
        raise ValueError(f"grad-tol must be positive, got {grad_tol}")
    max_outer = int(entries["max_outer"])
    if max_outer < 1:
        raise ValueError(f"max-outer must be >= 1, got {max_outer}")
    time_budget_s = float(entries["time_budget_s"])
    if not time_budget_s > 0.0:
        raise ValueError(f"time-budget-s must be positive, got {time_budget_s}")
    repeats = int(entries["repeats"])
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    output = entries.get("output")
    return RunSpec(
        dataset_path=Path(entries["dataset"]),
        loss=loss,
        method=method,
        t_spec=None if method == "tr" else t_spec,
        solver_kind=solver_kind,
        solver_max_iter=solver_max_iter,
        grad_tol=grad_tol,
        max_outer=max_outer,
        time_budget_s=time_budget_s,
        seed=int(entries["seed"]),
        alpha=parse_alpha(entries["alpha"]),
        output_path=Path(output) if output else None,
        repeats=repeats,
    )


def _fmt(x):
    return f"{x:.17g}"


def history_csv(history):
    """Render an iteration history as CSV text (one row per record)."""
    lines = [",".join(CSV_COLUMNS)]
    for r in history:
        lines.append(",".join((
            str(r.k), _fmt(r.f), _fmt(r.grad_norm), _fmt(r.delta), _fmt(r.rho),
            _fmt(r.ph_norm), _fmt(r.pl_norm), str(int(r.pl_used)),
            str(int(r.accepted)), _fmt(r.wall_time_s),
        )))
    return "\n".join(lines) + "\n"


def repeat_csv_path(base, seed, repeats):
    if repeats == 1:
        return base
    return base.with_name(f"{base.stem}_seed{seed}{base.suffix}")


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def build_manifest(spec, t, d, seed, repeat_index, history, status, csv_name):
    alpha = spec.alpha
    if isinstance(alpha, FixedAlpha):
        alpha_desc = {"kind": "fixed", "value": alpha.value}
    else:
        alpha_desc = {
            "kind": "backtrack",
            "alpha0": alpha.alpha0,
            "max_halvings": alpha.max_halvings,
        }
    cfg = TrustRegionConfig()
    return {
        "dataset": {"path": str(spec.dataset_path), "n": d.n, "q": d.q},
        "loss": spec.loss.value,
        "method": spec.method,
        "t_spec": spec.t_spec,
        "t": t,
        "full_solver": {"kind": spec.solver_kind, "max_iter": spec.solver_max_iter},
        "grad_tol": spec.grad_tol,
        "max_outer": spec.max_outer,
        "time_budget_s": _jsonable(spec.time_budget_s),
        "alpha": alpha_desc,
        "seed": seed,
        "repeats": spec.repeats,
        "repeat_index": repeat_index,
        "tr_constants": {
            "eta1": cfg.eta1, "eta2": cfg.eta2,
            "gamma1": cfg.gamma1, "gamma2": cfg.gamma2,
            "delta0": cfg.delta0, "delta_max": cfg.delta_max,
            "grow_factor": cfg.grow_factor,
        },
        "prng": prng_description(),
        "status": status.value,
        "iterations": len(history) - 1,
        "final_f": history[-1].f,
        "final_grad_norm": history[-1].grad_norm,
        "total_seconds": history[-1].wall_time_s,
        "csv": csv_name,
    }


def execute_spec(spec, d, write_files=True):
    """Run all repeats of a spec against a loaded dataset.

    Returns a list of (seed, history, status) and writes one CSV plus one
    manifest per repeat when an output path is set. Stops early after a
    repeat that fails numerically (its partial CSV is still written).
    """
    t = None if spec.method == "tr" else parse_t_spec(spec.t_spec, d.n)
    if spec.method == "svdtr" and t is not None and t > min(d.n, d.q):
        raise ValueError(f"t={t} exceeds min(n, q)={min(d.n, d.q)}")
    model = LossModel.for_dataset(spec.loss, d)
    cfg = TrustRegionConfig(
        full_solver=spec.solver_kind,
        full_solver_max_iter=spec.solver_max_iter,
        alpha_strategy=spec.alpha,
        grad_tol=spec.grad_tol,
        max_outer=spec.max_outer,
        time_budget_s=spec.time_budget_s,
    )
    w0 = [0.0] * d.n
    results = []
    for i in range(spec.repeats):
        seed = spec.seed + i
        if spec.method == "tr":
            method = ClassicalTR()
        elif spec.method == "str":
            method = SketchedTR(t=t, base_seed=seed)
        else:
            method = SvdTR(t=t)
        w, history, status = minimize(d, model, cfg, method, w0)
        if write_files and spec.output_path is not None:
            csv_path = repeat_csv_path(spec.output_path, seed, spec.repeats)
            csv_path.write_text(history_csv(history), encoding="utf-8")
            manifest = build_manifest(spec, t, d, seed, i, history, status, csv_path.name)
            csv_path.with_suffix(".manifest.json").write_text(
                json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
        results.append((seed, history, status))
        if status is Status.NUMERIC_FAILURE:
            break
    return t, results


def load_dataset_or_exit(path, parser_name):
    try:
        return load_libsvm(path)
    except LibsvmFormatError as exc:
        print(f"{parser_name}: parse error in {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE) from exc
    except OSError as exc:
        print(f"{parser_name}: cannot read dataset {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_UNREADABLE) from exc


def merge_settings(parser, args):
    """defaults < config file < explicit flags, all as strings."""
    entries = dict(_DEFAULTS)
    if args.config:
        try:
            entries.update(read_config_file(args.config))
        except ValueError as exc:
            parser.error(str(exc))
    for key in ("dataset", "loss", "method", "t", "full_solver", "grad_tol",
                "max_outer", "time_budget_s", "seed", "alpha", "output", "repeats"):
        value = getattr(args, key)
        if value is not None:
            entries[key] = value
    return entries


def cmd_run(parser, args):
    entries = merge_settings(parser, args)
    try:
        spec = assemble_spec(entries)
    except ValueError as exc:
        parser.error(str(exc))
    if spec.output_path is None:
        parser.error("run requires an output path (--output or output= in the config file)")
    d = load_dataset_or_exit(spec.dataset_path, parser.prog)
    try:
        t, results = execute_spec(spec, d)
    except ValueError as exc:
        parser.error(str(exc))
    for seed, history, status in results:
        csv_path = repeat_csv_path(spec.output_path, seed, spec.repeats)
        print(
            f"seed {seed}: {status.value} after {len(history) - 1} iterations, "
            f"final grad_norm {history[-1].grad_norm:.3e} -> {csv_path}"
        )
    if results[-1][2] is Status.NUMERIC_FAILURE:
        return EXIT_NUMERIC
    return EXIT_OK


def compare_table(rows):
    lines = ["method,t,median_iterations,median_wall_s,final_grad_norm"]
    for row in rows:
        lines.append(",".join((
            row["method"],
            "" if row["t"] is None else str(row["t"]),
            str(row["median_iterations"]),
            _fmt(row["median_wall_s"]),
            _fmt(row["final_grad_norm"]),
        )))
    return "\n".join(lines) + "\n"


def cmd_compare(parser, args):
    if len(args.configs) < 2:
        parser.error("compare needs at least two config files")
    specs = []
    for cfg_path in args.configs:
        entries = dict(_DEFAULTS)
        try:
            entries.update(read_config_file(cfg_path))
        except ValueError as exc:
            parser.error(str(exc))
        for key in ("dataset", "loss", "grad_tol", "max_outer", "time_budget_s"):
            value = getattr(args, key)
            if value is not None:
                entries[key] = value
        try:
            specs.append(assemble_spec(entries))
        except ValueError as exc:
            parser.error(f"{cfg_path}: {exc}")
    first = specs[0]
    for cfg_path, spec in zip(args.configs, specs):
        if spec.dataset_path != first.dataset_path or spec.loss != first.loss:
            parser.error(
                f"{cfg_path}: all compared configs must share dataset and loss "
                f"(found {spec.dataset_path}/{spec.loss.value} vs "
                f"{first.dataset_path}/{first.loss.value})"
            )
    d = load_dataset_or_exit(first.dataset_path, parser.prog)
    rows = []
    failed = False
    for spec in specs:
        try:
            t, results = execute_spec(spec, d)
        except ValueError as exc:
            parser.error(str(exc))
        failed = failed or any(s is Status.NUMERIC_FAILURE for _, _, s in results)
        rows.append({
            "method": spec.method,
            "t": t,
            "median_iterations": statistics.median(
                [len(h) - 1 for _, h, _ in results]
            ),
            "median_wall_s": statistics.median(
                [h[-1].wall_time_s for _, h, _ in results]
            ),
            "final_grad_norm": statistics.median(
                [h[-1].grad_norm for _, h, _ in results]
            ),
        })
    rows.sort(key=lambda row: row["median_iterations"])
    table = compare_table(rows)
    Path(args.out).write_text(table, encoding="utf-8")
    print(table, end="")
    return EXIT_NUMERIC if failed else EXIT_OK


def _add_shared_flags(sub, with_run_only):
    sub.add_argument("--dataset", help="LIBSVM dataset file")
    sub.add_argument("--loss", help="ll (log-loss) or ls (squared sigmoid)")
    sub.add_argument("--grad-tol", dest="grad_tol", help="gradient norm tolerance")
    sub.add_argument("--max-outer", dest="max_outer", help="outer iteration budget")
    sub.add_argument("--time-budget-s", dest="time_budget_s", help="wall-clock budget")
    if with_run_only:
        sub.add_argument("--method", help="tr, str or svdtr")
        sub.add_argument("--t", help="reduced dimension: integer or percentage like 50%%")
        sub.add_argument("--full-solver", dest="full_solver",
                         help="cp or stcg:<max_iter>")
        sub.add_argument("--seed", help="base seed (repeats use seed..seed+r-1)")
        sub.add_argument("--alpha", help="fixed:<v> or backtrack")
        sub.add_argument("--output", help="convergence CSV path")
        sub.add_argument("--repeats", help="number of seeded repeats")
        sub.add_argument("--config", help="key=value file; flags override it")


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="mftr",
        description="Trust-region benchmark harness with sketched and "
                    "SVD-subspace corrective steps.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subs = parser.add_subparsers(dest="command", required=True)

    run_p = subs.add_parser(
        "run", help="run one method, write CSV + manifest per repeat",
        epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    _add_shared_flags(run_p, with_run_only=True)

    cmp_p = subs.add_parser(
        "compare", help="run several configs on one dataset, write a summary table",
        epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    cmp_p.add_argument("configs", nargs="*", help="key=value config files, one per run")
    cmp_p.add_argument("--out", required=True, help="summary table CSV path")
    _add_shared_flags(cmp_p, with_run_only=False)

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(run_p, args)
    return cmd_compare(cmp_p, args)


if __name__ == "__main__":
    sys.exit(main())
