"""Trust-region driver with optional low-fidelity corrective steps.

One outer iteration: solve the full-space quadratic model within the radius
(Cauchy point or Steihaug-Toint CG), then optionally solve a reduced-space
model built on projected features around the intermediate iterate, lift the
reduced step with S^T, and keep it only if it strictly decreases the
objective. The composite step is accepted by a ratio that compares the
actual decrease against the full-space predicted decrease plus the extra
decrease delivered by the correction.

Three method flavors:

* :class:`ClassicalTR` - no correction.
* :class:`SketchedTR`  - Gaussian sketch projector, refreshed every
  iteration with seeds derived from a base seed (freezable for ablation).
* :class:`SvdTR`       - projector from the top-t left singular vectors of
  the feature matrix, computed once per run.
"""

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import reduce_features
from .projection import gaussian_sketch, sketch_seed, truncated_svd
from .subproblem import SubproblemNumericError, cauchy_point, steihaug_cg

RHO_GUARD = 1e-14


@dataclass(frozen=True)
class FixedAlpha:
    """Single correction scaling, tested once against strict decrease."""

    value: float = 1.0


@dataclass(frozen=True)
class BacktrackingAlpha:
    """Halve alpha from alpha0 up to max_halvings times until Eq-style
    strict decrease holds; give up (correction unused) afterwards."""

    alpha0: float = 1.0
    max_halvings: int = 10


@dataclass(frozen=True)
class ClassicalTR:
    pass


@dataclass(frozen=True)
class SketchedTR:
    t: int
    base_seed: int = 0
    refresh_each_iteration: bool = True

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be >= 1")


@dataclass(frozen=True)
class SvdTR:
    t: int

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be >= 1")


class Status(enum.Enum):
    CONVERGED = "converged"
    ITER_BUDGET = "iter_budget"
    TIME_BUDGET = "time_budget"
    NUMERIC_FAILURE = "numeric_failure"


@dataclass(frozen=True)
class TrustRegionConfig:
    """Driver constants and budgets.

    Acceptance thresholds 0 < eta1 <= eta2 < 1 and shrink bounds
    0 < gamma1 <= gamma2 < 1. Radius policy: ratio >= eta2 grows the radius
    by grow_factor (skipped if that would exceed delta_max), a ratio in
    [eta1, eta2) keeps it, anything below eta1 (including a guarded
    denominator) shrinks by gamma2, the right endpoint of the shrink
    interval. full_solver is "cp" or "stcg"; full_solver_max_iter and
    cg_rtol control the full-space CG solve only. The reduced Hessian is
    materialized as a dense t x t matrix up to dense_hessian_max_t.
    """

    eta1: float = 0.1
    eta2: float = 0.75
    gamma1: float = 0.25
    gamma2: float = 0.5
    delta0: float = 1.0
    delta_max: float = 1e6
    grow_factor: float = 2.0
    full_solver: str = "stcg"
    full_solver_max_iter: int = 2
    cg_rtol: float = 1e-8
    alpha_strategy: FixedAlpha | BacktrackingAlpha = FixedAlpha(1.0)
    grad_tol: float = 1e-6
    max_outer: int = 10_000
    time_budget_s: float = math.inf
    dense_hessian_max_t: int = 200

    def __post_init__(self):
        if not 0.0 < self.eta1 <= self.eta2 < 1.0:
            raise ValueError("need 0 < eta1 <= eta2 < 1")
        if not 0.0 < self.gamma1 <= self.gamma2 < 1.0:
            raise ValueError("need 0 < gamma1 <= gamma2 < 1")
        if self.delta0 <= 0.0:
            raise ValueError("delta0 must be positive")
        if self.delta_max < self.delta0:
            raise ValueError("delta_max must be >= delta0")
        if self.grow_factor <= 1.0:
            raise ValueError("grow_factor must be > 1")
        if self.full_solver not in ("cp", "stcg"):
            raise ValueError(f"unknown full_solver {self.full_solver!r}")
        if self.full_solver_max_iter < 1:
            raise ValueError("full_solver_max_iter must be >= 1")
        if self.grad_tol <= 0.0:
            raise ValueError("grad_tol must be positive")


@dataclass(frozen=True)
class IterationRecord:
    """Per-outer-iteration telemetry; the terminal record has no step data."""

    k: int
    f: float
    grad_norm: float
    delta: float
    rho: float  # -inf when the denominator guard rejected the ratio
    ph_norm: float
    pl_norm: float
    pl_used: bool
    accepted: bool
    wall_time_s: float


@dataclass(frozen=True)
class CorrectionResult:
    """Outcome of the low-fidelity corrective step.

    When ``used`` is false the correction was rejected: step_full is zero,
    w_candidate *is* w_half, and f_candidate equals f_half.
    """

    step_full: np.ndarray
    alpha: float
    used: bool
    w_candidate: np.ndarray
    f_candidate: float
    reduced_norm: float
    inner_iterations: int


@dataclass(frozen=True)
class ObservedIteration:
    """Snapshot handed to a minimize() observer, for offline auditing."""

    k: int
    w: np.ndarray
    step_h: np.ndarray
    w_half: np.ndarray
    f_half: float
    correction: CorrectionResult | None
    rho: float
    accepted: bool
    delta: float


def composite_rho(f_wk, f_wk_ph, f_wk_p, predicted_decrease_h):
    """Acceptance ratio for the composite step.

    rho = (f(w_k) - f(w_k + p)) / (pred_H + f(w_k + p_H) - f(w_k + p)).
    Returns -inf (treated as rejection) when the denominator falls below
    the guard 1e-14 * max(1, |f(w_k)|).
    """
    denom = predicted_decrease_h + (f_wk_ph - f_wk_p)
    if denom <= RHO_GUARD * max(1.0, abs(f_wk)):
        return -math.inf
    return (f_wk - f_wk_p) / denom


def _alpha_candidates(strategy):
    if isinstance(strategy, FixedAlpha):
        return [strategy.value]
    if isinstance(strategy, BacktrackingAlpha):
        return [strategy.alpha0 * 0.5**i for i in range(strategy.max_halvings + 1)]
    raise TypeError(f"unknown alpha strategy {strategy!r}")


def low_fidelity_correction(
    d,
    model,
    S,
    w_half,
    delta,
    alpha_strategy,
    *,
    f_half=None,
    reduced=None,
    cg_rtol=1e-8,
    dense_hessian_max_t=200,
):
    """Solve the reduced trust-region model at S @ w_half and lift the step.

    The reduced subproblem is solved by Steihaug-Toint CG with at most t
    inner iterations and the same radius as the full-space step. The lifted
    step S^T p, scaled by the first alpha candidate that strictly decreases
    the objective at w_half, is returned with ``used=True``; if no candidate
    decreases it, the correction is dropped (``used=False``).

    ``reduced`` may carry a precomputed ``reduce_features(d, S)`` when the
    projector is fixed across iterations; ``f_half`` likewise avoids an
    objective re-evaluation when the caller already knows f(w_half).
    """
    if S.n != d.n:
        raise ValueError(f"projection expects {S.n} features, dataset has {d.n}")
    if reduced is None:
        reduced = reduce_features(d, S)
    w_half = np.asarray(w_half, dtype=np.float64)
    if f_half is None:
        f_half = model.value(d, w_half)

    w_tilde = S.matrix @ w_half
    g_red = model.gradient(reduced, w_tilde)
    rejected = CorrectionResult(
        step_full=np.zeros(d.n),
        alpha=0.0,
        used=False,
        w_candidate=w_half,
        f_candidate=f_half,
        reduced_norm=0.0,
        inner_iterations=0,
    )
    if float(np.linalg.norm(g_red)) == 0.0:
        return rejected

    t = S.t
    if t <= dense_hessian_max_t:
        # one dense t x t Hessian per iteration; same numbers as per-vector
        # products, assembled with a single matrix product instead
        u = model.curvature_diagonal(reduced, w_tilde)
        H = (reduced.features * u) @ reduced.features.T / reduced.q
        H[np.diag_indices_from(H)] += model.lam
        hvp_red = lambda v: H @ v
    else:
        hvp_red = lambda v: model.hvp(reduced, w_tilde, v)

    result = steihaug_cg(g_red, hvp_red, delta, max_iter=t, rtol=cg_rtol)
    lifted = S.lift(result.step)

    for alpha in _alpha_candidates(alpha_strategy):
        w_test = w_half + alpha * lifted
        if not np.all(np.isfinite(w_test)):
            continue
        f_test = model.value(d, w_test)
        if f_test < f_half:
            return CorrectionResult(
                step_full=alpha * lifted,
                alpha=alpha,
                used=True,
                w_candidate=w_test,
                f_candidate=f_test,
                reduced_norm=float(np.linalg.norm(result.step)),
                inner_iterations=result.inner_iterations,
            )
    return rejected


def minimize(d, model, cfg, method, w0, observer=None):
    """Run the trust-region loop until the full-gradient norm drops below
    cfg.grad_tol or a budget is exhausted.

    Returns ``(w_star, history, status)``. The history holds one record per
    performed iteration plus a terminal record for the final iterate, so its
    length is iterations + 1. ``observer``, if given, is called with an
    :class:`ObservedIteration` after each performed iteration.
    """
    w = np.ascontiguousarray(w0, dtype=np.float64)
    if w.shape != (d.n,) or not np.all(np.isfinite(w)):
        raise ValueError(f"w0 must be a finite vector of length {d.n}")

    S_fixed = None
    reduced_fixed = None
    if isinstance(method, SvdTR):
        if method.t > min(d.n, d.q):
            raise ValueError(f"t={method.t} exceeds min(n, q)={min(d.n, d.q)}")
        S_fixed = truncated_svd(d.features, method.t)
        reduced_fixed = reduce_features(d, S_fixed)
    elif isinstance(method, SketchedTR):
        if method.t > d.n:
            raise ValueError(f"t={method.t} exceeds n={d.n}")
        if not method.refresh_each_iteration:
            S_fixed = gaussian_sketch(d.n, method.t, sketch_seed(method.base_seed, 0))
            reduced_fixed = reduce_features(d, S_fixed)
    elif not isinstance(method, ClassicalTR):
        raise TypeError(f"unknown method {method!r}")

    start = time.perf_counter()
    history = []
    delta = cfg.delta0
    f = model.value(d, w)
    g = model.gradient(d, w)
    k = 0
    status = None

    while True:
        gnorm = float(np.linalg.norm(g))
        elapsed = time.perf_counter() - start
        if not (math.isfinite(f) and math.isfinite(gnorm)):
            status = Status.NUMERIC_FAILURE
        elif gnorm <= cfg.grad_tol:
            status = Status.CONVERGED
        elif k >= cfg.max_outer:
            status = Status.ITER_BUDGET
        elif elapsed > cfg.time_budget_s:
            status = Status.TIME_BUDGET
        if status is not None:
            history.append(
                IterationRecord(k, f, gnorm, delta, -math.inf, 0.0, 0.0, False, False, elapsed)
            )
            return w, history, status

        try:
            if cfg.full_solver == "cp":
                res_h = cauchy_point(g, lambda v: model.hvp(d, w, v), delta)
            else:
                res_h = steihaug_cg(
                    g, lambda v: model.hvp(d, w, v), delta, cfg.full_solver_max_iter, cfg.cg_rtol
                )

            w_half = w + res_h.step
            f_half = model.value(d, w_half)
            if not math.isfinite(f_half):
                raise SubproblemNumericError("non-finite objective at trial point", k)

            corr = None
            if not isinstance(method, ClassicalTR):
                if S_fixed is not None:
                    S, reduced = S_fixed, reduced_fixed
                else:
                    S = gaussian_sketch(d.n, method.t, sketch_seed(method.base_seed, k))
                    reduced = None
                corr = low_fidelity_correction(
                    d,
                    model,
                    S,
                    w_half,
                    delta,
                    cfg.alpha_strategy,
                    f_half=f_half,
                    reduced=reduced,
                    dense_hessian_max_t=cfg.dense_hessian_max_t,
                )
        except SubproblemNumericError:
            history.append(
                IterationRecord(
                    k, f, gnorm, delta, -math.inf, 0.0, 0.0, False, False,
                    time.perf_counter() - start,
                )
            )
            return w, history, Status.NUMERIC_FAILURE

        if corr is not None:
            w_cand, f_cand = corr.w_candidate, corr.f_candidate
        else:
            w_cand, f_cand = w_half, f_half

        rho = composite_rho(f, f_half, f_cand, res_h.predicted_decrease)
        accepted = rho > cfg.eta1

        history.append(
            IterationRecord(
                k=k,
                f=f,
                grad_norm=gnorm,
                delta=delta,
                rho=rho,
                ph_norm=float(np.linalg.norm(res_h.step)),
                pl_norm=corr.reduced_norm if corr is not None and corr.used else 0.0,
                pl_used=bool(corr is not None and corr.used),
                accepted=accepted,
                wall_time_s=time.perf_counter() - start,
            )
        )
        if observer is not None:
            observer(
                ObservedIteration(
                    k=k,
                    w=w.copy(),
                    step_h=res_h.step.copy(),
                    w_half=w_half.copy(),
                    f_half=f_half,
                    correction=corr,
                    rho=rho,
                    accepted=accepted,
                    delta=delta,
                )
            )

        if rho >= cfg.eta2:
            grown = cfg.grow_factor * delta
            if grown <= cfg.delta_max:
                delta = grown
        elif rho < cfg.eta1:
            delta = cfg.gamma2 * delta

        if accepted:
            w, f = w_cand, f_cand
            g = model.gradient(d, w)
        k += 1
