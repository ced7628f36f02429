"""Approximate solvers for the trust-region subproblem.

Both solvers minimize the quadratic model m(p) = <g, p> + 0.5 <p, H p>
subject to ||p|| <= delta, accessing the Hessian only through a
matrix-vector callable ``hvp``. The caller is responsible for checking the
stopping rule first: g = 0 is a precondition violation, not an error return.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np


class Termination(enum.Enum):
    SMALL_RESIDUAL = "small_residual"
    NEGATIVE_CURVATURE = "negative_curvature"
    BOUNDARY_EXIT = "boundary_exit"
    MAX_ITERATIONS = "max_iterations"


class SubproblemNumericError(RuntimeError):
    """Non-finite intermediate inside a solver; carries the iteration index."""

    def __init__(self, message, iteration):
        self.iteration = iteration
        super().__init__(f"{message} (inner iteration {iteration})")


@dataclass(frozen=True)
class SubproblemResult:
    step: np.ndarray
    predicted_decrease: float  # m(0) - m(step), >= 0
    hit_boundary: bool
    inner_iterations: int
    termination: Termination


def _boundary_sigma(p, d, delta):
    """Positive root sigma of ||p + sigma d|| = delta, cancellation-free.

    Requires ||p|| <= delta and d != 0; then the roots straddle zero and the
    positive one is returned via the sign-aware quadratic formula.
    """
    a = float(d @ d)
    b = 2.0 * float(p @ d)
    c = float(p @ p) - delta * delta
    disc = b * b - 4.0 * a * c
    sq = math.sqrt(max(disc, 0.0))
    if b <= 0.0:
        return (-b + sq) / (2.0 * a)
    return -2.0 * c / (b + sq)


def cauchy_point(g, hvp, delta):
    """Model minimizer along the steepest-descent ray, clipped to the ball.

    Uses exactly one Hessian product. With curvature gHg = <g, H g>:
    tau = 1 when gHg <= 0, else min(||g||^3 / (delta * gHg), 1), and the step
    is -tau * (delta / ||g||) * g.
    """
    g = np.asarray(g, dtype=np.float64)
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    gnorm = float(np.linalg.norm(g))
    if gnorm == 0.0:
        raise ValueError("cauchy_point requires a nonzero gradient")

    Hg = np.asarray(hvp(g), dtype=np.float64)
    gHg = float(g @ Hg)
    if not math.isfinite(gHg):
        raise SubproblemNumericError("non-finite curvature <g, Hg>", iteration=0)

    if gHg <= 0.0:
        tau = 1.0
        termination = Termination.NEGATIVE_CURVATURE
    else:
        tau = min(gnorm**3 / (delta * gHg), 1.0)
        termination = Termination.BOUNDARY_EXIT if tau == 1.0 else Termination.SMALL_RESIDUAL

    scale = tau * delta / gnorm
    step = -scale * g
    # m(0) - m(p) for p = -scale*g, reusing the single Hessian product
    decrease = scale * gnorm**2 - 0.5 * scale**2 * gHg
    return SubproblemResult(
        step=step,
        predicted_decrease=max(decrease, 0.0),
        hit_boundary=tau == 1.0,
        inner_iterations=0,
        termination=termination,
    )


def steihaug_cg(g, hvp, delta, max_iter, rtol=1e-8):
    """Steihaug-Toint conjugate gradient for the trust-region subproblem.

    CG on H p = -g starting from p = 0. A direction of nonpositive curvature
    or an iterate crossing the boundary terminates at the ball intersection;
    otherwise stops once the residual drops below rtol * ||g|| or after
    max_iter iterations. The predicted decrease is accumulated from the CG
    recurrences, so no extra Hessian products are needed.
    """
    g = np.asarray(g, dtype=np.float64)
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    gnorm = float(np.linalg.norm(g))
    if gnorm == 0.0:
        raise ValueError("steihaug_cg requires a nonzero gradient")

    p = np.zeros_like(g)
    r = g.copy()  # residual = gradient of the model at p
    d = -g
    rr = gnorm * gnorm
    decrease = 0.0
    threshold = rtol * gnorm

    for j in range(max_iter):
        Hd = np.asarray(hvp(d), dtype=np.float64)
        dHd = float(d @ Hd)
        if not math.isfinite(dHd):
            raise SubproblemNumericError("non-finite curvature <d, Hd>", iteration=j)
        rd = float(r @ d)  # model slope along d; equals -rr in exact arithmetic

        if dHd <= 0.0:
            sigma = _boundary_sigma(p, d, delta)
            step = p + sigma * d
            decrease += -sigma * rd - 0.5 * sigma * sigma * dHd
            return _finish(step, decrease, True, j + 1, Termination.NEGATIVE_CURVATURE)

        alpha = rr / dHd
        p_next = p + alpha * d
        if float(np.linalg.norm(p_next)) >= delta:
            sigma = _boundary_sigma(p, d, delta)
            step = p + sigma * d
            decrease += -sigma * rd - 0.5 * sigma * sigma * dHd
            return _finish(step, decrease, True, j + 1, Termination.BOUNDARY_EXIT)

        p = p_next
        decrease += -alpha * rd - 0.5 * alpha * alpha * dHd
        r = r + alpha * Hd
        rr_next = float(r @ r)
        if not math.isfinite(rr_next):
            raise SubproblemNumericError("non-finite residual", iteration=j)
        if math.sqrt(rr_next) <= threshold:
            return _finish(p, decrease, False, j + 1, Termination.SMALL_RESIDUAL)
        d = -r + (rr_next / rr) * d
        rr = rr_next

    return _finish(p, decrease, False, max_iter, Termination.MAX_ITERATIONS)


def _finish(step, decrease, boundary, iterations, termination):
    return SubproblemResult(
        step=step,
        predicted_decrease=max(decrease, 0.0),
        hit_boundary=boundary,
        inner_iterations=iterations,
        termination=termination,
    )
