"""Regularized classification losses.

Two objectives over a Dataset, both with an L2 term (lam/2)||w||^2:

* log-loss:         mean_i log(1 + exp(-y_i <w, x_i>))
* squared sigmoid:  mean_i (y_i - sigma(<w, x_i>))^2, labels kept in {-1,+1}

Gradients are analytic and the Hessian is only ever applied to vectors, one
O(n q) product at a time. Evaluating a model on a reduced dataset (t rows)
is exactly the low-fidelity model used by the driver; there is no separate
code path. Heavy lifting is delegated to the kernel backend in ``_kernels``.
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels as k


class LossKind(enum.Enum):
    LOG_LOSS = "ll"
    LEAST_SQUARES = "ls"


@dataclass(frozen=True)
class LossModel:
    """Loss kind plus regularization weight."""

    kind: LossKind
    lam: float

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam >= 0.0):
            raise ValueError(f"lam must be finite and >= 0, got {self.lam}")

    @classmethod
    def for_dataset(cls, kind, d):
        """Default regularization 1/q for a given dataset."""
        return cls(kind, 1.0 / d.q)

    def value(self, d, w):
        w = _checked_vector(w, d.n, "w")
        if self.kind is LossKind.LOG_LOSS:
            return k.logloss_value(d.features, d.labels, w, self.lam)
        return k.sq_sigmoid_value(d.features, d.labels, w, self.lam)

    def gradient(self, d, w):
        w = _checked_vector(w, d.n, "w")
        if self.kind is LossKind.LOG_LOSS:
            return k.logloss_gradient(d.features, d.labels, w, self.lam)
        return k.sq_sigmoid_gradient(d.features, d.labels, w, self.lam)

    def hvp(self, d, w, v):
        w = _checked_vector(w, d.n, "w")
        v = _checked_vector(v, d.n, "v")
        if self.kind is LossKind.LOG_LOSS:
            return k.logloss_hvp(d.features, d.labels, w, v, self.lam)
        return k.sq_sigmoid_hvp(d.features, d.labels, w, v, self.lam)

    def curvature_diagonal(self, d, w):
        """Per-sample curvature u with hessian = X diag(u) X^T / q + lam I."""
        w = _checked_vector(w, d.n, "w")
        if self.kind is LossKind.LOG_LOSS:
            return k.logloss_curvature(d.features, d.labels, w)
        return k.sq_sigmoid_curvature(d.features, d.labels, w)


def _checked_vector(x, n, name):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains NaN/Inf entries")
    return x
