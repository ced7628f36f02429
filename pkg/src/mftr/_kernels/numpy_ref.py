"""Pure-numpy loss kernels.

Reference implementations of the regularized log-loss and squared-sigmoid
objectives, their gradients, and Hessian-vector products. The data matrix
``X`` is (n_features, n_samples) with one sample per column; ``y`` holds
labels in {-1, +1}. All reductions here are plain numpy sums, which use a
fixed deterministic evaluation order, so repeated calls are reproducible.
"""

import numpy as np


def sigmoid(z):
    """Elementwise logistic function, branch-wise so exp never overflows."""
    z = np.asarray(z)
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logloss_value(X, y, w, lam):
    margin = y * (w @ X)
    # log(1+e^{-m}) = max(-m, 0) + log(1+e^{-|m|})
    losses = np.maximum(-margin, 0.0) + np.log1p(np.exp(-np.abs(margin)))
    return losses.sum() / y.size + 0.5 * lam * (w @ w)


def logloss_gradient(X, y, w, lam):
    margin = y * (w @ X)
    coef = -y * sigmoid(-margin) / y.size
    return X @ coef + lam * w


def logloss_hvp(X, y, w, v, lam):
    margin = y * (w @ X)
    s = sigmoid(-margin)
    weights = s * (1.0 - s) / y.size
    return X @ (weights * (v @ X)) + lam * v


def logloss_curvature(X, y, w):
    """Per-sample loss curvature u_i, so that H = X diag(u) X^T / q + lam I."""
    s = sigmoid(-y * (w @ X))
    return s * (1.0 - s)


def sq_sigmoid_value(X, y, w, lam):
    s = sigmoid(w @ X)
    r = y - s
    return (r @ r) / y.size + 0.5 * lam * (w @ w)


def sq_sigmoid_gradient(X, y, w, lam):
    s = sigmoid(w @ X)
    coef = -2.0 * (y - s) * s * (1.0 - s) / y.size
    return X @ coef + lam * w


def sq_sigmoid_hvp(X, y, w, v, lam):
    s = sigmoid(w @ X)
    sp = s * (1.0 - s)  # sigma'
    r = y - s
    weights = 2.0 * (sp * sp - r * sp * (1.0 - 2.0 * s)) / y.size
    return X @ (weights * (v @ X)) + lam * v


def sq_sigmoid_curvature(X, y, w):
    """Per-sample loss curvature u_i, so that H = X diag(u) X^T / q + lam I."""
    s = sigmoid(w @ X)
    sp = s * (1.0 - s)
    return 2.0 * (sp * sp - (y - s) * sp * (1.0 - 2.0 * s))
