"""Numba-compiled loss kernels.

Same contracts as ``numpy_ref``, but written as explicit loops and compiled
with ``@njit``. The per-sample reduction runs sequentially over i = 0..q-1,
so results are bit-reproducible run to run. Expect a one-off compilation
cost on first call; compiled code is cached on disk afterwards.

Importing this module raises ImportError when numba is unavailable; the
package falls back to the numpy backend in that case.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _sigmoid(z):
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@njit(cache=True)
def logloss_value(X, y, w, lam):
    n, q = X.shape
    acc = 0.0
    for i in range(q):
        z = 0.0
        for j in range(n):
            z += X[j, i] * w[j]
        m = y[i] * z
        if m < 0.0:
            acc += -m + math.log1p(math.exp(m))
        else:
            acc += math.log1p(math.exp(-m))
    reg = 0.0
    for j in range(n):
        reg += w[j] * w[j]
    return acc / q + 0.5 * lam * reg


@njit(cache=True)
def logloss_gradient(X, y, w, lam):
    n, q = X.shape
    g = np.zeros(n)
    for i in range(q):
        z = 0.0
        for j in range(n):
            z += X[j, i] * w[j]
        coef = -y[i] * _sigmoid(-y[i] * z) / q
        for j in range(n):
            g[j] += coef * X[j, i]
    for j in range(n):
        g[j] += lam * w[j]
    return g


@njit(cache=True)
def logloss_hvp(X, y, w, v, lam):
    n, q = X.shape
    out = np.zeros(n)
    for i in range(q):
        z = 0.0
        xv = 0.0
        for j in range(n):
            z += X[j, i] * w[j]
            xv += X[j, i] * v[j]
        s = _sigmoid(-y[i] * z)
        coef = s * (1.0 - s) * xv / q
        for j in range(n):
            out[j] += coef * X[j, i]
    for j in range(n):
        out[j] += lam * v[j]
    return out


@njit(cache=True)
def logloss_curvature(X, y, w):
    n, q = X.shape
    u = np.empty(q)
    for i in range(q):
        z = 0.0
        for j in range(n):
            z += X[j, i] * w[j]
        s = _sigmoid(-y[i] * z)
        u[i] = s * (1.0 - s)
    return u


@njit(cache=True)
def sq_sigmoid_value(X, y, w, lam):
    n, q = X.shape
    acc = 0.0
    for i in range(q):
        z = 0.0
        for j in range(n):
            z += X[j, i] * w[j]
        r = y[i] - _sigmoid(z)
        acc += r * r
    reg = 0.0
    for j in range(n):
        reg += w[j] * w[j]
    return acc / q + 0.5 * lam * reg


@njit(cache=True)
def sq_sigmoid_gradient(X, y, w, lam):
    n, q = X.shape
    g = np.zeros(n)
    for i in range(q):
        z = 0.0
        for j in range(n):
            z += X[j, i] * w[j]
        s = _sigmoid(z)
        coef = -2.0 * (y[i] - s) * s * (1.0 - s) / q
        for j in range(n):
            g[j] += coef * X[j, i]
    for j in range(n):
        g[j] += lam * w[j]
    return g


@njit(cache=True)
def sq_sigmoid_curvature(X, y, w):
    n, q = X.shape
    u = np.empty(q)
    for i in range(q):
        z = 0.0
        for j in range(n):
            z += X[j, i] * w[j]
        s = _sigmoid(z)
        sp = s * (1.0 - s)
        u[i] = 2.0 * (sp * sp - (y[i] - s) * sp * (1.0 - 2.0 * s))
    return u


@njit(cache=True)
def sq_sigmoid_hvp(X, y, w, v, lam):
    n, q = X.shape
    out = np.zeros(n)
    for i in range(q):
        z = 0.0
        xv = 0.0
        for j in range(n):
            z += X[j, i] * w[j]
            xv += X[j, i] * v[j]
        s = _sigmoid(z)
        sp = s * (1.0 - s)
        coef = 2.0 * (sp * sp - (y[i] - s) * sp * (1.0 - 2.0 * s)) * xv / q
        for j in range(n):
            out[j] += coef * X[j, i]
    for j in range(n):
        out[j] += lam * v[j]
    return out
