"""Independent reference computations used as test oracles.

Nothing here imports the code under test.
"""
import itertools
import math

import numpy as np


def exhaustive_kmeans_sse(X, k):
    """Minimum SSE over every assignment of the rows of ``X`` to ``k`` labels."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    labels = np.array(list(itertools.product(range(k), repeat=n)), dtype=np.int8)
    total = (X ** 2).sum()
    explained = np.zeros(len(labels))
    for c in range(k):
        M = (labels == c).astype(float)
        counts = M.sum(axis=1)
        S = M @ X
        with np.errstate(invalid="ignore", divide="ignore"):
            explained += np.where(counts > 0, (S ** 2).sum(axis=1) / counts, 0.0)
    return float(total - explained.max())


def central_differences(f, params, h=1e-5):
    """Numerical gradient of scalar ``f()`` w.r.t. every entry of the arrays in ``params`` (mutated in place)."""
    grads = []
    for p in params:
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            old = p[idx]
            p[idx] = old + h
            up = f()
            p[idx] = old - h
            down = f()
            p[idx] = old
            g[idx] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def adadelta_scalar(grad, x0, steps, rho=0.95, eps=1e-6):
    """Plain-float Adadelta trajectory for a 1-D objective with derivative ``grad``."""
    x, eg, edx = x0, 0.0, 0.0
    out = []
    for _ in range(steps):
        g = grad(x)
        eg = rho * eg + (1 - rho) * g * g
        dx = -math.sqrt(edx + eps) / math.sqrt(eg + eps) * g
        edx = rho * edx + (1 - rho) * dx * dx
        x += dx
        out.append(x)
    return out


def path_length_m(points, sx=1.05, sy=0.68):
    return sum(
        math.hypot((b[0] - a[0]) * sx, (b[1] - a[1]) * sy) for a, b in zip(points, points[1:])
    )
