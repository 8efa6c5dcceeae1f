"""k-means over standardized possession features, SSE curves and centroid naming."""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import numpy as np

from .errors import EmptyInput, FormatVersionError, TooFewPoints
from .features import FEATURE_NAMES

MODEL_VERSION = 1
_F = {name: i for i, name in enumerate(FEATURE_NAMES)}


@dataclass
class KMeansModel:
    k: int
    centroids: np.ndarray
    sse: float
    seed: int
    iterations_run: int
    restarts: int = 1
    names: list[str] = field(default_factory=list)
    # SSE after every Lloyd iteration, one trace per restart
    history: list[list[float]] = field(default_factory=list, repr=False)

    def to_json(self) -> str:
        return json.dumps(
            {
                "version": MODEL_VERSION,
                "k": self.k,
                "seed": self.seed,
                "restarts": self.restarts,
                "sse": self.sse,
                "iterations_run": self.iterations_run,
                "features": list(FEATURE_NAMES),
                "centroids": self.centroids.tolist(),
                "names": list(self.names),
            },
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "KMeansModel":
        rec = json.loads(text)
        if rec.get("version") != MODEL_VERSION:
            raise FormatVersionError(f"unsupported cluster model version {rec.get('version')!r}")
        return cls(
            k=rec["k"],
            centroids=np.array(rec["centroids"], dtype=float),
            sse=rec["sse"],
            seed=rec["seed"],
            iterations_run=rec["iterations_run"],
            restarts=rec["restarts"],
            names=list(rec["names"]),
        )


def sq_distances(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    # Direct differences rather than the ||x||^2 - 2x.c + ||c||^2 expansion: exact
    # ties must stay exact so the lowest-index rule is meaningful.
    out = np.empty((X.shape[0], C.shape[0]))
    for j in range(C.shape[0]):
        d = X - C[j]
        out[:, j] = np.einsum("ij,ij->i", d, d)
    return out


def _sse(X: np.ndarray, C: np.ndarray, labels: np.ndarray) -> float:
    d = X - C[labels]
    return float(np.einsum("ij,ij->", d, d))


def kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    idx = [int(rng.integers(n))]
    closest = sq_distances(X, X[idx]).ravel()
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            raise TooFewPoints("k-means++ ran out of distinct points")
        # inverse-CDF draw keeps the RNG consumption at one uniform per centroid
        r = rng.random() * total
        j = int(np.searchsorted(np.cumsum(closest), r, side="right"))
        j = min(j, n - 1)
        while closest[j] == 0:  # guards against float round-off landing on a chosen point
            j = (j + 1) % n
        idx.append(j)
        closest = np.minimum(closest, sq_distances(X, X[j : j + 1]).ravel())
    return X[idx].copy()


def _reseed_empty(X: np.ndarray, C: np.ndarray, labels: np.ndarray, d2: np.ndarray) -> None:
    k = C.shape[0]
    counts = np.bincount(labels, minlength=k)
    for j in np.flatnonzero(counts == 0):
        own = d2[np.arange(len(labels)), labels]
        donors = counts[labels] > 1
        if not donors.any():
            break
        own = np.where(donors, own, -1.0)
        far = int(np.argmax(own))
        counts[labels[far]] -= 1
        labels[far] = j
        counts[j] = 1
        C[j] = X[far]
        d2[far, :] = sq_distances(X[far : far + 1], C).ravel()


def lloyd(X: np.ndarray, init: np.ndarray, max_iter: int = 300, tol: float = 1e-4):
    """Lloyd iterations from ``init``. Returns ``(centroids, labels, sse, iterations, sse_trace)``."""
    C = init.copy()
    trace: list[float] = []
    labels = np.zeros(X.shape[0], dtype=np.intp)
    it = 0
    for it in range(1, max_iter + 1):
        d2 = sq_distances(X, C)
        labels = np.argmin(d2, axis=1)
        _reseed_empty(X, C, labels, d2)
        new = np.empty_like(C)
        for d in range(X.shape[1]):
            new[:, d] = np.bincount(labels, weights=X[:, d], minlength=C.shape[0])
        counts = np.bincount(labels, minlength=C.shape[0]).astype(float)
        new /= counts[:, None]
        shift = float(np.sqrt(((new - C) ** 2).sum(axis=1)).max())
        C = new
        trace.append(_sse(X, C, labels))
        if shift < tol:
            break
    d2 = sq_distances(X, C)
    final_labels = np.argmin(d2, axis=1)
    sse = _sse(X, C, final_labels)
    if sse <= trace[-1]:
        labels = final_labels
    else:  # cannot happen in exact arithmetic; keep the trace monotone under round-off
        sse = trace[-1]
    return C, labels, sse, it, trace


def _check_points(points, k: int) -> np.ndarray:
    X = np.asarray(points, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInput("k-means needs a non-empty 2-D point array")
    if k < 1:
        raise ValueError("k must be >= 1")
    n_distinct = np.unique(X, axis=0).shape[0]
    if k > n_distinct:
        raise TooFewPoints(f"k={k} exceeds the {n_distinct} distinct point(s)")
    return X


def kmeans(
    points,
    k: int,
    seed: int = 0,
    restarts: int = 10,
    max_iter: int = 300,
    tol: float = 1e-4,
    n_jobs: int = 1,
) -> KMeansModel:
    """Best-of-``restarts`` Lloyd k-means with k-means++ seeding.

    Restart ``r`` draws from its own stream seeded by ``(seed, r)``, so the outcome
    is independent of ``n_jobs``. Ties in SSE keep the earliest restart.
    """
    X = _check_points(points, k)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")

    def one(r: int):
        rng = np.random.default_rng([seed, r])
        return lloyd(X, kmeans_pp_init(X, k, rng), max_iter, tol)

    if n_jobs > 1 and restarts > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            runs = list(pool.map(one, range(restarts)))
    else:
        runs = [one(r) for r in range(restarts)]
    best = min(range(restarts), key=lambda r: (runs[r][2], r))
    C, _, sse, iters, _ = runs[best]
    return KMeansModel(
        k=k, centroids=C, sse=sse, seed=seed, iterations_run=iters, restarts=restarts,
        history=[run[4] for run in runs],
    )


def sse_curve(points, k_min: int, k_max: int, seed: int = 0, restarts: int = 10, n_jobs: int = 1):
    if not 1 <= k_min <= k_max:
        raise ValueError("need 1 <= k_min <= k_max")
    X = _check_points(points, k_max)
    return [(k, kmeans(X, k, seed=seed, restarts=restarts, n_jobs=n_jobs).sse) for k in range(k_min, k_max + 1)]


def assign(point, model: KMeansModel) -> int:
    d2 = sq_distances(np.asarray(point, dtype=float).reshape(1, -1), model.centroids).ravel()
    return int(np.argmin(d2))


def assign_many(points, model: KMeansModel) -> np.ndarray:
    return np.argmin(sq_distances(np.asarray(points, dtype=float), model.centroids), axis=1)


@dataclass(frozen=True)
class NamingRules:
    """Thresholds on standardized centroid values. ``left_sign=-1`` means negative avg_y is the left flank."""

    hi: float = 0.75
    lo: float = -0.75
    left_sign: int = -1


def label_centroid(centroid, all_centroids, rules: NamingRules = NamingRules(), index: int | None = None) -> str:
    c = np.asarray(centroid, dtype=float)
    allc = np.asarray(all_centroids, dtype=float)
    hi, lo = rules.hi, rules.lo
    if c[_F["duration"]] >= hi:
        if c[_F["speed_step_3"]] >= hi:
            return "long possession final acceleration"
        if c[_F["speed_step_2"]] >= hi:
            return "long possession fast approaching"
        return "long possession slow advancing"
    if c[_F["avg_pass_length"]] >= allc[:, _F["avg_pass_length"]].max():
        return "long ball"
    y = c[_F["avg_y"]] * rules.left_sign
    if abs(y) >= hi:
        side = "left flank" if y >= hi else "right flank"
        prefix = "high recovery" if c[_F["start_x"]] >= hi else "fast build"
        return f"{prefix} {side}"
    if c[_F["start_x"]] >= hi and c[_F["speed_step_1"]] <= lo:
        return "high recovery and rebuild"
    if c[_F["start_x"]] <= lo and c[_F["speed_step_1"]] >= hi:
        return "fast bottom build"
    if index is None:
        matches = np.flatnonzero((allc == c).all(axis=1))
        index = int(matches[0]) if matches.size else 0
    return f"possession type {index}"


def name_clusters(centroids, rules: NamingRules = NamingRules()) -> list[str]:
    """Label every centroid; repeated names get ``#2``, ``#3`` suffixes in index order."""
    raw = [label_centroid(c, centroids, rules, index=i) for i, c in enumerate(centroids)]
    seen: dict[str, int] = {}
    out = []
    for name in raw:
        seen[name] = seen.get(name, 0) + 1
        out.append(name if seen[name] == 1 else f"{name} #{seen[name]}")
    return out
