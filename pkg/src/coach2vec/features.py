"""The seven possession features and the corpus z-score scaler."""
from __future__ import annotations

import json
import math
from dataclasses import astuple, dataclass
from typing import Sequence

import numpy as np

from .errors import DegeneratePossession, EmptyCorpus, FormatVersionError
from .possession import Possession

PITCH_LENGTH_M = 105.0
PITCH_WIDTH_M = 68.0
X_SCALE = PITCH_LENGTH_M / 100.0
Y_SCALE = PITCH_WIDTH_M / 100.0

FEATURE_NAMES = (
    "duration",
    "avg_pass_length",
    "avg_y",
    "start_x",
    "speed_step_1",
    "speed_step_2",
    "speed_step_3",
)
N_FEATURES = len(FEATURE_NAMES)
SCALER_VERSION = 1


@dataclass(frozen=True)
class FeatureVector:
    duration: float
    avg_pass_length: float
    avg_y: float
    start_x: float
    speed_step_1: float
    speed_step_2: float
    speed_step_3: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


def meters(x0: float, y0: float, x1: float, y1: float) -> float:
    return math.hypot((x1 - x0) * X_SCALE, (y1 - y0) * Y_SCALE)


def slot_path_lengths(times: Sequence[float], xs: Sequence[float], ys: Sequence[float]) -> list[float]:
    """Path length (m) of a piecewise-linear trajectory inside each of three equal time slots.

    The ball moves uniformly along each segment between consecutive timestamps.
    A segment with zero elapsed time is credited entirely to the slot containing
    its instant (the last slot for the end instant).
    """
    t0, t1 = times[0], times[-1]
    width = (t1 - t0) / 3.0
    bounds = [(t0 + i * width, t0 + (i + 1) * width if i < 2 else t1) for i in range(3)]
    out = [0.0, 0.0, 0.0]
    for i in range(len(times) - 1):
        length = meters(xs[i], ys[i], xs[i + 1], ys[i + 1])
        if length == 0.0:
            continue
        a, b = times[i], times[i + 1]
        if b == a:
            slot = min(int((a - t0) / width), 2)
            out[slot] += length
            continue
        for s, (lo, hi) in enumerate(bounds):
            overlap = min(b, hi) - max(a, lo)
            if overlap > 0:
                out[s] += length * overlap / (b - a)
    return out


def compute_features(p: Possession) -> FeatureVector:
    if len(p.events) < 2 or not p.end_t > p.start_t:
        raise DegeneratePossession(
            f"possession in {p.match_id} at t={p.start_t} has {len(p.events)} event(s) "
            f"and duration {p.duration}"
        )
    evs = p.events
    duration = p.end_t - p.start_t
    passes = [meters(e.x, e.y, e.end_x, e.end_y) for e in evs if e.event_type == "pass"]
    avg_pass = math.fsum(passes) / len(passes) if passes else 0.0
    avg_y = math.fsum(e.y for e in evs) / len(evs)
    lengths = slot_path_lengths([e.t for e in evs], [e.x for e in evs], [e.y for e in evs])
    slot = duration / 3.0
    return FeatureVector(
        duration=duration,
        avg_pass_length=avg_pass,
        avg_y=avg_y,
        start_x=evs[0].x,
        speed_step_1=lengths[0] / slot,
        speed_step_2=lengths[1] / slot,
        speed_step_3=lengths[2] / slot,
    )


@dataclass(frozen=True)
class ScalerParams:
    mean: tuple[float, ...]
    std: tuple[float, ...]
    n: int

    def to_json(self) -> str:
        return json.dumps(
            {"version": SCALER_VERSION, "features": list(FEATURE_NAMES), "mean": list(self.mean),
             "std": list(self.std), "n": self.n},
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "ScalerParams":
        rec = json.loads(text)
        if rec.get("version") != SCALER_VERSION:
            raise FormatVersionError(f"unsupported scaler version {rec.get('version')!r}")
        return cls(tuple(rec["mean"]), tuple(rec["std"]), int(rec["n"]))


def _as_matrix(vectors) -> np.ndarray:
    rows = [v.as_array() if isinstance(v, FeatureVector) else np.asarray(v, dtype=float) for v in vectors]
    if not rows:
        raise EmptyCorpus("cannot fit a scaler on an empty corpus")
    return np.vstack(rows)


def fit_scaler(vectors: Sequence[FeatureVector]) -> ScalerParams:
    """Per-feature mean and population standard deviation.

    Columns are reduced with numpy's fixed pairwise summation over the whole
    matrix, so the result does not depend on how the vectors were produced.
    """
    X = _as_matrix(vectors)
    mean = X.mean(axis=0)
    std = np.sqrt(((X - mean) ** 2).mean(axis=0))
    return ScalerParams(tuple(float(m) for m in mean), tuple(float(s) for s in std), X.shape[0])


def apply_scaler(v, s: ScalerParams) -> np.ndarray:
    """Z-score one vector (or a stack of them); zero-variance features map to 0."""
    if isinstance(v, FeatureVector):
        x = v.as_array()
    elif isinstance(v, (list, tuple)) and v and isinstance(v[0], FeatureVector):
        x = _as_matrix(v)
    else:
        x = np.asarray(v, dtype=float)
    mean = np.asarray(s.mean)
    std = np.asarray(s.std)
    safe = np.where(std > 0, std, 1.0)
    return np.where(std > 0, (x - mean) / safe, 0.0)
