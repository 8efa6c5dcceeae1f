"""Coach profile matrices: possession-type ratios, expected goals and score context."""
from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ClusterCountMismatch, EmptyCorpus, FormatVersionError, NoMatches, NotAShot
from .features import X_SCALE, Y_SCALE
from .model import Event, MatchMeta
from .possession import Possession

ROW_NAMES = (
    "avg_ratio",
    "suffered_avg_ratio",
    "avg_xg",
    "suffered_avg_xg",
    "ratio_winning",
    "ratio_drawing",
    "ratio_losing",
)
RATIO_ROWS = (0, 1, 4, 5, 6)
XG_ROWS = (2, 3)
CONTEXTS = ("winning", "drawing", "losing")
SCALING_VERSION = 1

GOAL_HALF_WIDTH_M = 3.66


@dataclass(frozen=True)
class XgModelParams:
    intercept: float = -0.3
    per_meter: float = -0.09
    per_radian: float = 1.8


def shot_geometry(x: float, y: float) -> tuple[float, float]:
    """Distance (m) to the goal centre and the angle (rad) subtended by the goal mouth."""
    dx = (100.0 - x) * X_SCALE
    dy = (50.0 - y) * Y_SCALE
    dist = math.hypot(dx, dy)
    a1 = math.atan2(dy + GOAL_HALF_WIDTH_M, dx)
    a2 = math.atan2(dy - GOAL_HALF_WIDTH_M, dx)
    return dist, abs(a1 - a2)


def xg(shot: Event, params: XgModelParams = XgModelParams()) -> float:
    if shot.event_type != "shot":
        raise NotAShot(f"event seq={shot.seq} is a {shot.event_type}, not a shot")
    if shot.xg is not None:
        return shot.xg
    dist, angle = shot_geometry(shot.x, shot.y)
    z = params.intercept + params.per_meter * dist + params.per_radian * angle
    return 1.0 / (1.0 + math.exp(-z))


def context_at(timeline: Sequence[tuple[int, float, str]], team: str, period: int, t: float) -> str:
    """Score context of ``team`` counting goals strictly before ``(period, t)``."""
    cut = bisect.bisect_left([(p, tt) for p, tt, _ in timeline], (period, t))
    diff = 0
    for _, _, scorer in timeline[:cut]:
        diff += 1 if scorer == team else -1
    if diff > 0:
        return "winning"
    if diff < 0:
        return "losing"
    return "drawing"


@dataclass(frozen=True)
class MatchPossessions:
    """One match seen from the profiled team: typed own/opponent possessions and the goal timeline."""

    meta: MatchMeta
    own: Sequence[tuple[Possession, int]]
    opponent: Sequence[tuple[Possession, int]]
    timeline: Sequence[tuple[int, float, str]] = ()


@dataclass
class CoachProfile:
    coach_id: str
    team_id: str
    n_matches: int
    matrix: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return self.matrix.shape[1]

    def row(self, name: str) -> np.ndarray:
        return self.matrix[ROW_NAMES.index(name)]


def _type_fractions(types: Sequence[int], k: int) -> np.ndarray | None:
    if not types:
        return None
    return np.bincount(np.asarray(types, dtype=np.intp), minlength=k)[:k] / len(types)


def _mean_rows(rows: list[np.ndarray | None], k: int) -> np.ndarray:
    present = [r for r in rows if r is not None]
    if not present:
        return np.full(k, 1.0 / k)
    return np.mean(present, axis=0)


def _xg_by_type(typed: Sequence[tuple[Possession, int]], k: int, params: XgModelParams) -> np.ndarray:
    out = np.zeros(k)
    for p, c in typed:
        out[c] += math.fsum(xg(e, params) for e in p.events if e.event_type == "shot")
    return out


def build_profile(
    coach_id: str,
    team_id: str,
    matches: Sequence[MatchPossessions],
    k: int = 10,
    xg_params: XgModelParams = XgModelParams(),
) -> CoachProfile:
    """Aggregate a (coach, team) pair's matches into a 7 x k profile matrix.

    Type ratios and xG are averaged per match; score-context ratios pool every
    own possession by the context at its start, and a context never observed
    copies the ``avg_ratio`` row.
    """
    if not matches:
        raise NoMatches(f"no matches for coach {coach_id!r} at team {team_id!r}")
    for m in matches:
        for _, c in list(m.own) + list(m.opponent):
            if not 0 <= c < k:
                raise ClusterCountMismatch(f"cluster index {c} outside 0..{k - 1}")
        coach = m.meta.coach_of(team_id)
        if coach != coach_id:
            raise ValueError(f"match {m.meta.match_id}: team {team_id!r} is coached by {coach!r}")
    matches = sorted(matches, key=lambda m: m.meta.match_id)

    avg_ratio = _mean_rows([_type_fractions([c for _, c in m.own], k) for m in matches], k)
    suffered = _mean_rows([_type_fractions([c for _, c in m.opponent], k) for m in matches], k)
    avg_xg = np.mean([_xg_by_type(m.own, k, xg_params) for m in matches], axis=0)
    suffered_xg = np.mean([_xg_by_type(m.opponent, k, xg_params) for m in matches], axis=0)

    by_context: dict[str, list[int]] = {c: [] for c in CONTEXTS}
    for m in matches:
        for p, c in m.own:
            by_context[context_at(m.timeline, team_id, p.period, p.start_t)].append(c)
    ctx_rows = []
    for name in CONTEXTS:
        frac = _type_fractions(by_context[name], k)
        ctx_rows.append(avg_ratio.copy() if frac is None else frac)

    matrix = np.vstack([avg_ratio, suffered, avg_xg, suffered_xg, *ctx_rows])
    return CoachProfile(coach_id, team_id, len(matches), matrix)


@dataclass(frozen=True)
class ProfileScaling:
    """Global min/max per xG row type, used to map xG rows into [0, 1]."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def to_json(self) -> str:
        return json.dumps(
            {"version": SCALING_VERSION, "rows": [ROW_NAMES[r] for r in XG_ROWS],
             "min": list(self.mins), "max": list(self.maxs)},
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "ProfileScaling":
        rec = json.loads(text)
        if rec.get("version") != SCALING_VERSION:
            raise FormatVersionError(f"unsupported scaling version {rec.get('version')!r}")
        return cls(tuple(rec["min"]), tuple(rec["max"]))


def apply_profile_scaling(profile: CoachProfile, scaling: ProfileScaling) -> np.ndarray:
    """Flatten one profile row-major after min-max scaling its xG rows (clipped to [0, 1])."""
    m = profile.matrix.astype(float).copy()
    for row, lo, hi in zip(XG_ROWS, scaling.mins, scaling.maxs):
        m[row] = 0.0 if hi == lo else np.clip((m[row] - lo) / (hi - lo), 0.0, 1.0)
    return m.ravel()


def flatten_and_scale(profiles: Sequence[CoachProfile], k: int = 10) -> tuple[np.ndarray, ProfileScaling]:
    if not profiles:
        raise EmptyCorpus("no profiles to scale")
    for p in profiles:
        if p.k != k:
            raise ClusterCountMismatch(f"profile {p.coach_id}/{p.team_id} has {p.k} columns, expected {k}")
    stack = np.stack([p.matrix for p in profiles])
    scaling = ProfileScaling(
        tuple(float(stack[:, r].min()) for r in XG_ROWS),
        tuple(float(stack[:, r].max()) for r in XG_ROWS),
    )
    return np.vstack([apply_profile_scaling(p, scaling) for p in profiles]), scaling


def profile_columns(k: int = 10) -> list[str]:
    return [f"{row}_{j}" for row in ROW_NAMES for j in range(k)]
