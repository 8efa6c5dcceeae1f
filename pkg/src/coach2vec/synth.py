"""Seeded synthetic event corpora with known coach style archetypes.

Each possession is drawn from a *template* that fixes its target features
(duration, start zone, flank, per-third ball speed, pass structure); events are
then laid out so the extracted features land near those targets. Coaches follow
an archetype, i.e. a mixture over templates that shifts with the score.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig
from .features import X_SCALE, Y_SCALE
from .model import Event, EventStore, MatchMeta
from .profiles import XgModelParams, xg


@dataclass(frozen=True)
class Template:
    name: str
    duration: tuple[float, float]
    gap: tuple[float, float]  # seconds between consecutive events
    start_x: tuple[float, float]
    lane_y: tuple[float, float]
    speeds: tuple[tuple[float, float], tuple[float, float], tuple[float, float]]  # m/s per third
    forward: float = 0.7  # probability a segment moves toward the opponent goal
    segments: tuple[int, int] | None = None  # fixed range of segment counts, overrides ``gap``


TEMPLATES: dict[str, Template] = {
    t.name: t
    for t in (
        Template("long_slow", (30, 50), (2.5, 4.0), (20, 45), (35, 65), ((1.0, 2.0), (1.0, 2.0), (1.0, 2.0)), 0.55),
        Template("long_final_accel", (30, 50), (2.5, 4.0), (25, 45), (35, 65), ((1.0, 2.0), (1.0, 2.0), (7.0, 10.0)), 0.8),
        Template("long_fast_approach", (30, 50), (2.5, 4.0), (25, 45), (35, 65), ((1.0, 2.0), (7.0, 10.0), (1.0, 2.0)), 0.8),
        Template("fast_build_left", (6, 14), (1.5, 2.5), (15, 40), (5, 18), ((4.0, 7.0), (4.0, 7.0), (4.0, 7.0)), 0.9),
        Template("fast_build_right", (6, 14), (1.5, 2.5), (15, 40), (82, 95), ((4.0, 7.0), (4.0, 7.0), (4.0, 7.0)), 0.9),
        Template("high_recovery_left", (5, 12), (1.5, 2.5), (65, 85), (5, 18), ((3.0, 5.0), (3.0, 5.0), (3.0, 5.0)), 0.6),
        Template("high_recovery_right", (5, 12), (1.5, 2.5), (65, 85), (82, 95), ((3.0, 5.0), (3.0, 5.0), (3.0, 5.0)), 0.6),
        Template("long_ball", (5, 8), (2.5, 4.0), (10, 30), (35, 65), ((9.0, 11.0), (9.0, 11.0), (9.0, 11.0)), 0.95, (2, 2)),
        Template("high_recovery_rebuild", (15, 25), (2.0, 3.0), (72, 88), (35, 65), ((0.1, 0.5), (2.0, 3.5), (2.0, 3.5)), 0.3),
        Template("fast_bottom_build", (8, 15), (1.5, 2.5), (3, 18), (30, 70), ((7.0, 10.0), (3.0, 5.0), (3.0, 5.0)), 0.9),
    )
}


@dataclass(frozen=True)
class Archetype:
    name: str
    mixture: dict[str, float]
    shot_rate: float = 0.15
    winning_shift: dict[str, float] = field(default_factory=dict)
    losing_shift: dict[str, float] = field(default_factory=dict)

    def validate(self) -> None:
        probs = np.array(list(self.mixture.values()), dtype=float)
        if np.any(probs < 0) or not math.isclose(probs.sum(), 1.0, abs_tol=1e-9):
            raise InvalidConfig(f"archetype {self.name!r}: mixture must be non-negative and sum to 1")
        for name in (*self.mixture, *self.winning_shift, *self.losing_shift):
            if name not in TEMPLATES:
                raise InvalidConfig(f"archetype {self.name!r}: unknown template {name!r}")
        if not 0.0 <= self.shot_rate <= 1.0:
            raise InvalidConfig(f"archetype {self.name!r}: shot_rate outside [0, 1]")

    def mixture_for(self, context: str) -> np.ndarray:
        names = list(TEMPLATES)
        p = np.array([self.mixture.get(n, 0.0) for n in names])
        shift = {"winning": self.winning_shift, "losing": self.losing_shift}.get(context, {})
        p = np.clip(p + np.array([shift.get(n, 0.0) for n in names]), 0.0, None)
        return p / p.sum()


DEFAULT_ARCHETYPES = (
    Archetype(
        "possession_play",
        {"long_slow": 0.3, "long_final_accel": 0.2, "long_fast_approach": 0.2, "high_recovery_rebuild": 0.2,
         "fast_build_left": 0.05, "fast_build_right": 0.05},
        shot_rate=0.2,
        winning_shift={"long_slow": 0.1},
        losing_shift={"long_final_accel": 0.1},
    ),
    Archetype(
        "wing_play",
        {"fast_build_left": 0.25, "fast_build_right": 0.25, "high_recovery_left": 0.2, "high_recovery_right": 0.2,
         "long_slow": 0.1},
        shot_rate=0.15,
        losing_shift={"fast_build_left": 0.05, "fast_build_right": 0.05},
    ),
    Archetype(
        "direct_play",
        {"long_ball": 0.45, "fast_bottom_build": 0.35, "high_recovery_rebuild": 0.1, "long_slow": 0.1},
        shot_rate=0.12,
        winning_shift={"long_ball": 0.1},
    ),
)


@dataclass(frozen=True)
class GeneratorConfig:
    archetypes: tuple[Archetype, ...] = DEFAULT_ARCHETYPES
    coaches_per_archetype: int = 8
    matches_per_coach: int = 30
    possessions_per_match: int = 40
    seed: int = 1
    # concentration of the per-coach Dirichlet perturbation of the archetype mixture
    coach_concentration: float = 200.0

    def validate(self) -> None:
        if not self.archetypes:
            raise InvalidConfig("at least one archetype required")
        for n in (self.coaches_per_archetype, self.matches_per_coach, self.possessions_per_match):
            if not isinstance(n, int) or n < 1:
                raise InvalidConfig("coaches_per_archetype, matches_per_coach and possessions_per_match must be >= 1")
        if len(self.archetypes) * self.coaches_per_archetype < 2:
            raise InvalidConfig("need at least two coaches to schedule matches")
        if len({a.name for a in self.archetypes}) != len(self.archetypes):
            raise InvalidConfig("archetype names must be unique")
        for a in self.archetypes:
            a.validate()


@dataclass
class SynthCorpus:
    store: EventStore
    ground_truth: dict[str, str]  # coach_id -> archetype name
    templates: dict[str, list[str]]  # match_id -> template of each generated possession, in order
    teams: dict[str, str]  # coach_id -> team_id


def _clamp(v: float) -> float:
    return min(100.0, max(0.0, v))


class _MatchWriter:
    def __init__(self, match_id: str):
        self.match_id = match_id
        self.events: list[Event] = []

    def add(self, period, t, team, etype, x, y, end=None, tags=(), xg_value=None):
        ex, ey = (None, None) if end is None else (round(_clamp(end[0]), 2), round(_clamp(end[1]), 2))
        self.events.append(
            Event(self.match_id, period, round(t, 3), team, etype, round(_clamp(x), 2), round(_clamp(y), 2),
                  ex, ey, frozenset(tags), xg_value, len(self.events))
        )


def _realize(rng: np.random.Generator, tpl: Template, t0: float):
    """Timestamps and positions (percent) of one possession drawn from ``tpl``."""
    duration = float(rng.uniform(*tpl.duration))
    if tpl.segments is not None:
        n_seg = int(rng.integers(tpl.segments[0], tpl.segments[1] + 1))
    else:
        n_seg = max(1, int(round(duration / float(rng.uniform(*tpl.gap)))))
    cuts = np.sort(rng.uniform(0.15, 0.85, size=n_seg - 1)) if n_seg > 1 else np.array([])
    # jittered but strictly increasing relative event times
    base = (np.arange(1, n_seg) + (cuts - 0.5) * 0.8) / n_seg if n_seg > 1 else np.array([])
    rel = np.concatenate([[0.0], base, [1.0]])
    times = (t0 + rel * duration).tolist()
    speeds = [float(rng.uniform(*r)) for r in tpl.speeds]
    x = float(rng.uniform(*tpl.start_x))
    lane = float(rng.uniform(*tpl.lane_y))
    y = lane
    xs, ys = [x], [y]
    slot = duration / 3.0
    for i in range(n_seg):
        dt = times[i + 1] - times[i]
        mid = (times[i] + times[i + 1]) / 2.0 - t0
        length = speeds[min(int(mid / slot), 2)] * dt
        pull = (lane - y) * Y_SCALE * 0.5 + float(rng.normal(0.0, 2.0))
        dy = max(-length, min(length, pull))
        dx = math.sqrt(max(length * length - dy * dy, 0.0))
        if rng.random() >= tpl.forward:
            dx = -dx
        nx = x + dx / X_SCALE
        if nx > 100.0 or nx < 0.0:
            nx = x - dx / X_SCALE
        x, y = _clamp(nx), _clamp(y + dy / Y_SCALE)
        xs.append(x)
        ys.append(y)
    return times, xs, ys


def _emit_possession(w: _MatchWriter, rng, tpl: Template, period, t0, team, shot_rate, xg_params):
    """Write one possession; returns (end time, last position, scored)."""
    times, xs, ys = _realize(rng, tpl, t0)
    n = len(times)
    for i in range(n - 1):
        w.add(period, times[i], team, "pass", xs[i], ys[i], end=(xs[i + 1], ys[i + 1]), tags=("accurate",))
    lx, ly = xs[-1], ys[-1]
    scored = False
    if lx >= 70.0 and rng.random() < shot_rate * 3.0:
        target = (100.0, 50.0 + float(rng.uniform(-4.0, 4.0)))
        shot = Event(w.match_id, period, round(times[-1], 3), team, "shot", round(lx, 2), round(ly, 2), *target)
        scored = rng.random() < xg(shot, xg_params)
        w.add(period, times[-1], team, "shot", lx, ly, end=target, tags=("goal",) if scored else ())
    else:
        end = (lx + float(rng.uniform(5.0, 20.0)) / X_SCALE, ly + float(rng.normal(0.0, 8.0)))
        w.add(period, times[-1], team, "pass", lx, ly, end=end)
    return times[-1], (lx, ly), scored


def _coach_mixtures(config: GeneratorConfig, rng: np.random.Generator):
    out = []
    names = list(TEMPLATES)
    for arch in config.archetypes:
        for _ in range(config.coaches_per_archetype):
            base = np.array([arch.mixture.get(n, 0.0) for n in names])
            support = base > 0
            p = np.zeros_like(base)
            p[support] = rng.dirichlet(base[support] * config.coach_concentration)
            out.append((arch, dict(zip(names, p))))
    return out


def generate_corpus(config: GeneratorConfig = GeneratorConfig(), xg_params: XgModelParams = XgModelParams()) -> SynthCorpus:
    config.validate()
    coach_rng = np.random.default_rng([config.seed, 0])
    coaches = []
    for idx, (arch, mix) in enumerate(_coach_mixtures(config, coach_rng)):
        personal = Archetype(arch.name, mix, arch.shot_rate, arch.winning_shift, arch.losing_shift)
        coaches.append((f"C{idx:03d}", f"T{idx:03d}", personal))
    matches, events, templates = [], [], {}
    names = list(TEMPLATES)
    n_poss = config.possessions_per_match
    first_half = (n_poss + 1) // 2
    for ci, (coach, team, arch) in enumerate(coaches):
        others = [j for j, c in enumerate(coaches) if c[2].name != arch.name] or [j for j in range(len(coaches)) if j != ci]
        for m in range(config.matches_per_coach):
            midx = ci * config.matches_per_coach + m
            rng = np.random.default_rng([config.seed, 1, midx])
            oc, ot, oarch = coaches[others[int(rng.integers(len(others)))]]
            match_id = f"M{midx:05d}"
            matches.append(MatchMeta(match_id, "synthetic", team, ot, coach, oc))
            w = _MatchWriter(match_id)
            side = {team: arch, ot: oarch}
            goals = {team: 0, ot: 0}
            used = []
            t = 0.0
            for p in range(n_poss):
                period = 1 if p < first_half else 2
                if p == first_half:
                    t = 0.0
                actor = team if p % 2 == 0 else ot
                opp = ot if actor == team else team
                diff = goals[actor] - goals[opp]
                ctx = "winning" if diff > 0 else "losing" if diff < 0 else "drawing"
                tname = names[int(rng.choice(len(names), p=side[actor].mixture_for(ctx)))]
                used.append(tname)
                t_end, (lx, ly), scored = _emit_possession(
                    w, rng, TEMPLATES[tname], period, t, actor, side[actor].shot_rate, xg_params
                )
                if scored:
                    goals[actor] += 1
                t_stop = t_end + float(rng.uniform(1.0, 3.0))
                w.add(period, t_stop, actor, "interruption", lx, ly)
                t = t_stop + float(rng.uniform(2.0, 6.0))
            events.extend(w.events)
            templates[match_id] = used
    store = EventStore(matches, events)
    return SynthCorpus(
        store,
        {c: a.name for c, _, a in coaches},
        templates,
        {c: t for c, t, _ in coaches},
    )


def generate(config: GeneratorConfig = GeneratorConfig()) -> tuple[EventStore, dict[str, str]]:
    corpus = generate_corpus(config)
    return corpus.store, corpus.ground_truth


def write_ground_truth(path, ground_truth: dict[str, str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["coach_id", "archetype"])
        for coach in sorted(ground_truth):
            w.writerow([coach, ground_truth[coach]])


def read_ground_truth(path) -> dict[str, str]:
    with open(path, newline="", encoding="utf-8") as fh:
        return {row["coach_id"]: row["archetype"] for row in csv.DictReader(fh)}
