"""End-to-end workflow: ingest, segment, featurize, cluster, profile, train, encode, index.

Every stage reads its inputs from the output directory (or from an in-memory
cache of the same files) and writes its artifacts back there, so running the
stages one by one produces the same bytes as :func:`run_pipeline`.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import clustering, features, nn, profiles, similarity
from .errors import Coach2VecError, FormatVersionError, InvalidConfig
from .model import goal_timeline, read_store, write_store
from .possession import filter_valid, segment, write_possessions_csv

log = logging.getLogger(__name__)

MANIFEST_VERSION = 1
STORE_ENV = "COACH2VEC_STORE"

EVENTS_FILE = "events.jsonl"
MATCHES_FILE = "matches.jsonl"


@dataclass(frozen=True)
class PipelineConfig:
    store: str = field(default_factory=lambda: os.environ.get(STORE_ENV, "."))
    out_dir: str = "coach2vec_out"
    k: int = 10
    cluster_seed: int = 0
    restarts: int = 10
    max_iter: int = 300
    tol: float = 1e-4
    elbow_k_min: int = 2
    elbow_k_max: int = 15
    min_events: int = 2
    min_duration: float = 0.0
    strict: bool = False
    train: nn.TrainConfig = nn.TrainConfig()
    xg: profiles.XgModelParams = profiles.XgModelParams()
    naming: clustering.NamingRules = clustering.NamingRules()
    workers: int = 1

    def __post_init__(self):
        if self.k < 1 or self.restarts < 1 or self.max_iter < 1 or self.tol < 0:
            raise InvalidConfig("k, restarts and max_iter must be >= 1 and tol >= 0")
        if not 1 <= self.elbow_k_min <= self.elbow_k_max:
            raise InvalidConfig("need 1 <= elbow_k_min <= elbow_k_max")
        if self.min_events < 1 or self.min_duration < 0:
            raise InvalidConfig("min_events must be >= 1 and min_duration >= 0")
        if self.workers < 1:
            raise InvalidConfig("workers must be >= 1")
        if self.train.dims[-1] != 7 * self.k:
            raise InvalidConfig(f"autoencoder width {self.train.dims[-1]} does not match 7 x k = {7 * self.k}")

    @property
    def out(self) -> Path:
        return Path(self.out_dir)

    def reproducible_dict(self) -> dict:
        """Config recorded in the manifest; output location and worker count do not affect results."""
        d = asdict(self)
        d.pop("out_dir")
        d.pop("workers")
        d["train"] = self.train.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict, **overrides) -> "PipelineConfig":
        d = dict(d)
        d["train"] = nn.TrainConfig.from_dict(d["train"])
        d["xg"] = profiles.XgModelParams(**d["xg"])
        d["naming"] = clustering.NamingRules(**d["naming"])
        d.update(overrides)
        return cls(**d)


def default_config(**kw) -> PipelineConfig:
    """Defaults, with ``k`` propagated into the autoencoder width when only ``k`` is given."""
    k = kw.get("k", 10)
    if "train" not in kw and k != 10:
        dims = (7 * k, *nn.DEFAULT_DIMS[1:-1], 7 * k)
        kw["train"] = nn.TrainConfig(dims=dims)
    return PipelineConfig(**kw)


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@contextmanager
def stage(name: str):
    try:
        yield
    except Coach2VecError as exc:
        if exc.stage is None:
            exc.stage = name
        raise
    except (OSError, ValueError) as exc:
        # plain errors carry the stage too so diagnostics can name it
        if getattr(exc, "pipeline_stage", None) is None:
            exc.pipeline_stage = name
        raise


def _fmt(v: float) -> str:
    return repr(float(v))


class _Context:
    """Lazily loaded, cached stage inputs for one output directory."""

    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self._store = None
        self._possessions = None

    @property
    def store(self):
        if self._store is None:
            out = self.cfg.out
            self._store = read_store(out / EVENTS_FILE, out / MATCHES_FILE, strict=True)
        return self._store

    @property
    def possessions(self) -> dict[str, list]:
        if self._possessions is None:
            cfg = self.cfg
            store = self.store

            def one(mid):
                return filter_valid(segment(store.events(mid)), cfg.min_events, cfg.min_duration)

            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                lists = list(pool.map(one, store.match_ids))
            self._possessions = dict(zip(store.match_ids, lists))
        return self._possessions

    def iter_possessions(self):
        for mid in self.store.match_ids:
            for i, p in enumerate(self.possessions[mid]):
                yield mid, i, p


def _update_manifest(cfg: PipelineConfig, stage_name: str, files: list[str]) -> None:
    path = cfg.out / "manifest.json"
    manifest = {"version": MANIFEST_VERSION, "config": None, "seeds": None, "stages": {}}
    if path.exists():
        manifest = json.loads(path.read_text())
    manifest["config"] = cfg.reproducible_dict()
    manifest["seeds"] = {"cluster": cfg.cluster_seed, "train": cfg.train.seed}
    manifest["stages"][stage_name] = {f: sha256(cfg.out / f) for f in files}
    manifest["stages"] = {s: manifest["stages"][s] for s in STAGES if s in manifest["stages"]}
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")


def load_manifest(path) -> dict:
    manifest = json.loads(Path(path).read_text())
    if manifest.get("version") != MANIFEST_VERSION:
        raise FormatVersionError(f"unsupported manifest version {manifest.get('version')!r}")
    return manifest


def config_from_manifest(path, out_dir: str, workers: int = 1) -> PipelineConfig:
    return PipelineConfig.from_dict(load_manifest(path)["config"], out_dir=out_dir, workers=workers)


# ---------------------------------------------------------------- stages


def run_ingest(cfg: PipelineConfig, ctx: _Context | None = None) -> dict:
    ctx = ctx or _Context(cfg)
    with stage("ingest"):
        src = Path(cfg.store)
        store = read_store(src / EVENTS_FILE, src / MATCHES_FILE, strict=cfg.strict)
        cfg.out.mkdir(parents=True, exist_ok=True)
        write_store(store, cfg.out / EVENTS_FILE, cfg.out / MATCHES_FILE)
        report = {"matches": len(store.matches), "events": len(store), "skipped": store.skipped}
        (cfg.out / "ingest.json").write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
        ctx._store = store
        _update_manifest(cfg, "ingest", [EVENTS_FILE, MATCHES_FILE, "ingest.json"])
    return report


def run_possessions(cfg: PipelineConfig, ctx: _Context | None = None) -> int:
    ctx = ctx or _Context(cfg)
    with stage("possessions"):
        write_possessions_csv(cfg.out / "possessions.csv", (p for _, _, p in ctx.iter_possessions()))
        _update_manifest(cfg, "possessions", ["possessions.csv"])
    return sum(len(v) for v in ctx.possessions.values())


FEATURE_KEY_COLUMNS = ("match_id", "possession_index", "team_id", "period", "start_t", "end_t")


def run_features(cfg: PipelineConfig, ctx: _Context | None = None) -> features.ScalerParams:
    ctx = ctx or _Context(cfg)
    with stage("features"):
        keyed = list(ctx.iter_possessions())
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            vecs = list(pool.map(lambda kp: features.compute_features(kp[2]), keyed))
        scaler = features.fit_scaler(vecs)
        raw = np.vstack([v.as_array() for v in vecs])
        z = features.apply_scaler(raw, scaler)
        with open(cfg.out / "features.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([*FEATURE_KEY_COLUMNS, *features.FEATURE_NAMES, *(f"z_{n}" for n in features.FEATURE_NAMES)])
            for (mid, i, p), r, zr in zip(keyed, raw, z):
                w.writerow([mid, i, p.team_id, p.period, _fmt(p.start_t), _fmt(p.end_t),
                            *map(_fmt, r), *map(_fmt, zr)])
        (cfg.out / "scaler.json").write_text(scaler.to_json() + "\n")
        _update_manifest(cfg, "features", ["features.csv", "scaler.json"])
    return scaler


def read_features_csv(path) -> tuple[list[tuple[str, int, str]], np.ndarray, np.ndarray]:
    keys, raw, z = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            keys.append((row["match_id"], int(row["possession_index"]), row["team_id"]))
            raw.append([float(row[n]) for n in features.FEATURE_NAMES])
            z.append([float(row[f"z_{n}"]) for n in features.FEATURE_NAMES])
    n = len(features.FEATURE_NAMES)
    return keys, np.array(raw, dtype=float).reshape(-1, n), np.array(z, dtype=float).reshape(-1, n)


def _svg_polyline(points: list[tuple[int, float]], width=480, height=320, pad=40) -> str:
    ks = [k for k, _ in points]
    vs = [v for _, v in points]
    kmin, kmax = min(ks), max(ks)
    vmin, vmax = min(vs), max(vs)
    sx = (width - 2 * pad) / max(kmax - kmin, 1)
    sy = (height - 2 * pad) / (vmax - vmin if vmax > vmin else 1.0)
    coords = " ".join(f"{pad + (k - kmin) * sx:.2f},{height - pad - (v - vmin) * sy:.2f}" for k, v in points)
    ticks = "".join(
        f'<text x="{pad + (k - kmin) * sx:.2f}" y="{height - pad + 16}" font-size="10" text-anchor="middle">{k}</text>'
        for k in ks
    )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
        f'<rect width="100%" height="100%" fill="white"/>'
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>'
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>'
        f'<polyline points="{coords}" fill="none" stroke="steelblue" stroke-width="2"/>'
        f'{ticks}<text x="{width / 2}" y="{height - 6}" font-size="12" text-anchor="middle">k</text>'
        f'<text x="12" y="{height / 2}" font-size="12" transform="rotate(-90 12 {height / 2})" '
        f'text-anchor="middle">SSE</text></svg>\n'
    )


def run_elbow(cfg: PipelineConfig, ctx: _Context | None = None) -> list[tuple[int, float]]:
    with stage("elbow"):
        _, _, z = read_features_csv(cfg.out / "features.csv")
        curve = clustering.sse_curve(z, cfg.elbow_k_min, cfg.elbow_k_max, seed=cfg.cluster_seed,
                                     restarts=cfg.restarts, n_jobs=cfg.workers)
        with open(cfg.out / "elbow.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "sse"])
            for k, s in curve:
                w.writerow([k, _fmt(s)])
        (cfg.out / "elbow.svg").write_text(_svg_polyline(curve))
        _update_manifest(cfg, "elbow", ["elbow.csv", "elbow.svg"])
    return curve


def run_cluster(cfg: PipelineConfig, ctx: _Context | None = None) -> clustering.KMeansModel:
    with stage("cluster"):
        keys, _, z = read_features_csv(cfg.out / "features.csv")
        model = clustering.kmeans(z, cfg.k, seed=cfg.cluster_seed, restarts=cfg.restarts,
                                  max_iter=cfg.max_iter, tol=cfg.tol, n_jobs=cfg.workers)
        model.names = clustering.name_clusters(model.centroids, cfg.naming)
        labels = clustering.assign_many(z, model)
        sizes = np.bincount(labels, minlength=cfg.k)
        (cfg.out / "cluster_model.json").write_text(model.to_json() + "\n")
        with open(cfg.out / "centroids.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["cluster", "name", "size", *features.FEATURE_NAMES])
            for j, c in enumerate(model.centroids):
                w.writerow([j, model.names[j], int(sizes[j]), *map(_fmt, c)])
        with open(cfg.out / "assignments.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["match_id", "possession_index", "team_id", "cluster"])
            for (mid, i, team), c in zip(keys, labels):
                w.writerow([mid, i, team, int(c)])
        _update_manifest(cfg, "cluster", ["cluster_model.json", "centroids.csv", "assignments.csv"])
    return model


def read_assignments(path) -> dict[tuple[str, int], int]:
    with open(path, newline="", encoding="utf-8") as fh:
        return {(r["match_id"], int(r["possession_index"])): int(r["cluster"]) for r in csv.DictReader(fh)}


def collect_profiles(store, typed: dict[str, list[tuple]], k: int, xg_params) -> list[profiles.CoachProfile]:
    """One profile per (coach, team) pair appearing in the store's match metadata."""
    per_pair: dict[tuple[str, str], list[profiles.MatchPossessions]] = {}
    for meta in store.matches:
        timeline = goal_timeline(store, meta.match_id)
        for team, coach in ((meta.home_team_id, meta.home_coach_id), (meta.away_team_id, meta.away_coach_id)):
            own = [(p, c) for p, c in typed[meta.match_id] if p.team_id == team]
            opp = [(p, c) for p, c in typed[meta.match_id] if p.team_id != team]
            per_pair.setdefault((coach, team), []).append(profiles.MatchPossessions(meta, own, opp, timeline))
    return [profiles.build_profile(c, t, per_pair[(c, t)], k, xg_params) for c, t in sorted(per_pair)]


def run_profiles(cfg: PipelineConfig, ctx: _Context | None = None) -> list[profiles.CoachProfile]:
    ctx = ctx or _Context(cfg)
    with stage("profiles"):
        assigned = read_assignments(cfg.out / "assignments.csv")
        typed = {mid: [(p, assigned[(mid, i)]) for i, p in enumerate(ps)] for mid, ps in ctx.possessions.items()}
        profs = collect_profiles(ctx.store, typed, cfg.k, cfg.xg)
        inputs, scaling = profiles.flatten_and_scale(profs, cfg.k)
        cols = profiles.profile_columns(cfg.k)
        with open(cfg.out / "profiles.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["coach_id", "team_id", "n_matches", *cols])
            for p in profs:
                w.writerow([p.coach_id, p.team_id, p.n_matches, *map(_fmt, p.matrix.ravel())])
        with open(cfg.out / "profile_inputs.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["coach_id", "team_id", *cols])
            for p, v in zip(profs, inputs):
                w.writerow([p.coach_id, p.team_id, *map(_fmt, v)])
        (cfg.out / "profile_scaling.json").write_text(scaling.to_json() + "\n")
        _update_manifest(cfg, "profiles", ["profiles.csv", "profile_inputs.csv", "profile_scaling.json"])
    return profs


def read_profile_inputs(path) -> tuple[list[tuple[str, str]], np.ndarray]:
    keys, rows = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            keys.append((row[0], row[1]))
            rows.append([float(v) for v in row[2:]])
    return keys, np.array(rows, dtype=float)


def run_train(cfg: PipelineConfig, ctx: _Context | None = None) -> tuple[nn.AutoencoderModel, list[float]]:
    with stage("train"):
        _, X = read_profile_inputs(cfg.out / "profile_inputs.csv")
        model, history = nn.train(X, cfg.train)
        (cfg.out / "weights.json").write_text(model.to_json(cfg.train) + "\n")
        with open(cfg.out / "loss.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "loss"])
            for e, loss in enumerate(history, 1):
                w.writerow([e, _fmt(loss)])
        _update_manifest(cfg, "train", ["weights.json", "loss.csv"])
    return model, history


def run_encode(cfg: PipelineConfig, ctx: _Context | None = None) -> similarity.EncodingIndex:
    with stage("encode"):
        model = nn.AutoencoderModel.from_json((cfg.out / "weights.json").read_text())
        keys, X = read_profile_inputs(cfg.out / "profile_inputs.csv")
        E = nn.encode(model, X)
        fp = model.fingerprint()
        with open(cfg.out / "encodings.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["coach_id", "team_id", "model_fingerprint", *(f"e{i}" for i in range(E.shape[1]))])
            for key, e in zip(keys, E):
                w.writerow([key[0], key[1], fp, *map(_fmt, e)])
        _update_manifest(cfg, "encode", ["encodings.csv"])
    return similarity.EncodingIndex.build(zip(keys, E), fp)


def read_encodings(path) -> similarity.EncodingIndex:
    entries, fps = [], set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            fps.add(row[2])
            entries.append(((row[0], row[1]), [float(v) for v in row[3:]]))
    if len(fps) > 1:
        raise FormatVersionError("encodings file mixes several model fingerprints")
    return similarity.EncodingIndex.build(entries, fps.pop() if fps else "")


def run_report(cfg: PipelineConfig, ctx: _Context | None = None) -> similarity.EncodingIndex:
    with stage("report"):
        index = read_encodings(cfg.out / "encodings.csv")
        similarity.write_pairwise_csv(cfg.out / "pairwise.csv", index)
        similarity.write_pairwise_csv(cfg.out / "pairwise_by_coach.csv", index.by_coach())
        _update_manifest(cfg, "report", ["pairwise.csv", "pairwise_by_coach.csv"])
    return index


STAGES = ("ingest", "possessions", "features", "elbow", "cluster", "profiles", "train", "encode", "report")
_RUNNERS = {
    "ingest": run_ingest,
    "possessions": run_possessions,
    "features": run_features,
    "elbow": run_elbow,
    "cluster": run_cluster,
    "profiles": run_profiles,
    "train": run_train,
    "encode": run_encode,
    "report": run_report,
}


def run_pipeline(cfg: PipelineConfig, skip: tuple[str, ...] = (), timings: dict | None = None) -> dict:
    """Run every stage in order and return the manifest.

    Wall-clock seconds per stage go into ``timings`` when a dict is passed; they
    are kept out of the manifest so digests stay reproducible.
    """
    ctx = _Context(cfg)
    manifest_path = cfg.out / "manifest.json"
    if manifest_path.exists():
        manifest_path.unlink()
    for name in STAGES:
        if name in skip:
            continue
        log.info("stage %s", name)
        t0 = time.perf_counter()
        _RUNNERS[name](cfg, ctx)
        if timings is not None:
            timings[name] = time.perf_counter() - t0
    return load_manifest(manifest_path)


def run_stage(name: str, cfg: PipelineConfig):
    if name not in _RUNNERS:
        raise InvalidConfig(f"unknown stage {name!r}")
    return _RUNNERS[name](cfg)
