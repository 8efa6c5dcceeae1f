"""Euclidean similarity queries over coach encodings."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInput, UnknownKey

Key = tuple[str, str]  # (coach_id, team_id)


def distance(a, b) -> float:
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return float(np.sqrt(np.dot(d, d)))


@dataclass(frozen=True)
class EncodingIndex:
    """Immutable map from (coach, team) keys to encodings, sorted by key."""

    keys: tuple[Key, ...]
    encodings: np.ndarray
    fingerprint: str = ""

    @classmethod
    def build(cls, entries: Iterable[tuple[Key, Sequence[float]]], fingerprint: str = "") -> "EncodingIndex":
        items = sorted(((tuple(k), np.asarray(v, dtype=float)) for k, v in entries), key=lambda kv: kv[0])
        keys = tuple(k for k, _ in items)
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate (coach, team) key in encoding index")
        enc = np.vstack([v for _, v in items]) if items else np.empty((0, 0))
        enc.setflags(write=False)
        return cls(keys, enc, fingerprint)

    def __len__(self) -> int:
        return len(self.keys)

    def position(self, key: Key) -> int:
        try:
            return self.keys.index(tuple(key))
        except ValueError:
            raise UnknownKey(f"no encoding for {tuple(key)!r}") from None

    def encoding(self, key: Key) -> np.ndarray:
        return self.encodings[self.position(key)]

    def by_coach(self) -> "EncodingIndex":
        """Collapse a coach's teams into one entry (mean encoding); the team field becomes ``"*"``."""
        groups: dict[str, list[np.ndarray]] = {}
        for (coach, _), v in zip(self.keys, self.encodings):
            groups.setdefault(coach, []).append(v)
        return EncodingIndex.build((((c, "*"), np.mean(vs, axis=0)) for c, vs in groups.items()), self.fingerprint)


def nearest(index: EncodingIndex, query: Key, top_n: int = 5) -> list[tuple[Key, float]]:
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    q = index.encoding(query)
    ranked = sorted(
        ((k, distance(q, v)) for k, v in zip(index.keys, index.encodings) if k != tuple(query)),
        key=lambda kd: (kd[1], kd[0]),
    )
    return ranked[:top_n]


def pairwise_matrix(index: EncodingIndex) -> np.ndarray:
    if len(index) == 0:
        raise EmptyInput("empty encoding index")
    n = len(index)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = distance(index.encodings[i], index.encodings[j])
    return out


def silhouette(points, labels) -> float:
    """Mean silhouette coefficient under Euclidean distance (singleton clusters score 0)."""
    X = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    uniq = np.unique(labels)
    if len(uniq) < 2:
        raise ValueError("silhouette needs at least two labels")
    D = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(-1))
    scores = np.zeros(len(X))
    for i in range(len(X)):
        same = labels == labels[i]
        if same.sum() == 1:
            continue
        a = D[i, same].sum() / (same.sum() - 1)
        b = min(D[i, labels == c].mean() for c in uniq if c != labels[i])
        scores[i] = (b - a) / max(a, b) if max(a, b) > 0 else 0.0
    return float(scores.mean())


def key_label(key: Key) -> str:
    return f"{key[0]}@{key[1]}"


def write_pairwise_csv(path, index: EncodingIndex) -> None:
    M = pairwise_matrix(index)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["key", *map(key_label, index.keys)])
        for k, row in zip(index.keys, M):
            w.writerow([key_label(k), *map(repr, row.tolist())])


def write_nearest_csv(path, query: Key, ranked: Sequence[tuple[Key, float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["query_coach_id", "query_team_id", "rank", "coach_id", "team_id", "distance"])
        for rank, (k, d) in enumerate(ranked, 1):
            w.writerow([query[0], query[1], rank, k[0], k[1], repr(d)])
