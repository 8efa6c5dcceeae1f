import numpy as np
import pytest

from coach2vec.errors import InvalidConfig
from coach2vec.features import apply_scaler, compute_features, fit_scaler
from coach2vec.model import parse_events, serialize_events, serialize_matches
from coach2vec.possession import filter_valid, segment
from coach2vec.similarity import silhouette
from coach2vec.synth import Archetype, GeneratorConfig, generate, generate_corpus, read_ground_truth, write_ground_truth


def _possessions(store):
    out = []
    for mid in store.match_ids:
        out.extend(filter_valid(segment(store.events(mid))))
    return out


def test_same_seed_same_bytes(small_synth_config):
    a, ga = generate(small_synth_config)
    b, gb = generate(small_synth_config)
    assert list(serialize_events(a)) == list(serialize_events(b))
    assert list(serialize_matches(a)) == list(serialize_matches(b))
    assert ga == gb
    c, _ = generate(GeneratorConfig(coaches_per_archetype=2, matches_per_coach=3, possessions_per_match=12, seed=4))
    assert list(serialize_events(a)) != list(serialize_events(c))


def test_possession_count_by_construction():
    arch = (Archetype("a", {"long_slow": 1.0}), Archetype("b", {"fast_build_left": 1.0}))
    cfg = GeneratorConfig(archetypes=arch, coaches_per_archetype=1, matches_per_coach=1, possessions_per_match=4)
    store, truth = generate(cfg)
    assert len(truth) == 2
    assert len(_possessions(store)) == 8


def test_long_ball_archetype_has_longer_passes():
    arch = (Archetype("direct", {"long_ball": 1.0}), Archetype("short", {"long_slow": 1.0}))
    corpus = generate_corpus(GeneratorConfig(archetypes=arch, coaches_per_archetype=2, matches_per_coach=4,
                                             possessions_per_match=10))
    team_arch = {corpus.teams[c]: a for c, a in corpus.ground_truth.items()}
    lengths = {"direct": [], "short": []}
    for p in _possessions(corpus.store):
        lengths[team_arch[p.team_id]].append(compute_features(p).avg_pass_length)
    assert np.mean(lengths["direct"]) > np.mean(lengths["short"])


def test_round_trip_through_parser(small_synth_config):
    store, _ = generate(small_synth_config)
    again = parse_events(list(serialize_events(store)), list(serialize_matches(store)), strict=True)
    assert again == store and again.skipped == 0
    for mid in store.match_ids:
        ps = segment(store.events(mid))
        # interruptions separate possessions and belong to none of them
        on_ball = [e for e in store.events(mid) if e.event_type != "interruption"]
        assert [e for p in ps for e in p.events] == on_ball


def test_ground_truth_csv(tmp_path, small_synth_config):
    _, truth = generate(small_synth_config)
    write_ground_truth(tmp_path / "gt.csv", truth)
    assert read_ground_truth(tmp_path / "gt.csv") == truth
    assert (tmp_path / "gt.csv").read_text().splitlines()[0] == "coach_id,archetype"


def test_feature_separation():
    corpus = generate_corpus(GeneratorConfig(coaches_per_archetype=4, matches_per_coach=4, possessions_per_match=20))
    feats, tpl_labels, teams = [], [], []
    for mid in corpus.store.match_ids:
        ps = segment(corpus.store.events(mid))
        # one generated possession per segmented possession, in order
        assert len(ps) == len(corpus.templates[mid])
        for p, name in zip(ps, corpus.templates[mid]):
            feats.append(compute_features(p))
            tpl_labels.append(name)
            teams.append(p.team_id)
    Z = apply_scaler(feats, fit_scaler(feats))
    assert silhouette(Z, tpl_labels) > 0
    team_arch = {corpus.teams[c]: a for c, a in corpus.ground_truth.items()}
    teams = np.array(teams)
    order = sorted(team_arch)
    means = np.vstack([Z[teams == t].mean(axis=0) for t in order])
    assert silhouette(means, [team_arch[t] for t in order]) > 0


@pytest.mark.parametrize("kw", [
    {"coaches_per_archetype": 0},
    {"matches_per_coach": 0},
    {"possessions_per_match": 0},
    {"archetypes": ()},
    {"archetypes": (Archetype("x", {"long_slow": 0.5}),)},
    {"archetypes": (Archetype("x", {"nope": 1.0}),)},
    {"archetypes": (Archetype("x", {"long_slow": 1.0}),), "coaches_per_archetype": 1},
])
def test_invalid_config(kw):
    with pytest.raises(InvalidConfig):
        generate(GeneratorConfig(**kw))
