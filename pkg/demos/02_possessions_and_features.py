"""
Possessions and their features
==============================

Cut matches into possessions and turn each one into seven numbers.
"""
import numpy as np

from coach2vec.features import FEATURE_NAMES, apply_scaler, compute_features, fit_scaler
from coach2vec.possession import filter_valid, segment
from coach2vec.synth import GeneratorConfig, generate_corpus

corpus = generate_corpus(GeneratorConfig(coaches_per_archetype=2, matches_per_coach=4, possessions_per_match=20))
store = corpus.store

###############################################################################
# Segment one match. Each possession is a run of events by one team.
mid = store.match_ids[0]
possessions = filter_valid(segment(store.events(mid)))
for p, template in list(zip(possessions, corpus.templates[mid]))[:5]:
    print(f"{p.team_id} {p.start_t:6.1f}-{p.end_t:6.1f}s  {len(p.events):2d} events  ({template})")

###############################################################################
# Features for the first few possessions, in meters and m/s.
for p in possessions[:3]:
    f = compute_features(p)
    print({name: round(float(v), 2) for name, v in zip(FEATURE_NAMES, f.as_array())})

###############################################################################
# Over the whole corpus, z-scoring puts every feature on the same footing.
vectors = [compute_features(p) for m in store.match_ids for p in filter_valid(segment(store.events(m)))]
scaler = fit_scaler(vectors)
Z = apply_scaler(vectors, scaler)
print("means", np.round(Z.mean(axis=0), 12))
print("stds ", np.round(Z.std(axis=0), 12))

###############################################################################
# Long balls and slow build-ups look very different on average.
by_template = {}
for m in store.match_ids:
    for p, t in zip(segment(store.events(m)), corpus.templates[m]):
        by_template.setdefault(t, []).append(compute_features(p).avg_pass_length)
for t in ("long_ball", "long_slow", "fast_build_left"):
    print(f"{t:16s} mean pass {np.mean(by_template[t]):5.1f} m")
