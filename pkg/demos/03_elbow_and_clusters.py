"""
Choosing k and naming possession types
======================================

Run k-means over a range of k, then look at the ten clusters it finds.
"""
import numpy as np

from coach2vec.clustering import assign_many, kmeans, name_clusters, sse_curve
from coach2vec.features import FEATURE_NAMES, apply_scaler, compute_features, fit_scaler
from coach2vec.possession import filter_valid, segment
from coach2vec.synth import GeneratorConfig, generate_corpus

corpus = generate_corpus(GeneratorConfig(coaches_per_archetype=4, matches_per_coach=10))
store = corpus.store
vectors, templates = [], []
for m in store.match_ids:
    for p, t in zip(filter_valid(segment(store.events(m))), corpus.templates[m]):
        vectors.append(compute_features(p))
        templates.append(t)
Z = apply_scaler(vectors, fit_scaler(vectors))
print(f"{len(Z)} possessions")

###############################################################################
# The SSE curve flattens out; the bend sits around k=10.
for k, sse in sse_curve(Z, 2, 15, restarts=5):
    print(f"k={k:2d}  SSE={sse:9.1f}  " + "#" * int(sse / 1000))

###############################################################################
# Fit k=10 and name each centroid from its standardized values.
model = kmeans(Z, 10, seed=0)
names = name_clusters(model.centroids)
labels = assign_many(Z, model)
print("  ".join(f"{n[:6]:>6s}" for n in FEATURE_NAMES))
for j in np.argsort([-np.sum(labels == j) for j in range(10)]):
    row = "  ".join(f"{v:6.2f}" for v in model.centroids[j])
    print(f"{row}  n={np.sum(labels == j):5d}  {names[j]}")

###############################################################################
# Each generator template lands mostly in a single cluster.
templates = np.array(templates)
for t in sorted(set(templates)):
    counts = np.bincount(labels[templates == t], minlength=10)
    j = int(counts.argmax())
    print(f"{t:22s} -> {names[j]:40s} {counts[j] / counts.sum():.0%}")
