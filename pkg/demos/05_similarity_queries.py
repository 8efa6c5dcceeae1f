"""
Which coaches play alike?
=========================

Nearest neighbours and a distance matrix over five-number coach encodings.
"""
import tempfile
from pathlib import Path

import numpy as np

from coach2vec import pipeline
from coach2vec.model import write_store
from coach2vec.similarity import nearest, pairwise_matrix, silhouette
from coach2vec.synth import GeneratorConfig, generate_corpus

corpus = generate_corpus(GeneratorConfig())
tmp = Path(tempfile.mkdtemp())
write_store(corpus.store, tmp / "events.jsonl", tmp / "matches.jsonl")
cfg = pipeline.PipelineConfig(store=str(tmp), out_dir=str(tmp / "out"))
pipeline.run_pipeline(cfg, skip=("elbow",))
index = pipeline.read_encodings(cfg.out / "encodings.csv")
style = corpus.ground_truth

###############################################################################
# The three closest coaches to C000.
query = ("C000", corpus.teams["C000"])
print(query, style["C000"])
for (coach, team), d in nearest(index, query, 3):
    print(f"  {coach} {team}  {d:.4f}  {style[coach]}")

###############################################################################
# How often does a coach's nearest neighbour share its style?
hits = sum(style[nearest(index, k, 1)[0][0][0]] == style[k[0]] for k in index.keys)
print(f"nearest neighbour shares the style for {hits}/{len(index)} coaches")
print(f"silhouette by style: {silhouette(index.encodings, [style[c] for c, _ in index.keys]):.3f}")

###############################################################################
# Mean distance within and between styles.
D = pairwise_matrix(index)
labels = np.array([style[c] for c, _ in index.keys])
names = sorted(set(labels))
print(" " * 16 + "".join(f"{n:>16s}" for n in names))
for a in names:
    cells = []
    for b in names:
        block = D[np.ix_(labels == a, labels == b)]
        if a == b:
            block = block[~np.eye(len(block), dtype=bool)]
        cells.append(f"{block.mean():16.3f}")
    print(f"{a:16s}" + "".join(cells))
