"""
Coach profiles and their encodings
==================================

Run the workflow up to training, then inspect one profile and the loss curve.
"""
import csv
import tempfile
from pathlib import Path

import numpy as np

from coach2vec import pipeline
from coach2vec.model import write_store
from coach2vec.profiles import ROW_NAMES
from coach2vec.synth import GeneratorConfig, generate_corpus

corpus = generate_corpus(GeneratorConfig())
tmp = Path(tempfile.mkdtemp())
write_store(corpus.store, tmp / "events.jsonl", tmp / "matches.jsonl")

###############################################################################
# Skip the elbow scan; it is only there for choosing k.
cfg = pipeline.PipelineConfig(store=str(tmp), out_dir=str(tmp / "out"))
timings = {}
pipeline.run_pipeline(cfg, skip=("elbow",), timings=timings)
print({k: round(v, 1) for k, v in timings.items()})

###############################################################################
# One coach's 7 x 10 profile. Ratio rows sum to one, xG rows are per match.
with open(cfg.out / "profiles.csv") as fh:
    reader = csv.reader(fh)
    next(reader)  # header
    first = next(reader)
print(first[0], first[1], corpus.ground_truth[first[0]])
M = np.array(first[3:], dtype=float).reshape(7, 10)
for name, values in zip(ROW_NAMES, M):
    print(f"{name:18s} " + " ".join(f"{v:5.2f}" for v in values))

###############################################################################
# Training loss every 500 epochs.
with open(cfg.out / "loss.csv") as fh:
    losses = [float(r["loss"]) for r in csv.DictReader(fh)]
for epoch in range(0, len(losses), 500):
    print(f"epoch {epoch + 1:4d}  mse {losses[epoch]:.5f}")
print(f"epoch {len(losses):4d}  mse {losses[-1]:.5f}")
print("artifacts in", cfg.out)
