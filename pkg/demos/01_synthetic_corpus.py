"""
A synthetic event corpus
========================

Generate a small league of coaches in three playing styles and look at what
ends up on disk.
"""
import tempfile
from collections import Counter
from pathlib import Path

from coach2vec.model import read_store, write_store
from coach2vec.synth import GeneratorConfig, generate_corpus

###############################################################################
# Two coaches per style, four matches each, twenty possessions per match.
config = GeneratorConfig(coaches_per_archetype=2, matches_per_coach=4, possessions_per_match=20, seed=7)
corpus = generate_corpus(config)
store = corpus.store
print(f"{len(store.matches)} matches, {len(store)} events")

for coach, style in sorted(corpus.ground_truth.items()):
    print(f"  {coach} ({corpus.teams[coach]}): {style}")

###############################################################################
# Event types in the first match. Interruptions separate possessions.
first = store.match_ids[0]
print(Counter(e.event_type for e in store.events(first)))

###############################################################################
# The store round-trips through newline-delimited JSON.
with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    write_store(store, tmp / "events.jsonl", tmp / "matches.jsonl")
    print((tmp / "events.jsonl").read_text().splitlines()[0])
    assert read_store(tmp / "events.jsonl", tmp / "matches.jsonl", strict=True) == store
