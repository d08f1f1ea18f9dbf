#!/usr/bin/env python3
"""Writes the bundled synthetic corpus: short bios drawn from planted topics
with matching 16-d embeddings, plus a pipeline config that runs all three
models on it.

usage: make_synthetic.py [out_dir]
"""
import json
import os
import sys

import numpy as np

SEED = 20240611
N_DOCS = 1000
DIM = 16

TOPICS = [
    ("coffee espresso latte barista roaster beans brew cafe mocha cappuccino", "☕"),
    ("football soccer goal striker league fan stadium club match keeper", "⚽"),
    ("music guitar band songwriter drummer vinyl concert singer bass album", "\U0001f3b8"),
    ("nurse hospital patient care medicine clinic health doctor surgery ward", "\U0001fa7a"),
    ("teacher school student classroom learning math science education lesson tutor", "\U0001f4da"),
    ("developer code software python javascript engineer startup cloud data api", "\U0001f4bb"),
    ("hiking mountain trail camping outdoors climbing summit forest backpack nature", "\U0001f3d4"),
    ("mom kids family parenting daughter son wife husband home baby", "\U0001f476"),
    ("crypto bitcoin blockchain token trader nft defi ethereum wallet investor", "\U0001f680"),
    ("artist painter illustration sketch canvas design gallery watercolor studio drawing", "\U0001f3a8"),
]

BACKGROUND = (
    "love life lover living proud just views own opinions world happy enthusiast "
    "fan based writer sometimes always new city dreamer believer friend weekend "
    "thinker maker human simple sharing good vibes best official account retweets "
    "endorsements coast north south east west local global passionate creative"
).split()

CONNECTORS = ["|", "&", "and", "of", "the", "a", "in", "on", "•", "/"]


def make_doc(rng, topic):
    words, emoji = TOPICS[topic]
    topic_words = words.split()
    n = int(rng.integers(5, 11))
    out = []
    for _ in range(n):
        r = rng.random()
        if r < 0.4:
            out.append(topic_words[int(rng.integers(len(topic_words)))])
        elif r < 0.45:
            other = TOPICS[int(rng.integers(len(TOPICS)))][0].split()
            out.append(other[int(rng.integers(len(other)))])
        else:
            out.append(BACKGROUND[int(rng.integers(len(BACKGROUND)))])
        if rng.random() < 0.3:
            out.append(CONNECTORS[int(rng.integers(len(CONNECTORS)))])
    if rng.random() < 0.3:
        out.append(emoji)
    text = " ".join(out)
    return text[0].upper() + text[1:]


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "..", "data", "synthetic")
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(SEED)
    centers = rng.normal(0.0, 3.0, size=(len(TOPICS), DIM))
    topics = np.arange(N_DOCS) % len(TOPICS)
    rng.shuffle(topics)

    with open(os.path.join(out_dir, "corpus.ndjson"), "w", encoding="utf-8") as f:
        for i, t in enumerate(topics):
            f.write(json.dumps({"id": f"u{i:04d}", "text": make_doc(rng, int(t))}, ensure_ascii=False) + "\n")
    with open(os.path.join(out_dir, "embeddings.ndjson"), "w", encoding="utf-8") as f:
        for i, t in enumerate(topics):
            v = centers[t] + rng.normal(0.0, 1.0, size=DIM)
            f.write(json.dumps({"id": f"u{i:04d}", "vector": [round(float(x), 6) for x in v]}) + "\n")
    with open(os.path.join(out_dir, "topics.csv"), "w", encoding="utf-8") as f:
        f.write("id,topic\n")
        for i, t in enumerate(topics):
            f.write(f"u{i:04d},{int(t)}\n")

    config = {
        "corpus": "corpus.ndjson",
        "embeddings": "embeddings.ndjson",
        "models": ["gmm", "lda", "random"],
        "k": 10,
        "seed": 7,
        "lda": {"sweeps": 300, "burn_in": 200, "sample_lag": 10},
        "packet": {"top_words": 10, "bios_per_cluster": 20},
        "out_dir": "run",
    }
    with open(os.path.join(out_dir, "pipeline.json"), "w", encoding="utf-8") as f:
        json.dump(config, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
