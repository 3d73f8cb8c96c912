"""Uniqueness and match counts over growing sample sizes, as CSV and chart.

    python3 demos/06_uniqueness.py [--out uniqueness_demo]

A mixture of real copies and random matrices stands in for a generator so the
script runs in seconds.
"""
import argparse

import numpy as np

from decoyforge.devices import build_vocabulary, bundled_corpus
from decoyforge.encoding import encode_many, random_valid
from decoyforge.evaluation import emit_report, prd_from_samples, uniqueness_table

parser = argparse.ArgumentParser()
parser.add_argument("--out", default="uniqueness_demo")
args = parser.parse_args()

corpus = bundled_corpus()
vocab = build_vocabulary(corpus)
real = encode_many(corpus, vocab)
rng = np.random.default_rng(0)
fake = np.concatenate([real[rng.integers(len(real), size=2500)], random_valid(2500, rng)])
fake = fake[rng.permutation(len(fake))]

table = uniqueness_table(real, None, range(500, 5001, 500), vocab, seed=0, generated=fake)
print(f"{'n':>5} {'real':>5} {'gen':>5} {'match':>6} {'match (distinct)':>17}")
for r in table:
    print(f"{r.samples:5d} {r.real_unique:5d} {r.gen_unique:5d} {r.gen_match:6d} {r.gen_match_dedup:17d}")

curve = prd_from_samples(real[:2000], fake[:2000], num_clusters=20, curve_id="half copies")
for path in emit_report([curve], table, args.out):
    print("wrote", path)
