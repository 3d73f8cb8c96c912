"""Precision/recall curves for distributions, on histograms and on sample sets.

    python3 demos/02_prd_curves.py [--out prd_demo.png]
"""
import argparse
from dataclasses import replace

import numpy as np

from decoyforge.devices import build_vocabulary, random_corpus_spec, synth_corpus
from decoyforge.encoding import encode_many, random_valid
from decoyforge.evaluation import plot_prd, prd_from_histograms, prd_from_samples

parser = argparse.ArgumentParser()
parser.add_argument("--out", default="prd_demo.png")
args = parser.parse_args()

# two histograms sharing half their mass
p = np.array([0.5, 0.5, 0.0])
q = np.array([0.5, 0.0, 0.5])
c = prd_from_histograms(p, q, num_angles=5)
for theta, a, b in zip(c.theta, c.precision, c.recall):
    print(f"theta {theta:.3f}  precision {a:.3f}  recall {b:.3f}")

# sample sets: a second draw from the same mixture against uniform random matrices
spec = random_corpus_spec(20, seed=3)
real_devices = synth_corpus(spec, 2000)
vocab = build_vocabulary(real_devices)
real = encode_many(real_devices, vocab)
same = encode_many(synth_corpus(replace(spec, seed=4), 2000), vocab)
noise = random_valid(2000, np.random.default_rng(0))

curves = [
    prd_from_samples(real, same, num_clusters=20, curve_id="same mixture"),
    prd_from_samples(real, noise, num_clusters=20, curve_id="uniform random"),
    prd_from_samples(real, np.concatenate([same[:1000], noise[:1000]]), num_clusters=20,
                     curve_id="half and half"),
]
for c in curves:
    print(f"{c.curve_id:15s} area {c.area():.3f}  precision at recall 0.5: {c.max_precision_at(0.5):.3f}")
plot_prd(curves, args.out)
print("wrote", args.out)
