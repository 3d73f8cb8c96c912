"""Train a small unconditional WGAN-GP on a prototype mixture and check what it draws.

    python3 demos/03_train_and_sample.py --steps 400

Single-CPU runs use the narrow desk preset; 2000 steps take roughly half an hour.
"""
import argparse
import time
from collections import Counter

import numpy as np

from decoyforge.devices import build_vocabulary, random_corpus_spec, synth_corpus
from decoyforge.encoding import decode, encode, encode_many
from decoyforge.evaluation import signature
from decoyforge.gan import DESK_HYPERPARAMS, UNCONDITIONAL, sample, save_checkpoint, train

parser = argparse.ArgumentParser()
parser.add_argument("--steps", type=int, default=400)
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--save", help="checkpoint directory")
args = parser.parse_args()

spec = random_corpus_spec(20, seed=0)
corpus = synth_corpus(spec, 5000)
vocab = build_vocabulary(corpus)
truth = {signature(encode(p, vocab), vocab) for p in spec.prototypes}
hp = DESK_HYPERPARAMS.replace(total_steps=args.steps, seed=args.seed)


def progress(step, report):
    if step % 100 == 0:
        print(f"step {step}: critic {np.median(report.d_loss[-100:]):.3f}  "
              f"{np.mean(report.seconds[-100:]):.2f}s/step")


start = time.time()
model, report = train(encode_many(corpus, vocab), None, UNCONDITIONAL, hp, progress)
print(f"trained {model.step_count} steps in {time.time() - start:.0f}s")

samples = sample(model, 1000, seed=1)
sigs = [signature(m, vocab) for m in samples]
print("samples matching a prototype:", sum(s in truth for s in sigs) / len(sigs))
print("distinct samples:", len(set(sigs)))
for sig, n in Counter(sigs).most_common(3):
    print(n, "x", decode(samples[sigs.index(sig)], vocab))
if args.save:
    save_checkpoint(model, args.save)
    print("saved", args.save)
