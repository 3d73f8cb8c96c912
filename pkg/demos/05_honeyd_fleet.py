"""Render device matrices as a HoneyD configuration for a block of addresses.

    python3 demos/05_honeyd_fleet.py [--ckpt CHECKPOINT] [--out fleet.conf]

Without a checkpoint the fleet is drawn from the bundled corpus itself.
"""
import argparse

import numpy as np

from decoyforge.devices import build_vocabulary, bundled_corpus
from decoyforge.encoding import encode_many
from decoyforge.gan import load_checkpoint, sample
from decoyforge.honeyd import PersonalityMap, build_fleet, check_config

parser = argparse.ArgumentParser()
parser.add_argument("--ckpt")
parser.add_argument("--n", type=int, default=12)
parser.add_argument("--pool", default="192.0.2.0/24")
parser.add_argument("--out", default="fleet.conf")
args = parser.parse_args()

corpus = bundled_corpus()
vocab = build_vocabulary(corpus)
if args.ckpt:
    model = load_checkpoint(args.ckpt)
    vocab = type(vocab).load(f"{args.ckpt}/vocab.json")
    matrices = sample(model, args.n, seed=0)
else:
    pick = np.random.default_rng(0).choice(len(corpus), args.n, replace=False)
    matrices = encode_many([corpus[i] for i in pick], vocab)

pmap = PersonalityMap.load()
fleet, text = build_fleet(matrices, vocab, pmap, args.pool)
binds = check_config(text)
print(text.split("\n\n")[0])
print("...")
print(f"{len(fleet.decoys)} decoys, {len(binds)} bound addresses, first {fleet.decoys[0].address}")
with open(args.out, "w", newline="\n") as fh:
    fh.write(text)
print("wrote", args.out)
