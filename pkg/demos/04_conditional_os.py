"""Ask an OS-conditional model for devices of a chosen family.

    python3 demos/04_conditional_os.py --steps 600
"""
import argparse
from collections import Counter

import numpy as np

from decoyforge.devices import OsLabel, assign_os_label, build_vocabulary, separable_corpus_spec, synth_corpus
from decoyforge.encoding import decode, encode_many
from decoyforge.gan import DESK_HYPERPARAMS, ConditionSpec, sample, train

parser = argparse.ArgumentParser()
parser.add_argument("--steps", type=int, default=600)
args = parser.parse_args()

labels = [l for l in OsLabel if l is not OsLabel.OTHER]
# every label owns its own ports, so the label is visible in the services too
corpus = synth_corpus(separable_corpus_spec(labels, per_label=2, seed=0), 5000)
vocab = build_vocabulary(corpus)
y = np.array([assign_os_label(c).index for c in corpus])
print("training labels:", Counter(OsLabel.from_index(i).value for i in y).most_common())

condition = ConditionSpec.for_mode("os")
model, _ = train(encode_many(corpus, vocab), y, condition,
                 DESK_HYPERPARAMS.replace(total_steps=args.steps),
                 progress=lambda s, r: s % 100 or print("step", s, "critic", round(r.d_loss[-1], 3)))

for wanted in (OsLabel.UBUNTU, OsLabel.MIKROTIK_ROUTEROS, OsLabel.WINDOWS_SERVER):
    got = [assign_os_label(decode(m, vocab)) for m in sample(model, 300, wanted, seed=2)]
    print(f"{wanted.value:25s} {np.mean([g is wanted for g in got]):.0%} on target,"
          f" others: {Counter(g.value for g in got if g is not wanted).most_common(2)}")

try:
    sample(model, 1)
except Exception as exc:
    print("without a label:", type(exc).__name__)
