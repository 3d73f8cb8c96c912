"""Sample-quality measures: precision/recall curves for distributions and uniqueness tables.

A generated distribution Q has precision ``alpha`` and recall ``beta`` against a
reference P when both share a component mu with P = beta*mu + (1-beta)*nu_P and
Q = alpha*mu + (1-alpha)*nu_Q. On discrete histograms the frontier of attainable
pairs is traced by sweeping a slope lambda = tan(theta):

    alpha(lambda) = sum_i min(lambda * p_i, q_i),    beta(lambda) = alpha(lambda) / lambda

Sample sets are turned into histograms by k-means clustering of the pooled,
flattened matrices.
"""
from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.cluster import KMeans

from .devices import ABSENT, Vocabulary
from .encoding import HALF, PORT_COL0, check_matrix
from .errors import DegenerateClustering, IoFailure, NotNormalized


@dataclass
class PrdCurve:
    theta: np.ndarray
    lam: np.ndarray
    precision: np.ndarray  # alpha
    recall: np.ndarray  # beta
    curve_id: str = "curve"
    metadata: dict = field(default_factory=dict)

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.precision.tolist(), self.recall.tolist()))

    def __len__(self):
        return len(self.theta)

    def area(self) -> float:
        """Area under precision as a function of recall."""
        order = np.argsort(self.recall, kind="stable")
        return float(np.trapezoid(self.precision[order], self.recall[order]))

    def max_precision_at(self, recall: float) -> float:
        """Best precision among points whose recall is at least ``recall`` (0 if none)."""
        ok = self.recall >= recall
        return float(self.precision[ok].max()) if ok.any() else 0.0


def _check_histogram(h, name):
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 1 or np.any(h < 0) or abs(h.sum() - 1.0) > 1e-9:
        raise NotNormalized(f"{name} is not a probability vector (sum={h.sum()!r})")
    return h


def prd_from_histograms(p, q, num_angles: int = 1001, epsilon: float = 1e-10,
                        curve_id: str = "curve") -> PrdCurve:
    """PRD frontier for reference histogram ``p`` and generated histogram ``q``.

    Angles run uniformly over [epsilon, pi/2 - epsilon]; an odd ``num_angles``
    puts the middle point on lambda = 1.
    """
    p = _check_histogram(p, "reference histogram")
    q = _check_histogram(q, "generated histogram")
    if p.shape != q.shape:
        raise ValueError("histograms differ in length")
    if num_angles < 2:
        raise ValueError("num_angles must be >= 2")
    theta = np.linspace(epsilon, np.pi / 2 - epsilon, num_angles)
    lam = np.tan(theta)
    alpha = np.minimum(lam[:, None] * p[None, :], q[None, :]).sum(axis=1)
    beta = alpha / lam
    return PrdCurve(theta, lam, np.clip(alpha, 0, 1), np.clip(beta, 0, 1), curve_id,
                    {"num_angles": num_angles, "num_bins": len(p)})


def cluster_histograms(real, gen, num_clusters: int = 20, seed: int = 0):
    """k-means the pooled flattened samples; return (real_hist, gen_hist).

    Identical rows are merged and clustered with their multiplicities as
    weights, so the result does not depend on sample order.
    """
    real = np.asarray(real).reshape(len(real), -1).astype(np.float64)
    gen = np.asarray(gen).reshape(len(gen), -1).astype(np.float64)
    if len(real) == 0 or len(gen) == 0:
        raise ValueError("both sample sets must be non-empty")
    pooled = np.concatenate([real, gen])
    if num_clusters < 1 or num_clusters > len(pooled):
        raise DegenerateClustering(f"{num_clusters} clusters for {len(pooled)} samples")
    if num_clusters == 1:
        warnings.warn("a single cluster makes every PRD curve pass through (1, 1)", stacklevel=2)
    uniq, inverse, counts = np.unique(pooled, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    if len(uniq) <= num_clusters:
        unit_labels = np.arange(len(uniq))
        k = len(uniq)
    else:
        km = KMeans(n_clusters=num_clusters, n_init=10, random_state=seed)
        unit_labels = km.fit_predict(uniq, sample_weight=counts)
        k = num_clusters
    labels = unit_labels[inverse]
    real_hist = np.bincount(labels[:len(real)], minlength=k) / len(real)
    gen_hist = np.bincount(labels[len(real):], minlength=k) / len(gen)
    return real_hist, gen_hist


def prd_from_samples(real, gen, num_clusters: int = 20, num_angles: int = 1001, seed: int = 0,
                     curve_id: str = "curve") -> PrdCurve:
    real_hist, gen_hist = cluster_histograms(real, gen, num_clusters, seed)
    curve = prd_from_histograms(real_hist, gen_hist, num_angles, curve_id=curve_id)
    curve.metadata.update(num_clusters=num_clusters, num_real=len(real), num_gen=len(gen), seed=seed)
    return curve


# ---------------------------------------------------------------- uniqueness

def signature(matrix, vocab: Vocabulary) -> str:
    """Canonical text of (OS, sorted port -> service); build and CPE are ignored."""
    m = check_matrix(matrix)
    upper = m[:HALF].argmax(axis=0)
    os_token = vocab.symbol("os_index", int(upper[0]))
    services = [
        [port, vocab.symbol("service_index", int(upper[PORT_COL0 + j]))]
        for j, port in enumerate(vocab.ports)
        if port > 0 and upper[PORT_COL0 + j] != ABSENT
    ]
    services.sort()
    return json.dumps([os_token, services], separators=(",", ":"))


@dataclass(frozen=True)
class UniquenessRow:
    samples: int
    real_unique: int
    gen_unique: int
    gen_match: int
    gen_match_dedup: int


def tabulate_uniqueness(real_signatures: Sequence[str], real_draws: Sequence[str],
                        gen_draws: Sequence[str], sample_sizes: Sequence[int]) -> list[UniquenessRow]:
    """Count unique and matching signatures over prefixes of the two draw sequences.

    ``real_draws``/``gen_draws`` must hold at least ``max(sample_sizes)``
    entries; row n looks at the first n of each. Matches are checked against
    the whole of ``real_signatures``.
    """
    known = set(real_signatures)
    rows = []
    for n in sample_sizes:
        if n < 1 or n > len(real_draws) or n > len(gen_draws):
            raise ValueError(f"sample size {n} outside the available draws")
        gen = gen_draws[:n]
        hits = [s for s in gen if s in known]
        rows.append(UniquenessRow(n, len(set(real_draws[:n])), len(set(gen)), len(hits), len(set(hits))))
    return rows


def uniqueness_table(real_corpus, model, sample_sizes: Sequence[int], vocab: Vocabulary,
                     seed: int = 0, condition=None, generated=None) -> list[UniquenessRow]:
    """Uniqueness/match counts for real draws (with replacement) and generated samples.

    Larger sizes extend the draws of smaller ones, so counts across the grid
    come from nested samples. ``generated`` substitutes pre-drawn matrices for
    sampling ``model``.
    """
    from . import gan

    sizes = list(sample_sizes)
    if not sizes:
        raise ValueError("sample_sizes is empty")
    if len(real_corpus) == 0:
        raise ValueError("real corpus is empty")
    n_max = max(sizes)
    real_sigs = [signature(m, vocab) for m in real_corpus]
    rng = np.random.default_rng(seed)
    real_draws = [real_sigs[i] for i in rng.integers(len(real_sigs), size=n_max)]
    if generated is None:
        generated = gan.sample(model, n_max, condition, seed=seed)
    gen_draws = [signature(m, vocab) for m in generated[:n_max]]
    return tabulate_uniqueness(real_sigs, real_draws, gen_draws, sizes)


# ---------------------------------------------------------------- reports

PRD_COLUMNS = ("curve_id", "theta", "lambda", "alpha", "beta")
UNIQUENESS_COLUMNS = ("samples", "real_unique", "gen_unique", "gen_match", "gen_match_dedup")


def write_prd_csv(curves: Sequence[PrdCurve], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PRD_COLUMNS)
        for c in curves:
            for row in zip(c.theta, c.lam, c.precision, c.recall):
                w.writerow([c.curve_id, *(repr(float(v)) for v in row)])


def write_uniqueness_csv(table: Sequence[UniquenessRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(UNIQUENESS_COLUMNS)
        for r in table:
            w.writerow([r.samples, r.real_unique, r.gen_unique, r.gen_match, r.gen_match_dedup])


def read_uniqueness_csv(path) -> list[UniquenessRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [UniquenessRow(**{k: int(v) for k, v in row.items()}) for row in csv.DictReader(fh)]


def plot_prd(curves: Sequence[PrdCurve], path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    for c in curves:
        ax.plot(c.recall, c.precision, label=c.curve_id)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.set_xlabel("recall (beta)")
    ax.set_ylabel("precision (alpha)")
    ax.legend(loc="lower left")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def plot_uniqueness(table: Sequence[UniquenessRow], path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    n = np.array([r.samples for r in table], dtype=float)
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.8))
    axes[0].plot(n, [r.real_unique for r in table] / n, marker="o", label="real, unique")
    axes[0].plot(n, [r.gen_unique for r in table] / n, marker="o", label="generated, unique")
    axes[0].set_title("fraction unique")
    axes[1].plot(n, [r.gen_match for r in table] / n, marker="o", label="generated, matching real")
    axes[1].set_title("fraction matching a real configuration")
    for ax in axes:
        ax.set_xlabel("samples")
        ax.set_ylim(0, 1.02)
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def emit_report(curves: Sequence[PrdCurve], table: Sequence[UniquenessRow], out_dir) -> list[Path]:
    """Write prd.csv, uniqueness.csv, prd.png and uniqueness.png into ``out_dir``."""
    if not curves:
        raise ValueError("no PRD curves to report")
    if not table:
        raise ValueError("empty uniqueness table")
    out = Path(out_dir)
    paths = [out / "prd.csv", out / "uniqueness.csv", out / "prd.png", out / "uniqueness.png"]
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_prd_csv(curves, paths[0])
        write_uniqueness_csv(table, paths[1])
        plot_prd(curves, paths[2])
        plot_uniqueness(table, paths[3])
    except OSError as exc:
        raise IoFailure(f"cannot write report to {out}: {exc}") from None
    return paths
