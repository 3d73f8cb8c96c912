"""Acceptance suite. Each test prints one ``criterion N ... PASS|FAIL`` line.

Run with ``pytest tests/test_acceptance.py -v``. Criteria 6 and 7 train two
desk-scale models and dominate the runtime.
"""
import csv
import filecmp
import time

import numpy as np
import pytest
import torch

from decoyforge.cli import dispatch
from decoyforge.devices import (DeviceConfig, OsLabel, ServiceEntry, assign_os_label, build_vocabulary,
                                coverage_fraction, random_corpus_spec, synth_corpus)
from decoyforge.encoding import decode, discretize, encode, encode_many, is_valid, random_valid
from decoyforge.evaluation import (UNIQUENESS_COLUMNS, prd_from_histograms, prd_from_samples,
                                   signature, uniqueness_table, write_uniqueness_csv)
from decoyforge.gan import (UNCONDITIONAL, Hyperparams, build_discriminator, critic_loss,
                            gradient_penalty, load_checkpoint, sample)
from decoyforge.honeyd import PersonalityMap, build_fleet, check_config, fleet_from_configs

TABLE1_GRID = list(range(500, 5001, 500))


@pytest.fixture
def verdict(capsys):
    def say(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\ncriterion {number:>2} {title}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
        assert ok, f"criterion {number} failed: {detail}"
    return say


# 1 ---------------------------------------------------------------------------

def test_encoding_round_trip(verdict):
    spec = random_corpus_spec(20, seed=101, noise_rate=0.1)
    configs = synth_corpus(spec, 10_000)
    vocab = build_vocabulary(configs)
    assert coverage_fraction(configs, vocab) == 1.0  # every config is in-vocabulary
    start = time.perf_counter()
    mats = encode_many(configs, vocab)
    back = [decode(m, vocab) for m in mats]
    seconds = time.perf_counter() - start
    same = sum(b == c for b, c in zip(back, configs))
    halves = (mats[:, :32].sum(1) == 1).all() and (mats[:, 32:].sum(1) == 1).all()
    ok = same == len(configs) and halves and seconds < 10
    verdict(1, "encoding round trip", ok, f"{same}/{len(configs)} exact, {seconds:.2f}s")


# 2 ---------------------------------------------------------------------------

def test_discretization_validity(verdict):
    rng = np.random.default_rng(2)
    x = rng.normal(scale=rng.uniform(0.01, 100, size=(10_000, 1, 1)), size=(10_000, 64, 32))
    d = discretize(x)
    valid = sum(is_valid(m) for m in d)
    idem = bool(np.array_equal(discretize(d), d))
    verdict(2, "discretization validity", valid == 10_000 and idem, f"{valid}/10000 valid, idempotent={idem}")


# 3 ---------------------------------------------------------------------------

def test_gradient_penalty_analytic(verdict):
    rng = np.random.default_rng(3)
    worst = 0.0
    for i in range(100):
        w = rng.normal(size=2048) * rng.uniform(0.001, 0.1)
        if i == 0:
            w /= np.linalg.norm(w)
        wt = torch.as_tensor(w)
        real = torch.as_tensor(rng.choice([-1.0, 1.0], size=(8, 64, 32)))
        fake = torch.as_tensor(rng.uniform(-1, 1, size=(8, 64, 32)))
        gp = gradient_penalty(lambda x, c=None: (x.flatten(1) * wt).sum(1), real, fake).item()
        expected = 0.0 if i == 0 else (np.linalg.norm(w) - 1) ** 2
        worst = max(worst, abs(gp - expected))
    verdict(3, "gradient penalty analytic", worst <= 1e-5, f"max abs error {worst:.2e}")


# 4 ---------------------------------------------------------------------------

def test_finite_differences(verdict):
    rng = np.random.default_rng(4)
    torch.manual_seed(4)
    hp = Hyperparams(d_channels=(2, 2, 2, 2, 2))
    d = build_discriminator(UNCONDITIONAL, hp).double()
    n_params = sum(p.numel() for p in d.parameters())
    real = torch.as_tensor(rng.choice([-1.0, 1.0], size=(4, 64, 32)))
    fake = torch.as_tensor(rng.uniform(-1, 1, size=(4, 64, 32)))
    eps = torch.as_tensor(rng.random(4))
    params = list(d.parameters())

    def loss():
        return critic_loss(d, real, fake, None, 10.0, eps=eps)[0]

    grads = torch.autograd.grad(loss(), params)
    h = 1e-6
    worst = 0.0
    for _ in range(50):
        k = int(rng.integers(len(params)))
        i = int(rng.integers(params[k].numel()))
        flat = params[k].data.view(-1)
        orig = flat[i].item()
        flat[i] = orig + h
        up = loss().item()
        flat[i] = orig - h
        down = loss().item()
        flat[i] = orig
        numeric = (up - down) / (2 * h)
        analytic = grads[k].reshape(-1)[i].item()
        worst = max(worst, abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-7))
    ok = n_params <= 1000 and worst <= 1e-3
    verdict(4, "finite differences", ok, f"{n_params} parameters, max relative error {worst:.2e}")


# 5 ---------------------------------------------------------------------------

def test_prd_oracle(verdict):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(1000):
        k = int(rng.integers(1, 17))
        p = rng.random(k) * (rng.random(k) < 0.85)
        q = rng.random(k) * (rng.random(k) < 0.85)
        p[0] += p.sum() == 0
        q[-1] += q.sum() == 0
        p, q = p / p.sum(), q / q.sum()
        c = prd_from_histograms(p, q, num_angles=101)
        for lam, a, b in zip(c.lam, c.precision, c.recall):
            alpha = sum(min(lam * pi, qi) for pi, qi in zip(p, q))
            worst = max(worst, abs(a - min(alpha, 1.0)), abs(b - min(alpha / lam, 1.0)))
    same = prd_from_histograms([0.2, 0.3, 0.5], [0.2, 0.3, 0.5])
    mid = len(same) // 2
    corner = abs(same.precision[mid] - 1) <= 1e-9 and abs(same.recall[mid] - 1) <= 1e-9
    apart = prd_from_histograms([0.5, 0.5, 0, 0], [0, 0, 0.5, 0.5])
    zero = not apart.precision.any() and not apart.recall.any()
    ok = worst <= 1e-9 and corner and zero
    verdict(5, "PRD oracle", ok, f"max error {worst:.1e}, (1,1) reached={corner}, disjoint zero={zero}")


# 6 ---------------------------------------------------------------------------

@pytest.mark.slow
def test_desk_scale_fidelity(desk_run, verdict):
    r = desk_run
    truth = {signature(encode(p, r.vocab), r.vocab) for p in r.spec.prototypes}
    hits = sum(signature(m, r.vocab) in truth for m in r.samples)
    real = encode_many(r.corpus[:1000], r.vocab)
    model_curve = prd_from_samples(real, r.samples, num_clusters=20, seed=0)
    base_curve = prd_from_samples(real, random_valid(1000, np.random.default_rng(6)), num_clusters=20, seed=0)
    ratio = model_curve.area() / max(base_curve.area(), 1e-12)
    hp = r.model.hyperparams
    ok = (hits >= 800 and ratio >= 3 and hp.total_steps <= 2000 and hp.batch_size == 64
          and r.seconds <= 1800)
    verdict(6, "desk-scale fidelity", ok,
            f"{hits}/1000 prototype signatures, PRD area {model_curve.area():.3f} vs "
            f"baseline {base_curve.area():.3f}, {hp.total_steps} steps in {r.seconds:.0f}s")


@pytest.mark.slow
def test_critic_loss_magnitude_falls(desk_run):
    d = np.abs(np.asarray(desk_run.report.d_loss))
    windows = np.median(d[: len(d) // 100 * 100].reshape(-1, 100), axis=1)
    assert windows[-3:].mean() < windows[:3].mean()


# 7 ---------------------------------------------------------------------------

@pytest.mark.slow
def test_conditional_fidelity(os_run, verdict):
    tested = [OsLabel.UBUNTU, OsLabel.MIKROTIK_ROUTEROS, OsLabel.WINDOWS_SERVER]
    rates = {}
    for label in tested:
        samples = sample(os_run.model, 500, label, seed=7)
        rates[label.value] = np.mean([assign_os_label(decode(m, os_run.vocab)) is label for m in samples])
    ok = all(v >= 0.7 for v in rates.values()) and os_run.model.hyperparams.total_steps <= 2000
    verdict(7, "conditional fidelity", ok, ", ".join(f"{k} {v:.1%}" for k, v in rates.items()))


# 8 ---------------------------------------------------------------------------

@pytest.mark.slow
def test_uniqueness_properties(desk_run, tmp_path, verdict):
    r = desk_run
    real = encode_many(r.corpus, r.vocab)
    table = uniqueness_table(real, r.model, TABLE1_GRID, r.vocab, seed=8)
    bounds = all(t.real_unique <= t.samples and t.gen_unique <= t.samples for t in table)
    monotone = all(a.real_unique <= b.real_unique for a, b in zip(table, table[1:]))
    multiplicity = all(t.gen_match >= t.gen_match_dedup for t in table)
    write_uniqueness_csv(table, tmp_path / "u.csv")
    with open(tmp_path / "u.csv") as fh:
        rows = list(csv.reader(fh))
    # Table 1 columns first, then the distinct-match count
    layout = rows[0][:4] == ["samples", "real_unique", "gen_unique", "gen_match"]
    layout = layout and tuple(rows[0]) == UNIQUENESS_COLUMNS
    layout = layout and [int(row[0]) for row in rows[1:]] == TABLE1_GRID
    ok = bounds and monotone and multiplicity and layout
    verdict(8, "uniqueness table", ok,
            f"bounds={bounds} monotone={monotone} match>=dedup={multiplicity} layout={layout}")


# 9 ---------------------------------------------------------------------------

GOLDEN_CASES = {
    "windows_server": (DeviceConfig("Windows Server 2019", "17763", (
        ServiceEntry(135, "msrpc", "cpe:/o:microsoft:windows"),
        ServiceEntry(139, "smb"),
        ServiceEntry(445, "smb", "cpe:/o:microsoft:windows"),
    )), "192.0.2.0/28"),
    "empty": (DeviceConfig("Linux 4.x"), "192.0.2.16/28"),
    "router": (DeviceConfig("MikroTik RouterOS 6.48", "stable", tuple(ServiceEntry(p, m) for p, m in [
        (8728, "mikrotik-routeros-api"), (21, "ftp"), (22, "ssh"), (23, "telnet"), (53, "dns-udp"),
        (80, "http"), (161, "snmp"), (1723, "pptp"), (2000, "mikrotik-bw"), (8291, "mikrotik-winbox"),
    ])), "198.51.100.0/24"),
}


def test_emitter(vocab, verdict):
    from pathlib import Path

    golden = Path(__file__).parent / "golden"
    pmap = PersonalityMap.load()
    same = {}
    for name, (config, pool) in GOLDEN_CASES.items():
        text = fleet_from_configs([config], pool).render(pmap)
        same[name] = text.encode() == (golden / f"{name}.conf").read_bytes()
    fleet, text = build_fleet(random_valid(100, np.random.default_rng(9)), vocab, pmap, "203.0.113.0/24")
    binds = check_config(text)
    lines = text.splitlines()
    creates = sum(l.startswith("create ") for l in lines)
    bind_lines = sum(l.startswith("bind ") for l in lines)
    ok = all(same.values()) and creates == 100 and bind_lines == 100 and len(binds) == 100
    verdict(9, "emitter golden files", ok, f"golden={same}, {creates} templates, {bind_lines} binds")


# 10 --------------------------------------------------------------------------

def pipeline(root):
    c, v, ck = root / "corpus.jsonl", root / "vocab.json", root / "ckpt"
    s, r, h = root / "samples.txt", root / "report", root / "honeyd.conf"
    tiny = ["--g-channels", "16,8,8,4", "--d-channels", "2,4,4,8,8", "--latent-dim", "16"]
    codes = [
        dispatch(["ingest", "--synthetic", "2000", "--synthetic-seed", "10", "--out", str(c)]),
        dispatch(["vocab", "--corpus", str(c), "--out", str(v)]),
        dispatch(["train", "--corpus", str(c), "--vocab", str(v), "--steps", "20", "--seed", "10",
                  "--log-every", "0", *tiny, "--out", str(ck)]),
        dispatch(["sample", "--ckpt", str(ck), "--n", "200", "--seed", "10", "--out", str(s)]),
        dispatch(["eval", "--ckpt", str(ck), "--corpus", str(c), "--vocab", str(v), "--sizes", "100,200",
                  "--prd-samples", "500", "--seed", "10", "--out", str(r)]),
        dispatch(["emit", "--samples", str(s), "--vocab", str(v), "--pool", "10.0.0.0/24", "--out", str(h)]),
    ]
    return codes, [c, v, s, r / "prd.csv", r / "uniqueness.csv", h, ck / "params.npz", ck / "training.csv"], ck


def test_determinism(tmp_path, verdict):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    codes_a, files_a, ck_a = pipeline(tmp_path / "a")
    codes_b, files_b, ck_b = pipeline(tmp_path / "b")
    identical = {f.name: filecmp.cmp(f, g, shallow=False) for f, g in zip(files_a, files_b)}
    same_samples = np.array_equal(sample(load_checkpoint(ck_a), 300, seed=99),
                                  sample(load_checkpoint(ck_b), 300, seed=99))
    ok = codes_a == codes_b == [0] * 6 and all(identical.values()) and same_samples
    differing = [k for k, v in identical.items() if not v]
    verdict(10, "determinism", ok, f"exit codes {codes_a}, differing files {differing}, "
                                   f"checkpoint samples identical={same_samples}")
