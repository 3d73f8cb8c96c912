import numpy as np
import pytest
import torch

from decoyforge.devices import (DeviceConfig, ServiceEntry, build_vocabulary, random_corpus_spec,
                                synth_corpus)

torch.set_num_threads(1)


@pytest.fixture
def windows_server():
    return DeviceConfig(
        "Windows Server 2019",
        "17763",
        (
            ServiceEntry(135, "msrpc", "cpe:/o:microsoft:windows"),
            ServiceEntry(139, "smb"),
            ServiceEntry(445, "smb", "cpe:/o:microsoft:windows"),
        ),
    )


@pytest.fixture(scope="session")
def mixture_spec():
    return random_corpus_spec(20, seed=7)


@pytest.fixture(scope="session")
def corpus(mixture_spec):
    return synth_corpus(mixture_spec, 2000)


@pytest.fixture(scope="session")
def vocab(corpus):
    return build_vocabulary(corpus)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def desk_run():
    """One unconditional desk-scale training run shared by every test that needs it."""
    import time
    from types import SimpleNamespace

    from decoyforge.encoding import encode_many
    from decoyforge.gan import DESK_HYPERPARAMS, UNCONDITIONAL, sample, train

    spec = random_corpus_spec(20, seed=0)
    corpus = synth_corpus(spec, 5000)
    vocab = build_vocabulary(corpus)
    start = time.perf_counter()
    model, report = train(encode_many(corpus, vocab), None, UNCONDITIONAL, DESK_HYPERPARAMS)
    samples = sample(model, 1000, seed=11)
    seconds = time.perf_counter() - start
    return SimpleNamespace(spec=spec, corpus=corpus, vocab=vocab, model=model, report=report,
                           samples=samples, seconds=seconds)


@pytest.fixture(scope="session")
def os_run():
    """OS-conditional desk-scale run on a corpus whose labels own disjoint ports."""
    from types import SimpleNamespace

    from decoyforge.devices import OsLabel, assign_os_label, separable_corpus_spec
    from decoyforge.encoding import encode_many
    from decoyforge.gan import DESK_HYPERPARAMS, ConditionSpec, train

    labels = [l for l in OsLabel if l is not OsLabel.OTHER]
    spec = separable_corpus_spec(labels, per_label=2, seed=0)
    corpus = synth_corpus(spec, 5000)
    vocab = build_vocabulary(corpus)
    y = np.array([assign_os_label(c).index for c in corpus])
    condition = ConditionSpec.for_mode("os")
    model, report = train(encode_many(corpus, vocab), y, condition, DESK_HYPERPARAMS)
    return SimpleNamespace(spec=spec, corpus=corpus, vocab=vocab, model=model, report=report)
