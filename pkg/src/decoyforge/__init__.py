"""Learn network device configurations with WGAN-GP models and turn samples into HoneyD decoys."""

__version__ = "0.1.0"

from .devices import (CorpusSpec, DeviceConfig, OsLabel, ServiceEntry, Vocabulary,  # noqa: E402
                      assign_device_types, assign_os_label, build_vocabulary, coverage_fraction,
                      label_histogram, parse_record, synth_corpus)
from .encoding import decode, discretize, encode  # noqa: E402

__all__ = [
    "CorpusSpec", "DeviceConfig", "OsLabel", "ServiceEntry", "Vocabulary",
    "assign_device_types", "assign_os_label", "build_vocabulary", "coverage_fraction",
    "label_histogram", "parse_record", "synth_corpus", "decode", "discretize", "encode",
]
