"""Device configuration records: ingestion, labelling, vocabularies and synthetic corpora.

A device is reduced to its OS string, an optional build string and the list of
open ports with the Shodan module (service) and CPE seen on each port.
"""
from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DuplicatePort, EmptyCorpus, InvalidSpec, IoFailure, MalformedRecord

#: Ports used by the original 378,973-device Shodan corpus, in column order.
REFERENCE_PORTS = (
    21, 22, 23, 25, 53, 80, 110, 123, 135, 137, 139, 161, 443, 445,
    1433, 1701, 1723, 2000, 3306, 3389, 4433, 5000, 5001, 5985,
    8080, 8081, 8291, 8443, 8728, 9100,
)

NUM_PORTS = 30
HALF = 32
ABSENT = 0
OTHER = 1
FIRST_SYMBOL = 2
OTHER_SYMBOL = "<other>"


class OsLabel(enum.Enum):
    MIKROTIK_ROUTEROS = "MikroTik RouterOS"
    WINDOWS_SERVER = "Windows Server"
    WINDOWS = "Windows"
    DISKSTATION_MANAGER = "DiskStation Manager"
    SONICOS = "SonicOS"
    LINUX = "Linux"
    UBUNTU = "Ubuntu"
    SYNOLOGY_ROUTER_MANAGER = "Synology Router Manager"
    DEBIAN = "Debian"
    QTS = "QTS"
    OTHER = "Other"

    @property
    def index(self) -> int:
        """Class index used for OS conditioning (Other has no class)."""
        if self is OsLabel.OTHER:
            raise ValueError("Other has no conditioning class")
        return _OS_CLASSES.index(self)

    @classmethod
    def from_index(cls, i: int) -> "OsLabel":
        return _OS_CLASSES[i]

    @classmethod
    def parse(cls, text: str) -> "OsLabel":
        """Look a label up by value or enum name, ignoring case."""
        key = text.strip().lower()
        for label in cls:
            if key in (label.value.lower(), label.name.lower()):
                return label
        raise ValueError(f"unknown OS label {text!r}")


_OS_CLASSES = tuple(l for l in OsLabel if l is not OsLabel.OTHER)
NUM_OS_CLASSES = len(_OS_CLASSES)

#: Device counts per OS label in the original corpus (reference only).
REFERENCE_OS_COUNTS = {
    OsLabel.MIKROTIK_ROUTEROS: 119478,
    OsLabel.WINDOWS_SERVER: 104584,
    OsLabel.WINDOWS: 50391,
    OsLabel.DISKSTATION_MANAGER: 49609,
    OsLabel.SONICOS: 25489,
    OsLabel.LINUX: 9781,
    OsLabel.UBUNTU: 8960,
    OsLabel.SYNOLOGY_ROUTER_MANAGER: 3616,
    OsLabel.DEBIAN: 5391,
    OsLabel.QTS: 1674,
}

# Bit order of the 9-flag device-type vector.
DEVICE_TYPES = (
    "file sharing", "remote access", "webserver", "mailserver",
    "database", "dns", "vpn", "router", "management",
)
DEVICE_TYPE_SUBSTRINGS = {
    "webserver": ("http",),
    "file sharing": ("smb", "ftp"),
    "mailserver": ("imap", "pop3", "smtp"),
    "database": ("sql",),
    "management": ("ldap", "snmp", "ntp", "kerberos"),
    "dns": ("dns",),
    "remote access": ("telnet", "ssh", "rdp"),
    "vpn": ("pptp", "l2tp", "openvpn"),
    "router": ("router",),
}


@dataclass(frozen=True)
class ServiceEntry:
    port: int
    module: str
    cpe: str | None = None

    def __post_init__(self):
        if isinstance(self.port, bool) or not isinstance(self.port, int) or not 1 <= self.port <= 65535:
            raise ValueError(f"port out of range: {self.port!r}")
        if not isinstance(self.module, str) or not self.module:
            raise ValueError("module must be a non-empty string")


@dataclass(frozen=True)
class DeviceConfig:
    """One device. Services are kept sorted by port; ports are unique."""

    os_family: str
    os_build: str | None = None
    services: tuple[ServiceEntry, ...] = ()
    source_id: str | None = field(default=None, compare=False)

    def __post_init__(self):
        services = tuple(sorted(self.services, key=lambda s: s.port))
        for a, b in zip(services, services[1:]):
            if a.port == b.port:
                raise DuplicatePort(f"port {a.port} listed twice")
        object.__setattr__(self, "services", services)

    @property
    def ports(self) -> tuple[int, ...]:
        return tuple(s.port for s in self.services)

    def to_dict(self) -> dict:
        d = {
            "os": self.os_family,
            "os_build": self.os_build,
            "services": [
                {"port": s.port, "module": s.module, "cpe": s.cpe} for s in self.services
            ],
        }
        if self.source_id is not None:
            d["source_id"] = self.source_id
        return d


# ---------------------------------------------------------------- ingestion

def _optional_str(value):
    if isinstance(value, str) and value.strip():
        return value
    if isinstance(value, list) and value and isinstance(value[0], str):
        # Shodan exports often carry cpe as a list
        return value[0]
    return None


def config_from_dict(obj: Mapping, source_id: str | None = None) -> DeviceConfig:
    if not isinstance(obj, Mapping):
        raise MalformedRecord("record is not a JSON object")
    services = obj.get("services")
    if not isinstance(services, list):
        raise MalformedRecord("record lacks a 'services' list")
    os_family = obj.get("os")
    if not isinstance(os_family, str):
        os_family = ""
    entries = []
    for raw in services:
        if not isinstance(raw, Mapping):
            raise MalformedRecord("service entry is not an object")
        try:
            entries.append(ServiceEntry(int(raw["port"]), raw["module"], _optional_str(raw.get("cpe"))))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(f"bad service entry {raw!r}: {exc}") from None
    return DeviceConfig(
        os_family=os_family,
        os_build=_optional_str(obj.get("os_build")),
        services=tuple(entries),
        source_id=source_id if source_id is not None else _optional_str(obj.get("source_id")),
    )


def parse_record(json_text: str) -> DeviceConfig:
    """Parse one JSON device record.

    Missing or unusable ``os_build``/``cpe`` values become ``None``. Raises
    :class:`MalformedRecord` for invalid JSON or a missing services list and
    :class:`DuplicatePort` when a port appears twice.
    """
    try:
        obj = json.loads(json_text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise MalformedRecord(f"invalid JSON: {exc}") from None
    return config_from_dict(obj)


def read_corpus(path) -> list[DeviceConfig]:
    """Read a JSON Lines file, one device per non-blank line."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from None
    corpus = []
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            corpus.append(parse_record(line))
        except (MalformedRecord, DuplicatePort) as exc:
            raise type(exc)(f"{path}:{n}: {exc}") from None
    return corpus


def write_corpus(corpus: Iterable[DeviceConfig], path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for c in corpus:
                fh.write(json.dumps(c.to_dict(), sort_keys=True) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from None


def group_shodan_banners(lines: Iterable[str]) -> list[DeviceConfig]:
    """Fold raw Shodan banners (one service per line) into one device per ``ip_str``.

    Uses ``port``, ``_shodan.module``, ``cpe``/``cpe23`` and ``os``; a repeated
    port on the same host keeps its first banner. Devices come out in order of
    first appearance.
    """
    hosts: dict[str, dict] = {}
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            banner = json.loads(line)
            ip = banner["ip_str"]
            port = int(banner["port"])
            module = (banner.get("_shodan") or {}).get("module") or banner.get("product") or "unknown"
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(f"banner {n}: {exc}") from None
        host = hosts.setdefault(ip, {"os": None, "services": {}})
        if host["os"] is None and isinstance(banner.get("os"), str):
            host["os"] = banner["os"]
        cpe = _optional_str(banner.get("cpe")) or _optional_str(banner.get("cpe23"))
        host["services"].setdefault(port, {"port": port, "module": module, "cpe": cpe})
    return [
        config_from_dict({"os": h["os"], "services": list(h["services"].values())}, source_id=ip)
        for ip, h in hosts.items()
    ]


# ---------------------------------------------------------------- labelling

def _matching_label(os_family: str):
    text = os_family.lower()
    hits = [l for l in _OS_CLASSES if l.value.lower() in text]
    if not hits:
        return OsLabel.OTHER
    return max(hits, key=lambda l: len(l.value))


def assign_os_label(config: DeviceConfig) -> OsLabel:
    """Case-insensitive substring match against the ten OS labels; longest match wins."""
    return _matching_label(config.os_family)


def version_token(config: DeviceConfig) -> str | None:
    """First word of the OS string after the matched label, e.g. '2019' for 'Windows Server 2019'."""
    label = assign_os_label(config)
    if label is OsLabel.OTHER:
        return None
    text = config.os_family
    at = text.lower().find(label.value.lower())
    rest = text[at + len(label.value):].split()
    return rest[0] if rest else None


def assign_device_types(config: DeviceConfig) -> frozenset[str]:
    modules = [s.module.lower() for s in config.services]
    return frozenset(
        kind for kind, subs in DEVICE_TYPE_SUBSTRINGS.items()
        if any(sub in m for m in modules for sub in subs)
    )


def device_type_vector(flags: Iterable[str]) -> np.ndarray:
    flags = set(flags)
    unknown = flags.difference(DEVICE_TYPES)
    if unknown:
        raise ValueError(f"unknown device types: {sorted(unknown)}")
    return np.array([1.0 if t in flags else 0.0 for t in DEVICE_TYPES], dtype=np.float32)


def label_histogram(corpus: Iterable[DeviceConfig]) -> dict[OsLabel, int]:
    hist = {label: 0 for label in OsLabel}
    for c in corpus:
        hist[assign_os_label(c)] += 1
    return hist


# ---------------------------------------------------------------- vocabulary

_MAP_NAMES = ("os_index", "build_index", "version_index", "service_index", "cpe_index")


@dataclass(frozen=True)
class Vocabulary:
    """Column/row index assignments for the 64x32 matrix encoding.

    ``ports`` always holds 30 distinct values. Negative entries are padding
    for corpora with fewer than 30 open ports and never match a real port.
    Every map sends symbols into 2..31; 0 means absent and 1 means "other".
    """

    ports: tuple[int, ...]
    os_index: Mapping[str, int]
    build_index: Mapping[str, int]
    version_index: Mapping[str, int]
    service_index: Mapping[str, int]
    cpe_index: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(self, "ports", tuple(int(p) for p in self.ports))
        if len(self.ports) != NUM_PORTS or len(set(self.ports)) != NUM_PORTS:
            raise ValueError("vocabulary needs exactly 30 distinct ports")
        for name in _MAP_NAMES:
            m = dict(getattr(self, name))
            values = list(m.values())
            if len(set(values)) != len(values) or any(not FIRST_SYMBOL <= v < HALF for v in values):
                raise ValueError(f"{name} must be injective into {FIRST_SYMBOL}..{HALF - 1}")
            object.__setattr__(self, name, m)
            object.__setattr__(self, "_inv_" + name, {v: k for k, v in m.items()})
        object.__setattr__(self, "_port_column", {p: i for i, p in enumerate(self.ports)})

    def index(self, name: str, symbol: str | None) -> int:
        if symbol is None:
            return ABSENT
        return getattr(self, name).get(symbol, OTHER)

    def symbol(self, name: str, index: int) -> str | None:
        if index == ABSENT:
            return None
        if index == OTHER:
            return OTHER_SYMBOL
        return getattr(self, "_inv_" + name).get(index, OTHER_SYMBOL)

    def port_column(self, port: int) -> int | None:
        """Column offset (0..29) of a port among the port columns, or None."""
        return self._port_column.get(port)

    def to_json(self) -> str:
        doc = {"format": "decoyforge-vocab/1", "ports": list(self.ports)}
        for name in _MAP_NAMES:
            doc[name] = dict(sorted(getattr(self, name).items(), key=lambda kv: kv[1]))
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        try:
            doc = json.loads(text)
            if doc.get("format") != "decoyforge-vocab/1":
                raise ValueError(f"unsupported vocabulary format {doc.get('format')!r}")
            return cls(ports=doc["ports"], **{name: doc[name] for name in _MAP_NAMES})
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise MalformedRecord(f"bad vocabulary document: {exc}") from None

    def save(self, path) -> None:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(self.to_json())
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from None

    @classmethod
    def load(cls, path) -> "Vocabulary":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_json(fh.read())
        except OSError as exc:
            raise IoFailure(f"cannot read {path}: {exc}") from None


def _ranked(counts: Counter, limit: int) -> list:
    return sorted(counts, key=lambda k: (-counts[k], k))[:limit]


def _index_map(counts: Counter) -> dict[str, int]:
    return {sym: FIRST_SYMBOL + i for i, sym in enumerate(_ranked(counts, HALF - FIRST_SYMBOL))}


def build_vocabulary(corpus: Sequence[DeviceConfig], port_budget: int = NUM_PORTS) -> Vocabulary:
    """Pick the most frequent ports and symbols of a corpus.

    Ports are ranked by the number of devices exposing them (ties by ascending
    port number); symbols by occurrence count (ties by string order). Symbols
    beyond the 30 free slots fall back to the "other" index.
    """
    if not corpus:
        raise EmptyCorpus("cannot build a vocabulary from an empty corpus")
    if not 1 <= port_budget <= NUM_PORTS:
        raise ValueError(f"port_budget must be in 1..{NUM_PORTS}")
    ports, services, cpes, oses, builds, versions = (Counter() for _ in range(6))
    for c in corpus:
        if c.os_family:
            oses[c.os_family] += 1
        if c.os_build is not None:
            builds[c.os_build] += 1
        v = version_token(c)
        if v is not None:
            versions[v] += 1
        for s in c.services:
            ports[s.port] += 1
            services[s.module] += 1
            if s.cpe is not None:
                cpes[s.cpe] += 1
    chosen = _ranked(ports, port_budget)
    padding = [-(i + 1) for i in range(NUM_PORTS - len(chosen))]
    return Vocabulary(
        ports=tuple(chosen + padding),
        os_index=_index_map(oses),
        build_index=_index_map(builds),
        version_index=_index_map(versions),
        service_index=_index_map(services),
        cpe_index=_index_map(cpes),
    )


def coverage_fraction(corpus: Sequence[DeviceConfig], vocab: Vocabulary) -> float:
    """Mean per-device share of services that land on a vocabulary port with a known module."""
    if not corpus:
        return 1.0
    shares = []
    for c in corpus:
        if not c.services:
            shares.append(1.0)
            continue
        hit = sum(
            1 for s in c.services
            if vocab.port_column(s.port) is not None and s.module in vocab.service_index
        )
        shares.append(hit / len(c.services))
    return float(np.mean(shares))


# ---------------------------------------------------------------- synthetic corpora

@dataclass(frozen=True)
class CorpusSpec:
    prototypes: tuple[DeviceConfig, ...]
    weights: tuple[float, ...]
    noise_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "prototypes", tuple(self.prototypes))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    def validate(self) -> None:
        if not self.prototypes:
            raise InvalidSpec("no prototypes")
        if len(self.weights) != len(self.prototypes):
            raise InvalidSpec("one weight per prototype required")
        w = np.asarray(self.weights)
        if not np.all(np.isfinite(w)) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise InvalidSpec("weights must be non-negative and sum to 1")
        if not 0.0 <= self.noise_rate <= 1.0:
            raise InvalidSpec("noise_rate must lie in [0, 1]")


def synth_corpus(spec: CorpusSpec, n: int) -> list[DeviceConfig]:
    """Draw ``n`` devices from a prototype mixture.

    With probability ``noise_rate`` one service of the drawn device gets its
    module replaced by a different module taken from the prototype pool (its
    CPE is dropped). Output depends only on ``spec`` and ``n``.
    """
    spec.validate()
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(spec.seed)
    pool = sorted({s.module for p in spec.prototypes for s in p.services})
    picks = rng.choice(len(spec.prototypes), size=n, p=np.asarray(spec.weights))
    noisy = rng.random(n) < spec.noise_rate
    out = []
    for i, (k, flip) in enumerate(zip(picks, noisy)):
        proto = spec.prototypes[k]
        services = list(proto.services)
        if flip and services:
            j = int(rng.integers(len(services)))
            choices = [m for m in pool if m != services[j].module]
            if choices:
                services[j] = ServiceEntry(services[j].port, choices[int(rng.integers(len(choices)))])
        out.append(DeviceConfig(proto.os_family, proto.os_build, tuple(services), source_id=f"synth-{i}"))
    return out


# Typical module/CPE per reference port, used to make synthetic prototypes look plausible.
PORT_CATALOG = {
    21: ("ftp", ("cpe:/a:proftpd:proftpd", "cpe:/a:beasts:vsftpd")),
    22: ("ssh", ("cpe:/a:openbsd:openssh", "cpe:/a:dropbear_ssh_project:dropbear_ssh")),
    23: ("telnet", ()),
    25: ("smtp", ("cpe:/a:postfix:postfix", "cpe:/a:exim:exim")),
    53: ("dns-udp", ("cpe:/a:isc:bind", "cpe:/a:thekelleys:dnsmasq")),
    80: ("http", ("cpe:/a:apache:http_server", "cpe:/a:nginx:nginx", "cpe:/a:microsoft:internet_information_services")),
    110: ("pop3", ("cpe:/a:dovecot:dovecot",)),
    123: ("ntp", ()),
    135: ("msrpc", ("cpe:/o:microsoft:windows",)),
    137: ("netbios", ()),
    139: ("smb", ("cpe:/a:samba:samba",)),
    161: ("snmp", ()),
    443: ("https", ("cpe:/a:apache:http_server", "cpe:/a:nginx:nginx")),
    445: ("smb", ("cpe:/o:microsoft:windows", "cpe:/a:samba:samba")),
    1433: ("mssql", ("cpe:/a:microsoft:sql_server",)),
    1701: ("l2tp", ()),
    1723: ("pptp", ()),
    2000: ("mikrotik-bw", ()),
    3306: ("mysql", ("cpe:/a:mysql:mysql", "cpe:/a:mariadb:mariadb")),
    3389: ("rdp", ("cpe:/o:microsoft:windows",)),
    4433: ("https", ()),
    5000: ("http", ("cpe:/a:synology:diskstation_manager",)),
    5001: ("https", ("cpe:/a:synology:diskstation_manager",)),
    5985: ("http", ("cpe:/a:microsoft:httpapi",)),
    8080: ("http-simple-new", ("cpe:/a:apache:tomcat",)),
    8081: ("http", ()),
    8291: ("mikrotik-winbox", ("cpe:/o:mikrotik:routeros",)),
    8443: ("https", ()),
    8728: ("mikrotik-routeros-api", ("cpe:/o:mikrotik:routeros",)),
    9100: ("printer", ()),
}

# Plausible port pools and OS strings per label.
_OS_PROFILES = {
    OsLabel.MIKROTIK_ROUTEROS: ((21, 22, 23, 53, 80, 161, 1701, 1723, 2000, 8080, 8291, 8728), ("MikroTik RouterOS 6.48", "MikroTik RouterOS 6.49", "MikroTik RouterOS 7.1"), ("stable", "long-term")),
    OsLabel.WINDOWS_SERVER: ((21, 25, 53, 80, 135, 139, 443, 445, 1433, 3389, 5985, 8080), ("Windows Server 2019", "Windows Server 2016", "Windows Server 2012 R2"), ("17763", "14393", "9600")),
    OsLabel.WINDOWS: ((80, 135, 137, 139, 443, 445, 3389, 5000, 8081), ("Windows 10", "Windows 7"), ("19041", "7601")),
    OsLabel.DISKSTATION_MANAGER: ((21, 22, 80, 139, 443, 445, 5000, 5001), ("Synology DiskStation Manager 6", "Synology DiskStation Manager 7"), ("25426", "42218")),
    OsLabel.SONICOS: ((22, 80, 443, 4433, 8443), ("SonicWALL SonicOS 6.5", "SonicWALL SonicOS 7.0"), ("6.5.4", "7.0.1")),
    OsLabel.LINUX: ((21, 22, 25, 53, 80, 110, 123, 443, 3306, 8080), ("Linux 3.x", "Linux 4.x"), None),
    OsLabel.UBUNTU: ((22, 25, 80, 110, 443, 3306, 8080, 8443), ("Ubuntu 20.04", "Ubuntu 18.04"), None),
    OsLabel.SYNOLOGY_ROUTER_MANAGER: ((53, 80, 443, 5000, 5001, 8443), ("Synology Router Manager 1.2", "Synology Router Manager 1.3"), ("7742", "9193")),
    OsLabel.DEBIAN: ((21, 22, 25, 53, 80, 123, 443, 3306), ("Debian 10", "Debian 11"), None),
    OsLabel.QTS: ((21, 22, 80, 139, 443, 445, 8080, 8081, 9100), ("QNAP QTS 4.5", "QNAP QTS 5.0"), ("20210206", "20220324")),
}


def random_prototype(rng: np.random.Generator, label: OsLabel, ports: Sequence[int] | None = None,
                     k_range=(2, 6)) -> DeviceConfig:
    """A plausible device of the given OS label; port choices come from ``ports`` when given."""
    pool, names, builds = _OS_PROFILES[label]
    pool = list(pool if ports is None else ports)
    k = int(rng.integers(k_range[0], min(k_range[1], len(pool)) + 1))
    chosen = sorted(int(p) for p in rng.choice(pool, size=k, replace=False))
    services = []
    for p in chosen:
        module, cpes = PORT_CATALOG[p]
        cpe = cpes[int(rng.integers(len(cpes)))] if cpes and rng.random() < 0.7 else None
        services.append(ServiceEntry(p, module, cpe))
    build = builds[int(rng.integers(len(builds)))] if builds else None
    return DeviceConfig(names[int(rng.integers(len(names)))], build, tuple(services))


def random_corpus_spec(num_prototypes: int = 20, seed: int = 0, noise_rate: float = 0.0,
                       labels: Sequence[OsLabel] | None = None) -> CorpusSpec:
    """Distinct random prototypes spread across OS labels, with Dirichlet(2) weights."""
    rng = np.random.default_rng(seed)
    labels = list(labels or _OS_CLASSES)
    protos: list[DeviceConfig] = []
    seen = set()
    attempts = 0
    while len(protos) < num_prototypes:
        attempts += 1
        if attempts > 1000 * num_prototypes:
            raise InvalidSpec("could not draw enough distinct prototypes")
        p = random_prototype(rng, labels[len(protos) % len(labels)])
        key = (p.os_family, p.ports, tuple(s.module for s in p.services))
        if key not in seen:
            seen.add(key)
            protos.append(p)
    w = rng.dirichlet(np.full(num_prototypes, 2.0))
    w = w / w.sum()
    return CorpusSpec(tuple(protos), tuple(w), noise_rate, seed)


def separable_corpus_spec(labels: Sequence[OsLabel], per_label: int = 2, seed: int = 0) -> CorpusSpec:
    """Prototype mixture where each OS label owns a disjoint block of ports.

    The reference ports are dealt round-robin to the labels, so the services of
    one label never appear on a device of another.
    """
    rng = np.random.default_rng(seed)
    blocks = {l: REFERENCE_PORTS[i::len(labels)] for i, l in enumerate(labels)}
    protos = []
    for label in labels:
        made = set()
        while len(made) < per_label:
            p = random_prototype(rng, label, ports=blocks[label], k_range=(2, 4))
            if p.ports not in made:
                made.add(p.ports)
                protos.append(p)
    w = np.full(len(protos), 1.0 / len(protos))
    return CorpusSpec(tuple(protos), tuple(w), 0.0, seed)


def demo_corpus_spec() -> CorpusSpec:
    """The spec behind the bundled synthetic corpus (``data/synthetic_corpus.jsonl``)."""
    return random_corpus_spec(num_prototypes=20, seed=2024, noise_rate=0.05)


BUNDLED_CORPUS_SIZE = 3000


def bundled_corpus_text() -> str:
    """JSON Lines text of the bundled corpus: ``synth_corpus(demo_corpus_spec(), 3000)``."""
    from importlib import resources

    return resources.files("decoyforge.data").joinpath("synthetic_corpus.jsonl").read_text(encoding="utf-8")


def bundled_corpus() -> list[DeviceConfig]:
    return [parse_record(line) for line in bundled_corpus_text().splitlines() if line.strip()]
