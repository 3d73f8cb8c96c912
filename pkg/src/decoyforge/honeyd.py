"""Render device configurations as HoneyD templates.

Each decoy becomes::

    create <name>
    set <name> personality "<personality>"
    set <name> default tcp action reset
    add <name> tcp port <P> open        (one per service, ascending port)
    bind <address> <name>               (fleet files only)

Output uses ``\\n`` line endings and ends with a newline.
"""
from __future__ import annotations

import ipaddress
import json
import re
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

from .devices import DeviceConfig, OsLabel, Vocabulary, assign_os_label
from .encoding import decode
from .errors import HoneydSyntaxError, IoFailure, PoolExhausted, UnknownPersonality

DEFAULT_KEY = "_default"
_NAME = r"[A-Za-z][A-Za-z0-9_.-]*"
_NAME_RE = re.compile(rf"^{_NAME}$")


@dataclass(frozen=True)
class PersonalityMap:
    entries: Mapping[OsLabel, str]
    default: str | None = None

    def lookup(self, label: OsLabel) -> str:
        if label in self.entries:
            return self.entries[label]
        if self.default is not None:
            return self.default
        raise UnknownPersonality(f"no personality for {label.value!r} and no default")

    @classmethod
    def from_dict(cls, doc: Mapping[str, str]) -> "PersonalityMap":
        entries = {}
        for key, value in doc.items():
            if key == DEFAULT_KEY:
                continue
            if not isinstance(value, str) or '"' in value:
                raise ValueError(f"personality for {key!r} must be a string without quotes")
            entries[OsLabel.parse(key)] = value
        return cls(entries, doc.get(DEFAULT_KEY))

    @classmethod
    def load(cls, path=None) -> "PersonalityMap":
        """Read a JSON map (label -> personality, plus ``_default``); the bundled one if no path."""
        try:
            if path is None:
                text = resources.files("decoyforge.data").joinpath("personalities.json").read_text()
            else:
                with open(path, encoding="utf-8") as fh:
                    text = fh.read()
        except OSError as exc:
            raise IoFailure(f"cannot read personalities {path}: {exc}") from None
        return cls.from_dict(json.loads(text))


def to_honeyd(config: DeviceConfig, pmap: PersonalityMap, template_name: str) -> str:
    if not _NAME_RE.match(template_name):
        raise ValueError(f"invalid template name {template_name!r}")
    personality = pmap.lookup(assign_os_label(config))
    lines = [
        f"create {template_name}",
        f'set {template_name} personality "{personality}"',
        f"set {template_name} default tcp action reset",
    ]
    lines += [f"add {template_name} tcp port {p} open" for p in sorted(set(config.ports))]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Decoy:
    name: str
    config: DeviceConfig
    address: str


@dataclass(frozen=True)
class DecoyFleet:
    decoys: tuple[Decoy, ...]
    address_pool: str

    def render(self, pmap: PersonalityMap) -> str:
        blocks = [to_honeyd(d.config, pmap, d.name) + f"bind {d.address} {d.name}\n" for d in self.decoys]
        return "\n".join(blocks)


def fleet_from_configs(configs: Sequence[DeviceConfig], pool: str, prefix: str = "decoy") -> DecoyFleet:
    """Name decoys ``<prefix>0001``.. and bind them to consecutive host addresses of ``pool``."""
    net = ipaddress.ip_network(pool, strict=False)
    hosts = net.hosts()
    width = max(4, len(str(len(configs))))
    decoys = []
    for i, cfg in enumerate(configs):
        addr = next(hosts, None)
        if addr is None:
            raise PoolExhausted(f"{pool} has fewer usable addresses than {len(configs)} decoys")
        decoys.append(Decoy(f"{prefix}{i + 1:0{width}d}", cfg, str(addr)))
    return DecoyFleet(tuple(decoys), str(net))


def build_fleet(samples, vocab: Vocabulary, pmap: PersonalityMap, pool: str) -> tuple[DecoyFleet, str]:
    """Decode matrices and render them as one HoneyD configuration file."""
    configs = [decode(m, vocab) for m in samples]
    fleet = fleet_from_configs(configs, pool)
    return fleet, fleet.render(pmap)


# ---------------------------------------------------------------- checking

_RULES = {
    "create": re.compile(rf"^create ({_NAME})$"),
    "personality": re.compile(rf'^set ({_NAME}) personality "([^"]+)"$'),
    "default": re.compile(rf"^set ({_NAME}) default (tcp|udp|icmp) action (reset|open|block|closed)$"),
    "add": re.compile(rf"^add ({_NAME}) (tcp|udp) port (\d+) (open|reset|block)$"),
    "bind": re.compile(rf"^bind (\S+) ({_NAME})$"),
}


def check_config(text: str) -> dict[str, str]:
    """Validate the subset of the HoneyD grammar this package emits.

    Checks statement syntax, that templates are created before use and only
    once, that ports are in range and not repeated within a template, and that
    bind addresses are valid and unique. Returns the address -> template map.
    """
    if text and not text.endswith("\n"):
        raise HoneydSyntaxError(text.count("\n") + 1, "missing final newline")
    created: set[str] = set()
    ports: dict[str, set] = {}
    binds: dict[str, str] = {}
    for n, line in enumerate(text.split("\n")[:-1] if text else [], 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        for kind, rule in _RULES.items():
            m = rule.match(line)
            if m:
                break
        else:
            raise HoneydSyntaxError(n, f"unrecognised statement {line!r}")
        if kind == "create":
            if m[1] in created:
                raise HoneydSyntaxError(n, f"template {m[1]} created twice")
            created.add(m[1])
            ports[m[1]] = set()
            continue
        if kind == "bind":
            addr, name = m[1], m[2]
            try:
                ipaddress.ip_address(addr)
            except ValueError:
                raise HoneydSyntaxError(n, f"bad address {addr!r}") from None
            if addr in binds:
                raise HoneydSyntaxError(n, f"address {addr} bound twice")
            binds[addr] = name
        else:
            name = m[1]
        if name not in created:
            raise HoneydSyntaxError(n, f"template {name} used before create")
        if kind == "add":
            key = (m[2], int(m[3]))
            if not 1 <= key[1] <= 65535:
                raise HoneydSyntaxError(n, f"port {key[1]} out of range")
            if key in ports[name]:
                raise HoneydSyntaxError(n, f"port {key[1]} added twice to {name}")
            ports[name].add(key)
    return binds
