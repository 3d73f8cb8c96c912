"""The 64x32 two-hot matrix representation of a device.

Column 0 holds the OS string (upper half) and build (lower half), column 1 the
OS version token (upper half) over a fixed absent marker. Columns 2..31 follow
``Vocabulary.ports``: the upper half carries the service index, the lower half
the CPE index, and a closed port is index 0 in both halves. Every column thus
has exactly one 1 in rows 0..31 and one in rows 32..63.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .devices import ABSENT, HALF, DeviceConfig, ServiceEntry, Vocabulary, version_token
from .errors import InvalidMatrix, IoFailure

ROWS = 2 * HALF
COLS = 32
SHAPE = (ROWS, COLS)
PORT_COL0 = 2


def encode(config: DeviceConfig, vocab: Vocabulary) -> np.ndarray:
    upper = np.zeros(COLS, dtype=np.intp)
    lower = np.zeros(COLS, dtype=np.intp)
    upper[0] = vocab.index("os_index", config.os_family or None)
    lower[0] = vocab.index("build_index", config.os_build)
    upper[1] = vocab.index("version_index", version_token(config))
    for s in config.services:
        j = vocab.port_column(s.port)
        if j is None:
            continue
        upper[PORT_COL0 + j] = vocab.index("service_index", s.module)
        lower[PORT_COL0 + j] = vocab.index("cpe_index", s.cpe)
    m = np.zeros(SHAPE, dtype=np.uint8)
    cols = np.arange(COLS)
    m[upper, cols] = 1
    m[HALF + lower, cols] = 1
    return m


def encode_many(configs: Iterable[DeviceConfig], vocab: Vocabulary) -> np.ndarray:
    mats = [encode(c, vocab) for c in configs]
    if not mats:
        return np.zeros((0,) + SHAPE, dtype=np.uint8)
    return np.stack(mats)


def is_valid(matrix) -> bool:
    m = np.asarray(matrix)
    if m.shape != SHAPE or not np.isin(m, (0, 1)).all():
        return False
    return bool((m[:HALF].sum(axis=0) == 1).all() and (m[HALF:].sum(axis=0) == 1).all())


def check_matrix(matrix) -> np.ndarray:
    """Return the matrix as uint8, raising :class:`InvalidMatrix` unless it is two-hot per half."""
    m = np.asarray(matrix)
    if m.shape != SHAPE:
        raise InvalidMatrix(f"expected shape {SHAPE}, got {m.shape}")
    if not is_valid(m):
        bad = np.flatnonzero((m[:HALF].sum(axis=0) != 1) | (m[HALF:].sum(axis=0) != 1))
        raise InvalidMatrix(f"columns {bad.tolist()} are not one-hot in each half")
    return m.astype(np.uint8, copy=False)


def _halves(m):
    return m[:HALF].argmax(axis=0), m[HALF:].argmax(axis=0)


def decode(matrix, vocab: Vocabulary) -> DeviceConfig:
    """Inverse of :func:`encode`; out-of-vocabulary symbols come back as ``"<other>"``."""
    m = check_matrix(matrix)
    upper, lower = _halves(m)
    services = []
    for j, port in enumerate(vocab.ports):
        svc = int(upper[PORT_COL0 + j])
        if svc == ABSENT or port < 1:
            continue
        services.append(ServiceEntry(
            port,
            vocab.symbol("service_index", svc),
            vocab.symbol("cpe_index", int(lower[PORT_COL0 + j])),
        ))
    return DeviceConfig(
        os_family=vocab.symbol("os_index", int(upper[0])) or "",
        os_build=vocab.symbol("build_index", int(lower[0])),
        services=tuple(services),
    )


def discretize(sample) -> np.ndarray:
    """Snap real-valued output to a valid matrix by per-half, per-column argmax.

    Accepts one ``(64, 32)`` array or a batch ``(n, 64, 32)``. Ties go to the
    lowest row.
    """
    x = np.asarray(sample, dtype=np.float64)
    if x.shape[-2:] != SHAPE:
        raise ValueError(f"expected trailing shape {SHAPE}, got {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("sample contains non-finite values")
    top = x[..., :HALF, :].argmax(axis=-2)
    bottom = x[..., HALF:, :].argmax(axis=-2)
    rows = np.arange(HALF)[:, None]
    out = np.concatenate([
        (rows == top[..., None, :]),
        (rows == bottom[..., None, :]),
    ], axis=-2)
    return out.astype(np.uint8)


def to_signed(matrices) -> np.ndarray:
    """Map {0, 1} cells to {-1, +1} float32, the range of the generator's tanh output."""
    return np.asarray(matrices, dtype=np.float32) * 2.0 - 1.0


def random_valid(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` matrices with every half-column one-hot at a uniformly random row."""
    return discretize(rng.random((n,) + SHAPE))


# ---------------------------------------------------------------- text format

def matrix_to_line(matrix) -> str:
    m = np.asarray(matrix)
    if m.shape != SHAPE:
        raise InvalidMatrix(f"expected shape {SHAPE}, got {m.shape}")
    return "".join("1" if v else "0" for v in m.reshape(-1))


def line_to_matrix(line: str) -> np.ndarray:
    line = line.strip()
    if len(line) != ROWS * COLS or set(line) - {"0", "1"}:
        raise InvalidMatrix("matrix line must be 2048 characters of '0'/'1'")
    return (np.frombuffer(line.encode("ascii"), dtype=np.uint8) - ord("0")).reshape(SHAPE)


def write_matrices(matrices: Sequence, path) -> None:
    """Row-major 2048-character lines, one matrix per line."""
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            for m in matrices:
                fh.write(matrix_to_line(m) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from None


def read_matrices(path) -> np.ndarray:
    try:
        with open(path, encoding="ascii") as fh:
            lines = [ln for ln in fh if ln.strip()]
    except (OSError, UnicodeDecodeError) as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from None
    if not lines:
        return np.zeros((0,) + SHAPE, dtype=np.uint8)
    return np.stack([line_to_matrix(ln) for ln in lines])
