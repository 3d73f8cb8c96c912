"""WGAN-GP generator/critic pair over 64x32 configuration matrices.

The textbook GAN game is min_G max_D E[log D(x)] + E[log(1 - D(G(z)))]. What
is actually optimised here is the Wasserstein form with a gradient penalty:

    critic:    mean D(G(z)) - mean D(x) + gp_coefficient * mean (||grad D(x_hat)|| - 1)^2
    generator: -mean D(G(z))

with x_hat a random per-sample interpolation between a real and a fake sample.
Three modes are supported: unconditional, conditioned on one of ten OS labels
(one-hot) and conditioned on the nine device-type flags (multi-hot).
"""
from __future__ import annotations

import hashlib
import io
import json
import time
import zipfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
import torch
from torch import nn

from .devices import DEVICE_TYPES, NUM_OS_CLASSES, OsLabel, device_type_vector
from .encoding import COLS, ROWS, discretize, to_signed
from .errors import (ConditionNotAllowed, ConditionRequired, EmptyCorpus, IoFailure,
                     LabelMismatch, VersionMismatch)

CHECKPOINT_FORMAT = 1

#: Step budgets of the original full-scale runs.
REFERENCE_STEPS = {"unconditional": 11844, "os": 5922, "device_type": 23688}

SEED_GRID = (4, 2)
_MODE_ALIASES = {"uncond": "unconditional", "dt": "device_type"}


@dataclass(frozen=True)
class Hyperparams:
    batch_size: int = 64
    critic_iters: int = 3
    gp_coefficient: float = 10.0
    learning_rate: float = 2e-4
    adam_beta1: float = 0.5
    adam_beta2: float = 0.9
    total_steps: int = REFERENCE_STEPS["unconditional"]
    latent_dim: int = 128
    seed: int = 0
    # seed-grid channels followed by the outputs of the first three up-blocks;
    # the fourth block always emits one channel
    g_channels: tuple[int, ...] = (256, 128, 64, 32)
    # stride-1 conv, then the four stride-2 convs
    d_channels: tuple[int, ...] = (32, 64, 128, 256, 256)

    def __post_init__(self):
        object.__setattr__(self, "g_channels", tuple(int(c) for c in self.g_channels))
        object.__setattr__(self, "d_channels", tuple(int(c) for c in self.d_channels))
        for name in ("batch_size", "critic_iters", "latent_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.total_steps < 0:
            raise ValueError("total_steps must be non-negative")
        if self.learning_rate <= 0 or self.gp_coefficient < 0:
            raise ValueError("learning_rate must be > 0 and gp_coefficient >= 0")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            raise ValueError("Adam betas must lie in [0, 1)")
        if len(self.g_channels) != 4 or len(self.d_channels) != 5 or min(self.g_channels + self.d_channels) < 1:
            raise ValueError("g_channels needs 4 and d_channels 5 positive widths")

    def replace(self, **changes) -> "Hyperparams":
        return Hyperparams(**{**asdict(self), **changes})

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparams":
        return cls(**d)


#: Narrower critic, larger step size and fewer steps so one run fits 30 minutes on one CPU core.
DESK_HYPERPARAMS = Hyperparams(total_steps=1100, learning_rate=5e-4,
                               g_channels=(256, 128, 64, 32), d_channels=(4, 8, 32, 64, 128))


@dataclass(frozen=True)
class ConditionSpec:
    mode: str = "unconditional"
    num_classes: int = 0
    multi_label: bool = False

    def __post_init__(self):
        expected = {"unconditional": (0, False), "os": (NUM_OS_CLASSES, False),
                    "device_type": (len(DEVICE_TYPES), True)}
        if expected.get(self.mode) != (self.num_classes, self.multi_label):
            raise ValueError(f"inconsistent condition spec {self}")

    @classmethod
    def for_mode(cls, mode: str) -> "ConditionSpec":
        mode = _MODE_ALIASES.get(mode, mode)
        if mode == "os":
            return cls("os", NUM_OS_CLASSES, False)
        if mode == "device_type":
            return cls("device_type", len(DEVICE_TYPES), True)
        if mode == "unconditional":
            return cls()
        raise ValueError(f"unknown conditioning mode {mode!r}")

    @property
    def conditional(self) -> bool:
        return self.mode != "unconditional"


UNCONDITIONAL = ConditionSpec()


# ---------------------------------------------------------------- networks

class Generator(nn.Module):
    """Dense projection to a 4x2 grid, then four (2x nearest upsample, 3x3 conv) blocks.

    Sampling runs in eval mode, so batch norm uses its running statistics and a
    sample does not depend on the rest of its batch.
    """

    def __init__(self, condition: ConditionSpec, hp: Hyperparams):
        super().__init__()
        self.in_features = hp.latent_dim + condition.num_classes
        c0 = hp.g_channels[0]
        self.project = nn.Linear(self.in_features, c0 * SEED_GRID[0] * SEED_GRID[1])
        widths = list(hp.g_channels) + [1]
        layers: list[nn.Module] = []
        for i, (cin, cout) in enumerate(zip(widths, widths[1:])):
            layers += [nn.Upsample(scale_factor=2, mode="nearest"),
                       nn.Conv2d(cin, cout, kernel_size=3, stride=1, padding=1)]
            # batch norm in the hidden blocks only; the critic stays unnormalised
            layers += [nn.Tanh()] if i == 3 else [nn.BatchNorm2d(cout), nn.ReLU()]
        self.blocks = nn.Sequential(*layers)
        self.seed_channels = c0

    def forward(self, z, cond=None):
        if cond is not None and cond.shape[1]:
            z = torch.cat([z, cond], dim=1)
        h = torch.relu(self.project(z)).view(-1, self.seed_channels, *SEED_GRID)
        return self.blocks(h).squeeze(1)


class Discriminator(nn.Module):
    """Stride-1 conv, four 5x5 stride-2 convs, one dense output. No output squashing."""

    def __init__(self, condition: ConditionSpec, hp: Hyperparams):
        super().__init__()
        w = hp.d_channels
        layers: list[nn.Module] = [nn.Conv2d(1 + condition.num_classes, w[0], 5, stride=1, padding=2),
                                   nn.LeakyReLU(0.2)]
        for cin, cout in zip(w, w[1:]):
            layers += [nn.Conv2d(cin, cout, 5, stride=2, padding=2), nn.LeakyReLU(0.2)]
        self.features = nn.Sequential(*layers)
        self.out = nn.Linear(w[-1] * (ROWS // 16) * (COLS // 16), 1)

    def forward(self, x, cond=None):
        x = x.unsqueeze(1)
        if cond is not None and cond.shape[1]:
            planes = cond[:, :, None, None].expand(-1, -1, x.shape[2], x.shape[3])
            x = torch.cat([x, planes.to(x.dtype)], dim=1)
        return self.out(self.features(x).flatten(1)).squeeze(1)


def build_generator(condition: ConditionSpec, hp: Hyperparams) -> Generator:
    return Generator(condition, hp)


def build_discriminator(condition: ConditionSpec, hp: Hyperparams | None = None) -> Discriminator:
    return Discriminator(condition, hp or Hyperparams())


# ---------------------------------------------------------------- losses

def gradient_penalty(critic: Callable, real, fake, cond=None, eps=None, generator=None):
    """Mean squared deviation from 1 of the critic's input-gradient norm at random interpolates.

    ``eps`` (one mixing weight per sample) is drawn uniformly when omitted. The
    returned tensor keeps its graph so it can be backpropagated to the critic.
    """
    if real.shape != fake.shape:
        raise ValueError("real and fake batches must have the same shape")
    if eps is None:
        eps = torch.rand(real.shape[0], generator=generator, dtype=real.dtype)
    eps = eps.reshape(-1, *([1] * (real.dim() - 1)))
    x_hat = (eps * real + (1 - eps) * fake).detach().requires_grad_(True)
    scores = critic(x_hat, cond)
    (grad,) = torch.autograd.grad(scores.sum(), x_hat, create_graph=True)
    norms = grad.flatten(1).norm(dim=1)
    return ((norms - 1) ** 2).mean()


def critic_loss(critic: Callable, real, fake, cond=None, gp_coefficient=10.0, eps=None, generator=None):
    """Returns ``(loss, wasserstein_gap, penalty)`` for one critic update."""
    gap = critic(fake, cond).mean() - critic(real, cond).mean()
    penalty = gradient_penalty(critic, real, fake, cond, eps=eps, generator=generator)
    return gap + gp_coefficient * penalty, gap, penalty


# ---------------------------------------------------------------- model & conditions

@dataclass
class TrainingReport:
    d_loss: list[float] = field(default_factory=list)
    g_loss: list[float] = field(default_factory=list)
    penalty: list[float] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)

    def __len__(self):
        return len(self.d_loss)


@dataclass
class GanModel:
    generator: Generator
    discriminator: Discriminator
    condition: ConditionSpec
    hyperparams: Hyperparams
    step_count: int = 0


def new_model(condition: ConditionSpec, hp: Hyperparams) -> GanModel:
    """Freshly initialised networks; initial weights depend only on ``hp.seed``."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(hp.seed)
        g = build_generator(condition, hp)
        d = build_discriminator(condition, hp)
    return GanModel(g, d, condition, hp)


def condition_vector(condition: ConditionSpec, label) -> np.ndarray:
    """Turn a user-facing label into the network's condition vector.

    OS mode takes an :class:`OsLabel`, its name/value string or a class index.
    Device-type mode takes one flag name, an iterable of flag names, or a
    9-element 0/1 vector.
    """
    if condition.mode == "os":
        if isinstance(label, str):
            label = OsLabel.parse(label)
        idx = label.index if isinstance(label, OsLabel) else int(label)
        if not 0 <= idx < NUM_OS_CLASSES:
            raise LabelMismatch(f"OS class index {idx} out of range")
        v = np.zeros(NUM_OS_CLASSES, dtype=np.float32)
        v[idx] = 1.0
        return v
    if condition.mode == "device_type":
        if isinstance(label, str):
            label = [label]
        arr = np.asarray(list(label))
        if arr.dtype.kind in "iufb":
            if arr.shape != (len(DEVICE_TYPES),) or not np.isin(arr, (0, 1)).all():
                raise LabelMismatch("device-type vector must be 9 flags of 0/1")
            return arr.astype(np.float32)
        try:
            return device_type_vector(arr.tolist())
        except ValueError as exc:
            raise LabelMismatch(str(exc)) from None
    raise ConditionNotAllowed("unconditional model takes no condition")


def _condition_matrix(condition: ConditionSpec, labels, n: int) -> np.ndarray:
    if not condition.conditional:
        if labels is not None:
            raise LabelMismatch("labels given for an unconditional model")
        return np.zeros((n, 0), dtype=np.float32)
    if labels is None:
        raise LabelMismatch(f"{condition.mode} mode needs labels")
    labels = list(labels) if not isinstance(labels, np.ndarray) else labels
    if len(labels) != n:
        raise LabelMismatch(f"{len(labels)} labels for {n} samples")
    if isinstance(labels, np.ndarray) and labels.ndim == 2:
        if labels.shape[1] != condition.num_classes:
            raise LabelMismatch(f"label vectors must have {condition.num_classes} entries")
        if condition.mode == "os" and not (labels.sum(axis=1) == 1).all():
            raise LabelMismatch("OS labels must be one-hot")
        if not np.isin(labels, (0, 1)).all():
            raise LabelMismatch("label vectors must be 0/1")
        return labels.astype(np.float32)
    return np.stack([condition_vector(condition, l) for l in labels])


# ---------------------------------------------------------------- training

def train(corpus_matrices, labels, condition: ConditionSpec, hp: Hyperparams,
          progress: Callable[[int, TrainingReport], None] | None = None,
          model: GanModel | None = None) -> tuple[GanModel, TrainingReport]:
    """Run ``hp.total_steps`` WGAN-GP steps.

    Each step makes ``hp.critic_iters`` critic updates on freshly drawn real
    batches (sampled with replacement) followed by one generator update, both
    with Adam(lr, beta1, beta2). Everything random derives from ``hp.seed``.
    Passing ``model`` continues training it instead of starting fresh.
    """
    data = np.asarray(corpus_matrices)
    if data.ndim != 3 or data.shape[0] == 0:
        raise EmptyCorpus("training corpus is empty")
    if data.shape[1:] != (ROWS, COLS):
        raise ValueError(f"corpus matrices must be {ROWS}x{COLS}")
    conds = torch.from_numpy(_condition_matrix(condition, labels, data.shape[0]))
    real_all = torch.from_numpy(to_signed(data))

    if model is None:
        model = new_model(condition, hp)
    g, d = model.generator, model.discriminator
    g.train()
    d.train()
    betas = (hp.adam_beta1, hp.adam_beta2)
    opt_g = torch.optim.Adam(g.parameters(), lr=hp.learning_rate, betas=betas)
    opt_d = torch.optim.Adam(d.parameters(), lr=hp.learning_rate, betas=betas)
    rng = torch.Generator().manual_seed(hp.seed + 1 + model.step_count)
    report = TrainingReport()
    n = real_all.shape[0]
    bs = hp.batch_size

    for _ in range(hp.total_steps):
        t0 = time.perf_counter()
        for _ in range(hp.critic_iters):
            idx = torch.randint(n, (bs,), generator=rng)
            real, cond = real_all[idx], conds[idx]
            z = torch.randn(bs, hp.latent_dim, generator=rng)
            with torch.no_grad():
                fake = g(z, cond)
            loss_d, _, penalty = critic_loss(d, real, fake, cond, hp.gp_coefficient, generator=rng)
            opt_d.zero_grad(set_to_none=True)
            loss_d.backward()
            opt_d.step()

        idx = torch.randint(n, (bs,), generator=rng)
        z = torch.randn(bs, hp.latent_dim, generator=rng)
        loss_g = -d(g(z, conds[idx]), conds[idx]).mean()
        opt_g.zero_grad(set_to_none=True)
        loss_g.backward()
        opt_g.step()

        model.step_count += 1
        report.d_loss.append(loss_d.item())
        report.g_loss.append(loss_g.item())
        report.penalty.append(penalty.item())
        report.seconds.append(time.perf_counter() - t0)
        if progress is not None:
            progress(model.step_count, report)
    g.eval()
    d.eval()
    return model, report


# ---------------------------------------------------------------- sampling

def sample_conditioned(model: GanModel, conds, seed: int = 0, chunk: int = 512) -> np.ndarray:
    """One discretized sample per row of the condition matrix ``conds`` (shape (n, classes))."""
    conds = torch.as_tensor(np.asarray(conds, dtype=np.float32))
    n = conds.shape[0]
    rng = torch.Generator().manual_seed(int(seed))
    z = torch.randn(n, model.hyperparams.latent_dim, generator=rng)
    out = []
    g = model.generator
    was_training = g.training
    g.eval()
    with torch.no_grad():
        for lo in range(0, n, chunk):
            out.append(g(z[lo:lo + chunk], conds[lo:lo + chunk]).numpy())
    g.train(was_training)
    raw = np.concatenate(out) if out else np.zeros((0, ROWS, COLS), dtype=np.float32)
    return discretize(raw)


def sample(model: GanModel, n: int, condition=None, seed: int = 0) -> np.ndarray:
    """Draw ``n`` valid matrices with latent vectors from N(0, I).

    ``condition`` is required for conditional models and refused otherwise.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    spec = model.condition
    if spec.conditional and condition is None:
        raise ConditionRequired(f"{spec.mode} model needs a condition label")
    if not spec.conditional and condition is not None:
        raise ConditionNotAllowed("unconditional model takes no condition")
    if spec.conditional:
        row = condition_vector(spec, condition)
        conds = np.repeat(row[None, :], n, axis=0)
    else:
        conds = np.zeros((n, 0), dtype=np.float32)
    return sample_conditioned(model, conds, seed)


# ---------------------------------------------------------------- checkpoints

def _state_arrays(model: GanModel) -> dict[str, np.ndarray]:
    arrays = {}
    for prefix, net in (("generator", model.generator), ("discriminator", model.discriminator)):
        for k, v in net.state_dict().items():
            arrays[f"{prefix}.{k}"] = v.detach().cpu().numpy()
    return arrays


def _npz_bytes(arrays: dict[str, np.ndarray]) -> bytes:
    # np.savez stamps each member with the wall clock; fixed stamps keep the
    # archive byte-identical across runs
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_STORED) as zf:
        for name, value in arrays.items():
            info = zipfile.ZipInfo(name + ".npy", date_time=(1980, 1, 1, 0, 0, 0))
            with zf.open(info, "w", force_zip64=True) as fh:
                np.lib.format.write_array(fh, np.asanyarray(value), allow_pickle=False)
    return buf.getvalue()


def save_checkpoint(model: GanModel, path) -> Path:
    """Write ``metadata.json`` and ``params.npz`` into the directory ``path``."""
    path = Path(path)
    blob = _npz_bytes(_state_arrays(model))
    meta = {
        "format_version": CHECKPOINT_FORMAT,
        "condition": asdict(model.condition),
        "hyperparams": asdict(model.hyperparams),
        "step_count": model.step_count,
        "params_sha256": hashlib.sha256(blob).hexdigest(),
    }
    try:
        path.mkdir(parents=True, exist_ok=True)
        (path / "params.npz").write_bytes(blob)
        (path / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write checkpoint {path}: {exc}") from None
    return path


def load_checkpoint(path) -> GanModel:
    path = Path(path)
    try:
        meta_text = (path / "metadata.json").read_text()
        blob = (path / "params.npz").read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read checkpoint {path}: {exc}") from None
    try:
        meta = json.loads(meta_text)
        version = meta.get("format_version")
    except (json.JSONDecodeError, AttributeError):
        raise VersionMismatch(f"{path}: unreadable checkpoint metadata") from None
    if version != CHECKPOINT_FORMAT:
        raise VersionMismatch(f"{path}: checkpoint format {version!r}, expected {CHECKPOINT_FORMAT}")
    if hashlib.sha256(blob).hexdigest() != meta.get("params_sha256"):
        raise IoFailure(f"{path}: parameter file does not match its recorded digest")
    try:
        condition = ConditionSpec(**meta["condition"])
        hp = Hyperparams.from_dict(meta["hyperparams"])
        model = new_model(condition, hp)
        with np.load(io.BytesIO(blob)) as arrays:
            for prefix, net in (("generator", model.generator), ("discriminator", model.discriminator)):
                state = {k[len(prefix) + 1:]: torch.from_numpy(arrays[k].copy())
                         for k in arrays.files if k.startswith(prefix + ".")}
                net.load_state_dict(state, strict=True)
    except (KeyError, TypeError, ValueError, RuntimeError, zipfile.BadZipFile) as exc:
        raise VersionMismatch(f"{path}: checkpoint does not match this model layout: {exc}") from None
    model.step_count = int(meta["step_count"])
    model.generator.eval()
    model.discriminator.eval()
    return model
