"""``decoyforge`` command line: ingest -> vocab -> train -> sample -> eval -> emit.

Every command writes a run manifest next to its output (``<file>.manifest.json``
or ``<dir>/manifest.json``). Option defaults can be overridden through
``DECOYFORGE_<OPTION>`` environment variables, e.g. ``DECOYFORGE_SEED``;
explicit flags always win.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .devices import (DEVICE_TYPES, OsLabel, Vocabulary, assign_device_types, assign_os_label,
                      build_vocabulary, bundled_corpus, demo_corpus_spec, device_type_vector, group_shodan_banners,
                      read_corpus, synth_corpus, write_corpus)
from .encoding import encode_many, random_valid, read_matrices, write_matrices
from .errors import DecoyForgeError, EmptyCorpus, IoFailure, LabelMismatch

PROG = "decoyforge"
DEFAULT_SIZES = ",".join(str(n) for n in range(500, 5001, 500))


# ---------------------------------------------------------------- manifests

def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _digests(paths) -> dict[str, str]:
    out = {}
    for p in map(Path, paths):
        if p.is_dir():
            for f in sorted(p.rglob("*")):
                if f.is_file() and f.name != "manifest.json":
                    out[str(f)] = _digest(f)
        elif p.is_file():
            out[str(p)] = _digest(p)
    return out


def write_manifest(out: Path, argv, seed, inputs, outputs, started: str) -> Path:
    target = out / "manifest.json" if out.is_dir() else out.with_name(out.name + ".manifest.json")
    doc = {
        "tool": PROG,
        "version": __version__,
        "command": list(argv),
        "seed": seed,
        "inputs": _digests(inputs),
        "outputs": _digests(outputs),
        "started_at": started,
        "finished_at": _now(),
    }
    target.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return target


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------- helpers

def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _parse_label(mode: str, text: str | None):
    if text is None:
        return None
    if mode == "os":
        try:
            return OsLabel.parse(text)
        except ValueError as exc:
            raise LabelMismatch(str(exc)) from None
    return [t.strip() for t in text.split(",") if t.strip()]


def training_labels(corpus, mode: str):
    """Keep the devices usable for ``mode`` and return (devices, labels).

    OS mode drops devices labelled Other; device-type mode drops devices
    without any flag.
    """
    if mode == "unconditional":
        return list(corpus), None
    if mode == "os":
        pairs = [(c, assign_os_label(c)) for c in corpus]
        kept = [(c, l.index) for c, l in pairs if l is not OsLabel.OTHER]
        return [c for c, _ in kept], np.array([i for _, i in kept], dtype=np.int64)
    kept = [(c, assign_device_types(c)) for c in corpus]
    kept = [(c, f) for c, f in kept if f]
    labels = np.stack([device_type_vector(f) for _, f in kept]) if kept else np.zeros((0, len(DEVICE_TYPES)))
    return [c for c, _ in kept], labels


def _condition_rows(model, devices):
    """Condition vectors matching each device's own label (conditional models)."""
    from .gan import condition_vector

    kept, labels = training_labels(devices, model.condition.mode)
    if model.condition.mode == "os":
        rows = [condition_vector(model.condition, int(i)) for i in labels]
    else:
        rows = list(labels)
    return kept, np.stack(rows) if rows else np.zeros((0, model.condition.num_classes), np.float32)


# ---------------------------------------------------------------- commands

def cmd_ingest(args):
    if args.bundled:
        corpus = bundled_corpus()
        inputs = []
    elif args.synthetic is not None:
        spec = demo_corpus_spec()
        if args.synthetic_seed is not None:
            spec = type(spec)(spec.prototypes, spec.weights, spec.noise_rate, args.synthetic_seed)
        corpus = synth_corpus(spec, args.synthetic)
        inputs = []
    elif args.format == "shodan":
        try:
            with open(args.input, encoding="utf-8") as fh:
                corpus = group_shodan_banners(fh)
        except OSError as exc:
            raise IoFailure(f"cannot read {args.input}: {exc}") from None
        inputs = [args.input]
    else:
        corpus = read_corpus(args.input)
        inputs = [args.input]
    write_corpus(corpus, args.out)
    _say(f"wrote {len(corpus)} devices to {args.out}")
    return inputs, [args.out], args.synthetic_seed


def cmd_vocab(args):
    corpus = read_corpus(args.corpus)
    vocab = build_vocabulary(corpus, args.ports)
    vocab.save(args.out)
    return [args.corpus], [args.out], None


def cmd_train(args):
    from . import gan

    corpus = read_corpus(args.corpus)
    vocab = Vocabulary.load(args.vocab)
    condition = gan.ConditionSpec.for_mode(args.mode)
    devices, labels = training_labels(corpus, condition.mode)
    if len(devices) < len(corpus):
        _say(f"{len(corpus) - len(devices)} devices without a {condition.mode} label left out")
    if not devices:
        raise EmptyCorpus("no labelled devices to train on")
    hp = gan.Hyperparams(
        batch_size=args.batch_size, critic_iters=args.critic_iters, gp_coefficient=args.gp,
        learning_rate=args.lr, adam_beta1=args.beta1, adam_beta2=args.beta2,
        total_steps=args.steps, latent_dim=args.latent_dim, seed=args.seed,
        g_channels=tuple(args.g_channels), d_channels=tuple(args.d_channels),
    )

    def progress(step, report):
        if args.log_every and step % args.log_every == 0:
            _say(f"step {step}: critic {report.d_loss[-1]:.4f} generator {report.g_loss[-1]:.4f} "
                 f"penalty {report.penalty[-1]:.4f}")

    model, report = gan.train(encode_many(devices, vocab), labels, condition, hp, progress)
    out = gan.save_checkpoint(model, args.out)
    vocab.save(out / "vocab.json")
    with open(out / "training.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("step,critic_loss,generator_loss,penalty\n")
        for i, row in enumerate(zip(report.d_loss, report.g_loss, report.penalty), 1):
            fh.write(f"{i},{row[0]!r},{row[1]!r},{row[2]!r}\n")
    return [args.corpus, args.vocab], [out], args.seed


def cmd_sample(args):
    from . import gan

    model = gan.load_checkpoint(args.ckpt)
    label = _parse_label(model.condition.mode, args.label)
    samples = gan.sample(model, args.n, label, seed=args.seed)
    write_matrices(samples, args.out)
    return [args.ckpt], [args.out], args.seed


def cmd_eval(args):
    from . import evaluation, gan

    model = gan.load_checkpoint(args.ckpt)
    vocab = Vocabulary.load(args.vocab)
    corpus = read_corpus(args.corpus)
    rng = np.random.default_rng(args.seed)
    n_gen = max(max(args.sizes), args.prd_samples)

    if model.condition.conditional:
        label = _parse_label(model.condition.mode, args.label)
        if label is not None:
            devices, _ = training_labels(corpus, model.condition.mode)
            want = gan.condition_vector(model.condition, label)
            _, rows = _condition_rows(model, devices)
            devices = [d for d, r in zip(devices, rows) if np.array_equal(r, want)]
            conds = np.repeat(want[None, :], n_gen, axis=0)
        else:
            devices, rows = _condition_rows(model, corpus)
            if not devices:
                raise EmptyCorpus("no labelled devices to compare against")
            conds = rows[rng.integers(len(rows), size=n_gen)]
        if not devices:
            raise EmptyCorpus("no real devices carry the requested label")
        generated = gan.sample_conditioned(model, conds, seed=args.seed)
    else:
        if args.label is not None:
            raise DecoyForgeError("--label given for an unconditional checkpoint")
        devices = corpus
        generated = gan.sample(model, n_gen, seed=args.seed)

    real = encode_many(devices, vocab)
    if not len(real):
        raise EmptyCorpus("corpus is empty")
    k = min(args.prd_samples, len(real))
    real_prd = real[rng.choice(len(real), size=k, replace=False)]
    gen_prd = generated[:k]
    curves = [evaluation.prd_from_samples(real_prd, gen_prd, args.clusters, args.angles, args.seed,
                                          curve_id=model.condition.mode)]
    if args.baseline:
        baseline = random_valid(k, np.random.default_rng(args.seed + 1))
        curves.append(evaluation.prd_from_samples(real_prd, baseline, args.clusters, args.angles,
                                                  args.seed, curve_id="uniform-random"))
    table = evaluation.uniqueness_table(real, model, args.sizes, vocab, seed=args.seed, generated=generated)
    paths = evaluation.emit_report(curves, table, args.out)
    for c in curves:
        _say(f"{c.curve_id}: PRD area {c.area():.4f}")
    return [args.ckpt, args.corpus, args.vocab], [Path(args.out)], args.seed


def cmd_emit(args):
    from .honeyd import PersonalityMap, build_fleet, check_config

    samples = read_matrices(args.samples)
    vocab = Vocabulary.load(args.vocab)
    pmap = PersonalityMap.load(args.personalities)
    fleet, text = build_fleet(samples, vocab, pmap, args.pool)
    check_config(text)
    try:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {args.out}: {exc}") from None
    _say(f"wrote {len(fleet.decoys)} decoys to {args.out}")
    inputs = [args.samples, args.vocab] + ([args.personalities] if args.personalities else [])
    return inputs, [args.out], None


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog=PROG, description="Learn device configurations with WGAN-GP and emit HoneyD decoys.")
    p.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("ingest", help="normalise JSON Lines device records into a corpus file")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="JSON Lines input")
    src.add_argument("--bundled", action="store_true", help="copy the bundled synthetic corpus")
    src.add_argument("--synthetic", type=int, metavar="N", help="draw N devices from the bundled synthetic mixture")
    s.add_argument("--format", choices=("records", "shodan"), default="records",
                   help="'records': one device per line; 'shodan': one raw banner per line")
    s.add_argument("--synthetic-seed", type=int, default=None)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("vocab", help="build the encoding vocabulary of a corpus")
    s.add_argument("--corpus", required=True)
    s.add_argument("--ports", type=int, default=30, help="number of port columns to fill (<= 30)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_vocab)

    s = sub.add_parser("train", help="train a WGAN-GP model")
    s.add_argument("--corpus", required=True)
    s.add_argument("--vocab", required=True)
    s.add_argument("--mode", choices=("uncond", "os", "dt"), default="uncond")
    s.add_argument("--steps", type=int, default=11844)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--batch-size", type=int, default=64)
    s.add_argument("--critic-iters", type=int, default=3)
    s.add_argument("--gp", type=float, default=10.0, help="gradient penalty coefficient")
    s.add_argument("--lr", type=float, default=2e-4)
    s.add_argument("--beta1", type=float, default=0.5)
    s.add_argument("--beta2", type=float, default=0.9)
    s.add_argument("--latent-dim", type=int, default=128)
    s.add_argument("--g-channels", type=_int_list, default="256,128,64,32")
    s.add_argument("--d-channels", type=_int_list, default="32,64,128,256,256")
    s.add_argument("--log-every", type=int, default=100)
    s.add_argument("--out", required=True, help="checkpoint directory")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("sample", help="draw configuration matrices from a checkpoint")
    s.add_argument("--ckpt", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--label", help="OS label, or comma-separated device types")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("eval", help="PRD curves and uniqueness table against a real corpus")
    s.add_argument("--ckpt", required=True)
    s.add_argument("--corpus", required=True)
    s.add_argument("--vocab", required=True)
    s.add_argument("--clusters", type=int, default=20)
    s.add_argument("--angles", type=int, default=1001)
    s.add_argument("--sizes", type=_int_list, default=DEFAULT_SIZES)
    s.add_argument("--prd-samples", type=int, default=5000, help="samples per side for the PRD curve")
    s.add_argument("--label")
    s.add_argument("--no-baseline", dest="baseline", action="store_false",
                   help="skip the uniform-random reference curve")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="report directory")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("emit", help="render samples as a HoneyD configuration")
    s.add_argument("--samples", required=True)
    s.add_argument("--vocab", required=True)
    s.add_argument("--personalities", help="JSON label -> personality map (bundled map if omitted)")
    s.add_argument("--pool", required=True, help="address range in CIDR notation")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_emit)

    _apply_environment(sub)
    return p


def _apply_environment(sub) -> None:
    for parser in sub.choices.values():
        for action in parser._actions:
            if action.required or not action.option_strings or action.dest == "help":
                continue
            value = os.environ.get(f"DECOYFORGE_{action.dest.upper()}")
            if value is None:
                continue
            if action.nargs == 0:
                # flags: the variable states the value of the destination
                value = value.strip().lower() not in ("", "0", "false", "no", "off")
            action.default = value


def dispatch(argv=None) -> int:
    """Run one command; 0 on success, 1 on domain errors, 2 on usage errors."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = _now()
    try:
        inputs, outputs, seed = args.func(args)
        write_manifest(Path(outputs[0]), [PROG, *argv], seed, inputs, outputs, started)
    except (DecoyForgeError, ValueError) as exc:
        msg = " ".join(str(exc).split())
        print(f"{PROG}: error: {msg}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
