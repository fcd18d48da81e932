"""Command-line surface for the pipeline.

Subcommands: ``encode`` (dataset to DNA sequences), ``imagize`` (sequences
to image files), ``synth`` (synthetic dataset), ``train`` (fit and score
the compact CNN), ``eval`` (score a checkpoint), ``features`` (account
feature CSV). Every command takes a JSON config file plus flag overrides
(flags win), writes all artifacts under ``--out``, and echoes its
effective configuration to ``<out>/config.json``. The echo leaves out the
output path itself so reruns into fresh directories stay byte-identical.

Exit codes: 0 success, 1 runtime failure, 2 bad input or configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .data import (LabeledAccount, SplitAssignment, SynthConfig, assign_splits,
                   format_timestamp, generate_synthetic, load_dataset,
                   parse_timestamp, save_dataset)
from .dna import (DEFAULT_ALPHABET, AccountTimeline, Alphabet, DnaSequence,
                  encode_timeline)
from .errors import (BotDnaError, ConfigError, EmptySplit, InputError,
                     IoFailure, SchemaError, ShapeMismatch)
from .features import (AccountProfile, FeatureVector, SupertmlLayout,
                       extract_features, read_features_csv, render_supertml,
                       write_features_csv)
from .imaging import (Palette, image_side, read_image, render_sequence,
                      write_image)
from .metrics import LABEL_BOT, LABEL_HUMAN, metrics_csv, metrics_table
from .nn.model import (default_layer_specs, init_model, load_checkpoint,
                       save_checkpoint)
from .nn.train import TrainConfig, evaluate, train
from .plotting import save_confusion_matrix, save_loss_curves

_DEFAULTS: dict[str, dict] = {
    "encode": {"dataset": None, "format": "jsonl", "alphabet": None,
               "seed": 0, "out": None},
    "imagize": {"sequences": None, "mode": "plain", "format": "pgm",
                "features": None, "dataset": None, "reference_time": None,
                "canvas_side": 224, "panel_split": 0.6, "columns": 2,
                "glyph_scale": 1, "value_precision": 4, "seed": 0,
                "out": None},
    "synth": {"n_bots": 500, "n_humans": 500, "min_length": 200,
              "max_length": 1000, "n_templates": 5, "noise_rate": 0.05,
              "format": "jsonl", "seed": 0, "out": None},
    "train": {"images": None, "ratios": [0.6, 0.3, 0.1], "max_epochs": 50,
              "batch_size": 32, "learning_rate": 0.01, "momentum": 0.9,
              "monitor": "val_loss", "patience": 5, "precision": "single",
              "seed": 0, "out": None},
    "eval": {"checkpoint": None, "images": None, "split": "all",
             "splits": None, "seed": 0, "out": None},
    "features": {"dataset": None, "format": "jsonl", "reference_time": None,
                 "seed": 0, "out": None},
}

CHECKPOINT_NAME = "checkpoint.bin"


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------

def _load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file '{path}': {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file '{path}' is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file '{path}' must hold a JSON object")
    return data


def _merge_config(command: str, args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags."""
    cfg = dict(_DEFAULTS[command])
    if args.config:
        file_cfg = _load_config_file(args.config)
        unknown = sorted(set(file_cfg) - set(cfg))
        if unknown:
            raise ConfigError(
                f"unknown config keys for '{command}': {', '.join(unknown)}"
            )
        cfg.update(file_cfg)
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if not cfg.get("out"):
        raise ConfigError("an output directory is required (--out)")
    return cfg


def _prepare_out(cfg: dict) -> Path:
    out = Path(cfg["out"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(out, exc) from exc
    return out


def _echo_config(command: str, cfg: dict, out: Path) -> None:
    echo = {k: v for k, v in cfg.items() if k != "out"}
    echo["command"] = command
    echo["version"] = __version__
    payload = json.dumps(echo, sort_keys=True, indent=2) + "\n"
    try:
        (out / "config.json").write_text(payload)
    except OSError as exc:
        raise IoFailure(out / "config.json", exc) from exc


def _alphabet_from_config(value) -> Alphabet:
    if value is None:
        return DEFAULT_ALPHABET
    try:
        symbols = tuple((str(s), str(k)) for s, k in value)
        return Alphabet(symbols=symbols, alphabet_id="custom")
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid alphabet config: {exc}") from exc


def _sanitize_id(account_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", account_id)


def _parse_ratios(value) -> tuple[float, float, float]:
    if isinstance(value, str):
        parts = value.split(",")
    else:
        parts = list(value)
    if len(parts) != 3:
        raise ConfigError(f"ratios need exactly three values, got {value!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"ratios must be numbers, got {value!r}") from exc


def _derive_reference_time(accounts: list[LabeledAccount]) -> datetime:
    """Latest event timestamp, falling back to the latest account creation."""
    stamps = [e.timestamp for a in accounts for e in a.timeline.events]
    if not stamps:
        stamps = [a.profile.created_at for a in accounts]
    if not stamps:
        return datetime(1970, 1, 1, tzinfo=timezone.utc)
    return max(stamps)


def _resolve_reference_time(cfg: dict, accounts: list[LabeledAccount]) -> datetime:
    if cfg.get("reference_time"):
        return parse_timestamp(cfg["reference_time"], field_name="reference_time")
    return _derive_reference_time(accounts)


# ---------------------------------------------------------------------------
# Sequence file format: CSV with id,label,split,sequence
# ---------------------------------------------------------------------------

_SEQ_HEADER = ["id", "label", "split", "sequence"]


def _write_sequences_csv(rows: list[tuple[str, str, str, str]], path: Path) -> None:
    try:
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(_SEQ_HEADER)
            writer.writerows(rows)
    except OSError as exc:
        raise IoFailure(path, exc) from exc


def _read_sequences_csv(path: Path) -> list[dict]:
    try:
        with path.open(newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != _SEQ_HEADER:
                raise SchemaError(
                    f"expected sequence CSV header {','.join(_SEQ_HEADER)}"
                )
            return [dict(zip(_SEQ_HEADER, row)) for row in reader if row]
    except OSError as exc:
        raise IoFailure(path, exc) from exc


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_encode(cfg: dict) -> int:
    if not cfg.get("dataset"):
        raise ConfigError("encode needs a dataset path (--dataset)")
    out = _prepare_out(cfg)
    alphabet = _alphabet_from_config(cfg.get("alphabet"))
    accounts = load_dataset(cfg["dataset"], cfg["format"])
    rows = []
    max_len = 0
    for account in accounts:
        seq = encode_timeline(account.timeline, alphabet)
        max_len = max(max_len, len(seq))
        rows.append((account.account_id, account.label or "",
                     account.provided_split or "", seq.chars))
    _write_sequences_csv(rows, out / "sequences.csv")
    manifest = {
        "alphabet_id": alphabet.alphabet_id,
        "symbols": [list(pair) for pair in alphabet.symbols],
        "n_accounts": len(rows),
        "max_length": max_len,
        "image_side": image_side(max(1, max_len)),
    }
    _write_json(manifest, out / "manifest.json")
    _echo_config("encode", cfg, out)
    print(f"encoded {len(rows)} accounts (max length {max_len}) "
          f"-> {out / 'sequences.csv'}")
    return 0


def _write_json(payload: dict, path: Path) -> None:
    try:
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    except OSError as exc:
        raise IoFailure(path, exc) from exc


def _read_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise IoFailure(path, exc) from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"'{path}' is not valid JSON: {exc}") from exc


def _resolve_sequences(cfg: dict) -> tuple[list[dict], Alphabet]:
    source = Path(cfg["sequences"])
    if source.is_dir():
        seq_path = source / "sequences.csv"
        manifest_path = source / "manifest.json"
    else:
        seq_path = source
        manifest_path = source.parent / "manifest.json"
    rows = _read_sequences_csv(seq_path)
    if manifest_path.exists():
        manifest = _read_json(manifest_path)
        symbols = tuple((s, k) for s, k in manifest["symbols"])
        alphabet = Alphabet(symbols=symbols,
                            alphabet_id=manifest.get("alphabet_id", "custom"))
    else:
        alphabet = DEFAULT_ALPHABET
    return rows, alphabet


def _features_for_imagize(cfg: dict, ids: list[str]) -> dict[str, FeatureVector]:
    if cfg.get("features"):
        table = read_features_csv(cfg["features"])
    elif cfg.get("dataset"):
        accounts = load_dataset(cfg["dataset"], "jsonl")
        reference = _resolve_reference_time(cfg, accounts)
        table = {a.account_id: extract_features(a.profile, a.timeline, reference)
                 for a in accounts}
    else:
        raise ConfigError(
            "supertml mode needs --features <csv> or --dataset <jsonl>"
        )
    missing = [i for i in ids if i not in table]
    if missing:
        raise SchemaError(f"no features for account '{missing[0]}' "
                          f"({len(missing)} missing in total)")
    return table


def cmd_imagize(cfg: dict) -> int:
    if not cfg.get("sequences"):
        raise ConfigError("imagize needs a sequences path (--sequences)")
    if cfg["mode"] not in ("plain", "supertml"):
        raise ConfigError(f"unknown imagize mode '{cfg['mode']}'")
    if cfg["format"] not in ("pgm", "png"):
        raise ConfigError(f"unknown image format '{cfg['format']}'")
    out = _prepare_out(cfg)
    rows, alphabet = _resolve_sequences(cfg)
    palette = Palette.for_alphabet(alphabet)
    max_len = max((len(r["sequence"]) for r in rows), default=0)
    dna_side = image_side(max(1, max_len))

    if cfg["mode"] == "supertml":
        layout = SupertmlLayout(
            canvas_side=int(cfg["canvas_side"]),
            panel_split=float(cfg["panel_split"]),
            columns=int(cfg["columns"]),
            glyph_scale=int(cfg["glyph_scale"]),
            value_precision=int(cfg["value_precision"]),
        )
        features = _features_for_imagize(cfg, [r["id"] for r in rows])
        side = layout.canvas_side
    else:
        layout = None
        features = {}
        side = dna_side

    images_dir = out / "images"
    try:
        images_dir.mkdir(exist_ok=True)
    except OSError as exc:
        raise IoFailure(images_dir, exc) from exc

    entries = []
    for i, row in enumerate(rows):
        seq = DnaSequence(row["id"], row["sequence"], alphabet.alphabet_id)
        if cfg["mode"] == "plain":
            image = render_sequence(seq, side, palette)
        else:
            image = render_supertml(features[row["id"]], seq, layout, palette,
                                    dna_side=dna_side)
        filename = f"{i:04d}_{_sanitize_id(row['id'])}.{cfg['format']}"
        write_image(image, images_dir / filename, cfg["format"])
        entries.append({
            "id": row["id"],
            "file": f"images/{filename}",
            "label": row["label"] or None,
            "split": row["split"] or None,
            "length": len(row["sequence"]),
        })

    manifest = {
        "mode": cfg["mode"],
        "format": cfg["format"],
        "side": side,
        "dna_side": dna_side,
        "alphabet_id": alphabet.alphabet_id,
        "palette": palette.as_dict(),
        "padding_intensity": palette.padding_intensity,
        "images": entries,
    }
    _write_json(manifest, out / "manifest.json")
    _echo_config("imagize", cfg, out)
    print(f"wrote {len(entries)} {side}x{side} {cfg['format']} images -> {images_dir}")
    return 0


def cmd_synth(cfg: dict) -> int:
    out = _prepare_out(cfg)
    synth = SynthConfig(
        n_bots=int(cfg["n_bots"]), n_humans=int(cfg["n_humans"]),
        min_length=int(cfg["min_length"]), max_length=int(cfg["max_length"]),
        n_templates=int(cfg["n_templates"]),
        noise_rate=float(cfg["noise_rate"]), seed=int(cfg["seed"]),
    )
    accounts = generate_synthetic(synth)
    suffix = "jsonl" if cfg["format"] == "jsonl" else "csv"
    dest = out / f"dataset.{suffix}"
    save_dataset(accounts, dest, cfg["format"])
    _echo_config("synth", cfg, out)
    print(f"wrote {len(accounts)} synthetic accounts "
          f"({synth.n_bots} bots, {synth.n_humans} humans) -> {dest}")
    return 0


def _load_image_dir(images_dir: Path) -> tuple[dict, list[dict], np.ndarray]:
    manifest = _read_json(images_dir / "manifest.json")
    entries = manifest["images"]
    side = int(manifest["side"])
    stack = np.zeros((len(entries), side, side), dtype=np.uint8)
    for i, entry in enumerate(entries):
        pixels = read_image(images_dir / entry["file"], manifest["format"])
        if pixels.shape != (side, side):
            raise ShapeMismatch(
                f"image '{entry['file']}' is {pixels.shape}, manifest says "
                f"({side}, {side})"
            )
        stack[i] = pixels
    return manifest, entries, stack


def _require_labels(entries: list[dict], command: str) -> np.ndarray:
    labels = []
    for entry in entries:
        if entry.get("label") not in (LABEL_BOT, LABEL_HUMAN):
            raise SchemaError(
                f"account '{entry['id']}' has no label; {command} requires "
                "labeled accounts"
            )
        labels.append(1 if entry["label"] == LABEL_BOT else 0)
    return np.asarray(labels, dtype=np.int64)


def _split_indices(entries: list[dict], ratios, seed: int,
                   ) -> tuple[dict[str, str], SplitAssignment]:
    """Final split per account id, honoring any split already in the manifest."""
    accounts = [
        LabeledAccount(
            profile=AccountProfile(),
            timeline=AccountTimeline(account_id=e["id"]),
            label=e.get("label"),
            provided_split=e.get("split"),
        )
        for e in entries
    ]
    assignment = assign_splits(accounts, ratios, seed)
    return dict(assignment.by_account), assignment


def _read_splits_csv(path: Path) -> dict[str, str]:
    """id -> split from a splits.csv written by the train command."""
    try:
        with path.open(newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != ["id", "label", "split"]:
                raise SchemaError("expected splits CSV header id,label,split")
            return {row[0]: row[2] for row in reader if row}
    except OSError as exc:
        raise IoFailure(path, exc) from exc


def _write_predictions_csv(path: Path, entries: list[dict], p_bot: np.ndarray,
                           predictions: np.ndarray) -> None:
    try:
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["id", "label", "p_bot", "predicted"])
            for entry, p, pred in zip(entries, p_bot, predictions):
                writer.writerow([entry["id"], entry.get("label") or "",
                                 repr(float(p)),
                                 LABEL_BOT if pred else LABEL_HUMAN])
    except OSError as exc:
        raise IoFailure(path, exc) from exc


def cmd_train(cfg: dict) -> int:
    if not cfg.get("images"):
        raise ConfigError("train needs an imagize output directory (--images)")
    if cfg["precision"] not in ("single", "double"):
        raise ConfigError(f"unknown precision '{cfg['precision']}'")
    out = _prepare_out(cfg)
    ratios = _parse_ratios(cfg["ratios"])
    manifest, entries, stack = _load_image_dir(Path(cfg["images"]))
    labels = _require_labels(entries, "train")
    split_of, _ = _split_indices(entries, ratios, int(cfg["seed"]))
    splits = np.array([split_of[e["id"]] for e in entries])

    try:
        with (out / "splits.csv").open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["id", "label", "split"])
            for entry, split in zip(entries, splits):
                writer.writerow([entry["id"], entry["label"], split])
    except OSError as exc:
        raise IoFailure(out / "splits.csv", exc) from exc

    dtype = np.float64 if cfg["precision"] == "double" else np.float32
    side = int(manifest["side"])
    model = init_model(default_layer_specs(), side, seed=int(cfg["seed"]),
                       dtype=dtype)
    config = TrainConfig(
        max_epochs=int(cfg["max_epochs"]), batch_size=int(cfg["batch_size"]),
        learning_rate=float(cfg["learning_rate"]),
        momentum=float(cfg["momentum"]), monitor=cfg["monitor"],
        patience=int(cfg["patience"]), seed=int(cfg["seed"]),
    )

    masks = {name: splits == name for name in ("train", "val", "test")}
    history = train(
        model,
        stack[masks["train"]], labels[masks["train"]],
        stack[masks["val"]], labels[masks["val"]],
        config,
        on_epoch=lambda r: print(
            f"epoch {r.epoch:3d}  train_loss {r.train_loss:.4f}  "
            f"train_acc {r.train_accuracy:.4f}  val_loss {r.val_loss:.4f}  "
            f"val_acc {r.val_accuracy:.4f}"
        ),
    )
    print(f"stopped after epoch {history.stopped_epoch} "
          f"({history.stop_reason}); best epoch {history.best_epoch}")

    save_checkpoint(model, out / CHECKPOINT_NAME)
    history.write_csv(out / "history.csv")
    save_loss_curves(history, out / "loss_curves.png")

    test_mask = masks["test"]
    if not test_mask.any():
        raise EmptySplit("test split is empty; nothing to evaluate")
    result = evaluate(model, stack[test_mask], labels[test_mask],
                      config.batch_size)
    table = metrics_table(result.report)
    print(table, end="")
    try:
        (out / "metrics.txt").write_text(table)
        (out / "metrics.csv").write_text(metrics_csv(result.report))
    except OSError as exc:
        raise IoFailure(out / "metrics.txt", exc) from exc
    test_entries = [e for e, m in zip(entries, test_mask) if m]
    _write_predictions_csv(out / "predictions.csv", test_entries,
                           result.p_bot, result.predictions)
    save_confusion_matrix(result.confusion, out / "confusion_matrix.png",
                          title="Test confusion matrix")
    _echo_config("train", cfg, out)
    return 0


def cmd_eval(cfg: dict) -> int:
    if not cfg.get("checkpoint") or not cfg.get("images"):
        raise ConfigError("eval needs --checkpoint and --images")
    if cfg["split"] not in ("all", "train", "val", "test"):
        raise ConfigError(f"unknown split '{cfg['split']}'")
    out = _prepare_out(cfg)
    model = load_checkpoint(cfg["checkpoint"])
    manifest, entries, stack = _load_image_dir(Path(cfg["images"]))
    if int(manifest["side"]) != model.input_side:
        raise ShapeMismatch(
            f"images are {manifest['side']}x{manifest['side']} but the "
            f"checkpoint expects {model.input_side}x{model.input_side}"
        )
    if cfg.get("splits"):
        split_of = _read_splits_csv(Path(cfg["splits"]))
        entries = [dict(e, split=split_of.get(e["id"], e.get("split")))
                   for e in entries]
    if cfg["split"] != "all":
        keep = [i for i, e in enumerate(entries) if e.get("split") == cfg["split"]]
        entries = [entries[i] for i in keep]
        stack = stack[keep]
    if not entries:
        raise SchemaError(f"no images in split '{cfg['split']}'")
    labels = _require_labels(entries, "eval")
    result = evaluate(model, stack, labels)
    table = metrics_table(result.report)
    print(table, end="")
    try:
        (out / "metrics.txt").write_text(table)
        (out / "metrics.csv").write_text(metrics_csv(result.report))
    except OSError as exc:
        raise IoFailure(out / "metrics.txt", exc) from exc
    _write_predictions_csv(out / "predictions.csv", entries, result.p_bot,
                           result.predictions)
    save_confusion_matrix(result.confusion, out / "confusion_matrix.png",
                          title=f"Confusion matrix ({cfg['split']})")
    _echo_config("eval", cfg, out)
    return 0


def cmd_features(cfg: dict) -> int:
    if not cfg.get("dataset"):
        raise ConfigError("features needs a dataset path (--dataset)")
    out = _prepare_out(cfg)
    accounts = load_dataset(cfg["dataset"], cfg["format"])
    reference = _resolve_reference_time(cfg, accounts)
    rows = [(a.account_id, extract_features(a.profile, a.timeline, reference))
            for a in accounts]
    write_features_csv(rows, out / "features.csv")
    cfg = dict(cfg)
    cfg["reference_time"] = format_timestamp(reference)
    _echo_config("features", cfg, out)
    print(f"wrote features for {len(rows)} accounts -> {out / 'features.csv'}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="botdna",
        description="Behavioral DNA images and a compact CNN bot classifier.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="dataset -> DNA sequence CSV")
    p.add_argument("--dataset", help="input dataset path")
    p.add_argument("--format", choices=("jsonl", "csv"),
                   help="dataset format (default jsonl)")
    _add_common(p)

    p = sub.add_parser("imagize", help="sequence CSV -> image directory")
    p.add_argument("--sequences", help="encode output directory or sequences.csv")
    p.add_argument("--mode", choices=("plain", "supertml"))
    p.add_argument("--format", choices=("pgm", "png"),
                   help="image format (default pgm)")
    p.add_argument("--features", help="features CSV (supertml mode)")
    p.add_argument("--dataset", help="dataset JSONL to compute features from "
                                     "(supertml mode)")
    p.add_argument("--reference-time", dest="reference_time",
                   help="ISO-8601 now for feature rates")
    p.add_argument("--canvas-side", dest="canvas_side", type=int)
    p.add_argument("--panel-split", dest="panel_split", type=float)
    p.add_argument("--columns", type=int)
    p.add_argument("--glyph-scale", dest="glyph_scale", type=int)
    p.add_argument("--value-precision", dest="value_precision", type=int)
    _add_common(p)

    p = sub.add_parser("synth", help="generate a synthetic labeled dataset")
    p.add_argument("--n-bots", dest="n_bots", type=int)
    p.add_argument("--n-humans", dest="n_humans", type=int)
    p.add_argument("--min-length", dest="min_length", type=int)
    p.add_argument("--max-length", dest="max_length", type=int)
    p.add_argument("--n-templates", dest="n_templates", type=int)
    p.add_argument("--noise-rate", dest="noise_rate", type=float)
    p.add_argument("--format", choices=("jsonl", "csv"),
                   help="dataset format (default jsonl)")
    _add_common(p)

    p = sub.add_parser("train", help="fit the compact CNN on an image directory")
    p.add_argument("--images", help="imagize output directory")
    p.add_argument("--ratios", help="train,val,test ratios (default 0.6,0.3,0.1)")
    p.add_argument("--max-epochs", dest="max_epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--momentum", type=float)
    p.add_argument("--monitor", choices=("val_loss", "val_accuracy"))
    p.add_argument("--patience", type=int)
    p.add_argument("--precision", choices=("single", "double"))
    _add_common(p)

    p = sub.add_parser("eval", help="score a checkpoint on an image directory")
    p.add_argument("--checkpoint", help="checkpoint file from train")
    p.add_argument("--images", help="imagize output directory")
    p.add_argument("--split", choices=("all", "train", "val", "test"))
    p.add_argument("--splits", help="splits.csv from a train run, to filter by")
    _add_common(p)

    p = sub.add_parser("features", help="dataset -> 26-feature CSV")
    p.add_argument("--dataset", help="input dataset path")
    p.add_argument("--format", choices=("jsonl", "csv"),
                   help="dataset format (default jsonl)")
    p.add_argument("--reference-time", dest="reference_time",
                   help="ISO-8601 now for feature rates")
    _add_common(p)

    return parser


_HANDLERS = {
    "encode": cmd_encode,
    "imagize": cmd_imagize,
    "synth": cmd_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "features": cmd_features,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return int(exc.code or 0)
    try:
        cfg = _merge_config(args.command, args)
        return _HANDLERS[args.command](cfg)
    except InputError as exc:
        print(f"botdna {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (BotDnaError, OSError) as exc:
        print(f"botdna {args.command}: failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
