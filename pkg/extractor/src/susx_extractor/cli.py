"""CLI: encode image manifests and prompt files into SUSX banks."""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np
from PIL import Image, UnidentifiedImageError

from .encoders import EncoderUnavailable, UnknownEncoder, get_encoder
from .format import write_bank


class ManifestError(Exception):
    pass


def read_manifest(path) -> list[tuple[str, int]]:
    """Parse a ``path,label`` CSV; a ``path,label`` header row is allowed."""
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (lineno == 1 and row[:2] == ["path", "label"]):
                continue
            if len(row) < 2:
                raise ManifestError(f"line {lineno}: expected path,label")
            try:
                label = int(row[1])
            except ValueError:
                raise ManifestError(f"line {lineno}: label {row[1]!r} is not an integer")
            if label < 0:
                raise ManifestError(f"line {lineno}: negative label")
            entries.append((row[0], label))
    if not entries:
        raise ManifestError("manifest has no entries")
    return entries


def read_prompt_file(path) -> list[tuple[int, str]]:
    """Parse ``class_index<TAB>prompt text`` lines."""
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise ManifestError(f"line {lineno}: expected class_index<TAB>prompt")
            idx, _, text = line.partition("\t")
            try:
                c = int(idx)
            except ValueError:
                raise ManifestError(f"line {lineno}: class index {idx!r} is not an integer")
            if c < 0 or not text:
                raise ManifestError(f"line {lineno}: bad class index or empty prompt")
            entries.append((c, text))
    if not entries:
        raise ManifestError("prompt file has no entries")
    return entries


def cmd_extract_images(args) -> int:
    encoder = get_encoder(args.encoder)
    entries = read_manifest(args.manifest)
    images, labels, ids, skipped = [], [], [], []
    for path, label in entries:
        try:
            with Image.open(path) as img:
                images.append(img.convert("RGB"))
        except (OSError, UnidentifiedImageError) as e:
            print(f"warning: skipping unreadable image {path}: {e}", file=sys.stderr)
            skipped.append(path)
            continue
        labels.append(label)
        ids.append(path)
    if not images:
        print("ManifestError:no readable images in manifest", file=sys.stderr)
        return 1
    feats = np.zeros((0, encoder.dim))
    rows = []
    for start in range(0, len(images), args.batch_size):
        rows.append(encoder.encode_images(images[start:start + args.batch_size]))
    feats = np.vstack(rows)
    meta = {
        "encoder": encoder.name,
        "preprocessing": encoder.preprocessing,
        "source_manifest": str(args.manifest),
        "skipped_count": str(len(skipped)),
    }
    if skipped:
        meta["skipped_paths"] = ";".join(skipped)
    write_bank(args.out, feats, labels=labels, ids=ids, normalized=False, meta=meta)
    return 0


def cmd_extract_prompts(args) -> int:
    encoder = get_encoder(args.encoder)
    entries = read_prompt_file(args.prompts)
    labels = [c for c, _ in entries]
    texts = [t for _, t in entries]
    rows = []
    for start in range(0, len(texts), args.batch_size):
        rows.append(encoder.encode_texts(texts[start:start + args.batch_size]))
    feats = np.vstack(rows)
    meta = {
        "encoder": encoder.name,
        "source_prompts": str(args.prompts),
        "num_classes": str(max(labels) + 1),
    }
    write_bank(args.out, feats, labels=labels, ids=texts, normalized=False, meta=meta)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="susx-extract",
                                description="Encode images and prompts into SUSX banks")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("extract-images", help="encode a path,label manifest")
    sp.add_argument("manifest")
    sp.add_argument("--encoder", required=True)
    sp.add_argument("--batch-size", type=int, default=32)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_extract_images)

    sp = sub.add_parser("extract-prompts", help="encode a class<TAB>prompt file")
    sp.add_argument("prompts")
    sp.add_argument("--encoder", required=True)
    sp.add_argument("--batch-size", type=int, default=64)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_extract_prompts)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ManifestError as e:
        print(f"ManifestError:{e}", file=sys.stderr)
        return 1
    except UnknownEncoder as e:
        print(f"UnknownEncoder:{e}", file=sys.stderr)
        return 1
    except EncoderUnavailable as e:
        print(f"EncoderUnavailable:{e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"IoFailure:{e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
