"""Command-line surface binding the library into reproducible runs.

Every command is deterministic: identical inputs and flags produce
byte-identical output files. Reports identify their inputs by content
hash and never embed wall-clock time.
"""
from __future__ import annotations

import argparse
import hashlib
import sys

import numpy as np

from . import bank as bankio
from .adapter import HyperParams
from .classifier import (
    ClassVocabulary,
    build_classifier,
    classifier_from_bank,
    classifier_to_bank,
    groups_from_bank,
    modality_gap_stats,
)
from .curation import diversity, ingest_support, retrieve_support, sample_few_shot
from .errors import InvalidGrid, SusxError
from .harness import SweepGrid, evaluate, grid_sweep

REPORT_HEADER = "susx-report v1"


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_report(path, fields: list[tuple[str, str]], csv_rows=None) -> None:
    lines = [REPORT_HEADER]
    lines += [f"{k}\t{v}" for k, v in fields]
    if csv_rows is not None:
        lines.append("alpha,beta,gamma,tau,val_accuracy")
        for r in csv_rows:
            lines.append(",".join(_fmt(r[k]) for k in
                                  ("alpha", "beta", "gamma", "tau", "val_accuracy")))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _read_vocabulary(path) -> ClassVocabulary:
    with open(path, encoding="utf-8") as fh:
        names = [line.rstrip("\n") for line in fh if line.strip()]
    return ClassVocabulary(tuple(names))


def _read_grid(path) -> SweepGrid:
    """Parse a key=value grid file; values are comma-separated lists."""
    values = {"alpha": None, "beta": None, "gamma": None, "tau": None}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidGrid(f"line {lineno}: expected key=value")
            key, _, rhs = line.partition("=")
            key = key.strip()
            if key not in values:
                raise InvalidGrid(f"line {lineno}: unknown key {key!r}")
            try:
                values[key] = tuple(float(v) for v in rhs.split(",") if v.strip())
            except ValueError:
                raise InvalidGrid(f"line {lineno}: non-numeric value in {rhs!r}")
            if not values[key]:
                raise InvalidGrid(f"line {lineno}: empty value list")
    defaults = SweepGrid.default()
    return SweepGrid(
        alpha_values=values["alpha"] or defaults.alpha_values,
        beta_values=values["beta"] or defaults.beta_values,
        gamma_values=values["gamma"] or defaults.gamma_values,
        tau_values=values["tau"] or defaults.tau_values,
    )


def _load_support(args, num_classes: int):
    support_bank = bankio.load_bank(args.support_bank)
    support = ingest_support(support_bank, num_classes)
    if getattr(args, "k_shot", None):
        sampled = sample_few_shot(support.to_bank(), args.k_shot, args.seed)
        return sampled, _sha256(args.support_bank)
    return support, _sha256(args.support_bank)


def cmd_normalize(args) -> int:
    b = bankio.load_bank(args.in_bank)
    bankio.save_bank(bankio.l2_normalize(b), args.out)
    return 0


def cmd_build_classifier(args) -> int:
    vocab = _read_vocabulary(args.vocabulary)
    prompts = bankio.load_bank(args.prompt_bank)
    weights = build_classifier(groups_from_bank(prompts, vocab), vocab)
    bankio.save_bank(classifier_to_bank(weights), args.out)
    return 0


def cmd_retrieve(args) -> int:
    candidates = bankio.load_bank(args.candidates)
    W = classifier_from_bank(bankio.load_bank(args.classifier))
    support = retrieve_support(candidates, W, args.n_per_class, dedup=args.dedup)
    bankio.save_bank(support.to_bank(), args.out)
    return 0


def cmd_predict(args) -> int:
    test = bankio.load_bank(args.test_bank)
    W = classifier_from_bank(bankio.load_bank(args.classifier))
    hp = HyperParams(alpha=args.alpha, beta=args.beta,
                     gamma=args.gamma, tau=args.tau)
    support = None
    support_hash = ""
    if args.mode in ("tip", "tipx"):
        if args.support_bank is None:
            raise _Usage(f"mode {args.mode} requires --support-bank")
        support, support_hash = _load_support(args, W.vocabulary.num_classes)
    report = evaluate(test, None, W, support, hp, mode=args.mode)
    fields = [
        ("mode", report.mode),
        ("test_bank_sha256", _sha256(args.test_bank)),
        ("classifier_sha256", _sha256(args.classifier)),
        ("support_bank_sha256", support_hash),
        ("alpha", _fmt(hp.alpha)), ("beta", _fmt(hp.beta)),
        ("gamma", _fmt(hp.gamma)), ("tau", _fmt(hp.tau)),
        ("num_test", str(report.num_test)),
        ("accuracy", _fmt(report.accuracy)),
    ]
    _write_report(args.out, fields)
    return 0


def cmd_sweep(args) -> int:
    val = bankio.load_bank(args.val_bank)
    W = classifier_from_bank(bankio.load_bank(args.classifier))
    support, support_hash = _load_support(args, W.vocabulary.num_classes)
    grid = _read_grid(args.grid) if args.grid else SweepGrid.default()
    best, best_acc, table = grid_sweep(val, None, W, support, grid)
    fields = [
        ("mode", "tipx-sweep"),
        ("val_bank_sha256", _sha256(args.val_bank)),
        ("classifier_sha256", _sha256(args.classifier)),
        ("support_bank_sha256", support_hash),
        ("grid_points", str(len(table))),
        ("best_alpha", _fmt(best.alpha)), ("best_beta", _fmt(best.beta)),
        ("best_gamma", _fmt(best.gamma)), ("best_tau", _fmt(best.tau)),
        ("best_val_accuracy", _fmt(best_acc)),
    ]
    _write_report(args.out, fields, csv_rows=table)
    return 0


def cmd_diversity(args) -> int:
    b = bankio.load_bank(args.support_bank)
    if b.labels is None:
        raise _Usage("diversity requires a labeled support bank")
    num_classes = int(b.labels.max()) + 1 if b.count else 0
    support = ingest_support(b, num_classes)
    print(_fmt(diversity(support)))
    return 0


def cmd_gap_stats(args) -> int:
    b = bankio.load_bank(args.image_bank)
    W = classifier_from_bank(bankio.load_bank(args.classifier))
    g = modality_gap_stats(b, W)
    fields = [
        ("image_bank_sha256", _sha256(args.image_bank)),
        ("classifier_sha256", _sha256(args.classifier)),
        ("image_image_mean", _fmt(g.image_image[0])),
        ("image_image_var", _fmt(g.image_image[1])),
        ("image_image_pairs", str(g.image_image_pairs)),
        ("text_text_mean", _fmt(g.text_text[0])),
        ("text_text_var", _fmt(g.text_text[1])),
        ("text_text_pairs", str(g.text_text_pairs)),
        ("image_text_mean", _fmt(g.image_text[0])),
        ("image_text_var", _fmt(g.image_text[1])),
        ("image_text_pairs", str(g.image_text_pairs)),
    ]
    _write_report(args.out, fields)
    return 0


class _Usage(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="susx",
                                description="Training-free adaptation over embedding banks")
    p.add_argument("--threads", type=int, default=0,
                   help="cap worker threads (0 = library default)")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("normalize", help="L2-normalize a bank")
    sp.add_argument("in_bank")
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_normalize)

    sp = sub.add_parser("build-classifier", help="average prompt groups into classifier rows")
    sp.add_argument("prompt_bank")
    sp.add_argument("vocabulary")
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_build_classifier)

    sp = sub.add_parser("retrieve", help="top-N per class support retrieval")
    sp.add_argument("candidates")
    sp.add_argument("--classifier", required=True)
    sp.add_argument("--n-per-class", type=int, required=True)
    sp.add_argument("--dedup", action="store_true")
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_retrieve)

    sp = sub.add_parser("predict", help="evaluate one mode at fixed hyperparameters")
    sp.add_argument("--test-bank", required=True)
    sp.add_argument("--classifier", required=True)
    sp.add_argument("--support-bank")
    sp.add_argument("--mode", choices=["zs", "tip", "tipx"], default="zs")
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--gamma", type=float, default=1.0)
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--k-shot", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_predict)

    sp = sub.add_parser("sweep", help="validation grid search over TIP-X hyperparameters")
    sp.add_argument("val_bank")
    sp.add_argument("--classifier", required=True)
    sp.add_argument("--support-bank", required=True)
    sp.add_argument("--grid", help="key=value grid file (alpha/beta/gamma/tau lists)")
    sp.add_argument("--k-shot", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("diversity", help="1 - mean per-class pairwise cosine")
    sp.add_argument("support_bank")
    sp.set_defaults(fn=cmd_diversity)

    sp = sub.add_parser("gap-stats", help="intra/inter-modal similarity statistics")
    sp.add_argument("image_bank")
    sp.add_argument("--classifier", required=True)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_gap_stats)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads and args.threads > 0:
        try:
            from threadpoolctl import threadpool_limits
            threadpool_limits(args.threads)
        except ImportError:
            pass
    try:
        return args.fn(args)
    except _Usage as e:
        print(f"UsageError:{e}", file=sys.stderr)
        return 2
    except SusxError as e:
        detail = getattr(e, "row", None)
        suffix = detail if detail is not None else e
        print(f"{e.code}:{suffix}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"IoFailure:{e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
