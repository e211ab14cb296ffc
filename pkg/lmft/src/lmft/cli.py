"""lmft command line: `finetune` a label source, `compare` two reports."""

from __future__ import annotations

import argparse
import json
import sys

from .compare import compare, write_comparison_csv
from .data import load_corpus
from .trainer import FinetuneConfig, finetune_multi, write_report


def parse_seeds(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",") if part.strip()]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="lmft", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    ft = sub.add_parser("finetune", help="fine-tune on ground-truth or weak labels")
    ft.add_argument("--data", required=True, help="corpus JSON Lines file")
    ft.add_argument("--labels", default="ground-truth",
                    help="'ground-truth' or path to a weak-label CSV")
    ft.add_argument("--label-scope", default="train", choices=["train", "all"])
    ft.add_argument("--encoder", default="mini")
    ft.add_argument("--lr", type=float, default=1e-4)
    ft.add_argument("--epochs", type=int, default=30)
    ft.add_argument("--batch-size", type=int, default=16)
    ft.add_argument("--seeds", default="0..2")
    ft.add_argument("--out", required=True)

    cp = sub.add_parser("compare", help="compare ground-truth vs weak-label reports")
    cp.add_argument("--ground-truth", required=True)
    cp.add_argument("--weak", required=True)
    cp.add_argument("--out", required=True, help="comparison CSV path")
    cp.add_argument("--json", dest="json_out", default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "finetune":
            papers = load_corpus(args.data)
            config = FinetuneConfig(
                encoder=args.encoder,
                learning_rate=args.lr,
                epochs=args.epochs,
                batch_size=args.batch_size,
                label_source=args.labels,
                label_scope=args.label_scope,
            )
            report = finetune_multi(papers, config, seeds=parse_seeds(args.seeds))
            write_report(report, args.out)
            agg = report["aggregate"]["accuracy"]
            print(f"{report['label']}: accuracy {100 * agg['mean']:.2f} "
                  f"({100 * agg['std']:.2f})")
        else:
            with open(args.ground_truth, encoding="utf-8") as fh:
                report_gt = json.load(fh)
            with open(args.weak, encoding="utf-8") as fh:
                report_weak = json.load(fh)
            comparison = compare(report_gt, report_weak)
            write_comparison_csv(comparison, args.out)
            if args.json_out:
                with open(args.json_out, "w", encoding="utf-8") as fh:
                    json.dump(comparison, fh, indent=2, sort_keys=True)
            print(f"wrote {args.out}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
