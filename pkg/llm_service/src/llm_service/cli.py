"""Command line: train a checkpoint, serve it, or re-run its evaluation."""

from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

from .train import TrainingConfig, train


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="llm-service")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fine-tune on a dataset directory")
    p_train.add_argument("--dataset", required=True, help="dir with dataset.jsonl + vocab.json")
    p_train.add_argument("--out", required=True, help="checkpoint output directory")
    p_train.add_argument("--base", default="tiny",
                         help="preset (tiny, small-scratch) or pretrained checkpoint id")
    p_train.add_argument("--epochs", type=int, default=65)
    p_train.add_argument("--batch-size", type=int, default=24)
    p_train.add_argument("--learning-rate", type=float, default=1e-3)
    p_train.add_argument("--alpha", type=float, default=10.0)
    p_train.add_argument("--plain-ce", action="store_true",
                         help="ablation: uniform token weights instead of the priority schedule")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--max-eval-samples", type=int, default=512)

    p_serve = sub.add_parser("serve", help="serve a checkpoint over HTTP")
    p_serve.add_argument("--checkpoint", required=True)
    p_serve.add_argument("--port", type=int, default=8035)

    p_eval = sub.add_parser("eval", help="print a checkpoint's stored evaluation summary")
    p_eval.add_argument("--checkpoint", required=True)

    args = parser.parse_args(argv)

    if args.command == "train":
        cfg = TrainingConfig(
            base=args.base,
            epochs=args.epochs,
            batch_size=args.batch_size,
            learning_rate=args.learning_rate,
            alpha=args.alpha,
            uniform_weights=args.plain_ce,
            seed=args.seed,
            max_eval_samples=args.max_eval_samples,
        )
        summary = train(args.dataset, cfg, args.out)
        ev = summary["eval"]
        print(f"trained {summary['epochs_done']} epochs in {summary['train_seconds']}s; "
              f"macro sMAE {ev['macro_smae']}, "
              f"sign error {ev['position_profile']['sign_error_rate']}")
        return 0

    if args.command == "serve":
        from .serve import serve

        server = serve(args.checkpoint, port=args.port)
        print(f"serving {args.checkpoint} on {server.url} (Ctrl-C to stop)")
        try:
            while True:
                time.sleep(3600)
        except KeyboardInterrupt:
            server.stop()
        return 0

    if args.command == "eval":
        summary = json.loads((Path(args.checkpoint) / "training_summary.json").read_text())
        print(json.dumps(summary["eval"], indent=1))
        return 0

    return 2


if __name__ == "__main__":
    raise SystemExit(main())
