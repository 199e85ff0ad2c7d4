"""Command line front end: train a mask network and export its weights."""

from __future__ import annotations

import argparse
import json

from .data import load_training_data
from .export import export_weights
from .train import TrainConfig, train


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="aectrainer",
        description="Train the AEC mask postfilter network")
    parser.add_argument("--data", required=True,
                        help="training file exported by the engine")
    parser.add_argument("--out", required=True, help="output weights file")
    parser.add_argument("--parity", help="parity vector file "
                        "(default: <out>.parity)")
    parser.add_argument("--hidden", type=int, default=32)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--epochs", type=int, default=20)
    parser.add_argument("--sequence-len", type=int, default=128)
    parser.add_argument("--eps2", type=float, default=1e-12)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--curve", help="optional JSON file for the "
                        "per-epoch loss curve")
    args = parser.parse_args(argv)

    config = TrainConfig(hidden_dim=args.hidden, learning_rate=args.lr,
                         epochs=args.epochs, sequence_len=args.sequence_len,
                         eps2=args.eps2, seed=args.seed)
    data = load_training_data(args.data)
    model, curve = train(config, data)
    parity_path = args.parity or f"{args.out}.parity"
    export_weights(model, args.out, parity_path, seed=args.seed)
    if args.curve:
        with open(args.curve, "w") as fh:
            json.dump(curve.tolist(), fh)
    print(f"final loss {curve[-1]:.4f}; weights written to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
