"""Minimal CLI: train one spec and drop checkpoints + manifest."""

from __future__ import annotations

import argparse
import sys

from .train import DEFAULT_CHECKPOINT_EPOCHS, TrainingDiverged, TrainSpec, train_and_export


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="cpatrainer", description=__doc__)
    p.add_argument("--dataset", choices=["two_moons", "synthetic_random"], default="two_moons")
    p.add_argument("--widths", type=int, nargs="+", default=[16])
    p.add_argument("--residual-blocks", type=int, default=0)
    p.add_argument("--no-skip", action="store_true", help="residual layers without skip additions")
    p.add_argument("--act", type=float, nargs=2, default=[1.0, 0.0], metavar=("A", "B"))
    p.add_argument("--epochs", type=int, default=5000)
    p.add_argument("--checkpoints", type=int, nargs="+", default=list(DEFAULT_CHECKPOINT_EPOCHS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default="run")
    p.add_argument("--out", default=".")
    args = p.parse_args(argv)

    spec = TrainSpec(
        dataset=args.dataset,
        widths=tuple(args.widths),
        residual_blocks=args.residual_blocks,
        residual_skip=not args.no_skip,
        activation=(args.act[0], args.act[1]),
        epochs=args.epochs,
        checkpoint_epochs=tuple(args.checkpoints),
        seed=args.seed,
        name=args.name,
    )
    try:
        manifest = train_and_export(spec, args.out)
    except TrainingDiverged as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return 1
    print(f"exported {len(manifest['checkpoints'])} checkpoints to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
