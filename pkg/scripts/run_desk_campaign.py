#!/usr/bin/env python3
"""Run the full desk-scale experiment: train on the training suite, compare
all four parameter-selection methods on the held-out suite, and emit the
feature table.

Results land under --out (default $TUNESEER_DATA or ./runs/desk).  Expect
roughly 10-30 minutes single-threaded at the default sizes; use --workers.
"""

import argparse
import os
import time

from tuneseer.harness import (
    CampaignConfig,
    cmd_compare,
    cmd_features,
    cmd_train,
    default_out_dir,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=os.path.join(default_out_dir(), "desk"))
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--dims", default="2,10,20")
    parser.add_argument("--budget", type=int, default=10_000)
    parser.add_argument("--sigma", type=int, default=1000)
    parser.add_argument("--kappa", type=int, default=10)
    parser.add_argument("--instances", type=int, default=3)
    parser.add_argument("--train-seeds", type=int, default=5)
    parser.add_argument("--seeds", type=int, default=30)
    parser.add_argument(
        "--methods", default="predictive,best-of-training,shade,literature"
    )
    args = parser.parse_args()

    dims = tuple(int(d) for d in args.dims.split(","))
    common = dict(
        dims=dims,
        instances=args.instances,
        budget=args.budget,
        sigma=args.sigma,
        kappa=args.kappa,
        out=args.out,
        workers=args.workers,
    )

    t0 = time.time()
    cmd_train(
        CampaignConfig(
            suite="training",
            train_seeds=tuple(range(args.train_seeds)),
            **common,
        )
    )
    print(f"[train] {time.time() - t0:.0f} s")

    t0 = time.time()
    cmd_compare(
        CampaignConfig(
            suite="holdout",
            seeds=tuple(range(args.seeds)),
            methods=tuple(args.methods.split(",")),
            **common,
        )
    )
    print(f"[compare] {time.time() - t0:.0f} s")

    t0 = time.time()
    cmd_features(
        CampaignConfig(
            suite="training",
            seeds=(0,),
            sigmas=(10, 100, 1000),
            **common,
        )
    )
    print(f"[features] {time.time() - t0:.0f} s")
    print(f"outputs in {args.out}")


if __name__ == "__main__":
    main()
