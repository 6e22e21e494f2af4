#!/usr/bin/env python3
"""Survey how often the feedback-existence conditions hold across random
systems, and confirm the synthesis/certification pipeline on the ones that
qualify.

    python3 scripts/condition_survey.py --count 200 --n-max 8 --m-max 4
"""

import argparse
import collections

import numpy as np

from phdesc import (
    certify_closed_loop,
    index_reduction_rank_condition,
    random_ph,
    stabilizability_rank_condition,
    strict_passifiability_condition,
    synthesize_stabilizing,
)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--n-max", type=int, default=8)
    ap.add_argument("--m-max", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    tally = collections.Counter()
    for k in range(args.count):
        n = int(rng.integers(1, args.n_max + 1))
        m = int(rng.integers(1, args.m_max + 1))
        sys_ = random_ph(n, m, args.seed * 100_000 + k)
        stab, _ = stabilizability_rank_condition(sys_)
        idx = index_reduction_rank_condition(sys_)
        tally["stabilizability"] += stab
        tally["index_reducibility"] += idx
        tally["strict_passifiability"] += strict_passifiability_condition(sys_)
        if stab and idx:
            tally["both"] += 1
            F, _ = synthesize_stabilizing(sys_)
            tally["certified"] += certify_closed_loop(sys_, F).overall

    width = max(map(len, tally))
    for key in ("stabilizability", "index_reducibility", "both",
                "certified", "strict_passifiability"):
        print(f"{key:<{width}} : {tally[key]:4d} / {args.count}")
    if tally["both"] and tally["certified"] != tally["both"]:
        raise SystemExit("certification failed on a condition-true instance")


if __name__ == "__main__":
    main()
