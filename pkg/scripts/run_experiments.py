"""Regenerate every canned experiment into a results directory.

    python scripts/run_experiments.py [--out results] [--m 100000] [--threads 1]

Each output is a JSON (or CSV) file embedding its configuration, so any of them
can be re-run with ``rotclt <command> --config <file>``.
"""

import argparse
import os
import sys
import time

from rotclt.cli import main

JOBS = [
    ("golden_c1.csv", ["preset", "golden-c1"]),
    ("lemma1_faithful.json", ["preset", "lemma1-faithful"]),
    ("lemma3.json", ["preset", "lemma3"]),
    ("theorem1_toy.json", ["preset", "theorem1-toy"]),
    ("golden_clt.json", ["clt", "--angle", "golden", "--series", "1:1", "--n", "10000"]),
    ("chain_q9.json", ["chain", "--q", "9", "--horizon", "64"]),
]


def run():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--m", type=int, default=100_000)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    common = ["--seed", str(args.seed), "--threads", str(args.threads)]
    status = 0
    for name, argv in JOBS:
        extra = ["--m", str(args.m)] if argv[0] in ("preset", "clt") else []
        t0 = time.perf_counter()
        code = main(argv + extra + common + ["--out", os.path.join(args.out, name)])
        print(f"{name:24s} exit {code}  {time.perf_counter() - t0:6.1f}s")
        status = status or code
    for th in ("1", "2", "3"):
        d = os.path.join(args.out, f"theorem{th}")
        code = main(["construct", "--theorem", th, "--depth", "2" if th != "2" else "3", "--out", d])
        code = code or main(["verify", os.path.join(d, "ledger.json"), "--out", os.path.join(d, "verify.json")])
        print(f"theorem{th} construct+verify exit {code}")
        status = status or code
    return status


if __name__ == "__main__":
    sys.exit(run())
