"""Completion-time distribution of a distributed algorithm with and
without a coordinator refreshing the profile every R frames.

    python scripts/coordination_experiment.py --topology 4 --algorithm tt-s --refresh 16 --frames 200
    python scripts/coordination_experiment.py --trace points.csv --refresh 1 4 16 64 --candidates 10

Without --trace, uniform synthetic points are used (--drifting for
clustered points that move across the frame).
"""
import argparse
import csv
import sys
import time

from vsnoffload.coordinator import build_dictionary
from vsnoffload.harness import cdf_csv, load_trace, run_experiment, summarize, synth_drifting, synth_uniform
from vsnoffload.model import ALGORITHMS, scenario_from_topology


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--topology", type=int, default=4, choices=range(1, 6))
    ap.add_argument("--algorithm", default="tt-s", choices=ALGORITHMS)
    ap.add_argument("--refresh", type=int, nargs="+", default=[16], metavar="R")
    ap.add_argument("--candidates", type=int, default=1, metavar="L")
    ap.add_argument("--dictionary-size", type=int, default=16, metavar="M")
    ap.add_argument("--frames", type=int, default=200)
    ap.add_argument("--points", type=int, default=400)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trace")
    ap.add_argument("--drifting", action="store_true")
    ap.add_argument("--out", help="summary CSV")
    ap.add_argument("--cdf-prefix", help="write one CDF file per setting with this prefix")
    args = ap.parse_args(argv)

    cfg = scenario_from_topology(args.topology, algorithm=args.algorithm, frame_count=args.frames,
                                 candidate_count=args.candidates, dictionary_size=args.dictionary_size)
    if args.trace:
        trace = load_trace(args.trace)
    elif args.drifting:
        trace = synth_drifting(args.frames, cfg.sensor_count, args.points, args.seed)
    else:
        trace = synth_uniform(args.frames, cfg.sensor_count, args.points, args.seed)

    t0 = time.time()
    dictionary = build_dictionary(trace.frames, cfg, args.dictionary_size)
    print(f"dictionary: {len(dictionary)} entries ({time.time() - t0:.1f}s)", flush=True)

    settings = [None] + args.refresh
    rows = []
    for R in settings:
        t0 = time.time()
        res = run_experiment(cfg, trace, coordination=R, dictionary=dictionary, topology=args.topology)
        s = summarize(res.rows)
        label = "none" if R is None else f"R={R}"
        rows.append((label, s.mean, s.min, s.max, s.p95, s.tail_ratio))
        print(f"{args.algorithm} {label}: mean={s.mean:.4f} min={s.min:.4f} max={s.max:.4f} "
              f"p95/mean={s.tail_ratio:.4f} ({time.time() - t0:.1f}s)", flush=True)
        if args.cdf_prefix:
            with open(f"{args.cdf_prefix}{label}.csv", "w") as fh:
                fh.write(cdf_csv(s))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["coordination", "mean", "min", "max", "p95", "p95_over_mean"])
            w.writerows(rows)


if __name__ == "__main__":
    sys.exit(main())
