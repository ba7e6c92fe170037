"""Mean, min and max system completion time of the four distributed
algorithms on the five topologies with uniform synthetic interest points,
next to the off-line system optimum for the uniform distribution.

    python scripts/synthetic_sweep.py --frames 500 --out sweep.csv
"""
import argparse
import csv
import sys
import time

from vsnoffload.coordinator import ttc_optimize
from vsnoffload.engine import simulate_frame
from vsnoffload.harness import exact_uniform, run_experiment, summarize, synth_uniform
from vsnoffload.model import ALGORITHMS, scenario_from_topology


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--frames", type=int, default=500)
    ap.add_argument("--points", type=int, default=400)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--topologies", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    ap.add_argument("--algorithms", nargs="+", default=list(ALGORITHMS))
    ap.add_argument("--exact", action="store_true", help="lattice points instead of random draws")
    ap.add_argument("--out", help="CSV with one row per (topology, algorithm)")
    args = ap.parse_args(argv)

    rows = []
    for k in args.topologies:
        cfg = scenario_from_topology(k, frame_count=args.frames)
        trace = synth_uniform(args.frames, cfg.sensor_count, args.points, args.seed, exact=args.exact)
        u = [exact_uniform(args.points)] * cfg.sensor_count
        opt = simulate_frame(ttc_optimize(u, cfg), cfg, u).T
        for alg in args.algorithms:
            t0 = time.time()
            s = summarize(run_experiment(cfg, trace, algorithm=alg, topology=k).rows)
            rows.append((k, alg, s.mean, s.min, s.max, opt, s.converged_at))
            print(f"topology {k} {alg}: mean={s.mean:.4f} min={s.min:.4f} max={s.max:.4f} "
                  f"optimum={opt:.4f} mean/opt={s.mean / opt:.3f} converged_at={s.converged_at} "
                  f"({time.time() - t0:.1f}s)", flush=True)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["topology", "algorithm", "mean", "min", "max", "optimum", "converged_at"])
            w.writerows(rows)


if __name__ == "__main__":
    sys.exit(main())
