"""Command line entry point.

    vsnoffload run --topology 4 --algorithm tt-a --synthetic uniform --frames 500 --out t4.csv
    vsnoffload run --config scen.json --coordinate 16 --candidates 10 --trace points.csv --out c.csv
    vsnoffload oracle --topology 1 --sensors 2 --stride 7.2
    vsnoffload dict build --topology 4 --synthetic uniform --dictionary-size 64 --out t4.dict
    vsnoffload dict inspect t4.dict
"""
from __future__ import annotations

import argparse
import logging
import sys

from .coordinator import ProfileDictionary, build_dictionary
from .engine import simulate_frame
from .harness import load_trace, summarize, synth_uniform, write_results
from .model import ALGORITHMS, ScenarioConfig, load_config, scenario_from_topology
from .solver import brute_force_ctm


def _scenario_args(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON scenario file")
    p.add_argument("--topology", type=int, choices=range(1, 6), help="built-in topology 1..5")
    p.add_argument("--seed", type=int, default=None, help="seed for synthetic data")


def _data_args(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--trace", help="CSV of interest points (frame,sensor,x_norm)")
    src.add_argument("--synthetic", choices=("uniform", "exact-uniform"), default=None)
    p.add_argument("--points", type=int, default=400, help="interest points per synthetic frame")
    p.add_argument("--frames", type=int, default=None)


def _scenario(args, **overrides) -> ScenarioConfig:
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.config:
        if args.topology is not None:
            overrides["topology"] = args.topology
        return load_config(args.config, **overrides)
    if args.topology is None:
        raise ValueError("give --config or --topology")
    return scenario_from_topology(args.topology, **overrides)


def _trace(args, cfg: ScenarioConfig, frames: int):
    if args.trace:
        return load_trace(args.trace)
    kind = args.synthetic or "uniform"
    seed = cfg.rng_seed if args.seed is None else args.seed
    return synth_uniform(frames, cfg.sensor_count, args.points, seed, exact=(kind == "exact-uniform"))


def cmd_run(args) -> int:
    from .harness import run_experiment

    cfg = _scenario(args, algorithm=args.algorithm, inter_refresh=args.coordinate,
                    candidate_count=args.candidates, dictionary_size=args.dictionary_size,
                    frame_count=args.frames, rng_seed=args.seed)
    trace = _trace(args, cfg, cfg.frame_count)
    dictionary = ProfileDictionary.load(args.dictionary) if args.dictionary else None
    result = run_experiment(cfg, trace, coordination=args.coordinate, frames=cfg.frame_count,
                            dictionary=dictionary, topology=args.topology)
    if args.out:
        write_results(result.rows, args.out)
    if args.save_dictionary and result.dictionary is not None:
        result.dictionary.save(args.save_dictionary)
    s = summarize(result.rows)
    conv = "none" if s.converged_at is None else str(s.converged_at)
    print(f"{result.state.algorithm} frames={s.frames} mean={s.mean:.6g} min={s.min:.6g} "
          f"max={s.max:.6g} p95/mean={s.tail_ratio:.4f} converged_at={conv}")
    return 0


def cmd_oracle(args) -> int:
    cfg = _scenario(args)
    if args.sensors is not None:
        C = cfg.transmission_coeffs[:args.sensors]
        nodes = args.nodes or len(cfg.processing_coeffs)
        cfg = cfg.with_(transmission_coeffs=tuple(c[:nodes] for c in C),
                        processing_coeffs=cfg.processing_coeffs[:nodes])
    trace = _trace(args, cfg, max(args.frame + 1, 1))
    dists = trace[args.frame]
    stride = args.stride if args.stride else cfg.frame_width / 100
    profile, T = brute_force_ctm(cfg, dists, stride, args.max_calls)
    for s, a in enumerate(profile):
        print(f"sensor {s}: nodes={list(a.assignment)} pixels={list(a.pixels(cfg.frame_width))}")
    print(f"T={T!r}")
    return 0


def cmd_dict_build(args) -> int:
    cfg = _scenario(args, dictionary_size=args.dictionary_size, rng_seed=args.seed)
    trace = _trace(args, cfg, cfg.dictionary_size)
    d = build_dictionary(trace.frames, cfg, cfg.dictionary_size)
    d.save(args.out)
    print(f"{len(d)} entries written to {args.out}")
    return 0


def cmd_dict_inspect(args) -> int:
    d = ProfileDictionary.load(args.path)
    w = d.frame_width
    print(f"entries={len(d)} w={w}")
    for j, e in enumerate(d):
        allocs = " ".join(f"{list(a.assignment)}@{list(a.pixels(w))}" for a in e.profile)
        print(f"{j}: T={e.T:.6g} {allocs}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vsnoffload", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log every frame")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a run and write per-frame completion times")
    _scenario_args(run)
    _data_args(run)
    run.add_argument("--algorithm", choices=ALGORITHMS, default=None)
    run.add_argument("--coordinate", type=int, metavar="R", default=None,
                     help="install a dictionary profile every R frames")
    run.add_argument("--candidates", type=int, metavar="L", default=None)
    run.add_argument("--dictionary-size", type=int, metavar="M", default=None)
    run.add_argument("--dictionary", help="load the profile dictionary from this file")
    run.add_argument("--save-dictionary", help="write the dictionary used to this file")
    run.add_argument("--out", help="per-frame CSV output")
    run.set_defaults(func=cmd_run)

    orc = sub.add_parser("oracle", help="brute-force optimum of one frame on a pixel grid")
    _scenario_args(orc)
    _data_args(orc)
    orc.add_argument("--frame", type=int, default=0)
    orc.add_argument("--sensors", type=int, default=None, help="keep only the first S sensors")
    orc.add_argument("--nodes", type=int, default=None, help="keep only the first N nodes")
    orc.add_argument("--stride", type=float, default=None, help="grid step in pixels (default w/100)")
    orc.add_argument("--max-calls", type=int, default=10**6)
    orc.set_defaults(func=cmd_oracle)

    dct = sub.add_parser("dict", help="profile dictionary tools")
    dsub = dct.add_subparsers(dest="dict_command", required=True)
    build = dsub.add_parser("build", help="optimize training frames into a dictionary")
    _scenario_args(build)
    _data_args(build)
    build.add_argument("--dictionary-size", type=int, metavar="M", default=None)
    build.add_argument("--out", required=True)
    build.set_defaults(func=cmd_dict_build)
    insp = dsub.add_parser("inspect", help="print dictionary entries")
    insp.add_argument("path")
    insp.set_defaults(func=cmd_dict_inspect)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"vsnoffload: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
