"""Command-line interface: one executable exposing the library operations.

Exit codes: 0 success, 1 runtime failure, 2 usage errors.
"""

import argparse
import csv
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import render, spile
from .codec import DetectionError, Payload, decode, encode, scramble
from .domain import Configuration, create_domain
from .dynamics import frame, frame_multi, trajectory, uniform_times
from .extended import eta, floor_project, geodesic_frame
from .group import identity
from .harmonic import parse_polynomial, partition_fields, tropical_min
from .potential import build_potential, directional_potentials
from .stochastic import fit_power_law, run as stochastic_run
from .stochastic import variation_of_information
from .verify import run_verify


def _fraction(text):
    return Fraction(text)


def _fraction_list(text):
    return [Fraction(tok) for tok in text.split(",") if tok.strip()]


def _resolve_start(spec, domain):
    if spec == "identity":
        return identity(domain)
    if spec == "twos":
        return Configuration.filled(domain, 2)
    if spec == "threes":
        return Configuration.filled(domain, 3)
    if spec.startswith("file:"):
        return spile.read_configuration(spec[5:], domain=domain)
    if spec.startswith("pbm:"):
        return encode(Payload.from_pbm(spec[4:], domain))
    raise ValueError(f"unknown start {spec!r} "
                     "(use identity, twos, threes, file:PATH or pbm:PATH)")


def _resolve_potential(args, domain):
    if getattr(args, "partition", False):
        field = tropical_min(partition_fields(domain), domain)
        return build_potential(field, domain)
    poly = parse_polynomial(args.harmonic)
    return build_potential(poly, domain)


def _emit_frames(out_dir, frames, scale=1, fmt="png", jobs=1):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    digits = max(4, len(str(len(frames))))
    tasks = []
    for k, (t, config) in enumerate(frames):
        path = out_dir / f"frame{k:0{digits}d}.{fmt}"
        rows.append((t, str(path)))
        tasks.append((path, config))

    def save(task):
        path, config = task
        if fmt == "pgm":
            spile.write_pgm(path, config)
        else:
            render.save_frame(path, config, scale=scale)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(save, tasks))
    else:
        for task in tasks:
            save(task)
    render.write_frames_csv(out_dir / "frames.csv", rows)
    return rows


def _compute_frames(start, potential, times, rounding, jobs, directional=None):
    """Frames at the given times; contiguous chunks advance incrementally on
    worker threads (the relaxation kernel drops the GIL)."""
    if directional:
        return [(t, frame_multi(start, directional, t, rounding))
                for t in times]
    if jobs <= 1 or len(times) < 4:
        traj = trajectory(start, potential, times, rounding)
        return traj.frames
    chunks = np.array_split(np.arange(len(times)), jobs)

    def work(idx):
        sub = [times[i] for i in idx]
        base = frame(start, potential, sub[0], rounding)
        frames = [(sub[0], base)]
        current = base
        for prev, t in zip(sub, sub[1:]):
            step = (potential.scaled_floor(t, rounding)
                    - potential.scaled_floor(prev, rounding))
            from .relax import relax as _relax
            current, _ = _relax(Configuration(start.domain,
                                              current.grid + step))
            frames.append((t, current))
        return frames

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(work, [c for c in chunks if len(c)]))
    return [tc for part in parts for tc in part]


# ---------------------------------------------------------------------------
# subcommands


def cmd_identity(args):
    domain = create_domain(args.domain)
    ident = identity(domain)
    if args.out:
        spile.write_configuration(args.out, ident)
    if args.png:
        render.save_frame(args.png, ident, scale=args.scale)
    if not args.out and not args.png:
        print(np.array2string(ident.grid[::-1], threshold=10000))
    return 0


def cmd_dynamics(args):
    domain = create_domain(args.domain)
    start = _resolve_start(args.start, domain)
    potential = _resolve_potential(args, domain)
    if args.dump_potential:
        spile.write_configuration(args.dump_potential,
                                  Configuration(domain, potential.x))
    times = args.times or uniform_times(args.frames, args.periods)
    directional = None
    if args.directional:
        directional = directional_potentials(parse_polynomial(args.harmonic),
                                             domain)
    frames = _compute_frames(start, potential, times, args.rounding,
                             args.jobs, directional)
    _emit_frames(args.out, frames, scale=args.scale, fmt=args.format,
                 jobs=args.jobs)
    print(f"wrote {len(frames)} frames to {args.out}")
    return 0


def cmd_stochastic(args):
    domain = create_domain(args.domain)
    start = _resolve_start(args.start, domain)
    potential = _resolve_potential(args, domain)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    snap_times = args.times or [Fraction(k) for k in
                                range(1, int(args.periods) + 1)]
    chain = stochastic_run(start, potential, args.periods, args.seed,
                           snapshot_times=snap_times,
                           record_sizes=True, record_vertices=True)
    total = potential.total
    with open(out / "avalanches.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "time", "i", "j", "size"])
        for k in range(chain.steps):
            v = int(chain.drop_vertices[k])
            i, j = domain.cell_coords(v)
            writer.writerow([k + 1, f"{k + 1}/{total}", i, j,
                             int(chain.sizes[k])])
    with open(out / "vi.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "vi"])
        for t, config in chain.snapshots:
            writer.writerow([str(t), variation_of_information(start, config)])
    _emit_frames(out / "frames", chain.snapshots, scale=args.scale,
                 fmt=args.format)
    spile.write_configuration(out / "final.spile", chain.final)
    print(f"{chain.steps} drops, {chain.total_topplings} topplings; "
          f"outputs in {out}")
    return 0


def cmd_extended(args):
    domain = create_domain(args.domain)
    poly = parse_polynomial(args.harmonic)
    element = eta(poly, domain)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spile.write_extended(out / "eta.spilex", element)
    render.save_frame(out / "eta_floor.png", floor_project(element),
                      scale=args.scale)
    if args.geodesic_times:
        frames = []
        for t in args.geodesic_times:
            g = geodesic_frame(element, _resolve_potential(args, domain), t)
            frames.append((t, floor_project(g)))
        _emit_frames(out / "geodesic", frames, scale=args.scale)
    print(f"extended-group element written to {out}")
    return 0


def cmd_encode(args):
    domain = create_domain(args.domain)
    payload = Payload.from_pbm(args.payload, domain)
    config = encode(payload)
    spile.write_configuration(args.out, config)
    if args.png:
        render.save_frame(args.png, config)
    return 0


def cmd_scramble(args):
    config = spile.read_configuration(args.infile)
    domain = config.domain
    potential = _resolve_potential(args, domain)
    result = scramble(config, potential, args.t, mode=args.mode,
                      seed=args.seed)
    spile.write_configuration(args.out, result)
    if args.png:
        render.save_frame(args.png, result)
    return 0


def cmd_decode(args):
    config = spile.read_configuration(args.infile)
    domain = config.domain
    potential = _resolve_potential(args, domain)
    result = decode(config, potential, mode=args.mode, seed=args.seed,
                    threshold=args.threshold, resolution=args.resolution,
                    max_periods=args.max_periods)
    result.payload.to_pbm(args.out)
    print(f"payload detected at t={result.t_detect} "
          f"(score {result.score:.3f}) -> {args.out}")
    return 0


def cmd_fit(args):
    sizes = []
    with open(args.csv) as fh:
        reader = csv.DictReader(fh)
        if "size" not in (reader.fieldnames or []):
            raise ValueError(f"{args.csv} has no 'size' column")
        for row in reader:
            sizes.append(int(row["size"]))
    sizes = np.asarray(sizes)
    fit = fit_power_law(sizes[sizes >= 1], xmin=args.xmin)
    print(f"exponent {fit.exponent:.4f}  xmin {fit.xmin}  ks {fit.ks:.4f}  "
          f"tail {fit.n_tail}")
    return 0


def cmd_scaling(args):
    sizes = [int(s) for s in args.sizes.split(",")]
    poly = parse_polynomial(args.harmonic)
    out = Path(args.out)
    rows = []
    for n in sizes:
        domain = create_domain(f"rect:{n}x{n}")
        start = identity(domain)
        potential = build_potential(poly, domain)
        # absolute times: structures tied to the global clock
        frames = _compute_frames(start, potential, args.times, "floor",
                                 args.jobs)
        sub = out / f"n{n}-absolute"
        _emit_frames(sub, frames, fmt=args.format, jobs=args.jobs)
        rows += [(n, "absolute", str(t)) for t, _ in frames]
        # size-scaled times relative to the largest domain
        ref = max(sizes)
        if n != ref:
            factor = Fraction(n, ref) ** args.scale_power
            scaled = sorted(t * factor for t in args.times)
            frames = _compute_frames(start, potential, scaled, "floor",
                                     args.jobs)
            sub = out / f"n{n}-scaled"
            _emit_frames(sub, frames, fmt=args.format, jobs=args.jobs)
            rows += [(n, "scaled", str(t)) for t, _ in frames]
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "index.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["size", "schedule", "time"])
        writer.writerows(rows)
    print(f"scaling comparison written to {out}")
    return 0


def cmd_render(args):
    config = spile.read_configuration(args.infile)
    render.save_frame(args.out, config, scale=args.scale,
                      allow_unstable=args.allow_unstable)
    return 0


def cmd_verify(args):
    return 0 if run_verify() else 1


def cmd_experiment(args):
    from .experiment import run_experiment_file
    for path in args.files:
        run_experiment_file(path, jobs=args.jobs)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sandpile",
        description="Abelian sandpile dynamics driven by harmonic fields")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        return p

    p = add("identity", cmd_identity, help="compute the group identity")
    p.add_argument("--domain", required=True)
    p.add_argument("--out", help="SPILE v1 output path")
    p.add_argument("--png", help="rendered image path")
    p.add_argument("--scale", type=int, default=1)

    p = add("dynamics", cmd_dynamics, help="deterministic harmonic dynamics")
    p.add_argument("--domain", required=True)
    p.add_argument("--harmonic", required=True,
                   help="preset (H2a) or monomials (1*i^1*j^1,...)")
    p.add_argument("--partition", action="store_true",
                   help="use the four-field min partition instead")
    p.add_argument("--start", default="identity")
    p.add_argument("--frames", type=int, default=600,
                   help="uniform frames per period when --times is absent")
    p.add_argument("--periods", type=_fraction, default=Fraction(1))
    p.add_argument("--times", type=_fraction_list,
                   help="comma-separated rationals, overrides --frames")
    p.add_argument("--rounding", choices=["floor", "ceil", "round"],
                   default="floor")
    p.add_argument("--directional", action="store_true",
                   help="schedule the four cardinal potentials separately")
    p.add_argument("--dump-potential", help="also write the drop field "
                   "(SPILE v1) for inspection")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["png", "ppm", "pgm"], default="png")
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("--jobs", type=int,
                   default=max(1, os.cpu_count() or 1))

    p = add("stochastic", cmd_stochastic, help="Markov-chain realization")
    p.add_argument("--domain", required=True)
    p.add_argument("--harmonic", required=True)
    p.add_argument("--partition", action="store_true")
    p.add_argument("--start", default="identity")
    p.add_argument("--periods", type=_fraction, default=Fraction(1))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--times", type=_fraction_list,
                   help="snapshot times (default: integer periods)")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["png", "ppm", "pgm"], default="png")
    p.add_argument("--scale", type=int, default=1)

    p = add("extended", cmd_extended, help="extended model: eta and geodesics")
    p.add_argument("--domain", required=True)
    p.add_argument("--harmonic", required=True)
    p.add_argument("--partition", action="store_true")
    p.add_argument("--geodesic-times", type=_fraction_list)
    p.add_argument("--out", required=True)
    p.add_argument("--scale", type=int, default=1)

    p = add("encode", cmd_encode, help="encode a PBM payload")
    p.add_argument("--domain", required=True)
    p.add_argument("--payload", required=True, help="PBM file")
    p.add_argument("--out", required=True)
    p.add_argument("--png")

    p = add("scramble", cmd_scramble, help="evolve an encoded state")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--harmonic", required=True)
    p.add_argument("--partition", action="store_true")
    p.add_argument("--t", type=_fraction, required=True)
    p.add_argument("--mode", choices=["deterministic", "stochastic"],
                   default="deterministic")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--png")

    p = add("decode", cmd_decode, help="recover a payload")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--harmonic", required=True)
    p.add_argument("--partition", action="store_true")
    p.add_argument("--mode", choices=["deterministic", "stochastic"],
                   default="deterministic")
    p.add_argument("--seed", type=int)
    p.add_argument("--threshold", type=float, default=0.95)
    p.add_argument("--resolution", type=int, default=1024)
    p.add_argument("--max-periods", type=int, default=2)
    p.add_argument("--out", required=True, help="recovered payload PBM")

    p = add("fit", cmd_fit, help="fit a power law to avalanche sizes")
    p.add_argument("--csv", required=True, help="CSV with a 'size' column")
    p.add_argument("--xmin", type=int)

    p = add("scaling", cmd_scaling,
            help="compare dynamics across domain sizes")
    p.add_argument("--harmonic", required=True)
    p.add_argument("--sizes", required=True, help="e.g. 63,255")
    p.add_argument("--times", type=_fraction_list, required=True)
    p.add_argument("--scale-power", type=int, default=1,
                   help="time-scaling exponent between sizes")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["png", "ppm", "pgm"], default="png")
    p.add_argument("--jobs", type=int,
                   default=max(1, os.cpu_count() or 1))

    p = add("render", cmd_render, help="render a SPILE file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("--allow-unstable", action="store_true")

    add("verify", cmd_verify, help="run the invariant self-checks")

    p = add("experiment", cmd_experiment, help="run experiment spec files")
    p.add_argument("files", nargs="+")
    p.add_argument("--jobs", type=int,
                   default=max(1, os.cpu_count() or 1))

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DetectionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, RuntimeError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
