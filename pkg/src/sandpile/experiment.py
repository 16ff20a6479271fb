"""Structured experiment files: reproducible run descriptions in YAML.

A file holds a name and a list of runs; every run is fully determined by its
fields (including the seed), so re-running a file regenerates identical
outputs. Schema per run:

    name: h2a-identity          # output subdirectory
    domain: rect:255x255        # domain descriptor
    harmonic: H2a               # preset or monomial list; or partition: true
    start: identity             # identity | twos | threes | file:PATH
    mode: deterministic         # deterministic | stochastic | extended
    times: ["0", "1/4", "1"]    # rational sample times
    frames: 600                 # uniform schedule if times absent
    periods: "1"                # chain length (stochastic)
    rounding: floor             # floor | ceil | round
    directional: false          # four cardinal schedules (deterministic)
    seed: 1                     # stochastic only
    scale: 1                    # pixel scale of rendered frames
    emit: [frames]              # frames | vi | avalanches | spile
"""

from fractions import Fraction
from pathlib import Path

import yaml

from . import render, spile
from .domain import create_domain
from .dynamics import uniform_times
from .extended import eta, floor_project, geodesic_frame
from .harmonic import parse_polynomial, partition_fields, tropical_min
from .potential import build_potential, directional_potentials


def _times_of(spec):
    if "times" in spec:
        return [Fraction(str(t)) for t in spec["times"]]
    return uniform_times(int(spec.get("frames", 600)),
                         Fraction(str(spec.get("periods", 1))))


def run_experiment_file(path, jobs=1, out_root=None):
    from .cli import _compute_frames, _emit_frames, _resolve_start

    path = Path(path)
    doc = yaml.safe_load(path.read_text())
    root = Path(out_root) if out_root else path.parent / "out" / doc["name"]
    results = []
    for spec in doc["runs"]:
        out_dir = root / spec["name"]
        domain = create_domain(spec["domain"])
        if spec.get("partition"):
            source = tropical_min(partition_fields(domain), domain)
            poly = None
        else:
            poly = parse_polynomial(str(spec["harmonic"]))
            source = poly
        potential = build_potential(source, domain)
        start = _resolve_start(spec.get("start", "identity"), domain)
        mode = spec.get("mode", "deterministic")
        emit = spec.get("emit", ["frames"])
        scale = int(spec.get("scale", 1))
        if mode == "deterministic":
            directional = None
            if spec.get("directional"):
                directional = directional_potentials(poly, domain)
            frames = _compute_frames(start, potential, _times_of(spec),
                                     spec.get("rounding", "floor"), jobs,
                                     directional)
        elif mode == "stochastic":
            from .stochastic import run as stochastic_run
            chain = stochastic_run(
                start, potential, Fraction(str(spec.get("periods", 1))),
                int(spec["seed"]), snapshot_times=_times_of(spec),
                record_sizes="avalanches" in emit)
            frames = chain.snapshots
            if "avalanches" in emit:
                out_dir.mkdir(parents=True, exist_ok=True)
                import csv
                with open(out_dir / "avalanches.csv", "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(["step", "time", "size"])
                    total = potential.total
                    for k, s in enumerate(chain.sizes):
                        writer.writerow([k + 1, f"{k + 1}/{total}", int(s)])
            if "vi" in emit:
                from .stochastic import variation_of_information
                out_dir.mkdir(parents=True, exist_ok=True)
                import csv
                with open(out_dir / "vi.csv", "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(["time", "vi"])
                    for t, cfg in frames:
                        writer.writerow(
                            [str(t), variation_of_information(start, cfg)])
        elif mode == "extended":
            if poly is None:
                raise ValueError("extended mode needs a harmonic polynomial")
            element = eta(poly, domain)
            frames = [(t, floor_project(geodesic_frame(element, potential, t)))
                      for t in _times_of(spec)]
            out_dir.mkdir(parents=True, exist_ok=True)
            spile.write_extended(out_dir / "eta.spilex", element)
        else:
            raise ValueError(f"unknown mode {mode!r} in {path}")
        if "frames" in emit:
            _emit_frames(out_dir, frames, scale=scale, jobs=jobs)
        if "spile" in emit:
            out_dir.mkdir(parents=True, exist_ok=True)
            for k, (t, cfg) in enumerate(frames):
                spile.write_configuration(
                    out_dir / f"frame{k:04d}.spile", cfg)
        results.append((spec["name"], len(frames), out_dir))
    return results
