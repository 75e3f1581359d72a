"""Betti numbers of the certified nonzero set as the grid is refined.

    python3 scripts/stabilization_curve.py configs/coron3d.cfg --resolutions 4,8,16,32

Writes a CSV (resolution, degree, betti, torsion, top_cubes, seconds) to stdout
or to --out, so the curve can be plotted with any tool.
"""

import argparse
import csv
import sys
import time
from dataclasses import replace

from stabcheck.checker import analyze_resolution
from stabcheck.config import load_config
from stabcheck.cubical import CapacityError


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--resolutions", default="4,8,16,32")
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    cfg = load_config(args.config)
    resolutions = [int(r) for r in args.resolutions.split(",")]
    params = replace(cfg.params, resolutions=tuple(resolutions))
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["resolution", "degree", "betti", "torsion", "top_cubes", "seconds"])
    for r in resolutions:
        start = time.perf_counter()
        try:
            level = analyze_resolution(cfg.system, params, r)
        except CapacityError as exc:
            print(f"r={r}: {exc}", file=sys.stderr)
            break
        secs = time.perf_counter() - start
        if level.profile is None:
            print(f"r={r}: {level.error}", file=sys.stderr)
            continue
        cubes = int(level.complex.included.sum())
        for k, b in enumerate(level.profile.betti):
            tors = ";".join(str(t) for t in level.profile.torsion[k])
            writer.writerow([r, k, b, tors, cubes, f"{secs:.3f}"])
        out.flush()
    if args.out:
        out.close()


if __name__ == "__main__":
    main()
