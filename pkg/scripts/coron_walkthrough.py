"""Step through the three-state, one-input example that passes the classical
homology test but fails the sphere test.

    python3 scripts/coron_walkthrough.py [--resolutions 8,16]
"""

import argparse
import time

from stabcheck.checker import Condition, analyze, analyze_resolution
from stabcheck.degree import expression_probe, loop_projection_winding
from stabcheck.homology import cohomology, matches_sphere
from stabcheck.sigma import AnalysisParams, VectorFieldSystem

FIELD = ["x3^2*(x1 - x2)", "x3^2*(x2 - x3)", "u1"]


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--resolutions", default="8,16")
    ap.add_argument("--epsilon", type=float, default=0.5)
    args = ap.parse_args(argv)
    res = tuple(int(r) for r in args.resolutions.split(","))
    sys = VectorFieldSystem.from_strings(FIELD, m=1, name="coron")
    params = AnalysisParams(epsilon=args.epsilon, resolutions=res)

    print("f =", ", ".join(FIELD))
    for r in res:
        t0 = time.perf_counter()
        level = analyze_resolution(sys, params, r)
        co = cohomology(level.profile)
        print(f"r={r:<3d} kept cubes={int(level.complex.included.sum()):<6d} "
              f"H_*={level.profile.betti} H^*={co.betti} "
              f"sphere S^2? {matches_sphere(level.profile, 2)}  ({time.perf_counter() - t0:.2f}s)")

    rho = params.epsilon / 8
    gamma = expression_probe("gamma", ["0", "0", f"{rho!r}*cos(t)", f"{rho!r}*sin(t)"], 3, 1,
                             projection=(2, 3))
    print(f"loop in the (x3, u1) plane, radius {rho}: image winds {loop_projection_winding(gamma)} time(s)")

    rep = analyze(sys, params, [gamma])
    for c in rep.conditions:
        print(f"{c.condition.value:15s} {c.outcome.value:12s} stabilized={c.stabilized}")
    strong = rep.condition(Condition.CORON_STRONG).evidence
    print("offending degrees:", strong.get("offending_degrees"))
    print("verdict:", rep.verdict.value)


if __name__ == "__main__":
    main()
