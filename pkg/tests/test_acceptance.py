"""Acceptance criteria 1-7, one pass/fail line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import math
import time

import numpy as np

from stabcheck.checker import NON_SUFFICIENCY, Condition, Outcome, Verdict, analyze, analyze_resolution
from stabcheck.chains import chain_complex_from_present
from stabcheck.cubical import Grid, close_cells, close_top_cubes
from stabcheck.degree import chain_boundary, circle_probe, expression_probe, loop_projection_winding, \
    top_degree, winding_number
from stabcheck.expr import eval_interval, evaluate
from stabcheck.homology import SphereProfile, cohomology, cubical_homology, homology, matches_sphere
from stabcheck.interval import Interval
from stabcheck.sigma import AnalysisParams, CubicalComplex, VectorFieldSystem
from stabcheck.snf import smith_with_inverses

from acceptance_log import record
from helpers import determinantal_divisors, random_expression, random_top_mask, rational_betti

CORON = ["x3^2*(x1 - x2)", "x3^2*(x2 - x3)", "u1"]


def test_criterion_1_insufficiency_example():
    start = time.perf_counter()
    sys = VectorFieldSystem.from_strings(CORON, m=1)
    params = AnalysisParams(epsilon=0.5, resolutions=(8, 16))
    levels = [analyze_resolution(sys, params, r) for r in params.resolutions]
    betti1 = [lv.profile.betti[1] for lv in levels]
    a = betti1[0] == betti1[1] and betti1[0] > 0
    b = not any(matches_sphere(lv.profile, 2) for lv in levels)
    rho = params.epsilon / 8
    gamma = expression_probe("gamma", ["0", "0", f"{rho!r}*cos(t)", f"{rho!r}*sin(t)"], 3, 1,
                             projection=(2, 3))
    winding = loop_projection_winding(gamma)
    c = winding == 1
    rep = analyze(sys, params, [gamma])
    outcomes = {r.condition: r.outcome for r in rep.conditions}
    d = (rep.verdict is Verdict.NOT_STABILIZABLE
         and outcomes[Condition.CORON_CLASSICAL] is Outcome.SATISFIED
         and outcomes[Condition.CORON_STRONG] is Outcome.VIOLATED)
    elapsed = time.perf_counter() - start
    record(1, a and b and c and d and elapsed < 300,
           f"betti_1={betti1}, sphere(2)={not b}, winding={winding}, verdict={rep.verdict.value}, "
           f"classical={outcomes[Condition.CORON_CLASSICAL].value}, "
           f"strong={outcomes[Condition.CORON_STRONG].value}, {elapsed:.1f}s")


def test_criterion_2_identity_example():
    sys = VectorFieldSystem.from_strings(["x1", "x2"], m=1)
    params = AnalysisParams(epsilon=0.5)
    rep = analyze(sys, params)
    levels = [analyze_resolution(sys, params, r) for r in params.resolutions]
    profiles = [cohomology(lv.profile) for lv in levels]
    target = SphereProfile(1).betti(3)
    sphere = all(p.betti == target == [1, 1, 0, 0] and not any(p.torsion) for p in profiles)
    degrees = rep.condition(Condition.CORON_STRONG).evidence.get("top_degrees", {})
    witness = any(abs(d) == 1 for ds in degrees.values() for d in ds)
    ok = (sphere and witness and rep.verdict is Verdict.NO_OBSTRUCTION_FOUND
          and NON_SUFFICIENCY in rep.caveats)
    record(2, ok, f"cohomology={[p.betti for p in profiles]}, top degrees={degrees}, "
                  f"verdict={rep.verdict.value}")


def test_criterion_3_brockett_integrator():
    sys = VectorFieldSystem.from_strings(["u1", "u2", "x1*u2 - x2*u1"], m=2)
    rep = analyze(sys, AnalysisParams(resolutions=(4, 8)))
    b = rep.condition(Condition.BROCKETT)
    axis = b.evidence.get("uncovered_axis_cells", {})
    ok = (b.outcome is Outcome.VIOLATED and len(axis.get("f3", [])) > 0
          and rep.verdict is Verdict.NOT_STABILIZABLE)
    record(3, ok, f"brockett={b.outcome.value}, uncovered x3-axis cells={len(axis.get('f3', []))}, "
                  f"verdict={rep.verdict.value}")


def _fixture_betti(mask):
    grid = Grid(mask.ndim, mask.shape[0], 1.0)
    top = cubical_homology(CubicalComplex(grid, mask)).betti
    while len(top) > 1 and top[-1] == 0:
        top = top[:-1]
    return tuple(top)


def test_criterion_4_homology_oracle():
    rng = np.random.default_rng(404)
    checked, mismatches = 0, 0
    while checked < 100:
        dim = int(rng.integers(1, 4))
        size = int(rng.integers(2, {1: 12, 2: 6, 3: 3}[dim] + 1))
        grid = Grid(dim, size, 1.0)
        if rng.random() < 0.5:
            present = close_top_cubes(random_top_mask(rng, dim, size, rng.uniform(0.2, 0.9)))
        else:
            cells = [tuple(int(rng.integers(0, s)) for s in grid.doubled_shape)
                     for _ in range(int(rng.integers(1, 25)))]
            present = close_cells(cells, grid)
        if not present.any() or present.sum() > 500:
            continue
        cc = chain_complex_from_present(present, grid)
        if homology(cc).betti != rational_betti(cc):
            mismatches += 1
        checked += 1
    circle = np.ones((3, 3), bool)
    circle[1, 1] = False
    hollow = np.ones((3, 3, 3), bool)
    hollow[1, 1, 1] = False
    two = np.zeros((7, 3), bool)
    two[0:3], two[4:7] = True, True
    two[1, 1] = two[5, 1] = False
    fixtures = {
        "circle": (_fixture_betti(circle), (1, 1)),
        "hollow cube": (_fixture_betti(hollow), (1, 0, 1)),
        "solid box": (_fixture_betti(np.ones((3, 3, 3), bool)), (1,)),
        "two circles": (_fixture_betti(two), (2, 2)),
    }
    fixtures_ok = all(got == want for got, want in fixtures.values())
    record(4, mismatches == 0 and fixtures_ok,
           f"{checked} random complexes, {mismatches} mismatches; fixtures "
           + ", ".join(f"{k}={v[0]}" for k, v in fixtures.items()))


def test_criterion_5_snf_properties():
    rng = np.random.default_rng(505)
    failures, minors_checked = [], 0
    for case in range(1000):
        small = case % 20 == 0  # 50 small matrices also get the minors check
        r, c = (rng.integers(1, 5, 2) if small else rng.integers(1, 31, 2))
        A = rng.integers(-9, 10, (int(r), int(c)))
        D, U, V, Ui, Vi = smith_with_inverses(A)
        Ao, Do, Uo, Vo = (np.asarray(M, dtype=object) for M in (A, D, U, V))
        if not (Uo.dot(Ao).dot(Vo) == Do).all():
            failures.append((case, "UAV != D"))
        # integer matrices with integer inverses are unimodular
        if not (Uo.dot(np.asarray(Ui, dtype=object)) == np.eye(A.shape[0], dtype=np.int64)).all() or \
                not (Vo.dot(np.asarray(Vi, dtype=object)) == np.eye(A.shape[1], dtype=np.int64)).all():
            failures.append((case, "not unimodular"))
        diag = [int(Do[i, i]) for i in range(min(A.shape))]
        off = Do.copy()
        for i in range(min(A.shape)):
            off[i, i] = 0
        nz = [d for d in diag if d]
        if off.any() or any(d < 0 for d in diag) or diag[:len(nz)] != nz or \
                any(b % a for a, b in zip(nz, nz[1:])):
            failures.append((case, "not a Smith form"))
        if small:
            dk = determinantal_divisors(A)
            prods = [math.prod(nz[:k]) for k in range(1, len(nz) + 1)]
            if prods != dk:
                failures.append((case, "minors"))
            minors_checked += 1
    record(5, not failures, f"1000 matrices up to 30x30, {minors_checked} checked against "
                            f"determinantal divisors, failures={failures[:3]}")


def test_criterion_6_degree_suite():
    t = np.linspace(0, 2 * math.pi, 513)
    windings = {k: winding_number(np.stack([np.cos(k * t), np.sin(k * t)], axis=1)) for k in range(-3, 4)}
    grid = Grid(3, 3, 1.5)
    cycle = chain_boundary({(3, 3, 3): 1})
    ident = top_degree(VectorFieldSystem.from_strings(["x1", "x2", "x3"]), cycle, grid)
    z2 = VectorFieldSystem.from_strings(["x1^2 - x2^2", "2*x1*x2", "x3"])
    square = top_degree(z2, cycle, grid)
    rng = np.random.default_rng(606)
    directions = {top_degree(z2, cycle, grid, regular_value=rng.normal(size=3)) for _ in range(10)}
    ok = all(windings[k] == k for k in windings) and ident == 1 and square == 2 and directions == {2}
    record(6, ok, f"windings={list(windings.values())}, identity={ident}, z^2 equator={square}, "
                  f"10 regular values gave {sorted(directions)}")


def test_criterion_7_interval_soundness():
    rng = np.random.default_rng(707)
    triples, violations = 0, 0
    per_expr = 100
    while triples < 100_000:
        nvars = int(rng.integers(1, 5))
        e = random_expression(rng, nvars, int(rng.integers(1, 6)))
        lo = rng.uniform(-2, 2, (nvars, per_expr))
        hi = lo + rng.exponential(0.5, (nvars, per_expr)) * (rng.random((nvars, per_expr)) < 0.9)
        iv = eval_interval(e, [Interval(lo[a], hi[a]) for a in range(nvars)])
        pts = lo + (hi - lo) * rng.random((nvars, per_expr))
        pts = np.clip(pts, lo, hi)
        vals = np.broadcast_to(np.asarray(evaluate(e, list(pts)), dtype=float), (per_expr,))
        ilo = np.broadcast_to(np.asarray(iv.lo, dtype=float), (per_expr,))
        ihi = np.broadcast_to(np.asarray(iv.hi, dtype=float), (per_expr,))
        violations += int(np.sum(~((ilo <= vals) & (vals <= ihi))))
        triples += per_expr
    record(7, violations == 0, f"{triples} triples, {violations} violations")


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted((k, v) for k, v in dict(globals()).items() if k.startswith("test_criterion")):
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
