"""Brockett, Coron and strong (cohomology-sphere) obstruction checks."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import ndimage

from .cubical import CapacityError
from .degree import (
    DegreeError,
    InducedMapReport,
    ProbeLoop,
    circle_probe,
    loop_image_winding,
    loop_projection_winding,
    top_degree_detail,
)
from .homology import HomologyProfile, cohomology, cubical_homology, sphere_mismatch
from .sigma import (
    AnalysisParams,
    CubicalComplex,
    VectorFieldSystem,
    build_sigma_complex,
    sample_image,
)

log = logging.getLogger(__name__)


class Condition(str, Enum):
    BROCKETT = "Brockett"
    CORON_CLASSICAL = "CoronClassical"
    CORON_STRONG = "CoronStrong"


class Outcome(str, Enum):
    VIOLATED = "Violated"
    SATISFIED = "Satisfied"
    INCONCLUSIVE = "Inconclusive"


class Verdict(str, Enum):
    NOT_STABILIZABLE = "NotStabilizable"
    NO_OBSTRUCTION_FOUND = "NoObstructionFound"


NON_SUFFICIENCY = (
    "No obstruction was found, which does not imply stabilizability: all three "
    "conditions are necessary but not sufficient (f(x,u) = x satisfies every one "
    "of them and cannot be stabilized)."
)
STABILIZATION_CAVEAT = (
    "Groups are those of a certified cubical inner approximation; an absence "
    "(missing class, missing coverage) is only reported as a violation when it "
    "is the same on the two finest resolutions."
)
CECH_CAVEAT = (
    "Cech cohomology is identified with cellular cohomology of the certified "
    "cubical complex; agreement with the limit over neighborhoods is a "
    "stabilization heuristic, not a theorem."
)
COMPACTNESS_NOTE = (
    "The closed set used by the strong condition excludes the zero set of f and "
    "need not be compact (f(x,u) = x gives (B minus 0) x B); the certified union "
    "of closed cubes used here is compact."
)


@dataclass
class ConditionResult:
    condition: Condition
    outcome: Outcome
    evidence: dict = field(default_factory=dict)
    stabilized: bool = False

    def __post_init__(self):
        if self.outcome is Outcome.VIOLATED and not self.stabilized:
            raise ValueError("a violation must rest on stabilized evidence")

    def to_dict(self) -> dict:
        return {"condition": self.condition.value, "outcome": self.outcome.value,
                "stabilized": self.stabilized, "evidence": self.evidence}


@dataclass
class ResolutionAnalysis:
    """Certified complex and its (co)homology at one grid resolution."""

    resolution: int
    complex: CubicalComplex
    profile: HomologyProfile | None = None
    error: str | None = None

    @property
    def cohomology(self) -> HomologyProfile | None:
        return None if self.profile is None else cohomology(self.profile)


def analyze_resolution(sys: VectorFieldSystem, params: AnalysisParams, resolution: int) -> ResolutionAnalysis:
    cplx = build_sigma_complex(sys, params, resolution)
    if len(cplx) == 0:
        top = sys.dim
        empty = HomologyProfile([0] * (top + 1), [[] for _ in range(top + 1)],
                                [[] for _ in range(top + 1)])
        return ResolutionAnalysis(resolution, cplx, empty)
    try:
        profile = cubical_homology(cplx, max_cells=params.max_cells)
    except CapacityError as exc:
        log.warning("resolution %d skipped: %s", resolution, exc)
        return ResolutionAnalysis(resolution, cplx, None, str(exc))
    log.info("resolution %d: %d cubes, %s", resolution, len(cplx), profile.label())
    return ResolutionAnalysis(resolution, cplx, profile)


def _finest(levels, count=2):
    ok = [lv for lv in levels if lv.profile is not None]
    return ok[-count:]


def betti_table(profile: HomologyProfile) -> dict:
    return {f"H{k}": b for k, b in enumerate(profile.betti)}


def torsion_table(profile: HomologyProfile) -> dict:
    return {f"H{k}": list(t) for k, t in enumerate(profile.torsion)}


# Probes ----------------------------------------------------------------------


def loop_certified(loop: ProbeLoop, cplx: CubicalComplex) -> bool:
    return all(cplx.contains_point(p) for p in loop.points)


def auto_probes(sys: VectorFieldSystem, params: AnalysisParams, cplx: CubicalComplex) -> list[ProbeLoop]:
    """Circles about the origin in every coordinate plane touching a state axis.

    For each plane the radii rho, 2 rho, 3 rho, ... below epsilon are tried
    and the first circle lying inside the certified complex is kept.
    """
    out = []
    radii = [k * params.probe_radius for k in range(1, 8) if k * params.probe_radius < params.epsilon]
    for i in range(sys.n):
        for j in range(i + 1, sys.dim):
            chosen = None
            for r in radii:
                loop = circle_probe(sys.dim, i, j, r)
                if loop_certified(loop, cplx):
                    chosen = loop
                    break
            out.append(chosen if chosen is not None else circle_probe(sys.dim, i, j, radii[0]))
    return out


def _bezout(values):
    """Integers a with sum(a_i v_i) = gcd(values)."""
    g, coeffs = 0, [0] * len(values)
    for idx, v in enumerate(values):
        # extended Euclid on (g, v)
        old_r, r, old_s, s, old_t, t = g, v, 1, 0, 0, 1
        while r:
            q = old_r // r
            old_r, r = r, old_r - q * r
            old_s, s = s, old_s - q * s
            old_t, t = t, old_t - q * t
        coeffs = [c * old_s for c in coeffs]
        coeffs[idx] = old_t
        g = old_r
    if g < 0:
        g, coeffs = -g, [-c for c in coeffs]
    return g, coeffs


def _degree_record(sys, params, chain, grid, **extra):
    rec = dict(extra)
    rec["cells"] = len(chain)
    try:
        deg, v = top_degree_detail(sys, chain, grid, seed=params.seed, delta=params.delta,
                                   tau=params.tau, max_retries=params.max_retries)
        rec["degree"] = int(deg)
        rec["regular_value"] = [round(float(c), 12) for c in v]
    except DegreeError as exc:
        rec["degree"] = None
        rec["error"] = f"{type(exc).__name__}: {exc}"
    return rec


def induced_maps(sys: VectorFieldSystem, params: AnalysisParams, levels: list[ResolutionAnalysis],
                 probes: list[ProbeLoop]) -> InducedMapReport:
    """Probe windings and degrees of the top generators on the two finest levels."""
    report = InducedMapReport()
    finest = _finest(levels)
    if not finest:
        return report
    fine = finest[-1]
    for loop in probes:
        rec = {"name": loop.name, "projection": list(loop.projection),
               "certified": loop_certified(loop, fine.complex)}
        try:
            rec["domain_winding"] = loop_projection_winding(loop)
        except DegreeError as exc:
            rec["domain_winding"] = None
            rec["domain_error"] = f"{type(exc).__name__}: {exc}"
        if sys.n == 2:
            try:
                rec["degree"] = loop_image_winding(sys, loop, (0, 1), params.delta)
            except DegreeError as exc:
                rec["degree"] = None
                rec["error"] = f"{type(exc).__name__}: {exc}"
        report.probes.append(rec)
    if sys.n < 2:
        return report
    k = sys.n - 1
    for lv in finest:
        gens = lv.profile.representatives[k] if k < len(lv.profile.representatives) else []
        grid = lv.complex.grid
        degrees = []
        for idx, gen in enumerate(gens):
            rec = _degree_record(sys, params, gen, grid, resolution=lv.resolution, generator=idx)
            report.generators.append(rec)
            degrees.append(rec["degree"])
        if len(gens) > 1 and None not in degrees and not any(abs(d) == 1 for d in degrees):
            g, coeffs = _bezout(degrees)
            if g == 1:
                combo: dict = {}
                for a, gen in zip(coeffs, gens):
                    for cell, c in gen.items():
                        v = combo.get(cell, 0) + a * c
                        if v:
                            combo[cell] = v
                        else:
                            combo.pop(cell, None)
                report.generators.append(_degree_record(
                    sys, params, combo, grid, resolution=lv.resolution,
                    generator="combination", coefficients=coeffs))
    return report


def projection_witnesses(sys: VectorFieldSystem, cplx: CubicalComplex, probes: list[ProbeLoop]) -> list[dict]:
    """Coordinate planes whose projection never vanishes on the complex.

    A certified loop winding once in such a plane shows the complex has
    nonzero first cohomology.
    """
    r = cplx.resolution
    near = [r // 2 - 1, r // 2]
    out = []
    for i in range(sys.dim):
        for j in range(i + 1, sys.dim):
            blocked = np.take(np.take(cplx.included, near, axis=i), near, axis=j)
            if blocked.any():
                continue
            loops = [p for p in probes if tuple(p.projection) == (i, j) and loop_certified(p, cplx)]
            windings = []
            for p in loops:
                try:
                    windings.append(loop_projection_winding(p))
                except DegreeError:
                    continue
            out.append({"plane": [i, j], "certified_loop_windings": windings,
                        "first_cohomology_nonzero": any(w != 0 for w in windings)})
    return out


# Checks ----------------------------------------------------------------------


def check_brockett(sys: VectorFieldSystem, params: AnalysisParams) -> ConditionResult:
    """Image coverage of a ball about 0, compared across the two finest sampling densities."""
    res = list(params.resolutions[-2:])
    fine = sample_image(sys, params, res[-1])
    evidence = {"rho_img": fine.rho_img, "image_cells": fine.cells,
                "samples": {str(res[-1]): int(len(fine.values))}}
    if fine.rho_img <= 0:
        evidence["note"] = "f vanishes on at least a quarter of the samples"
        return ConditionResult(Condition.BROCKETT, Outcome.INCONCLUSIVE, evidence, False)
    holes_fine = set(fine.holes)
    if len(res) > 1:
        coarse = sample_image(sys, params, res[0], rho_img=fine.rho_img)
        evidence["samples"][str(res[0])] = int(len(coarse.values))
        holes_coarse = set(coarse.holes)
    else:
        holes_coarse = None
    evidence["uncovered_cells"] = {str(res[-1]): len(holes_fine)}
    if holes_coarse is not None:
        evidence["uncovered_cells"][str(res[0])] = len(holes_coarse)
    if not holes_fine:
        return ConditionResult(Condition.BROCKETT, Outcome.SATISFIED, evidence,
                               holes_coarse is not None and not holes_coarse)
    persistent = sorted(holes_fine & holes_coarse) if holes_coarse is not None else []
    if persistent:
        axis = fine.axis_holes()
        evidence["persistent_holes"] = [list(c) for c in persistent]
        evidence["uncovered_axis_cells"] = {
            f"f{a + 1}": [{"cell": list(c), "range": list(fine.cell_bounds(c)[a])}
                          for c in cells if c in holes_coarse]
            for a, cells in axis.items()
        }
        return ConditionResult(Condition.BROCKETT, Outcome.VIOLATED, evidence, True)
    return ConditionResult(Condition.BROCKETT, Outcome.INCONCLUSIVE, evidence, False)


def _one_dim_signs(sys, lv):
    """Signs of f on the connected components of the complex (n = 1)."""
    # closed cubes touching at a corner are connected
    labels, count = ndimage.label(lv.complex.included, structure=np.ones((3,) * lv.complex.dim))
    signs = set()
    for comp in range(1, count + 1):
        idx = np.argwhere(labels == comp)[0]
        lo, hi = lv.complex.cube_bounds(idx)
        value = float(sys((lo + hi) / 2)[0])
        signs.add(1 if value > 0 else -1)
    return signs


def check_coron_classical(sys: VectorFieldSystem, params: AnalysisParams,
                          levels: list[ResolutionAnalysis], probes: list[ProbeLoop],
                          induced: InducedMapReport | None = None) -> ConditionResult:
    """Surjectivity of f_* on degree n-1 homology of the certified complex."""
    k = sys.n - 1
    finest = _finest(levels)
    if not finest:
        return ConditionResult(Condition.CORON_CLASSICAL, Outcome.INCONCLUSIVE,
                               {"note": "no homology available"}, False)
    bettis = {str(lv.resolution): lv.profile.betti[k] for lv in finest}
    stabilized = len(finest) == 2 and len(set(bettis.values())) == 1
    evidence = {"degree": k, "betti": bettis}
    if sys.n == 1:
        signs = _one_dim_signs(sys, finest[-1])
        evidence["component_signs"] = sorted(signs)
        if signs == {-1, 1}:
            return ConditionResult(Condition.CORON_CLASSICAL, Outcome.SATISFIED, evidence, stabilized)
        if stabilized:
            return ConditionResult(Condition.CORON_CLASSICAL, Outcome.VIOLATED, evidence, True)
        return ConditionResult(Condition.CORON_CLASSICAL, Outcome.INCONCLUSIVE, evidence, stabilized)
    if induced is None:
        induced = induced_maps(sys, params, levels, probes)
    witnesses = [p["name"] for p in induced.probes
                 if p.get("certified") and p.get("degree") is not None and abs(p["degree"]) == 1]
    witnesses += [f"H{k} generator {g['generator']} @ {g['resolution']}" for g in induced.generators
                  if g.get("degree") is not None and abs(g["degree"]) == 1]
    evidence["probe_degrees"] = {p["name"]: p.get("degree") for p in induced.probes if "degree" in p}
    evidence["generator_degrees"] = [
        {key: g[key] for key in ("resolution", "generator", "degree") if key in g}
        for g in induced.generators]
    if witnesses:
        evidence["witnesses"] = witnesses
        return ConditionResult(Condition.CORON_CLASSICAL, Outcome.SATISFIED, evidence, stabilized)
    if stabilized and all(b == 0 for b in bettis.values()):
        evidence["note"] = f"H{k} vanishes on both finest resolutions"
        return ConditionResult(Condition.CORON_CLASSICAL, Outcome.VIOLATED, evidence, True)
    evidence["note"] = "no class of degree +-1 was found"
    return ConditionResult(Condition.CORON_CLASSICAL, Outcome.INCONCLUSIVE, evidence, stabilized)


def check_strong(sys: VectorFieldSystem, params: AnalysisParams,
                 levels: list[ResolutionAnalysis], probes: list[ProbeLoop],
                 induced: InducedMapReport | None = None) -> ConditionResult:
    """Cohomology-sphere test, then the isomorphism test in degree n-1."""
    d = sys.n - 1
    finest = _finest(levels)
    if not finest:
        return ConditionResult(Condition.CORON_STRONG, Outcome.INCONCLUSIVE,
                               {"note": "no homology available"}, False)
    cos = [lv.cohomology for lv in finest]
    top = max(c.top_dim for c in cos)
    cos = [c.padded(top) for c in cos]
    stable_degrees = [k for k in range(top + 1)
                      if len(cos) == 2 and cos[0].betti[k] == cos[1].betti[k]
                      and cos[0].torsion[k] == cos[1].torsion[k]]
    mismatch = sphere_mismatch(finest[-1].profile, d)
    evidence = {
        "sphere_dimension": d,
        "cohomology": {str(lv.resolution): {"betti": betti_table(c), "torsion": torsion_table(c)}
                       for lv, c in zip(finest, cos)},
        "stable_degrees": stable_degrees,
        "mismatched_degrees": mismatch,
        "projection_witnesses": projection_witnesses(sys, finest[-1].complex, probes),
    }
    fully_stable = len(stable_degrees) == top + 1
    if mismatch:
        offending = [k for k in mismatch if k in stable_degrees]
        if offending:
            evidence["offending_degrees"] = offending
            return ConditionResult(Condition.CORON_STRONG, Outcome.VIOLATED, evidence, True)
        evidence["note"] = "sphere test fails only in degrees that have not stabilized"
        return ConditionResult(Condition.CORON_STRONG, Outcome.INCONCLUSIVE, evidence, False)

    if sys.n == 1:
        signs = _one_dim_signs(sys, finest[-1])
        evidence["component_signs"] = sorted(signs)
        if signs == {-1, 1}:
            return ConditionResult(Condition.CORON_STRONG, Outcome.SATISFIED, evidence, fully_stable)
        if fully_stable:
            evidence["note"] = "both components map to the same side of 0"
            return ConditionResult(Condition.CORON_STRONG, Outcome.VIOLATED, evidence, True)
        return ConditionResult(Condition.CORON_STRONG, Outcome.INCONCLUSIVE, evidence, False)

    if induced is None:
        induced = induced_maps(sys, params, levels, probes)
    by_level = {}
    for g in induced.generators:
        if g.get("generator") != "combination":
            by_level.setdefault(g["resolution"], []).append(g)
    fine_gens = by_level.get(finest[-1].resolution, [])
    evidence["top_degrees"] = {str(r): [g.get("degree") for g in gs] for r, gs in by_level.items()}
    # a continuous image of a connected space is connected, so betti_0 = 1
    # on the domain side settles connectivity of the image as well
    connected = finest[-1].profile.betti[0] == 1
    if any(g.get("degree") is None for g in fine_gens) or not fine_gens:
        evidence["note"] = "degree evaluation failed"
        return ConditionResult(Condition.CORON_STRONG, Outcome.INCONCLUSIVE, evidence, fully_stable)
    degrees = [g["degree"] for g in fine_gens]
    if connected and any(abs(x) == 1 for x in degrees):
        return ConditionResult(Condition.CORON_STRONG, Outcome.SATISFIED, evidence, fully_stable)
    coarse_gens = by_level.get(finest[0].resolution, []) if len(finest) == 2 else []
    coarse_degrees = [g.get("degree") for g in coarse_gens]
    if fully_stable and len(finest) == 2 and coarse_degrees == degrees:
        evidence["note"] = f"f/|f| has degree {degrees} on the H{d} generator, not +-1"
        return ConditionResult(Condition.CORON_STRONG, Outcome.VIOLATED, evidence, True)
    evidence["note"] = "sphere test passes but the induced map is not yet shown to be an isomorphism"
    return ConditionResult(Condition.CORON_STRONG, Outcome.INCONCLUSIVE, evidence, fully_stable)


# Pipeline --------------------------------------------------------------------


@dataclass
class Report:
    system: dict
    params: dict
    levels: list[dict]
    induced_maps: dict
    conditions: list[ConditionResult]
    verdict: Verdict
    caveats: list[str]
    aborted: bool = False

    def condition(self, which: Condition) -> ConditionResult:
        return next(c for c in self.conditions if c.condition is which)


def _params_echo(params: AnalysisParams) -> dict:
    return {"epsilon": params.epsilon, "resolutions": list(params.resolutions),
            "probe_radius": params.probe_radius, "samples_per_cube": params.samples_per_cube,
            "image_cells": params.image_cells, "seed": params.seed, "max_cells": params.max_cells,
            "delta": params.delta, "tau": params.tau, "max_retries": params.max_retries}


def _level_echo(lv: ResolutionAnalysis) -> dict:
    out = {"resolution": lv.resolution, "top_cubes": len(lv.complex),
           "total_cubes": int(lv.complex.included.size)}
    if lv.profile is None:
        out["error"] = lv.error
        return out
    co = lv.cohomology
    out.update({
        "homology": {"betti": betti_table(lv.profile), "torsion": torsion_table(lv.profile)},
        "cohomology": {"betti": betti_table(co), "torsion": torsion_table(co)},
        "generator_sizes": {f"H{k}": [len(g) for g in gens]
                            for k, gens in enumerate(lv.profile.representatives) if gens},
    })
    return out


def analyze(sys: VectorFieldSystem, params: AnalysisParams, probes: list[ProbeLoop] = ()) -> Report:
    """Run all three checks (never short-circuiting) and assemble a report."""
    sys.check_equilibrium()
    levels = [analyze_resolution(sys, params, r) for r in params.resolutions]
    finest = _finest(levels)
    all_probes = list(probes)
    if finest:
        all_probes += auto_probes(sys, params, finest[-1].complex)
    induced = induced_maps(sys, params, levels, all_probes)
    results = [
        check_brockett(sys, params),
        check_coron_classical(sys, params, levels, all_probes, induced),
        check_strong(sys, params, levels, all_probes, induced),
    ]
    violated = any(r.outcome is Outcome.VIOLATED for r in results)
    verdict = Verdict.NOT_STABILIZABLE if violated else Verdict.NO_OBSTRUCTION_FOUND
    caveats = [STABILIZATION_CAVEAT, CECH_CAVEAT, COMPACTNESS_NOTE]
    if not violated:
        caveats.insert(0, NON_SUFFICIENCY)
    aborted = any(lv.profile is None for lv in levels)
    if aborted:
        caveats.append("some resolutions exceeded the cell limit and were skipped")
    system = {"name": sys.name, "n": sys.n, "m": sys.m, "components": sys.texts}
    return Report(system, _params_echo(params), [_level_echo(lv) for lv in levels],
                  induced.to_dict(), results, verdict, caveats, aborted)
