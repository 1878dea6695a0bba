"""Acceptance gate: one test and one PASS/FAIL line per criterion, at the stated tolerances."""

import time
from fractions import Fraction

import pytest

from altcsit.composer import achieved_point, applicable_targets, compose_corner, feasible, synergy_gap
from altcsit.metrics import DEFAULT_BLOCKS, DEFAULT_GRID, DEFAULT_TOL, verify_scheme
from altcsit.region import (
    fixed_state_region,
    min_csit,
    region_vertices,
    security_cost,
    security_cost_alpha,
    sum_dof_no_secrecy,
    sum_sdof,
    sum_sdof_min_form,
    vertices_of,
    _cost_piecewise,
)
from altcsit.schemes import SchemeId, build_plan, catalog_entry, verification_ids
from altcsit.states import enhance, marginals, symmetric_pmf, validate_pmf

from conftest import ACCEPTANCE, random_pmfs

F = Fraction


def record(k: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[k] = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE[k])


def P(**kw):
    return validate_pmf(kw)


# ---------------------------------------------------------------------------


def test_criterion_1_region_corners():
    cases = [
        (P(PD=F(1, 2), DP=F(1, 2)), (F(3, 4), F(3, 4))),
        (P(DD=1), (F(1, 2), F(1, 2))),
        (P(PP=1), (F(1), F(1))),
        (P(PD=F(1, 3), DP=F(1, 3), NN=F(1, 3)), (F(2, 3), F(2, 3))),
        (P(PN=F(1, 3), NP=F(1, 3), DD=F(1, 3)), (F(2, 3), F(2, 3))),
    ]
    t0 = time.perf_counter()
    hits = [corner in region_vertices(p).vertices for p, corner in cases]
    elapsed = time.perf_counter() - t0
    ok = all(hits) and elapsed < 1.0
    record(1, ok, f"{sum(hits)}/{len(cases)} corners found exactly in {elapsed:.3f} s (limit 1 s)")
    assert ok


def test_criterion_2_sum_values():
    cases = [
        (P(PD=F(2, 5), DP=F(2, 5), NN=F(1, 5)), F(7, 5)),
        (P(PD=F(1, 5), DP=F(1, 5), NN=F(3, 5)), F(4, 5)),
        (P(PD=F(1, 2), DP=F(1, 2)), F(3, 2)),
        (P(PD=F(1, 3), DP=F(1, 3), NN=F(1, 3)), F(4, 3)),
        (P(PN=F(1, 3), NP=F(1, 3), DD=F(1, 3)), F(4, 3)),
        (P(DD=F(1, 2), NN=F(1, 2)), F(1)),
        (P(DN=F(1, 2), ND=F(1, 2)), F(1)),
    ]
    got = [sum_sdof(p) for p, _ in cases]
    ok = all(g == v for g, (_, v) in zip(got, cases))
    record(2, ok, "sums " + ", ".join(str(g) for g in got))
    assert ok


def test_criterion_3_composer_exactness():
    pmfs = random_pmfs(10_000, seed=2024)
    t0 = time.perf_counter()
    bad, uncovered, corners = [], [], 0
    for p in pmfs:
        verts = set(region_vertices(p).vertices)
        reached = set()
        for t in applicable_targets(p):
            a = compose_corner(p, t)
            d = achieved_point(a)
            corners += 1
            if d not in verts or not feasible(a, p)[0]:
                bad.append((p, t))
            reached.add(d)
        if verts - {(0, 0)} - reached:
            uncovered.append(p)
    elapsed = time.perf_counter() - t0
    ok = not bad and not uncovered and elapsed < 60.0
    record(3, ok, f"{len(pmfs)} pmfs, {corners} corners, {len(bad)} inexact/infeasible, {len(uncovered)} uncovered, {elapsed:.1f} s (limit 60 s)")
    assert ok


_VERIFY: dict = {}


def _verified(sid: SchemeId) -> tuple[dict, float]:
    if sid not in _VERIFY:
        pair = catalog_entry(sid).pair
        t0 = time.perf_counter()
        report = verify_scheme(build_plan(sid), (float(pair[0]), float(pair[1])), DEFAULT_BLOCKS, DEFAULT_GRID, seed=0, tol=DEFAULT_TOL)
        _VERIFY[sid] = (report, time.perf_counter() - t0)
    return _VERIFY[sid]


def test_criterion_4_scheme_verification():
    lines, ok = [], True
    for sid in verification_ids((1, 2, 3, 5)):
        report, elapsed = _verified(sid)
        good = report["pass"] and report["decodable_rate"] == 1.0 and elapsed < 30.0
        ok &= good
        if not good:
            lines.append(f"{sid} d={report['message_dof']} leak={report['leakage_dof']} {elapsed:.1f}s")
    worst_leak = max(max(_verified(s)[0]["leakage_dof"]) for s in verification_ids())
    worst_time = max(_verified(s)[1] for s in verification_ids())
    record(4, ok, f"{len(verification_ids())} schemes, worst leak {worst_leak:.4f}, slowest {worst_time:.2f} s" + ("; " + "; ".join(lines) if lines else ""))
    assert ok


def test_criterion_5_s3_convergence():
    ns = (1, 2, 3, 5)
    pairs = [_verified(SchemeId("S3_1", n))[0]["message_dof"] for n in ns]
    close = all(abs(d - 2 * n / (4 * n + 1)) <= 0.05 for n, pair in zip(ns, pairs) for d in pair)
    rising = all(a[k] < b[k] for a, b in zip(pairs, pairs[1:]) for k in range(2))
    ok = close and rising
    record(5, ok, "d1 by n: " + ", ".join(f"n={n}:{p[0]:.4f}" for n, p in zip(ns, pairs)))
    assert ok


def test_criterion_6_fixed_state_regions():
    checks = {}
    for name, expect in (("PD_10", (1.0, 0.0)), ("PD_01", (0.0, 1.0)), ("DN_half_0", (0.5, 0.0)), ("DN_0_half", (0.0, 0.5))):
        r = verify_scheme(build_plan(name), expect, DEFAULT_BLOCKS, DEFAULT_GRID, seed=0, tol=DEFAULT_TOL)
        checks[name] = r["pass"] and max(r["leakage_dof"]) <= 0.05
    pd = fixed_state_region("PD")
    dn = fixed_state_region("DN")
    checks["PD sum<=1"] = max(x + y for x, y in vertices_of(pd).vertices) == 1 and pd.contains((F(1), F(0))) and pd.contains((F(0), F(1)))
    checks["PD rejects"] = not pd.contains((F(1, 2), F(1, 2) + F(1, 100)))
    checks["DN sum<=1/2"] = max(x + y for x, y in vertices_of(dn).vertices) == F(1, 2) and dn.contains((F(1, 2), F(0))) and dn.contains((F(0), F(1, 2)))
    checks["DN rejects"] = not dn.contains((F(1, 4), F(1, 4) + F(1, 100)))
    ok = all(checks.values())
    record(6, ok, ", ".join(f"{k}={'ok' if v else 'bad'}" for k, v in checks.items()))
    assert ok


def test_criterion_7_formula_identities():
    pmfs = random_pmfs(5_000, seed=7) + random_pmfs(5_000, seed=8, palette=tuple(range(0, 25)))
    fails = {"sum forms": 0, "cost": 0, "enhancement": 0, "min_csit": 0}
    for p in pmfs:
        m = marginals(p)
        if sum_sdof_min_form(p) != 2 * m.lambda_p + m.lambda_d + min(m.lambda_d, m.lambda_n):
            fails["sum forms"] += 1
        cost = _cost_piecewise(m.lambda_d, m.lambda_n)
        if not (security_cost(p) == cost == security_cost_alpha(p) == sum_dof_no_secrecy(p) - sum_sdof(p)):
            fails["cost"] += 1
        if m.lambda_d >= m.lambda_n and sum_sdof(enhance(p, "N_to_D")) != sum_sdof(p):
            fails["enhancement"] += 1
        if m.lambda_d <= m.lambda_n and sum_sdof(enhance(p, "D_to_P")) != sum_sdof(p):
            fails["enhancement"] += 1
    targets = sorted({F(k, 60) for k in range(121)} | {F(3, 2), F(4, 3), F(7, 5)})
    for s in targets:
        lp, ld = min_csit(s)
        if sum_sdof(symmetric_pmf(pp=lp, dd=ld, nn=1 - lp - ld)) != s:
            fails["min_csit"] += 1
    ok = not any(fails.values())
    record(7, ok, f"{len(pmfs)} pmfs, {len(targets)} s values, failures {fails}")
    assert ok


def test_criterion_8_synergy_table():
    cases = [
        (P(PD=F(1, 2), DP=F(1, 2)), (F(3, 2), F(1))),
        (P(PD=F(1, 3), DP=F(1, 3), NN=F(1, 3)), (F(4, 3), F(2, 3))),
        (P(PN=F(1, 3), NP=F(1, 3), DD=F(1, 3)), (F(4, 3), F(1))),
        (P(DD=F(1, 2), NN=F(1, 2)), (F(1), F(1, 2))),
        (P(DN=F(1, 2), ND=F(1, 2)), (F(1), F(1, 2))),
        (P(PN=F(1, 2), NP=F(1, 2)), (F(1), F(1))),
    ]
    got = [synergy_gap(p) for p, _ in cases]
    ok = all(g == want for g, (_, want) in zip(got, cases))
    record(8, ok, "; ".join(f"{a} vs {b}" for a, b in got))
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
