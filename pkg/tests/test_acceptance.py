"""End-to-end acceptance checks.  Each test records a pass/fail line that is
printed in the terminal summary; the assertion is then made at the stated
tolerance."""
import numpy as np
import pytest

from conftest import ACCEPTANCE
from ldirk3 import harness
from ldirk3.integrate import (TAU2, cfl_dt, dirk3_tableau, ie_chain_tableau, limited_coeffs,
                              step_dirk3, step_ie_chain, step_ldirk3)
from ldirk3.limiter import DENSITY, PRESSURE
from ldirk3.mesh import Periodic, build_grid_1d
from ldirk3.nlsolve import SolveSettings
from ldirk3.physics import LINEAR_ADVECTION
from ldirk3.spatial import Semidiscrete

RTOL = SolveSettings().rtol
# every stage-solving run of criteria 1-9, pooled for the Newton contract
STAGE_RUNS = []


def _record(key, ok, detail):
    ACCEPTANCE[key] = (bool(ok), detail)
    print(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")


def _run(case, **kw):
    res = harness.run(case, **kw)
    assert not res.failed, res.message
    if res.reports:
        STAGE_RUNS.append(res)
    return res


def _norm_table(case, ns, **kw):
    rows = []
    for n in ns:
        res = _run(case, n=n, **kw)
        ex = harness.exact_solution(case, res.t, n)
        rows.append(harness.error_norms(res.u[0], ex[0]))
    return rows


def test_criterion_01_dirk3_convergence():
    case = harness.get_case("sin4")
    e400, e800 = _norm_table(case, [400, 800], integrator="dirk3")
    order = harness.observed_order(e400.l1, e800.l1)
    r400, r800 = e400.l1 / 1.02e-7, e800.l1 / 1.27e-8
    ok = (abs(order - 3.0) <= 0.15 and 1 / 3 <= r400 <= 3 and 1 / 3 <= r800 <= 3)
    _record(1, ok, f"L1 order {order:.3f}; L1 {e400.l1:.3e}, {e800.l1:.3e} "
                   f"(ratios to reference {r400:.2f}, {r800:.2f})")
    assert ok


def test_criterion_02_ldirk3_convergence():
    case = harness.get_case("sin4")
    e200, e400 = _norm_table(case, [200, 400], integrator="ldirk3")
    o = {k: harness.observed_order(getattr(e200, k), getattr(e400, k))
         for k in ("linf", "l1", "l2")}
    ok = (1.8 <= o["l1"] <= 2.3 and 1.8 <= o["l2"] <= 2.3 and 1.5 <= o["linf"] <= 2.0)
    _record(2, ok, f"orders Linf {o['linf']:.2f}, L1 {o['l1']:.2f}, L2 {o['l2']:.2f}")
    assert ok


def test_criterion_03_coefficient_identities():
    rng = np.random.default_rng(3)
    t = rng.random((1000, 2))
    c = limited_coeffs(t[:, 0], t[:, 1])
    e2 = np.max(np.abs(c.a21 + c.a22 - TAU2))
    e3 = np.max(np.abs(c.a31 + c.a32 + c.a33 - 1.0))
    A, _, _ = dirk3_tableau()
    Z, _, _ = ie_chain_tableau()
    exact = True
    for th, T in ((1.0, A), (0.0, Z)):
        k = limited_coeffs(th, th)
        got = [k.a21, k.a22, k.a31, k.a32, k.a33]
        want = [T[1, 0], T[1, 1], T[2, 0], T[2, 1], T[2, 2]]
        exact &= all(float(g) == float(w) for g, w in zip(got, want))
    ok = e2 <= 1e-14 and e3 <= 1e-14 and exact
    _record(3, ok, f"row-sum errors {e2:.1e}, {e3:.1e}; endpoint tableaux exact: {exact}")
    assert ok


def test_criterion_04_equivalence_oracles():
    rng = np.random.default_rng(4)
    g = build_grid_1d(0.0, 2 * np.pi, 64, periodic=True)
    op = Semidiscrete(LINEAR_ADVECTION, g, Periodic())
    k = np.arange(1, 5)
    a, ph = rng.standard_normal(4) / k ** 2, rng.random(4) * 2 * np.pi
    u = (np.sin(np.outer(g.x, k) + ph) @ a)[None]
    dt = cfl_dt(g, u, LINEAR_ADVECTION, 2.0)
    s = SolveSettings()
    tol = 10 * s.rtol * float(np.max(np.abs(u)))
    d1 = float(np.max(np.abs(step_ldirk3(u, op, dt, theta_override=1.0, settings=s)
                             - step_dirk3(u, op, dt, s))))
    d0 = float(np.max(np.abs(step_ldirk3(u, op, dt, theta_override=0.0, settings=s)
                             - step_ie_chain(u, op, dt, s))))
    ok = d1 <= tol and d0 <= tol
    _record(4, ok, f"theta=1 vs DIRK3 {d1:.1e}, theta=0 vs IE chain {d0:.1e} (bound {tol:.1e})")
    assert ok


def test_criterion_05_conservation():
    case = harness.get_case("burgers")
    ok, lines = True, []
    for kind in ("ie", "dirk3", "ldirk3", "bdf2", "global-tvd", "ssprk3"):
        # explicit SSPRK3 is unstable at CFL 3; it runs at its own stable CFL
        cfl = 0.9 if kind == "ssprk3" else 3.0
        res = _run(case, integrator=kind, cfl=cfl, max_steps=20)
        u0 = case.initial_field()
        dx = res.grid.dx
        drift = abs(float(np.sum(res.u - u0)) * dx)
        # |sum R dx| <= sqrt(n) dx ||R||_2 for each stage
        acc = sum(RTOL * r.initial_residual for r in res.reports) * np.sqrt(u0.size) * dx
        bound = 50 * acc + 1e-12 * res.steps
        ok &= drift <= bound
        lines.append(f"{kind} {drift:.1e}/{bound:.1e}")
    _record(5, ok, "drift/bound: " + ", ".join(lines))
    assert ok


def test_criterion_06_multiwave_tv():
    case = harness.get_case("multiwave")
    lim = _run(case, integrator="ldirk3")
    plain = _run(case, integrator="dirk3")
    tv0, tvl, tvd = lim.tv_history[0], lim.tv_history[-1], plain.tv_history[-1]
    ok = tvl <= 1.05 * tv0 and tvd > tvl
    _record(6, ok, f"TV initial {tv0:.4f}, L-DIRK3 {tvl:.4f}, DIRK3 {tvd:.4f}")
    assert ok


def test_criterion_07_sod_overshoot():
    case = harness.get_case("sod")
    metric = {}
    for label, kw in (("dirk3", dict(integrator="dirk3")),
                      ("density", dict(integrator="ldirk3", ref=DENSITY)),
                      ("pressure", dict(integrator="ldirk3", ref=PRESSURE))):
        metric[label] = harness.overshoot_metric(_run(case, **kw).u[0], 0.125, 1.0)
    base = metric["dirk3"]
    rd, rp = metric["density"] / base, metric["pressure"] / base
    ok = base > 0 and rd <= 0.25 and rp <= 0.25
    _record(7, ok, f"DIRK3 metric {base:.3e}; ratios density {rd:.3f}, pressure {rp:.3f}")
    assert ok


# (Linf, L1, L2) of density after one diagonal period at N=150
REFERENCE_VORTEX_NORMS = {"dirk3": (2.39e-2, 5.36e-3, 6.72e-3),
                          "ldirk3": (3.37e-2, 2.72e-3, 3.95e-3)}


def _vortex_norms(n):
    case = harness.get_case("vortex")
    out = {}
    for kind in ("dirk3", "ldirk3"):
        res = _run(case, n=n, integrator=kind)
        ex = harness.exact_solution(case, res.t, n)
        out[kind] = harness.error_norms(res.u[0], ex[0])
    return out


def _orderings(e):
    d, l = e["dirk3"], e["ldirk3"]
    return l.l1 < d.l1 and l.l2 < d.l2 and l.linf > d.linf


def _fmt(e):
    return "; ".join(f"{k} Linf {v.linf:.2e} L1 {v.l1:.2e} L2 {v.l2:.2e}" for k, v in e.items())


def test_criterion_08_vortex_smoke_orderings():
    e = _vortex_norms(75)
    ok = _orderings(e)
    _record("8s", ok, f"N=75 orderings {'hold' if ok else 'violated'}: {_fmt(e)}")
    assert ok


@pytest.mark.slow
def test_criterion_08_vortex_table():
    e = _vortex_norms(150)
    within = all(0.5 * ref <= got <= 1.5 * ref
                 for kind, refs in REFERENCE_VORTEX_NORMS.items()
                 for ref, got in zip(refs, (e[kind].linf, e[kind].l1, e[kind].l2)))
    ok = _orderings(e) and within
    _record(8, ok, f"orderings {_orderings(e)}, magnitudes within 50% {within}: {_fmt(e)}")
    assert ok


def _band(ref):
    lo, hi = float(ref.min()), float(ref.max())
    pad = 0.02 * (hi - lo)
    return lo - pad, hi + pad


def test_criterion_09_convection_diffusion_band():
    ok, lines = True, []
    for name in ("viscous-burgers", "viscous-bl"):
        case = harness.get_case(name)
        lo, hi = _band(harness.reference_solution(case)[0])
        lim = _run(case, integrator="ldirk3").u[0]
        plain = _run(case, integrator="dirk3").u[0]
        lim_in = lim.min() >= lo and lim.max() <= hi
        plain_in = plain.min() >= lo and plain.max() <= hi
        ok &= lim_in and not plain_in
        lines.append(f"{name} band [{lo:.4f}, {hi:.4f}] L-DIRK3 [{lim.min():.4f}, "
                     f"{lim.max():.4f}] DIRK3 [{plain.min():.4f}, {plain.max():.4f}]")
    _record(9, ok, "; ".join(lines))
    assert ok


def test_criterion_10_weno5_spatial_order():
    case = harness.get_case("sin4")
    rows = _norm_table(case, [40, 80, 160], integrator="ssprk3", cfl=0.1)
    orders = [harness.observed_order(a.l1, b.l1) for a, b in zip(rows, rows[1:])]
    ok = all(o >= 4.5 for o in orders)
    _record(10, ok, "L1 orders " + ", ".join(f"{o:.2f}" for o in orders))
    assert ok


def test_criterion_11_newton_contract():
    if not STAGE_RUNS:
        pytest.skip("no implicit runs in this session")
    reports = [r for res in STAGE_RUNS for r in res.reports]
    converged = [r for r in reports if r.converged]
    contract = all(r.final_residual <= RTOL * r.initial_residual for r in converged)
    capped = all(r.iterations <= 30 for r in reports)
    frac = sum(not r.converged for r in reports) / len(reports)
    ok = contract and capped and frac < 0.05
    _record(11, ok, f"{len(reports)} stages; converged within tolerance {contract}; "
                    f"iterations capped {capped}; non-converged fraction {frac:.2%}")
    assert ok
