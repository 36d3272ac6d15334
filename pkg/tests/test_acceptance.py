"""Acceptance criteria, one test each, each printing a PASS/FAIL line.

Criteria 4-6 run 100 replications with 10^6 Monte Carlo probes (several
minutes in total); criterion 7 reuses their reports.
"""
import math

import numpy as np

from polyreach import (
    BoundingBox,
    ExperimentConfig,
    Frame,
    Pacman,
    PointCloud,
    PolyFit,
    ReachConfig,
    UnionOfSquares,
    coefficient_distance,
    estimate_coefficients,
    exact_volume_curve,
    l2_project,
    mc_distance_transform,
    norm_equivalence_constant,
    preset_grid,
    reach_lower_bound,
    run_experiment,
    true_reach,
)
from polyreach.reach import arithmetic_grid
from polyreach.polyfit import gram_matrix, norm_grid

MASTER_SEED = 0
REPS = 100
_reports = {}


def report_line(capsys, k, ok, detail):
    with capsys.disabled():
        print(f"\n[acceptance] criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")


def experiment(key):
    if key not in _reports:
        cfgs = {
            4: ExperimentConfig(Pacman(), 4000, REPS, grid=preset_grid("gr1"), ell=10, master_seed=MASTER_SEED),
            5: ExperimentConfig(UnionOfSquares(0.05), 1800, REPS, grid=arithmetic_grid(0.12, 0.4, 1.98),
                                grid_name="explicit:0.12+0.4k", ell=10, master_seed=MASTER_SEED),
            6: ExperimentConfig(Pacman(), 5000, REPS, grid=preset_grid("gr1"), ell=8, master_seed=MASTER_SEED),
        }
        _reports[key] = run_experiment(cfgs[key])
    return _reports[key]


def exact(region):
    return exact_volume_curve(region, np.linspace(0, 2, 2001))


def test_criterion_1_exact_coefficients(capsys):
    cases = [
        ("pacman", Pacman(), (2.3562, 6.7124, 2.9270)),
        ("squares", UnionOfSquares(), (8, 16, 6.2832)),
        ("frame", Frame(1.0), (3, 12, -0.8584)),
    ]
    errs = {}
    for name, region, truth in cases:
        fit = estimate_coefficients(exact(region), true_reach(region), 0.0)
        errs[name] = float(np.max(np.abs(fit.coefficients - truth)))
    ok = all(e <= 1e-4 for e in errs.values())
    report_line(capsys, 1, ok, "max |theta - truth| " + ", ".join(f"{k} {v:.1e}" for k, v in errs.items()))
    assert ok


def test_criterion_2_projection_properties(capsys):
    rng = np.random.default_rng(2024)
    fails = {"idempotence": 0, "contraction": 0, "monotonicity": 0, "norm_equivalence": 0}
    for _ in range(1000):
        a = rng.uniform(0, 1)
        b = a + rng.uniform(0.05, 1.5)
        deg = int(rng.integers(0, 9))
        t, w = norm_grid(a, b)
        u = rng.normal(size=t.size).cumsum() * rng.uniform(0.01, 1) + rng.normal(size=3) @ [np.ones_like(t), t, t * t]
        v = rng.normal(size=t.size).cumsum() * rng.uniform(0.01, 1)
        cu = lambda x, u=u: np.interp(x, t, u)  # noqa: E731
        cv = lambda x, v=v: np.interp(x, t, v)  # noqa: E731

        pu = l2_project(cu, (a, b), deg)
        again = l2_project(pu, (a, b), deg)
        if np.max(np.abs(np.subtract(again.basis_coef, pu.basis_coef))) > 1e-9:
            fails["idempotence"] += 1

        pv = l2_project(cv, (a, b), deg)
        lhs = math.sqrt(np.sum(w * (pu(t) - pv(t)) ** 2))
        rhs = math.sqrt(np.sum(w * (u - v) ** 2))
        if lhs > rhs + 1e-9:
            fails["contraction"] += 1

        res = [l2_project(cu, (a, b), k).residual for k in (deg, deg + 1, deg + 3)]
        if any(y > x + 1e-12 for x, y in zip(res, res[1:])):
            fails["monotonicity"] += 1

        ab = (0.1, 1.0)
        c1, c2 = rng.normal(scale=rng.uniform(0.01, 10), size=(2, 3))
        diff = c1 - c2
        l2 = math.sqrt(diff @ gram_matrix(ab, 2) @ diff)
        dist = coefficient_distance(PolyFit.from_monomial(c1, ab), PolyFit.from_monomial(c2, ab))
        if dist > norm_equivalence_constant(ab, 2) * l2 * (1 + 1e-9):
            fails["norm_equivalence"] += 1
    ok = not any(fails.values())
    report_line(capsys, 2, ok, "failures out of 1000 each: " + ", ".join(f"{k} {v}" for k, v in fails.items()))
    assert ok


def test_criterion_3_monte_carlo_disk(capsys):
    box = BoundingBox((-2.0, -2.0), (2.0, 2.0))
    cloud = PointCloud(np.zeros((1, 2)))
    passes, worst = 0, 0.0
    for seed in range(20):
        dt = mc_distance_transform(cloud, box, 10**6, [MASTER_SEED, 3, seed])
        z = abs(dt.volume(1.0) - math.pi) / dt.stderr(1.0)
        passes += z <= 3
        worst = max(worst, z)
    ok = passes >= 19
    report_line(capsys, 3, ok, f"{passes}/20 seeds within 3 s.e. of pi (worst {worst:.2f} s.e.)")
    assert ok


def test_criterion_4_table1_pacman(capsys):
    rep = experiment(4)
    agg = rep.aggregates
    mean = agg["R_hat"]["mean"]
    ok = 0.55 <= mean <= 0.65 and agg["overestimations"] == 0 and agg["failed"] == 0
    values, counts = np.unique([r.R_hat for r in rep.records], return_counts=True)
    dist = ", ".join(f"{v:g}x{c}" for v, c in zip(values, counts))
    report_line(capsys, 4, ok, f"mean R_hat {mean:.4f} (sd {agg['R_hat']['sd']:.4f}; {dist}), "
                               f"overestimations {agg['overestimations']}")
    assert ok


def test_criterion_5_table4_small_reach(capsys):
    rep = experiment(5)
    agg = rep.aggregates
    stops = agg["step0_stops"]
    res = np.array([r.step0_residual for r in rep.records])
    thr = ReachConfig(rep.config.grid, rep.config.n).threshold
    ok = stops >= 95
    report_line(capsys, 5, ok, f"step-0 stops {stops}/{REPS}; step-0 residual median {np.median(res):.2e} "
                               f"max {res.max():.2e} vs U_n {thr:.4f}")
    assert ok


def test_criterion_6_table5_coefficients(capsys):
    rep = experiment(6)
    agg = rep.aggregates
    t0, t1 = agg["theta0"]["mean"], agg["theta1"]["mean"]
    ok = abs(t0 - 2.31) <= 0.08 and abs(t1 - 6.77) <= 0.35 and agg["theta0"]["count"] > 0
    report_line(capsys, 6, ok, f"mean theta0 {t0:.4f} (2.31 +- 0.08), mean theta1 {t1:.4f} (6.77 +- 0.35), "
                               f"{agg['theta0']['count']} fitted, {agg['skipped']} skipped")
    assert ok


def test_criterion_7_sandwich(capsys):
    total, worst, runs = 0, -math.inf, 0
    for key in (4, 5, 6):
        for r in experiment(key).records:
            total += r.sandwich_violations
            worst = max(worst, r.sandwich_max_excess)
            runs += 1
    ok = total == 0
    report_line(capsys, 7, ok, f"{total} violations over {runs} replications "
                               f"(largest (V_n - V)/s.e. {worst:.2f})")
    assert ok


def test_criterion_8_exact_soundness(capsys):
    over, cases, seen = [], 0, {}
    for region in (Pacman(), UnionOfSquares(), Frame(1.0)):
        family = "frame" if isinstance(region, Frame) else "disk_like"
        curve = exact(region)
        for gname in ("gr1", "gr2", "gr3"):
            for ell in (8, 10, 30):
                est = reach_lower_bound(curve, ReachConfig(preset_grid(gname, family), 5000, 2, ell))
                cases += 1
                seen.setdefault(type(region).__name__, set()).add(est.R_hat)
                if est.R_hat > true_reach(region):
                    over.append((type(region).__name__, gname, ell, est.R_hat))
    ok = not over
    outputs = "; ".join(f"{k} {sorted(v)}" for k, v in seen.items())
    report_line(capsys, 8, ok, f"{len(over)} overestimates in {cases} cases (outputs {outputs})")
    assert ok
