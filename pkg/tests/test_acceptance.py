"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a one-line PASS/FAIL summary (printed at the end of the
run) before asserting.
"""

import csv
import io
import math

import numpy as np

from hdajscc.bandwidth import (
    bc_mismatch_distortion,
    bc_optimal_power,
    costa_objective,
    superposition_objective,
)
from hdajscc.cli import main, trace_region
from hdajscc.codebook import codebook_config_for, simulate
from hdajscc.core import SchemeParams
from hdajscc.designs import gen_hda_design, hda_costa_design, modified_exponent_design
from hdajscc.mismatch import (
    exponent_estimate,
    gen_hda_mismatch,
    mismatch_interference_distortion,
    mismatch_source_distortion,
    modified_mismatch_distortion,
    naive_analog_distortion,
    wz_mismatch_bounds,
)
from hdajscc.montecarlo import McConfig, analytic_distortion, mc_validate
from hdajscc.optimize import golden_section_minimize


def test_criterion_01_gap_constant(record_criterion):
    gap = wz_mismatch_bounds(1.0, 0.1, 0.05, 0.5).gap_db
    ok = abs(gap - 0.41) <= 0.005
    record_criterion(1, ok, f"gap_db = {gap:.4f} (target 0.41 +/- 0.005)")
    assert ok


def test_criterion_02_matched_reductions(record_criterion):
    rng = np.random.default_rng(2024)
    n = 1000
    P = rng.uniform(0.1, 10, n)
    Q = rng.uniform(0, 10, n)
    s2 = rng.uniform(0.01, 5, n)
    sz2 = rng.uniform(0.05, 3, n)
    sa2 = rng.uniform(0.001, 5, n)
    matched = mismatch_source_distortion(P, Q, s2, s2, sz2)
    err_matched = np.max(np.abs(matched - sz2 / (1 + P / s2)))
    wz = np.array([wz_mismatch_bounds(*args).d_hda for args in zip(P, s2, sa2, sz2)])
    err_cross = np.max(np.abs(mismatch_source_distortion(P, 0.0, s2, sa2, sz2) - wz))
    ok = err_matched <= 1e-12 and err_cross <= 1e-12
    record_criterion(2, ok, f"max |matched - optimum| = {err_matched:.2e}, max |Q=0 - WZ| = {err_cross:.2e}")
    assert ok


def _mc_cells():
    cells = []
    for sa2 in (0.05, 0.1, 0.2):
        for Q in (0.0, 1.0):
            cells.append(("hda-costa", Q, sa2, mismatch_source_distortion(1, Q, 0.1, sa2, 1.0)))
            cells.append(("combined", Q, sa2, mismatch_source_distortion(1, Q, 0.1, sa2, 0.5)))
            rate = 0.5 * 0.5 * math.log2(11)
            cells.append(("gen-hda", Q, sa2, gen_hda_mismatch(1, Q, 0.1, sa2, 1.0, rate).d_source))
        cells.append(("hda-wz", 0.0, sa2, wz_mismatch_bounds(1, 0.1, sa2, 0.5).d_hda))
        # The naive receiver forms its LMMSE estimate for the actual noise.
        cells.append(("naive", 0.0, sa2, naive_analog_distortion(1, sa2, 0.5)))
    return cells


def test_criterion_03_monte_carlo_agreement(record_criterion):
    worst = 0.0
    failures = []
    for k, (scheme, Q, sa2, closed_form) in enumerate(_mc_cells()):
        sz2 = 1.0 if scheme in ("hda-costa", "gen-hda") else 0.5
        p = SchemeParams(1.0, 0.1, interference_Q=Q, innovation_var=sz2, actual_noise=sa2)
        design = gen_hda_design(p, 0.5 * p.capacity_bits) if scheme == "gen-hda" else None
        estimator = "published" if sa2 == 0.1 else "lmmse"
        cfg = McConfig(scheme, p, design, trials=1_000_000, seed=1000 + k, estimator=estimator)
        model_value = analytic_distortion(cfg)
        stats = mc_validate(cfg)
        z = abs(stats.empirical_d - closed_form) / stats.stderr
        worst = max(worst, z)
        if z > 4 or abs(model_value - closed_form) > 1e-10:
            failures.append((scheme, Q, sa2, z))
    ok = not failures
    record_criterion(3, ok, f"{len(_mc_cells())} cells, worst |z| = {worst:.2f}, failures {failures}")
    assert ok


def test_criterion_04_distortion_exponents(record_criterion):
    k2 = modified_exponent_design(1.0, 1.0, 0.1, 1.0).kappa_e_sq
    zeta = (
        exponent_estimate(lambda x: mismatch_source_distortion(1, 0, 0.1, x, 1), 1e-6, 1e-4),
        exponent_estimate(lambda x: mismatch_source_distortion(1, 1, 0.1, x, 1), 1e-6, 1e-4),
        exponent_estimate(lambda x: modified_mismatch_distortion(1, 1, 1, x, k2), 1e-6, 1e-4),
    )
    ok = all(abs(z - t) <= 0.02 for z, t in zip(zeta, (1, 0, 1)))
    record_criterion(4, ok, "zeta = " + ", ".join(f"{z:.4f}" for z in zeta) + " (targets 1, 0, 1)")
    assert ok


def test_criterion_05_endpoint_equivalences(record_criterion):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        P, Q, s2, sv2 = rng.uniform(0.1, 10), rng.uniform(0, 10), rng.uniform(0.01, 5), rng.uniform(0.1, 3)
        sa2 = s2 * rng.uniform(0.01, 1.0)
        C = 0.5 * math.log2(1 + P / s2)
        low = gen_hda_mismatch(P, Q, s2, sa2, sv2, 0.0)
        top = gen_hda_mismatch(P, Q, s2, sa2, sv2, C)
        worst = max(worst,
                    abs(low.d_source - mismatch_source_distortion(P, Q, s2, sa2, sv2)),
                    abs(low.d_interference - mismatch_interference_distortion(P, Q, s2, sa2)),
                    abs(top.d_source - sv2 * s2 / (P + s2)))
    ok = worst <= 1e-10
    record_criterion(5, ok, f"100 points, max deviation {worst:.2e}")
    assert ok


def test_criterion_06_power_allocation(record_criterion):
    worst_a = worst_d = 0.0
    ordered = True
    for noise in np.geomspace(0.01, 10, 10):
        for lam in np.linspace(0.05, 1.0, 20):
            target = (1 + 1 / noise) ** -lam
            allocs = {}
            for mode, f in (("superposition", superposition_objective), ("costa", costa_objective)):
                alloc = bc_optimal_power(noise, lam, mode)
                a_or, _ = golden_section_minimize(lambda a: f(a, noise, lam), 0.0, 1.0, tol=1e-12)
                worst_a = max(worst_a, abs(alloc.a_star - a_or))
                worst_d = max(worst_d, abs(alloc.d_star - target))
                allocs[mode] = alloc.a_star
            if lam < 1 and not allocs["costa"] > allocs["superposition"]:
                ordered = False
    ok = worst_a <= 1e-6 and worst_d <= 1e-12 and ordered
    record_criterion(6, ok, f"max |a* - golden| = {worst_a:.2e}, max |D* - target| = {worst_d:.2e}, "
                            f"costa > sup: {ordered}")
    assert ok


def test_criterion_07_compression_ordering(record_criterion):
    violations = []
    for snr in np.arange(0.0, 20.0 + 1e-9, 0.5):
        sa2 = 10 ** (-snr / 10)
        sup = bc_mismatch_distortion("superposition", 0.1, sa2, 0.5)
        dig = bc_mismatch_distortion("digital-costa", 0.1, sa2, 0.5)
        hda = bc_mismatch_distortion("hda-costa", 0.1, sa2, 0.5)
        if hda > dig + 1e-9:
            violations.append((snr, "hda > digital"))
        if sa2 > 0.1 * (1 + 1e-12) and dig > sup + 1e-9:
            violations.append((snr, "digital > superposition"))
        if sa2 < 0.1 * (1 - 1e-12) and sup > dig + 1e-9:
            violations.append((snr, "superposition > digital"))
    ok = not violations
    record_criterion(7, ok, f"41 SNR points, violations {violations}")
    assert ok


def test_criterion_08_broadcast_corners(record_criterion):
    table = list(csv.DictReader(io.StringIO(trace_region(0.0, 5.0, 200))))
    d1 = np.array([float(r["d1"]) for r in table])
    d2 = np.array([float(r["d2"]) for r in table])
    opt1 = (1 + 1 / 1.0) ** -0.5
    opt2 = (1 + 1 / 10 ** -0.5) ** -0.5
    e1, e2 = abs(d1.min() - opt1), abs(d2.min() - opt2)
    monotone = bool(np.all(np.diff(d1) >= 0) and np.all(np.diff(d2) < 0))
    ok = e1 <= 1e-3 and e2 <= 1e-3 and monotone
    record_criterion(8, ok, f"{len(table)} frontier points, corner errors {e1:.1e}, {e2:.1e}, monotone {monotone}")
    assert ok


def test_criterion_09_finite_codebook_trends(record_criterion):
    p = SchemeParams(1.0, 0.1, interference_Q=1.0)
    d = hda_costa_design(p)
    r1 = d.rate_lower + 0.1
    analytic = 1 / 11
    runs = {n: simulate(codebook_config_for(p, d, n, r1, seed=1), p, d, 10_000, 2) for n in (4, 8, 16)}
    err_ok = gap_ok = True
    for small, big in ((4, 8), (8, 16)):
        a, b = runs[small], runs[big]
        if b.decode_error_rate > a.decode_error_rate + 2 * math.hypot(a.error_stderr, b.error_stderr):
            err_ok = False
        if b.empirical_mse - analytic > a.empirical_mse - analytic + 2 * math.hypot(a.mse_stderr, b.mse_stderr):
            gap_ok = False
    power_ok = abs(runs[16].mean_tx_power - 1.0) <= 0.08
    ok = err_ok and gap_ok and power_ok
    summary = "; ".join(f"N={n}: err {r.decode_error_rate:.3f} mse {r.empirical_mse:.3f} "
                        f"power {r.mean_tx_power:.3f}" for n, r in runs.items())
    record_criterion(9, ok, f"R1 = {r1:.4f}; {summary}; error trend {err_ok}, gap trend {gap_ok}, power {power_ok}")
    assert ok


def _cli_bytes(capsys, *argv):
    assert main(list(argv)) == 0
    return capsys.readouterr().out.encode()


def test_criterion_10_determinism(capsys, record_criterion):
    commands = [
        ("mc", "--scheme", "combined", "--sigma-z2", "0.5", "--snr-grid", "5:15:5",
         "--trials", "300000", "--seed", "11"),
        ("mc", "--scheme", "gen-hda", "--actual-snr-db", "13", "--trials", "200000", "--seed", "12"),
        ("codebook", "--n", "4,8", "--trials", "4000", "--seed", "13"),
        ("codebook", "--epsilon", "0.7", "--r1", "0.75", "--n", "8", "--trials", "3000", "--seed", "14"),
    ]
    mismatched = []
    for cmd in commands:
        first = _cli_bytes(capsys, *cmd)
        if first != _cli_bytes(capsys, *cmd) or first != _cli_bytes(capsys, *cmd, "--workers", "3"):
            mismatched.append(cmd[0])
    ok = not mismatched
    record_criterion(10, ok, f"{len(commands)} randomized commands x (rerun, 3 workers), mismatches {mismatched}")
    assert ok
