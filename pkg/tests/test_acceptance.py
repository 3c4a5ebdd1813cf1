"""Acceptance gate: one test per shipping criterion.

Each test prints a single PASS/FAIL line (visible with ``pytest -v -s``)
and asserts the criterion at its stated tolerance:

1. analytic identity suite on both models (tight tolerances, < 2 min);
2. limit suite: exponential-delay, deterministic-delay and classical
   recoveries, plus the exact unit-volatility Brownian limit;
3. exact Cramer-Lundberg oracle suite at one million paths within three
   standard errors (< 5 min);
4. Brownian closed form vs. the generic pipeline on a parameter grid and
   vs. the discretized engine with a dt-refinement trend;
5. ruin-probability monotonicity and the delay-ordering sandwich on a
   5x5x5 grid for both models;
6. partition checks (exit + ruin = 1; race outcomes sum to one);
7. byte-identical verification reports for a fixed seed.
"""

import json
import math
import time

import numpy as np
import pytest

from levyruin import (
    BrownianRisk,
    CramerLundbergExp,
    RuinQuery,
    brownian_ruin_closed,
    exit_lt,
    lt_ruin_two_sided,
    excursion_race,
    ruin_prob_classical,
    ruin_prob_det_delay,
    ruin_prob_exp_delay,
    ruin_prob_mixed,
)
from levyruin.cli import main as cli_main
from levyruin.montecarlo import SimConfig, bm_refinement_study, estimate_functional
from levyruin.verify import run_identity_suite, run_limit_suite, run_oracle_suite

SEED = 42


def _report(label: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {label}" + (f" ({detail})" if detail else ""))


def _assert_groups_pass(rep, groups):
    for group in groups:
        entries = [c for c in rep.checks if c.name.startswith(group) and c.tol is not None]
        assert entries, f"no checks found for group {group}"
        bad = [c.name for c in entries if not c.passed]
        assert not bad, f"failed: {bad}"


def test_criterion_1_identity_suite(cl, bm):
    t0 = time.time()
    reps = {"cl": run_identity_suite(cl, "fast", SEED), "bm": run_identity_suite(bm, "fast", SEED)}
    elapsed = time.time() - t0
    ok = True
    try:
        for rep in reps.values():
            _assert_groups_pass(
                rep,
                (
                    "w_laplace_transform",       # tol 1e-8
                    "conv_scale_laplace",        # tol 1e-7
                    "delayed_scale_at_zero",     # rel tol 1e-8
                    "delayed_scale_time_laplace",  # tol 1e-6
                    "tilted_tail_time_laplace",  # tol 1e-6
                    "delayed_scale_three_forms",  # tol 1e-7
                    "kendall_time_integral",     # tol 1e-5
                ),
            )
            assert rep.all_passed, [c.name for c in rep.checks if not c.passed]
        assert elapsed < 120.0, f"identity suite took {elapsed:.1f}s"
    except AssertionError:
        ok = False
        raise
    finally:
        _report("criterion 1: identity suite, both models", ok, f"{elapsed:.1f}s")


def test_criterion_2_limit_suite(cl, bm):
    ok = True
    try:
        for model in (cl, bm):
            rep = run_limit_suite(model, "fast", SEED)
            _assert_groups_pass(
                rep,
                (
                    "limit_exp_delay_ruin",      # r=50 surrogate, tol 1e-5
                    "limit_exp_delay_two_sided",
                    "limit_exp_delay_exit",
                    "limit_det_delay_ruin",      # q=1e-6 surrogate, tol 1e-4
                    "limit_det_delay_exit",
                    "limit_det_delay_joint",
                    "limit_classical_from_det",  # tol 1e-2
                    "limit_classical_from_exp",  # q=1e4 surrogate, tol 1e-2
                    "limit_classical_two_sided",
                ),
            )
            assert rep.all_passed
        # exact reproduction of the printed large-r Brownian limit
        for (c, x, q) in ((1.0, 0.0, 1.5), (1.0, 1.0, 0.5), (0.7, 0.5, 1.0)):
            model = BrownianRisk(c=c, sigma=1.0)
            d = math.sqrt(c * c + 2.0 * q)
            printed = math.exp(-2.0 * x * c) * (d - c) / (d + c)
            assert abs(ruin_prob_exp_delay(model, x, q, clamp=False) - printed) < 1e-10
    except AssertionError:
        ok = False
        raise
    finally:
        _report("criterion 2: limit suite recoveries", ok)


def test_criterion_3_cl_oracle_suite(cl):
    t0 = time.time()
    cfg = SimConfig(n_paths=1_000_000, horizon=500.0, seed=SEED)
    rep = run_oracle_suite(cl, cfg)
    elapsed = time.time() - t0
    ok = True
    try:
        names = [c.name for c in rep.checks]
        for fn in ("ruin_prob", "lt_two_sided", "joint_lt", "exit_lt", "race_up", "race_clock"):
            assert any(fn in n for n in names), f"missing oracle panel {fn}"
        failed = [c.name for c in rep.checks if not c.passed]
        assert not failed, f"outside three standard errors: {failed}"
        assert elapsed < 300.0, f"oracle suite took {elapsed:.1f}s"
    except AssertionError:
        ok = False
        raise
    finally:
        _report("criterion 3: exact CL oracle at 1e6 paths", ok, f"{elapsed:.1f}s")


def test_criterion_4_brownian_cross_check(bm):
    ok = True
    worst = 0.0
    try:
        for x in (0.5, 1.0, 2.0):
            for r in (0.5, 1.0, 2.0):
                for q in (0.5, 1.0, 2.0):
                    closed = brownian_ruin_closed(1.0, x, r, q)
                    generic = ruin_prob_mixed(bm, x, r, q, clamp=False)
                    worst = max(worst, abs(closed - generic))
        assert worst < 1e-8, f"closed-vs-generic worst gap {worst:.2e}"

        qy = RuinQuery(x=0.5, q=0.5, r=1.0)
        cfg = SimConfig(n_paths=100_000, horizon=200.0, dt=8e-3, seed=SEED)
        study = bm_refinement_study(bm, qy, "ruin_prob", cfg, levels=3)
        analytic = ruin_prob_mixed(bm, 0.5, 1.0, 0.5)
        errs = [est.point - analytic for _, est in study]
        ses = [est.stderr for _, est in study]
        for e, s in zip(errs, ses):
            assert abs(e) <= max(3.0 * s, 1e-2)
        # documented downward bias shrinking with the step (up to noise)
        assert errs[0] <= 3.0 * ses[0]
        assert abs(errs[-1]) <= abs(errs[0]) + 3.0 * math.hypot(ses[0], ses[-1])
    except AssertionError:
        ok = False
        raise
    finally:
        _report("criterion 4: Brownian closed form cross-checks", ok, f"grid gap {worst:.1e}")


def _mixed_cube(model, xs, rs, qs):
    out = np.empty((len(xs), len(rs), len(qs)))
    for i, x in enumerate(xs):
        for j, r in enumerate(rs):
            for k, q in enumerate(qs):
                out[i, j, k] = ruin_prob_mixed(model, x, r, q, clamp=False)
    return out


def test_criterion_5_monotonicity_and_sandwich(cl, bm):
    xs = np.linspace(0.0, 3.0, 5)
    rs = np.linspace(0.4, 2.0, 5)
    qs = np.linspace(0.2, 1.8, 5)
    ok = True
    try:
        for model in (cl, bm):
            cube = _mixed_cube(model, xs, rs, qs)
            assert np.all(np.diff(cube, axis=0) <= 1e-9), "not nonincreasing in x"
            assert np.all(np.diff(cube, axis=1) <= 1e-9), "not nonincreasing in r"
            assert np.all(np.diff(cube, axis=2) >= -1e-9), "not nondecreasing in q"
            classical = np.array([ruin_prob_classical(model, x, clamp=False) for x in xs])
            det = np.array(
                [[ruin_prob_det_delay(model, x, r, clamp=False) for r in rs] for x in xs]
            )
            exp_ = np.array(
                [[ruin_prob_exp_delay(model, x, q, clamp=False) for q in qs] for x in xs]
            )
            lower = np.maximum(det[:, :, None], exp_[:, None, :])
            assert np.all(cube >= lower - 1e-9), "mixed below single-delay lower bound"
            assert np.all(cube <= classical[:, None, None] + 1e-9), "mixed above classical"
    except AssertionError:
        ok = False
        raise
    finally:
        _report("criterion 5: monotonicity and sandwich on 5x5x5 grids", ok)


def test_criterion_6_partitions(cl, bm):
    ok = True
    try:
        for model in (cl, bm):
            q0 = RuinQuery(x=1.0, b=3.0, p=0.0, q=0.5, r=1.0)
            gap = abs(exit_lt(model, q0) + lt_ruin_two_sided(model, q0) - 1.0)
            assert gap < 1e-7, f"exit/ruin partition gap {gap:.2e}"
            up, clock = excursion_race(model, -0.5, 0.0, 0.0, 0.5, 1.0)
            assert abs(up + clock - 1.0) < 1e-8
        cfg = SimConfig(n_paths=1_000_000, horizon=500.0, seed=SEED)
        qr = RuinQuery(x=-0.5, q=0.5, r=1.0)
        up_e = estimate_functional(cl, qr, "race_up", cfg)
        ck_e = estimate_functional(cl, qr, "race_clock", cfg)
        se = math.hypot(up_e.stderr, ck_e.stderr)
        assert abs(up_e.point + ck_e.point - 1.0) <= max(3.0 * se, 1e-12)
    except AssertionError:
        ok = False
        raise
    finally:
        _report("criterion 6: partition checks", ok)


def test_criterion_7_deterministic_reports(model_config_file, tmp_path):
    cfg = model_config_file({"model": "cramer_lundberg", "c": 2.0, "eta": 1.0, "alpha": 1.0})
    out1 = tmp_path / "report1.json"
    out2 = tmp_path / "report2.json"
    ok = True
    try:
        code1 = cli_main([
            "verify", "--model-config", cfg, "--level", "fast",
            "--seed", str(SEED), "--output", str(out1),
        ])
        code2 = cli_main([
            "verify", "--model-config", cfg, "--level", "fast",
            "--seed", str(SEED), "--output", str(out2),
        ])
        assert code1 == 0 and code2 == 0
        b1 = out1.read_bytes()
        b2 = out2.read_bytes()
        assert b1 == b2, "reports differ between runs"
        payload = json.loads(b1)
        assert payload["summary"]["n_failed"] == 0
    except AssertionError:
        ok = False
        raise
    finally:
        _report("criterion 7: byte-identical verification reports", ok)
