import math

import numpy as np
import pytest

from levyruin import (
    BrownianRisk,
    CramerLundbergExp,
    RuinQuery,
    exit_lt,
    joint_lt_ruin,
    phi_inverse,
    excursion_race,
    ruin_prob_classical,
    ruin_prob_det_delay,
    ruin_prob_exp_delay,
    ruin_prob_mixed,
)
from levyruin.montecarlo import (
    CODE_CENSOR,
    CODE_DOWN,
    CODE_EXIT,
    CODE_RUIN,
    CODE_SAFE,
    MCEstimate,
    SimConfig,
    bm_refinement_study,
    estimate_functional,
    run_paths,
    simulate_bm_path,
    simulate_cl_path,
)

N_FAST = 150_000


def _z(est: MCEstimate, analytic: float) -> float:
    return abs(est.point - analytic) / est.stderr


# ---------------------------------------------------------------------------
# configuration and reproducibility
# ---------------------------------------------------------------------------


def test_sim_config_validation():
    with pytest.raises(ValueError):
        SimConfig(n_paths=0)
    with pytest.raises(ValueError):
        SimConfig(n_paths=10, horizon=-1.0)
    with pytest.raises(ValueError):
        SimConfig(n_paths=10, dt=0.0)
    cfg = SimConfig(n_paths=10, horizon=0.5)
    with pytest.raises(ValueError):
        cfg.validate_for_query(RuinQuery(x=0.0, q=0.5, r=1.0), brownian=False)
    cfg = SimConfig(n_paths=10, horizon=10.0, dt=0.5)
    with pytest.raises(ValueError):
        cfg.validate_for_query(RuinQuery(x=0.0, q=0.5, r=1.0), brownian=True)


def test_bitwise_reproducibility(cl):
    cfg = SimConfig(n_paths=50_000, horizon=200.0, seed=99)
    q = RuinQuery(x=1.0, q=0.5, r=1.0)
    a = estimate_functional(cl, q, "ruin_prob", cfg)
    b = estimate_functional(cl, q, "ruin_prob", cfg)
    assert a.point == b.point and a.stderr == b.stderr
    c = estimate_functional(cl, q, "ruin_prob", SimConfig(n_paths=50_000, horizon=200.0, seed=100))
    assert c.point != a.point


def test_estimate_metadata(cl):
    cfg = SimConfig(n_paths=20_000, horizon=200.0, seed=5)
    est = estimate_functional(cl, RuinQuery(x=1.0, q=0.5, r=1.0), "ruin_prob", cfg)
    assert est.n_paths == 20_000
    assert est.seed == 5
    assert est.stderr > 0.0
    assert "stopped at level" in est.truncation_bias_note


# ---------------------------------------------------------------------------
# engine exactness invariants
# ---------------------------------------------------------------------------


def test_no_clock_means_no_ruin(cl, bm):
    for model in (cl, bm):
        cfg = SimConfig(n_paths=20_000, horizon=30.0, dt=1e-2, seed=3)
        code, _, _ = run_paths(model, 0.5, cfg, q=0.0, r=math.inf)
        assert int((code == CODE_RUIN).sum()) == 0


def test_outcome_accounting(cl):
    cfg = SimConfig(n_paths=30_000, horizon=100.0, seed=8)
    code, _, _ = run_paths(cl, 1.0, cfg, q=0.5, r=1.0, b=4.0)
    n = (
        int((code == CODE_RUIN).sum())
        + int((code == CODE_EXIT).sum())
        + int((code == CODE_CENSOR).sum())
    )
    assert n == cfg.n_paths


def test_exp_only_engine_matches_formula(cl):
    cfg = SimConfig(n_paths=400_000, horizon=500.0, seed=11)
    est = estimate_functional(cl, RuinQuery(x=1.0, q=0.5, r=math.inf), "ruin_prob", cfg)
    assert _z(est, ruin_prob_exp_delay(cl, 1.0, 0.5)) < 3.0


def test_det_only_engine_matches_formula(cl):
    cfg = SimConfig(n_paths=400_000, horizon=500.0, seed=12)
    est = estimate_functional(cl, RuinQuery(x=1.0, q=0.0, r=1.0), "ruin_prob", cfg)
    assert _z(est, ruin_prob_det_delay(cl, 1.0, 1.0)) < 3.0


def test_instant_clocks_recover_classical(cl):
    # q huge and r tiny both collapse the grace period to nothing.
    classical = ruin_prob_classical(cl, 1.0)
    cfg = SimConfig(n_paths=300_000, horizon=500.0, seed=13)
    est_q = estimate_functional(cl, RuinQuery(x=1.0, q=1e6, r=math.inf), "ruin_prob", cfg)
    assert abs(est_q.point - classical) < 3.0 * est_q.stderr + 1e-4
    est_r = estimate_functional(cl, RuinQuery(x=1.0, q=0.0, r=1e-6), "ruin_prob", cfg)
    assert abs(est_r.point - classical) < 3.0 * est_r.stderr + 1e-4


def test_one_sided_exit_transform(cl):
    # No clocks, upper barrier only: E_x[exp(-p tau_b^+)] = exp(-Phi(p)(b-x)).
    p, x, b = 0.3, 1.0, 3.0
    cfg = SimConfig(n_paths=300_000, horizon=80.0, seed=21)
    code, when, _ = run_paths(cl, x, cfg, q=0.0, r=math.inf, b=b)
    vals = np.where(code == CODE_EXIT, np.exp(-p * when), 0.0)
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean() - math.exp(-phi_inverse(cl, p) * (b - x))) < 3.0 * se


def test_fresh_clock_geometric_structure(cl):
    # Successive excursions from the origin are independent trials: with
    # entry probability psi0 and per-excursion loss probability theta
    # (entry depth Exp(alpha) by the ladder-height memorylessness), the
    # engine's ruin frequency from zero must match the geometric fixed
    # point psi0*theta/(1-(1-theta)*psi0).  A shared or stale clock
    # across excursions would break this.
    import math as _m

    from scipy.integrate import quad

    from levyruin import lambda_det

    q, r = 0.5, 1.0
    psi0 = ruin_prob_classical(cl, 0.0)
    theta = 1.0 - quad(
        lambda u: cl.alpha * _m.exp(-cl.alpha * u)
        * _m.exp(-q * r) * lambda_det(cl, q, -u, r),
        0.0, 60.0, limit=300,
    )[0]
    predicted = psi0 * theta / (1.0 - (1.0 - theta) * psi0)
    cfg = SimConfig(n_paths=400_000, horizon=500.0, seed=29)
    est = estimate_functional(cl, RuinQuery(x=0.0, q=q, r=r), "ruin_prob", cfg)
    assert _z(est, predicted) < 3.0


def test_absorb_down_undershoot_is_exponential(cl):
    # With Exp(alpha) claims the undershoot below zero is Exp(alpha).
    cfg = SimConfig(n_paths=200_000, horizon=500.0, seed=22)
    code, _, deficit = run_paths(cl, 0.5, cfg, q=0.0, r=math.inf, absorb_down=True,
                                 safe_level=60.0)
    u = -deficit[code == CODE_DOWN]
    assert u.size > 10_000
    mean = u.mean()
    se = u.std(ddof=1) / math.sqrt(u.size)
    assert abs(mean - 1.0 / cl.alpha) < 4.0 * se


# ---------------------------------------------------------------------------
# mixed-delay functionals against the analytic layer
# ---------------------------------------------------------------------------


def test_cl_ruin_prob_matches_analytic(cl):
    cfg = SimConfig(n_paths=N_FAST, horizon=500.0, seed=42)
    est = estimate_functional(cl, RuinQuery(x=1.0, q=0.5, r=1.0), "ruin_prob", cfg)
    assert _z(est, ruin_prob_mixed(cl, 1.0, 1.0, 0.5)) < 3.0


def test_cl_joint_lt_matches_analytic(cl):
    q = RuinQuery(x=1.0, b=4.0, p=0.2, lam=0.3, q=0.5, r=1.0)
    cfg = SimConfig(n_paths=N_FAST, horizon=500.0, seed=43)
    est = estimate_functional(cl, q, "joint_lt", cfg)
    assert _z(est, joint_lt_ruin(cl, q)) < 3.0


def test_cl_exit_lt_matches_analytic(cl):
    q = RuinQuery(x=1.0, b=4.0, p=0.2, q=0.5, r=1.0)
    cfg = SimConfig(n_paths=N_FAST, horizon=500.0, seed=44)
    est = estimate_functional(cl, q, "exit_lt", cfg)
    assert _z(est, exit_lt(cl, q)) < 3.0


def test_cl_race_functionals_match_analytic(cl):
    q = RuinQuery(x=-0.5, p=0.2, lam=0.1, q=0.5, r=1.0)
    cfg = SimConfig(n_paths=N_FAST, horizon=500.0, seed=45)
    up_e = estimate_functional(cl, q, "race_up", cfg)
    cl_e = estimate_functional(cl, q, "race_clock", cfg)
    up_a, clock_a = excursion_race(cl, -0.5, 0.2, 0.1, 0.5, 1.0)
    assert _z(up_e, up_a) < 3.0
    assert _z(cl_e, clock_a) < 3.0


def test_race_partition_simulated(cl):
    q = RuinQuery(x=-0.5, q=0.5, r=1.0)
    cfg = SimConfig(n_paths=N_FAST, horizon=500.0, seed=46)
    up = estimate_functional(cl, q, "race_up", cfg)
    ck = estimate_functional(cl, q, "race_clock", cfg)
    se = math.hypot(up.stderr, ck.stderr)
    assert abs(up.point + ck.point - 1.0) <= max(3.0 * se, 1e-12)


def test_heavy_discounting_kills_both_sides(cl):
    # With the deterministic clock the ruin time is at least r, so the
    # p = 50 transform is below exp(-50) and the estimator sees zeros.
    q = RuinQuery(x=1.0, b=4.0, p=50.0, q=0.0, r=1.0)
    cfg = SimConfig(n_paths=50_000, horizon=10.0, seed=47)
    est = estimate_functional(cl, q, "lt_two_sided", cfg)
    assert est.point < 1e-6
    # The analytic route forms this value as a difference of terms that
    # grow like exp(Phi(p+q) b), so float64 resolves it only while the
    # true value stays above that cancellation floor; check the decay
    # e^{-p r} there instead of the unresolvable p = 50 point.
    for p in (2.0, 4.0, 6.0):
        v = joint_lt_ruin(cl, RuinQuery(x=1.0, b=4.0, p=p, q=0.0, r=1.0))
        assert 0.0 < v < math.exp(-p * 1.0)


# ---------------------------------------------------------------------------
# Brownian engine
# ---------------------------------------------------------------------------


def test_bm_drift_only_never_ruins():
    model = BrownianRisk(c=1.0, sigma=1e-3)
    cfg = SimConfig(n_paths=5_000, horizon=50.0, dt=1e-2, seed=51)
    est = estimate_functional(model, RuinQuery(x=0.5, q=0.5, r=1.0), "ruin_prob", cfg,
                              safe_level=10.0)
    assert est.point == 0.0


def test_bm_ruin_prob_within_grid_tolerance(bm):
    q = RuinQuery(x=0.5, q=0.5, r=1.0)
    cfg = SimConfig(n_paths=100_000, horizon=200.0, dt=4e-3, seed=52)
    est = estimate_functional(bm, q, "ruin_prob", cfg, safe_level=15.0)
    analytic = ruin_prob_mixed(bm, 0.5, 1.0, 0.5)
    assert abs(est.point - analytic) <= max(3.0 * est.stderr, 1e-2)
    assert "biasing ruin functionals downward" in est.truncation_bias_note


@pytest.mark.slow
def test_bm_ruin_prob_fine_grid(bm):
    # Reference configuration with a very fine grid (slow).
    q = RuinQuery(x=0.5, q=0.5, r=1.0)
    cfg = SimConfig(n_paths=100_000, horizon=200.0, dt=1e-4, seed=53)
    est = estimate_functional(bm, q, "ruin_prob", cfg, safe_level=15.0)
    analytic = ruin_prob_mixed(bm, 0.5, 1.0, 0.5)
    assert abs(est.point - analytic) <= max(3.0 * est.stderr, 1e-2)


def test_bm_refinement_moves_toward_analytic(bm):
    q = RuinQuery(x=0.5, q=0.5, r=1.0)
    cfg = SimConfig(n_paths=60_000, horizon=150.0, dt=8e-3, seed=54)
    study = bm_refinement_study(bm, q, "ruin_prob", cfg, levels=3)
    analytic = ruin_prob_mixed(bm, 0.5, 1.0, 0.5)
    errs = [est.point - analytic for _, est in study]
    ses = [est.stderr for _, est in study]
    # downward bias throughout, shrinking with dt (up to noise)
    assert all(e <= 3.0 * s for e, s in zip(errs, ses))
    assert abs(errs[-1]) <= abs(errs[0]) + 3.0 * math.hypot(ses[0], ses[-1])


def test_antithetic_pairing_reduces_variance_for_exit(cl):
    q = RuinQuery(x=1.0, b=4.0, p=0.0, q=0.5, r=1.0)
    plain = estimate_functional(cl, q, "exit_lt", SimConfig(n_paths=100_000, seed=55))
    anti = estimate_functional(
        cl, q, "exit_lt", SimConfig(n_paths=100_000, seed=55, antithetic=True)
    )
    # same estimand, valid error either way; pairing should not inflate error
    assert abs(plain.point - anti.point) < 4.0 * math.hypot(plain.stderr, anti.stderr)
    assert anti.stderr < 2.0 * plain.stderr


# ---------------------------------------------------------------------------
# path-level API
# ---------------------------------------------------------------------------


def test_event_stream_shapes(cl, bm):
    cfg = SimConfig(n_paths=500, horizon=50.0, dt=5e-3, seed=61)
    events = list(simulate_cl_path(cl, 1.0, RuinQuery(x=1.0, b=3.0, q=0.5, r=1.0), cfg))
    assert len(events) == 500
    for ev in events:
        assert ev.ruined + ev.exited_above + ev.censored == 1
        if ev.ruined:
            assert ev.deficit <= 0.0 and ev.ruin_time > 0.0
    events = list(simulate_bm_path(bm, 0.5, RuinQuery(x=0.5, b=2.0, q=0.5, r=1.0), cfg))
    assert len(events) == 500


def test_simulate_path_type_checks(cl, bm):
    cfg = SimConfig(n_paths=10, horizon=10.0, seed=1)
    with pytest.raises(TypeError):
        simulate_cl_path(bm, 1.0, RuinQuery(x=1.0, q=0.5, r=1.0), cfg)
    with pytest.raises(TypeError):
        simulate_bm_path(cl, 1.0, RuinQuery(x=1.0, q=0.5, r=1.0), cfg)


def test_unknown_functional_rejected(cl):
    with pytest.raises(ValueError):
        estimate_functional(cl, RuinQuery(x=1.0, q=0.5, r=1.0), "median", SimConfig(n_paths=10))


def test_race_requires_nonpositive_start(cl):
    with pytest.raises(ValueError):
        estimate_functional(cl, RuinQuery(x=0.5, q=0.5, r=1.0), "race_up", SimConfig(n_paths=10))
