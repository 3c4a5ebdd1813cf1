"""Identity, limit, and simulation-agreement verification suites.

Every analytic identity the library relies on is re-derived here through
an independent route (brute quadrature, Laplace inversion targets, or
the exact Monte Carlo engine) and scored against a fixed tolerance.  The
result is a machine-readable report whose serialization is byte-stable
for a fixed (model, level, seed).

Checks with ``tol = None`` are *recorded* entries: places where two
published readings of a closed form disagree.  They never auto-correct
anything; both candidate values are measured and written into the
report, and they do not gate the pass/fail summary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .models import (
    BrownianRisk,
    CramerLundbergExp,
    LevyModel,
    laplace_exponent,
    model_to_config,
    phi_inverse,
)
from .montecarlo import SimConfig, cl_occupation_measure, estimate_functional, run_paths
from .montecarlo import CODE_DOWN, CODE_EXIT
from .parisian import (
    RuinQuery,
    F_cal,
    exit_lt,
    joint_lt_ruin,
    lambda_det,
    lambda_mixed,
    lt_ruin_two_sided,
    excursion_race,
    ruin_prob_classical,
    ruin_prob_det_delay,
    ruin_prob_exp_delay,
    ruin_prob_mixed,
)
from .quadrature import adaptive_quadrature
from .scale import W, Z, script_W, script_W_laplace
from .transition import (
    cl_density_series,
    cl_tilt_integral,
    density_at,
    integrate_tilted,
    kendall_first_passage_cdf,
    psi1_psi2,
    transition_measure,
)

__all__ = [
    "Check",
    "VerificationReport",
    "run_identity_suite",
    "run_limit_suite",
    "run_oracle_suite",
    "run_all_suites",
    "EXPECTED_CHECK_GROUPS",
]


@dataclass(frozen=True)
class Check:
    """One verified (or recorded) relation.

    ``passed`` is ``abs_err <= tol`` whenever ``tol`` is set; recorded
    entries (``tol is None``) always pass and exist to document measured
    values for ambiguous printed formulas.
    """

    name: str
    lhs: float
    rhs: float
    abs_err: float
    tol: Optional[float]
    passed: bool
    provenance: str


@dataclass
class VerificationReport:
    """Named checks plus a pass/fail summary for one model."""

    model: dict
    level: str
    seed: int
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, lhs: float, rhs: float, tol: Optional[float], provenance: str) -> None:
        lhs = float(lhs)
        rhs = float(rhs)
        err = abs(lhs - rhs)
        passed = True if tol is None else err <= tol
        self.checks.append(Check(name, lhs, rhs, err, tol, passed, provenance))

    def extend(self, other: "VerificationReport") -> None:
        self.checks.extend(other.checks)

    @property
    def summary(self) -> dict:
        gated = [c for c in self.checks if c.tol is not None]
        return {
            "n_checks": len(self.checks),
            "n_gated": len(gated),
            "n_passed": sum(c.passed for c in gated),
            "n_failed": sum(not c.passed for c in gated),
            "n_recorded": len(self.checks) - len(gated),
        }

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks if c.tol is not None)

    def with_tolerances(self, overrides: dict[str, float]) -> "VerificationReport":
        """Re-gate checks under name-prefix tolerance overrides.

        Every override must match at least one gated check; recorded
        entries (``tol is None``) are never re-gated.
        """
        unused = {k for k in overrides}
        out = VerificationReport(model=self.model, level=self.level, seed=self.seed)
        for c in self.checks:
            tol = c.tol
            if tol is not None:
                for prefix, new_tol in overrides.items():
                    if c.name.startswith(prefix):
                        tol = new_tol
                        unused.discard(prefix)
            out.checks.append(
                Check(c.name, c.lhs, c.rhs, c.abs_err, tol,
                      True if tol is None else c.abs_err <= tol, c.provenance)
            )
        if unused:
            raise ValueError(f"tolerance overrides matched no check: {sorted(unused)}")
        return out

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "level": self.level,
            "seed": self.seed,
            "summary": self.summary,
            "checks": [
                {
                    "name": c.name,
                    "lhs": c.lhs,
                    "rhs": c.rhs,
                    "abs_err": c.abs_err,
                    "tol": c.tol,
                    "passed": c.passed,
                    "provenance": c.provenance,
                }
                for c in sorted(self.checks, key=lambda c: c.name)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)

    def to_table(self) -> str:
        rows = [f"{'status':6s}  {'abs_err':>11s}  {'tol':>9s}  name"]
        for c in sorted(self.checks, key=lambda c: c.name):
            status = "rec" if c.tol is None else ("PASS" if c.passed else "FAIL")
            tol = "-" if c.tol is None else f"{c.tol:.1e}"
            rows.append(f"{status:6s}  {c.abs_err:11.3e}  {tol:>9s}  {c.name}")
        s = self.summary
        rows.append(
            f"{s['n_passed']}/{s['n_gated']} gated checks passed, "
            f"{s['n_recorded']} recorded"
        )
        return "\n".join(rows)


def _new_report(model: LevyModel, level: str, seed: int) -> VerificationReport:
    return VerificationReport(model=model_to_config(model), level=level, seed=seed)


# Static coverage list: the acceptance tests assert every group below
# shows up in the combined report, so no identity can silently drop out.
EXPECTED_CHECK_GROUPS = (
    "w_laplace_transform",
    "conv_scale_laplace",
    "w_ratio_limit",
    "z_over_w_limit",
    "w_monotone",
    "transition_total_mass",
    "tilt_series_vs_quadrature",
    "tilted_gaussian_closed_forms",
    "delayed_scale_at_zero",
    "delayed_scale_time_laplace",
    "tilted_tail_time_laplace",
    "delayed_scale_three_forms",
    "kendall_time_integral",
    "kendall_total_mass",
    "exit_plus_ruin_partition",
    "race_partition_analytic",
    "one_sided_exit_mc",
    "first_passage_deficit_mc",
    "killed_potential_density_mc",
    "limit_exp_delay_ruin",
    "limit_exp_delay_two_sided",
    "limit_exp_delay_exit",
    "limit_det_delay_ruin",
    "limit_det_delay_exit",
    "limit_det_delay_joint",
    "limit_classical_from_det",
    "limit_classical_from_exp",
    "limit_classical_two_sided",
    "brownian_printed_limit_exact",
    "recorded",
    "oracle",
)


# ---------------------------------------------------------------------------
# Identity suite
# ---------------------------------------------------------------------------


def run_identity_suite(
    model: LevyModel, level: str = "fast", seed: int = 0
) -> VerificationReport:
    """Scale-function and delayed-scale identities plus the exact-MC checks."""
    rep = _new_report(model, level, seed)
    full = level == "full"
    is_cl = isinstance(model, CramerLundbergExp)
    name = "cl" if is_cl else "bm"

    # --- Laplace transform of W: int_0^T e^{-th y} W^(p)(y) dy = 1/(psi(th)-p)
    for p in (0.0, 0.5):
        for margin in (0.5, 1.5):
            th = phi_inverse(model, p) + margin
            decay = th - phi_inverse(model, p)
            T = max(5.0, math.log(1e12) / decay)
            res = adaptive_quadrature(
                lambda y: np.exp(-th * y) * np.asarray(W(model, p, y)),
                0.0, T, rtol=1e-12, atol=1e-14,
            )
            target = 1.0 / (laplace_exponent(model, th) - p)
            rep.add(
                f"w_laplace_transform[{name},p={p},theta={th:.3f}]",
                float(res.value), target, 1e-8,
                "int_0^inf exp(-theta y) W^(p)(y) dy = 1/(psi(theta)-p)",
            )

    # --- Laplace transform of the convolution scale (shifted by its cutoff)
    for (p, s, a) in ((0.1, 0.4, 0.5), (0.3, -0.2, 1.0)):
        th = phi_inverse(model, p + s) + 1.5
        closed = script_W_laplace(model, p, s, a, th)
        decay = th - max(phi_inverse(model, p + s), phi_inverse(model, p))
        T = max(10.0, math.log(1e12) / decay)
        res = adaptive_quadrature(
            lambda z: np.exp(-th * z) * np.asarray(script_W(model, p, s, a, a + z)),
            0.0, T, rtol=1e-12, atol=1e-14,
        )
        rep.add(
            f"conv_scale_laplace[{name},p={p},s={s},a={a}]",
            float(res.value), closed, 1e-7,
            "int_0^inf exp(-theta z) scriptW_a^(p,s)(a+z) dz = Z_p(a,theta)/(psi(theta)-p-s)",
        )

    # --- large-argument ratios of W and Z
    b = 50.0
    for p in (0.2, 1.0):
        phi_p = phi_inverse(model, p)
        for x in (0.5, 2.0):
            lhs = float(W(model, p, x + b)) / float(W(model, p, b))
            rep.add(
                f"w_ratio_limit[{name},p={p},x={x}]",
                lhs, math.exp(phi_p * x), 1e-6,
                "W^(p)(x+b)/W^(p)(b) -> exp(Phi(p) x) as b -> inf",
            )
        for th_off in (0.4, 1.1):
            th = phi_p + th_off
            lhs = float(Z(model, p, b, th)) / float(W(model, p, b))
            rhs = (laplace_exponent(model, th) - p) / (th - phi_p)
            rep.add(
                f"z_over_w_limit[{name},p={p},theta={th:.3f}]",
                lhs, rhs, 1e-6,
                "Z_p(b,theta)/W^(p)(b) -> (psi(theta)-p)/(theta-Phi(p)) as b -> inf",
            )

    # --- monotonicity of W on (0, 20]
    for p in (0.0, 0.7):
        grid = np.linspace(1e-3, 20.0, 400)
        vals = np.asarray(W(model, p, grid))
        worst = float(np.max(np.maximum(0.0, vals[:-1] - vals[1:])))
        rep.add(
            f"w_monotone[{name},p={p}]", worst, 0.0, 0.0,
            "W^(p) strictly increasing on (0, 20]",
        )

    # --- transition-law mass (atom + full-line density integral = 1)
    for r in (0.1, 1.0, 5.0):
        meas = transition_measure(model, r)
        res = adaptive_quadrature(
            meas.density, meas.support_lo, meas.support_hi, rtol=1e-12, atol=1e-13
        )
        mass = float(res.value) + (meas.atom[1] if meas.atom else 0.0)
        rep.add(
            f"transition_total_mass[{name},r={r}]", mass, 1.0, 1e-9,
            "atom mass + density integral over R equals one",
        )

    # --- tilted-moment closed forms vs adaptive quadrature
    if is_cl:
        for r in (0.5, 1.0, 2.0):
            for q in (0.5, 1.5):
                meas = transition_measure(model, r)
                for fq in (phi_inverse(model, q), _cl_negative_root(model, q)):
                    series = cl_tilt_integral(model, r, fq)
                    quadv = r * float(
                        integrate_tilted(
                            meas, lambda z: np.exp(fq * z), growth=max(fq, 0.0)
                        )
                    )
                    rep.add(
                        f"tilt_series_vs_quadrature[r={r},q={q},fq={fq:+.4f}]",
                        series, quadv, 1e-7,
                        "incomplete-gamma series for int exp(fq z) z P(X_r in dz) "
                        "matches adaptive quadrature",
                    )
        zg = np.linspace(model.c * 1.0 - 8.0, model.c * 1.0 - 1e-8, 201)
        diff = float(
            np.max(np.abs(density_at(model, 1.0, zg) - cl_density_series(model, 1.0, zg)))
        )
        rep.add(
            "tilt_series_vs_quadrature[density-series-vs-bessel]",
            diff, 0.0, 1e-13,
            "truncated series density equals the scaled-Bessel evaluation",
        )
    else:
        grid = (0.5, 1.0, 2.0)
        worst = 0.0
        for c in grid:
            for r in grid:
                for q in grid:
                    mdl = BrownianRisk(c=c, sigma=1.0)
                    meas = transition_measure(mdl, r)
                    d = math.sqrt(c * c + 2.0 * q)
                    p1, p2 = psi1_psi2(c, r, q)
                    q1 = float(
                        integrate_tilted(meas, lambda z: np.exp((d - c) * z), growth=d - c)
                    )
                    q2 = float(integrate_tilted(meas, lambda z: np.exp(-(d + c) * z)))
                    worst = max(worst, abs(p1 - q1) / max(1.0, abs(p1)), abs(p2 - q2))
        rep.add(
            "tilted_gaussian_closed_forms[grid 0.5/1/2 cubed]",
            worst, 0.0, 1e-8,
            "closed-form tilted Gaussian partial moments match quadrature "
            "(relative for the growing tilt)",
        )
        rep.add(
            "recorded[psi_tilted_moment_sign_resolution]",
            worst, 0.0, None,
            "printed tilted-moment closed forms confirmed against quadrature; "
            "no sign correction needed",
        )

    # --- delayed scale at zero: Lambda^(q)(0, r) = exp(q r)
    for q in (0.1, 0.5, 1.0, 2.0):
        for r in (0.1, 0.5, 1.0, 2.0):
            v = float(lambda_det(model, q, 0.0, r))
            rep.add(
                f"delayed_scale_at_zero[{name},q={q},r={r}]",
                v / math.exp(q * r), 1.0, 1e-8,
                "Lambda^(q)(0, r) = exp(q r) (scored relative)",
            )

    # --- Laplace transform in the time variable, started below zero
    y, th, q = 0.5, 2.0, 0.5
    Rtrunc = math.log(1e10) / (th - q)

    def lam_in_r(rv: np.ndarray) -> np.ndarray:
        return np.array(
            [math.exp(-th * ri) * float(lambda_det(model, q, -y, ri)) for ri in rv]
        )

    res = adaptive_quadrature(lam_in_r, 1e-8, Rtrunc, rtol=1e-10, atol=1e-12)
    target = math.exp(-phi_inverse(model, th) * y) / (th - q)
    rep.add(
        f"delayed_scale_time_laplace[{name},y={y},theta={th},q={q}]",
        float(res.value), target, 1e-6,
        "int_0^inf exp(-theta r) Lambda^(q)(-y, r) dr = exp(-Phi(theta) y)/(theta - q)",
    )

    def tail_in_r(rv: np.ndarray) -> np.ndarray:
        out = np.empty_like(rv)
        for i, ri in enumerate(rv):
            meas = transition_measure(model, ri)
            out[i] = math.exp(-th * ri) * float(
                integrate_tilted(meas, lambda z: np.ones_like(z), lo=y)
            )
        return out

    res = adaptive_quadrature(tail_in_r, 1e-8, math.log(1e11) / th, rtol=1e-10, atol=1e-12)
    phith = phi_inverse(model, th)
    rep.add(
        f"tilted_tail_time_laplace[{name},y={y},theta={th}]",
        float(res.value), math.exp(-phith * y) / phith, 1e-6,
        "int_0^inf exp(-theta r) int_y^inf (z/r) P(X_r in dz) dr = exp(-Phi(theta) y)/Phi(theta)",
    )

    # --- three pipelines for the delayed scale function agree
    rng = np.random.default_rng(seed + 101)
    n_draws = 50 if full else 12
    worst = 0.0
    for _ in range(n_draws):
        p = float(rng.uniform(0.0, 1.5))
        s = float(rng.uniform(-0.8 * p, 1.5))
        x = float(rng.uniform(-1.0, 3.0))
        r = float(rng.uniform(0.2, 2.0))
        v1 = float(lambda_mixed(model, p, s, x, r, via="definition"))
        v2 = float(lambda_mixed(model, p, s, x, r, via="cutoff_x"))
        v3 = float(lambda_mixed(model, p, s, x, r, via="convolution"))
        worst = max(worst, abs(v1 - v2), abs(v1 - v3), abs(v2 - v3))
    rep.add(
        f"delayed_scale_three_forms[{name},{n_draws} draws]",
        worst, 0.0, 1e-7,
        "cutoff-at-z, cutoff-at-x and convolution routes to Lambda^(p)(x;r,s) agree",
    )

    # --- time integral of Lambda vs first-passage representation
    p, q, x, r = 0.2, 0.5, 1.0, 1.0

    def lam_time(v: np.ndarray) -> np.ndarray:
        return np.array(
            [2.0 * vi * float(lambda_mixed(model, p, q, x, vi * vi)) for vi in v]
        )

    lhs = float(adaptive_quadrature(lam_time, 0.0, math.sqrt(r), rtol=1e-9, atol=1e-12).value)
    growth = phi_inverse(model, p + q)
    z_hi = transition_measure(model, r).support_upper(growth)

    def rhs_integrand(zv: np.ndarray) -> np.ndarray:
        kern = np.asarray(script_W(model, p + q, -q, zv, x + zv))
        cdf = np.array([kendall_first_passage_cdf(model, zi, r) for zi in zv])
        return kern * cdf

    rhs = float(adaptive_quadrature(rhs_integrand, 1e-9, z_hi, rtol=1e-9, atol=1e-12).value)
    rep.add(
        f"kendall_time_integral[{name},p={p},q={q},x={x},r={r}]",
        lhs, rhs, 1e-5,
        "int_0^r Lambda^(p)(x;s,q) ds = int_0^inf scriptW_z^(p+q,-q)(x+z) P(tau_z^+ <= r) dz",
    )

    rep.add(
        f"kendall_total_mass[{name},z=0.5,r=200]",
        kendall_first_passage_cdf(model, 0.5, 200.0), 1.0, 1e-3,
        "P(tau_z^+ <= 200) approximates P(tau_z^+ < inf) = 1 under net profit",
    )

    # --- partitions
    q0 = RuinQuery(x=1.0, b=3.0, p=0.0, q=0.5, r=1.0)
    rep.add(
        f"exit_plus_ruin_partition[{name}]",
        exit_lt(model, q0) + lt_ruin_two_sided(model, q0), 1.0, 1e-7,
        "at p=0 the exit and ruin transforms partition the probability space",
    )
    up, clock = excursion_race(model, -0.5, 0.0, 0.0, 0.5, 1.0)
    rep.add(
        f"race_partition_analytic[{name}]",
        up + clock, 1.0, 1e-8,
        "recovery-first and clock-first probabilities sum to one",
    )

    # --- exact-MC spot checks of the classical fluctuation identities
    if is_cl:
        n_mc = 400_000 if full else 150_000
        cfg = SimConfig(n_paths=n_mc, horizon=80.0, seed=seed + 7)
        p, x, bb = 0.3, 1.0, 3.0
        code, when, _ = run_paths(model, x, cfg, q=0.0, r=math.inf, b=bb)
        vals = np.where(code == CODE_EXIT, np.exp(-p * when), 0.0)
        se = float(vals.std(ddof=1) / math.sqrt(vals.size))
        rep.add(
            f"one_sided_exit_mc[p={p},x={x},b={bb}]",
            float(vals.mean()), math.exp(-phi_inverse(model, p) * (bb - x)), 3.0 * se,
            "E_x[exp(-p tau_b^+)] = exp(-Phi(p)(b-x)); tolerance 3 standard errors",
        )

        pp, s, a = 0.4, 0.2, 0.5
        cfg = SimConfig(n_paths=n_mc, horizon=80.0, seed=seed + 8)
        code, when, deficit = run_paths(
            model, x - a, cfg, q=0.0, r=math.inf, b=bb - a, absorb_down=True
        )
        vals = np.where(
            code == CODE_DOWN,
            np.exp(-pp * when) * np.asarray(W(model, s, deficit + a)),
            0.0,
        )
        se = float(vals.std(ddof=1) / math.sqrt(vals.size))
        analytic = float(
            script_W(model, s, pp - s, a, x)
            - float(W(model, pp, x - a)) / float(W(model, pp, bb - a))
            * script_W(model, s, pp - s, a, bb)
        )
        rep.add(
            f"first_passage_deficit_mc[p={pp},s={s},a={a}]",
            float(vals.mean()), analytic, 3.0 * se,
            "E_x[exp(-p tau_a^-) W^(s)(X_{tau_a^-}); tau_a^- < tau_b^+] equals its "
            "convolution-scale closed form; tolerance 3 standard errors",
        )

        p, x0, aa = 0.3, 0.5, 2.0
        edges = np.linspace(-1.0, 2.0, 13)
        cfg = SimConfig(n_paths=n_mc, horizon=200.0, seed=seed + 9)
        pt, se_b = cl_occupation_measure(model, x0, aa, p, edges, cfg)
        phi_p = phi_inverse(model, p)
        worst_err = 0.0
        worst_tol = 0.0
        for k in range(edges.size - 1):
            lo_e, hi_e = edges[k], edges[k + 1]
            an = float(
                adaptive_quadrature(
                    lambda y: math.exp(phi_p * (x0 - aa)) * np.asarray(W(model, p, aa - y))
                    - np.asarray(W(model, p, x0 - y)),
                    lo_e, hi_e, rtol=1e-11, atol=1e-14,
                ).value
            ) / (hi_e - lo_e)
            if abs(pt[k] - an) - 3.0 * se_b[k] > worst_err - worst_tol:
                worst_err = abs(pt[k] - an)
                worst_tol = 3.0 * se_b[k]
        rep.add(
            f"killed_potential_density_mc[p={p},x={x0},a={aa}]",
            worst_err, 0.0, worst_tol,
            "binned discounted occupation before exiting above matches "
            "exp(Phi(p)(x-a)) W^(p)(a-y) - W^(p)(x-y); worst bin, 3 standard errors",
        )

    # --- recorded printed-form discrepancies
    if is_cl:
        v_impl = float(W(model, 1.0, 1.0))
        v_printed = _cl_printed_w(model, 1.0, 1.0)
        rep.add(
            "recorded[cl_scale_function_printed_form]",
            v_impl, v_printed, None,
            "published display for the exponential-claim scale function carries the "
            "(alpha + root) factors in the denominator; the Laplace-transform "
            "characterization requires them in the numerator (used here); both values recorded",
        )
    else:
        q, xx, zz = 0.5, 1.0, 0.7
        true_val = float(script_W(model, q, -q, zz, xx + zz))
        printed = float(Z(model, q, xx + zz, 0.0)) / model.c * (
            1.0 - math.exp(-2.0 * model.c * (xx + zz))
        )
        rep.add(
            "recorded[brownian_intermediate_conv_scale_display]",
            true_val, printed, None,
            "published intermediate display for scriptW_z^(q,-q)(x) lacks its z "
            "dependence; the convolution definition (used here) and the printed "
            "form are both recorded at (x,z)=(1.0,0.7)",
        )
        d = math.sqrt(model.c**2 + 2.0 * q)
        e2cx = math.exp(-2.0 * model.c * xx)
        a1 = q / (model.c * d * (d - model.c)) - q * e2cx / (model.c * d * (d + model.c))
        a2 = q / (model.c * d * (d + model.c)) - q * e2cx / (model.c * d * (d - model.c))
        expansion = a1 * math.exp(zz * (d - model.c)) + a2 * math.exp(-zz * (d + model.c))
        rep.add(
            "recorded[brownian_conv_scale_expansion]",
            true_val, expansion, None,
            "two-exponential expansion of scriptW_z^(q,-q)(x+z) agrees with the "
            "convolution definition (sigma = 1)",
        )

    return rep


def _cl_negative_root(model: CramerLundbergExp, q: float) -> float:
    from .models import cl_roots

    return cl_roots(model, q)[1]


def _cl_printed_w(model: CramerLundbergExp, q: float, x: float) -> float:
    """The published display with (alpha + root) factors inverted."""
    from .models import cl_roots

    phi_q, th_q, _ = cl_roots(model, q)
    return (
        math.exp(phi_q * x) / (model.alpha + phi_q)
        - math.exp(th_q * x) / (model.alpha + th_q)
    ) / (model.c * (phi_q - th_q))


# ---------------------------------------------------------------------------
# Limit suite
# ---------------------------------------------------------------------------


def run_limit_suite(model: LevyModel, level: str = "fast", seed: int = 0) -> VerificationReport:
    """Recovery of the single-delay and no-delay identities in the limits."""
    rep = _new_report(model, level, seed)
    name = "cl" if isinstance(model, CramerLundbergExp) else "bm"
    x, b, p, q = 1.0, 3.0, 0.2, 0.5

    # r -> inf (surrogate r = 50): exponential-delay identities
    rep.add(
        f"limit_exp_delay_ruin[{name},r=50]",
        ruin_prob_mixed(model, x, 50.0, q, clamp=False),
        ruin_prob_exp_delay(model, x, q, clamp=False),
        1e-5,
        "mixed ruin probability converges to the exponential-delay formula as r -> inf",
    )
    rep.add(
        f"limit_exp_delay_two_sided[{name},r=50]",
        lt_ruin_two_sided(model, RuinQuery(x=x, b=b, p=p, q=q, r=50.0)),
        lt_ruin_two_sided(model, RuinQuery(x=x, b=b, p=p, q=q, r=math.inf)),
        1e-5,
        "ruin-before-barrier transform converges to its exponential-delay form",
    )
    rep.add(
        f"limit_exp_delay_exit[{name},r=50]",
        exit_lt(model, RuinQuery(x=x, b=b, p=p, q=q, r=50.0)),
        exit_lt(model, RuinQuery(x=x, b=b, p=p, q=q, r=math.inf)),
        1e-5,
        "exit transform converges to the Z-ratio exponential-delay form",
    )

    # q -> 0 (surrogate q = 1e-6): deterministic-delay identities
    rep.add(
        f"limit_det_delay_ruin[{name},q=1e-6]",
        ruin_prob_mixed(model, x, 1.0, 1e-6, clamp=False),
        ruin_prob_det_delay(model, x, 1.0, clamp=False),
        1e-4,
        "mixed ruin probability converges to the deterministic-delay formula as q -> 0",
    )
    rep.add(
        f"limit_det_delay_exit[{name},q=1e-6]",
        exit_lt(model, RuinQuery(x=x, b=b, p=p, q=1e-6, r=1.0)),
        exit_lt(model, RuinQuery(x=x, b=b, p=p, q=0.0, r=1.0)),
        1e-4,
        "exit transform converges to the single-delay scale ratio as q -> 0",
    )
    rep.add(
        f"limit_det_delay_joint[{name},q=1e-6]",
        joint_lt_ruin(model, RuinQuery(x=x, b=b, p=p, lam=0.3, q=1e-6, r=1.0)),
        joint_lt_ruin(model, RuinQuery(x=x, b=b, p=p, lam=0.3, q=0.0, r=1.0)),
        1e-4,
        "joint ruin-time/deficit transform converges to its deterministic-delay form",
    )

    # Degenerate clocks: classical ruin quantities.  The grace-period
    # degeneration converges like sqrt(r) for unbounded-variation paths,
    # so the Brownian check needs a smaller surrogate to sit inside the
    # same tolerance (at r = 1e-3 its gap is ~1.03e-2).
    r_small = 1e-3 if isinstance(model, CramerLundbergExp) else 2.5e-4
    rep.add(
        f"limit_classical_from_det[{name},r={r_small:g}]",
        ruin_prob_det_delay(model, x, r_small, clamp=False),
        ruin_prob_classical(model, x, clamp=False),
        1e-2,
        "vanishing grace period recovers the classical ruin probability",
    )
    rep.add(
        f"limit_classical_from_exp[{name},q=1e4]",
        ruin_prob_exp_delay(model, x, 1e4, clamp=False),
        ruin_prob_classical(model, x, clamp=False),
        1e-2,
        "an instantaneous exponential clock recovers the classical ruin probability",
    )
    classical_two_sided = float(Z(model, 0.0, x, 0.0)) - float(W(model, 0.0, x)) / float(
        W(model, 0.0, b)
    ) * float(Z(model, 0.0, b, 0.0))
    rep.add(
        f"limit_classical_two_sided[{name},r=1e-3,q=1e3]",
        lt_ruin_two_sided(model, RuinQuery(x=x, b=b, p=0.0, q=1e3, r=1e-3)),
        classical_two_sided,
        1e-2,
        "near-degenerate mixed clock recovers the classical two-sided ruin probability",
    )

    if isinstance(model, BrownianRisk):
        d = math.sqrt(model.c**2 + 2.0 * q)
        printed = math.exp(-2.0 * x * model.c) * (d - model.c) / (d + model.c)
        rep.add(
            f"brownian_printed_limit_exact[c={model.c},x={x},q={q}]",
            ruin_prob_exp_delay(model, x, q, clamp=False),
            printed,
            1e-10,
            "exponential-delay ruin probability reproduces "
            "exp(-2xc)(sqrt(c^2+2q)-c)/(sqrt(c^2+2q)+c) exactly",
        )

    # Recorded: large-r behaviour of the delayed companion scale function.
    # The published limit q/(p+q) Z_p(x,0) drops the time-integral term;
    # the pole of its Laplace transform at theta = p+q contributes
    # p Z_p(x, Phi(p+q)) / (p+q), confirmed numerically here.  Both
    # candidates are recorded; downstream identities are unaffected
    # because the extra term cancels in every barrier difference.
    rbig = 50.0
    measured = float(F_cal(model, p, 0.0, x, rbig, q))
    tilt = phi_inverse(model, p + q)
    derived = (
        q * float(Z(model, p, x, 0.0)) + p * float(Z(model, p, x, tilt))
    ) / (p + q)
    printed = q / (p + q) * float(Z(model, p, x, 0.0))
    rep.add(
        f"recorded[event_average_large_r,{name}]",
        measured, derived, None,
        "measured F^(p)(x;r,q) at r=50 matches the pole-consistent limit "
        f"(q Z_p(x,0) + p Z_p(x,Phi(p+q)))/(p+q); the published limit "
        f"q/(p+q) Z_p(x,0) = {printed!r} differs for p > 0",
    )

    def lam_time(v: np.ndarray) -> np.ndarray:
        return np.array(
            [2.0 * vi * float(lambda_mixed(model, p, q, x, vi * vi)) for vi in v]
        )

    r_mid = 12.0
    time_int = float(
        adaptive_quadrature(lam_time, 0.0, math.sqrt(r_mid), rtol=1e-9, atol=1e-12).value
    )
    scaled = (p + q) * math.exp(-(p + q) * r_mid) * time_int
    pole_coeff = float(Z(model, p, x, tilt))
    printed_fv = -float(Z(model, p + q, x, phi_inverse(model, 0.0))) / (p + q)
    rep.add(
        f"recorded[time_integral_final_value,{name}]",
        scaled, pole_coeff, None,
        "(p+q) exp(-(p+q)r) int_0^r Lambda^(p)(x;s,q) ds at r=12 matches the "
        "Laplace-pole coefficient Z_p(x,Phi(p+q)); the published final-value "
        f"reading -Z_(p+q)(x,Phi(0))/(p+q) = {printed_fv!r} is negative and "
        "cannot be the limit of this positive increasing integral",
    )

    return rep


# ---------------------------------------------------------------------------
# Oracle suite
# ---------------------------------------------------------------------------


def run_oracle_suite(
    model: LevyModel, cfg: SimConfig, level: str = "fast"
) -> VerificationReport:
    """Analytic headline values against the Monte Carlo engine."""
    rep = _new_report(model, level, cfg.seed)
    is_cl = isinstance(model, CramerLundbergExp)
    name = "cl" if is_cl else "bm"

    if is_cl:
        panels = [
            ("ruin_prob", RuinQuery(x=1.0, q=0.5, r=1.0),
             lambda: ruin_prob_mixed(model, 1.0, 1.0, 0.5, clamp=False)),
            ("ruin_prob", RuinQuery(x=0.5, q=1.0, r=0.5),
             lambda: ruin_prob_mixed(model, 0.5, 0.5, 1.0, clamp=False)),
            ("ruin_prob", RuinQuery(x=2.0, q=0.25, r=2.0),
             lambda: ruin_prob_mixed(model, 2.0, 2.0, 0.25, clamp=False)),
            ("lt_two_sided", RuinQuery(x=1.0, b=4.0, p=0.0, q=0.5, r=1.0),
             lambda: lt_ruin_two_sided(model, RuinQuery(x=1.0, b=4.0, p=0.0, q=0.5, r=1.0))),
            ("lt_two_sided", RuinQuery(x=1.0, b=4.0, p=0.2, q=0.5, r=1.0),
             lambda: lt_ruin_two_sided(model, RuinQuery(x=1.0, b=4.0, p=0.2, q=0.5, r=1.0))),
            ("joint_lt", RuinQuery(x=1.0, b=4.0, p=0.2, lam=0.3, q=0.5, r=1.0),
             lambda: joint_lt_ruin(model, RuinQuery(x=1.0, b=4.0, p=0.2, lam=0.3, q=0.5, r=1.0))),
            ("exit_lt", RuinQuery(x=1.0, b=4.0, p=0.2, q=0.5, r=1.0),
             lambda: exit_lt(model, RuinQuery(x=1.0, b=4.0, p=0.2, q=0.5, r=1.0))),
            ("race_up", RuinQuery(x=-0.5, p=0.2, lam=0.1, q=0.5, r=1.0),
             lambda: excursion_race(model, -0.5, 0.2, 0.1, 0.5, 1.0)[0]),
            ("race_clock", RuinQuery(x=-0.5, p=0.2, lam=0.1, q=0.5, r=1.0),
             lambda: excursion_race(model, -0.5, 0.2, 0.1, 0.5, 1.0)[1]),
        ]
        for i, (fn, qry, analytic_fn) in enumerate(panels):
            est = estimate_functional(model, qry, fn, cfg)
            rep.add(
                f"oracle[{name},{fn},{i}]",
                est.point, analytic_fn(), 3.0 * est.stderr,
                f"exact event-driven simulation of {fn} at "
                f"(x={qry.x}, b={qry.b}, p={qry.p}, lam={qry.lam}, q={qry.q}, r={qry.r}); "
                f"tolerance 3 standard errors at n={cfg.n_paths}",
            )
    else:
        for i, (x, q, r) in enumerate([(0.5, 0.5, 1.0), (1.0, 1.0, 0.5)]):
            bm_cfg = SimConfig(
                n_paths=min(cfg.n_paths, 100_000), horizon=min(cfg.horizon, 200.0),
                dt=min(cfg.dt, r / 100.0), seed=cfg.seed, antithetic=cfg.antithetic,
            )
            qry = RuinQuery(x=x, q=q, r=r)
            est = estimate_functional(model, qry, "ruin_prob", bm_cfg, safe_level=15.0)
            analytic = ruin_prob_mixed(model, x, r, q, clamp=False)
            rep.add(
                f"oracle[{name},ruin_prob,{i}]",
                est.point, analytic, max(3.0 * est.stderr, 1e-2),
                f"Euler-grid simulation (dt={bm_cfg.dt:g}) of the mixed ruin probability at "
                f"(x={x}, q={q}, r={r}); tolerance max(3 standard errors, 1e-2) "
                "to allow for the documented downward grid bias",
            )
    return rep


def run_all_suites(
    model: LevyModel, level: str = "fast", seed: int = 0
) -> VerificationReport:
    """Identity + limit + oracle suites in one report."""
    rep = run_identity_suite(model, level, seed)
    rep.extend(run_limit_suite(model, level, seed))
    n_paths = 1_000_000 if level == "full" else 200_000
    dt = 4e-3 if level == "full" else 8e-3
    cfg = SimConfig(n_paths=n_paths, horizon=500.0, dt=dt, seed=seed)
    rep.extend(run_oracle_suite(model, cfg, level))
    return rep
