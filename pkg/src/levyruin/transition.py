"""Marginal law of ``X_r`` and tilted first-moment integration.

The recurring integral in every delayed fluctuation identity is

    int_0^inf f(z) * (z / r) * P(X_r in dz),

so this module owns the law of ``X_r`` (Gaussian for the Brownian model;
an atom at ``c*r`` plus a Bessel-series density for the compound-Poisson
model) and an adaptive integrator against the tilted measure
``(z/r) P(X_r in dz)``.  Closed-form tilted moments (Gaussian partial
moments, the incomplete-gamma series) are exposed for cross-checking the
quadrature route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.special import erfcx, gammainc, i1e, ndtr

from .models import BrownianRisk, CramerLundbergExp, LevyModel
from .quadrature import adaptive_quadrature

__all__ = [
    "TransitionMeasure",
    "transition_measure",
    "integrate_tilted",
    "density_at",
    "cl_density_series",
    "psi1_psi2",
    "gaussian_tilted_moment",
    "cl_tilt_integral",
    "kendall_first_passage_cdf",
]

# Gaussian tail cut: density < 1e-31 beyond mean + 12 sd.
_GAUSS_TAIL_SDS = 12.0
# Relative floor used alongside caller-supplied absolute tolerances.
_DEFAULT_RTOL = 1e-11


@dataclass(frozen=True)
class TransitionMeasure:
    """The law of ``X_r`` split into an optional atom and a density.

    Attributes:
        model: Owning risk model.
        r: Time horizon (> 0).
        atom: ``(location, mass)`` or ``None``.  Only the compound-Poisson
            model has one: mass ``exp(-eta*r)`` at ``z = c*r`` (no claim
            by time ``r``).
        density: Vectorized evaluator of the continuous part, valid on
            the whole real line (zero off the support).
        support_lo: Numerical lower end for full-line mass checks.
        support_hi: Upper end for untilted integrands.
    """

    model: LevyModel
    r: float
    atom: Optional[Tuple[float, float]]
    density: Callable[[np.ndarray], np.ndarray]
    support_lo: float
    support_hi: float

    def support_upper(self, growth: float = 0.0) -> float:
        """Upper truncation adequate for integrands growing like ``exp(growth*z)``.

        The Gaussian support must follow the tilted mean
        ``(c + growth*sigma^2) * r``; the compound-Poisson support is
        capped at ``c*r`` regardless of tilt.
        """
        if isinstance(self.model, CramerLundbergExp):
            return self.support_hi
        m = self.model
        if growth <= 0.0:
            return self.support_hi
        shifted = (m.c + growth * m.sigma**2) * self.r + _GAUSS_TAIL_SDS * m.sigma * math.sqrt(self.r)
        return max(self.support_hi, shifted)


def density_at(model: LevyModel, r, z) -> np.ndarray:
    """Continuous-part density of ``X_r`` at ``z``; broadcasts over both.

    Brownian: normal with mean ``c*r`` and variance ``sigma^2 r``.
    Cramer-Lundberg for ``z < c*r`` (claim-sum coordinate ``y = c*r - z``)::

        exp(-eta*r) exp(-alpha*y) sum_{m>=0} (alpha*eta*r)^(m+1) y^m / (m! (m+1)!)

    evaluated through the scaled Bessel function ``I_1`` so the value
    stays finite for large ``eta*r`` (the raw series overflows).
    """
    rr = np.asarray(r, dtype=float)
    zz = np.asarray(z, dtype=float)
    if isinstance(model, BrownianRisk):
        var = model.sigma**2 * rr
        return np.exp(-((zz - model.c * rr) ** 2) / (2.0 * var)) / np.sqrt(2.0 * math.pi * var)
    y = model.c * rr - zz
    y = np.where(y > 0.0, y, np.nan)
    u = model.alpha * model.eta * rr * y
    w = 2.0 * np.sqrt(u)
    val = np.sqrt(model.alpha * model.eta * rr / y) * i1e(w) * np.exp(
        -((np.sqrt(model.eta * rr) - np.sqrt(model.alpha * y)) ** 2)
    )
    return np.where(np.isnan(val), 0.0, val)


def cl_density_series(model: CramerLundbergExp, r: float, z, term_floor: float = 1e-16) -> np.ndarray:
    """Direct series evaluation of the compound-Poisson density.

    Truncates once a term drops below ``term_floor`` times the partial
    sum; kept as an independent implementation to validate the Bessel
    route (it overflows for large ``eta*r`` and is not used in
    production paths).
    """
    zz = np.asarray(z, dtype=float)
    y = model.c * r - zz
    pos = y > 0.0
    out = np.zeros_like(zz)
    yp = y[pos]
    u = model.alpha * model.eta * r * yp
    term = np.full_like(yp, model.alpha * model.eta * r)  # m = 0 term
    acc = term.copy()
    for m in range(1, 400):
        term = term * u / (m * (m + 1))
        acc += term
        if np.all(term <= term_floor * np.abs(acc)):
            break
    out[pos] = math.exp(-model.eta * r) * np.exp(-model.alpha * yp) * acc
    return out


def transition_measure(model: LevyModel, r: float) -> TransitionMeasure:
    """Build the law of ``X_r``; rejects ``r <= 0``."""
    if not r > 0.0:
        raise ValueError(f"time horizon r must be positive, got {r}")
    if isinstance(model, BrownianRisk):
        sd = model.sigma * math.sqrt(r)
        mean = model.c * r
        return TransitionMeasure(
            model=model,
            r=r,
            atom=None,
            density=lambda z: density_at(model, r, z),
            support_lo=mean - 40.0 * sd,
            support_hi=mean + _GAUSS_TAIL_SDS * sd,
        )
    # Claim-sum tail: exp(-(sqrt(alpha y) - sqrt(eta r))^2) < 1e-43 once
    # sqrt(alpha y) exceeds sqrt(eta r) + 10.
    y_hi = (math.sqrt(model.eta * r) + 10.0) ** 2 / model.alpha
    return TransitionMeasure(
        model=model,
        r=r,
        atom=(model.c * r, math.exp(-model.eta * r)),
        density=lambda z: density_at(model, r, z),
        support_lo=model.c * r - y_hi,
        support_hi=model.c * r,
    )


def integrate_tilted(
    measure: TransitionMeasure,
    f: Callable[[np.ndarray], np.ndarray],
    tol: float = 1e-12,
    *,
    growth: float = 0.0,
    lo: float = 0.0,
    rtol: float = _DEFAULT_RTOL,
) -> float | np.ndarray:
    """Integrate ``f`` against ``(z/r) P(X_r in dz)`` over ``(lo, inf)``.

    The atom contributes ``f(z0) * (z0/r) * mass`` when its location
    exceeds ``lo``; the continuous part is integrated adaptively up to
    :meth:`TransitionMeasure.support_upper`.  ``f`` may be vector-valued
    (components on leading axes).  ``growth`` declares the exponential
    order of ``f`` so the Gaussian truncation can follow the tilted mean.

    Raises:
        QuadratureError: If adaptive refinement exceeds its panel budget.
    """
    r = measure.r
    total = 0.0
    if measure.atom is not None:
        loc, mass = measure.atom
        if loc > lo:
            fa = np.asarray(f(np.array([loc])), dtype=float)[..., 0]
            total = fa * (loc / r) * mass
    hi = measure.support_upper(growth)
    a = max(lo, 0.0)
    if hi > a:
        dens = measure.density

        def integrand(z: np.ndarray) -> np.ndarray:
            return np.asarray(f(z), dtype=float) * (z / r) * dens(z)

        res = adaptive_quadrature(integrand, a, hi, atol=tol, rtol=rtol)
        total = total + res.value
    if np.ndim(total) == 0:
        return float(total)
    return total


def psi1_psi2(c: float, r: float, q: float) -> tuple[float, float]:
    """Tilted Gaussian partial moments for the unit-volatility model.

    With ``d = sqrt(c^2 + 2q)`` and ``X_r ~ N(c*r, r)``::

        Psi1 = int_0^inf exp(+z(d-c)) (z/r) P(X_r in dz)
             = exp(-r c^2/2)/sqrt(2 pi r) + exp(r q) d N(d sqrt(r))
        Psi2 = int_0^inf exp(-z(d+c)) (z/r) P(X_r in dz)
             = exp(-r c^2/2)/sqrt(2 pi r) - exp(r q) d N(-d sqrt(r))

    The second term of ``Psi2`` is evaluated through ``erfcx`` so the
    ``exp(rq) * N(-d sqrt(r))`` product stays accurate for large ``r``.
    """
    if r <= 0.0 or q <= 0.0:
        raise ValueError("psi1_psi2 requires r > 0 and q > 0")
    d = math.sqrt(c * c + 2.0 * q)
    lead = math.exp(-0.5 * r * c * c) / math.sqrt(2.0 * math.pi * r)
    psi1 = lead + math.exp(r * q) * d * ndtr(d * math.sqrt(r))
    # exp(rq) N(-a) = 0.5 exp(-r c^2 / 2) erfcx(a / sqrt(2)), a = d sqrt(r)
    tail = 0.5 * math.exp(-0.5 * r * c * c) * erfcx(d * math.sqrt(r / 2.0))
    psi2 = lead - d * tail
    return psi1, psi2


def gaussian_tilted_moment(model: BrownianRisk, r: float, a: float, lo: float = 0.0) -> float:
    """Closed form ``int_lo^inf exp(a z) (z/r) P(X_r in dz)`` (Brownian).

    Completing the square shifts the mean to ``m + a s^2`` with
    ``m = c r``, ``s^2 = sigma^2 r``.  Serves as the analytic oracle for
    the quadrature route at any volatility.
    """
    m = model.c * r
    s = model.sigma * math.sqrt(r)
    mu = m + a * s * s
    pref = math.exp(a * m + 0.5 * a * a * s * s)
    u = (lo - mu) / s
    phi_u = math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
    return pref * (mu * ndtr(-u) + s * phi_u) / r


def cl_tilt_integral(model: CramerLundbergExp, r: float, fq: float, max_terms: int = 500) -> float:
    """Tilted first moment ``int_0^inf exp(fq*z) z P(X_r in dz)`` by series.

    Splitting off the no-claim atom and switching to the claim-sum
    coordinate ``y = c*r - z`` turns each series term into a pair of
    lower incomplete gamma functions: with ``beta = alpha + fq`` and
    ``u = alpha*eta*r/beta``,

        exp((fq*c - eta) r) * [ c*r
            + sum_{m>=0} u^(m+1)/(m+1)! *
              ( c*r * P(m+1, beta*c*r) - (m+1)/beta * P(m+2, beta*c*r) ) ]

    where ``P`` is the regularized lower incomplete gamma function.
    Requires ``fq > -alpha`` (true for both roots of ``psi = q``).

    Raises:
        RuntimeError: If the series fails to fall below the floor within
            ``max_terms`` terms (parameter pathology).
    """
    beta = model.alpha + fq
    if beta <= 0.0:
        raise ValueError(f"tilt fq = {fq} must exceed -alpha = {-model.alpha}")
    cr = model.c * r
    u = model.alpha * model.eta * r / beta
    g = beta * cr
    total = cr
    coef = 1.0  # u^(m+1) / (m+1)!
    for m in range(max_terms):
        coef *= u / (m + 1)
        term = coef * (cr * gammainc(m + 1, g) - (m + 1) / beta * gammainc(m + 2, g))
        total += term
        if abs(term) <= 1e-16 * abs(total):
            break
    else:
        raise RuntimeError(f"tilt series did not converge within {max_terms} terms")
    return math.exp((fq * model.c - model.eta) * r) * total


def kendall_first_passage_cdf(model: LevyModel, z: float, r: float, tol: float = 1e-9) -> float:
    """Upward first-passage probability ``P(tau_z^+ <= r)``.

    Computed through the time/space duality
    ``r P(tau_z^+ in dr) dz = z P(X_r in dz) dr``, i.e. by integrating
    ``(z/s) * density_{X_s}(z)`` over ``s in (0, r]``.  For the
    compound-Poisson model the straight-line passage (no claim before
    ``z/c``) contributes an atom ``exp(-eta z / c)`` at ``s = z/c``.
    """
    if z <= 0.0 or r <= 0.0:
        raise ValueError("kendall_first_passage_cdf requires z > 0 and r > 0")
    if isinstance(model, CramerLundbergExp):
        t0 = z / model.c
        if r < t0:
            return 0.0
        atom = math.exp(-model.eta * t0)
        if r == t0:
            return atom
        res = adaptive_quadrature(
            lambda s: (z / s) * density_at(model, s, z), t0, r, atol=tol, rtol=1e-9
        )
        return atom + float(res.value)
    res = adaptive_quadrature(
        lambda s: (z / s) * density_at(model, s, z), 0.0, r, atol=tol, rtol=1e-9
    )
    return float(res.value)
