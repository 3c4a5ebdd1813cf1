"""Scale functions W, Z and the two-parameter convolution scale.

Everything here is exact exponential-polynomial algebra: for both
concrete models ``1/(psi(theta) - p)`` is a rational function, so
``W^(p)`` is a mixture of terms ``k * x^m * exp(rho * x)`` (``m > 0``
only at an exact double root).  Convolutions and tilted antiderivatives
are evaluated in closed form through :func:`exp_poly_int`, with
``expm1``-based branches so that nearly coincident rates (for example
``Phi(p+s) - Phi(p)`` as ``s -> 0``) never cancel catastrophically.

All evaluators broadcast over numpy arrays.
"""

from __future__ import annotations

import math

import numpy as np

from .models import LevyModel, laplace_exponent, phi_inverse, psi_roots

__all__ = [
    "w_terms",
    "W",
    "Z",
    "script_W",
    "script_W_laplace",
    "exp_diff",
    "exp_poly_int",
]

# Roots closer than this collapse W^(p) to a single polynomial term.
_DOUBLE_ROOT_TOL = 1e-12
# |theta - root| below this switches Z to the integral-form branch.
_TILT_NEAR_ROOT_TOL = 1e-7
# |d * L| below this evaluates the tilted antiderivative by power series.
_SERIES_SWITCH = 2.0


def w_terms(model: LevyModel, p: float) -> tuple[tuple[float, int, float], ...]:
    """Exponential-polynomial terms ``(coef, power, rate)`` of ``W^(p)``.

    ``W^(p)(x) = sum coef * x^power * exp(rate * x)`` for ``x >= 0``.
    The rates are the two roots of ``psi = p`` (the larger one is
    ``Phi(p)``); a double root yields a single ``power = 1`` term plus,
    for the bounded-variation model, a constant term.
    """
    lo, hi = psi_roots(model, p)
    from .models import BrownianRisk

    if hi - lo > _DOUBLE_ROOT_TOL * max(abs(hi), abs(lo), 1.0):
        if isinstance(model, BrownianRisk):
            k = 2.0 / (model.sigma**2 * (hi - lo))
            return ((k, 0, hi), (-k, 0, lo))
        c = model.c
        a = model.alpha
        k = 1.0 / (c * (hi - lo))
        return ((k * (a + hi), 0, hi), (-k * (a + lo), 0, lo))
    # Exact (or machine-level) double root: only p = 0 with zero drift
    # (Brownian c = 0) or zero net profit (CL eta = c*alpha) gets here.
    rho = 0.5 * (hi + lo)
    if isinstance(model, BrownianRisk):
        return ((2.0 / model.sigma**2, 1, rho),)
    c = model.c
    a = model.alpha
    return ((1.0 / c, 0, rho), ((a + rho) / c, 1, rho))


def W(model: LevyModel, p: float, x) -> np.ndarray | float:
    """Scale function ``W^(p)(x)``; zero on ``x < 0``."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(xs.shape)
    pos = xs >= 0.0
    xp = xs[pos]
    acc = np.zeros_like(xp)
    for coef, m, rho in w_terms(model, p):
        acc += coef * xp**m * np.exp(rho * xp) if m else coef * np.exp(rho * xp)
    out[pos] = acc
    out = out.reshape(np.shape(x))
    return out if np.ndim(x) else float(out)


def _phi1(w: np.ndarray) -> np.ndarray:
    """(exp(w) - 1) / w with the removable singularity filled in."""
    w = np.asarray(w, dtype=float)
    out = np.ones_like(w)
    nz = w != 0.0
    out[nz] = np.expm1(w[nz]) / w[nz]
    return out


def exp_diff(a: float, b: float, x) -> np.ndarray | float:
    """Stable ``(exp(a*x) - exp(b*x)) / (a - b)``, including ``a == b``."""
    xs = np.asarray(x, dtype=float)
    out = xs * np.exp(np.minimum(a, b) * xs) * _phi1(abs(a - b) * xs)
    return out if np.ndim(x) else float(out)


def exp_poly_int(d: float, L, n: int) -> np.ndarray | float:
    """Closed-form ``int_0^L y^n exp(d*y) dy`` for small integer ``n``.

    Power series for ``|d*L| <= 2`` (cancellation-free), otherwise the
    standard integration-by-parts recurrence.
    """
    Ls = np.asarray(L, dtype=float)
    w = d * Ls
    small = np.abs(w) <= _SERIES_SWITCH

    out = np.empty_like(Ls)
    if small.any():
        Lsm = Ls[small]
        acc = np.zeros_like(Lsm)
        # sum_k d^k L^(n+k+1) / (k! (n+k+1))
        coef = 1.0
        powL = Lsm ** (n + 1)
        for k in range(48):
            acc += coef * powL / (n + k + 1)
            coef *= d / (k + 1)
            powL = powL * Lsm
            if coef == 0.0:
                break
        out[small] = acc
    big = ~small
    if big.any():
        Lb = Ls[big]
        ed = np.exp(d * Lb)
        cur = (ed - 1.0) / d
        for j in range(1, n + 1):
            cur = (Lb**j * ed - j * cur) / d
        out[big] = cur
    return out if np.ndim(L) else float(out)


def Z(model: LevyModel, p: float, x, theta: float) -> np.ndarray | float:
    """Second scale function ``Z_p(x, theta)``.

    Equals ``exp(theta*x)`` on ``x < 0`` and
    ``exp(theta*x) * (1 - (psi(theta)-p) * int_0^x exp(-theta*y) W^(p)(y) dy)``
    on ``x >= 0``.  Away from the roots of ``psi = p`` the partial-fraction
    form ``(psi(theta)-p) * sum_i k_i exp(rho_i x)/(theta-rho_i)`` is used,
    which stays accurate for large ``x``; within ``1e-7`` of a root the
    integral form (with stable differences) takes over.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape)
    pos = xs >= 0.0
    out[~pos] = np.exp(theta * xs[~pos])
    if not pos.any():
        out = out.reshape(np.shape(x))
        return out if np.ndim(x) else float(out)
    xp = xs[pos]
    terms = w_terms(model, p)
    psi_p = laplace_exponent(model, theta) - p
    near_root = min(abs(theta - rho) for _, _, rho in terms)
    if near_root < _TILT_NEAR_ROOT_TOL * max(abs(theta), 1.0):
        acc = np.exp(theta * xp).astype(float)
        for coef, m, rho in terms:
            if m == 0:
                acc -= psi_p * coef * exp_diff(rho, theta, xp)
            else:
                acc -= psi_p * coef * np.exp(theta * xp) * exp_poly_int(rho - theta, xp, m)
        out[pos] = acc
    else:
        acc = np.zeros_like(xp)
        for coef, m, rho in terms:
            inner = np.zeros_like(xp)
            fact = math.factorial(m)
            for j in range(m + 1):
                inner += (fact / math.factorial(j)) * xp**j / (theta - rho) ** (m - j + 1)
            acc += coef * np.exp(rho * xp) * inner
        out[pos] = psi_p * acc
    out = out.reshape(np.shape(x))
    return out if np.ndim(x) else float(out)


def _conv_piece(
    terms_outer,
    terms_inner,
    x: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
) -> np.ndarray:
    """``int_lo^hi W_outer(x - y) W_inner(y) dy`` for exp-poly mixtures.

    Assumes the caller already clipped ``[lo, hi]`` into
    ``[0, max(x, 0)]`` so both factors sit on their closed-form branch.
    Empty ranges (``hi <= lo``) contribute zero.
    """
    width_ok = hi > lo
    acc = np.zeros(np.broadcast(x, lo, hi).shape)
    if not width_ok.any():
        return acc
    for co, mo, ro in terms_outer:
        base = co * np.exp(ro * x)
        for ci, mi, ri in terms_inner:
            d = ri - ro
            piece = np.zeros_like(acc)
            for t in range(mo + 1):
                binco = math.comb(mo, t) * (-1.0) ** t
                xpow = x ** (mo - t) if mo - t else 1.0
                seg = exp_poly_int(d, hi, mi + t) - exp_poly_int(d, lo, mi + t)
                piece = piece + binco * xpow * seg
            acc = acc + base * ci * piece
    return np.where(width_ok, acc, 0.0)


def script_W(
    model: LevyModel,
    p: float,
    s: float,
    a,
    x,
    via: str = "p_plus_s",
) -> np.ndarray | float:
    """Convolution scale ``scriptW_a^(p,s)(x)``.

    Two algebraically equivalent routes are implemented and must agree:

    * ``via="p_plus_s"``:
      ``W^(p+s)(x) - s * int_0^a W^(p+s)(x-y) W^(p)(y) dy``
    * ``via="p"``:
      ``W^(p)(x) + s * int_a^x W^(p+s)(x-y) W^(p)(y) dy``

    ``a`` and ``x`` broadcast; the result is zero for ``x < 0`` and
    reduces to ``W^(p)`` for ``x <= a`` and to ``W^(p+s)`` at ``a = 0``.
    """
    if p < 0.0 or p + s < 0.0:
        raise ValueError(f"need p >= 0 and p + s >= 0, got p={p}, s={s}")
    aa, xx = np.broadcast_arrays(
        np.asarray(a, dtype=float), np.asarray(x, dtype=float)
    )
    scalar = np.ndim(a) == 0 and np.ndim(x) == 0
    terms_p = w_terms(model, p)
    terms_ps = w_terms(model, p + s)
    if via == "p_plus_s":
        lead = np.asarray(W(model, p + s, xx), dtype=float)
        if s != 0.0:
            lo = np.zeros_like(xx)
            hi = np.clip(np.minimum(aa, xx), 0.0, None)
            lead = lead - s * _conv_piece(terms_ps, terms_p, xx, lo, hi)
        out = lead
    elif via == "p":
        lead = np.asarray(W(model, p, xx), dtype=float)
        if s != 0.0:
            lo = np.clip(aa, 0.0, None)
            hi = np.clip(xx, 0.0, None)
            lead = lead + s * _conv_piece(terms_ps, terms_p, xx, lo, hi)
        out = lead
    else:
        raise ValueError(f"unknown route {via!r}; expected 'p_plus_s' or 'p'")
    return float(out) if scalar else out


def script_W_laplace(model: LevyModel, p: float, s: float, a: float, theta: float) -> float:
    """``int_0^inf exp(-theta z) scriptW_a^(p,s)(a + z) dz``.

    Equals ``Z_p(a, theta) / (psi(theta) - (p + s))`` and requires
    ``theta > Phi(p+s)`` for convergence.
    """
    phi_ps = phi_inverse(model, p + s)
    if theta <= phi_ps:
        raise ValueError(
            f"Laplace transform diverges: theta={theta} must exceed Phi(p+s)={phi_ps}"
        )
    denom = laplace_exponent(model, theta) - (p + s)
    return float(Z(model, p, a, theta)) / denom
