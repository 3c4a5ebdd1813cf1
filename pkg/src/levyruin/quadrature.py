"""Adaptive Gauss-Kronrod quadrature on finite intervals.

Interval-bisection refinement with the embedded G7/K15 rule pair.  The
integrand is evaluated in vectorized batches (all nodes of all panels
queued for refinement in a single call), so callers should accept numpy
arrays.  Vector-valued integrands are supported: ``f(x)`` may return an
array whose *last* axis matches ``x``, and every component is refined
until it meets the tolerance.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

__all__ = ["QuadratureError", "QuadResult", "adaptive_quadrature"]

# Panel cap: bisection stops here and raises.
MAX_PANELS_DEFAULT = 1 << 16

# Gauss-Kronrod 7/15 nodes on [-1, 1] (positive half; rule is symmetric).
_XGK_HALF = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144838258730,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WGK_HALF = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
# Gauss-7 weights, aligned with the odd-index Kronrod nodes.
_WG_HALF = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)

# Full 15-point arrays, nodes ascending.
_XK = np.concatenate([-_XGK_HALF[:-1], _XGK_HALF[::-1]])
_WK = np.concatenate([_WGK_HALF[:-1], _WGK_HALF[::-1]])
_WG = np.zeros(15)
_WG[1:14:2] = np.concatenate([_WG_HALF[:-1], _WG_HALF[::-1]])


class QuadratureError(RuntimeError):
    """Adaptive refinement failed to converge within the panel budget."""


class QuadResult(NamedTuple):
    value: np.ndarray | float
    error: np.ndarray | float
    n_panels: int


def _eval_panels(f: Callable, lo: np.ndarray, hi: np.ndarray):
    """Apply the G7/K15 pair on each panel.

    Returns per-panel Kronrod values with shape ``(..., n_panels)`` and a
    scalar error estimate per panel (max over vector components).
    """
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * _XK[None, :]).ravel()
    fx = np.asarray(f(nodes), dtype=float)
    fx = fx.reshape(fx.shape[:-1] + (lo.size, 15))
    val_k = np.einsum("...pk,k->...p", fx, _WK) * half
    val_g = np.einsum("...pk,k->...p", fx, _WG) * half
    err = np.abs(val_k - val_g)
    if err.ndim > 1:
        err = err.max(axis=tuple(range(err.ndim - 1)))
    return val_k, err


def adaptive_quadrature(
    f: Callable,
    a: float,
    b: float,
    *,
    atol: float = 0.0,
    rtol: float = 1e-10,
    max_panels: int = MAX_PANELS_DEFAULT,
    initial_panels: int = 8,
) -> QuadResult:
    """Integrate ``f`` over ``[a, b]`` to ``max(atol, rtol * |I|)``.

    Args:
        f: Vectorized integrand; may return shape ``(..., len(x))``.
        a, b: Integration limits, ``a <= b``.
        atol: Absolute error target.
        rtol: Relative error target (against each component magnitude).
        max_panels: Bisection budget; exceeding it raises.
        initial_panels: Uniform panels before refinement starts.

    Raises:
        QuadratureError: The error estimate never met the target within
            the panel budget, or a panel shrank to machine width while
            still failing its share of the tolerance.
    """
    if not np.isfinite(a) or not np.isfinite(b):
        raise ValueError("integration limits must be finite")
    if b <= a:
        zero = np.asarray(f(np.array([0.5 * (a + b) if b == a else a])))[..., 0] * 0.0
        return QuadResult(zero if zero.ndim else float(zero), 0.0, 0)

    edges = np.linspace(a, b, initial_panels + 1)
    lo = edges[:-1]
    hi = edges[1:]
    vals, errs = _eval_panels(f, lo, hi)

    width_floor = 64.0 * np.finfo(float).eps * max(abs(a), abs(b), 1.0)
    while True:
        total = vals.sum(axis=-1)
        err_total = errs.sum()
        target = max(atol, rtol * float(np.max(np.abs(total))) if total.size else atol)
        if err_total <= target or err_total == 0.0:
            return QuadResult(
                total if np.ndim(total) else float(total),
                float(err_total),
                lo.size,
            )
        if lo.size >= max_panels:
            raise QuadratureError(
                f"adaptive quadrature did not converge: {lo.size} panels, "
                f"error estimate {err_total:.3e} > target {target:.3e}"
            )
        # Split every panel holding more than its equidistributed share of
        # the excess error; always split at least the worst one.
        share = errs >= max(errs.max() * 0.25, target / lo.size)
        if not share.any():
            share[np.argmax(errs)] = True
        if np.min(hi[share] - lo[share]) < width_floor:
            raise QuadratureError(
                "adaptive quadrature stalled on a machine-width panel "
                f"(error estimate {err_total:.3e} > target {target:.3e})"
            )
        keep = ~share
        mid = 0.5 * (lo[share] + hi[share])
        new_lo = np.concatenate([lo[keep], lo[share], mid])
        new_hi = np.concatenate([hi[keep], mid, hi[share]])
        new_vals, new_errs = _eval_panels(f, np.concatenate([lo[share], mid]), np.concatenate([mid, hi[share]]))
        vals = np.concatenate([vals[..., keep], new_vals], axis=-1)
        errs = np.concatenate([errs[keep], new_errs])
        lo, hi = new_lo, new_hi
