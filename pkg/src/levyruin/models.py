"""Risk-process models: Laplace exponents, drift, and right-inverses.

Two concrete spectrally negative models are supported:

* ``BrownianRisk``: ``X_t = x + c*t + sigma*B_t`` with Laplace exponent
  ``psi(theta) = c*theta + sigma^2 theta^2 / 2``.
* ``CramerLundbergExp``: premium income at rate ``c`` minus a compound
  Poisson sum of Exp(``alpha``) claims arriving at rate ``eta``, so that
  ``psi(theta) = c*theta - eta*theta / (alpha + theta)``.

Both are non-monotone and spectrally negative for any admissible
parameters, which is all the downstream fluctuation identities require.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Union

__all__ = [
    "BrownianRisk",
    "CramerLundbergExp",
    "LevyModel",
    "laplace_exponent",
    "drift_mean",
    "phi_inverse",
    "phi_inverse_bracketed",
    "cl_roots",
    "model_from_config",
    "model_to_config",
    "load_model_config",
]

# Roots closer than this are treated as a double root of psi(theta) = p.
ROOT_MERGE_TOL = 1e-12


@dataclass(frozen=True)
class BrownianRisk:
    """Brownian risk process with drift ``c`` and volatility ``sigma``."""

    c: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class CramerLundbergExp:
    """Cramer-Lundberg process with Exp(alpha) claims at Poisson rate eta."""

    c: float
    eta: float
    alpha: float

    def __post_init__(self) -> None:
        if not self.c > 0.0:
            raise ValueError(f"premium rate c must be positive, got {self.c}")
        if not self.eta > 0.0:
            raise ValueError(f"claim intensity eta must be positive, got {self.eta}")
        if not self.alpha > 0.0:
            raise ValueError(f"claim-size rate alpha must be positive, got {self.alpha}")


LevyModel = Union[BrownianRisk, CramerLundbergExp]


def laplace_exponent(model: LevyModel, theta: float) -> float:
    """Evaluate ``psi(theta) = log E[exp(theta * X_1)]`` for ``theta >= 0``.

    ``psi(0) = 0`` and ``psi`` is convex; for ``CramerLundbergExp`` the
    formula extends analytically to ``theta > -alpha``, which the scale
    machinery uses through the negative root.
    """
    if isinstance(model, BrownianRisk):
        return model.c * theta + 0.5 * model.sigma**2 * theta * theta
    if theta <= -model.alpha:
        raise ValueError(f"theta must exceed -alpha = {-model.alpha}, got {theta}")
    return model.c * theta - model.eta * theta / (model.alpha + theta)


def drift_mean(model: LevyModel) -> float:
    """Return ``E[X_1] = psi'(0+)``; positive iff the net profit condition holds."""
    if isinstance(model, BrownianRisk):
        return model.c
    return model.c - model.eta / model.alpha


def psi_roots(model: LevyModel, p: float) -> tuple[float, float]:
    """Both real roots ``theta_low <= theta_high`` of ``psi(theta) = p``.

    The larger root is ``Phi(p)``.  Closed forms: for the Brownian model
    the roots of ``sigma^2 theta^2 / 2 + c theta - p``; for the
    Cramer-Lundberg model the roots of
    ``c theta^2 + (c alpha - eta - p) theta - p alpha`` (both lie in
    ``(-alpha, inf)``).  Computed with the cancellation-free quadratic
    formula.
    """
    if p < 0.0:
        raise ValueError(f"p must be nonnegative, got {p}")
    if isinstance(model, BrownianRisk):
        a = 0.5 * model.sigma**2
        b = model.c
        c0 = -p
    else:
        a = model.c
        b = model.c * model.alpha - model.eta - p
        c0 = -p * model.alpha
    disc = b * b - 4.0 * a * c0
    disc = max(disc, 0.0)
    sq = math.sqrt(disc)
    if b >= 0.0:
        qq = -0.5 * (b + sq)
    else:
        qq = -0.5 * (b - sq)
    if qq == 0.0:
        # b = 0 and p = 0: double root at the origin.
        r = -b / (2.0 * a)
        return r, r
    r1 = qq / a
    r2 = c0 / qq
    return (r1, r2) if r1 <= r2 else (r2, r1)


def phi_inverse(model: LevyModel, p: float) -> float:
    """Right-inverse ``Phi(p) = sup{theta >= 0 : psi(theta) = p}``.

    Uses the closed-form larger root; ``Phi(0) = 0`` exactly when
    ``psi'(0+) >= 0``.
    """
    lo, hi = psi_roots(model, p)
    phi = max(hi, 0.0)
    if p == 0.0 and drift_mean(model) >= 0.0:
        return 0.0
    return phi


def phi_inverse_bracketed(
    psi: Callable[[float], float], p: float, theta_hint: float = 1.0
) -> float:
    """Generic right-inverse of a convex Laplace exponent by bracketing.

    Doubles an upper bracket until ``psi(hi) > p`` and then solves
    ``psi(theta) - p = 0`` with Brent's method to ~1e-13 relative
    accuracy.  This is the extension point for user-supplied Laplace
    exponents; the concrete models use their closed forms.
    """
    from scipy.optimize import brentq

    if p < 0.0:
        raise ValueError(f"p must be nonnegative, got {p}")
    hi = max(theta_hint, 1e-8)
    for _ in range(200):
        if psi(hi) > p:
            break
        hi *= 2.0
    else:
        raise ValueError("could not bracket Phi(p); psi appears bounded above")
    # The sup-root is approached from the right, where psi - p changes
    # sign from negative to positive.  Walk lo down until psi(lo) < p
    # or lo hits 0 with psi(0) = 0 <= p.
    lo = 0.0
    if p == 0.0:
        # Scan for an interior negative region (net drift < 0 case).
        grid = [hi * k / 256.0 for k in range(1, 256)]
        neg = [t for t in grid if psi(t) < 0.0]
        if not neg:
            return 0.0
        lo = neg[-1]
    root = brentq(lambda t: psi(t) - p, lo, hi, xtol=1e-300, rtol=1e-14)
    return float(root)


def cl_roots(model: CramerLundbergExp, q: float) -> tuple[float, float, float]:
    """Return ``(Phi(q), theta_q, Delta_q)`` for the Cramer-Lundberg model.

    ``Phi(q) >= 0 >= theta_q`` whenever ``q >= 0`` and the net profit
    condition holds; ``Delta_q = (q + eta - c*alpha)^2 + 4*c*alpha*q`` is
    the discriminant of ``c theta^2 + (c alpha - eta - q) theta - q alpha``.
    """
    if not isinstance(model, CramerLundbergExp):
        raise TypeError("cl_roots requires a CramerLundbergExp model")
    lo, hi = psi_roots(model, q)
    delta = (q + model.eta - model.c * model.alpha) ** 2 + 4.0 * model.c * model.alpha * q
    return hi, lo, delta


def model_from_config(config: dict) -> LevyModel:
    """Build a model from a plain config mapping.

    Accepted shapes::

        {"model": "brownian", "c": 1.0, "sigma": 1.0}
        {"model": "cramer_lundberg", "c": 2.0, "eta": 1.0, "alpha": 1.0}
    """
    if "model" not in config:
        raise ValueError("model config must carry a 'model' key")
    kind = config["model"]
    fields = {k: v for k, v in config.items() if k != "model"}
    if kind == "brownian":
        allowed = {"c", "sigma"}
        cls: type = BrownianRisk
    elif kind == "cramer_lundberg":
        allowed = {"c", "eta", "alpha"}
        cls = CramerLundbergExp
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    unknown = set(fields) - allowed
    if unknown:
        raise ValueError(f"unknown keys for {kind!r} model: {sorted(unknown)}")
    missing = allowed - set(fields)
    if missing:
        raise ValueError(f"missing keys for {kind!r} model: {sorted(missing)}")
    return cls(**{k: float(v) for k, v in fields.items()})


def model_to_config(model: LevyModel) -> dict:
    """Inverse of :func:`model_from_config`."""
    if isinstance(model, BrownianRisk):
        return {"model": "brownian", "c": model.c, "sigma": model.sigma}
    return {
        "model": "cramer_lundberg",
        "c": model.c,
        "eta": model.eta,
        "alpha": model.alpha,
    }


def load_model_config(path: str) -> LevyModel:
    """Load a model from a JSON (or, if available, TOML) config file."""
    if path.endswith(".toml"):
        try:
            import tomllib
        except ImportError as exc:  # Python 3.10
            raise ValueError("TOML configs need Python >= 3.11; use JSON") from exc
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    else:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    return model_from_config(data)
