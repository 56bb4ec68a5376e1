"""Damping regimes of source-free electromagnetic waves with gamma = (gamma0, 0, 0, 0).

A mode F ~ exp(lambda c t) exp(i k z) requires lambda^2 + gamma0 lambda + k^2 = 0,
so lambda = (-gamma0 +- gamma') / 2 with gamma' = sqrt(|gamma0^2 - 4 k^2|).
Exponents are stored in ``ct`` units; use :func:`to_time_units` for ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DispersionError

OVERDAMPED = "overdamped"
CRITICAL = "critical"
UNDERDAMPED = "underdamped"


@dataclass(frozen=True)
class RegimeResult:
    regime: str
    gamma0: float
    k: float
    gamma_prime: float
    exponents: tuple
    speed: float | None = None

    def to_dict(self) -> dict:
        lp, lm = self.exponents
        return {
            "gamma0": self.gamma0,
            "k": self.k,
            "regime": self.regime,
            "gamma_prime": self.gamma_prime,
            "re_lambda_plus": lp.real,
            "im_lambda_plus": lp.imag,
            "re_lambda_minus": lm.real,
            "im_lambda_minus": lm.imag,
            "speed": self.speed,
        }


def classify(gamma0: float, k: float) -> RegimeResult:
    """Regime, exponents and (underdamped only) phase speed in units of c."""
    if not k > 0:
        raise DispersionError(f"k must be positive, got {k}")
    g = abs(gamma0)
    # (|g0| - 2k)(|g0| + 2k) avoids cancellation; the regime test is exact
    gp = math.sqrt(abs((g - 2.0 * k) * (g + 2.0 * k)))
    if g > 2.0 * k:
        exps = (complex((-gamma0 + gp) / 2.0, 0.0), complex((-gamma0 - gp) / 2.0, 0.0))
        return RegimeResult(OVERDAMPED, gamma0, k, gp, exps)
    if g == 2.0 * k:
        lam = complex(-gamma0 / 2.0, 0.0)
        return RegimeResult(CRITICAL, gamma0, k, 0.0, (lam, lam))
    exps = (complex(-gamma0 / 2.0, gp / 2.0), complex(-gamma0 / 2.0, -gp / 2.0))
    return RegimeResult(UNDERDAMPED, gamma0, k, gp, exps, speed=gp / (2.0 * k))


def to_time_units(exponent: complex, c: float) -> complex:
    """Convert an exponent per unit ct into one per unit t."""
    return exponent * c


def dispersion_residual(k4, gamma4) -> complex:
    """k0^2 - |k|^2 - i (gamma0 k0 - gamma . k) for the (+,-,-,-) metric."""
    k0, *ks = (complex(c) for c in k4)
    g0, *gs = (float(c) for c in gamma4)
    if len(ks) != 3 or len(gs) != 3:
        raise DispersionError("four-vectors need four components")
    spatial = sum(c * c for c in ks)
    dot = sum(g * c for g, c in zip(gs, ks))
    return k0 * k0 - spatial - 1j * (g0 * k0 - dot)


def mode_four_vector(exponent: complex, k: float) -> tuple:
    """(k0, 0, 0, k) with k0 = -i lambda, for a wave along z."""
    return (-1j * exponent, 0.0, 0.0, k)
