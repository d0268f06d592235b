"""Closed-form exponent algebra for SLE(kappa) derivative moments.

For kappa > 0, moments E[|fhat'_t(iy)|^lambda] of the half-plane map
derivative are governed by a one-parameter family of exponents indexed
by a weight r below the critical value r_c = 1/2 + 4/kappa:

    lambda(r) = r (1 + kappa/4) - kappa r^2 / 8
    zeta(r)   = r - kappa r^2 / 8          (= lambda - r kappa / 4)
    beta(r)   = -1 + kappa / (4 + kappa - kappa r)

with q = r_c - r > 0.  beta is the local derivative-decay exponent the
weighted measure concentrates on; an equivalent form in the capacity
normalization a = 2/kappa is beta = (r - 2a) / (1 + 2a - r).

The largest r with lambda(r) beta(r) + zeta(r) = 2 is the critical
weight r_plus; the Holder exponent of the capacity-parameterized trace
is alpha_star = (1 - beta_plus) / 2, with the reported regularity
clamped at 1/2 (the modulus at the base of the curve):

    alpha_star = 1 - kappa / (24 + 2 kappa - 8 sqrt(8 + kappa))
    alpha_zero = min(1/2, alpha_star)

alpha_star decreases from 1 (kappa -> 0) through 1/2 (kappa = 1) to 0
at kappa = 8, where beta_plus reaches 1 and the estimate degenerates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import NonPositiveKappa, SupercriticalR

__all__ = [
    "ExponentSet",
    "CriticalExponents",
    "r_critical",
    "derive_exponents",
    "beta_plus_closed_form",
    "alpha_star_closed_form",
    "solve_critical",
    "alpha_curve",
]

# Tight but nonzero gap to keep the root solve off the open-interval edge.
_EDGE = 1e-12


def _check_kappa(kappa: float) -> float:
    kappa = float(kappa)
    if not kappa > 0 or not math.isfinite(kappa):
        raise NonPositiveKappa(f"kappa must be positive, got {kappa}")
    return kappa


def r_critical(kappa: float) -> float:
    """Critical weight r_c = 1/2 + 4/kappa."""
    return 0.5 + 4.0 / _check_kappa(kappa)


@dataclass(frozen=True)
class ExponentSet:
    """Exponent triple (lambda, zeta, beta) at a fixed (kappa, r).

    a is the half-plane capacity rate 2/kappa of the standard-Brownian
    normalization; q = r_c - r is the weight gap, positive exactly when
    the set is admissible.
    """

    kappa: float
    r: float
    a: float
    r_c: float
    q: float
    lam: float
    zeta: float
    beta: float

    @property
    def admissible(self) -> bool:
        return self.q > 0

    def to_row(self) -> dict:
        """Flat mapping with spelled-out column names for table output."""
        return {
            "kappa": self.kappa,
            "r": self.r,
            "lambda": self.lam,
            "zeta": self.zeta,
            "beta": self.beta,
            "q": self.q,
            "r_c": self.r_c,
        }


def derive_exponents(kappa: float, r: float) -> ExponentSet:
    """Exponent set at weight r; requires kappa > 0 and r < r_c."""
    kappa = _check_kappa(kappa)
    r = float(r)
    r_c = 0.5 + 4.0 / kappa
    if not r < r_c:
        raise SupercriticalR(f"r ≥ r_c: r={r}, r_c={r_c} at kappa={kappa}")
    lam = r * (1.0 + kappa / 4.0) - kappa * r * r / 8.0
    zeta = r - kappa * r * r / 8.0
    beta = -1.0 + kappa / (4.0 + kappa - kappa * r)
    return ExponentSet(
        kappa=kappa,
        r=r,
        a=2.0 / kappa,
        r_c=r_c,
        q=r_c - r,
        lam=lam,
        zeta=zeta,
        beta=beta,
    )


@dataclass(frozen=True)
class CriticalExponents:
    """Exponents at the critical weight r_plus, plus trace regularity.

    exponent_vanishes is True when beta_plus reaches 1 (kappa = 8):
    alpha_star = 0 there and the Holder estimate carries no content.
    """

    kappa: float
    r_plus: float
    beta_plus: float
    lambda_plus: float
    zeta_plus: float
    alpha_star: float
    alpha_zero: float
    exponent_vanishes: bool


def beta_plus_closed_form(kappa: float) -> float:
    """beta at the critical weight: -1 + kappa/(12 + kappa - 4 sqrt(8+kappa))."""
    kappa = _check_kappa(kappa)
    return -1.0 + kappa / (12.0 + kappa - 4.0 * math.sqrt(8.0 + kappa))


def alpha_star_closed_form(kappa: float) -> float:
    """(1 - beta_plus)/2 = 1 - kappa/(24 + 2 kappa - 8 sqrt(8+kappa))."""
    kappa = _check_kappa(kappa)
    return 1.0 - kappa / (24.0 + 2.0 * kappa - 8.0 * math.sqrt(8.0 + kappa))


def _critical_gap(kappa: float, r: float) -> float:
    """lambda(r) beta(r) + zeta(r) - 2, the function whose larger root is r_plus."""
    lam = r * (1.0 + kappa / 4.0) - kappa * r * r / 8.0
    zeta = r - kappa * r * r / 8.0
    beta = -1.0 + kappa / (4.0 + kappa - kappa * r)
    return lam * beta + zeta - 2.0


def solve_critical(kappa: float) -> CriticalExponents:
    """Solve lambda(r) beta(r) + zeta(r) = 2 for the larger root r_plus.

    The solve is a bracketed root find on [0, r_c) to 1e-12; the gap is
    -2 at r=0 and (kappa-8)^2/(16 kappa) at r_c, so an interior sign
    change exists unless kappa = 8, where the root sits exactly on the
    boundary (q = 0), beta_plus = 1 and alpha_star = 0.
    """
    kappa = _check_kappa(kappa)
    r_c = 0.5 + 4.0 / kappa
    hi = r_c - _EDGE * max(1.0, abs(r_c))
    if _critical_gap(kappa, hi) <= 0.0:
        # No interior sign change: boundary root (kappa = 8 up to rounding).
        r_plus = r_c
    else:
        r_plus = brentq(lambda r: _critical_gap(kappa, r), 0.0, hi, xtol=1e-12, rtol=8.9e-16)
    lam = r_plus * (1.0 + kappa / 4.0) - kappa * r_plus * r_plus / 8.0
    zeta = r_plus - kappa * r_plus * r_plus / 8.0
    beta = -1.0 + kappa / (4.0 + kappa - kappa * r_plus)
    alpha_star = (1.0 - beta) / 2.0
    if abs(alpha_star) < 1e-12:
        alpha_star = 0.0
    return CriticalExponents(
        kappa=kappa,
        r_plus=r_plus,
        beta_plus=beta,
        lambda_plus=lam,
        zeta_plus=zeta,
        alpha_star=alpha_star,
        alpha_zero=min(0.5, alpha_star),
        exponent_vanishes=alpha_star == 0.0,
    )


def alpha_curve(kappas) -> list[tuple[float, float, float]]:
    """(kappa, alpha_star, alpha_zero) for each kappa in the iterable."""
    out = []
    for kappa in kappas:
        crit = solve_critical(kappa)
        out.append((crit.kappa, crit.alpha_star, crit.alpha_zero))
    return out
