"""Exponent calculators and lifespan-law classification.

For ``u_tt - Δu = |u|^p`` in ``R^n`` with data ``(εf, εg)`` the lifespan
``T(ε)`` follows one of a handful of laws depending on ``n``, ``p`` and
whether ``∫ g`` vanishes. Everything here is closed form except the root
``a(ε)`` of ``a² ε² log(1 + a) = 1`` used in the two-dimensional ``p = 2``
case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .numerics import bisect_increasing

__all__ = [
    "CaseTag",
    "LawKind",
    "LifespanLaw",
    "gamma",
    "key_exponent_identity",
    "predicted_lifespan_law",
    "solve_a",
    "strauss_exponent",
    "strauss_exponent_bisect",
]

# relative tolerance for deciding p == p_0(n)
CRITICAL_RTOL = 1e-12


class LawKind(str, Enum):
    POWER = "PowerLaw"
    EXPONENTIAL = "ExponentialLaw"
    TWO_DIM_P2 = "TwoDimP2"


class CaseTag(str, Enum):
    N1_GMOM_NONZERO = "n1_gmom_nonzero"
    N1_GMOM_ZERO = "n1_gmom_zero"
    N2_FIRST_CASE = "n2_first_case"
    GENERIC_SUBCRITICAL = "generic_subcritical"
    CRITICAL = "critical"
    D2_P2_GMOM_NONZERO = "d2_p2_gmom_nonzero"
    D2_P2_GMOM_ZERO = "d2_p2_gmom_zero"


@dataclass(frozen=True)
class LifespanLaw:
    """Resolved lifespan law for one ``(n, p, moment)`` case.

    ``exponent`` is ``θ`` in ``T ~ C ε^{-θ}`` (power laws only);
    ``rate_exponent`` is ``p(p-1)`` in ``T ~ exp(C ε^{-p(p-1)})`` (critical
    case only). The ``TwoDimP2`` kind carries neither: there ``T ~ C a(ε)``.
    """

    kind: LawKind
    case_tag: CaseTag
    n: int
    p: float
    exponent: float | None = None
    rate_exponent: float | None = None

    def describe(self) -> str:
        if self.kind is LawKind.POWER:
            return f"T ~ C*eps^(-{self.exponent:.12g})"
        if self.kind is LawKind.EXPONENTIAL:
            return f"T ~ exp(C*eps^(-{self.rate_exponent:.12g}))"
        return "T ~ C*a(eps), a^2 eps^2 log(1+a) = 1"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "case_tag": self.case_tag.value,
            "n": self.n,
            "p": self.p,
            "exponent": self.exponent,
            "rate_exponent": self.rate_exponent,
            "law": self.describe(),
        }


def _check_n(n: int, minimum: int = 1) -> None:
    if int(n) != n or n < minimum:
        raise ValueError(f"dimension n must be an integer >= {minimum}, got {n!r}")


def gamma(n: int, p: float) -> float:
    """``1 + (n+1)p/2 - (n-1)p²/2``; for ``n = 1`` the quadratic term drops."""
    _check_n(n)
    if not p > 1:
        raise ValueError(f"power p must exceed 1, got {p!r}")
    return 1.0 + 0.5 * (n + 1) * p - 0.5 * (n - 1) * p * p


def strauss_exponent(n: int) -> float:
    """Positive root of ``gamma(n, ·)``, the critical power ``p_0(n)``."""
    _check_n(n, minimum=2)
    return (n + 1 + math.sqrt(n * n + 10 * n - 7)) / (2.0 * (n - 1))


def strauss_exponent_bisect(n: int) -> float:
    """``p_0(n)`` located by bisection on ``-gamma(n, p)`` (independent check)."""
    _check_n(n, minimum=2)
    # gamma(n, 1) = 2 and gamma > 0 on [1, p_0), so -gamma changes sign once
    return bisect_increasing(lambda p: 0.5 * (n - 1) * p * p - 0.5 * (n + 1) * p - 1.0, 1.0, 2.0)


def key_exponent_identity(n: int, p: float) -> float:
    """``p((n-1)p/2 - (n+1)/2)``; equals 1 exactly at ``p = p_0(n)``."""
    return p * (0.5 * (n - 1) * p - 0.5 * (n + 1))


def predicted_lifespan_law(n: int, p: float, g_moment_is_zero: bool) -> LifespanLaw:
    """Classify ``(n, p, ∫g = 0?)`` into one of the tabulated lifespan laws.

    Raises ``ValueError`` for ``p > p_0(n)`` with ``n >= 2``: small data
    then give global solutions and there is no blow-up law to return.
    """
    _check_n(n)
    if not p > 1:
        raise ValueError(f"power p must exceed 1, got {p!r}")
    if n == 1:
        if g_moment_is_zero:
            # gamma(1, p) = p + 1
            return LifespanLaw(LawKind.POWER, CaseTag.N1_GMOM_ZERO, n, p, exponent=p * (p - 1) / gamma(1, p))
        return LifespanLaw(LawKind.POWER, CaseTag.N1_GMOM_NONZERO, n, p, exponent=(p - 1) / 2.0)

    p0 = strauss_exponent(n)
    if math.isclose(p, p0, rel_tol=CRITICAL_RTOL, abs_tol=0.0):
        return LifespanLaw(LawKind.EXPONENTIAL, CaseTag.CRITICAL, n, p, rate_exponent=p * (p - 1))
    if p > p0:
        raise ValueError(f"p = {p!r} exceeds p_0({n}) = {p0!r}: global-existence regime, no blow-up law")
    if n == 2 and p == 2:
        if g_moment_is_zero:
            return LifespanLaw(LawKind.POWER, CaseTag.D2_P2_GMOM_ZERO, n, p, exponent=1.0)
        return LifespanLaw(LawKind.TWO_DIM_P2, CaseTag.D2_P2_GMOM_NONZERO, n, p)
    if n == 2 and p < 2 and not g_moment_is_zero:
        return LifespanLaw(LawKind.POWER, CaseTag.N2_FIRST_CASE, n, p, exponent=(p - 1) / (3 - p))
    return LifespanLaw(LawKind.POWER, CaseTag.GENERIC_SUBCRITICAL, n, p, exponent=p * (p - 1) / gamma(n, p))


def a_residual(a: float, eps: float) -> float:
    return a * a * eps * eps * math.log1p(a) - 1.0


def solve_a(eps: float) -> float:
    """Unique ``a > 0`` with ``a² ε² log(1 + a) = 1``.

    The left side increases strictly from 0 to infinity in ``a``, so the
    bracket ``[0, 1]`` is doubled until it straddles the root and then
    bisected to relative width ``1e-14``.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    return bisect_increasing(lambda a: a_residual(a, eps), 0.0, 1.0, rtol=1e-14)
