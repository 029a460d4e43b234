"""Slicing-iteration blow-up argument, made executable.

The argument starts from a pointwise lower bound for the spherical mean
``ũ(r, t)`` on ``Σ = {3δ <= t - r <= r}`` and iterates

    ũ >= C_j r^{-(n-1)/2} (t-r)^{-q} log((t-r)/(l_j k))^{a_j}    on Σ_j,

with ``q = (n-1)p/2 - (n+1)/2``, ``k = 3δ``, ``Σ_j = {l_j k <= t-r <= r}``,
``l_j = 2 - 2^{-j}`` and ``a_j = (p^{j-1} - 1)/(p - 1)``. The constants obey
``C_{j+1} = N C_j^p / (2p)^j``; a positive blow-up functional ``I(r, t)``
makes the ladder diverge. This module computes every sequence and constant
of that chain, and re-checks each step of the induction by quadrature.

``C_j`` is doubly exponential in ``j`` so it is carried as ``log C_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .exponents import strauss_exponent
from .numerics import adaptive_simpson, adaptive_simpson_2d
from .profiles import BumpProfile, free_wave_radial2, free_wave_radial3_v, gauss_legendre

__all__ = [
    "BetaSlicingReport",
    "IterationState",
    "LifespanBound",
    "SlicingConstants",
    "StepVerdict",
    "blowup_functional_I",
    "blowup_time_threshold_log",
    "default_delta",
    "default_m_grid",
    "default_samples",
    "epsilon_zero",
    "estimate_M",
    "exponent_sum",
    "iterate_logC",
    "lifespan_upper_bound",
    "logC_closed_form",
    "m_profile",
    "random_samples",
    "s_p",
    "s_p_partial",
    "slicing_a",
    "slicing_l",
    "verify_beta_slicing_bound",
    "verify_iteration_step",
]

# raw C_j is only formed below this |log C_j|
_EXP_LIMIT = 700.0


def slicing_l(j: int) -> Fraction:
    """``l_j = sum_{i=0}^{j} 2^{-i} = 2 - 2^{-j}``, exact."""
    if j < 0:
        raise ValueError(f"j must be >= 0, got {j!r}")
    return Fraction(2) - Fraction(1, 2**j)


def slicing_a(j: int, p):
    """``a_j = (p^{j-1} - 1)/(p - 1)``; exact when ``p`` is a ``Fraction``."""
    if j < 1:
        raise ValueError(f"j must be >= 1, got {j!r}")
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p!r}")
    return (p ** (j - 1) - 1) / (p - 1)


def s_p_partial(j: int, p):
    """``j/p^{j-1} + (j-1)/p^{j-2} + ... + 1 = sum_{m=1}^{j} m / p^{m-1}``."""
    return sum(m / p ** (m - 1) for m in range(1, j + 1))


def s_p(p: float) -> float:
    """Limit of :func:`s_p_partial`, ``sum m x^{m-1} = 1/(1-x)^2`` at ``x = 1/p``."""
    if not p > 1:
        raise ValueError(f"series diverges for p <= 1, got {p!r}")
    return (p / (p - 1.0)) ** 2


def exponent_sum(j: int, p):
    """``j + p(j-1) + ... + p^{j-1}``, the power of ``2p`` in closed-form ``C_{j+1}``."""
    return sum(m * p ** (j - m) for m in range(1, j + 1))


def default_delta(profile: BumpProfile) -> float:
    """``R/8``: keeps ``g(2δ) > 0`` with margin for a bump supported in ``[0, R]``."""
    return profile.R / 8.0


@dataclass(frozen=True)
class SlicingConstants:
    n: int
    p: float
    delta: float
    M: float
    k: float = field(init=False)
    C_geom: float = field(init=False)
    N: float = field(init=False)
    S_p: float = field(init=False)
    A: float = field(init=False)

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"the slicing argument covers n = 2, 3 only, got n = {self.n!r}")
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p!r}")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta!r}")
        if not self.M > 0:
            raise ValueError(f"M must be positive, got {self.M!r}")
        n, p = self.n, self.p
        c_geom = 0.25 * math.pi ** (n - 3)
        N = 0.25 * 3.0 ** ((n - 1) * (1 - p) / 2.0) * (p - 1) * c_geom
        sp = s_p(p)
        A = (2 * p) ** (sp * (p - 1) / p) * self.M ** (-(p - 1)) / N
        object.__setattr__(self, "k", 3.0 * self.delta)
        object.__setattr__(self, "C_geom", c_geom)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "S_p", sp)
        object.__setattr__(self, "A", A)

    @classmethod
    def critical(cls, n: int, delta: float, M: float) -> SlicingConstants:
        return cls(n, strauss_exponent(n), delta, M)

    @property
    def q(self) -> float:
        """Power of ``(t - r)`` in the lower-bound kernel."""
        return 0.5 * (self.n - 1) * self.p - 0.5 * (self.n + 1)

    @property
    def C_final(self) -> float:
        return 2.0 * self.A

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "delta": self.delta,
            "k": self.k,
            "M": self.M,
            "C_geom": self.C_geom,
            "N": self.N,
            "S_p": self.S_p,
            "A": self.A,
            "C_final": self.C_final,
        }


@dataclass(frozen=True)
class IterationState:
    j: int
    l_j: float
    a_j: float
    logC_j: float

    @property
    def C_j(self) -> float | None:
        """Raw ``C_j`` when representable, else ``None``."""
        if abs(self.logC_j) < _EXP_LIMIT:
            return math.exp(self.logC_j)
        return None


def iterate_logC(j_max: int, consts: SlicingConstants, eps: float) -> list[IterationState]:
    """States ``j = 1..j_max`` of ``C_{j+1} = N C_j^p / (2p)^j``, ``C_1 = M ε^p``."""
    if j_max < 1:
        raise ValueError(f"j_max must be >= 1, got {j_max!r}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    p = consts.p
    log_n = math.log(consts.N)
    log_2p = math.log(2.0 * p)
    logc = math.log(consts.M) + p * math.log(eps)
    states = []
    for j in range(1, j_max + 1):
        states.append(IterationState(j, float(slicing_l(j)), slicing_a(j, p), logc))
        logc = log_n + p * logc - j * log_2p
    return states


def logC_closed_form(j: int, consts: SlicingConstants, eps: float) -> float:
    """``log C_j`` from ``C_{i+1} = N^{(p^i-1)/(p-1)} (Mε^p)^{p^i} / (2p)^{i + p(i-1) + ... + p^{i-1}}``."""
    p = consts.p
    log_c1 = math.log(consts.M) + p * math.log(eps)
    if j == 1:
        return log_c1
    i = j - 1
    return (p**i - 1) / (p - 1) * math.log(consts.N) + p**i * log_c1 - exponent_sum(i, p) * math.log(2 * p)


def blowup_functional_I(r: float, t: float, consts: SlicingConstants, eps: float) -> float:
    """``log N^{1/(p-1)} + log(Mε^p) - log (2p)^{S_p/p} + log(log((t-r)/(2k))^{1/(p-1)})``.

    Requires ``(r, t)`` in ``Σ_∞ = {2k <= t - r <= r}`` and ``t - r > 2k``
    strictly so the double logarithm exists.
    """
    d = t - r
    two_k = 2.0 * consts.k
    if not (two_k <= d <= r):
        raise ValueError(f"(r, t) = ({r!r}, {t!r}) lies outside Σ_∞ = {{{two_k!r} <= t - r <= r}}")
    if d <= two_k:
        raise ValueError(f"t - r = {d!r} sits on 2k = {two_k!r}: log((t-r)/2k) = 0, double log undefined")
    p = consts.p
    inner = math.log(d / two_k)
    return (
        math.log(consts.N) / (p - 1)
        + math.log(consts.M)
        + p * math.log(eps)
        - consts.S_p / p * math.log(2 * p)
        + math.log(inner) / (p - 1)
    )


def blowup_time_threshold_log(consts: SlicingConstants, eps: float) -> float:
    """``log`` of ``4k exp(A ε^{-p(p-1)})``, the time past which ``I(t/2, t) > 0``."""
    p = consts.p
    return math.log(4.0 * consts.k) + consts.A * eps ** (-p * (p - 1))


def epsilon_zero(consts: SlicingConstants) -> float:
    """Root of ``4k = exp(A ε_0^{-p(p-1)})``, i.e. ``(A / log 4k)^{1/(p(p-1))}``."""
    four_k = 4.0 * consts.k
    if four_k <= 1.0:
        raise ValueError(f"4k = {four_k!r} <= 1 (k = {consts.k!r}): log(4k) <= 0, no positive eps_0")
    p = consts.p
    return (consts.A / math.log(four_k)) ** (1.0 / (p * (p - 1)))


class LifespanBound(NamedTuple):
    value: float
    log_value: float


def lifespan_upper_bound(eps: float, consts: SlicingConstants) -> LifespanBound:
    """``exp(2A ε^{-p(p-1)})`` for ``0 < ε <= ε_0``; ``value`` is ``inf`` on overflow."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    eps0 = epsilon_zero(consts)
    if eps > eps0:
        raise ValueError(f"eps = {eps!r} exceeds eps_0 = {eps0!r}; the blow-up bound does not apply")
    p = consts.p
    log_value = consts.C_final * eps ** (-p * (p - 1))
    value = math.exp(log_value) if log_value < _EXP_LIMIT else math.inf
    return LifespanBound(value, log_value)


# ---------------------------------------------------------------------------
# Numerical constant M of the first lower bound
# ---------------------------------------------------------------------------


def default_m_grid(delta: float) -> list[tuple[float, float]]:
    """Fixed sample grid in ``Σ`` for :func:`estimate_M`: ``t - r`` in
    ``{4δ, 8δ, 16δ, 64δ}`` crossed with ``r / (t - r)`` in ``{1, 2, 8}``."""
    pts = []
    for df in (4.0, 8.0, 16.0, 64.0):
        d = df * delta
        for rf in (1.0, 2.0, 8.0):
            r = rf * d
            pts.append((r, r + d))
    return pts


def _free_wave(n: int, profile: BumpProfile, lam, tau, nodes: int):
    if n == 3:
        return free_wave_radial3_v(profile, lam, tau) / lam
    return free_wave_radial2(profile, lam, tau, n_s=nodes, n_theta=nodes)


def m_profile(
    n: int,
    p: float,
    profile: BumpProfile,
    delta: float,
    sample_grid: Sequence[tuple[float, float]],
    nodes: int = 32,
) -> np.ndarray:
    """Lower-bound constant at each sample point, before the safety factor.

    For ``(r, t)`` in ``Σ`` this integrates the free wave ``w`` (data
    ``(0, g)``) over the slab ``0 <= τ - λ <= 3δ``, ``λ >= t - r``,
    ``τ + λ <= t + r``: the part of the backward cone left out of the
    iterated term. In characteristic variables ``α = τ + λ``, ``β = τ - λ``
    the value is ``C_geom ∫ dβ ∫ λ^{(n-1)/2} w^p dα``, multiplied by
    ``(t - r)^q`` to strip the kernel.
    """
    e = 0.5 * (n - 1)
    q = e * p - 0.5 * (n + 1)
    c_geom = 0.25 * math.pi ** (n - 3)
    xb, wb = gauss_legendre(nodes)
    xl, wl = gauss_legendre(2 * nodes)
    out = []
    for r, t in sample_grid:
        d = t - r
        if not (3.0 * delta <= d <= r):
            raise ValueError(f"sample ({r!r}, {t!r}) is outside Σ = {{3δ <= t - r <= r}}")
        b_hi = 3.0 * delta
        beta = 0.5 * b_hi * (xb + 1.0)
        wbeta = 0.5 * b_hi * wb
        # λ runs over [t - r, (t + r - β)/2]; integrate in log λ with dα = 2λ dlogλ
        lam_lo = np.full_like(beta, d)
        lam_hi = 0.5 * (t + r - beta)
        u_lo = np.log(lam_lo)
        u_hi = np.log(lam_hi)
        uh = 0.5 * (u_hi - u_lo)
        u = 0.5 * (u_hi + u_lo)[:, None] + uh[:, None] * xl[None, :]
        lam = np.exp(u)
        tau = lam + beta[:, None]
        w = _free_wave(n, profile, lam, tau, nodes)
        integrand = lam**e * np.clip(w, 0.0, None) ** p * 2.0 * lam
        inner = uh * (integrand @ wl)
        val = c_geom * float(inner @ wbeta)
        out.append(val * d**q)
    return np.asarray(out)


def estimate_M(
    n: int,
    p: float,
    profile: BumpProfile,
    delta: float,
    sample_grid: Sequence[tuple[float, float]] | None = None,
    safety: float = 0.9,
    nodes: int = 32,
) -> float:
    """Numerical constant ``M(n, p, g)`` of the first lower bound: grid infimum of :func:`m_profile` times ``safety``."""
    if not profile.g0 > 0:
        raise ValueError("profile must be nonzero (g >= 0, g not identically 0)")
    if not profile.radial(2.0 * delta) > 0:
        raise ValueError(f"need g(2δ) > 0; g({2 * delta!r}) = 0 for this profile")
    grid = default_m_grid(delta) if sample_grid is None else list(sample_grid)
    if not grid:
        raise ValueError("sample grid is empty")
    values = m_profile(n, p, profile, delta, grid, nodes=nodes)
    inf = float(values.min())
    if not inf > 0:
        raise ArithmeticError(f"constant M infimum {inf!r} is not positive on the sample grid")
    return safety * inf


# ---------------------------------------------------------------------------
# Replay of the induction step
# ---------------------------------------------------------------------------


def default_samples(j: int, k: float) -> list[tuple[float, float]]:
    """Five documented points of ``Σ_{j+1}`` as ``(r, t)``.

    With ``b = l_{j+1} k`` the distances ``t - r`` are ``b`` times
    ``1.5, 3, 8, 30, 200`` and ``r / (t - r)`` is ``1, 2, 1, 1.5, 4``.
    """
    base = float(slicing_l(j + 1)) * k
    pts = []
    for df, rf in ((1.5, 1.0), (3.0, 2.0), (8.0, 1.0), (30.0, 1.5), (200.0, 4.0)):
        d = df * base
        pts.append((rf * d, rf * d + d))
    return pts


def random_samples(j: int, k: float, count: int, seed: int | None = None) -> list[tuple[float, float]]:
    """``count`` seeded points of ``Σ_{j+1}`` with ``t - r`` log-uniform in ``[b, 200 b]``."""
    rng = np.random.default_rng(seed)
    base = float(slicing_l(j + 1)) * k
    d = base * np.exp(rng.uniform(0.0, math.log(200.0), size=count))
    r = d * (1.0 + rng.uniform(0.0, 3.0, size=count))
    return [(float(ri), float(ri + di)) for ri, di in zip(r, d)]


@dataclass
class StepVerdict:
    """Outcome of re-checking one step ``j -> j+1`` at sample points.

    ``computed`` and ``claimed`` are stored with the common positive factor
    ``exp(log_scale)`` removed (``C_j^p`` times powers of the log factor and
    ``r``), so they stay finite for any ``ε``; the comparison is unaffected.
    """

    j: int
    n: int
    sample_points: list[tuple[float, float]]
    computed: list[float]
    claimed: list[float]
    log_scale: list[float]
    quadrature_error: list[float]
    passed: bool
    inconclusive: bool
    tol: float
    M: float

    @property
    def quadrature_error_estimate(self) -> float:
        return max(self.quadrature_error) if self.quadrature_error else 0.0

    @property
    def status(self) -> str:
        if self.inconclusive:
            return "inconclusive"
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return {
            "j": self.j,
            "n": self.n,
            "status": self.status,
            "passed": self.passed,
            "tol": self.tol,
            "M": self.M,
            "M_note": "M estimated numerically",
            "quadrature_error_estimate": self.quadrature_error_estimate,
            "points": [
                {
                    "r": r,
                    "t": t,
                    "computed": c,
                    "claimed": cl,
                    "log_scale": ls,
                    "quadrature_error": qe,
                }
                for (r, t), c, cl, ls, qe in zip(
                    self.sample_points, self.computed, self.claimed, self.log_scale, self.quadrature_error
                )
            ],
        }


def _check_in_sigma(j_next: int, k: float, r: float, t: float) -> float:
    d = t - r
    lo = float(slicing_l(j_next)) * k
    if not (lo <= d <= r):
        raise ValueError(f"sample ({r!r}, {t!r}) violates l_{j_next} k = {lo!r} <= t - r <= r")
    return d


def verify_iteration_step(
    j: int,
    consts: SlicingConstants,
    eps: float,
    samples: Sequence[tuple[float, float]] | None = None,
    tol: float = 1e-3,
    rtol_quad: float = 1e-9,
) -> StepVerdict:
    """Check that the ``j``-th bound, fed through the integral inequality,
    dominates the ``(j+1)``-th bound at every sample of ``Σ_{j+1}``.

    The left side is the double integral
    ``C_geom r^{-(n-1)/2} ∫_{l_j k}^{t-r} dβ ∫_{2(t-r)+β}^{3(t-r)} λ^{(n-1)/2} B_j(λ, τ)^p dα``
    with ``λ = (α-β)/2``, ``τ = (α+β)/2`` and ``B_j`` the ``j``-th bound;
    it is computed by iterated adaptive Simpson. The right side is the
    ``(j+1)``-th bound in closed form. A point passes when
    ``computed >= claimed (1 - tol)``; a quadrature error above
    ``tol * claimed`` makes the verdict inconclusive instead.
    """
    if j < 1:
        raise ValueError(f"j must be >= 1, got {j!r}")
    pts = default_samples(j, consts.k) if samples is None else list(samples)
    if len(pts) < 3:
        raise ValueError(f"at least three sample points are required, got {len(pts)}")

    n, p, k = consts.n, consts.p, consts.k
    e = 0.5 * (n - 1)
    q = consts.q
    lj = float(slicing_l(j))
    lj1 = float(slicing_l(j + 1))
    pa = p * slicing_a(j, p)
    logc_j = iterate_logC(j, consts, eps)[-1].logC_j
    step_factor = consts.N / (2.0 * p) ** j

    computed, claimed, scales, errors = [], [], [], []
    all_pass = True
    inconclusive = False
    for r, t in pts:
        d = _check_in_sigma(j + 1, k, r, t)
        big_l = math.log(d / (lj * k))
        if big_l <= 0:
            raise ValueError(f"empty integration region at ({r!r}, {t!r}): t - r <= l_j k")

        def integrand(alpha: float, beta: float) -> float:
            lam = 0.5 * (alpha - beta)
            ratio = math.log(beta / (lj * k)) / big_l
            return lam ** (e * (1.0 - p)) * beta ** (-p * q) * ratio**pa

        res = adaptive_simpson_2d(
            integrand,
            (lj * k, d),
            lambda beta: (2.0 * d + beta, 3.0 * d),
            rtol=rtol_quad,
        )
        comp = consts.C_geom * res.value
        err = consts.C_geom * res.error
        l_next = math.log(d / (lj1 * k))
        claim = step_factor * d ** (-q) * (l_next / big_l) ** pa * l_next if l_next > 0 else 0.0
        computed.append(comp)
        claimed.append(claim)
        errors.append(err)
        scales.append(p * logc_j + pa * math.log(big_l) - e * math.log(r))
        if not res.converged or (claim > 0 and err > tol * claim):
            inconclusive = True
        if comp < claim * (1.0 - tol):
            all_pass = False
    return StepVerdict(
        j=j,
        n=n,
        sample_points=[(float(r), float(t)) for r, t in pts],
        computed=computed,
        claimed=claimed,
        log_scale=scales,
        quadrature_error=errors,
        passed=all_pass and not inconclusive,
        inconclusive=inconclusive and all_pass,
        tol=tol,
        M=consts.M,
    )


@dataclass(frozen=True)
class BetaSlicingReport:
    """One-dimensional slicing bound and the integration-by-parts identity.

    With ``L = log((t-r)/(l_j k))``, ``lhs`` and ``rhs`` are divided by
    ``L^{p a_j + 1}`` and ``ibp_lhs``, ``ibp_rhs`` by ``L^{p a_j}``.
    """

    j: int
    r: float
    t: float
    lhs: float
    rhs: float
    quadrature_error: float
    passed: bool
    ibp_lhs: float
    ibp_rhs: float
    ibp_ok: bool
    fraction_exact: Fraction
    fraction_ok: bool

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "fraction_exact"}
        out["fraction_exact"] = str(self.fraction_exact)
        return out


def verify_beta_slicing_bound(j: int, p: float, k: float, r: float, t: float, tol: float = 1e-6) -> BetaSlicingReport:
    """Check ``∫_{l_j k}^{t-r} log(β/(l_j k))^{pa_j+1} dβ >= (1 - l_j/l_{j+1})(t-r) log((t-r)/(l_{j+1}k))^{pa_j+1}``.

    Also checks ``1 - l_j/l_{j+1} = 1/(2^{j+1} l_{j+1}) >= 2^{-(j+2)}`` in
    exact rationals, and the integration-by-parts step
    ``∫ (t-r-β)/β log^{pa_j} dβ = ∫ log^{pa_j+1} dβ / (pa_j+1)``.
    """
    if j < 1:
        raise ValueError(f"j must be >= 1, got {j!r}")
    d = _check_in_sigma(j + 1, k, r, t)
    lj, lj1 = slicing_l(j), slicing_l(j + 1)
    pa = p * slicing_a(j, p)
    lo = float(lj) * k
    big_l = math.log(d / lo)
    if big_l <= 0:
        raise ValueError(f"empty integration region at ({r!r}, {t!r})")

    lhs = adaptive_simpson(lambda b: (math.log(b / lo) / big_l) ** (pa + 1.0), lo, d, rtol=1e-12)
    frac = 1 - lj / lj1
    l_next = math.log(d / (float(lj1) * k))
    rhs = float(frac) * d * (l_next / big_l) ** (pa + 1.0) if l_next > 0 else 0.0
    passed = lhs.value >= rhs * (1.0 - tol)

    ibp = adaptive_simpson(lambda b: (d - b) / b * (math.log(b / lo) / big_l) ** pa, lo, d, rtol=1e-12)
    ibp_rhs = big_l * lhs.value / (pa + 1.0)
    ibp_ok = math.isclose(ibp.value, ibp_rhs, rel_tol=1e-8, abs_tol=1e-300)

    fraction_ok = frac == Fraction(1, 2 ** (j + 1)) / lj1 and frac >= Fraction(1, 2 ** (j + 2))
    return BetaSlicingReport(
        j=j,
        r=r,
        t=t,
        lhs=lhs.value,
        rhs=rhs,
        quadrature_error=lhs.error,
        passed=passed,
        ibp_lhs=ibp.value,
        ibp_rhs=ibp_rhs,
        ibp_ok=ibp_ok,
        fraction_exact=frac,
        fraction_ok=fraction_ok,
    )
