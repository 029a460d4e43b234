"""Initial-velocity profiles and exact free-wave solutions for them.

``BumpProfile`` is the radial bump ``g(r) = g0 * max(0, 1 - (r/R)^2)^m``.
Its antiderivatives are closed form (incomplete beta function), which gives
exact linear solutions with data ``(0, g)``:

* ``n = 1``: d'Alembert, ``u = (G(x+t) - G(x-t)) / 2``;
* ``n = 3`` radial: ``r u = (H(r+t) - H(|r-t|)) / 2`` with ``H' = s g(s)``;
* ``n = 2`` radial: Poisson's formula, reduced to a smooth 2-D integral and
  evaluated with tensor Gauss-Legendre rules.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import betainc

__all__ = [
    "BumpProfile",
    "DipoleProfile",
    "free_wave_1d",
    "free_wave_radial2",
    "free_wave_radial3",
    "free_wave_radial3_v",
]


@dataclass(frozen=True)
class BumpProfile:
    g0: float = 4.0
    R: float = 1.0
    m: float = 2.0

    def __post_init__(self):
        if self.g0 < 0:
            raise ValueError(f"bump amplitude must be >= 0, got {self.g0!r}")
        if not self.R > 0:
            raise ValueError(f"bump radius must be positive, got {self.R!r}")
        if self.m < 1:
            raise ValueError(f"shape exponent m must be >= 1, got {self.m!r}")

    @property
    def support_radius(self) -> float:
        return self.R

    @property
    def is_radial(self) -> bool:
        return True

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        z = np.clip(1.0 - (r / self.R) ** 2, 0.0, None)
        return self.g0 * z**self.m

    def line(self, x):
        return self.radial(np.abs(x))

    def antiderivative(self, x):
        """``∫_0^x g(|s|) ds`` (odd in ``x``, constant beyond the support)."""
        x = np.asarray(x, dtype=float)
        z = np.clip((x / self.R) ** 2, 0.0, 1.0)
        half = 0.5 * self.R * beta_fn(0.5, self.m + 1.0) * betainc(0.5, self.m + 1.0, z)
        return self.g0 * np.sign(x) * half

    def first_moment_antiderivative(self, x):
        """``∫_0^|x| s g(s) ds`` (even in ``x``)."""
        x = np.asarray(x, dtype=float)
        z = np.clip(1.0 - (x / self.R) ** 2, 0.0, None)
        return self.g0 * self.R**2 / (2.0 * (self.m + 1.0)) * (1.0 - z ** (self.m + 1.0))

    def exact_moment(self, n: int) -> float:
        """``∫_{R^n} g dx`` in closed form: ``|S^{n-1}| g0 R^n B(n/2, m+1) / 2``."""
        sphere = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
        return sphere * self.g0 * self.R**n * beta_fn(n / 2.0, self.m + 1.0) / 2.0

    def scaled(self, c: float) -> BumpProfile:
        return BumpProfile(self.g0 * c, self.R, self.m)

    def to_dict(self) -> dict:
        return {"kind": "bump", **asdict(self)}


@dataclass(frozen=True)
class DipoleProfile:
    """``g(x) = b(x - s) - b(x + s)`` on the line: zero total mass, sign-changing.

    Only meaningful for ``n = 1``. It violates ``g >= 0`` and is used to
    exercise the zero-moment lifespan case outside the blow-up hypotheses.
    """

    bump: BumpProfile = BumpProfile()
    shift: float = 2.0

    def __post_init__(self):
        if self.shift < self.bump.R:
            raise ValueError("dipole shift must be at least the bump radius (disjoint lobes)")

    @property
    def support_radius(self) -> float:
        return self.shift + self.bump.R

    @property
    def is_radial(self) -> bool:
        return False

    def line(self, x):
        x = np.asarray(x, dtype=float)
        return self.bump.line(x - self.shift) - self.bump.line(x + self.shift)

    def antiderivative(self, x):
        x = np.asarray(x, dtype=float)
        a = self.bump.antiderivative
        return (a(x - self.shift) - a(-self.shift)) - (a(x + self.shift) - a(self.shift))

    def exact_moment(self, n: int) -> float:
        if n != 1:
            raise ValueError("dipole profile is defined on the line only")
        return 0.0

    def to_dict(self) -> dict:
        return {"kind": "dipole", "shift": self.shift, "bump": asdict(self.bump)}


def profile_from_dict(data: dict):
    kind = data.get("kind", "bump")
    if kind == "bump":
        return BumpProfile(float(data.get("g0", 4.0)), float(data.get("R", 1.0)), float(data.get("m", 2.0)))
    if kind == "dipole":
        return DipoleProfile(profile_from_dict({"kind": "bump", **data.get("bump", {})}), float(data.get("shift", 2.0)))
    raise ValueError(f"unknown profile kind {kind!r}")


def free_wave_1d(profile, x, t):
    """Solution of ``u_tt = u_xx`` with ``u(x,0) = 0``, ``u_t(x,0) = g(x)``."""
    G = profile.antiderivative
    return 0.5 * (G(np.asarray(x) + t) - G(np.asarray(x) - t))


def free_wave_radial3_v(profile: BumpProfile, r, t):
    """``r * u`` for the radial 3-D free wave with data ``(0, g)``."""
    H = profile.first_moment_antiderivative
    r = np.asarray(r, dtype=float)
    return 0.5 * (H(r + t) - H(np.abs(r - t)))


def free_wave_radial3(profile: BumpProfile, r, t):
    r = np.asarray(r, dtype=float)
    v = free_wave_radial3_v(profile, r, t)
    safe = np.where(r > 0, r, 1.0)
    # limit r -> 0 of v / r is d/dr v = t g(t)
    return np.where(r > 0, v / safe, t * profile.radial(t))


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(k: int) -> tuple[np.ndarray, np.ndarray]:
    if k not in _GL_CACHE:
        _GL_CACHE[k] = np.polynomial.legendre.leggauss(k)
    return _GL_CACHE[k]


def free_wave_radial2(profile: BumpProfile, r, t, n_s: int = 48, n_theta: int = 48):
    """Radial 2-D free wave with data ``(0, g)`` at arrays ``r``, ``t``.

    Poisson's formula ``(1/2π) ∫_{|y|<t} g(|x+y|) / sqrt(t² - |y|²) dy``
    with ``s = sqrt(t² - ρ²)`` removes the edge singularity; the angular
    integral is restricted to the arc where ``|x + y| < R``.
    """
    r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
    shape = r.shape
    r = r.ravel()
    t = t.ravel()
    R = profile.R
    rho_lo = np.maximum(0.0, r - R)
    rho_hi = np.minimum(t, r + R)
    active = rho_lo < rho_hi
    s_lo = np.sqrt(np.clip(t**2 - rho_hi**2, 0.0, None))
    s_hi = np.sqrt(np.clip(t**2 - rho_lo**2, 0.0, None))

    xs, ws = gauss_legendre(n_s)
    xt, wt = gauss_legendre(n_theta)
    # s nodes: (points, n_s)
    half = 0.5 * (s_hi - s_lo)
    s = (0.5 * (s_hi + s_lo))[:, None] + half[:, None] * xs[None, :]
    rho = np.sqrt(np.clip(t[:, None] ** 2 - s**2, 0.0, None))
    lam = r[:, None]
    prod = 2.0 * lam * rho
    with np.errstate(divide="ignore", invalid="ignore"):
        cstar = np.where(prod > 0, (R**2 - lam**2 - rho**2) / prod, np.where(lam**2 + rho**2 < R**2, 1.0, -1.0))
    theta_lo = np.arccos(np.clip(cstar, -1.0, 1.0))
    # theta nodes on [theta_lo, pi]: (points, n_s, n_theta)
    th_half = 0.5 * (math.pi - theta_lo)
    theta = (0.5 * (math.pi + theta_lo))[..., None] + th_half[..., None] * xt
    d2 = lam[..., None] ** 2 + rho[..., None] ** 2 + prod[..., None] * np.cos(theta)
    gvals = profile.radial(np.sqrt(np.clip(d2, 0.0, None)))
    circ = 2.0 * th_half * np.tensordot(gvals, wt, axes=([-1], [0]))
    w = half * (circ @ ws) / (2.0 * math.pi)
    w = np.where(active, w, 0.0)
    return w.reshape(shape)
