"""Explicit finite-difference solver for ``u_tt - Δu = |u|^p`` with blow-up detection.

All geometries use the three-level leapfrog update
``u^{m+1} = 2u^m - u^{m-1} + Δt² (L_h u^m + F(u^m))``:

* ``n = 1``: full line, ``L_h`` the centred second difference;
* ``n = 3``: radial, in ``v = r u`` which satisfies
  ``v_tt - v_rr = |v|^p / r^{p-1}``, ``v(0, t) = 0``;
* ``n = 2``: radial, ``L_h u = u_rr + u_r / r`` with the origin row replaced
  by ``2 u_rr`` (``u_r(0) = 0``).

The data are ``u(·, 0) = ε f`` (zero unless overridden) and
``u_t(·, 0) = ε g``. The grid extends ``support + t_max`` plus a buffer of
cells, so the homogeneous Dirichlet edge never sees the solution. The
numerical lifespan ``T_h`` is the time at which ``max|u|`` first crosses a
cap.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .profiles import BumpProfile, DipoleProfile, profile_from_dict

__all__ = [
    "FieldState",
    "InconclusiveLifespan",
    "LifespanEstimate",
    "ProblemSpec",
    "RunRecord",
    "crossing_time",
    "detect_lifespan",
    "discrete_energy",
    "evolve",
    "is_blowup_history",
    "ode_blowup_oracle",
    "simulate",
    "simulate_1d",
    "simulate_ode",
    "simulate_radial",
]

MONOTONE_WINDOW = 50
TRACE_POINTS = 1000
TRACE_TAIL = 200


class InconclusiveLifespan(RuntimeError):
    """A refinement pair cannot produce a lifespan estimate."""


@dataclass(frozen=True)
class ProblemSpec:
    n: int
    p: float
    eps: float
    g_profile: BumpProfile | DipoleProfile = BumpProfile()
    dx: float = 0.05
    courant: float = 0.5
    cap: float = 1e10
    t_max: float = 50.0
    linear: bool = False
    f_profile: BumpProfile | DipoleProfile | None = None
    buffer_cells: int = 20
    regularize_origin: bool = True

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError(f"n must be 1, 2 or 3, got {self.n!r}")
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p!r}")
        if self.eps < 0:
            raise ValueError(f"eps must be >= 0, got {self.eps!r}")
        if not 0 < self.courant <= 1:
            raise ValueError(f"courant number must lie in (0, 1], got {self.courant!r}")
        if not self.dx > 0 or not self.t_max > 0 or not self.cap > 0:
            raise ValueError("dx, t_max and cap must be positive")
        if self.n > 1 and not self.g_profile.is_radial:
            raise ValueError("radial solver needs a radial g profile")
        if self.g_profile.is_radial and not self.g_profile.g0 > 0:
            raise ValueError("g must be nonnegative and not identically zero (g0 > 0)")

    @property
    def dt(self) -> float:
        return self.courant * self.dx

    @property
    def within_hypotheses(self) -> bool:
        """Whether the data satisfy ``f = 0``, ``g >= 0``, ``g`` not identically 0."""
        return self.f_profile is None and isinstance(self.g_profile, BumpProfile)

    def refined(self, level: int) -> ProblemSpec:
        return replace(self, dx=self.dx / 2**level)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "eps": self.eps,
            "g_profile": self.g_profile.to_dict(),
            "dx": self.dx,
            "courant": self.courant,
            "cap": self.cap,
            "t_max": self.t_max,
            "linear": self.linear,
            "f_profile": None if self.f_profile is None else self.f_profile.to_dict(),
            "buffer_cells": self.buffer_cells,
            "regularize_origin": self.regularize_origin,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ProblemSpec:
        data = dict(data)
        if "g_profile" in data:
            data["g_profile"] = profile_from_dict(data["g_profile"])
        if data.get("f_profile") is not None:
            data["f_profile"] = profile_from_dict(data["f_profile"])
        return cls(**data)


@dataclass(frozen=True)
class RunRecord:
    spec: ProblemSpec
    blew_up: bool
    T_h: float
    status: str  # "blowup" | "no_blowup" | "unstable"
    trace: tuple[tuple[float, float], ...]
    refinement_level: int = 0
    steps: int = 0
    nodes: int = 0
    dt: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self, include_trace: bool = True) -> dict:
        out = {
            "spec": self.spec.to_dict() if self.spec is not None else None,
            "blew_up": self.blew_up,
            "T_h": self.T_h,
            "status": self.status,
            "refinement_level": self.refinement_level,
            "steps": self.steps,
            "nodes": self.nodes,
            "dt": self.dt,
            "diagnostics": self.diagnostics,
        }
        if include_trace:
            out["trace"] = [list(pt) for pt in self.trace]
        return out


class FieldState(NamedTuple):
    """Grid and the two most recent time levels; ``u`` is at time ``t``.

    For ``n = 3`` the arrays hold ``v = r u``.
    """

    x: np.ndarray
    u_prev: np.ndarray
    u: np.ndarray
    t: float
    dt: float


def _power(u: np.ndarray, p: float) -> np.ndarray:
    if p == 2.0:
        return u * u
    return np.abs(u) ** p


class _Scheme:
    """Grid, right-hand side and amplitude functional for one geometry."""

    def __init__(self, spec: ProblemSpec):
        self.spec = spec
        h = spec.dx
        extent = spec.g_profile.support_radius
        if spec.f_profile is not None:
            extent = max(extent, spec.f_profile.support_radius)
        half_width = extent + spec.t_max + spec.buffer_cells * h
        cells = int(math.ceil(half_width / h))
        self.h = h
        if spec.n == 1:
            self.x = h * np.arange(-cells, cells + 1)
        else:
            self.x = h * np.arange(0, cells + 1)
            if spec.n == 2 and not spec.regularize_origin:
                raise ValueError("radial grid starts at r = 0; the regularized origin stencil is required")
        self.nodes = self.x.size
        if spec.n == 3:
            r = self.x[1:-1]
            self._source_weight = r ** (1.0 - spec.p)
            self._inv_r = 1.0 / self.x[1:]
        if spec.n == 2:
            r = self.x[1:-1]
            self._drift = 1.0 / (2.0 * r * h)

    def data(self) -> tuple[np.ndarray, np.ndarray]:
        """``u(·, 0)`` and ``u_t(·, 0)`` in solver variables."""
        spec = self.spec
        if spec.n == 1:
            g = spec.g_profile.line(self.x)
            f = np.zeros_like(self.x) if spec.f_profile is None else spec.f_profile.line(self.x)
        else:
            g = spec.g_profile.radial(self.x)
            f = np.zeros_like(self.x) if spec.f_profile is None else spec.f_profile.radial(self.x)
        u0, u0t = spec.eps * f, spec.eps * g
        if spec.n == 3:
            u0, u0t = self.x * u0, self.x * u0t
        u0[-1] = u0t[-1] = 0.0
        return u0, u0t

    def rhs(self, u: np.ndarray) -> np.ndarray:
        spec = self.spec
        h2 = self.h * self.h
        out = np.zeros_like(u)
        lap = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h2
        if spec.n == 2:
            lap = lap + (u[2:] - u[:-2]) * self._drift
        out[1:-1] = lap
        if spec.n == 2:
            out[0] = 4.0 * (u[1] - u[0]) / h2
        if not spec.linear:
            if spec.n == 3:
                out[1:-1] += _power(u[1:-1], spec.p) * self._source_weight
            elif spec.n == 2:
                out[:-1] += _power(u[:-1], spec.p)
            else:
                out[1:-1] += _power(u[1:-1], spec.p)
        return out

    def physical(self, u: np.ndarray) -> np.ndarray:
        """Solver variables to ``u`` (undoes ``v = r u`` for ``n = 3``)."""
        if self.spec.n != 3:
            return u
        out = np.empty_like(u)
        out[1:] = u[1:] * self._inv_r
        # even parabola a + b r² through r = h, 2h
        out[0] = (4.0 * out[1] - out[2]) / 3.0
        return out

    def amplitude(self, u: np.ndarray) -> float:
        if self.spec.n != 3:
            return float(np.max(np.abs(u)))
        inner = np.abs(u[1:] * self._inv_r)
        u_origin = abs(4.0 * u[1] / self.x[1] - u[2] / self.x[2]) / 3.0
        return float(max(inner.max(), u_origin))

    def start(self) -> tuple[np.ndarray, np.ndarray]:
        """Levels 0 and 1; level 1 from the second-order Taylor expansion."""
        dt = self.spec.dt
        u0, u0t = self.data()
        u1 = u0 + dt * u0t + 0.5 * dt * dt * self.rhs(u0)
        self._pin(u1)
        return u0, u1

    def _pin(self, u: np.ndarray) -> None:
        u[-1] = 0.0
        if self.spec.n == 1:
            u[0] = 0.0
        elif self.spec.n == 3:
            u[0] = 0.0


def _crossing(t0: float, a0: float, t1: float, a1: float, cap: float) -> float:
    """Log-linear interpolation of the time ``max|u|`` reaches ``cap``."""
    if a0 <= 0 or a1 <= a0:
        return t1
    frac = (math.log(cap) - math.log(a0)) / (math.log(a1) - math.log(a0))
    return t0 + min(max(frac, 0.0), 1.0) * (t1 - t0)


def is_blowup_history(values: np.ndarray) -> bool:
    """Signed solution at the crossing node over the last steps: blow-up iff
    it keeps one sign and its magnitude never decreases. Leapfrog
    instabilities alternate in sign and fail this test."""
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        return False
    sign = np.sign(values[-1])
    if sign == 0 or np.any(np.sign(values[values != 0]) != sign):
        return False
    return bool(np.all(np.diff(np.abs(values)) >= 0))


def _thin_trace(times: list[float], amps: list[float]) -> tuple[tuple[float, float], ...]:
    count = len(times)
    stride = max(1, count // TRACE_POINTS)
    keep = set(range(0, count, stride))
    keep.update(range(max(0, count - TRACE_TAIL), count))
    return tuple((times[i], amps[i]) for i in sorted(keep))


def _march(scheme: _Scheme, refinement_level: int) -> RunRecord:
    spec = scheme.spec
    dt = spec.dt
    dt2 = dt * dt
    u_prev, u = scheme.start()
    steps_total = int(math.floor(spec.t_max / dt + 1e-9))
    times = [0.0, dt]
    amps = [scheme.amplitude(u_prev), scheme.amplitude(u)]
    history = deque([u_prev, u], maxlen=MONOTONE_WINDOW + 1)
    status = "no_blowup"
    T_h = spec.t_max
    step = 1
    if amps[-1] > spec.cap:
        status, T_h = "blowup", _crossing(0.0, amps[0], dt, amps[1], spec.cap)
    while status == "no_blowup" and step < steps_total:
        u_next = 2.0 * u - u_prev + dt2 * scheme.rhs(u)
        scheme._pin(u_next)
        u_prev, u = u, u_next
        history.append(u)
        step += 1
        t = step * dt
        amp = scheme.amplitude(u)
        times.append(t)
        amps.append(amp)
        if not math.isfinite(amp):
            status = "unstable"
            T_h = t
            break
        if amp > spec.cap:
            node = int(np.argmax(np.abs(scheme.physical(u))))
            if is_blowup_history([scheme.physical(h)[node] for h in history]):
                status = "blowup"
                T_h = _crossing(times[-2], amps[-2], t, amp, spec.cap)
            else:
                status = "unstable"
                T_h = t
            break
    return RunRecord(
        spec=spec,
        blew_up=status == "blowup",
        T_h=T_h,
        status=status,
        trace=_thin_trace(times, amps),
        refinement_level=refinement_level,
        steps=step,
        nodes=scheme.nodes,
        dt=dt,
        diagnostics={"final_amplitude": amps[-1], "within_hypotheses": spec.within_hypotheses},
    )


def simulate_1d(spec: ProblemSpec, refinement_level: int = 0) -> RunRecord:
    if spec.n != 1:
        raise ValueError("simulate_1d needs n = 1")
    return _march(_Scheme(spec), refinement_level)


def simulate_radial(spec: ProblemSpec, refinement_level: int = 0) -> RunRecord:
    if spec.n not in (2, 3):
        raise ValueError("simulate_radial needs n = 2 or 3")
    return _march(_Scheme(spec), refinement_level)


def simulate(spec: ProblemSpec, refinement_level: int = 0) -> RunRecord:
    if spec.n == 1:
        return simulate_1d(spec, refinement_level)
    return simulate_radial(spec, refinement_level)


def evolve(spec: ProblemSpec, t_end: float) -> FieldState:
    """March to ``t_end`` (rounded to a whole number of steps) without blow-up checks."""
    scheme = _Scheme(spec)
    dt = spec.dt
    steps = int(round(t_end / dt))
    u_prev, u = scheme.start()
    dt2 = dt * dt
    for _ in range(steps - 1):
        u_next = 2.0 * u - u_prev + dt2 * scheme.rhs(u)
        scheme._pin(u_next)
        u_prev, u = u, u_next
    return FieldState(scheme.x, u_prev, u, steps * dt, dt)


def discrete_energy(state: FieldState) -> float:
    """Time-centred energy of a linear 1-D state: kinetic plus averaged gradient terms."""
    dx = state.x[1] - state.x[0]
    vel = (state.u - state.u_prev) / state.dt
    grad_a = np.diff(state.u) / dx
    grad_b = np.diff(state.u_prev) / dx
    return 0.5 * dx * float(np.sum(vel**2) + 0.5 * np.sum(grad_a**2 + grad_b**2))


def simulate_ode(
    p: float,
    y0: float,
    y1: float,
    dt: float = 1e-3,
    cap: float = 1e10,
    t_max: float = 100.0,
) -> RunRecord:
    """Spatially constant run: the same leapfrog and detector applied to ``y'' = |y|^p``."""
    spec = ProblemSpec(n=1, p=p, eps=1.0, dx=dt, courant=1.0, cap=cap, t_max=t_max)

    class _Point(_Scheme):
        def __init__(self):
            self.spec = spec
            self.nodes = 1

        def data(self):
            return np.array([float(y0)]), np.array([float(y1)])

        def rhs(self, u):
            return _power(u, p)

        def amplitude(self, u):
            return float(abs(u[0]))

        def physical(self, u):
            return u

        def _pin(self, u):
            pass

    return _march(_Point(), 0)


def ode_blowup_oracle(p: float, y0: float, y1: float) -> float:
    """Blow-up time of ``y'' = y^p``, ``y(0) = y0 > 0``, ``y'(0) = y1 >= 0``.

    Energy conservation gives ``y'² = y1² + 2/(p+1) (y^{p+1} - y0^{p+1})``,
    so ``T = ∫_{y0}^∞ dy / y'``. The substitution ``y = y0 + s²`` removes
    the square-root singularity at ``y0`` when ``y1 = 0``.
    """
    if not (y0 > 0 and y1 >= 0 and p > 1):
        raise ValueError("need y0 > 0, y1 >= 0, p > 1")
    c = 2.0 / (p + 1.0)
    base = y0 ** (p + 1.0)

    def integrand(s: float) -> float:
        y = y0 + s * s
        speed2 = y1 * y1 + c * (y ** (p + 1.0) - base)
        if speed2 <= 0:
            # s -> 0 with y1 = 0: 2s / sqrt(c (p+1) y0^p s²)
            return 2.0 / math.sqrt(c * (p + 1.0) * y0**p)
        return 2.0 * s / math.sqrt(speed2)

    val, err = integrate.quad(integrand, 0.0, math.inf, epsabs=0.0, epsrel=1e-11, limit=500)
    if not math.isfinite(val) or err > 1e-6 * abs(val):
        raise ArithmeticError(f"blow-up time quadrature did not converge (value {val!r}, error {err!r})")
    return val


class LifespanEstimate(NamedTuple):
    T: float
    uncertainty: float


def crossing_time(record: RunRecord, cap: float) -> float:
    """First time the stored trace exceeds ``cap`` (log-linear interpolation)."""
    prev = None
    for t, a in record.trace:
        if a > cap:
            if prev is None:
                return t
            return _crossing(prev[0], prev[1], t, a, cap)
        prev = (t, a)
    raise InconclusiveLifespan(f"trace never exceeds cap {cap!r}")


def detect_lifespan(coarse: RunRecord, fine: RunRecord) -> LifespanEstimate:
    """Lifespan from a refinement pair: the finer ``T_h`` and the pair spread."""
    if not (coarse.blew_up and fine.blew_up):
        raise InconclusiveLifespan(
            f"refinement pair disagrees or did not blow up (statuses {coarse.status!r}, {fine.status!r})"
        )
    return LifespanEstimate(fine.T_h, abs(coarse.T_h - fine.T_h))
