"""ε-sweeps of the simulator, JSON-lines persistence, and lifespan-law fits.

A sweep runs every ``ε`` at ``refinement_levels`` grids (``dx``, ``dx/2``,
...), turns the two finest runs into a lifespan estimate with an
uncertainty, and appends one record per ``ε`` to a JSON-lines file as soon
as it is known. Fits regress ``log T_h`` on ``log(1/ε)`` (power laws), on
``log a(ε)`` (the two-dimensional ``p = 2`` case) or on ``ε^{-p(p-1)}``
(critical law) by ordinary least squares.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate, stats

from .exponents import LawKind, LifespanLaw, predicted_lifespan_law, solve_a
from .profiles import DipoleProfile
from .wave_sim import InconclusiveLifespan, ProblemSpec, detect_lifespan, simulate

__all__ = [
    "SCHEMA_VERSION",
    "FitReport",
    "LifespanRecord",
    "SweepConfig",
    "export_csv",
    "fit_critical_law",
    "fit_power_law",
    "load_records",
    "moment_of_g",
    "predicted_law_for",
    "run_sweep",
]

SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "WAVELIFE_OUTPUT_DIR"


def moment_of_g(profile, n: int) -> float:
    """``∫_{R^n} g dx`` by radial quadrature with the sphere-area weight."""
    if isinstance(profile, DipoleProfile):
        if n != 1:
            raise ValueError("dipole profile is defined on the line only")
        ext = profile.support_radius
        pts = [-profile.shift, profile.shift]
        val, _ = integrate.quad(lambda x: float(profile.line(x)), -ext, ext, points=pts, epsabs=1e-13, limit=200)
        return val
    if profile.g0 == 0:
        return 0.0
    sphere = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
    val, _ = integrate.quad(
        lambda r: r ** (n - 1) * float(profile.radial(r)), 0.0, profile.R, epsabs=0.0, epsrel=1e-13, limit=200
    )
    return sphere * val


def predicted_law_for(n: int, p: float, profile) -> LifespanLaw:
    moment = moment_of_g(profile, n)
    return predicted_lifespan_law(n, p, g_moment_is_zero=abs(moment) < 1e-12)


@dataclass
class SweepConfig:
    base: dict
    eps_list: list[float]
    refinement_levels: int = 2
    output: Path | None = None
    workers: int = 1

    def __post_init__(self):
        if not self.eps_list:
            raise ValueError("eps_list is empty")
        eps = [float(e) for e in self.eps_list]
        if any(e <= 0 for e in eps):
            raise ValueError("every eps must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps_list must be strictly decreasing")
        if self.refinement_levels < 2:
            raise ValueError("refinement_levels must be >= 2")
        if "eps" in self.base:
            raise ValueError("base spec must not fix eps")
        self.eps_list = eps
        if self.output is not None:
            self.output = Path(self.output)
        # fail early on a malformed base spec
        self.spec_for(eps[0])

    def spec_for(self, eps: float) -> ProblemSpec:
        return ProblemSpec.from_dict({**self.base, "eps": eps})

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> SweepConfig:
        path = Path(path)
        with open(path) as fh:
            data = json.load(fh)
        output = data.get("output")
        if output is not None and not Path(output).is_absolute():
            output = Path(os.environ.get(OUTPUT_DIR_ENV, path.parent)) / output
        return cls(
            base=data["base"],
            eps_list=data["eps_list"],
            refinement_levels=int(data.get("refinement_levels", 2)),
            output=output,
            workers=int(data.get("workers", 1)),
        )


@dataclass
class LifespanRecord:
    eps: float
    n: int
    p: float
    T_h: float | None
    uncertainty: float | None
    status: str  # "ok" | "inconclusive"
    levels: list[dict]
    within_hypotheses: bool = True
    note: str = ""
    timestamp: float = field(default=0.0, compare=False)
    schema: int = SCHEMA_VERSION

    @property
    def usable(self) -> bool:
        return self.status == "ok" and self.T_h is not None and self.T_h > 0

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "eps": self.eps,
            "n": self.n,
            "p": self.p,
            "T_h": self.T_h,
            "uncertainty": self.uncertainty,
            "status": self.status,
            "within_hypotheses": self.within_hypotheses,
            "note": self.note,
            "levels": self.levels,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict) -> LifespanRecord:
        schema = data.get("schema", SCHEMA_VERSION)
        if schema != SCHEMA_VERSION:
            raise ValueError(f"unsupported record schema {schema!r}")
        return cls(
            eps=float(data["eps"]),
            n=int(data["n"]),
            p=float(data["p"]),
            T_h=data.get("T_h"),
            uncertainty=data.get("uncertainty"),
            status=data["status"],
            levels=list(data.get("levels", [])),
            within_hypotheses=bool(data.get("within_hypotheses", True)),
            note=data.get("note", ""),
            timestamp=float(data.get("timestamp", 0.0)),
        )


def _lifespan_task(args: tuple[dict, float, int]) -> LifespanRecord:
    base, eps, levels = args
    spec = ProblemSpec.from_dict({**base, "eps": eps})
    runs = [simulate(spec.refined(level), refinement_level=level) for level in range(levels)]
    level_rows = [
        {"level": r.refinement_level, "dx": r.spec.dx, "T_h": r.T_h, "status": r.status, "steps": r.steps}
        for r in runs
    ]
    note = "" if spec.within_hypotheses else "data outside the blow-up hypotheses f = 0, g >= 0 (solver test)"
    try:
        est = detect_lifespan(runs[-2], runs[-1])
    except InconclusiveLifespan as exc:
        return LifespanRecord(eps, spec.n, spec.p, None, None, "inconclusive", level_rows, spec.within_hypotheses,
                              f"{note}; {exc}".strip("; "))
    return LifespanRecord(eps, spec.n, spec.p, est.T, est.uncertainty, "ok", level_rows, spec.within_hypotheses, note)


def run_sweep(config: SweepConfig, on_record=None) -> list[LifespanRecord]:
    """Run the sweep; each record is appended to ``config.output`` as it arrives, in ``eps`` order."""
    tasks = [(config.base, eps, config.refinement_levels) for eps in config.eps_list]
    if config.output is not None:
        config.output.parent.mkdir(parents=True, exist_ok=True)

    def _consume(results: Iterable[LifespanRecord]) -> list[LifespanRecord]:
        out = []
        for rec in results:
            rec.timestamp = time.time()
            if config.output is not None:
                with open(config.output, "a") as fh:
                    fh.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")
            if on_record is not None:
                on_record(rec)
            out.append(rec)
        return out

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            # map yields in submission order, so the merge is keyed by eps
            return _consume(pool.map(_lifespan_task, tasks))
    return _consume(_lifespan_task(t) for t in tasks)


def load_records(path: str | os.PathLike) -> list[LifespanRecord]:
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(LifespanRecord.from_dict(json.loads(line)))
    return records


def export_csv(records: Sequence[LifespanRecord], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["eps", "T_h", "uncertainty"])
        for rec in sorted(records, key=lambda r: -r.eps):
            if rec.usable:
                writer.writerow([repr(rec.eps), repr(rec.T_h), repr(rec.uncertainty)])


@dataclass(frozen=True)
class FitReport:
    model: str  # "PowerLaw" | "CriticalExponential"
    fitted: float
    intercept: float
    r_squared: float
    predicted: float | None
    relative_gap: float | None
    verdict: str  # "pass" | "fail" | "none"
    tolerance: float | None
    n_points: int
    abscissa: str
    label: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _as_points(records) -> tuple[np.ndarray, np.ndarray]:
    eps, T = [], []
    for rec in records:
        if isinstance(rec, dict):
            rec = LifespanRecord.from_dict(rec)
        if rec.usable:
            eps.append(rec.eps)
            T.append(rec.T_h)
    if len(eps) < 4:
        raise ValueError(f"need at least 4 usable blow-up records, got {len(eps)}")
    order = np.argsort(eps)
    return np.asarray(eps)[order], np.asarray(T)[order]


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    if np.ptp(x) == 0:
        raise ValueError("degenerate abscissas: all eps are equal")
    res = stats.linregress(x, y)
    return float(res.slope), float(res.intercept), float(min(1.0, res.rvalue**2))


def fit_power_law(
    records,
    predicted: float | LifespanLaw | None = None,
    tolerance: float = 0.2,
    label: str = "",
) -> FitReport:
    """Least squares of ``log T_h`` on ``log(1/ε)``; ``fitted`` is the exponent ``θ``.

    Passing a ``TwoDimP2`` law switches the abscissa to ``log a(ε)`` with a
    predicted slope of 1.
    """
    eps, T = _as_points(records)
    abscissa = "log(1/eps)"
    if isinstance(predicted, LifespanLaw):
        if predicted.kind is LawKind.EXPONENTIAL:
            raise ValueError("critical law: use fit_critical_law")
        if predicted.kind is LawKind.TWO_DIM_P2:
            abscissa = "log a(eps)"
            predicted = 1.0
        else:
            predicted = predicted.exponent
    x = np.log([solve_a(e) for e in eps]) if abscissa == "log a(eps)" else -np.log(eps)
    slope, intercept, r2 = _ols(x, np.log(T))
    gap = None
    verdict = "none"
    if predicted is not None:
        gap = abs(slope - predicted) / abs(predicted)
        verdict = "pass" if gap <= tolerance else "fail"
    return FitReport("PowerLaw", slope, intercept, r2, predicted, gap, verdict,
                     tolerance if predicted is not None else None, len(eps), abscissa, label)


def fit_critical_law(records, p: float, r2_threshold: float = 0.9, label: str = "exploratory") -> FitReport:
    """Least squares of ``log T_h`` on ``ε^{-p(p-1)}``; ``fitted`` is the rate ``C``.

    Passes when ``C > 0`` and ``r² >= r2_threshold``.
    """
    eps, T = _as_points(records)
    slope, intercept, r2 = _ols(eps ** (-p * (p - 1)), np.log(T))
    verdict = "pass" if slope > 0 and r2 >= r2_threshold else "fail"
    return FitReport("CriticalExponential", slope, intercept, r2, None, None, verdict, r2_threshold, len(eps),
                     "eps^(-p(p-1))", label)
