"""Noise, temperature and anisotropy sweeps; effect classification; table runs."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.signal import find_peaks

from .dynamics import DEFAULT_DT, DEFAULT_TMAX, Propagator, positivity_floor
from .entanglement import (
    DEFAULT_EPSILON,
    ConcurrenceTrace,
    NotApplicable,
    concurrence,
    entanglement_area,
    esd_time,
)
from .operators import ChainSpec, NoisePlacement
from .states import get_preparation, make_preparation, partial_trace

LABELS = (
    "monotone_decreasing",
    "noise_shield",
    "stochastic_resonance",
    "stochastic_antiresonance",
    "multiple_resonances",
    "flat",
)
DEFAULT_REL_TOL = 0.05
DEFAULT_M_MAX = 10.0


class InsufficientData(ValueError):
    pass


class SweepFailed(RuntimeError):
    def __init__(self, M, cause):
        super().__init__(f"sweep failed at M={M:g}: {cause}")
        self.M = M
        self.cause = cause


def default_grid(n_points: int = 40, m_max: float = DEFAULT_M_MAX, n_linear: int = 10, linear_max: float = 0.01):
    """M = 0, a linear prefix up to ``linear_max``, then geometric to ``m_max``."""
    lin = np.linspace(0.0, linear_max, n_linear + 1)
    n_geo = n_points - len(lin)
    geo = np.geomspace(linear_max, m_max, n_geo + 1)[1:]
    return [float(x) for x in np.concatenate([lin, geo])]


def paper_spec(n_qubits: int, **kwargs) -> ChainSpec:
    """omega0=4, J=0.2, Delta=0.1, gamma=0.01, nbar=0 unless overridden."""
    J = kwargs.pop("J", 0.2)
    delta = kwargs.pop("delta", 0.1)
    kwargs.setdefault("omega0", 4.0)
    kwargs.setdefault("gamma", 0.01)
    return ChainSpec.from_j_delta(n_qubits, J, delta, **kwargs)


def two_qubit_spec(**kwargs) -> ChainSpec:
    """The 2-qubit setting: omega=1, J=Delta=0.1, gamma=0.01."""
    kwargs.setdefault("omega0", 1.0)
    kwargs.setdefault("gamma", 0.01)
    return ChainSpec.from_j_delta(2, 0.1, 0.1, **kwargs)


@dataclass(frozen=True)
class SweepConfig:
    preparation: str
    spec: ChainSpec
    placement: frozenset = frozenset()
    grid: tuple = field(default_factory=lambda: tuple(default_grid()))
    response: str = "auto"  # "esd_time" | "area" | "auto"
    t_max: float = DEFAULT_TMAX
    dt: float = DEFAULT_DT
    epsilon: float = DEFAULT_EPSILON
    store_stride: int = 10
    noise_model: str = "collective"  # "collective" | "independent"

    def __post_init__(self):
        object.__setattr__(self, "placement", frozenset(int(q) for q in self.placement))
        object.__setattr__(self, "grid", tuple(float(m) for m in self.grid))
        prep = get_preparation(self.preparation)
        if prep.n_qubits != self.spec.n_qubits:
            raise ValueError(
                f"preparation {self.preparation!r} has {prep.n_qubits} qubits, spec has {self.spec.n_qubits}"
            )
        NoisePlacement(self.placement, model=self.noise_model).validate(self.spec.n_qubits)
        g = self.grid
        if not g:
            raise ValueError("grid must be nonempty")
        bad = [m for m in g if m < 0 or not math.isfinite(m)]
        if bad:
            raise ValueError(f"grid values must be finite and >= 0, got {bad[0]}")
        if g[0] != 0:
            raise ValueError(f"grid must start at 0, got {g[0]}")
        if any(b <= a for a, b in zip(g, g[1:])):
            raise ValueError("grid must be strictly increasing")
        if self.response not in ("auto", "esd_time", "area"):
            raise ValueError(f"response must be esd_time, area or auto, got {self.response!r}")
        if self.resolved_response == "esd_time" and prep.is_product:
            raise ValueError("product preparations need response='area'")
        if not (self.t_max > 0 and self.dt > 0 and self.dt <= self.t_max):
            raise ValueError("need t_max > 0, dt > 0, dt <= t_max")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")

    @property
    def resolved_response(self) -> str:
        if self.response != "auto":
            return self.response
        return "area" if get_preparation(self.preparation).is_product else "esd_time"

    @property
    def placement_label(self) -> str:
        return NoisePlacement(self.placement).label

    def with_(self, **changes) -> "SweepConfig":
        return replace(self, **changes)


@dataclass
class PointResult:
    M: float
    response: float
    censored: bool
    trace: ConcurrenceTrace


@dataclass
class ResponseCurve:
    m_values: np.ndarray
    responses: np.ndarray
    censored: np.ndarray

    def __post_init__(self):
        self.m_values = np.asarray(self.m_values, dtype=float)
        self.responses = np.asarray(self.responses, dtype=float)
        self.censored = np.asarray(self.censored, dtype=bool)
        if not (len(self.m_values) == len(self.responses) == len(self.censored)):
            raise ValueError("curve arrays must have matching lengths")
        if (self.responses < 0).any():
            raise ValueError("responses must be >= 0")


@dataclass
class EffectClassification:
    label: str
    extrema: list  # (M, response, "min" | "max")
    notes: dict = field(default_factory=dict)


@dataclass
class TemperatureSweepResult:
    nbar_values: list
    curves: list
    labels: list
    nbar_critical: Optional[float]


def _reduced_concurrence(rho, keep=(1, 2)):
    return concurrence(partial_trace((rho + rho.conj().T) / 2, keep))


def refine_crossing(prop: Propagator, rho_lo, t_lo, t_hi, epsilon):
    """Bisect the first downward epsilon crossing inside one stored interval.

    Walks RK4 steps of size dt from ``rho_lo`` to find the bracketing step,
    then bisects it with partial RK4 steps down to dt / 16.
    """
    dt = prop.dt
    rho = rho_lo
    a = t_lo
    while a + dt < t_hi + 1e-9 * dt:
        nxt = prop.partial_step(rho, dt)
        if _reduced_concurrence(nxt) <= epsilon:
            break
        rho, a = nxt, a + dt
    else:
        return t_hi
    lo, hi = 0.0, dt
    while hi - lo > dt / 16:
        mid = 0.5 * (lo + hi)
        if _reduced_concurrence(prop.partial_step(rho, mid)) > epsilon:
            lo = mid
        else:
            hi = mid
    return a + hi


def run_point(config: SweepConfig, M: float, propagator: Propagator | None = None) -> PointResult:
    """Evolve one grid point and extract its response."""
    placement = NoisePlacement(config.placement, M, config.noise_model)
    prop = propagator or Propagator(config.spec, placement, config.dt)
    rho0 = make_preparation(get_preparation(config.preparation))
    n_steps = int(round(config.t_max / config.dt))
    traj = prop.run(rho0, n_steps, config.store_stride, positivity_floor=positivity_floor(rho0))
    C = concurrence(traj.reduced((1, 2)))
    trace = ConcurrenceTrace(traj.times, C)
    if config.resolved_response == "area":
        res = entanglement_area(trace, config.epsilon)
        censored = res.cycle is not None and res.cycle[1] >= traj.times[-1] and C[-1] > config.epsilon
        return PointResult(M, res.area, bool(censored), trace)
    try:
        first = esd_time(trace, config.epsilon)
    except NotApplicable:
        return PointResult(M, 0.0, False, trace)
    if first.terminal:
        return PointResult(M, float(traj.times[-1]), True, trace)
    k = int(np.searchsorted(traj.times, first.t_esd, side="left"))
    while k > 0 and C[k - 1] <= config.epsilon:
        k -= 1
    k = max(k - 1, 0)
    t = refine_crossing(prop, traj.state(k), traj.times[k], traj.times[k + 1], config.epsilon)
    return PointResult(M, float(t), False, trace)


def run_sweep(config: SweepConfig, threads: int = 1, keep_traces: bool = False):
    """Response curve over ``config.grid``; points are independent and may run in threads."""

    def work(M):
        try:
            return run_point(config, M)
        except Exception as exc:  # noqa: BLE001 - re-raised with the grid point attached
            raise SweepFailed(M, exc) from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(work, config.grid))
    else:
        points = [work(M) for M in config.grid]
    curve = ResponseCurve(
        [p.M for p in points], [p.response for p in points], [p.censored for p in points]
    )
    if keep_traces:
        return curve, [p.trace for p in points]
    return curve


def classify_effect(curve: ResponseCurve, rel_tol: float = DEFAULT_REL_TOL, min_points: int = 8) -> EffectClassification:
    """Label a response-vs-noise curve.

    An interior extremum counts when its prominence (drop to the higher of
    the two neighbouring bases) exceeds ``rel_tol`` times the largest
    response.  Censored points enter at their budget value, a lower bound,
    so a censored right tail reads as increasing.
    """
    r = curve.responses
    if int((~curve.censored).sum()) < min_points:
        raise InsufficientData(f"need >= {min_points} uncensored points, got {int((~curve.censored).sum())}")
    scale = float(np.max(np.abs(r)))
    notes = {"scale": scale, "threshold": rel_tol * scale, "rel_tol": rel_tol}
    if scale == 0:
        return EffectClassification("flat", [], notes)
    h = rel_tol * scale
    maxima, pmax = find_peaks(r, prominence=h)
    minima, pmin = find_peaks(-r, prominence=h)
    extrema = sorted(
        [(float(curve.m_values[i]), float(r[i]), "max") for i in maxima]
        + [(float(curve.m_values[i]), float(r[i]), "min") for i in minima]
    )
    notes["max_prominence"] = [float(p) / scale for p in pmax["prominences"]]
    notes["min_prominence"] = [float(p) / scale for p in pmin["prominences"]]
    drift = float(r[-1] - r[0])
    notes["drift"] = drift / scale
    if len(maxima) and len(minima):
        label = "multiple_resonances"
    elif len(minima):
        label = "stochastic_antiresonance"
    elif len(maxima):
        label = "stochastic_resonance"
    elif drift > h:
        label = "noise_shield"
    elif drift < -h:
        label = "monotone_decreasing"
    else:
        label = "flat"
    return EffectClassification(label, extrema, notes)


def sweep_temperature(config: SweepConfig, nbar_grid, rel_tol: float = DEFAULT_REL_TOL, threads: int = 1):
    nbar_grid = [float(x) for x in nbar_grid]
    if not nbar_grid or nbar_grid[0] != 0 or any(b <= a for a, b in zip(nbar_grid, nbar_grid[1:])):
        raise ValueError("nbar_grid must be strictly increasing from 0")
    curves, labels = [], []
    for nbar in nbar_grid:
        curve = run_sweep(config.with_(spec=config.spec.replace(nbar=nbar)), threads)
        curves.append(curve)
        labels.append(classify_effect(curve, rel_tol).label)
    critical = None
    for prev, cur, nbar in zip(labels, labels[1:], nbar_grid[1:]):
        if prev == "stochastic_antiresonance" and cur == "noise_shield":
            critical = nbar
            break
    return TemperatureSweepResult(nbar_grid, curves, labels, critical)


def end_to_end_gain(curve: ResponseCurve) -> float:
    return float(curve.responses[-1] - curve.responses[0])


def sweep_anisotropy(config: SweepConfig, delta_grid, threads: int = 1):
    """One curve per Delta with J fixed; returns [(delta, curve, gain)]."""
    delta_grid = [float(x) for x in delta_grid]
    if any(d < 0 for d in delta_grid) or any(b <= a for a, b in zip(delta_grid, delta_grid[1:])):
        raise ValueError("delta_grid must be non-negative and increasing")
    J = config.spec.J
    out = []
    for d in delta_grid:
        spec = config.spec.replace(j_x=J + d, j_y=J - d)
        curve = run_sweep(config.with_(spec=spec), threads)
        out.append((d, curve, end_to_end_gain(curve)))
    return out
