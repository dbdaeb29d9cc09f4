"""Two-qubit concurrence, sudden-death detection and first-cycle area."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

DEFAULT_EPSILON = 1e-6
_SYSY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))
_X_MASK = np.eye(4, dtype=bool) | np.fliplr(np.eye(4, dtype=bool))


class InvalidState(ValueError):
    pass


class InvalidStructure(ValueError):
    pass


class NotApplicable(ValueError):
    """ESD time is undefined for a trace that never exceeds epsilon."""


def _check_state(rho, tol=1e-8):
    herm = np.abs(rho - np.conj(np.swapaxes(rho, -1, -2))).max()
    tr = np.abs(np.trace(rho, axis1=-2, axis2=-1) - 1).max()
    if herm > tol:
        raise InvalidState(f"input not Hermitian (deviation {herm:.3g})")
    if tr > tol:
        raise InvalidState(f"trace deviates from 1 by {tr:.3g}")


def concurrence(rho: np.ndarray) -> float | np.ndarray:
    """Wootters concurrence of a 4x4 density matrix, or of a stack of them.

    The eigenvalues of R = rho (sy x sy) rho* (sy x sy) are real and
    non-negative up to rounding; magnitudes below 1e-12 are clamped.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (4, 4):
        raise InvalidState(f"expected 4x4 matrices, got {rho.shape}")
    _check_state(rho)
    R = rho @ _SYSY @ np.conj(rho) @ _SYSY
    lam = np.linalg.eigvals(R).real
    lam = np.where(np.abs(lam) <= 1e-12, 0.0, lam)
    lam = np.clip(lam, 0.0, None)
    s = np.sort(np.sqrt(lam), axis=-1)[..., ::-1]
    c = np.maximum(s[..., 0] - s[..., 1] - s[..., 2] - s[..., 3], 0.0)
    return float(c) if c.ndim == 0 else c


def concurrence_x(rho: np.ndarray, tol: float = 1e-10) -> float | np.ndarray:
    """Closed-form concurrence of an X state (diagonal plus anti-diagonal)."""
    rho = np.asarray(rho, dtype=complex)
    off = np.where(_X_MASK, 0, np.abs(rho))
    worst = off.max()
    if worst > tol:
        i, j = np.unravel_index(np.argmax(off.reshape(-1, 16).max(axis=0)), (4, 4))
        raise InvalidStructure(f"not an X state: entry ({i + 1},{j + 1}) has magnitude {worst:.3g}")
    p11, p22, p33, p44 = (np.clip(rho[..., k, k].real, 0, None) for k in range(4))
    c1 = 2 * (np.abs(rho[..., 3, 0]) - np.sqrt(p33 * p22))
    c2 = 2 * (np.abs(rho[..., 2, 1]) - np.sqrt(p44 * p11))
    c = np.maximum(0.0, np.maximum(c1, c2))
    return float(c) if c.ndim == 0 else c


@dataclass
class ConcurrenceTrace:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be matching 1-d arrays")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    def thinned(self, factor: int) -> "ConcurrenceTrace":
        return ConcurrenceTrace(self.times[::factor], self.values[::factor])


@dataclass
class EsdResult:
    t_esd: Optional[float]
    terminal: bool


@dataclass
class AreaResult:
    area: float
    cycle: Optional[tuple]


def _bisect(refine, t_lo, t_hi, epsilon, resolution):
    while t_hi - t_lo > resolution:
        mid = 0.5 * (t_lo + t_hi)
        if refine(mid) > epsilon:
            t_lo = mid
        else:
            t_hi = mid
    return t_hi


def _linear_crossing(t0, c0, t1, c1, epsilon):
    if c0 == c1:
        return t1
    return t0 + (c0 - epsilon) * (t1 - t0) / (c0 - c1)


def esd_time(
    trace: ConcurrenceTrace,
    epsilon: float = DEFAULT_EPSILON,
    refine: Callable[[float], float] | None = None,
    resolution: float | None = None,
) -> EsdResult:
    """First downward crossing of ``epsilon``.

    With ``refine`` (a callable returning C at an arbitrary time inside the
    bracketing sample interval) the crossing is bisected to ``resolution``;
    otherwise it is linearly interpolated between samples.
    """
    if len(trace.times) == 0:
        raise ValueError("empty concurrence trace")
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    c = trace.values
    above = c > epsilon
    if not above.any():
        raise NotApplicable("concurrence never exceeds epsilon; use entanglement_area")
    first_above = int(np.argmax(above))
    below_after = np.nonzero(~above[first_above:])[0]
    if len(below_after) == 0:
        return EsdResult(None, True)
    k = first_above + int(below_after[0])
    t0, t1 = trace.times[k - 1], trace.times[k]
    if refine is not None:
        if resolution is None:
            resolution = (t1 - t0) / 16
        t = _bisect(refine, t0, t1, epsilon, resolution)
    else:
        t = _linear_crossing(t0, c[k - 1], t1, c[k], epsilon)
    return EsdResult(float(t), False)


def entanglement_area(trace: ConcurrenceTrace, epsilon: float = DEFAULT_EPSILON) -> AreaResult:
    """Trapezoidal area of the first creation-decay cycle of concurrence.

    The cycle runs from the first sample where C exceeds epsilon to the
    first later sample where C is back at or below epsilon; the bracketing
    zero-level samples are included so the area covers the whole pulse.
    A cycle still open at the end of the trace is integrated to the end.
    """
    c, t = trace.values, trace.times
    above = c > epsilon
    if not above.any():
        return AreaResult(0.0, None)
    start = int(np.argmax(above))
    below_after = np.nonzero(~above[start:])[0]
    end = start + int(below_after[0]) if len(below_after) else len(c) - 1
    lo = max(start - 1, 0)
    area = float(np.trapezoid(c[lo : end + 1], t[lo : end + 1]))
    return AreaResult(area, (float(t[lo]), float(t[end])))
