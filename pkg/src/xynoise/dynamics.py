"""Master-equation right-hand side, RK4 integration and a matrix-exponential oracle.

The generator is

    drho/dt = -i[H0, rho] + gamma (nbar + 1) sum_n D[S-_n] rho
              + gamma nbar sum_n D[S+_n] rho - M [V, [V, rho]]

with D[A] rho = A rho A^+ - {A^+ A, rho} / 2.  Vectorisation is column
stacking: vec(A X B) = (B^T kron A) vec(X).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg

from .operators import (
    ChainSpec,
    NoisePlacement,
    build_hamiltonian,
    lowering_operator,
    noise_operators,
    raising_operator,
)

TRACE_TOL = 1e-9
HERMITIAN_TOL = 1e-9
POSITIVITY_TOL = 1e-8

DEFAULT_DT = 0.01
STEP_BLOCK = 16  # stored snapshots advanced per matrix product
DEFAULT_TMAX = 1200.0


class IntegrationDiverged(RuntimeError):
    """A stored snapshot violated the density-matrix invariants."""

    def __init__(self, message, time):
        super().__init__(f"{message} at t={time:g}")
        self.time = time


@dataclass(frozen=True)
class Operators:
    """Prebuilt matrices for one (spec, placement) pair."""

    H: np.ndarray
    lowering: tuple
    raising: tuple
    V: tuple  # operators of the double commutators
    gamma_down: float
    gamma_up: float
    M: float


def prebuild(spec: ChainSpec, noise: NoisePlacement) -> Operators:
    n = spec.n_qubits
    return Operators(
        H=build_hamiltonian(spec),
        lowering=tuple(lowering_operator(k, n) for k in range(1, n + 1)),
        raising=tuple(raising_operator(k, n) for k in range(1, n + 1)),
        V=tuple(noise_operators(noise, n)),
        gamma_down=spec.gamma * (spec.nbar + 1),
        gamma_up=spec.gamma * spec.nbar,
        M=noise.strength,
    )


def _dissipator(A, rho):
    AdA = A.conj().T @ A
    return A @ rho @ A.conj().T - 0.5 * (AdA @ rho + rho @ AdA)


def master_rhs(rho: np.ndarray, spec: ChainSpec, noise: NoisePlacement, ops: Operators | None = None) -> np.ndarray:
    """Evaluate drho/dt in matrix form."""
    if rho.shape != (spec.dim, spec.dim):
        raise ValueError(f"rho has shape {rho.shape}, expected {(spec.dim, spec.dim)}")
    if ops is None:
        ops = prebuild(spec, noise)
    H = ops.H
    out = -1j * (H @ rho - rho @ H)
    if ops.gamma_down:
        for A in ops.lowering:
            out += ops.gamma_down * _dissipator(A, rho)
    if ops.gamma_up:
        for A in ops.raising:
            out += ops.gamma_up * _dissipator(A, rho)
    if ops.M:
        for V in ops.V:
            VR = V @ rho - rho @ V
            out -= ops.M * (V @ VR - VR @ V)
    return out


def vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.shape[0])))
    return v.reshape((d, d), order="F")


def _spre(A):
    return np.kron(np.eye(A.shape[0]), A)


def _spost(A):
    return np.kron(A.T, np.eye(A.shape[0]))


def _lindblad_super(A):
    AdA = A.conj().T @ A
    return np.kron(A.conj(), A) - 0.5 * (_spre(AdA) + _spost(AdA))


def build_liouvillian(spec: ChainSpec, noise: NoisePlacement) -> np.ndarray:
    """Superoperator L with vec(master_rhs(rho)) == L @ vec(rho)."""
    ops = prebuild(spec, noise)
    L = -1j * (_spre(ops.H) - _spost(ops.H))
    for A in ops.lowering:
        L += ops.gamma_down * _lindblad_super(A)
    for A in ops.raising:
        L += ops.gamma_up * _lindblad_super(A)
    for V in ops.V:
        comm = _spre(V) - _spost(V)
        L -= ops.M * (comm @ comm)
    return L


def evolve_oracle(rho0: np.ndarray, spec: ChainSpec, noise: NoisePlacement, t: float) -> np.ndarray:
    """unvec(expm(L t) vec(rho0)) by scaling and squaring."""
    if t == 0:
        return np.array(rho0, dtype=complex, copy=True)
    L = build_liouvillian(spec, noise)
    return unvec(scipy.linalg.expm(L * t) @ vec(rho0))


def steady_state(spec: ChainSpec, noise: NoisePlacement) -> np.ndarray:
    """Fixed point of the generator from the null space of L."""
    L = build_liouvillian(spec, noise)
    null = scipy.linalg.null_space(L, rcond=1e-10)
    rho = unvec(null[:, 0])
    rho = rho / np.trace(rho)
    return (rho + rho.conj().T) / 2


def rk4_step_matrix(L: np.ndarray, dt: float) -> np.ndarray:
    """One classical RK4 step for the linear system dv/dt = L v.

    For a constant linear generator the four stages collapse to the
    degree-4 Taylor polynomial of exp(L dt).
    """
    hL = dt * L
    P = np.eye(L.shape[0], dtype=complex)
    term = P
    for k in range(1, 5):
        term = term @ hL / k
        P = P + term
    return P


def rk4_step(rho, dt, spec, noise, ops=None):
    """One RK4 step of master_rhs in matrix form (reference stepping path)."""
    if ops is None:
        ops = prebuild(spec, noise)
    k1 = master_rhs(rho, spec, noise, ops)
    k2 = master_rhs(rho + 0.5 * dt * k1, spec, noise, ops)
    k3 = master_rhs(rho + 0.5 * dt * k2, spec, noise, ops)
    k4 = master_rhs(rho + dt * k3, spec, noise, ops)
    return rho + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass(frozen=True)
class EvolutionParams:
    spec: ChainSpec
    noise: NoisePlacement = field(default_factory=NoisePlacement)
    t_max: float = DEFAULT_TMAX
    dt: float = DEFAULT_DT
    store_stride: int = 10

    def __post_init__(self):
        if not self.t_max > 0:
            raise ValueError(f"t_max must be > 0, got {self.t_max}")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.dt > self.t_max:
            raise ValueError(f"dt={self.dt} exceeds t_max={self.t_max}")
        if self.store_stride < 1:
            raise ValueError(f"store_stride must be >= 1, got {self.store_stride}")
        self.noise.validate(self.spec.n_qubits)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


class Trajectory:
    """Stored snapshots of one run.

    States are held as their vec entries on ``positions`` (all other entries
    vanish) and expanded to full matrices on first access of ``states``.
    """

    def __init__(self, times, states=None, *, entries=None, positions=None, dim=None):
        self.times = np.asarray(times, dtype=float)
        if states is not None:
            states = np.asarray(states, dtype=complex)
            dim = states.shape[-1]
            positions = np.arange(dim * dim)
            entries = states.transpose(0, 2, 1).reshape(len(states), -1)
        self.dim = int(dim)
        self.positions = np.asarray(positions)
        # trailing zero column: absent positions gather from it
        self._entries = np.concatenate([entries, np.zeros((len(entries), 1), dtype=complex)], axis=1)
        self._lookup = np.full(self.dim * self.dim, len(self.positions))
        self._lookup[self.positions] = np.arange(len(self.positions))
        self._states = states

    def __len__(self):
        return len(self.times)

    def block(self, rows, cols=None) -> np.ndarray:
        """rho[:, rows][:, :, cols] for every snapshot."""
        rows = np.asarray(rows)
        cols = rows if cols is None else np.asarray(cols)
        pos = rows[:, None] + self.dim * cols[None, :]
        return self._entries[:, self._lookup[pos]]

    @property
    def states(self) -> np.ndarray:
        if self._states is None:
            idx = np.arange(self.dim)
            self._states = self.block(idx)
        return self._states

    def state(self, k: int) -> np.ndarray:
        idx = np.arange(self.dim)
        pos = idx[:, None] + self.dim * idx[None, :]
        return self._entries[k, self._lookup[pos]]

    def reduced(self, keep=(1, 2)) -> np.ndarray:
        """Partial trace onto the 1-based qubits in ``keep``, for every snapshot."""
        n = int(round(np.log2(self.dim)))
        keep = sorted(set(keep))
        if not keep or any(not 1 <= q <= n for q in keep):
            raise ValueError(f"keep={keep} invalid for {n} qubits")
        traced = [q for q in range(1, n + 1) if q not in keep]
        dk = 2 ** len(keep)

        def bits(i, qs):
            return sum(((i >> (n - q)) & 1) << (len(qs) - 1 - k) for k, q in enumerate(qs))

        P = np.zeros((len(self.positions) + 1, dk * dk))
        for loc, p in enumerate(self.positions):
            i, j = p % self.dim, p // self.dim
            if bits(i, traced) == bits(j, traced):
                P[loc, bits(i, keep) * dk + bits(j, keep)] = 1.0
        return (self._entries @ P).reshape(-1, dk, dk)

    def traces(self) -> np.ndarray:
        idx = np.arange(self.dim)
        return self._entries[:, self._lookup[idx * (self.dim + 1)]].sum(axis=1)

    def antihermitian(self) -> np.ndarray:
        """max |rho - rho^+| per snapshot, over stored entries."""
        p = self.positions
        partner = self._lookup[(p // self.dim) + self.dim * (p % self.dim)]
        v = self._entries[:, :-1]
        return np.abs(v - np.conj(self._entries[:, partner])).max(axis=1)

    def parity_blocks(self):
        """Even and odd excitation-parity blocks, or None if they are coupled."""
        par = np.array([bin(i).count("1") % 2 for i in range(self.dim)])
        even, odd = np.flatnonzero(par == 0), np.flatnonzero(par == 1)
        if np.any(self._lookup[even[:, None] + self.dim * odd[None, :]] < len(self.positions)):
            if np.any(self.block(even, odd)):
                return None
        return self.block(even), self.block(odd)


def parity_mask(dim: int) -> np.ndarray:
    """vec-index mask of entries rho[i, j] with equal excitation parity of i and j."""
    par = np.array([bin(i).count("1") % 2 for i in range(dim)])
    i = np.arange(dim * dim) % dim
    j = np.arange(dim * dim) // dim
    return par[i] == par[j]


def _parity_blocks(states):
    """Even/odd parity blocks, or None when the stack couples the two."""
    d = states.shape[-1]
    par = np.array([bin(i).count("1") % 2 for i in range(d)])
    even, odd = np.flatnonzero(par == 0), np.flatnonzero(par == 1)
    if np.any(states[:, even[:, None], odd[None, :]]):
        return None
    return states[:, even[:, None], even[None, :]], states[:, odd[:, None], odd[None, :]]


def min_eigenvalues(states: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of each Hermitian matrix in a stack.

    Stacks supported on equal-parity entries are split into two parity
    blocks first, which is exact and cheaper.
    """
    blocks = _parity_blocks(states)
    if blocks is None:
        return np.linalg.eigvalsh(states)[:, 0]
    return np.minimum(*(np.linalg.eigvalsh(b)[:, 0] for b in blocks))


def _all_above(states, bound):
    """True when every matrix in the stack has all eigenvalues > bound.

    A batched Cholesky of rho - bound*I succeeds exactly in that case and is
    much cheaper than a full eigendecomposition.
    """
    blocks = _parity_blocks(states) or (states,)
    try:
        for b in blocks:
            np.linalg.cholesky(b - bound * np.eye(b.shape[-1]))
    except np.linalg.LinAlgError:
        return False
    return True


def check_density_matrix(rho, time=0.0, hermitian_tol=HERMITIAN_TOL, positivity_floor=0.0):
    """Raise IntegrationDiverged if rho (or a stack of them) is unphysical.

    ``positivity_floor`` lowers the eigenvalue bound for deliberately
    non-positive inputs; the tolerance is applied below it.
    """
    rho = np.asarray(rho)
    stack = rho[None] if rho.ndim == 2 else rho
    times = np.broadcast_to(np.atleast_1d(time), (stack.shape[0],))
    herm = np.abs(stack - np.conj(np.swapaxes(stack, -1, -2))).max(axis=(-1, -2))
    tr = np.abs(np.trace(stack, axis1=-2, axis2=-1) - 1)
    for name, bad in (("hermiticity deviation", ~(herm <= hermitian_tol)), ("trace deviation", ~(tr <= TRACE_TOL))):
        if bad.any():
            raise IntegrationDiverged(name, float(times[int(np.argmax(bad))]))
    sym = (stack + np.conj(np.swapaxes(stack, -1, -2))) / 2
    bound = positivity_floor - POSITIVITY_TOL
    if not _all_above(sym, bound):
        bad = ~(min_eigenvalues(sym) >= bound)
        if bad.any():
            raise IntegrationDiverged("negative eigenvalue", float(times[int(np.argmax(bad))]))


def check_trajectory(traj: "Trajectory", hermitian_tol=HERMITIAN_TOL, positivity_floor=0.0, hermitian_exact=False):
    """check_density_matrix over a trajectory, working on its stored entries.

    ``hermitian_exact`` skips the Hermiticity scan for trajectories built
    from real Hermitian coordinates.
    """
    herm = np.zeros(len(traj)) if hermitian_exact else traj.antihermitian()
    tr = np.abs(traj.traces() - 1)
    for name, bad in (("hermiticity deviation", ~(herm <= hermitian_tol)), ("trace deviation", ~(tr <= TRACE_TOL))):
        if bad.any():
            raise IntegrationDiverged(name, float(traj.times[int(np.argmax(bad))]))
    blocks = traj.parity_blocks() or (traj.states,)
    bound = positivity_floor - POSITIVITY_TOL
    for b in blocks:
        b = (b + np.conj(np.swapaxes(b, -1, -2))) / 2
        if not _all_above(b, bound):
            bad = ~(np.linalg.eigvalsh(b)[:, 0] >= bound)
            if bad.any():
                raise IntegrationDiverged("negative eigenvalue", float(traj.times[int(np.argmax(bad))]))


def physicality(states: np.ndarray) -> dict:
    """Worst-case trace, Hermiticity and positivity figures over a stack."""
    herm = np.abs(states - np.conj(np.swapaxes(states, -1, -2))).max()
    tr = np.abs(np.trace(states, axis1=-2, axis2=-1) - 1).max()
    return {"trace": float(tr), "hermiticity": float(herm), "min_eigenvalue": float(min_eigenvalues(states).min())}


class HermitianCoordinates:
    """Real coordinates for Hermitian matrices supported on a set of vec positions.

    Diagonal entries contribute one coordinate, each upper-triangle pair
    contributes its real and imaginary parts.  ``T`` maps coordinates to the
    complex vec entries on ``positions``.
    """

    def __init__(self, dim: int, mask: np.ndarray):
        self.dim = dim
        self.positions = np.flatnonzero(mask)
        local = {p: k for k, p in enumerate(self.positions)}
        cols, re_rows, im_rows = [], [], []
        for p in self.positions:
            i, j = p % dim, p // dim
            if i > j:
                continue
            q = local[i + dim * j]
            if i == j:
                cols.append(((q, 1.0),))
                re_rows.append(q)
                im_rows.append(-1)
            else:
                qt = local[j + dim * i]
                cols.append(((q, 1.0), (qt, 1.0)))
                cols.append(((q, 1j), (qt, -1j)))
                re_rows.append(q)
                im_rows.append(-1)
                re_rows.append(-1)
                im_rows.append(q)
        self.T = np.zeros((len(self.positions), len(cols)), dtype=complex)
        for c, entries in enumerate(cols):
            for q, val in entries:
                self.T[q, c] = val
        # each entry is T[q, a] x_a + T[q, b] x_b with at most one real and one imaginary source
        n = len(cols)
        self._src_re = np.full(len(self.positions), n)
        self._src_im = np.full(len(self.positions), n)
        self._sign_im = np.zeros(len(self.positions))
        for c, entries in enumerate(cols):
            for q, val in entries:
                if val.imag if isinstance(val, complex) else False:
                    self._src_im[q], self._sign_im[q] = c, val.imag
                else:
                    self._src_re[q] = c
        self._re = np.array(re_rows)
        self._im = np.array(im_rows)
        self._partner = np.array([local[(p // dim) + dim * (p % dim)] for p in self.positions])

    def to_entries(self, x: np.ndarray) -> np.ndarray:
        """Complex vec entries (on ``positions``) of coordinates x; same as x @ T.T."""
        pad = np.concatenate([x, np.zeros(x.shape[:-1] + (1,))], axis=-1)
        return pad[..., self._src_re] + 1j * (pad[..., self._src_im] * self._sign_im)

    @property
    def size(self) -> int:
        return self.T.shape[1]

    def extract(self, v: np.ndarray) -> np.ndarray:
        """Coordinates of the Hermitian part of v (last axis over positions)."""
        v = (v + np.conj(v[..., self._partner])) / 2
        re = np.where(self._re >= 0, v[..., self._re].real, 0.0)
        im = np.where(self._im >= 0, v[..., self._im].imag, 0.0)
        return re + im

    def antihermitian(self, v: np.ndarray) -> np.ndarray:
        """Entrywise max of |rho - rho^+| over the positions of v."""
        return np.abs(v - np.conj(v[..., self._partner])).max(axis=-1)

    def real_map(self, Q: np.ndarray) -> tuple[np.ndarray, float]:
        """Real matrix of a Hermiticity-preserving map Q, and its worst leak.

        The leak is the largest anti-Hermitian entry Q produces from a unit
        coordinate vector; it bounds what each application discards.
        """
        QT = Q @ self.T
        leak = float(self.antihermitian(QT.T).max())
        return self.extract(QT.T).T, leak


class Propagator:
    """Fixed-step RK4 propagator for one (spec, placement, dt).

    The per-step map is precomputed once as a superoperator, so stepping
    costs one matrix-vector product per stored snapshot.  Initial states
    supported on the equal-parity sector are stepped inside that invariant
    sector only, in real Hermitian coordinates.
    """

    def __init__(self, spec: ChainSpec, noise: NoisePlacement, dt: float = DEFAULT_DT):
        self.spec = spec
        self.noise = noise
        self.dt = dt
        self.L = build_liouvillian(spec, noise)
        self.sector = parity_mask(spec.dim)
        s = self.sector
        self._sector_closed = not np.any(self.L[np.ix_(~s, s)])
        self._L_sector = self.L[np.ix_(s, s)]
        self._step = {}
        self._powers = {}
        self._coords = {}

    def step_matrix(self, restricted: bool = False) -> np.ndarray:
        if restricted not in self._step:
            self._step[restricted] = rk4_step_matrix(self._L_sector if restricted else self.L, self.dt)
        return self._step[restricted]

    @property
    def step(self) -> np.ndarray:
        return self.step_matrix(False)

    def power(self, k: int, restricted: bool = False) -> np.ndarray:
        key = (k, restricted)
        if key not in self._powers:
            self._powers[key] = np.linalg.matrix_power(self.step_matrix(restricted), k)
        return self._powers[key]

    def coordinates(self, restricted: bool) -> HermitianCoordinates:
        if restricted not in self._coords:
            mask = self.sector if restricted else np.ones_like(self.sector)
            self._coords[restricted] = HermitianCoordinates(self.spec.dim, mask)
        return self._coords[restricted]

    def _real_power(self, k, restricted):
        key = ("real", k, restricted)
        if key not in self._powers:
            self._powers[key] = self.coordinates(restricted).real_map(self.power(k, restricted))
        return self._powers[key]

    def _real_stack(self, stride, restricted, block=STEP_BLOCK):
        """Q, Q^2, ..., Q^block stacked row-wise, for block-wise stepping."""
        key = ("stack", stride, restricted, block)
        if key not in self._powers:
            Q, leak = self._real_power(stride, restricted)
            mats = [Q]
            for _ in range(block - 1):
                mats.append(Q @ mats[-1])
            self._powers[key] = (np.vstack(mats), leak)
        return self._powers[key]

    def restricts(self, rho) -> bool:
        return self._sector_closed and not np.any(vec(np.asarray(rho))[~self.sector])

    def partial_step(self, rho: np.ndarray, h: float) -> np.ndarray:
        """One RK4 step of arbitrary size h, applied to rho directly."""
        v = vec(np.asarray(rho, dtype=complex))
        out, term = v.copy(), v
        for k in range(1, 5):
            term = h * (self.L @ term) / k
            out = out + term
        return unvec(out)

    def run(self, rho0, n_steps, stride=1, t0=0.0, check=True, positivity_floor=0.0, method="real",
            restrict=True) -> Trajectory:
        """Store every ``stride``-th RK4 step (and the final one) from rho0.

        ``method="real"`` steps Hermitian coordinates, so stored states are
        Hermitian by construction; ``method="complex"`` steps the full complex
        vector and checks Hermiticity before re-Hermitizing.  ``restrict=False``
        steps all d^2 entries even when the parity sector would do.
        """
        if method not in ("real", "complex"):
            raise ValueError(f"unknown method {method!r}")
        # a diverging run overflows before the checks report it
        with np.errstate(over="ignore", invalid="ignore"):
            return self._run(rho0, n_steps, stride, t0, check, positivity_floor, method, restrict)

    def _run(self, rho0, n_steps, stride, t0, check, positivity_floor, method, restrict):
        rho0 = np.asarray(rho0, dtype=complex)
        restricted = restrict and self.restricts(rho0)
        n_store = n_steps // stride
        rem = n_steps - n_store * stride
        times = t0 + self.dt * stride * np.arange(n_store + 1)
        if rem:
            times = np.append(times, t0 + self.dt * n_steps)
        coords = self.coordinates(restricted)
        v0 = vec(rho0)[coords.positions]
        if method == "real":
            stack, leak = self._real_stack(stride, restricted)
            x = coords.extract(v0)
            nb, m = stack.shape[0] // x.shape[0], x.shape[0]
            out = np.empty((len(times), m))
            out[0] = x
            i = 0
            while i < n_store:
                take = min(nb, n_store - i)
                out[i + 1 : i + 1 + take] = (stack[: take * m] @ x).reshape(take, m)
                i += take
                x = out[i]
            if rem:
                R, leak_r = self._real_power(rem, restricted)
                out[-1] = R @ x
                leak = max(leak, leak_r)
            sub = coords.to_entries(out)
            herm_bound = leak * np.abs(out).sum(axis=1).max()
            if check and herm_bound > HERMITIAN_TOL:
                raise IntegrationDiverged("hermiticity deviation", float(times[-1]))
        else:
            Q = self.power(stride, restricted)
            v = v0
            sub = np.empty((len(times), v.shape[0]), dtype=complex)
            sub[0] = v
            for i in range(1, n_store + 1):
                v = Q @ v
                sub[i] = v
            if rem:
                sub[-1] = self.power(rem, restricted) @ v
        traj = Trajectory(times, entries=sub, positions=coords.positions, dim=self.spec.dim)
        if check:
            check_trajectory(traj, positivity_floor=positivity_floor, hermitian_exact=method == "real")
        if method == "complex":
            traj = Trajectory(times, (traj.states + np.conj(traj.states.transpose(0, 2, 1))) / 2)
        return traj


def evolve(rho0: np.ndarray, params: EvolutionParams, check: bool = True) -> Trajectory:
    """Integrate the master equation from rho0 with fixed-step RK4."""
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (params.spec.dim, params.spec.dim):
        raise ValueError(f"rho0 has shape {rho0.shape}, expected {(params.spec.dim,) * 2}")
    prop = cached_propagator(params.spec, params.noise, params.dt)
    return prop.run(rho0, params.n_steps, params.store_stride, check=check, positivity_floor=positivity_floor(rho0))


def positivity_floor(rho0) -> float:
    """Lower bound on the min eigenvalue along the flow of a positive map.

    Zero for a physical rho0.  For a non-PSD rho0 = P - N the trace-norm
    contraction bounds every later eigenvalue below by -tr(N).
    """
    ev = np.linalg.eigvalsh(rho0)
    return float(ev[ev < 0].sum())


@lru_cache(maxsize=8)
def cached_propagator(spec: ChainSpec, noise: NoisePlacement, dt: float) -> Propagator:
    return Propagator(spec, noise, dt)
