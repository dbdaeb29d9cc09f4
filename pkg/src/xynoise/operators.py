"""Spin operators, the XY chain Hamiltonian and the classical-noise coupling.

Basis convention: qubit 1 is the most significant tensor factor and the
single-qubit order is (|e>, |g>).  Index 0 is |e...e>, index 2**N - 1 is
|g...g>.  S^z|e> = +|e>/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
# S^- = S^x - i S^y maps |e> (index 0) to |g> (index 1)
SMINUS = np.array([[0, 0], [1, 0]], dtype=complex)
SPLUS = SMINUS.T.copy()

_AXES = {"x": SX, "y": SY, "z": SZ}


@dataclass(frozen=True)
class ChainSpec:
    """Static parameters of an N-qubit XY chain in a common thermal bath.

    ``double_two_qubit_bond`` counts the 1-2 bond twice for N=2 (literal
    periodic closure); the default counts it once.
    """

    n_qubits: int = 3
    j_x: float = 0.3
    j_y: float = 0.1
    omega0: float = 4.0
    gamma: float = 0.01
    nbar: float = 0.0
    periodic: bool = True
    double_two_qubit_bond: bool = False

    def __post_init__(self):
        if self.n_qubits not in (2, 3, 4):
            raise ValueError(f"n_qubits must be 2, 3 or 4, got {self.n_qubits}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.nbar < 0:
            raise ValueError(f"nbar must be >= 0, got {self.nbar}")

    @property
    def J(self) -> float:
        return (self.j_x + self.j_y) / 2

    @property
    def delta(self) -> float:
        return (self.j_x - self.j_y) / 2

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @classmethod
    def from_j_delta(cls, n_qubits, J=0.2, delta=0.1, **kwargs) -> "ChainSpec":
        return cls(n_qubits=n_qubits, j_x=J + delta, j_y=J - delta, **kwargs)

    def replace(self, **changes) -> "ChainSpec":
        from dataclasses import replace

        return replace(self, **changes)

    def bonds(self) -> list[tuple[int, int]]:
        """Distinct nearest-neighbour bonds as 1-based qubit pairs."""
        n = self.n_qubits
        pairs = [(k, k + 1) for k in range(1, n)]
        if self.periodic and n > 2:
            pairs.append((n, 1))
        if n == 2 and self.periodic and self.double_two_qubit_bond:
            pairs.append((2, 1))
        return pairs


NOISE_MODELS = ("collective", "independent")


@dataclass(frozen=True)
class NoisePlacement:
    """Qubits whose S^z is driven by the classical noise, with strength M.

    ``collective``: one noise source coupled to V = sum of S^z_q, giving
    -M [V, [V, rho]].  ``independent``: one uncorrelated source per qubit,
    giving -M sum_q [S^z_q, [S^z_q, rho]].  The two agree for one qubit.
    """

    qubits: frozenset[int] = field(default_factory=frozenset)
    strength: float = 0.0
    model: str = "collective"

    def __post_init__(self):
        object.__setattr__(self, "qubits", frozenset(int(q) for q in self.qubits))
        if self.strength < 0:
            raise ValueError(f"noise strength must be >= 0, got {self.strength}")
        if any(q < 1 for q in self.qubits):
            raise ValueError(f"qubit indices are 1-based, got {sorted(self.qubits)}")
        if self.model not in NOISE_MODELS:
            raise ValueError(f"noise model must be one of {NOISE_MODELS}, got {self.model!r}")

    @classmethod
    def parse(cls, label: str, strength: float = 0.0, model: str = "collective") -> "NoisePlacement":
        """Build from labels like ``"M34"``, ``"34"``, ``"3,4"`` or ``""``."""
        s = label.strip().upper().lstrip("M").replace(",", "").replace(" ", "")
        return cls(frozenset(int(c) for c in s), strength, model)

    @property
    def label(self) -> str:
        return "M" + "".join(str(q) for q in sorted(self.qubits))

    def with_strength(self, strength: float) -> "NoisePlacement":
        return NoisePlacement(self.qubits, strength, self.model)

    def validate(self, n_qubits: int):
        bad = [q for q in self.qubits if q > n_qubits]
        if bad:
            raise ValueError(f"placement qubits {bad} out of range for n_qubits={n_qubits}")


def _check_index(qubit, n_qubits):
    if not 1 <= qubit <= n_qubits:
        raise ValueError(f"qubit index {qubit} out of range 1..{n_qubits}")


def embed(op: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """I x ... x op x ... x I with ``op`` at the 1-based position ``qubit``."""
    _check_index(qubit, n_qubits)
    factors = [np.eye(2, dtype=complex)] * n_qubits
    factors[qubit - 1] = op
    return reduce(np.kron, factors)


def spin_operator(qubit: int, axis: str, n_qubits: int) -> np.ndarray:
    try:
        single = _AXES[axis]
    except KeyError:
        raise ValueError(f"axis must be one of x, y, z; got {axis!r}") from None
    return embed(single, qubit, n_qubits)


def lowering_operator(qubit: int, n_qubits: int) -> np.ndarray:
    return embed(SMINUS, qubit, n_qubits)


def raising_operator(qubit: int, n_qubits: int) -> np.ndarray:
    return embed(SPLUS, qubit, n_qubits)


def build_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """H0 = sum_bonds (Jx Sx Sx + Jy Sy Sy) + omega0 sum_n Sz_n."""
    n = spec.n_qubits
    sx = [spin_operator(k, "x", n) for k in range(1, n + 1)]
    sy = [spin_operator(k, "y", n) for k in range(1, n + 1)]
    sz = [spin_operator(k, "z", n) for k in range(1, n + 1)]
    H = spec.omega0 * sum(sz)
    for a, b in spec.bonds():
        H = H + spec.j_x * sx[a - 1] @ sx[b - 1] + spec.j_y * sy[a - 1] @ sy[b - 1]
    return H


def noise_operator(placement: NoisePlacement, n_qubits: int) -> np.ndarray:
    """V = sum of S^z over the noisy qubits (zero matrix for an empty set)."""
    placement.validate(n_qubits)
    V = np.zeros((2**n_qubits, 2**n_qubits), dtype=complex)
    for q in sorted(placement.qubits):
        V += spin_operator(q, "z", n_qubits)
    return V


def noise_operators(placement: NoisePlacement, n_qubits: int) -> list[np.ndarray]:
    """Operators entering the double commutators: [V] or one S^z per qubit."""
    if placement.model == "collective" or len(placement.qubits) < 2:
        return [noise_operator(placement, n_qubits)]
    placement.validate(n_qubits)
    return [spin_operator(q, "z", n_qubits) for q in sorted(placement.qubits)]


def closed_form_spectrum(n_qubits: int, J: float, delta: float, omega: float) -> np.ndarray:
    """Sorted analytic eigenvalues of H0 for the periodic 3- and 4-qubit chains."""
    if n_qubits == 3:
        r1 = np.sqrt((J - 2 * omega) ** 2 + 3 * delta**2)
        r2 = np.sqrt((J + 2 * omega) ** 2 + 3 * delta**2)
        vals = [
            (J + omega + r1) / 2,
            (J + omega - r1) / 2,
            (J - omega + r2) / 2,
            (J - omega - r2) / 2,
        ]
        vals += [(-J + omega) / 2] * 2 + [(-J - omega) / 2] * 2
    elif n_qubits == 4:
        inner = np.sqrt(delta**4 + (4 * omega**2 + 2 * J**2) * delta**2 + (J**2 - 2 * omega**2) ** 2)
        base = J**2 + delta**2 + 2 * omega**2
        a = np.sqrt(base + inner)
        # sqrt(base - inner) without cancellation, using (base + inner)(base - inner) = 8 J^2 omega^2
        b = 2 * np.sqrt(2) * abs(J * omega) / a if a > 0 else 0.0
        s = np.sqrt(omega**2 + delta**2)
        vals = [a, -a, b, -b, -J + s, -J - s, J + s, J - s]
        vals += [omega] * 2 + [-omega] * 2 + [0.0] * 4
    else:
        raise ValueError("closed forms exist only for n_qubits in (3, 4)")
    return np.sort(np.array(vals, dtype=float))
