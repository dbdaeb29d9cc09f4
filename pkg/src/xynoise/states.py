"""Initial preparations and partial traces.

Table preparations are lists of 1-based ``(row, col, value)`` entries with
``value`` an exact rational; Hermitian partners must be listed explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

PSD_TOL = 1e-12


class InvalidPreparation(ValueError):
    pass


@dataclass(frozen=True)
class Preparation:
    n_qubits: int
    kind: str  # "product" | "table" | "w_state" | "w_state_dephased"
    labels: str = ""
    entries: tuple = field(default=())
    description: str = ""

    @property
    def is_product(self) -> bool:
        return self.kind == "product"


def basis_index(labels: str) -> int:
    """Index of the ket |labels> with 'e' -> 0 and qubit 1 most significant."""
    idx = 0
    for ch in labels:
        if ch not in "eg":
            raise ValueError(f"product labels must be 'e' or 'g', got {labels!r}")
        idx = 2 * idx + (ch == "g")
    return idx


def product_state(labels: str) -> np.ndarray:
    d = 2 ** len(labels)
    rho = np.zeros((d, d), dtype=complex)
    i = basis_index(labels)
    rho[i, i] = 1
    return rho


def w_state() -> np.ndarray:
    psi = np.zeros(8, dtype=complex)
    psi[[basis_index("eeg"), basis_index("ege"), basis_index("gee")]] = 1 / np.sqrt(3)
    return np.outer(psi, psi.conj())


def w_state_dephased() -> np.ndarray:
    """W state with the (2,3)/(3,2) coherences (1-based) removed."""
    rho = w_state()
    rho[1, 2] = rho[2, 1] = 0
    return rho


def validate_table(n_qubits, entries):
    """Check a table preparation; returns the list of violated checks."""
    d = 2**n_qubits
    problems = []
    lookup = {}
    for r, c, v in entries:
        if not (1 <= r <= d and 1 <= c <= d):
            problems.append(f"entry ({r},{c}) outside 1..{d}")
            continue
        lookup[(r, c)] = complex(v)
    for (r, c), v in lookup.items():
        if r == c:
            if v.imag != 0 or v.real < 0:
                problems.append(f"diagonal entry ({r},{r}) must be real and >= 0")
        elif (c, r) not in lookup or lookup[(c, r)] != v.conjugate():
            problems.append(f"missing Hermitian partner for ({r},{c})")
    trace = sum(v for (r, c, v) in entries if r == c)
    if trace != 1:
        problems.append(f"trace is {trace}, expected 1")
    if not problems:
        rho = _table_matrix(n_qubits, entries)
        lo = np.linalg.eigvalsh(rho)[0]
        if lo < -PSD_TOL:
            problems.append(f"not positive semidefinite (min eigenvalue {lo:.3g})")
    return problems


def _table_matrix(n_qubits, entries):
    d = 2**n_qubits
    rho = np.zeros((d, d), dtype=complex)
    for r, c, v in entries:
        rho[r - 1, c - 1] = complex(v)
    return rho


def make_preparation(p: Preparation) -> np.ndarray:
    if p.kind == "product":
        if len(p.labels) != p.n_qubits:
            raise InvalidPreparation(f"labels {p.labels!r} do not match n_qubits={p.n_qubits}")
        return product_state(p.labels)
    if p.kind == "w_state":
        return w_state()
    if p.kind == "w_state_dephased":
        return w_state_dephased()
    if p.kind == "table":
        problems = validate_table(p.n_qubits, p.entries)
        if problems:
            raise InvalidPreparation("; ".join(problems))
        return _table_matrix(p.n_qubits, p.entries)
    raise InvalidPreparation(f"unknown preparation kind {p.kind!r}")


def partial_trace(rho: np.ndarray, keep=(1, 2)) -> np.ndarray:
    """Reduce rho (or a stack of them) to the 1-based qubits in ``keep``."""
    rho = np.asarray(rho)
    d = rho.shape[-1]
    n = int(round(np.log2(d)))
    keep = sorted(set(keep))
    if not keep or any(not 1 <= q <= n for q in keep):
        raise ValueError(f"keep={keep} invalid for {n} qubits")
    lead = rho.shape[:-2]
    t = rho.reshape(lead + (2,) * (2 * n))
    nl = len(lead)
    traced = [q for q in range(1, n + 1) if q not in keep]
    # trace out from the highest qubit down so axis numbers stay valid
    cur_n = n
    for q in sorted(traced, reverse=True):
        t = np.trace(t, axis1=nl + q - 1, axis2=nl + cur_n + q - 1)
        cur_n -= 1
    dk = 2 ** len(keep)
    return t.reshape(lead + (dk, dk))


# --- Appendix-table catalogue ---------------------------------------------

F = Fraction


def _block(pairs):
    """Entries for a list of (i, j, value): diagonal i,j plus coherence (i,j)."""
    entries = []
    for i, j, v in pairs:
        if v == 0:
            continue
        entries += [(i, i, v), (j, j, v), (i, j, v), (j, i, v)]
    return tuple(entries)


def _phi3(a, b):
    return _block([(1, 7, a), (2, 8, b)])


def _psi3(a, b):
    return _block([(3, 5, a), (4, 6, b)])


def _phi4(ws):
    return _block([(1 + k, 13 + k, w) for k, w in enumerate(ws)])


def _psi4(ws):
    return _block([(5 + k, 9 + k, w) for k, w in enumerate(ws)])


_PHI3_ROWS = [(F(1, 4), F(1, 4)), (F(0), F(1, 2)), (F(2, 5), F(1, 10)), (F(1, 10), F(2, 5)), (F(1, 2), F(0))]
_PSI3_ROWS = [(F(1, 4), F(1, 4)), (F(0), F(1, 2)), (F(1, 2), F(0)), (F(2, 5), F(1, 10)), (F(1, 10), F(2, 5))]
_PHI4_ROWS = [
    (F(1, 8),) * 4,
    (F(1, 2), 0, 0, 0),
    (0, F(1, 2), 0, 0),
    (0, 0, F(1, 4), F(1, 4)),
    (F(1, 4), F(1, 4), 0, 0),
    (0, 0, 0, F(1, 2)),
    (F(1, 16), F(1, 16), F(3, 16), F(3, 16)),
]
_PSI4_ROWS = [
    (F(1, 8),) * 4,
    (F(3, 16), F(3, 16), F(1, 16), F(1, 16)),
    (F(1, 16), F(1, 16), F(3, 16), F(3, 16)),
    (F(1, 2), 0, 0, 0),
    (0, F(1, 2), 0, 0),
    (0, 0, F(1, 2), 0),
    (0, 0, 0, F(1, 2)),
]


def _labels(n):
    return ["".join("eg"[(i >> (n - 1 - k)) & 1] for k in range(n)) for i in range(2**n)]


def _build_catalog():
    cat = {}
    for n in (2, 3, 4):
        for lab in _labels(n):
            cat[lab] = Preparation(n, "product", labels=lab, description=f"|{lab}>")
    half = F(1, 2)
    cat["phi_plus_2q"] = Preparation(2, "table", entries=_block([(1, 4, half)]), description="|Phi+>")
    cat["psi_plus_2q"] = Preparation(2, "table", entries=_block([(2, 3, half)]), description="|Psi+>")
    for k, (a, b) in enumerate(_PHI3_ROWS, 1):
        cat[f"phi_plus_3q_prep{k}"] = Preparation(3, "table", entries=_phi3(a, b), description=f"|Phi+> 3q row {k}")
    for k, (a, b) in enumerate(_PSI3_ROWS, 1):
        cat[f"psi_plus_3q_prep{k}"] = Preparation(3, "table", entries=_psi3(a, b), description=f"|Psi+> 3q row {k}")
    for k, ws in enumerate(_PHI4_ROWS, 1):
        cat[f"phi_plus_4q_prep{k}"] = Preparation(4, "table", entries=_phi4(ws), description=f"|Phi+> 4q row {k}")
    for k, ws in enumerate(_PSI4_ROWS, 1):
        cat[f"psi_plus_4q_prep{k}"] = Preparation(4, "table", entries=_psi4(ws), description=f"|Psi+> 4q row {k}")
    for name in ("phi_plus_3q", "psi_plus_3q", "phi_plus_4q", "psi_plus_4q"):
        cat[name + "_balanced"] = cat[name + "_prep1"]
    cat["w_state"] = Preparation(3, "w_state", description="W state")
    cat["w_state_dephased"] = Preparation(3, "w_state_dephased", description="W state without rho_23, rho_32")
    return cat


CATALOG: dict[str, Preparation] = _build_catalog()


def get_preparation(key: str) -> Preparation:
    try:
        return CATALOG[key]
    except KeyError:
        raise KeyError(f"unknown preparation {key!r}") from None


def register_preparation(key: str, prep: Preparation) -> str:
    """Add a custom preparation to the catalog (validated first)."""
    make_preparation(prep)
    existing = CATALOG.get(key)
    if existing is not None and existing != prep:
        raise KeyError(f"preparation {key!r} already registered")
    CATALOG[key] = prep
    return key


def initial_state(key_or_prep) -> np.ndarray:
    p = get_preparation(key_or_prep) if isinstance(key_or_prep, str) else key_or_prep
    return make_preparation(p)


def load_table_file(path, n_qubits: int) -> Preparation:
    """Read ``row col re im`` lines (1-based, '#' comments, commas allowed).

    Real parts and imaginary parts may be written as fractions like ``3/16``.
    """
    entries = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].replace(",", " ").strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (3, 4):
            raise InvalidPreparation(f"{path}:{lineno}: expected 'row col re [im]'")
        r, c = int(parts[0]), int(parts[1])
        re_ = F(parts[2])
        im = F(parts[3]) if len(parts) == 4 else F(0)
        entries.append((r, c, re_ if im == 0 else complex(re_, im)))
    p = Preparation(n_qubits, "table", entries=tuple(entries), description=str(path))
    make_preparation(p)
    return p
