import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xynoise.operators import (
    ChainSpec,
    NoisePlacement,
    build_hamiltonian,
    closed_form_spectrum,
    lowering_operator,
    noise_operator,
    raising_operator,
    spin_operator,
)


def bit(i, qubit, n):
    """0 for |e>, 1 for |g> on ``qubit`` (1-based, qubit 1 most significant)."""
    return (i >> (n - qubit)) & 1


def brute_hamiltonian(n, jx, jy, omega0, bonds):
    """Index-loop construction: Jx SxSx + Jy SySy = (J/2)(flip-flop) + (Delta/2)(double flip)."""
    d = 2**n
    J, delta = (jx + jy) / 2, (jx - jy) / 2
    H = np.zeros((d, d))
    for i in range(d):
        H[i, i] = omega0 * sum(0.5 - bit(i, q, n) for q in range(1, n + 1))
        for a, b in bonds:
            j = i ^ (1 << (n - a)) ^ (1 << (n - b))
            H[j, i] += (J if bit(i, a, n) != bit(i, b, n) else delta) / 2
    return H


def test_single_qubit_z():
    assert np.allclose(spin_operator(1, "z", 1), np.diag([0.5, -0.5]))


def test_su2_commutator():
    sx, sy, sz = (spin_operator(1, a, 1) for a in "xyz")
    assert np.allclose(sx @ sy - sy @ sx, 1j * sz)


def test_embedded_z_matches_kronecker():
    expected = np.kron(np.kron(np.eye(2), np.diag([0.5, -0.5])), np.eye(2))
    assert np.allclose(spin_operator(2, "z", 3), expected)
    assert np.allclose(np.diag(spin_operator(2, "z", 3)).real, [0.5, 0.5, -0.5, -0.5, 0.5, 0.5, -0.5, -0.5])


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_spin_operators_traceless_hermitian_half_spectrum(n):
    for q, axis in itertools.product(range(1, n + 1), "xyz"):
        S = spin_operator(q, axis, n)
        assert np.allclose(S, S.conj().T)
        assert abs(np.trace(S)) < 1e-12
        ev = np.linalg.eigvalsh(S)
        assert np.allclose(ev, [-0.5] * 2 ** (n - 1) + [0.5] * 2 ** (n - 1))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_different_sites_commute(n):
    ops = {(q, a): spin_operator(q, a, n) for q in range(1, n + 1) for a in "xyz"}
    for (q1, a1), (q2, a2) in itertools.product(ops, ops):
        if q1 != q2:
            A, B = ops[q1, a1], ops[q2, a2]
            assert np.abs(A @ B - B @ A).max() < 1e-14


def test_index_out_of_range():
    with pytest.raises(ValueError):
        spin_operator(4, "z", 3)
    with pytest.raises(ValueError):
        spin_operator(0, "x", 2)
    with pytest.raises(ValueError):
        spin_operator(1, "w", 2)
    with pytest.raises(ValueError):
        lowering_operator(3, 2)


def test_lowering_single_qubit():
    e, g = np.array([1, 0]), np.array([0, 1])
    Sm = lowering_operator(1, 1)
    assert np.allclose(Sm @ e, g)
    assert np.allclose(Sm @ g, 0)


def test_lowering_two_qubit_explicit():
    # S^-_2 on (ee, eg, ge, gg): ee -> eg, ge -> gg, the rest vanish
    expected = np.zeros((4, 4))
    expected[1, 0] = expected[3, 2] = 1
    assert np.allclose(lowering_operator(2, 2), expected)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_lowering_nilpotent_and_raising_adjoint(n):
    for q in range(1, n + 1):
        Sm = lowering_operator(q, n)
        assert np.allclose(Sm @ Sm, 0)
        assert np.allclose(raising_operator(q, n), Sm.conj().T)
        assert np.allclose(Sm, spin_operator(q, "x", n) - 1j * spin_operator(q, "y", n))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_hamiltonian_matches_index_oracle(n, rng):
    for _ in range(5):
        jx, jy, w = rng.uniform(-1, 1, size=3)
        spec = ChainSpec(n, jx, jy, omega0=w)
        H = build_hamiltonian(spec)
        assert np.allclose(H, H.conj().T, atol=1e-12)
        assert np.allclose(H, brute_hamiltonian(n, jx, jy, w, spec.bonds()), atol=1e-12)


def spectrum_3(J, D, w):
    r1 = np.sqrt((J - 2 * w) ** 2 + 3 * D**2)
    r2 = np.sqrt((J + 2 * w) ** 2 + 3 * D**2)
    vals = [(J + w + r1) / 2, (J + w - r1) / 2, (J - w + r2) / 2, (J - w - r2) / 2]
    vals += [(-J + w) / 2] * 2 + [(-J - w) / 2] * 2
    return np.sort(vals)


def test_three_qubit_spectrum_paper_parameters():
    spec = ChainSpec.from_j_delta(3, 0.2, 0.1, omega0=4.0)
    ev = np.linalg.eigvalsh(build_hamiltonian(spec))
    assert np.allclose(ev, spectrum_3(0.2, 0.1, 4.0), atol=1e-9)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-5, 5))
def test_closed_form_spectra_random(J, D, w):
    for n in (3, 4):
        spec = ChainSpec.from_j_delta(n, J, D, omega0=w)
        ev = np.linalg.eigvalsh(build_hamiltonian(spec))
        assert np.allclose(ev, np.sort(closed_form_spectrum(n, J, D, w)), atol=1e-9)
    assert np.allclose(np.sort(closed_form_spectrum(3, J, D, w)), spectrum_3(J, D, w), atol=1e-12)


def test_four_qubit_degeneracies():
    w = 4.0
    ev = np.linalg.eigvalsh(build_hamiltonian(ChainSpec.from_j_delta(4, 0.2, 0.1, omega0=w)))
    assert np.sum(np.abs(ev) < 1e-9) == 4
    assert np.sum(np.abs(ev - w) < 1e-9) == 2
    assert np.sum(np.abs(ev + w) < 1e-9) == 2


@pytest.mark.parametrize("n", [2, 3, 4])
def test_non_interacting_limit(n):
    w = 1.7
    ev = np.linalg.eigvalsh(build_hamiltonian(ChainSpec(n, 0.0, 0.0, omega0=w)))
    expected = sorted(w * sum(0.5 - bit(i, q, n) for q in range(1, n + 1)) for i in range(2**n))
    assert np.allclose(ev, expected)


def test_two_qubit_bond_counted_once_unless_flagged():
    single = ChainSpec(2, 0.3, 0.1, omega0=0.0)
    double = single.replace(double_two_qubit_bond=True)
    assert single.bonds() == [(1, 2)]
    assert np.allclose(build_hamiltonian(double), 2 * build_hamiltonian(single))


def test_bonds_periodic_and_open():
    assert ChainSpec(4, 1, 1).bonds() == [(1, 2), (2, 3), (3, 4), (4, 1)]
    assert ChainSpec(4, 1, 1, periodic=False).bonds() == [(1, 2), (2, 3), (3, 4)]


def test_chainspec_derived_and_validation():
    s = ChainSpec.from_j_delta(3, 0.2, 0.1)
    assert np.isclose(s.j_x, 0.3) and np.isclose(s.j_y, 0.1)
    assert np.isclose(s.J, 0.2) and np.isclose(s.delta, 0.1)
    for bad in (dict(n_qubits=5), dict(gamma=-1.0), dict(nbar=-0.1)):
        with pytest.raises(ValueError):
            ChainSpec(**{"n_qubits": 3, "j_x": 0.3, "j_y": 0.1, **bad})


def test_noise_operator_examples():
    assert np.allclose(noise_operator(NoisePlacement({3}, 1.0), 3), spin_operator(3, "z", 3))
    assert np.allclose(noise_operator(NoisePlacement({3, 4}), 4), spin_operator(3, "z", 4) + spin_operator(4, "z", 4))
    assert np.allclose(noise_operator(NoisePlacement(), 3), 0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_noise_operator_commutes_with_total_sz(n):
    total = sum(spin_operator(q, "z", n) for q in range(1, n + 1))
    for k in range(1, n + 1):
        for qubits in itertools.combinations(range(1, n + 1), k):
            V = noise_operator(NoisePlacement(frozenset(qubits)), n)
            assert np.allclose(V, np.diag(np.diag(V)))
            assert np.allclose(V @ total, total @ V)


def test_noise_placement_parse_and_validate():
    p = NoisePlacement.parse("M34", 0.5)
    assert p.qubits == frozenset({3, 4}) and p.strength == 0.5 and p.label == "M34"
    assert NoisePlacement.parse("3,4") == NoisePlacement.parse("34")
    assert NoisePlacement.parse("").qubits == frozenset()
    with pytest.raises(ValueError):
        NoisePlacement({5}).validate(4)
    with pytest.raises(ValueError):
        NoisePlacement({1}, -0.1)
    with pytest.raises(ValueError):
        noise_operator(NoisePlacement({5}), 4)
