"""Operator algebra, indexing, and coherent-state checks.

Where a value can be derived independently (explicit-loop matrix builds,
closed-form coherent overlaps) the test carries its own oracle instead of
trusting the module under test.
"""
import math

import numpy as np
import pytest

from uscmem import (
    HilbertDims,
    State,
    TruncationError,
    annihilation_op,
    basis_state,
    coherent_state,
    coherent_truncation_weight,
    creation_op,
    fock_annihilation,
    identity_op,
    infer_two_mode_fock,
    join_cells,
    normalized,
    number_op,
    pauli_op,
    product_state,
    tensor,
    two_mode_index,
    two_mode_vacuum,
)


# --------------------------------------------------------------------------
# ladder operators
# --------------------------------------------------------------------------

def test_fock_annihilation_elements():
    n_fock = 7
    a = fock_annihilation(n_fock)
    # oracle: a|n> = sqrt(n)|n-1>, built entry by entry
    expected = np.zeros((n_fock, n_fock))
    for n in range(1, n_fock):
        expected[n - 1, n] = math.sqrt(n)
    assert np.array_equal(a, expected)


def test_truncated_commutator_has_corner_defect():
    # On a 4-level truncation, [a, a+] = diag(1, 1, 1, -3): the top level
    # cannot be raised, so the canonical commutator fails only there.
    a = fock_annihilation(4)
    comm = a @ a.conj().T - a.conj().T @ a
    assert np.allclose(comm, np.diag([1.0, 1.0, 1.0, -3.0]), atol=1e-14)


def test_number_operator_matches_ladder_product():
    dims = HilbertDims(n_fock=6)
    a = annihilation_op(dims)
    adag = creation_op(dims)
    assert np.allclose(adag @ a, number_op(dims), atol=1e-13)
    assert np.allclose(adag, a.conj().T, atol=0)


# --------------------------------------------------------------------------
# qubit operators
# --------------------------------------------------------------------------

def test_pauli_algebra():
    dims = HilbertDims(n_fock=3)
    sx = pauli_op("x", dims)
    sy = pauli_op("y", dims)
    sz = pauli_op("z", dims)
    eye = identity_op(dims)
    assert np.allclose(sx @ sy, 1j * sz, atol=1e-14)
    for s in (sx, sy, sz):
        assert np.allclose(s @ s, eye, atol=1e-14)
    assert np.allclose(sx @ sz + sz @ sx, 0.0, atol=1e-14)


def test_pauli_sign_convention():
    # |g> is qubit index 0 and carries sigma_z eigenvalue -1.
    dims = HilbertDims(n_fock=2)
    sz = pauli_op("z", dims)
    sx = pauli_op("x", dims)
    g0 = basis_state(dims, 0, 0).amplitudes
    e0 = basis_state(dims, 1, 0).amplitudes
    assert np.allclose(sz @ g0, -g0)
    assert np.allclose(sz @ e0, e0)
    # sigma_x flips the qubit and leaves the photon index alone
    assert np.allclose(sx @ g0, e0)


def test_pauli_commutes_with_number():
    dims = HilbertDims(n_fock=5)
    n_op = number_op(dims)
    for axis in "xyz":
        s = pauli_op(axis, dims)
        assert np.abs(s @ n_op - n_op @ s).max() < 1e-13


def test_pauli_rejects_unknown_axis():
    with pytest.raises(ValueError):
        pauli_op("w", HilbertDims(n_fock=2))


# --------------------------------------------------------------------------
# tensor products
# --------------------------------------------------------------------------

def _kron_oracle(a, b):
    """Explicit-loop Kronecker product."""
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=np.complex128)
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def test_tensor_matches_loop_oracle():
    assert np.array_equal(tensor(np.eye(2), np.eye(3)), np.eye(6))
    rng = np.random.default_rng(7)
    for _ in range(5):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        assert np.allclose(tensor(a, b), _kron_oracle(a, b), atol=1e-14)


def test_tensor_mixed_product_rule():
    rng = np.random.default_rng(11)
    a, c = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(2))
    b, d = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(2))
    lhs = tensor(a, b) @ tensor(c, d)
    rhs = tensor(a @ c, b @ d)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_tensor_dimension_cap():
    big = np.eye(200)
    with pytest.raises(ValueError, match="exceeds cap"):
        tensor(big, big)
    # explicit cap override is honored
    a = np.eye(64)
    out = tensor(a, a, max_dim=64 * 64)
    assert out.shape == (4096, 4096)


# --------------------------------------------------------------------------
# states and indexing
# --------------------------------------------------------------------------

def test_index_layout_is_qubit_major():
    dims = HilbertDims(n_fock=5)
    assert dims.cell_dim == 10
    assert dims.index(0, 3) == 3
    assert dims.index(1, 0) == 5
    assert dims.index(1, 4) == 9
    with pytest.raises(ValueError):
        dims.index(0, 5)
    with pytest.raises(ValueError):
        dims.index(2, 0)


def test_state_rejects_unnormalized_amplitudes():
    dims = HilbertDims(n_fock=3)
    amps = np.zeros(dims.total_dim, dtype=complex)
    amps[0] = 0.5
    with pytest.raises(ValueError):
        State(dims, amps)
    fixed = normalized(dims, amps)
    assert abs(fixed.norm - 1.0) < 1e-15


def test_overlap_conjugation_order():
    dims = HilbertDims(n_fock=2)
    psi = normalized(dims, np.array([1.0, 1j, 0.0, 0.0]))
    phi = basis_state(dims, 0, 1)
    # <phi|psi> picks out psi's second amplitude
    assert abs(phi.overlap(psi) - 1j / math.sqrt(2)) < 1e-15
    assert abs(psi.overlap(phi) - (-1j) / math.sqrt(2)) < 1e-15


def test_product_state_layout():
    dims = HilbertDims(n_fock=3)
    qubit = np.array([0.0, 1.0])          # |e>
    fock = np.array([0.0, 0.0, 1.0])      # |2>
    psi = product_state(dims, qubit, fock)
    expected = np.zeros(6)
    expected[dims.index(1, 2)] = 1.0
    assert np.allclose(psi.amplitudes, expected)


def test_join_cells_index_order():
    dims = HilbertDims(n_fock=2)
    left = basis_state(dims, 1, 0)    # |e,0>
    right = basis_state(dims, 0, 1)   # |g,1>
    joint = join_cells(left, right)
    assert joint.dims.n_cells == 2
    # cell 1 is the slow index: I = i1 * cell_dim + i2
    i = dims.index(1, 0) * dims.cell_dim + dims.index(0, 1)
    expected = np.zeros(16)
    expected[i] = 1.0
    assert np.allclose(joint.amplitudes, expected)


# --------------------------------------------------------------------------
# coherent states
# --------------------------------------------------------------------------

def test_coherent_vacuum_amplitude():
    alpha = 0.9
    amps = coherent_state(alpha, 30)
    # c_0 = exp(-|alpha|^2 / 2) in the untruncated state
    assert abs(amps[0] - math.exp(-(alpha ** 2) / 2)) < 1e-10
    assert abs(np.linalg.norm(amps) - 1.0) < 1e-14
    # at alpha = 1 that amplitude is e^{-1/2}
    assert abs(coherent_state(1.0, 20)[0] - 0.60653066) < 1e-7


def test_coherent_mean_photon_number():
    amps = coherent_state(1.0, 30)
    assert abs(float(np.sum(np.arange(30) * np.abs(amps) ** 2)) - 1.0) < 1e-8
    rng = np.random.default_rng(3)
    n = np.arange(40)
    for _ in range(6):
        alpha = rng.uniform(0.1, 1.5) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        amps = coherent_state(alpha, 40)
        mean_n = float(np.sum(n * np.abs(amps) ** 2))
        assert abs(mean_n - abs(alpha) ** 2) < 1e-8


def test_opposite_coherent_overlap():
    # <alpha|-alpha> = exp(-2 |alpha|^2)
    for alpha in (0.5, 0.8, 1.2):
        plus = coherent_state(alpha, 40)
        minus = coherent_state(-alpha, 40)
        got = np.vdot(plus, minus)
        assert abs(got - math.exp(-2 * alpha ** 2)) < 1e-7


def test_coherent_zero_is_vacuum():
    amps = coherent_state(0.0, 8)
    expected = np.zeros(8)
    expected[0] = 1.0
    assert np.array_equal(amps, expected)


def test_coherent_truncation_guards():
    # |alpha|^2 > n_fock / 4 is rejected outright
    with pytest.raises(TruncationError, match="n_fock/4"):
        coherent_state(2.0, 8)
    # within the quarter rule but with too much discarded weight
    assert coherent_truncation_weight(1.4, 8) > 1e-8
    with pytest.raises(TruncationError, match="discarded"):
        coherent_state(1.4, 8)
    # a comfortable truncation passes
    coherent_state(1.0, 30)


def test_truncation_weight_poisson_oracle():
    # independent route: sum the Poisson tail directly
    alpha, n_fock = 1.1, 12
    lam = alpha ** 2
    tail = sum(
        math.exp(-lam) * lam ** n / math.factorial(n) for n in range(n_fock, 80)
    )
    assert abs(coherent_truncation_weight(alpha, n_fock) - tail) < 1e-12


# --------------------------------------------------------------------------
# two-mode helpers
# --------------------------------------------------------------------------

def test_two_mode_indexing_roundtrip():
    n_fock = 5
    vac = two_mode_vacuum(n_fock)
    assert vac[two_mode_index(n_fock, 0, 0)] == 1.0
    assert infer_two_mode_fock(vac) == n_fock
    for n_a in range(n_fock):
        for n_b in range(n_fock):
            i = two_mode_index(n_fock, n_a, n_b)
            assert 0 <= i < n_fock * n_fock


def test_infer_two_mode_rejects_non_square():
    with pytest.raises(ValueError):
        infer_two_mode_fock(np.zeros(27))
