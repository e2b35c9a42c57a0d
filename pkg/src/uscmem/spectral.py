"""Instantaneous spectra, eigenstate gauge tracking, and cat approximants.

Eigenvectors returned by a dense solver carry an arbitrary complex phase,
and inside a degenerate doublet even the basis choice is arbitrary. Both
ambiguities matter here because protocol targets are built from tracked
eigenstates along a sweep. This module pins them down:

* parity mixing inside (near-)degenerate clusters is removed by
  diagonalizing the symmetry operator within each cluster,
* a seed gauge makes the largest amplitude of each state real positive,
* successive spectra along a sweep are aligned by maximum overlap with the
  previous snapshot (parallel transport), never by blind energy order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import HilbertDims, State, coherent_state, normalized, number_op
from .model import ModelParams, build_rabi, joint_parity_op, parity_op

_HERM_TOL = 1e-10
_ORTHO_TOL = 1e-10
_RESIDUAL_TOL = 1e-9
_PARITY_PURITY = 0.999
_DEGENERACY_TOL = 1e-8


class GaugeAlignmentError(RuntimeError):
    """Eigenstate tracking between two spectra was ambiguous."""


@dataclass(frozen=True)
class Spectrum:
    """Lowest-k eigenpairs of a cell Hamiltonian with parity labels.

    ``states`` holds eigenvectors as columns, orthonormal, in ascending
    energy order except where gauge alignment has reordered a degenerate
    cluster. ``parities`` are the +-1 symmetry labels.
    """

    dims: HilbertDims
    energies: np.ndarray
    states: np.ndarray
    parities: np.ndarray

    @property
    def k(self) -> int:
        return len(self.energies)

    def state(self, i: int) -> State:
        return State(self.dims, self.states[:, i])


@dataclass(frozen=True)
class GaugeChain:
    """Gauge-consistent spectra tracked along a coupling sweep."""

    couplings: np.ndarray
    spectra: tuple[Spectrum, ...]

    def __post_init__(self) -> None:
        if len(self.couplings) != len(self.spectra):
            raise ValueError("one spectrum per coupling sample required")


def eigendecompose(h: np.ndarray, k: int, dims: HilbertDims) -> Spectrum:
    """Lowest-k eigenpairs of a Hermitian cell Hamiltonian.

    Raises if the input is detectably non-Hermitian, if the requested count
    exceeds the space, or if any kept state fails to be a clean parity
    eigenstate after degenerate clusters are purified.
    """
    dim = dims.total_dim
    if h.shape != (dim, dim):
        raise ValueError(f"operator shape {h.shape} does not match dim {dim}")
    if not 1 <= k <= dim:
        raise ValueError(f"k must be in [1, {dim}], got {k}")
    scale = max(1.0, float(np.abs(h).max()))
    if float(np.abs(h - h.conj().T).max()) > _HERM_TOL * scale:
        raise ValueError("eigendecompose requires a Hermitian operator")

    energies, vectors = np.linalg.eigh(h)
    energies = energies[:k].copy()
    vectors = vectors[:, :k].copy()

    p = parity_op(dims) if dims.n_cells == 1 else joint_parity_op(dims)
    _purify_clusters(energies, vectors, p)

    parities = np.empty(k)
    for i in range(k):
        expect = float(np.real(np.vdot(vectors[:, i], p @ vectors[:, i])))
        if abs(expect) < _PARITY_PURITY:
            raise RuntimeError(
                f"state {i} is not a parity eigenstate (<P> = {expect:.6f}); "
                "degenerate-cluster purification failed"
            )
        parities[i] = 1.0 if expect > 0 else -1.0

    spec = Spectrum(dims, energies, vectors, parities)
    _check_spectrum(h, spec, scale)
    return spec


def _purify_clusters(energies: np.ndarray, vectors: np.ndarray, p: np.ndarray) -> None:
    """Rotate each near-degenerate eigenvalue cluster onto parity eigenstates.

    Within an exactly degenerate doublet the solver returns an arbitrary
    mixture of the two symmetry sectors; diagonalizing P restricted to the
    cluster restores sharp labels without changing the spanned subspace.
    """
    k = len(energies)
    start = 0
    while start < k:
        stop = start + 1
        while stop < k and energies[stop] - energies[stop - 1] <= _DEGENERACY_TOL:
            stop += 1
        if stop - start > 1:
            block = vectors[:, start:stop]
            p_block = block.conj().T @ p @ block
            _, rot = np.linalg.eigh(p_block)
            vectors[:, start:stop] = block @ rot
        start = stop


def _check_spectrum(h: np.ndarray, spec: Spectrum, scale: float) -> None:
    gram = spec.states.conj().T @ spec.states
    if float(np.abs(gram - np.eye(spec.k)).max()) > _ORTHO_TOL:
        raise RuntimeError("eigenvector block lost orthonormality")
    residual = h @ spec.states - spec.states * spec.energies
    if float(np.abs(residual).max()) > _RESIDUAL_TOL * scale:
        raise RuntimeError("eigenpair residual above tolerance")


def seed_gauge(spec: Spectrum) -> Spectrum:
    """Fix each state's phase so its largest-magnitude amplitude is real positive."""
    states = spec.states.copy()
    for i in range(spec.k):
        idx = int(np.argmax(np.abs(states[:, i])))
        phase = np.angle(states[idx, i])
        states[:, i] = states[:, i] * np.exp(-1j * phase)
    return Spectrum(spec.dims, spec.energies.copy(), states, spec.parities.copy())


def align_gauge(previous: Spectrum, current: Spectrum, ambiguity_tol: float = 1e-3) -> Spectrum:
    """Parallel-transport ``current`` onto the gauge of ``previous``.

    States are matched by maximum overlap magnitude and rephased so every
    diagonal overlap <prev_i|cur_i> is real and positive. Ambiguous matches
    (two candidate overlaps within ``ambiguity_tol``, or no candidate above
    1/sqrt(2)) mean the sweep was sampled too coarsely to track states and
    raise :class:`GaugeAlignmentError`.
    """
    if previous.dims != current.dims or previous.k != current.k:
        raise ValueError("align_gauge requires spectra of equal shape")
    k = previous.k
    m = previous.states.conj().T @ current.states
    mag = np.abs(m)

    order = np.empty(k, dtype=int)
    for i in range(k):
        ranked = np.argsort(mag[i])[::-1]
        best, runner = ranked[0], ranked[1] if k > 1 else None
        if runner is not None and mag[i, best] - mag[i, runner] < ambiguity_tol:
            raise GaugeAlignmentError(
                f"tracking state {i}: competing overlaps "
                f"{mag[i, best]:.6f} and {mag[i, runner]:.6f} are indistinguishable"
            )
        if mag[i, best] < 2 ** -0.5:
            raise GaugeAlignmentError(
                f"tracking state {i}: best overlap {mag[i, best]:.6f} too small; "
                "sweep step too coarse"
            )
        order[i] = best
    if len(set(order.tolist())) != k:
        raise GaugeAlignmentError("state assignment is not a permutation")

    states = current.states[:, order].copy()
    energies = current.energies[order].copy()
    parities = current.parities[order].copy()
    for i in range(k):
        phase = np.angle(m[i, order[i]])
        states[:, i] = states[:, i] * np.exp(-1j * phase)
    return Spectrum(current.dims, energies, states, parities)


def build_gauge_chain(params: ModelParams, couplings: np.ndarray, k: int = 2) -> GaugeChain:
    """Tracked spectra at each coupling, seeded at the first sample."""
    couplings = np.asarray(couplings, dtype=np.float64)
    if couplings.ndim != 1 or len(couplings) == 0:
        raise ValueError("couplings must be a nonempty 1-d array")
    spectra = []
    prev = None
    for om in couplings:
        spec = eigendecompose(build_rabi(params, float(om)), k, params.dims)
        spec = seed_gauge(spec) if prev is None else align_gauge(prev, spec)
        spectra.append(spec)
        prev = spec
    return GaugeChain(couplings, tuple(spectra))


# --------------------------------------------------------------------------
# cat-state approximants of the ground doublet
# --------------------------------------------------------------------------

def cat_approximant(params: ModelParams, coupling: float, which: str) -> State:
    """Closed-form approximation of the lowest doublet deep in the
    ultrastrong regime.

    With alpha = coupling / omega_cav and |+->  the sigma_x eigenstates,

        which = "G":  (|-alpha>|+> - |alpha>|->) / sqrt(2)
        which = "E":  (|-alpha>|+> + |alpha>|->) / sqrt(2)

    The pair is exactly orthogonal for every alpha and approaches the bare
    states |g, 0> and |e, 0> as the coupling vanishes. It is an accurate
    model of the true eigenstates once coupling / omega_cav is around 0.8
    or larger.
    """
    if coupling < 0:
        raise ValueError(f"coupling must be >= 0, got {coupling}")
    if which not in ("G", "E"):
        raise ValueError(f"which must be 'G' or 'E', got {which!r}")
    dims = params.dims
    alpha = coupling / params.omega_cav
    sqrt2 = np.sqrt(2.0)
    # sigma_x eigenstates (|e> +- |g>)/sqrt2 in (g, e) component order
    plus = np.array([1.0, 1.0], dtype=np.complex128) / sqrt2
    minus = np.array([-1.0, 1.0], dtype=np.complex128) / sqrt2
    sign = -1.0 if which == "G" else 1.0
    amps = (
        np.kron(plus, coherent_state(-alpha, dims.n_fock))
        + sign * np.kron(minus, coherent_state(alpha, dims.n_fock))
    ) / sqrt2
    return normalized(dims, amps)


def mean_photon(state: State) -> float:
    """<a^dag a> summed over cells."""
    if state.dims.n_cells == 1:
        n = number_op(state.dims)
    else:
        single = HilbertDims(state.dims.n_fock, 1)
        n1 = number_op(single)
        eye = np.eye(single.total_dim, dtype=np.complex128)
        n = np.kron(n1, eye) + np.kron(eye, n1)
    return float(np.real(np.vdot(state.amplitudes, n @ state.amplitudes)))
