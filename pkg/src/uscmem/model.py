"""Quantum Rabi model and time-dependent coupling schedules.

Units: hbar = 1 and energies in multiples of the cavity frequency, which
defaults to 1. The Hamiltonian of one cell is

    H(Omega) = (omega_eg / 2) sigma_z + omega_cav a^dag a
               + Omega sigma_x (a + a^dag)

on the truncated space described by :class:`~uscmem.hilbert.HilbertDims`.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import cos, sin

import numpy as np

from .hilbert import HilbertDims, annihilation_op, pauli_op, tensor


@dataclass(frozen=True)
class ModelParams:
    """Static cell parameters.

    omega0 is the peak coupling amplitude reached at the far end of a
    storage sweep; protocols sweep the instantaneous coupling between 0 and
    omega0.
    """

    omega_cav: float = 1.0
    omega_eg: float = 0.1
    omega0: float = 1.0
    n_fock: int = 30

    def __post_init__(self) -> None:
        if self.omega_cav <= 0:
            raise ValueError(f"omega_cav must be > 0, got {self.omega_cav}")
        if self.omega_eg < 0:
            raise ValueError(f"omega_eg must be >= 0, got {self.omega_eg}")
        if self.omega0 < 0:
            raise ValueError(f"omega0 must be >= 0, got {self.omega0}")
        if self.n_fock < 2:
            raise ValueError(f"n_fock must be >= 2, got {self.n_fock}")

    @property
    def dims(self) -> HilbertDims:
        return HilbertDims(self.n_fock, 1)


@dataclass(frozen=True)
class CouplingSchedule:
    """Linear ramp of the coupling over [0, total_time]."""

    omega_start: float
    omega_end: float
    total_time: float
    shape: str = "linear"

    def __post_init__(self) -> None:
        if self.total_time <= 0:
            raise ValueError(f"total_time must be > 0, got {self.total_time}")
        if self.shape != "linear":
            raise ValueError(f"unsupported schedule shape {self.shape!r}")

    @classmethod
    def from_flux(
        cls, f: float, delta_f: float, omega0: float, total_time: float
    ) -> "CouplingSchedule":
        """Schedule from a flux bias working point.

        A small linear flux excursion delta_f around the bias f modulates the
        coupling as Omega(t) = (cos f - delta_f sin f * t / T) * omega0, which
        is again a linear ramp in time.
        """
        return cls(
            omega_start=omega0 * cos(f),
            omega_end=omega0 * (cos(f) - delta_f * sin(f)),
            total_time=total_time,
        )

    @property
    def is_sweep(self) -> bool:
        return self.omega_start != self.omega_end

    def coupling_at(self, t: float) -> float:
        if not 0.0 <= t <= self.total_time:
            raise ValueError(f"t = {t} outside [0, {self.total_time}]")
        frac = t / self.total_time
        return self.omega_start + (self.omega_end - self.omega_start) * frac

    def reversed(self) -> "CouplingSchedule":
        return CouplingSchedule(self.omega_end, self.omega_start, self.total_time, self.shape)


def storage_schedule(params: ModelParams, total_time: float) -> CouplingSchedule:
    """Write sweep: ramp the coupling from 0 up to omega0."""
    return CouplingSchedule(0.0, params.omega0, total_time)


def retrieval_schedule(params: ModelParams, total_time: float) -> CouplingSchedule:
    """Read sweep: ramp the coupling from omega0 back to 0."""
    return CouplingSchedule(params.omega0, 0.0, total_time)


def build_rabi(params: ModelParams, coupling: float) -> np.ndarray:
    """Dense cell Hamiltonian at a fixed coupling."""
    dims = params.dims
    nf = params.n_fock
    diag = np.empty(dims.total_dim, dtype=np.float64)
    n = np.arange(nf, dtype=np.float64)
    diag[:nf] = -0.5 * params.omega_eg + params.omega_cav * n
    diag[nf:] = +0.5 * params.omega_eg + params.omega_cav * n
    h = np.diag(diag).astype(np.complex128)
    a = annihilation_op(dims)
    h += coupling * (pauli_op("x", dims) @ (a + a.conj().T))
    return h


def hamiltonian_at(params: ModelParams, schedule: CouplingSchedule, t: float) -> np.ndarray:
    return build_rabi(params, schedule.coupling_at(t))


def parity_op(dims: HilbertDims) -> np.ndarray:
    """Z2 symmetry operator sigma_z exp(i pi a^dag a) of one cell.

    Commutes with the Rabi Hamiltonian at every coupling, so its eigenvalue
    (+1 or -1) labels each eigenstate and is conserved during sweeps.
    """
    if dims.n_cells != 1:
        raise ValueError("parity_op acts on a single cell; kron two copies for a pair")
    photon_parity = np.diag((-1.0 + 0j) ** np.arange(dims.n_fock))
    return np.kron(np.array([[-1, 0], [0, 1]], dtype=np.complex128), photon_parity)


def joint_parity_op(dims: HilbertDims) -> np.ndarray:
    """Product parity of a two-cell register."""
    if dims.n_cells != 2:
        raise ValueError("joint_parity_op acts on a two-cell register")
    single = HilbertDims(dims.n_fock, 1)
    p = parity_op(single)
    return tensor(p, p, max_dim=dims.total_dim)
