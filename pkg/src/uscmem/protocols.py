"""Memory protocols: interference tools, the two-cell register, and named
experiment drivers.

The two-cell register stores one Bell pair of the form
(|g e> + |e g>) |0 0> / sqrt(2) by sweeping both cells simultaneously; no
coupling acts between the cells, so any entanglement in the register is
carried through, not created, by the sweep.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from math import acos, sqrt

import numpy as np

from .dynamics import (
    PhaseLandscape,
    PropagatorConfig,
    RSQRT2,
    Trajectory,
    corrected_fidelity,
    optimize_retrieval_phase,
    phase_landscape,
    propagate,
    roundtrip_run,
    storage_input,
    storage_run,
)
from .hilbert import (
    HilbertDims,
    State,
    TruncationError,
    basis_state,
    fock_annihilation,
    infer_two_mode_fock,
)
from .lindblad import (
    NoiseRates,
    evolve_master,
    fidelity_mixed,
    flat_rate,
    ohmic_rate,
    optimize_retrieval_phase_mixed,
    pure_density,
)
from .model import CouplingSchedule, ModelParams, build_rabi
from .spectral import build_gauge_chain, cat_approximant, eigendecompose, seed_gauge


class ExperimentError(RuntimeError):
    """A named experiment failed; the message carries the failing stage."""


# --------------------------------------------------------------------------
# two-mode interference
# --------------------------------------------------------------------------

def beam_splitter(state: np.ndarray, transmissivity: float, phase: float = 0.0) -> np.ndarray:
    """Mix two Fock modes, exp[xi (e^{i phi} a^dag b - e^{-i phi} a b^dag)].

    cos^2(xi) equals the transmissivity. Total photon number is conserved,
    so the input must not populate total photon sectors that the truncation
    cannot hold after mixing.
    """
    amps = np.asarray(state, dtype=np.complex128)
    nf = infer_two_mode_fock(amps)
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {transmissivity}")
    n_a, n_b = np.divmod(np.arange(nf * nf), nf)
    over = np.abs(amps[n_a + n_b > nf - 1])
    if over.size and float(over.max()) > 1e-12:
        raise TruncationError(
            "input occupies total photon sectors above the truncation; raise n_fock"
        )
    xi = acos(sqrt(transmissivity))
    a = fock_annihilation(nf)
    eye = np.eye(nf, dtype=np.complex128)
    mode_a = np.kron(a, eye)
    mode_b = np.kron(eye, a)
    gen = xi * (
        np.exp(1j * phase) * mode_a.conj().T @ mode_b
        - np.exp(-1j * phase) * mode_a @ mode_b.conj().T
    )
    herm = 1j * gen
    evals, evecs = np.linalg.eigh(herm)
    return evecs @ (np.exp(-1j * evals) * (evecs.conj().T @ amps))


# --------------------------------------------------------------------------
# two-cell register
# --------------------------------------------------------------------------

def prepare_two_cell(params: ModelParams) -> State:
    """Shared single excitation across two cells, (|ge> + |eg>)|00>/sqrt(2)."""
    dims1 = params.dims
    g0 = basis_state(dims1, 0, 0).amplitudes
    e0 = basis_state(dims1, 1, 0).amplitudes
    amps = (np.kron(g0, e0) + np.kron(e0, g0)) / sqrt(2.0)
    return State(HilbertDims(params.n_fock, 2), amps)


def two_cell_storage(
    state: State,
    params: ModelParams,
    schedule: CouplingSchedule,
    cfg: PropagatorConfig,
) -> tuple[Trajectory, np.ndarray]:
    """Sweep both cells of a register through the same schedule.

    Returns the joint trajectory and the curve
    F_bar(t) = |< (|ge> + |eg>)|00> / sqrt(2) | psi(t) >|^2.
    """
    if state.dims.n_cells != 2:
        raise ValueError("two_cell_storage expects a two-cell state")
    traj = propagate(params, schedule, state, cfg)
    ref = prepare_two_cell(params).amplitudes
    fbar = np.abs(traj.amplitudes @ ref.conj()) ** 2
    return traj, fbar


def two_cell_retrieval(
    state: State,
    params: ModelParams,
    schedule: CouplingSchedule,
    cfg: PropagatorConfig,
) -> tuple[Trajectory, np.ndarray]:
    """Reverse sweep of the register; same curve convention as storage."""
    return two_cell_storage(state, params, schedule, cfg)


def _symmetric_pair_fidelity(
    state: State, vec_g: np.ndarray, vec_e: np.ndarray
) -> tuple[float, tuple[float, float]]:
    """Best overlap with (|G>|E'> + |E'>|G>)/sqrt(2) under independent
    excited-branch phase corrections theta_1, theta_2 per cell."""
    d = state.dims.cell_dim
    m = state.amplitudes.reshape(d, d)
    c_ge = vec_g.conj() @ m @ vec_e.conj()
    c_eg = vec_e.conj() @ m @ vec_g.conj()
    fid = float(((abs(c_ge) + abs(c_eg)) / sqrt(2.0)) ** 2)
    theta_1 = float(np.angle(c_eg)) % (2 * np.pi)
    theta_2 = float(np.angle(c_ge)) % (2 * np.pi)
    return fid, (theta_1, theta_2)


def two_cell_target_fidelity(state: State, params: ModelParams) -> tuple[float, tuple[float, float]]:
    """Overlap of a stored register with the entangled cat target at peak
    coupling, maximized over per-cell phase corrections."""
    spec = seed_gauge(eigendecompose(build_rabi(params, params.omega0), 2, params.dims))
    return _symmetric_pair_fidelity(state, spec.states[:, 0], spec.states[:, 1])


def two_cell_return_fidelity(state: State, params: ModelParams) -> tuple[float, tuple[float, float]]:
    """Overlap of a retrieved register with the initial pair state,
    maximized over per-cell phase corrections."""
    dims1 = params.dims
    vec_g = basis_state(dims1, 0, 0).amplitudes
    vec_e = basis_state(dims1, 1, 0).amplitudes
    return _symmetric_pair_fidelity(state, vec_g, vec_e)


def cell_entropy(state: State, cell: int = 0) -> float:
    """Von Neumann entanglement entropy (nats) of one cell of a register."""
    if state.dims.n_cells != 2:
        raise ValueError("cell_entropy expects a two-cell state")
    if cell not in (0, 1):
        raise ValueError("cell must be 0 or 1")
    d = state.dims.cell_dim
    m = state.amplitudes.reshape(d, d)
    rho = m @ m.conj().T if cell == 0 else m.T @ m.conj()
    probs = np.linalg.eigvalsh(rho)
    probs = probs[probs > 1e-15]
    return float(-np.sum(probs * np.log(probs)))


# --------------------------------------------------------------------------
# named experiments
# --------------------------------------------------------------------------

EXPERIMENTS = (
    "spectrum",
    "storage",
    "retrieval",
    "roundtrip",
    "phase-map",
    "noisy",
    "entangled",
    "convergence",
)

_RATE_MODELS = ("flat", "ohmic")


@dataclass(frozen=True)
class ExperimentSpec:
    """Fully resolved description of one reproducible run."""

    name: str
    params: ModelParams
    schedule: CouplingSchedule
    cfg: PropagatorConfig
    alpha_f: complex = RSQRT2
    beta_f: complex = RSQRT2
    theta: float | None = None          # None: optimize the read correction
    theta_points: int = 64
    noise: NoiseRates | None = None
    k_levels: int = 12
    refresh_every: int = 20
    rate_model: str = "flat"
    omega_points: int = 41
    n_fock_alt: int = 40

    def validate(self) -> list[str]:
        problems = []
        if self.name not in EXPERIMENTS:
            problems.append(f"unknown experiment {self.name!r}")
        weight = abs(self.alpha_f) ** 2 + abs(self.beta_f) ** 2
        if abs(weight - 1.0) > 1e-6:
            problems.append(f"|alpha_f|^2 + |beta_f|^2 = {weight:.8f} must be 1")
        if self.theta_points < 32:
            problems.append(f"theta_points = {self.theta_points} below minimum 32")
        if self.k_levels < 2:
            problems.append(f"k_levels = {self.k_levels} must be >= 2")
        if self.refresh_every < 1:
            problems.append(f"refresh_every = {self.refresh_every} must be >= 1")
        if self.rate_model not in _RATE_MODELS:
            problems.append(f"rate_model must be one of {_RATE_MODELS}")
        if self.omega_points < 2:
            problems.append(f"omega_points = {self.omega_points} must be >= 2")
        if self.n_fock_alt < 2:
            problems.append(f"n_fock_alt = {self.n_fock_alt} must be >= 2")
        return problems

    def resolved(self) -> dict:
        """Canonical plain-data view used for hashing and the manifest."""
        noise = self.noise
        return {
            "name": self.name,
            "params": {
                "omega_cav": self.params.omega_cav,
                "omega_eg": self.params.omega_eg,
                "omega0": self.params.omega0,
                "n_fock": self.params.n_fock,
            },
            "schedule": {
                "omega_start": self.schedule.omega_start,
                "omega_end": self.schedule.omega_end,
                "total_time": self.schedule.total_time,
                "shape": self.schedule.shape,
            },
            "cfg": {
                "dt": self.cfg.dt,
                "record_every": self.cfg.record_every,
                "norm_tol": self.cfg.norm_tol,
                "method": self.cfg.method,
            },
            "alpha_f": [self.alpha_f.real, self.alpha_f.imag],
            "beta_f": [self.beta_f.real, self.beta_f.imag],
            "theta": self.theta,
            "theta_points": self.theta_points,
            "noise": None if noise is None else {
                "gamma_x": noise.gamma_x,
                "gamma_y": noise.gamma_y,
                "gamma_z": noise.gamma_z,
                "gamma_r": noise.gamma_r,
            },
            "k_levels": self.k_levels,
            "refresh_every": self.refresh_every,
            "rate_model": self.rate_model,
            "omega_points": self.omega_points,
            "n_fock_alt": self.n_fock_alt,
        }

    @property
    def spec_hash(self) -> str:
        blob = json.dumps(self.resolved(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class ResultBundle:
    """Outputs of one experiment, all tagged by the spec hash."""

    name: str
    spec_hash: str
    curves: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)
    landscapes: dict[str, PhaseLandscape] = field(default_factory=dict)
    scalars: dict[str, float] = field(default_factory=dict)


def _stage(stage_name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ExperimentError:
        raise
    except Exception as exc:
        raise ExperimentError(f"stage {stage_name!r} failed: {exc}") from exc


def run_experiment(spec: ExperimentSpec) -> ResultBundle:
    """Run one named experiment deterministically."""
    problems = spec.validate()
    if problems:
        raise ValueError("invalid experiment spec: " + "; ".join(problems))
    handler = {
        "spectrum": _run_spectrum,
        "storage": _run_storage,
        "retrieval": _run_retrieval,
        "roundtrip": _run_roundtrip,
        "phase-map": _run_phase_map,
        "noisy": _run_noisy,
        "entangled": _run_entangled,
        "convergence": _run_convergence,
    }[spec.name]
    return handler(spec)


def _run_spectrum(spec: ExperimentSpec) -> ResultBundle:
    params = spec.params
    omegas = np.linspace(0.0, params.omega0, spec.omega_points)
    rows_e = np.empty((len(omegas), 4))
    rows_p = np.empty((len(omegas), 4))
    f_g = np.empty(len(omegas))
    f_e = np.empty(len(omegas))
    for i, om in enumerate(omegas):
        sp = _stage("eigendecompose", eigendecompose,
                    build_rabi(params, float(om)), 4, params.dims)
        rows_e[i] = sp.energies
        rows_p[i] = sp.parities
        cat_g = cat_approximant(params, float(om), "G")
        cat_e = cat_approximant(params, float(om), "E")
        f_g[i] = abs(np.vdot(cat_g.amplitudes, sp.states[:, 0])) ** 2
        f_e[i] = abs(np.vdot(cat_e.amplitudes, sp.states[:, 1])) ** 2
    curves = {
        "spectrum": {
            "omega": omegas,
            "E0": rows_e[:, 0], "E1": rows_e[:, 1],
            "E2": rows_e[:, 2], "E3": rows_e[:, 3],
            "parity0": rows_p[:, 0], "parity1": rows_p[:, 1],
            "parity2": rows_p[:, 2], "parity3": rows_p[:, 3],
        },
        "cat_overlap": {"omega": omegas, "F_G": f_g, "F_E": f_e},
    }
    scalars = {
        "gap_at_peak": float(rows_e[-1, 1] - rows_e[-1, 0]),
        "F_G_min": float(f_g.min()),
        "F_E_min": float(f_e.min()),
    }
    return ResultBundle(spec.name, spec.spec_hash, curves=curves, scalars=scalars)


def _storage_curve(spec: ExperimentSpec) -> tuple[Trajectory, dict[str, np.ndarray], dict[str, float]]:
    params = spec.params
    traj, fs = _stage("storage sweep", storage_run,
                      params, spec.alpha_f, spec.beta_f, spec.schedule, spec.cfg)
    chain = _stage("eigenstate tracking", build_gauge_chain, params, traj.couplings, 2)
    n = traj.n_recorded
    f_g = np.empty(n)
    f_e = np.empty(n)
    for i, sp in enumerate(chain.spectra):
        om = float(traj.couplings[i])
        f_g[i] = abs(np.vdot(cat_approximant(params, om, "G").amplitudes, sp.states[:, 0])) ** 2
        f_e[i] = abs(np.vdot(cat_approximant(params, om, "E").amplitudes, sp.states[:, 1])) ** 2
    final_spec = chain.spectra[-1]
    c_g = np.vdot(final_spec.states[:, 0], traj.amplitudes[-1])
    c_e = np.vdot(final_spec.states[:, 1], traj.amplitudes[-1])
    storage_fid = float((abs(spec.alpha_f) * abs(c_g) + abs(spec.beta_f) * abs(c_e)) ** 2)
    curve = {
        "t": traj.times,
        "omega": traj.couplings,
        "F_s": fs,
        "F_G": f_g,
        "F_E": f_e,
    }
    scalars = {"F_s_final": float(fs[-1]), "storage_fidelity": storage_fid}
    return traj, curve, scalars


def _run_storage(spec: ExperimentSpec) -> ResultBundle:
    _, curve, scalars = _storage_curve(spec)
    return ResultBundle(spec.name, spec.spec_hash, curves={"storage": curve}, scalars=scalars)


def _run_roundtrip(spec: ExperimentSpec) -> ResultBundle:
    traj, storage_curve, scalars = _storage_curve(spec)
    params = spec.params
    total_time = spec.schedule.total_time
    traj_r = _stage("retrieval sweep", propagate,
                    params, spec.schedule.reversed(), traj.final, spec.cfg)
    if spec.theta is None:
        theta, _ = optimize_retrieval_phase(traj_r.final, spec.alpha_f, spec.beta_f)
    else:
        theta = spec.theta
    fs_r = np.array(
        [corrected_fidelity(traj_r.state(i), theta, spec.alpha_f, spec.beta_f)
         for i in range(traj_r.n_recorded)]
    )
    retrieval_curve = {
        "t": total_time + traj_r.times,
        "omega": traj_r.couplings,
        "F_s": fs_r,
    }
    scalars = dict(scalars)
    scalars["F_s_storage"] = scalars.pop("F_s_final")
    scalars.update({"F_s_final": float(fs_r[-1]), "theta_opt": float(theta)})
    return ResultBundle(
        spec.name, spec.spec_hash,
        curves={"storage": storage_curve, "retrieval": retrieval_curve},
        scalars=scalars,
    )


def _run_retrieval(spec: ExperimentSpec) -> ResultBundle:
    rt = _stage("roundtrip", roundtrip_run,
                spec.params, spec.schedule.total_time, spec.cfg,
                spec.alpha_f, spec.beta_f, spec.theta)
    curve = {
        "t": spec.schedule.total_time + rt.retrieval.times,
        "omega": rt.retrieval.couplings,
        "F_s": rt.retrieval_fs,
    }
    scalars = {"F_s_final": rt.fidelity, "theta_opt": rt.theta_opt}
    return ResultBundle(spec.name, spec.spec_hash, curves={"retrieval": curve}, scalars=scalars)


def _run_phase_map(spec: ExperimentSpec) -> ResultBundle:
    land = _stage("phase landscape", phase_landscape,
                  spec.params, spec.alpha_f, spec.beta_f,
                  spec.schedule, spec.cfg, spec.theta_points)
    ridge = land.fidelity.max(axis=1)
    scalars = {
        "ridge_min": float(ridge.min()),
        "theta_opt_final": float(land.theta_opt[-1]),
    }
    return ResultBundle(spec.name, spec.spec_hash,
                        landscapes={"landscape": land}, scalars=scalars)


def _resolve_rate_model(spec: ExperimentSpec):
    if spec.rate_model == "flat":
        return flat_rate
    return ohmic_rate(spec.params.omega_cav)


def _run_noisy(spec: ExperimentSpec) -> ResultBundle:
    params = spec.params
    rates = spec.noise or NoiseRates.for_qubit_splitting(params.omega_eg)
    model = _resolve_rate_model(spec)
    psi_s = storage_input(params, spec.alpha_f, spec.beta_f)
    rho0 = pure_density(psi_s)
    mt_s = _stage("noisy storage", evolve_master,
                  params, spec.schedule, rho0, rates, spec.cfg,
                  spec.k_levels, spec.refresh_every, model)
    mt_r = _stage("noisy retrieval", evolve_master,
                  params, spec.schedule.reversed(), mt_s.final, rates, spec.cfg,
                  spec.k_levels, spec.refresh_every, model)
    total_time = spec.schedule.total_time
    fs_s = np.array([fidelity_mixed(r, psi_s) for r in mt_s.rhos])
    fs_r = np.array([fidelity_mixed(r, psi_s) for r in mt_r.rhos])
    curve = {
        "t": np.concatenate([mt_s.times, total_time + mt_r.times[1:]]),
        "omega": np.concatenate([mt_s.couplings, mt_r.couplings[1:]]),
        "F_s": np.concatenate([fs_s, fs_r[1:]]),
    }
    if spec.theta is None:
        theta, f_final = optimize_retrieval_phase_mixed(
            mt_r.final, params.dims, spec.alpha_f, spec.beta_f
        )
    else:
        theta = spec.theta
        corr = np.exp(1j * theta)
        i_g, i_e = params.dims.index(0, 0), params.dims.index(1, 0)
        w = (abs(spec.alpha_f) ** 2 * float(np.real(mt_r.final[i_g, i_g]))
             + abs(spec.beta_f) ** 2 * float(np.real(mt_r.final[i_e, i_e])))
        z = complex(np.conj(spec.alpha_f) * spec.beta_f * mt_r.final[i_g, i_e])
        f_final = w + 2 * float(np.real(corr * z))
    scalars = {"F_s_final": float(f_final), "theta_opt": float(theta)}
    return ResultBundle(spec.name, spec.spec_hash, curves={"noisy": curve}, scalars=scalars)


def _run_entangled(spec: ExperimentSpec) -> ResultBundle:
    params = spec.params
    psi0 = prepare_two_cell(params)
    traj_s, fbar_s = _stage("register storage", two_cell_storage,
                            psi0, params, spec.schedule, spec.cfg)
    f_store, _ = _stage("register target overlap", two_cell_target_fidelity,
                        traj_s.final, params)
    traj_r, fbar_r = _stage("register retrieval", two_cell_retrieval,
                            traj_s.final, params, spec.schedule.reversed(), spec.cfg)
    f_return, _ = two_cell_return_fidelity(traj_r.final, params)
    total_time = spec.schedule.total_time
    curves = {
        "entangled_storage": {
            "t": traj_s.times, "omega": traj_s.couplings, "F_s": fbar_s,
        },
        "entangled_retrieval": {
            "t": total_time + traj_r.times, "omega": traj_r.couplings, "F_s": fbar_r,
        },
    }
    scalars = {"storage_fidelity": f_store, "roundtrip_fidelity": f_return}
    return ResultBundle(spec.name, spec.spec_hash, curves=curves, scalars=scalars)


def _run_convergence(spec: ExperimentSpec) -> ResultBundle:
    params = spec.params
    alt = ModelParams(params.omega_cav, params.omega_eg, params.omega0, spec.n_fock_alt)
    base_spec = _stage("base diagonalization", eigendecompose,
                       build_rabi(params, params.omega0), 4, params.dims)
    alt_spec = _stage("refined diagonalization", eigendecompose,
                      build_rabi(alt, alt.omega0), 4, alt.dims)
    delta = np.abs(base_spec.energies - alt_spec.energies)
    curves = {
        "convergence": {
            "level": np.arange(4, dtype=np.float64),
            "E_base": base_spec.energies,
            "E_alt": alt_spec.energies,
            "delta": delta,
        }
    }
    scalars = {"max_abs_delta": float(delta.max())}
    return ResultBundle(spec.name, spec.spec_hash, curves=curves, scalars=scalars)
