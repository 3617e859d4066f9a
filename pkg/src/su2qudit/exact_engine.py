"""Exact state-vector evolution, initial states, and observable measurement."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import core_model as cm
from .core_model import LEVELS, ManyBodyOperator, ModelParams

MAX_EXACT_SITES = 8


class CapacityError(Exception):
    """Requested Hilbert space exceeds the supported exact-evolution size."""


class KrylovError(Exception):
    """Lanczos exponential did not reach tolerance within the subspace cap."""


@dataclass
class QuditState:
    """Normalized state vector over the 6^N dressed-site space."""

    N: int
    amps: np.ndarray

    @property
    def dim(self) -> int:
        return LEVELS**self.N

    def tensor(self) -> np.ndarray:
        return self.amps.reshape((LEVELS,) * self.N)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def copy(self) -> "QuditState":
        return QuditState(self.N, self.amps.copy())


def _check_capacity(N: int):
    if N > MAX_EXACT_SITES:
        raise CapacityError(
            f"N={N} exceeds the exact-evolution limit of {MAX_EXACT_SITES} sites"
        )


def basis_state(config: list[int]) -> QuditState:
    """Product state from a list of levels (1..6), site 1 first."""
    N = len(config)
    _check_capacity(N)
    amps = np.zeros(LEVELS**N, dtype=complex)
    idx = 0
    for lev in config:
        if not 1 <= lev <= LEVELS:
            raise ValueError(f"invalid level {lev}")
        idx = idx * LEVELS + (lev - 1)
    amps[idx] = 1.0
    return QuditState(N, amps)


def dirac_vacuum(params: ModelParams) -> QuditState:
    """Dirac sea |5>|1>...|5>|1> (per the staggering convention of params)."""
    return basis_state(params.vacuum_levels())


def apply_site_flip(state: QuditState, n: int, s_from: int, s_to: int) -> QuditState:
    """Replace level s_from by s_to at site n, renormalizing the result.

    The flip acts as the projector-like operator |s_to><s_from|_n, so any
    component not occupying s_from at site n is discarded; a zero-norm result
    is rejected as an invalid initial state.
    """
    if not 1 <= n <= state.N:
        raise ValueError(f"site {n} outside 1..{state.N}")
    t = state.tensor()
    out = np.zeros_like(t)
    src = np.take(t, s_from - 1, axis=n - 1)
    idx = [slice(None)] * state.N
    idx[n - 1] = s_to - 1
    out[tuple(idx)] = src
    nrm = np.linalg.norm(out)
    if nrm < 1e-14:
        raise ValueError(
            f"site flip {s_from}->{s_to} at site {n} annihilates the state"
        )
    return QuditState(state.N, (out / nrm).ravel())


def string_state(n_s: int, length: int, params: ModelParams) -> QuditState:
    """Quark-antiquark string of odd length starting at quark site n_s.

    Applies the dressed-basis level replacements (|4> at the quark end, |3>
    at the antiquark end, alternating |6>/|2> in between) to the Dirac sea.
    """
    N = params.N
    if length < 1 or length % 2 == 0:
        raise ValueError("string length must be odd so the endpoint is an antiquark site")
    if not params.is_quark_site(n_s):
        raise ValueError(f"string must start on a quark-sublattice site, got n_s={n_s}")
    if n_s < 1 or n_s + length > N:
        raise ValueError("string does not fit on the lattice")
    config = params.vacuum_levels()
    config[n_s - 1] = 4
    config[n_s + length - 1] = 3
    for j in range(n_s + 1, n_s + length):
        config[j - 1] = 6 if not params.is_quark_site(j) else 2
    return basis_state(config)


# --- Krylov propagation ------------------------------------------------------


def expm_krylov(apply_h, v: np.ndarray, dt: float, tol: float = 1e-10,
                max_dim: int = 40) -> np.ndarray:
    """Lanczos approximation of exp(-1j*dt*H) v for Hermitian H.

    The subspace dimension grows adaptively; the a-posteriori residual
    estimate beta_m * |<e_m| exp(-i dt T_m) |e_1>| must drop below tol.
    """
    nrm = np.linalg.norm(v)
    if nrm == 0 or dt == 0:
        return v.copy()
    dim = len(v)
    m_cap = min(max_dim, dim)
    V = np.empty((m_cap, dim), dtype=complex)
    alpha = np.empty(m_cap)
    beta = np.empty(m_cap)
    V[0] = v / nrm
    w = apply_h(V[0])
    alpha[0] = np.vdot(V[0], w).real
    w = w - alpha[0] * V[0]
    for j in range(1, m_cap + 1):
        # Evaluate the exponential in the current j-dimensional subspace.
        evals, evecs = eigh_tridiagonal(alpha[:j], beta[: j - 1])
        small = evecs @ (np.exp(-1j * dt * evals) * evecs[0].conj()).T
        b = np.linalg.norm(w)
        err = b * abs(small[-1])
        if err < tol or b < 1e-14 or j == dim:
            return nrm * (small @ V[:j])
        if j == m_cap:
            break
        beta[j - 1] = b
        V[j] = w / b
        w = apply_h(V[j])
        alpha[j] = np.vdot(V[j], w).real
        w = w - alpha[j] * V[j] - b * V[j - 1]
        # Full reorthogonalization keeps long steps stable; cheap for m <= 40.
        w -= V[: j + 1].T @ (V[: j + 1].conj() @ w)
    raise KrylovError(
        f"Krylov exponential did not converge within {m_cap} vectors (err={err:.2e})"
    )


def evolve(state: QuditState, H: ManyBodyOperator, t_grid: np.ndarray,
           tol: float = 1e-10, max_dim: int = 40) -> list[QuditState]:
    """Exact trajectory |Psi(t)> on a monotone time grid (Krylov exponential)."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0:
        raise ValueError("time grid must be a non-empty 1d array")
    if np.any(np.diff(t_grid) <= 0) and len(t_grid) > 1:
        raise ValueError("time grid must be strictly increasing")
    if H.N != state.N:
        raise ValueError("Hamiltonian and state site counts differ")
    psi = state.amps.copy()
    out = []
    t_prev = 0.0
    for t in t_grid:
        dt = t - t_prev
        if dt != 0.0:
            psi = expm_krylov(H.apply, psi, dt, tol=tol, max_dim=max_dim)
            psi /= np.linalg.norm(psi)
        out.append(QuditState(state.N, psi.copy()))
        t_prev = t
    return out


# --- Observables -------------------------------------------------------------


@dataclass
class ObservableSeries:
    """Time-indexed densities and probabilities measured on a trajectory."""

    times: np.ndarray
    p_s: np.ndarray              # (T, N) single-occupancy probability per site
    p_d: np.ndarray              # (T, N) double-occupancy probability per site
    rho: np.ndarray              # (T,) total particle density
    rho_s: np.ndarray
    rho_d: np.ndarray
    rho_diff: np.ndarray         # rho_d - rho_s
    n_b: np.ndarray              # (T,) baryon number <N_b>
    rho_s_str: np.ndarray | None = None
    rho_d_str: np.ndarray | None = None
    rho_e_str: np.ndarray | None = None
    fidelity: np.ndarray | None = None

    @property
    def n_sites(self) -> int:
        return self.p_s.shape[1]


def site_marginals(state: QuditState) -> np.ndarray:
    """(N, 6) per-site level probabilities."""
    prob = np.abs(state.tensor()) ** 2
    marg = np.empty((state.N, LEVELS))
    for n in range(state.N):
        axes = tuple(a for a in range(state.N) if a != n)
        marg[n] = prob.sum(axis=axes)
    return marg


def measure(trajectory: list[QuditState], params: ModelParams,
            times: np.ndarray | None = None,
            string_window: tuple[int, int] | None = None) -> ObservableSeries:
    """Occupancy and baryon densities measured along a trajectory.

    string_window = (n_s, l) activates the string-averaged channels: single
    and double occupancy averaged over sites n_s..n_s+l with a 1/(2(l+1))
    prefactor, and the electric-field density over the l links with 1/(2l).
    """
    N = params.N
    T = len(trajectory)
    times = np.arange(T, dtype=float) if times is None else np.asarray(times, dtype=float)
    p_s = np.empty((T, N))
    p_d = np.empty((T, N))
    n_b = np.empty(T)
    rho_e = np.empty(T) if string_window else None
    m_diag = np.diag(cm.M)
    for t, st in enumerate(trajectory):
        marg = site_marginals(st)
        p_s[t] = marg[:, 2] + marg[:, 3]
        for n in range(1, N + 1):
            if params.is_quark_site(n):
                p_d[t, n - 1] = marg[n - 1, 4] + marg[n - 1, 5]
            else:
                p_d[t, n - 1] = marg[n - 1, 0] + marg[n - 1, 1]
        n_b[t] = 0.5 * float(np.sum(marg @ m_diag - 1.0))
        if string_window:
            n_s, length = string_window
            acc = 0.0
            for n in range(n_s, n_s + length):
                left = marg[n - 1]
                right = marg[n]
                acc += left[1] + left[3] + left[5] + right[1] + right[2] + right[5]
            rho_e[t] = acc / (2.0 * length)
    rho_s = p_s.sum(axis=1) / (2.0 * N)
    rho_d = p_d.sum(axis=1) / (2.0 * N)
    series = ObservableSeries(
        times=times, p_s=p_s, p_d=p_d,
        rho=rho_s + rho_d, rho_s=rho_s, rho_d=rho_d,
        rho_diff=rho_d - rho_s, n_b=n_b,
    )
    if string_window:
        n_s, length = string_window
        sl = slice(n_s - 1, n_s + length)
        series.rho_s_str = p_s[:, sl].sum(axis=1) / (2.0 * (length + 1))
        series.rho_d_str = p_d[:, sl].sum(axis=1) / (2.0 * (length + 1))
        series.rho_e_str = rho_e
    return series


def vacuum_subtract(series_a: ObservableSeries, series_b: ObservableSeries) -> ObservableSeries:
    """Pointwise difference of two series measured on identical time grids."""
    if series_a.p_s.shape != series_b.p_s.shape or not np.allclose(
        series_a.times, series_b.times, rtol=0, atol=1e-12
    ):
        raise ValueError("time grids do not match")

    def sub(x, y):
        if x is None or y is None:
            return None
        return x - y

    return ObservableSeries(
        times=series_a.times.copy(),
        p_s=series_a.p_s - series_b.p_s,
        p_d=series_a.p_d - series_b.p_d,
        rho=series_a.rho - series_b.rho,
        rho_s=series_a.rho_s - series_b.rho_s,
        rho_d=series_a.rho_d - series_b.rho_d,
        rho_diff=series_a.rho_diff - series_b.rho_diff,
        n_b=series_a.n_b - series_b.n_b,
        rho_s_str=sub(series_a.rho_s_str, series_b.rho_s_str),
        rho_d_str=sub(series_a.rho_d_str, series_b.rho_d_str),
        rho_e_str=sub(series_a.rho_e_str, series_b.rho_e_str),
        fidelity=series_a.fidelity,
    )


def fidelity(pure: np.ndarray, rho: np.ndarray) -> float:
    """<Psi| rho |Psi> for a pure reference state and a density operator."""
    pure = np.asarray(pure)
    rho = np.asarray(rho)
    if rho.shape != (len(pure), len(pure)):
        raise ValueError("dimension mismatch between state and density operator")
    val = float(np.real(np.vdot(pure, rho @ pure)))
    return min(max(val, 0.0), 1.0)


def overlap_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2 for two pure states."""
    if len(a) != len(b):
        raise ValueError("dimension mismatch")
    return float(abs(np.vdot(a, b)) ** 2)
