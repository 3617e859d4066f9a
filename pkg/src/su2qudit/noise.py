"""Static magnetic-field noise ensembles, the performance estimator, and
link-parity post-selection (destructive shot filtering and the non-destructive
ancilla protocol).

The noise model is infinitely correlated in time and space: each realization
draws one Zeeman coupling b from a flat distribution over [-delta_b, delta_b]
and adds H_Z = -b * sum_n F_n, with F = diag(-3w, -w, -1, 1, w, 3w), for the
whole evolution.  Draws come from a counter-based Philox generator keyed by
the ensemble seed; realization i consumes the i-th variate of that stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import core_model as cm
from . import digital_engine as de
from . import exact_engine as ee
from .core_model import LEVELS, ModelParams
from .digital_engine import GateScheme, PhononConfig, TrotterPlan
from .exact_engine import ObservableSeries, QuditState


@dataclass(frozen=True)
class NoiseEnsemble:
    """Uniform static level-shift noise: b_r ~ U[-delta_b, delta_b]."""

    delta_b: float
    w: float = 0.6
    realizations: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.delta_b < 0:
            raise ValueError("noise half-width delta_b must be non-negative")
        if self.realizations < 1:
            raise ValueError("need at least one realization")

    def draws(self) -> np.ndarray:
        """The b values of every realization (deterministic given the seed)."""
        rng = np.random.Generator(np.random.Philox(key=self.seed))
        return rng.uniform(-self.delta_b, self.delta_b, size=self.realizations)


@dataclass
class NoiseResult:
    """Ensemble-averaged observables and per-realization fidelities."""

    series: ObservableSeries            # observables averaged over realizations
    fidelities: np.ndarray              # (realizations, n_times) vs noiseless exact
    b_values: np.ndarray

    @property
    def mean_fidelity(self) -> np.ndarray:
        return self.fidelities.mean(axis=0)

    @property
    def std_fidelity(self) -> np.ndarray:
        return self.fidelities.std(axis=0)


def _average_series(series_list: list[ObservableSeries]) -> ObservableSeries:
    def mean(attr):
        vals = [getattr(s, attr) for s in series_list]
        if any(v is None for v in vals):
            return None
        return np.mean(vals, axis=0)

    return ObservableSeries(
        times=series_list[0].times.copy(),
        p_s=mean("p_s"), p_d=mean("p_d"), rho=mean("rho"),
        rho_s=mean("rho_s"), rho_d=mean("rho_d"), rho_diff=mean("rho_diff"),
        n_b=mean("n_b"), rho_s_str=mean("rho_s_str"), rho_d_str=mean("rho_d_str"),
        rho_e_str=mean("rho_e_str"), fidelity=mean("fidelity"),
    )


def run_noisy_ensemble(init: QuditState, params: ModelParams,
                       ensemble: NoiseEnsemble,
                       plan: TrotterPlan | None = None,
                       scheme: GateScheme = GateScheme.IDEAL_EFFECTIVE,
                       cfg: PhononConfig | None = None,
                       times: np.ndarray | None = None,
                       string_window: tuple[int, int] | None = None) -> NoiseResult:
    """Evolve every noise realization and average observables and fidelity.

    With a Trotter plan the Zeeman shift folds into the diagonal correction
    layer of the digital circuit; without one the exact engine evolves under
    H + H_Z.  Fidelity is always scored against the noiseless exact
    trajectory on the same time grid.
    """
    if plan is not None:
        times = plan.times()
    elif times is None:
        raise ValueError("exact-engine ensembles need an explicit time grid")
    times = np.asarray(times, dtype=float)

    # Noiseless exact reference, shared across realizations.
    h0 = cm.build_hamiltonian(params)
    nonzero = times[times > 0]
    reference = [init.copy()] * int(np.sum(times == 0.0)) + (
        ee.evolve(init, h0, nonzero) if len(nonzero) else []
    )

    all_series = []
    fids = np.empty((ensemble.realizations, len(times)))
    for r, b in enumerate(ensemble.draws()):
        if plan is not None:
            res = de.trotter_run(init, params, plan, scheme, cfg,
                                 reference=reference, zeeman_b=float(b),
                                 zeeman_w=ensemble.w)
            traj = res.states
            fids[r] = res.fidelity
        else:
            h = h0 + cm.build_zeeman(params, float(b), ensemble.w) if b != 0.0 else h0
            traj = [init.copy()] * int(np.sum(times == 0.0)) + (
                ee.evolve(init, h, nonzero) if len(nonzero) else []
            )
            fids[r] = [ee.overlap_fidelity(ref.amps, st.amps)
                       for ref, st in zip(reference, traj)]
        series = ee.measure(traj, params, times, string_window)
        series.fidelity = fids[r].copy()
        all_series.append(series)

    return NoiseResult(series=_average_series(all_series), fidelities=fids,
                       b_values=ensemble.draws())


def performance(fidelity_t: float, f_ms: float, n_gates: int) -> float:
    """Overall simulation performance P = F(t) * F_MS^N_gates."""
    if not 0.0 <= f_ms <= 1.0:
        raise ValueError("single-gate fidelity must lie in [0, 1]")
    if n_gates < 0:
        raise ValueError("gate count must be non-negative")
    return float(fidelity_t * f_ms**n_gates)


# --- destructive post-selection ------------------------------------------------


@dataclass
class ShotRecord:
    """Sampled per-site level strings with their link-parity verdicts."""

    levels: np.ndarray                     # (shots, N) ints in 1..6
    bond_ok: np.ndarray = field(init=False)  # (shots, N-1) booleans
    accepted: np.ndarray = field(init=False)  # (shots,) booleans

    def __post_init__(self):
        levels = np.asarray(self.levels)
        if levels.ndim != 2 or levels.shape[1] < 2:
            raise ValueError("shot array must be (shots, N>=2)")
        if levels.size and (levels.min() < 1 or levels.max() > LEVELS):
            raise ValueError("levels must lie in 1..6")
        self.levels = levels
        dl = np.diag(cm.DL)
        dr = np.diag(cm.DR)
        self.bond_ok = dl[levels[:, :-1] - 1] * dr[levels[:, 1:] - 1] > 0
        self.accepted = self.bond_ok.all(axis=1)

    @property
    def n_shots(self) -> int:
        return self.levels.shape[0]


def sample_shots(state: QuditState, n_shots: int, seed: int = 0) -> ShotRecord:
    """Sample computational-basis level strings from the Born distribution."""
    probs = np.abs(state.amps) ** 2
    probs = probs / probs.sum()
    rng = np.random.Generator(np.random.Philox(key=seed))
    idx = rng.choice(len(probs), size=n_shots, p=probs)
    levels = np.stack(np.unravel_index(idx, (LEVELS,) * state.N), axis=1) + 1
    return ShotRecord(levels)


def parity_filter(shots: ShotRecord) -> tuple[ShotRecord, float]:
    """Keep only shots whose every link satisfies D^L * D^R = +1."""
    if shots.n_shots == 0:
        raise ValueError("cannot filter an empty shot record")
    kept = ShotRecord(shots.levels[shots.accepted])
    return kept, float(shots.accepted.mean())


# --- non-destructive ancilla protocol --------------------------------------------


def _bond_parity_projectors(N: int, bond: int):
    op = cm.bond_operator(N, bond, cm.DL, cm.DR)

    def project(amps: np.ndarray, sign: int) -> np.ndarray:
        return 0.5 * (amps + sign * op.apply(amps))

    return project


def ancilla_parity_round(state: QuditState, bond: int,
                         outcome: int | None = None,
                         rng: np.random.Generator | None = None,
                         apply_correction: bool = False
                         ) -> tuple[QuditState, int, float]:
    """One non-destructive link-parity check on a bond.

    Models the ancilla-mediated measurement of D^L_n D^R_{n+1}: the down
    outcome (+1 sector) projects onto the physical component, the up outcome
    (-1 sector) flags leakage; both post-measurement states are renormalized.
    Returns (state, outcome, probability) with outcome 0 for down / 1 for up.
    If the outcome is not forced it is sampled (rng required when both
    branches have weight).  apply_correction follows an up outcome with the
    cyclic level-shift gate on the left qudit of the bond.
    """
    project = _bond_parity_projectors(state.N, bond)
    down = project(state.amps, +1)
    p_down = float(np.linalg.norm(down) ** 2)
    if outcome is None:
        if p_down > 1.0 - 1e-12:
            outcome = 0
        elif p_down < 1e-12:
            outcome = 1
        elif rng is None:
            raise ValueError("sampling a mixed-parity state requires an rng")
        else:
            outcome = int(rng.random() >= p_down)
    prob = p_down if outcome == 0 else 1.0 - p_down
    if prob < 1e-12:
        raise ValueError("requested ancilla outcome has zero probability")
    amps = down if outcome == 0 else project(state.amps, -1)
    amps = amps / np.linalg.norm(amps)
    out = QuditState(state.N, amps)
    if outcome == 1 and apply_correction:
        flip = cm.site_operator(state.N, bond, cm.XCYC)
        out = QuditState(state.N, flip.apply(out.amps))
    return out, outcome, prob
