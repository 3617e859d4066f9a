import numpy as np
import pytest
from scipy.linalg import expm

from su2qudit import core_model as cm
from su2qudit import exact_engine as ee


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=1234))


def dense_evolve(params: cm.ModelParams, init: np.ndarray, t: float) -> np.ndarray:
    """Reference propagation by dense matrix exponential (small N only)."""
    h = cm.build_hamiltonian(params).to_dense()
    return expm(-1j * t * h) @ init


def random_physical_state(params: cm.ModelParams, rng) -> ee.QuditState:
    """Random state projected onto the +1 sector of every link parity."""
    amps = rng.normal(size=cm.LEVELS**params.N) + 1j * rng.normal(size=cm.LEVELS**params.N)
    for bond in range(1, params.N):
        op = cm.bond_operator(params.N, bond, cm.DL, cm.DR)
        amps = 0.5 * (amps + op.apply(amps))
    amps /= np.linalg.norm(amps)
    return ee.QuditState(params.N, amps)
