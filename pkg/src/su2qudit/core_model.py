"""Operator matrices of the six-level dressed-site model and Hamiltonian assembly.

All quantities are dimensionless (natural units fixed by the hopping term).
Sites are indexed 1..N.  With the default ``stagger_offset = 0`` the staggered
sign is (-1)^n, so odd sites carry negative mass and host the doubly occupied
Dirac-sea level |5>, while even sites are "quark" sites whose vacuum level is
|1> and where baryons and strings start.  ``stagger_offset = 1`` swaps the two
sublattices.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np
import scipy.sparse as sp

LEVELS = 6
SQRT2 = sqrt(2.0)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _hermitian_pairs(entries, dtype=complex) -> np.ndarray:
    """Build a 6x6 matrix from upper-triangle entries {(row, col): value} + h.c."""
    m = np.zeros((LEVELS, LEVELS), dtype=dtype)
    for (i, j), v in entries.items():
        m[i - 1, j - 1] = v
        m[j - 1, i - 1] = np.conj(v)
    return m


# Hopping factor matrices (nearest-neighbor term A1_n B1_{n+1} + A2_n B2_{n+1}).
A1 = _freeze(_hermitian_pairs({(1, 4): SQRT2, (2, 3): 1.0, (3, 6): 1.0, (4, 5): SQRT2}))
A2 = _freeze(_hermitian_pairs({(1, 4): SQRT2 * 1j, (2, 3): 1j, (3, 6): 1j, (4, 5): SQRT2 * 1j}))
B1 = _freeze(_hermitian_pairs({(1, 3): -SQRT2 * 1j, (2, 4): -1j, (3, 5): -SQRT2 * 1j, (4, 6): -1j}))
B2 = _freeze(_hermitian_pairs({(1, 3): SQRT2, (2, 4): 1.0, (3, 5): SQRT2, (4, 6): 1.0}))

# Diagonal matrices: matter number, chromoelectric energy, link parity factors.
M = _freeze(np.diag([0.0, 0.0, 1.0, 1.0, 2.0, 2.0]))
C = _freeze(np.diag([0.0, 2.0, 1.0, 1.0, 0.0, 2.0]))
DL = _freeze(np.diag([1.0, -1.0, 1.0, -1.0, 1.0, -1.0]))
DR = _freeze(np.diag([1.0, -1.0, -1.0, 1.0, 1.0, -1.0]))

# Single-qudit corrections absorbed by the diagonal layer of the digital scheme.
HA2 = _freeze(np.diag([2.0, 1.0, 2.0, 4.0, 2.0, 1.0]))
HB2 = _freeze(np.diag([2.0, 1.0, 4.0, 2.0, 2.0, 1.0]))

# Gauge-invariant ladder factors (A1 = QL + QL^dag, A2 = i(QL - QL^dag), ...).
_QL = np.zeros((LEVELS, LEVELS), dtype=complex)
_QL[0, 3] = SQRT2
_QL[1, 2] = 1.0
_QL[2, 5] = 1.0
_QL[3, 4] = SQRT2
QL = _freeze(_QL)

_QR = np.zeros((LEVELS, LEVELS), dtype=complex)
_QR[0, 2] = SQRT2
_QR[1, 3] = 1.0
_QR[2, 4] = SQRT2
_QR[3, 5] = 1.0
QR = _freeze(-1j * _QR)

# Even-site basis rotation: U A^(k) U^dag = -B^(k), U B^(k) U^dag = A^(k),
# while M and C are left untouched.  Note UROT^2 = -(-1)^M, i.e. applying the
# rotation twice multiplies each level by -1 except the singly occupied ones.
_UROT = np.zeros((LEVELS, LEVELS), dtype=complex)
_UROT[0, 0] = 1j
_UROT[1, 1] = 1j
_UROT[2, 3] = 1.0
_UROT[3, 2] = 1.0
_UROT[4, 4] = -1j
_UROT[5, 5] = -1j
UROT = _freeze(_UROT)

# Cyclic level-shift gate used after a failed ancilla parity check.
XCYC = _freeze(np.roll(np.eye(LEVELS), 1, axis=0))

# Rishon occupation-number matrix on the 3-dimensional rishon space {0, r, g}.
K_RISHON = _freeze(np.diag([0.0, 1.0, 1.0]))


def zeeman_moment(w: float) -> np.ndarray:
    """Dimensionless magnetic-moment matrix F = diag(-3w, -w, -1, 1, w, 3w)."""
    if w <= 0:
        raise ValueError("moment ratio w must be positive")
    return np.diag([-3.0 * w, -w, -1.0, 1.0, w, 3.0 * w])


def site_matrices(w: float = 0.6) -> dict[str, np.ndarray]:
    """Catalog of all tagged 6x6 (and rishon 3x3) operator matrices."""
    return {
        "A1": A1, "A2": A2, "B1": B1, "B2": B2,
        "M": M, "C": C, "DL": DL, "DR": DR,
        "HA2": HA2, "HB2": HB2,
        "QL": QL, "QR": QR,
        "F": zeeman_moment(w),
        "Urot": UROT, "X": XCYC, "K": K_RISHON,
    }


@dataclass(frozen=True)
class ModelParams:
    """Lattice size and dimensionless couplings of the effective model."""

    N: int
    m: float = 0.0
    g2: float = 0.0
    stagger_offset: int = 0

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"need at least 2 sites, got N={self.N}")
        if not (np.isfinite(self.m) and np.isfinite(self.g2)):
            raise ValueError("mass and coupling must be finite")
        if self.stagger_offset not in (0, 1):
            raise ValueError("stagger_offset must be 0 or 1")

    def stagger_sign(self, n: int) -> int:
        """Staggered sign (-1)^n of site n (1-based), shifted by the offset."""
        return -1 if (n + self.stagger_offset) % 2 == 1 else 1

    def is_quark_site(self, n: int) -> bool:
        """Quark-sublattice sites have vacuum level |1> and positive mass sign."""
        return self.stagger_sign(n) == 1

    def vacuum_levels(self) -> list[int]:
        """Dirac-sea configuration: |5> on antiquark sites, |1> on quark sites."""
        return [1 if self.is_quark_site(n) else 5 for n in range(1, self.N + 1)]


class ManyBodyOperator:
    """Hermitian-or-not sparse operator on the 6^N dressed-site space."""

    def __init__(self, N: int, matrix: sp.spmatrix):
        self.N = N
        self.dim = LEVELS**N
        if matrix.shape != (self.dim, self.dim):
            raise ValueError("matrix dimension does not match 6^N")
        self.matrix = matrix.tocsr()

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def expectation(self, vec: np.ndarray) -> float:
        return float(np.real(np.vdot(vec, self.matrix @ vec)))

    def __add__(self, other: "ManyBodyOperator") -> "ManyBodyOperator":
        if other.N != self.N:
            raise ValueError("site-count mismatch")
        return ManyBodyOperator(self.N, self.matrix + other.matrix)


def _kron_chain(N: int, placed: dict[int, np.ndarray]) -> sp.spmatrix:
    """Kronecker product over N sites with 6x6 factors at 1-based positions."""
    out = None
    for n in range(1, N + 1):
        f = sp.csr_matrix(placed.get(n, sp.identity(LEVELS, format="csr")))
        out = f if out is None else sp.kron(out, f, format="csr")
    return out


def site_operator(N: int, n: int, op: np.ndarray) -> ManyBodyOperator:
    """Embed a single-site operator at site n (1-based) into the 6^N space."""
    if not 1 <= n <= N:
        raise ValueError(f"site {n} outside 1..{N}")
    return ManyBodyOperator(N, _kron_chain(N, {n: sp.csr_matrix(op)}))


def bond_operator(N: int, n: int, op_left: np.ndarray, op_right: np.ndarray) -> ManyBodyOperator:
    """Embed op_left_n (x) op_right_{n+1} on bond (n, n+1) into the 6^N space."""
    if not 1 <= n <= N - 1:
        raise ValueError(f"bond ({n},{n + 1}) outside the open chain")
    return ManyBodyOperator(
        N, _kron_chain(N, {n: sp.csr_matrix(op_left), n + 1: sp.csr_matrix(op_right)})
    )


def diagonal_1site_energies(params: ModelParams, b: float = 0.0, w: float = 0.6) -> list[np.ndarray]:
    """Per-site diagonal of m(-1)^n M + g^2 C - b F, as length-6 real vectors."""
    f = np.diag(zeeman_moment(w)) if b != 0.0 else np.zeros(LEVELS)
    return [
        params.m * params.stagger_sign(n) * np.diag(M) + params.g2 * np.diag(C) - b * f
        for n in range(1, params.N + 1)
    ]


def diagonal_vector(N: int, site_diags: list[np.ndarray]) -> np.ndarray:
    """Sum of per-site diagonal terms as a length-6^N vector."""
    out = np.zeros((LEVELS,) * N)
    for n, d in enumerate(site_diags, start=1):
        shape = [1] * N
        shape[n - 1] = LEVELS
        out += np.reshape(d, shape)
    return out.ravel()


def build_hamiltonian(params: ModelParams) -> ManyBodyOperator:
    """Effective Hamiltonian: hopping on every bond plus staggered mass and coupling."""
    N = params.N
    # Hopping on one bond, combined over both quadratures (32 nonzeros per bond).
    hop36 = sp.csr_matrix(np.kron(A1, B1) + np.kron(A2, B2))
    terms = []
    for n in range(1, N):
        left = sp.identity(LEVELS ** (n - 1), format="csr", dtype=complex)
        right = sp.identity(LEVELS ** (N - n - 1), format="csr", dtype=complex)
        terms.append(sp.kron(sp.kron(left, hop36, format="csr"), right, format="csr"))
    h = sum(terms[1:], start=terms[0])
    diag = diagonal_vector(N, diagonal_1site_energies(params))
    h = h + sp.diags(diag.astype(complex), format="csr")
    return ManyBodyOperator(N, h)


def build_zeeman(params: ModelParams, b: float, w: float = 0.6) -> ManyBodyOperator:
    """Uniform Zeeman shift -b * sum_n F_n with F = diag(-3w,-w,-1,1,w,3w)."""
    if not np.isfinite(b):
        raise ValueError("Zeeman coupling b must be finite")
    f = np.diag(zeeman_moment(w))
    diag = diagonal_vector(params.N, [-b * f] * params.N)
    return ManyBodyOperator(params.N, sp.diags(diag.astype(complex), format="csr"))


def bare_energy(config: list[int], params: ModelParams) -> float:
    """Diagonal energy of a level configuration relative to the Dirac vacuum."""
    if len(config) != params.N:
        raise ValueError("configuration length must equal N")
    for lev in config:
        if not 1 <= lev <= LEVELS:
            raise ValueError(f"invalid level index {lev}")
    m_diag = np.diag(M)
    c_diag = np.diag(C)

    def diag_energy(levels):
        return sum(
            params.m * params.stagger_sign(n) * m_diag[l - 1] + params.g2 * c_diag[l - 1]
            for n, l in enumerate(levels, start=1)
        )

    return float(diag_energy(config) - diag_energy(params.vacuum_levels()))


def rotate_basis_even_sites(obj, params: ModelParams):
    """Conjugate an operator (or rotate a state) by Urot on even sites only.

    Applying the rotation twice multiplies each even-site level by -(-1)^M,
    which reduces to a global phase on states of definite even-sublattice
    matter parity (all basis configurations qualify).
    """
    placed = {n: UROT for n in range(2, params.N + 1, 2)}
    u = _kron_chain(params.N, placed)
    if isinstance(obj, ManyBodyOperator):
        return ManyBodyOperator(params.N, u @ obj.matrix @ u.conj().T)
    vec = np.asarray(obj)
    return u @ vec


# --- Two-level decomposition of the hopping factors -------------------------


@dataclass(frozen=True)
class TwoLevelGenerator:
    """A single weighted two-level term sign * weight * sigma^{s1,s2}_axis."""

    s1: int
    s2: int
    axis: str
    weight: float = 1.0
    sign: int = 1

    def __post_init__(self):
        if not (1 <= self.s1 < self.s2 <= LEVELS):
            raise ValueError("need 1 <= s1 < s2 <= 6")
        if self.axis not in ("x", "y"):
            raise ValueError("axis must be 'x' or 'y'")

    def matrix(self) -> np.ndarray:
        m = np.zeros((LEVELS, LEVELS), dtype=complex)
        upper = 1.0 if self.axis == "x" else -1j
        m[self.s1 - 1, self.s2 - 1] = upper
        m[self.s2 - 1, self.s1 - 1] = np.conj(upper)
        return self.sign * self.weight * m


def _gens(axis: str, sign: int, pairs) -> list[TwoLevelGenerator]:
    return [TwoLevelGenerator(s1, s2, axis, w, sign) for (s1, s2, w) in pairs]


_A_PAIRS_1 = [(2, 3, 1.0), (1, 4, SQRT2)]
_A_PAIRS_2 = [(3, 6, 1.0), (4, 5, SQRT2)]
_B_PAIRS_1 = [(4, 6, 1.0), (1, 3, SQRT2)]
_B_PAIRS_2 = [(2, 4, 1.0), (3, 5, SQRT2)]


def hopping_generators(scheme: str) -> dict[str, list[list[TwoLevelGenerator]]]:
    """Two-level generator groupings of A1, A2, B1, B2 for a gate scheme.

    Returns, per operator tag, a list of groups; each group is the set of
    transitions driven simultaneously.  'TwoLevel' yields four singleton
    groups, 'DisjointPair' the alpha/beta split into two disjoint transitions
    per group, and 'FullMS' a single group of all four transitions.
    """
    full = {
        "A1": _gens("x", 1, _A_PAIRS_1) + _gens("x", 1, _A_PAIRS_2),
        "A2": _gens("y", -1, _A_PAIRS_1) + _gens("y", -1, _A_PAIRS_2),
        "B1": _gens("y", 1, _B_PAIRS_1) + _gens("y", 1, _B_PAIRS_2),
        "B2": _gens("x", 1, _B_PAIRS_1) + _gens("x", 1, _B_PAIRS_2),
    }
    if scheme == "FullMS":
        return {tag: [gens] for tag, gens in full.items()}
    if scheme == "DisjointPair":
        return {tag: [gens[:2], gens[2:]] for tag, gens in full.items()}
    if scheme == "TwoLevel":
        return {tag: [[g] for g in gens] for tag, gens in full.items()}
    raise ValueError(f"unknown scheme {scheme!r}")


def generator_sum(groups: list[list[TwoLevelGenerator]]) -> np.ndarray:
    return sum(g.matrix() for group in groups for g in group)
