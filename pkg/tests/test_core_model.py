"""Oracle tests for the frozen single-site matrix catalog and operator plumbing.

The expected matrices below are written out literally and independently of the
package source so that any drift in the frozen catalog is caught.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from su2qudit import core_model as cm

SQRT2 = np.sqrt(2.0)


def _from_pairs(entries):
    m = np.zeros((6, 6), dtype=complex)
    for i, j, v in entries:
        m[i - 1, j - 1] = v
    return m


# Independent literal transcriptions of the catalog.
QL_EXPECTED = _from_pairs([(1, 4, SQRT2), (2, 3, 1.0), (3, 6, 1.0), (4, 5, SQRT2)])
QR_EXPECTED = -1j * _from_pairs([(1, 3, SQRT2), (2, 4, 1.0), (3, 5, SQRT2), (4, 6, 1.0)])
M_EXPECTED = np.diag([0.0, 0.0, 1.0, 1.0, 2.0, 2.0])
C_EXPECTED = np.diag([0.0, 2.0, 1.0, 1.0, 0.0, 2.0])
DL_EXPECTED = np.diag([1.0, -1.0, 1.0, -1.0, 1.0, -1.0])
DR_EXPECTED = np.diag([1.0, -1.0, -1.0, 1.0, 1.0, -1.0])
HA2_EXPECTED = np.diag([2.0, 1.0, 2.0, 4.0, 2.0, 1.0])
HB2_EXPECTED = np.diag([2.0, 1.0, 4.0, 2.0, 2.0, 1.0])


class TestCatalog:
    def test_hopping_blocks_from_ladder_operators(self):
        assert np.allclose(cm.QL, QL_EXPECTED, atol=0)
        assert np.allclose(cm.QR, QR_EXPECTED, atol=0)
        assert np.allclose(cm.A1, QL_EXPECTED + QL_EXPECTED.conj().T, atol=0)
        assert np.allclose(cm.A2, 1j * (QL_EXPECTED - QL_EXPECTED.conj().T), atol=0)
        assert np.allclose(cm.B1, QR_EXPECTED + QR_EXPECTED.conj().T, atol=0)
        assert np.allclose(cm.B2, 1j * (QR_EXPECTED - QR_EXPECTED.conj().T), atol=0)

    def test_diagonal_matrices(self):
        assert np.array_equal(cm.M, M_EXPECTED)
        assert np.array_equal(cm.C, C_EXPECTED)
        assert np.array_equal(cm.DL, DL_EXPECTED)
        assert np.array_equal(cm.DR, DR_EXPECTED)
        assert np.array_equal(cm.HA2, HA2_EXPECTED)
        assert np.array_equal(cm.HB2, HB2_EXPECTED)

    def test_hopping_blocks_hermitian(self):
        for op in (cm.A1, cm.A2, cm.B1, cm.B2):
            assert np.allclose(op, op.conj().T, atol=0)

    def test_correction_identity(self):
        # (A1)^2 + (A2)^2 and (B1)^2 + (B2)^2 are twice the diagonal byproducts.
        lhs_a = cm.A1 @ cm.A1 + cm.A2 @ cm.A2
        lhs_b = cm.B1 @ cm.B1 + cm.B2 @ cm.B2
        assert np.allclose(lhs_a, 2.0 * HA2_EXPECTED, atol=1e-12)
        assert np.allclose(lhs_b, 2.0 * HB2_EXPECTED, atol=1e-12)
        assert np.max(np.abs(lhs_a - np.diag(np.diag(lhs_a)))) < 1e-12
        assert np.max(np.abs(lhs_b - np.diag(np.diag(lhs_b)))) < 1e-12

    def test_hopping_blocks_commute_with_link_parity(self):
        # [A (x) B, DL (x) DR] = 0 is the per-gate link-law conservation.
        parity = np.kron(cm.DL, cm.DR)
        for a, b in ((cm.A1, cm.B1), (cm.A2, cm.B2)):
            g = np.kron(a, b)
            assert np.max(np.abs(g @ parity - parity @ g)) < 1e-12

    def test_zeeman_moment(self):
        w = 0.6
        assert np.array_equal(cm.zeeman_moment(w),
                              np.diag([-3 * w, -w, -1.0, 1.0, w, 3 * w]))

    def test_site_matrices_bundle(self):
        mats = cm.site_matrices()
        for tag, ref in (("A1", cm.A1), ("M", M_EXPECTED), ("C", C_EXPECTED)):
            assert np.array_equal(mats[tag], ref)


class TestModelParams:
    def test_stagger_and_vacuum(self):
        p = cm.ModelParams(N=4, m=1.0, g2=1.0)
        # Default offset: odd sites are the antiquark sublattice (Dirac sea |5>).
        assert p.vacuum_levels() == [5, 1, 5, 1]
        assert not p.is_quark_site(1) and p.is_quark_site(2)
        assert [p.stagger_sign(n) for n in (1, 2, 3, 4)] == [-1, 1, -1, 1]

    def test_stagger_offset_shifts_sublattice(self):
        p = cm.ModelParams(N=3, m=1.0, g2=1.0, stagger_offset=1)
        assert p.vacuum_levels() == [1, 5, 1]

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            cm.ModelParams(N=0, m=1.0, g2=1.0)


class TestOperators:
    def test_site_operator_matches_dense_kron(self):
        N = 2
        op = cm.site_operator(N, 2, cm.A1)
        expected = np.kron(np.eye(6), cm.A1)
        assert np.allclose(op.to_dense(), expected, atol=0)

    def test_bond_operator_matches_dense_kron(self):
        N = 3
        op = cm.bond_operator(N, 1, cm.A1, cm.B1)
        expected = np.kron(np.kron(cm.A1, cm.B1), np.eye(6))
        assert np.allclose(op.to_dense(), expected, atol=0)

    def test_hamiltonian_hermitian_and_real_spectrum_floor(self):
        p = cm.ModelParams(N=2, m=0.7, g2=1.3)
        h = cm.build_hamiltonian(p).to_dense()
        assert np.allclose(h, h.conj().T, atol=1e-14)

    def test_hamiltonian_diagonal_matches_bare_energy(self):
        p = cm.ModelParams(N=3, m=0.9, g2=1.7)
        h = cm.build_hamiltonian(p)
        diag = h.to_dense().diagonal().real
        vac = p.vacuum_levels()
        vac_idx = int(np.ravel_multi_index([l - 1 for l in vac], (6, 6, 6)))
        # Hopping terms are purely off-diagonal, so the diagonal of H is the
        # bare (mass + coupling) energy of each configuration; bare_energy is
        # quoted relative to the Dirac vacuum.
        idx = 0
        for l1 in range(1, 7):
            for l2 in range(1, 7):
                for l3 in range(1, 7):
                    assert diag[idx] - diag[vac_idx] == pytest.approx(
                        cm.bare_energy([l1, l2, l3], p), abs=1e-12)
                    idx += 1

    def test_zeeman_term(self):
        p = cm.ModelParams(N=2, m=0.0, g2=0.0)
        hz = cm.build_zeeman(p, b=0.5, w=0.6).to_dense()
        f = cm.zeeman_moment(0.6)
        expected = -0.5 * (np.kron(f, np.eye(6)) + np.kron(np.eye(6), f))
        assert np.allclose(hz, expected, atol=0)


class TestBareEnergies:
    def test_vacuum_is_bare_ground_configuration(self):
        p = cm.ModelParams(N=4, m=2.0, g2=3.0)
        e_vac = cm.bare_energy(p.vacuum_levels(), p)
        # Every single-site excitation of the vacuum raises the bare energy.
        for n in range(4):
            for level in range(1, 7):
                cfg = p.vacuum_levels()
                if cfg[n] == level:
                    continue
                cfg[n] = level
                assert cm.bare_energy(cfg, p) >= e_vac

    def test_string_baryon_meson_gaps(self):
        m, g2, length = 5.0, 5.0, 3
        p = cm.ModelParams(N=4, m=m, g2=g2, stagger_offset=1)
        vac = p.vacuum_levels()
        assert vac == [1, 5, 1, 5]
        assert cm.bare_energy(vac, p) == 0.0  # energies are vacuum-relative
        # String spanning the chain: quark end |4>, antiquark end |3>,
        # alternating |6>/|2> in between.
        assert cm.bare_energy([4, 6, 2, 3], p) == pytest.approx(
            2 * m + 2 * length * g2, abs=1e-12)
        # Baryon: doubly occupied quark site.
        assert cm.bare_energy([5, 5, 1, 5], p) == pytest.approx(2 * m, abs=1e-12)
        # Meson: quark-antiquark pair on one excited link.
        assert cm.bare_energy([4, 3, 1, 5], p) == pytest.approx(
            2 * m + 2 * g2, abs=1e-12)


class TestHoppingGenerators:
    @pytest.mark.parametrize("scheme,n_groups,group_sizes", [
        ("FullMS", 1, [4]),
        ("DisjointPair", 2, [2, 2]),
        ("TwoLevel", 4, [1, 1, 1, 1]),
    ])
    def test_groupings_resum_to_hopping_blocks(self, scheme, n_groups, group_sizes):
        groups = cm.hopping_generators(scheme)
        refs = {"A1": cm.A1, "A2": cm.A2, "B1": cm.B1, "B2": cm.B2}
        for tag, ref in refs.items():
            assert len(groups[tag]) == n_groups
            assert [len(g) for g in groups[tag]] == group_sizes
            assert np.allclose(cm.generator_sum(groups[tag]), ref, atol=1e-15)

    def test_groups_drive_disjoint_transitions(self):
        # Each simultaneously driven group addresses disjoint level pairs.
        groups = cm.hopping_generators("DisjointPair")
        for tag in ("A1", "A2", "B1", "B2"):
            for grp in groups[tag]:
                pairs = [{g.s1, g.s2} for g in grp]
                assert pairs[0].isdisjoint(pairs[1])

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ValueError):
            cm.hopping_generators("Nonsense")

    @given(s1=st.integers(1, 5), gap=st.integers(1, 5), axis=st.sampled_from("xy"),
           weight=st.floats(0.1, 3.0), sign=st.sampled_from([-1, 1]))
    @settings(max_examples=50, deadline=None)
    def test_two_level_generator_hermitian_and_normalized(self, s1, gap, axis,
                                                          weight, sign):
        s2 = s1 + gap
        if s2 > 6:
            return
        g = cm.TwoLevelGenerator(s1, s2, axis, weight, sign).matrix()
        assert np.allclose(g, g.conj().T)
        evals = np.linalg.eigvalsh(g)
        assert np.max(np.abs(evals)) == pytest.approx(weight, rel=1e-12)


class TestEvenSiteRotation:
    def test_rotation_is_unitary_and_identity_on_odd_sites(self):
        p = cm.ModelParams(N=2, m=1.0, g2=1.0)
        vec = np.zeros(36, dtype=complex)
        vec[0] = 1.0
        rotated = cm.rotate_basis_even_sites(vec, p)
        assert np.linalg.norm(rotated) == pytest.approx(1.0, abs=1e-12)
