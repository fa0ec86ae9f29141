import itertools
from collections import Counter
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opgyro.angular_momentum import (
    ORTHONORMAL_TOL,
    InitialState,
    Mode,
    build_composite,
    cg_case_A_states,
    couple_basis,
    cross_product,
    dot,
    expand_initial,
    ferromagnetic_state,
    spin_matrices,
)
from opgyro.errors import (
    ConfigurationError,
    CouplingError,
    DimensionCapError,
    InvalidSpinError,
    NotEigenstateError,
)
from opgyro.halfint import HalfInt

from conftest import ferro_setup

SMALL_SYSTEMS = [
    (n, i_spin, mode)
    for n in (1, 2, 3)
    for i_spin in ("0", "1/2", "1", "3/2")
    for mode in ("full", "collective")
]


def comm(a, b):
    return a @ b - b @ a


class TestSpinMatrices:
    def test_spin_half_is_pauli_over_two(self):
        ops = spin_matrices("1/2")
        assert np.allclose(ops.sz, np.diag([0.5, -0.5]))
        assert np.allclose(ops.sx, [[0, 0.5], [0.5, 0]])
        assert np.allclose(ops.sy, [[0, -0.5j], [0.5j, 0]])

    def test_spin_zero(self):
        ops = spin_matrices(0)
        assert ops.dim == 1
        for m in (ops.sx, ops.sy, ops.sz, ops.s_plus, ops.s_minus):
            assert m.shape == (1, 1) and m[0, 0] == 0

    def test_spin_one(self):
        ops = spin_matrices(1)
        assert np.allclose(ops.sz, np.diag([1, 0, -1]))
        assert np.allclose(np.diag(ops.s_plus, 1), [np.sqrt(2), np.sqrt(2)])
        assert np.count_nonzero(ops.s_plus) == 2

    @pytest.mark.parametrize("twice", range(0, 13))
    def test_algebra(self, twice):
        ops = spin_matrices(HalfInt(twice))
        s = twice / 2
        assert np.max(np.abs(comm(ops.sx, ops.sy) - 1j * ops.sz)) < 1e-12
        assert np.max(np.abs(comm(ops.sy, ops.sz) - 1j * ops.sx)) < 1e-12
        assert np.max(np.abs(comm(ops.sz, ops.sx) - 1j * ops.sy)) < 1e-12
        casimir = ops.sx @ ops.sx + ops.sy @ ops.sy + ops.sz @ ops.sz
        assert np.max(np.abs(casimir - s * (s + 1) * np.eye(ops.dim))) < 1e-12
        assert np.allclose(np.diag(ops.sz).real, s - np.arange(ops.dim))

    def test_negative_spin_rejected(self):
        with pytest.raises(InvalidSpinError):
            spin_matrices(HalfInt(-1))


class TestCrossProduct:
    def test_spin_cross_itself(self):
        s = spin_matrices("1/2").vector
        for got, want in zip(cross_product(s, s), s):
            assert np.allclose(got, 1j * want)

    def test_zero_operand(self):
        a = spin_matrices(1).vector
        zero = (np.zeros((3, 3)),) * 3
        assert all(np.all(c == 0) for c in cross_product(a, zero))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            cross_product(spin_matrices(1).vector, spin_matrices("1/2").vector)

    @pytest.mark.parametrize("n, i_spin, mode", SMALL_SYSTEMS)
    def test_j_cross_s_anticommutator(self, n, i_spin, mode):
        system = build_composite(n, "1/2", i_spin, mode)
        js = cross_product(system.J, system.S)
        sj = cross_product(system.S, system.J)
        for u in range(3):
            assert np.max(np.abs(js[u] + sj[u] - 2j * system.S[u])) < 1e-12


class TestComposite:
    def test_dimensions(self):
        assert build_composite(2, "1/2", 1, "full").dim == 12
        assert build_composite(4, "1/2", 1, "collective").dim == 15
        assert build_composite(3, 1, "1/2", "full").dim == 54

    @pytest.mark.parametrize("n, i_spin, mode", SMALL_SYSTEMS)
    def test_invariants(self, n, i_spin, mode):
        system = build_composite(n, "1/2", i_spin, mode)
        for a in system.S:
            for b in system.I:
                assert np.max(np.abs(comm(a, b))) == 0
        for u in range(3):
            assert np.array_equal(system.J[u], system.S[u] + system.I[u])
            assert np.max(np.abs(comm(system.J[u], system.K))) <= 1e-12
        assert np.max(np.abs(system.K - system.K.conj().T)) <= 1e-14
        assert np.max(np.abs(dot(system.J, system.S) - dot(system.S, system.J))) <= 1e-12

    def test_full_mode_is_sum_of_single_spins(self):
        system = build_composite(2, "1/2", "1/2", "full")
        sz = spin_matrices("1/2").sz
        i2 = np.eye(2)
        want = np.kron(np.kron(sz, i2) + np.kron(i2, sz), i2)
        assert np.allclose(system.Sz, want)

    @staticmethod
    def _expected_k_spectrum(n, i_spin):
        """Eigenvalues of S.I from coupling rules: N spin-1/2 give S with
        multiplicity C(N, N/2-S) - C(N, N/2-S-1), then J = |S-I|..S+I."""
        out = []
        i = float(i_spin)
        for s2 in range(n % 2, n + 1, 2):
            s = s2 / 2
            lower = (n - s2) // 2
            mult_s = comb(n, lower) - (comb(n, lower - 1) if lower >= 1 else 0)
            for j2 in range(abs(s2 - int(2 * i)), s2 + int(2 * i) + 1, 2):
                j = j2 / 2
                k = (j * (j + 1) - s * (s + 1) - i * (i + 1)) / 2
                out += [k] * (mult_s * (j2 + 1))
        return np.sort(out)

    @pytest.mark.parametrize("n, i_spin", [(2, "1/2"), (2, "1"), (3, "1/2"), (4, "1"), (5, "3/2")])
    def test_k_spectrum_matches_coupling_rules(self, n, i_spin):
        system = build_composite(n, "1/2", i_spin, "full")
        got = np.linalg.eigvalsh(system.K)
        want = self._expected_k_spectrum(n, HalfInt.parse(i_spin))
        assert got.shape == want.shape
        assert np.max(np.abs(got - want)) < 1e-12

    def test_two_spins_half_half_spectrum(self):
        system = build_composite(2, "1/2", "1/2", "full")
        vals = Counter(np.round(np.linalg.eigvalsh(system.K), 12))
        assert vals == {-1.0: 2, 0.0: 2, 0.5: 4}

    def test_dimension_cap(self):
        with pytest.raises(DimensionCapError):
            build_composite(11, "1/2", 1, "full")  # 6144 > 4096
        with pytest.raises(DimensionCapError):
            build_composite(6, "1/2", 1, "full", max_dim=191)
        assert build_composite(6, "1/2", 1, "full", max_dim=192).dim == 192

    def test_invalid_collective_total(self):
        with pytest.raises(InvalidSpinError):
            build_composite(3, "1/2", 1, "collective", s_total=1)
        with pytest.raises(InvalidSpinError):
            build_composite(3, "1/2", 1, "collective", s_total="5/2")
        assert build_composite(3, "1/2", 1, "collective", s_total="1/2").dim == 6

    def test_bad_n(self):
        with pytest.raises(ConfigurationError):
            build_composite(0, "1/2", 1)


def _product_projection_count(n, s_each, i_spin, m_j):
    """Number of product states |m_1 ... m_N; m_I> with total projection m_j."""
    ms = [(s_each.twice - 2 * k) for k in range(s_each.twice + 1)]
    mi = [(i_spin.twice - 2 * k) for k in range(i_spin.twice + 1)]
    return sum(
        1 for combo in itertools.product(*([ms] * n), mi) if sum(combo) == m_j.twice
    )


class TestCoupledBasis:
    def test_singlet_triplet(self):
        system = build_composite(2, "1/2", 0, "full")
        basis = couple_basis(system, 0)
        assert [st.J for st in basis] == [HalfInt(0), HalfInt(2)]
        singlet = basis.states[0].vector
        assert np.allclose(np.abs(singlet[[1, 2]]), 1 / np.sqrt(2))
        assert np.isclose(singlet[1], -singlet[2])

    @pytest.mark.parametrize("n, i_spin", [(2, "1"), (3, "1/2"), (3, "1"), (4, "3/2")])
    def test_sector_count_matches_enumeration(self, n, i_spin):
        system = build_composite(n, "1/2", i_spin, "full")
        i = HalfInt.parse(i_spin)
        for m_twice in range(-(n + i.twice), n + i.twice + 1, 2):
            basis = couple_basis(system, HalfInt(m_twice))
            assert len(basis) == _product_projection_count(n, HalfInt(1), i, HalfInt(m_twice))

    def test_n2_i1_zero_sector(self):
        system = build_composite(2, "1/2", 1, "full")
        assert len(couple_basis(system, 0)) == 4
        assert len(couple_basis(build_composite(2, "1/2", 1, "collective"), 0)) == 3

    @pytest.mark.parametrize("n, i_spin, mode", SMALL_SYSTEMS)
    def test_stretched_state(self, n, i_spin, mode):
        system = build_composite(n, "1/2", i_spin, mode)
        top = system.max_j
        basis = couple_basis(system, top)
        assert len(basis) == 1 and basis.states[0].J == top

    @pytest.mark.parametrize("n, i_spin, mode", SMALL_SYSTEMS)
    def test_eigen_and_orthonormal(self, n, i_spin, mode):
        system = build_composite(n, "1/2", i_spin, mode)
        top = system.max_j
        for m_twice in range(-top.twice, top.twice + 1, 2):
            basis = couple_basis(system, HalfInt(m_twice))
            w = basis.matrix
            assert np.max(np.abs(w.conj().T @ w - np.eye(len(basis)))) < ORTHONORMAL_TOL
            assert len(basis) == system.sector_indices(HalfInt(m_twice)).size
            for st in basis:
                j = float(st.J)
                assert np.linalg.norm(system.J2 @ st.vector - j * (j + 1) * st.vector) < 1e-10
                assert np.linalg.norm(system.Jz @ st.vector - m_twice / 2 * st.vector) < 1e-10
            keys = [(st.J, st.mult_index) for st in basis]
            assert keys == sorted(keys)

    def test_multiplicity_labels_diagonalize_s2(self):
        system = build_composite(3, "1/2", "1/2", "full")
        basis = couple_basis(system, 0)
        deg = [st for st in basis if st.J == HalfInt(2)]
        assert len(deg) == 3  # J = 1 from S = 1/2 (twice) and from S = 3/2
        w = np.column_stack([st.vector for st in deg])
        s2 = w.conj().T @ system.S2 @ w
        assert np.max(np.abs(s2 - np.diag(np.diag(s2)))) < 1e-10
        assert np.allclose(sorted(np.diag(s2).real), [0.75, 0.75, 3.75])

    def test_empty_sector(self):
        system = build_composite(1, "1/2", "1/2", "full")
        with pytest.raises(ConfigurationError):
            couple_basis(system, HalfInt(4))

    def test_broken_operators_fail_coupling(self):
        system = build_composite(2, "1/2", 1, "full")
        import dataclasses

        bad = dataclasses.replace(system, Sz=1.01 * system.Sz)
        with pytest.raises(CouplingError):
            couple_basis(bad, 0)


class TestInitialStates:
    def test_ferromagnetic(self):
        system = build_composite(2, "1/2", 1, "full")
        st = ferromagnetic_state(system, -1)
        assert st.M_J == HalfInt(0)
        assert np.linalg.norm(system.Jz @ st.vector) < 1e-12
        assert np.isclose(np.vdot(st.vector, system.Sz @ st.vector).real, 1.0)

    def test_ferromagnetic_n3(self):
        system = build_composite(3, "1/2", "1/2", "full")
        st = ferromagnetic_state(system, "-1/2")
        assert st.M_J == HalfInt(2)
        assert np.isclose(np.vdot(st.vector, system.Sz @ st.vector).real, 1.5)

    def test_invalid_m_i(self):
        system = build_composite(2, "1/2", 1, "full")
        with pytest.raises(InvalidSpinError):
            ferromagnetic_state(system, "1/2")
        with pytest.raises(InvalidSpinError):
            ferromagnetic_state(system, 2)

    def test_from_vector_rejects_non_eigenstate(self):
        system = build_composite(2, "1/2", 1, "full")
        v = np.zeros(system.dim)
        v[0] = v[1] = 1
        with pytest.raises(NotEigenstateError):
            InitialState.from_vector(system, v)

    def test_from_vector_normalizes(self):
        system = build_composite(2, "1/2", 1, "full")
        v = 3 * ferromagnetic_state(system, 0).vector
        st = InitialState.from_vector(system, v)
        assert st.M_J == HalfInt(2) and np.isclose(np.linalg.norm(st.vector), 1)


class TestExpansion:
    @pytest.mark.parametrize("mode", ["full", "collective"])
    def test_paper_n2_coefficients(self, mode):
        system, initial, basis, _ = ferro_setup(2, "1", mode)
        weights = Counter()
        for amp in expand_initial(initial, basis):
            weights[amp.J] += abs(amp.c) ** 2
        assert np.sqrt(weights[HalfInt(0)]) == pytest.approx(np.sqrt(1 / 3), abs=1e-12)
        assert np.sqrt(weights[HalfInt(2)]) == pytest.approx(np.sqrt(1 / 2), abs=1e-12)
        assert np.sqrt(weights[HalfInt(4)]) == pytest.approx(np.sqrt(1 / 6), abs=1e-12)

    def test_basis_vector_gives_single_coefficient(self):
        system = build_composite(3, "1/2", 1, "full")
        basis = couple_basis(system, HalfInt(1))
        target = basis.states[3]
        amps = expand_initial(InitialState(target.vector, HalfInt(1)), basis)
        mags = np.array([abs(a.c) for a in amps])
        assert mags[3] == pytest.approx(1, abs=1e-12)
        assert np.max(np.delete(mags, 3)) < 1e-12

    def test_mismatched_sector(self):
        system, initial, _, _ = ferro_setup(2, "1")
        with pytest.raises(ConfigurationError):
            expand_initial(initial, couple_basis(system, 1))

    @settings(max_examples=40, deadline=None)
    @given(
        n=st.integers(1, 3),
        i_twice=st.integers(0, 3),
        m_offset=st.integers(0, 20),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_completeness_random_eigenvector(self, n, i_twice, m_offset, seed):
        system = build_composite(n, "1/2", HalfInt(i_twice), "full")
        top = system.max_j.twice
        m_twice = -top + 2 * (m_offset % (top + 1))
        idx = system.sector_indices(HalfInt(m_twice))
        rng = np.random.default_rng(seed)
        v = np.zeros(system.dim, dtype=complex)
        v[idx] = rng.normal(size=idx.size) + 1j * rng.normal(size=idx.size)
        state = InitialState.from_vector(system, v)
        amps = expand_initial(state, couple_basis(system, state.M_J))
        assert sum(abs(a.c) ** 2 for a in amps) == pytest.approx(1, abs=1e-10)


class TestCaseAStates:
    @pytest.mark.parametrize("n", range(2, 9))
    def test_match_numerical_basis(self, n):
        system = build_composite(n, "1/2", 1, "collective")
        basis = couple_basis(system, HalfInt(n - 2))
        states = cg_case_A_states(n, system)
        by_j = {st.J: st for st in basis}
        for st in states:
            assert np.linalg.norm(st.vector) == pytest.approx(1, abs=1e-12)
            overlap = abs(np.vdot(by_j[st.J].vector, st.vector))
            assert overlap == pytest.approx(1, abs=1e-9)

    def test_n2_top_state_coefficients(self):
        system = build_composite(2, "1/2", 1, "collective")
        top = cg_case_A_states(2, system)[2].vector
        # |1,-1;+1>, |1,0;0>, |1,1;-1> sit at indices 6, 4, 2
        assert np.allclose(top[[6, 4, 2]], np.array([2, 4, 2]) / np.sqrt(24))

    def test_initial_state_expansion(self):
        n = 5
        system, initial, _, _ = ferro_setup(n, "1", "collective")
        down, same, up = cg_case_A_states(n, system)
        got = [np.vdot(s.vector, initial.vector).real for s in (down, same, up)]
        want = [np.sqrt((n - 1) / (n + 1)), np.sqrt(2 / (n + 2)), np.sqrt(2 / ((n + 1) * (n + 2)))]
        assert np.allclose(got, want, atol=1e-12)

    def test_wrong_system(self):
        with pytest.raises(ConfigurationError):
            cg_case_A_states(2, build_composite(2, "1/2", 1, "full"))
        with pytest.raises(ConfigurationError):
            cg_case_A_states(3, build_composite(2, "1/2", 1, "collective"))
