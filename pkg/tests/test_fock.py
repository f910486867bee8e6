import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmarginal.fock import (CapacityError, FermionState, OrbitalSpace,
                            SlaterDeterminant, apply_annihilator, apply_creator,
                            enumerate_slaters, natural_occupations, one_rdm,
                            random_state, read_state_json, restricted_ground_state,
                            rotate_orbitals, write_state_json)


def det(*orbitals):
    return SlaterDeterminant.from_orbitals(orbitals)


def bd_example_state():
    space = OrbitalSpace(d=6, n=3)
    return FermionState.from_amplitudes(space, {
        det(1, 2, 3): math.sqrt(0.6),
        det(1, 4, 5): math.sqrt(0.3),
        det(2, 4, 6): math.sqrt(0.1),
    })


class TestOrbitalSpace:
    def test_validation(self):
        with pytest.raises(ValueError):
            OrbitalSpace(d=3, n=4)
        with pytest.raises(ValueError):
            OrbitalSpace(d=0, n=0)
        with pytest.raises(ValueError):
            OrbitalSpace(d=65, n=2)

    def test_basis_size(self):
        assert OrbitalSpace(d=6, n=3).basis_size == 20


class TestEnumeration:
    def test_counts(self):
        assert len(enumerate_slaters(OrbitalSpace(d=6, n=3))) == 20
        assert len(enumerate_slaters(OrbitalSpace(d=4, n=1))) == 4
        assert len(enumerate_slaters(OrbitalSpace(d=7, n=3))) == 35

    def test_single_particle_basis(self):
        dets = enumerate_slaters(OrbitalSpace(d=4, n=1))
        assert [d.orbitals for d in dets] == [(1,), (2,), (3,), (4,)]

    def test_deterministic_mask_order(self):
        dets = enumerate_slaters(OrbitalSpace(d=6, n=3))
        masks = [d.mask for d in dets]
        assert masks == sorted(masks)
        assert all(d.n_occupied == 3 for d in dets)

    def test_capacity_cap(self):
        with pytest.raises(CapacityError):
            enumerate_slaters(OrbitalSpace(d=40, n=20), cap=10 ** 6)


class TestOperators:
    def test_annihilator_sign(self):
        sign, reduced = apply_annihilator(det(1, 2, 3), 2)
        assert sign == -1 and reduced == det(1, 3)

    def test_annihilator_empty_orbital(self):
        assert apply_annihilator(det(1, 2, 3), 5) is None

    def test_number_operator(self):
        sign1, reduced = apply_annihilator(det(1, 2, 3), 1)
        sign2, restored = apply_creator(reduced, 1)
        assert sign1 * sign2 == 1 and restored == det(1, 2, 3)

    def test_index_range(self):
        with pytest.raises(ValueError):
            apply_annihilator(det(1, 2), 0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6), st.integers(1, 6))
    def test_anticommutator(self, seed, j, k):
        # <psi| {a_j, a_k^dag} |psi> = delta_jk
        space = OrbitalSpace(d=6, n=3)
        state = random_state(space, np.random.default_rng(seed))

        def overlap_after(ops):
            total = 0.0 + 0.0j
            for d0, c in state.amplitudes.items():
                current, sign = d0, 1
                for name, idx in ops:
                    step = (apply_annihilator if name == "a" else apply_creator)(current, idx)
                    if step is None:
                        sign = 0
                        break
                    sign *= step[0]
                    current = step[1]
                if sign:
                    total += np.conj(state.amplitudes.get(current, 0.0)) * sign * c
            return total

        value = overlap_after([("adag", k), ("a", j)]) + overlap_after([("a", j), ("adag", k)])
        assert abs(value - (1.0 if j == k else 0.0)) < 1e-12


class TestOneRDM:
    def test_single_determinant(self):
        space = OrbitalSpace(d=6, n=3)
        state = FermionState.from_amplitudes(space, {det(1, 2, 3): 1.0})
        assert np.allclose(one_rdm(state), np.diag([1, 1, 1, 0, 0, 0]))

    def test_ghz_like_superposition(self):
        # oracle: direct computation over the 20-determinant basis gives I/2
        space = OrbitalSpace(d=6, n=3)
        state = FermionState.from_amplitudes(
            space, {det(1, 2, 3): 1.0, det(4, 5, 6): 1.0})
        assert np.allclose(one_rdm(state), np.eye(6) / 2.0, atol=1e-14)

    def test_bd_example_diagonal(self):
        # determinants pairwise differ in two orbitals, so the matrix is diagonal
        rho = one_rdm(bd_example_state())
        assert np.allclose(rho, np.diag([0.9, 0.7, 0.6, 0.4, 0.3, 0.1]), atol=1e-14)

    def test_brute_force_oracle_random_state(self):
        # independent oracle: <a_k^dag a_j> assembled determinant pair by pair
        space = OrbitalSpace(d=5, n=2)
        state = random_state(space, np.random.default_rng(11))
        basis = enumerate_slaters(space)
        expected = np.zeros((5, 5), dtype=complex)
        for j in range(1, 6):
            for k in range(1, 6):
                for src in basis:
                    step1 = apply_annihilator(src, j)
                    if step1 is None:
                        continue
                    step2 = apply_creator(step1[1], k)
                    if step2 is None:
                        continue
                    expected[j - 1, k - 1] += (step1[0] * step2[0]
                                               * np.conj(state.amplitude(step2[1]))
                                               * state.amplitude(src))
        assert np.allclose(one_rdm(state), expected, atol=1e-13)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_invariants_random_states(self, seed):
        space = OrbitalSpace(d=6, n=3)
        rho = one_rdm(random_state(space, np.random.default_rng(seed)))
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-12
        assert abs(np.trace(rho).real - 3.0) < 1e-10
        lams = np.linalg.eigvalsh(rho)
        assert lams.min() > -1e-10 and lams.max() < 1 + 1e-10

    def test_unnormalized_rejected(self):
        space = OrbitalSpace(d=4, n=2)
        state = FermionState.from_amplitudes(space, {det(1, 2): 1.0})
        object.__setattr__(state, "amplitudes", {det(1, 2): 1.1})
        with pytest.raises(ValueError):
            one_rdm(state)


class TestNaturalOccupations:
    def test_sorting_diagonal(self):
        lams, u = natural_occupations(np.diag([0.4, 0.9, 0.7]))
        assert np.allclose(lams, [0.9, 0.7, 0.4])
        # permutation unitary mapping natural orbitals onto coordinate axes
        assert np.allclose(np.abs(u), np.eye(3)[:, [1, 2, 0]])

    def test_ghz_spectrum_and_bd_equality(self):
        space = OrbitalSpace(d=6, n=3)
        state = FermionState.from_amplitudes(
            space, {det(1, 2, 3): 1.0, det(4, 5, 6): 1.0})
        lams, _ = natural_occupations(one_rdm(state))
        assert np.allclose(lams, 0.5)
        assert abs(lams[0] + lams[5] - 1.0) < 1e-12

    def test_hartree_fock_point(self):
        space = OrbitalSpace(d=6, n=3)
        state = FermionState.from_amplitudes(space, {det(1, 2, 3): 1.0})
        lams, _ = natural_occupations(one_rdm(state))
        assert np.allclose(lams, [1, 1, 1, 0, 0, 0])

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError):
            natural_occupations(np.array([[0.0, 1.0], [0.0, 0.0]]))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(2, 10))
    def test_matches_lapack_on_random_hermitian(self, seed, d):
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h = (g + g.conj().T) / 2.0
        lams, u = natural_occupations(h)
        assert np.allclose(lams, np.sort(np.linalg.eigvalsh(h))[::-1], atol=1e-12)
        assert np.max(np.abs(h @ u - u @ np.diag(lams))) < 1e-12
        assert np.max(np.abs(u.conj().T @ u - np.eye(d))) < 1e-12

    def test_relative_accuracy_graded_matrix(self):
        # graded PSD with exactly representable entries: tiny eigenvalues must
        # come out to relative precision (a permutation keeps entries exact)
        def block(a, b, coupling=0.5):
            e = coupling * math.sqrt(a * b)
            trace, determinant = a + b, a * b - e * e
            lam_plus = (trace + math.sqrt(trace * trace - 4 * determinant)) / 2.0
            return np.array([[a, e], [e, b]]), (lam_plus, determinant / lam_plus)

        b1, eig1 = block(1.0, 1e-8)
        b2, eig2 = block(1e-2, 1e-13)
        full = np.zeros((4, 4))
        full[:2, :2], full[2:, 2:] = b1, b2
        perm = np.array([0, 2, 1, 3])
        full = full[np.ix_(perm, perm)]
        exact = np.sort(np.array(eig1 + eig2))[::-1]
        lams, _ = natural_occupations(full)
        assert np.max(np.abs(lams / exact - 1.0)) < 1e-12

    def test_n2_states_pair_degenerate(self):
        for seed in range(5):
            for d in (4, 5):
                space = OrbitalSpace(d=d, n=2)
                state = random_state(space, np.random.default_rng(seed))
                lams, _ = natural_occupations(one_rdm(state))
                pairs = lams[: 2 * (d // 2)].reshape(-1, 2)
                assert np.max(np.abs(pairs[:, 0] - pairs[:, 1])) < 1e-9
                if d % 2:
                    assert abs(lams[-1]) < 1e-9


class TestRotateOrbitals:
    def test_identity(self):
        state = bd_example_state()
        rotated = rotate_orbitals(state, np.eye(6))
        for key, value in state.amplitudes.items():
            assert abs(rotated.amplitude(key) - value) < 1e-14

    def test_permutation_minor_sign(self):
        space = OrbitalSpace(d=3, n=2)
        state = FermionState.from_amplitudes(space, {det(1, 2): 1.0})
        swap = np.eye(3)[:, [2, 1, 0]]
        rotated = rotate_orbitals(state, swap)
        assert abs(abs(rotated.amplitude(det(2, 3))) - 1.0) < 1e-12

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError):
            rotate_orbitals(bd_example_state(), np.eye(6) * 1.01)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_spectrum_invariant_under_rotation(self, seed):
        rng = np.random.default_rng(seed)
        space = OrbitalSpace(d=5, n=2)
        state = random_state(space, rng)
        g = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        u, _ = np.linalg.qr(g)
        lams_before, _ = natural_occupations(one_rdm(state))
        lams_after, _ = natural_occupations(one_rdm(rotate_orbitals(state, u)))
        assert np.max(np.abs(lams_before - lams_after)) < 1e-9


class TestRestrictedGroundState:
    def _random_h(self, space, seed):
        size = space.basis_size
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
        return (g + g.conj().T) / 2.0

    def test_full_basis_is_exact(self):
        space = OrbitalSpace(d=5, n=2)
        h = self._random_h(space, 0)
        energy, state = restricted_ground_state(h, enumerate_slaters(space), space)
        assert abs(energy - np.linalg.eigvalsh(h)[0]) < 1e-12
        assert abs(state.norm_squared() - 1.0) < 1e-12

    def test_single_determinant_energy(self):
        space = OrbitalSpace(d=5, n=2)
        h = self._random_h(space, 1)
        basis = enumerate_slaters(space)
        energy, _ = restricted_ground_state(h, [basis[4]], space)
        assert abs(energy - h[4, 4].real) < 1e-12

    def test_variational_monotonicity(self):
        space = OrbitalSpace(d=5, n=2)
        h = self._random_h(space, 2)
        basis = enumerate_slaters(space)
        energies = [restricted_ground_state(h, basis[:k], space)[0]
                    for k in range(1, len(basis) + 1)]
        assert all(e1 >= e2 - 1e-12 for e1, e2 in zip(energies, energies[1:]))

    def test_empty_subset_rejected(self):
        space = OrbitalSpace(d=4, n=2)
        with pytest.raises(ValueError):
            restricted_ground_state(np.eye(6), [], space)


class TestBorlandDennisEqualities:
    def test_equalities_hold_for_random_states(self):
        space = OrbitalSpace(d=6, n=3)
        rng = np.random.default_rng(7)
        for _ in range(100):
            lams, _ = natural_occupations(one_rdm(random_state(space, rng)))
            for i in range(3):
                assert abs(lams[i] + lams[5 - i] - 1.0) < 1e-9


class TestStateIO:
    def test_round_trip(self):
        state = bd_example_state()
        buffer = io.StringIO()
        write_state_json(state, buffer)
        buffer.seek(0)
        loaded = read_state_json(buffer)
        assert loaded.space == state.space
        for key, value in state.amplitudes.items():
            assert abs(loaded.amplitude(key) - value) < 1e-12

    def test_reader_normalizes(self):
        raw = io.StringIO(
            '{"d": 4, "n": 2, "amplitudes": [{"orbitals": [1, 2], "re": 2.0, "im": 0.0}]}')
        state = read_state_json(raw)
        assert abs(state.amplitude(det(1, 2)) - 1.0) < 1e-14

    def test_reader_rejects_unsorted_orbitals(self):
        raw = io.StringIO(
            '{"d": 4, "n": 2, "amplitudes": [{"orbitals": [2, 1], "re": 1.0, "im": 0.0}]}')
        with pytest.raises(ValueError):
            read_state_json(raw)

    def test_reader_rejects_wrong_particle_count(self):
        raw = io.StringIO(
            '{"d": 4, "n": 3, "amplitudes": [{"orbitals": [1, 2], "re": 1.0, "im": 0.0}]}')
        with pytest.raises(ValueError):
            read_state_json(raw)

    def test_writer_drops_negligible_amplitudes(self):
        space = OrbitalSpace(d=4, n=2)
        state = FermionState(space, {det(1, 2): complex(math.sqrt(1 - 1e-30)),
                                     det(3, 4): complex(1e-15)})
        buffer = io.StringIO()
        write_state_json(state, buffer)
        assert '"orbitals": [3, 4]' not in buffer.getvalue()
