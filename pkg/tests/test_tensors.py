import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from porompm.errors import ElementInversionError, InvalidStateError, SingularKinematicsError
from porompm.tensors import (
    det2,
    half_log_derivative,
    inv2,
    pull_back_gradient,
    relative_deformation_gradient,
    right_stretch_diagonal,
    spd_log,
    spd_sqrt,
    sym_eig_2x2,
    update_volume,
)


def rand_spd(rng, n=8, shift=0.05):
    A = rng.normal(size=(n, 2, 2))
    return np.einsum("pik,pjk->pij", A, A) + shift * np.eye(2)


class TestSpdLog:
    def test_identity_gives_zero(self):
        assert np.allclose(spd_log(np.eye(2)), 0.0)

    def test_diagonal_case(self):
        out = spd_log(np.diag([4.0, 1.0]))
        assert np.allclose(out, np.diag([np.log(2.0), 0.0]), atol=1e-14)

    def test_against_eigensolver_oracle(self):
        F = np.array([[1.0, 0.3], [0.0, 1.0]])
        b = F @ F.T
        w, v = np.linalg.eigh(b)
        oracle = v @ np.diag(0.5 * np.log(w)) @ v.T
        assert np.abs(spd_log(b) - oracle).max() < 1e-12

    def test_non_spd_raises(self):
        with pytest.raises(SingularKinematicsError):
            spd_log(np.diag([1.0, -0.5]))

    def test_log_exp_round_trip(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            e = rng.uniform(-0.5, 0.5, size=(2, 2))
            eps = 0.5 * (e + e.T)
            w, v = np.linalg.eigh(2.0 * eps)
            b = v @ np.diag(np.exp(w)) @ v.T
            assert np.abs(spd_log(b) - eps).max() < 1e-10

    def test_batched_matches_loop(self):
        rng = np.random.default_rng(1)
        b = rand_spd(rng)
        batch = spd_log(b)
        for i in range(len(b)):
            assert np.allclose(batch[i], spd_log(b[i]), atol=1e-13)


class TestEig:
    def test_reconstruction(self):
        rng = np.random.default_rng(2)
        b = rand_spd(rng, 64)
        w, n = sym_eig_2x2(b)
        recon = np.einsum("pab,pb,pcb->pac", n, w, n)
        assert np.abs(recon - b).max() < 1e-12 * np.abs(b).max()
        assert np.all(w[:, 0] >= w[:, 1])

    def test_repeated_eigenvalues(self):
        w, n = sym_eig_2x2(3.0 * np.eye(2))
        assert np.allclose(w, [3.0, 3.0])
        assert np.allclose(n @ n.T, np.eye(2), atol=1e-14)


class TestHalfLogDerivative:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        b = rand_spd(rng, 6)
        L = half_log_derivative(b)
        h = 1e-6
        for a in range(2):
            for c in range(2):
                db = np.zeros((2, 2))
                db[a, c] += 1.0
                db[c, a] += 1.0
                fd = (spd_log(b + h * db) - spd_log(b - h * db)) / (2.0 * h)
                an = np.einsum("pabcd,cd->pab", L, db)
                assert np.abs(fd - an).max() < 1e-7

    def test_repeated_branch(self):
        b = np.array([[[2.0, 0.0], [0.0, 2.0]]])
        L = half_log_derivative(b)
        # d(0.5 ln b)/db at b = 2I is (1/(2*2)) I_sym
        assert np.isclose(L[0, 0, 0, 0, 0], 0.25)
        assert np.isclose(L[0, 0, 1, 0, 1], 0.125)  # symmetrized off-diagonal


class TestRelativeDeformation:
    def test_zero_increment(self):
        assert np.allclose(relative_deformation_gradient(np.zeros((2, 2))), np.eye(2))

    def test_uniaxial(self):
        dF = relative_deformation_gradient(np.diag([0.1, 0.0]))
        assert np.allclose(dF, np.diag([1.1, 1.0]))
        assert np.isclose(det2(dF), 1.1)

    def test_composition_matches_total(self):
        F_n = np.diag([1.2, 0.9])
        grad = np.array([[0.0, 0.05], [0.0, 0.0]])
        dF = relative_deformation_gradient(grad)
        F = dF @ F_n
        # total-Lagrangian oracle: same motion composed analytically
        F_total = (np.eye(2) + grad) @ F_n
        assert np.abs(F - F_total).max() < 1e-12

    def test_inverted_raises(self):
        with pytest.raises(ElementInversionError):
            relative_deformation_gradient(np.diag([-1.5, 0.0]))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_det_multiplicativity(self, seed):
        rng = np.random.default_rng(seed)
        F_n = np.eye(2) + rng.uniform(-0.3, 0.3, (2, 2))
        if det2(F_n) <= 0.1:
            return
        grad = rng.uniform(-0.2, 0.2, (2, 2))
        dF = grad + np.eye(2)
        if det2(dF) <= 0.1:
            return
        assert np.isclose(det2(dF @ F_n), det2(dF) * det2(F_n), rtol=1e-10)


class TestPullBack:
    def test_identity(self):
        g = np.array([0.3, -0.7])
        assert np.allclose(pull_back_gradient(g, np.eye(2)), g)

    def test_diagonal_scaling(self):
        out = pull_back_gradient(np.array([1.0, 1.0]), np.diag([2.0, 1.0]))
        assert np.allclose(out, [0.5, 1.0])

    def test_round_trip(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            dF = np.eye(2) + rng.uniform(-0.3, 0.3, (2, 2))
            if det2(dF) < 0.2:
                continue
            g_n = rng.normal(size=2)
            g = pull_back_gradient(g_n, dF)
            assert np.abs(g @ dF - g_n).max() < 1e-12


class TestVolume:
    def test_isochoric(self):
        assert update_volume(2.0, 1.0) == 2.0

    def test_arithmetic(self):
        assert np.isclose(update_volume(2.0, 1.1), 2.2)

    def test_compounding_matches_total_jacobian(self):
        rng = np.random.default_rng(6)
        V = 1.7
        J = 1.0
        for _ in range(200):
            dJ = np.exp(rng.uniform(-0.02, 0.02))
            V = update_volume(V, dJ)
            J *= dJ
        assert np.isclose(V, J * 1.7, rtol=1e-10)

    def test_invalid(self):
        with pytest.raises(InvalidStateError):
            update_volume(-1.0, 1.0)
        with pytest.raises(InvalidStateError):
            update_volume(1.0, 0.0)


class TestStretch:
    def test_pure_rotation(self):
        th = 0.4
        R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        assert np.allclose(right_stretch_diagonal(R), [1.0, 1.0], atol=1e-12)

    def test_diagonal_stretch(self):
        assert np.allclose(right_stretch_diagonal(np.diag([2.0, 0.5])), [2.0, 0.5])

    def test_simple_shear_vs_polar_oracle(self):
        F = np.array([[1.0, 1.0], [0.0, 1.0]])
        # polar decomposition oracle via SVD
        U_svd, s, Vt = np.linalg.svd(F)
        Usym = Vt.T @ np.diag(s) @ Vt
        mine = right_stretch_diagonal(F)
        assert np.abs(mine - np.diag(Usym)).max() < 1e-10

    def test_sqrt_squares_back(self):
        rng = np.random.default_rng(8)
        b = rand_spd(rng, 16)
        r = spd_sqrt(b)
        assert np.abs(np.einsum("pij,pjk->pik", r, r) - b).max() < 1e-10 * np.abs(b).max()


def test_inv2_matches_numpy():
    rng = np.random.default_rng(9)
    t = np.eye(2) + rng.uniform(-0.4, 0.4, (12, 2, 2))
    assert np.abs(inv2(t) - np.linalg.inv(t)).max() < 1e-12
