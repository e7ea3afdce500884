import numpy as np
import pytest

from fragility.channels import (
    NoiseChannel,
    apply_collective_depolarizing,
    apply_local_depolarizing,
    identity_mix,
    local_depolarizing_spec,
    pathological_jump_operator,
    support_change_rate,
)
from fragility.errors import ValidationError
from fragility.linalg import (
    assert_density,
    lindblad_propagate,
    pure_state_density,
    trace_distance,
)
from fragility.spin import (
    angular_momentum_operators,
    dicke_ket,
    discontinuity_angles,
    rotation_y,
)


def random_density(d, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = A @ A.conj().T
    return rho / np.trace(rho)


class TestCollectiveDepolarizing:
    def test_zero_time(self):
        rho = random_density(5, 0)
        assert np.allclose(apply_collective_depolarizing(rho, 2, 0.0), rho)

    def test_long_time_fixed_point(self):
        rho = pure_state_density(dicke_ket(1, 1))
        out = apply_collective_depolarizing(rho, 1, 50.0)
        assert np.max(np.abs(out - np.eye(3) / 3)) < 1e-8

    def test_spin_half_bloch_contraction(self):
        up_x = pure_state_density(np.array([1.0, 1.0]) / np.sqrt(2))
        gamma_t = 0.05
        out = apply_collective_depolarizing(up_x, 0.5, gamma_t)
        # jump set {J_x, J_y, J_z} = {sigma/2}: Bloch decay exp(-gamma t)
        decay = np.exp(-gamma_t)
        expected = decay * up_x + (1 - decay) * np.eye(2) / 2
        assert np.max(np.abs(out - expected)) < 1e-10

    def test_rotational_covariance(self):
        J = 2
        rho = random_density(5, 1)
        gamma_t = 0.01
        U = rotation_y(J, 0.8)
        lhs = apply_collective_depolarizing(U @ rho @ U.conj().T, J, gamma_t)
        rhs = U @ apply_collective_depolarizing(rho, J, gamma_t) @ U.conj().T
        assert np.max(np.abs(lhs - rhs)) < 1e-8

    def test_output_is_density(self):
        out = apply_collective_depolarizing(random_density(7, 2), 3, 0.02)
        assert_density(out)

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            apply_collective_depolarizing(random_density(4, 3), 3, 0.1)


class TestLocalDepolarizing:
    def test_zero_time(self):
        rho = random_density(4, 4)
        assert np.allclose(apply_local_depolarizing(rho, 2, 0.0), rho)

    def test_long_time_fixed_point(self):
        rho = random_density(8, 5)
        out = apply_local_depolarizing(rho, 3, 20.0)
        assert np.max(np.abs(out - np.eye(8) / 8)) < 1e-8

    @pytest.mark.parametrize("gamma_t", [0.001, 0.01, 0.05])
    @pytest.mark.parametrize("N", [2, 3, 4])
    def test_matches_rk4_oracle(self, N, gamma_t):
        rho = random_density(2**N, 6 + N)
        product = apply_local_depolarizing(rho, N, gamma_t)
        spec = local_depolarizing_spec(N, 1.0, gamma_t)
        integrated = lindblad_propagate(rho, spec, method="fixed-step-rk4",
                                        rk4_step=1e-3)
        assert trace_distance(product, integrated) < 1e-6

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            apply_local_depolarizing(random_density(6, 9), 3, 0.1)


class TestIdentityMix:
    def test_endpoints(self):
        rho = random_density(3, 10)
        assert np.allclose(identity_mix(rho, 0.0), rho)
        assert np.allclose(identity_mix(rho, 1.0), np.eye(3) / 3)

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            identity_mix(random_density(2, 11), 1.5)


class TestSupportChange:
    def setup_method(self):
        self.J = 16
        self.ops = angular_momentum_operators(self.J)
        self.psi = dicke_ket(self.J, self.J - 1)
        self.rho = pure_state_density(self.psi)
        Ms, angles = discontinuity_angles(self.J)
        self.M = 2.0
        self.beta_M = float(angles[list(Ms).index(self.M)])
        basis = rotation_y(self.J, self.beta_M)
        m_ket = basis[:, int(round(self.J - self.M))]
        self.element = np.outer(m_ket, m_ket.conj())

    def test_generic_jump_restores_support(self):
        rate = support_change_rate(self.element, np.asarray(self.ops.jy), self.rho)
        assert rate > 1e-6

    def test_pathological_jump_preserves_gap(self):
        L = pathological_jump_operator(self.J, self.M, self.psi, self.beta_M)
        assert support_change_rate(self.element, L, self.rho) < 1e-12

    def test_zero_jump(self):
        zero = np.zeros((33, 33))
        assert support_change_rate(self.element, zero, self.rho) == 0.0

    def test_mixed_state_rejected(self):
        with pytest.raises(ValidationError):
            support_change_rate(self.element, np.asarray(self.ops.jy),
                                np.eye(33) / 33)

    def test_overlapping_element_rejected(self):
        with pytest.raises(ValidationError):
            support_change_rate(self.rho, np.asarray(self.ops.jy), self.rho)


class TestPathologicalOperator:
    def test_defining_matrix_element_vanishes(self):
        J, M = 16.0, 8.0
        psi = dicke_ket(J, J - 1)
        Ms, angles = discontinuity_angles(J)
        beta_M = float(angles[list(Ms).index(M)])
        L = pathological_jump_operator(J, M, psi, beta_M)
        m_ket = rotation_y(J, beta_M)[:, int(round(J - M))]
        assert abs(m_ket.conj() @ L @ psi) < 1e-10

    def test_other_elements_match_jz(self):
        J, M = 4.0, 1.0
        ops = angular_momentum_operators(J)
        psi = dicke_ket(J, J - 1)
        Ms, angles = discontinuity_angles(J)
        beta_M = float(angles[list(Ms).index(M)])
        L = pathological_jump_operator(J, M, psi, beta_M)
        basis = rotation_y(J, beta_M)
        # orthonormal completion of psi
        comp = np.linalg.qr(
            np.column_stack([psi] + [c for c in np.eye(9, dtype=complex).T])
        )[0]
        for mp in range(9):
            for i in range(9):
                if mp == int(round(J - M)) and i == 0:
                    continue
                lhs = basis[:, mp].conj() @ L @ comp[:, i]
                rhs = basis[:, mp].conj() @ ops.jz @ comp[:, i]
                assert abs(lhs - rhs) < 1e-10

    def test_wrong_angle_rejected(self):
        with pytest.raises(ValidationError):
            pathological_jump_operator(4.0, 1.0, dicke_ket(4, 3), 0.3)

    def test_other_discontinuities_still_restored(self):
        J = 16.0
        psi = dicke_ket(J, J - 1)
        rho = pure_state_density(psi)
        Ms, angles = discontinuity_angles(J)
        target = 2.0
        beta_t = float(angles[list(Ms).index(target)])
        L = pathological_jump_operator(J, target, psi, beta_t)
        for M, beta in zip(Ms, angles):
            if M == target:
                continue
            m_ket = rotation_y(J, beta)[:, int(round(J - M))]
            E = np.outer(m_ket, m_ket.conj())
            assert support_change_rate(E, L, rho) > 0


class TestNoiseChannelDispatch:
    def test_unknown_variant(self):
        with pytest.raises(ValidationError):
            NoiseChannel("nonsense")

    def test_parameter_ranges(self):
        with pytest.raises(ValidationError):
            NoiseChannel("identity-mixing", epsilon=1.2)
        with pytest.raises(ValidationError):
            NoiseChannel("collective-depolarizing", gamma_t=-0.1)

    def test_none_variant_identity(self):
        rho = random_density(3, 12)
        assert np.allclose(NoiseChannel("none").apply(rho), rho)
