"""Concrete noise constructions: collective and local depolarizing channels,
identity mixing, custom jump sets, the support-change test, and the
tailored jump operators that remove a single Fisher-information dip.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .fisher import TAU_DEFAULT
from .linalg import LindbladSpec, as_square, lindblad_propagate, purity
from .spin import angular_momentum_operators, rotation_y


@dataclass(frozen=True)
class NoiseChannel:
    """Tagged channel description; `apply` dispatches on the variant."""

    variant: str  # collective-depolarizing | local-depolarizing |
    #               identity-mixing | custom-lindblad | none
    gamma_t: float = 0.0
    epsilon: float = 0.0
    jump_operators: list = field(default_factory=list)  # [(matrix, rate)]
    N: int | None = None  # qubit count for the local variant
    J: float | None = None  # total spin for the collective variant

    def __post_init__(self):
        known = {"collective-depolarizing", "local-depolarizing",
                 "identity-mixing", "custom-lindblad", "none"}
        if self.variant not in known:
            raise ValidationError(f"unknown noise variant {self.variant!r}")
        if self.gamma_t < 0:
            raise ValidationError(f"gamma_t must be >= 0, got {self.gamma_t}")
        if not (0.0 <= self.epsilon <= 1.0):
            raise ValidationError(f"epsilon must lie in [0, 1], got {self.epsilon}")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        if self.variant == "none":
            return np.asarray(rho, dtype=complex)
        if self.variant == "collective-depolarizing":
            J = self.J if self.J is not None else (rho.shape[0] - 1) / 2
            return apply_collective_depolarizing(rho, J, self.gamma_t)
        if self.variant == "local-depolarizing":
            N = self.N if self.N is not None else int(round(np.log2(rho.shape[0])))
            return apply_local_depolarizing(rho, N, self.gamma_t)
        if self.variant == "identity-mixing":
            return identity_mix(rho, self.epsilon)
        spec = LindbladSpec(jump_operators=self.jump_operators, duration=self.gamma_t)
        return lindblad_propagate(rho, spec)


def apply_collective_depolarizing(rho: np.ndarray, J: float,
                                  gamma_t: float) -> np.ndarray:
    """Lindblad evolution with jump set {J_x, J_y, J_z} at unit rate for
    a duration gamma_t."""
    rho = as_square(rho, "state")
    ops = angular_momentum_operators(J)
    if rho.shape[0] != ops.dim:
        raise ValidationError(
            f"state dim {rho.shape[0]} != 2J+1 = {ops.dim} for J={J}"
        )
    spec = LindbladSpec(
        jump_operators=[(ops.jx, 1.0), (ops.jy, 1.0), (ops.jz, 1.0)],
        duration=gamma_t,
    )
    return lindblad_propagate(rho, spec)


def _single_qubit_depolarize(rho: np.ndarray, site: int, N: int,
                             p: float) -> np.ndarray:
    """(1-p) rho + p (I_site/2 kron Tr_site rho), acting in place on one qubit."""
    d_left = 2**site
    d_right = 2 ** (N - site - 1)
    r = rho.reshape(d_left, 2, d_right, d_left, 2, d_right)
    partial = np.trace(r, axis1=1, axis2=4)  # shape (dl, dr, dl, dr)
    mixed = np.einsum("abcd,ij->aibcjd", partial, np.eye(2) / 2)
    return (1 - p) * rho + p * mixed.reshape(rho.shape)


def apply_local_depolarizing(rho: np.ndarray, N: int, gamma_t: float) -> np.ndarray:
    """Exact product of per-qubit depolarizing channels with mixing weight
    p(t) = 1 - exp(-4 gamma t), equal to the Lindblad evolution with jump
    set {sigma_x, sigma_y, sigma_z} per qubit at unit rate."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2**N, 2**N):
        raise ValidationError(f"state dim {rho.shape[0]} != 2^{N}")
    p = 1.0 - np.exp(-4.0 * gamma_t)
    out = rho
    for site in range(N):
        out = _single_qubit_depolarize(out, site, N, p)
    return out


def local_depolarizing_spec(N: int, rate: float, gamma_t: float) -> LindbladSpec:
    """The per-qubit jump-operator Lindbladian, for use as an integration oracle."""
    from .spin import local_operator, pauli_matrices

    sx, sy, sz = pauli_matrices()
    jumps = []
    for site in range(N):
        for s in (sx, sy, sz):
            jumps.append((local_operator(s, site, N), rate))
    return LindbladSpec(jump_operators=jumps, duration=gamma_t)


def identity_mix(rho: np.ndarray, eps: float) -> np.ndarray:
    """(1 - eps) rho + eps I/d."""
    rho = as_square(rho, "state")
    if not (0.0 <= eps <= 1.0):
        raise ValidationError(f"eps must lie in [0, 1], got {eps}")
    d = rho.shape[0]
    return (1 - eps) * rho + eps * np.trace(rho) * np.eye(d) / d


def support_change_rate(E_lam: np.ndarray, L: np.ndarray, rho: np.ndarray,
                        tau_supp: float = TAU_DEFAULT) -> float:
    """Rate Tr(E_lam L rho L^dag) at which a jump operator feeds probability
    into an outcome currently outside the support.

    A positive value means the noise restores continuity at this outcome;
    zero means the channel leaves the discontinuity in place.
    """
    E_lam = as_square(E_lam, "POVM element")
    L = as_square(L, "jump operator")
    rho = as_square(rho, "state")
    if purity(rho) < 1.0 - 1e-8:
        raise ValidationError("support_change_rate requires a pure state")
    p = float(np.trace(E_lam @ rho).real)
    if p > tau_supp:
        raise ValidationError(
            f"outcome has probability {p:.3e}, already inside the support"
        )
    return float(np.trace(E_lam @ L @ rho @ L.conj().T).real)


def pathological_jump_operator(J: float, M: float, psi: np.ndarray,
                               beta_M: float) -> np.ndarray:
    """J_z modified so that it cannot feed the vanishing outcome M at angle
    beta_M when acting on the probe psi.

    Build the operator in the mixed basis {|M'>_beta <psi_i|}, where
    |M'>_beta are the rotated measurement kets and {psi_i} is an orthonormal
    family with psi_0 = psi: zero out the single (M, psi_0) element of J_z
    and keep every other element.  Equivalently
    L_M = J_z - |M>_beta <M|_beta J_z |psi><psi|.
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    ops = angular_momentum_operators(J)
    if psi.shape[0] != ops.dim:
        raise ValidationError(f"state dim {psi.shape[0]} != 2J+1 = {ops.dim}")
    U = rotation_y(J, beta_M)
    m_ket = U[:, int(round(ops.J - M))]  # |M>_beta in the fixed basis
    overlap = m_ket.conj() @ psi
    if abs(overlap) > 1e-10:
        raise ValidationError(
            f"beta={beta_M} is not a discontinuity angle for this state: "
            f"|<M|psi>| = {abs(overlap):.3e}"
        )
    amp = m_ket.conj() @ ops.jz @ psi
    return np.asarray(ops.jz) - amp * np.outer(m_ket, psi.conj())
