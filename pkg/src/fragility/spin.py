"""Angular-momentum operators, Dicke and spin-coherent states, rotations,
and the collective (total-J) basis for N qubits.

Basis convention: |J,M> kets are ordered with M descending from J to -J,
so index 0 is the top state and index 1 is the first excited Dicke state.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.special import gammaln

from .errors import ValidationError

_SPIN_CACHE: dict[int, "SpinOperators"] = {}
_ROTATION_EIG_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


@dataclass(frozen=True)
class SpinOperators:
    J: float
    dim: int
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    jplus: np.ndarray
    jminus: np.ndarray

    def m_values(self) -> np.ndarray:
        return self.J - np.arange(self.dim)


def _validate_spin(J: float) -> int:
    twoJ = 2 * J
    if twoJ < 0 or abs(twoJ - round(twoJ)) > 1e-12:
        raise ValidationError(f"J must be a nonnegative half-integer, got {J}")
    return int(round(twoJ))


def angular_momentum_operators(J: float) -> SpinOperators:
    """J_x, J_y, J_z, J_+/- in the |J,M> basis (M descending). Cached."""
    twoJ = _validate_spin(J)
    if twoJ in _SPIN_CACHE:
        return _SPIN_CACHE[twoJ]
    J = twoJ / 2.0
    d = twoJ + 1
    M = J - np.arange(d)
    jz = np.diag(M).astype(complex)
    # J_+ |J,M> = sqrt(J(J+1) - M(M+1)) |J,M+1>; raising moves one row up.
    raise_amp = np.sqrt(J * (J + 1) - M[1:] * (M[1:] + 1))
    jplus = np.zeros((d, d), dtype=complex)
    jplus[np.arange(d - 1), np.arange(1, d)] = raise_amp
    jminus = jplus.conj().T.copy()
    jx = (jplus + jminus) / 2
    jy = (jplus - jminus) / 2j
    for a in (jz, jplus, jminus, jx, jy):
        a.setflags(write=False)
    ops = SpinOperators(J=J, dim=d, jx=jx, jy=jy, jz=jz, jplus=jplus, jminus=jminus)
    _SPIN_CACHE[twoJ] = ops
    return ops


def dicke_ket(J: float, M: float) -> np.ndarray:
    """Unit vector for |J,M> in the descending-M basis."""
    twoJ = _validate_spin(J)
    J = twoJ / 2.0
    if abs(M) > J or abs(2 * M - round(2 * M)) > 1e-12 or (round(2 * M) - twoJ) % 2:
        raise ValidationError(f"invalid M={M} for J={J}")
    v = np.zeros(twoJ + 1, dtype=complex)
    v[int(round(J - M))] = 1.0
    return v


def rotation_y(J: float, beta: float) -> np.ndarray:
    """exp(-i beta J_y) as a (2J+1)-dimensional unitary."""
    twoJ = _validate_spin(J)
    if twoJ not in _ROTATION_EIG_CACHE:
        ops = angular_momentum_operators(J)
        _ROTATION_EIG_CACHE[twoJ] = np.linalg.eigh(ops.jy)
    w, V = _ROTATION_EIG_CACHE[twoJ]
    return (V * np.exp(-1j * beta * w)) @ V.conj().T


def spin_coherent_amplitudes(J: float, theta: float, phi: float) -> np.ndarray:
    """Amplitudes g_{J,M} of the spin coherent state along (theta, phi),
    in the descending-M basis."""
    twoJ = _validate_spin(J)
    J = twoJ / 2.0
    M = J - np.arange(twoJ + 1)
    logbin = 0.5 * (gammaln(2 * J + 1) - gammaln(J - M + 1) - gammaln(J + M + 1))
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    amps = np.exp(logbin) * np.power(c, J + M) * np.power(s, J - M)
    return amps * np.exp(-1j * M * phi)


def rotated_first_dicke_amplitudes(J: float, theta: float) -> np.ndarray:
    """Amplitudes h_M(theta) of exp(-i theta J_y)|J, J-1>, descending M.

    Uses the pre-simplified polynomial form
      h_M = sqrt((2J-1)! / ((J-M)!(J+M)!)) cos^(J+M-1) sin^(J-M-1) (J cos(theta) - M)
    with half-angle cos/sin, which has no removable singularity at
    theta in {0, pi}; the M = +-J rows are reduced separately because their
    exponents would be -1.
    """
    twoJ = _validate_spin(J)
    if twoJ < 1:
        raise ValidationError("first excited Dicke state needs J >= 1/2")
    J = twoJ / 2.0
    M = J - np.arange(twoJ + 1)
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    cos_th = np.cos(theta)
    logfac = 0.5 * (gammaln(2 * J) - gammaln(J - M + 1) - gammaln(J + M + 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        h = (
            np.exp(logfac)
            * np.power(c, J + M - 1)
            * np.power(s, J - M - 1)
            * (J * cos_th - M)
        )
    # M = J: (J cos - J)/sin(th/2) = -2J sin(th/2).
    h[0] = -np.sqrt(2 * J) * s * c ** (twoJ - 1)
    # M = -J: (J cos + J)/cos(th/2) = 2J cos(th/2).
    h[-1] = np.sqrt(2 * J) * c * s ** (twoJ - 1)
    return h.astype(complex)


def discontinuity_angles(J: float) -> tuple[np.ndarray, np.ndarray]:
    """Angles beta = arccos(M/J) at which h_M vanishes, for M = J-1, ..., -J+1.

    Returns (M values, angles), both ordered by descending M.
    """
    twoJ = _validate_spin(J)
    J = twoJ / 2.0
    M = J - np.arange(1, twoJ)
    return M, np.arccos(M / J)


def pauli_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return sx, sy, sz


def local_operator(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """op acting on one qubit of an n-qubit register (kron embedding)."""
    out = np.eye(1, dtype=complex)
    for i in range(n_sites):
        out = np.kron(out, op if i == site else np.eye(2))
    return out


def collective_operators(N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Total J_x, J_y, J_z on the 2^N product space."""
    sx, sy, sz = pauli_matrices()
    d = 2**N
    jx = np.zeros((d, d), dtype=complex)
    jy = np.zeros((d, d), dtype=complex)
    jz = np.zeros((d, d), dtype=complex)
    for i in range(N):
        jx += local_operator(sx / 2, i, N)
        jy += local_operator(sy / 2, i, N)
        jz += local_operator(sz / 2, i, N)
    return jx, jy, jz


@dataclass(frozen=True)
class CollectiveBlock:
    J: float
    copy: int
    # columns are |J,M> for M = J ... -J, expressed in the 2^N product basis
    vectors: np.ndarray


@dataclass(frozen=True)
class CollectiveBasis:
    N: int
    blocks: list


def su2_multiplicity(N: int, J: float) -> int:
    """Number of spin-J irreps in N qubits (hook length / Catalan-triangle form)."""
    k = int(round(N / 2 - J))
    if k < 0:
        return 0
    return comb(N, k) - (comb(N, k - 1) if k >= 1 else 0)


def build_collective_basis(N: int) -> CollectiveBasis:
    """Joint eigenbasis of total J^2 and J_z, grouped into irrep blocks.

    Degenerate (J, M=J) eigenspaces are split by Gram-Schmidt over the
    computational basis in lexicographic order; the rest of each block is
    generated by repeated lowering so collective operators are exactly
    block diagonal.
    """
    if not (1 <= N <= 10):
        raise ValidationError(f"collective basis supported for 1 <= N <= 10, got {N}")
    jx, jy, jz = collective_operators(N)
    j2 = jx @ jx + jy @ jy + jz @ jz
    w2, V2 = np.linalg.eigh(j2)

    # Candidate J values with the right parity for N qubits.
    j_values = [N / 2 - k for k in range(N // 2 + 1)]
    blocks = []
    total_dim = 0
    for J in sorted(j_values, reverse=True):
        target = J * (J + 1)
        sel = np.abs(w2 - target) < 1e-6
        mult = su2_multiplicity(N, J)
        if not np.any(sel):
            if mult:
                raise ValidationError(f"missing J={J} eigenspace for N={N}")
            continue
        sub = V2[:, sel]
        if sub.shape[1] != mult * int(round(2 * J + 1)):
            raise ValidationError(
                f"J={J} eigenspace has dimension {sub.shape[1]}, "
                f"expected {mult * int(round(2 * J + 1))} from the multiplicity formula"
            )
        # Restrict to the M = J level within this J sector.
        jz_sub = sub.conj().T @ jz @ sub
        wz, Vz = np.linalg.eigh((jz_sub + jz_sub.conj().T) / 2)
        top = sub @ Vz[:, np.abs(wz - J) < 1e-8]
        if top.shape[1] != mult:
            raise ValidationError(f"J={J}, M=J level has wrong multiplicity")
        # Deterministic splitting: project computational basis vectors onto
        # the top level and Gram-Schmidt them in lexicographic order.
        P = top @ top.conj().T
        seeds = []
        for idx in range(2**N):
            v = P[:, idx].copy()
            for u in seeds:
                v -= u * (u.conj() @ v)
            n = np.linalg.norm(v)
            if n > 1e-8:
                seeds.append(v / n)
            if len(seeds) == mult:
                break
        jminus = (jx - 1j * jy).astype(complex)
        for copy, v in enumerate(seeds):
            cols = [v]
            Mval = J
            while Mval > -J + 1e-9:
                nxt = jminus @ cols[-1]
                norm = np.sqrt(J * (J + 1) - Mval * (Mval - 1))
                cols.append(nxt / norm)
                Mval -= 1
            vecs = np.column_stack(cols)
            vecs.setflags(write=False)
            blocks.append(CollectiveBlock(J=J, copy=copy, vectors=vecs))
            total_dim += vecs.shape[1]
    if total_dim != 2**N:
        raise ValidationError(
            f"collective basis incomplete: {total_dim} of {2**N} dimensions"
        )
    return CollectiveBasis(N=N, blocks=blocks)
