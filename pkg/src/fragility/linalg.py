"""Dense complex-matrix kernels: Hermitian eigendecomposition, matrix
exponentials, and Lindblad propagation.

All functions are pure: they never mutate their inputs and hold no state,
so they are safe to call from many threads at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NumericalError, ValidationError

HERMITICITY_TOL = 1e-10
# Eigenvalues of a propagated state in [-POSITIVITY_CLIP, 0) are treated as
# rounding and clipped; anything more negative signals integration failure.
POSITIVITY_CLIP = 1e-8

DENSE_SUPEROP_MAX_DIM = 64


def as_square(A: np.ndarray, name: str = "matrix") -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A.real)) or not np.all(np.isfinite(A.imag)):
        raise ValidationError(f"{name} has non-finite entries")
    return A


def max_asymmetry(A: np.ndarray) -> float:
    """Max-entry norm of A - A^dagger."""
    return float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0


def hermitian_eigendecomposition(
    A: np.ndarray, tol: float = HERMITICITY_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unitary eigenvector matrix of a Hermitian A."""
    A = as_square(A)
    asym = max_asymmetry(A)
    if asym > tol:
        raise ValidationError(
            f"matrix is not Hermitian: max |A - A^dagger| entry = {asym:.3e}"
        )
    w, V = np.linalg.eigh((A + A.conj().T) / 2)
    return w, V


def matrix_exponential(A: np.ndarray) -> np.ndarray:
    """exp(A) for a square complex matrix.

    (Anti-)Hermitian inputs go through an eigendecomposition, which keeps
    the result exactly normal (unitary for anti-Hermitian A); everything
    else falls back to scipy's scaling-and-squaring Pade approximation.
    """
    A = as_square(A)
    if max_asymmetry(A) <= 1e-12 * max(1.0, float(np.max(np.abs(A))) if A.size else 1.0):
        w, V = np.linalg.eigh((A + A.conj().T) / 2)
        return (V * np.exp(w)) @ V.conj().T
    if float(np.max(np.abs(A + A.conj().T))) <= 1e-12 * max(1.0, float(np.max(np.abs(A)))):
        # A = -iH with H Hermitian; exp(A) = V e^{-i w} V^dagger is unitary.
        H = (1j * A + (1j * A).conj().T) / 2
        w, V = np.linalg.eigh(H)
        return (V * np.exp(-1j * w)) @ V.conj().T
    return scipy.linalg.expm(A)


def assert_density(
    rho: np.ndarray,
    herm_tol: float = 1e-12,
    eig_floor: float = -1e-10,
    name: str = "density operator",
) -> np.ndarray:
    """Validate the DensityOperator invariants; returns rho as a complex array."""
    rho = as_square(rho, name)
    asym = max_asymmetry(rho)
    if asym > herm_tol:
        raise ValidationError(f"{name} not Hermitian: max asymmetry {asym:.3e}")
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if w.min() < eig_floor:
        raise ValidationError(f"{name} has eigenvalue {w.min():.3e} below {eig_floor}")
    tr = float(np.trace(rho).real)
    if not (0.0 < tr <= 1.0 + 1e-12):
        raise ValidationError(f"{name} trace {tr} outside (0, 1]")
    return rho


def pure_state_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    n = np.linalg.norm(psi)
    if not np.isfinite(n) or n == 0:
        raise ValidationError("state vector has zero or non-finite norm")
    psi = psi / n
    return np.outer(psi, psi.conj())


def purity(rho: np.ndarray) -> float:
    tr = float(np.trace(rho).real)
    return float(np.trace(rho @ rho).real) / tr**2 if tr else 0.0


@dataclass(frozen=True)
class LindbladSpec:
    """Jump operators with rates, applied for a dimensionless duration.

    The generator is sum_k gamma_k ( L_k rho L_k^dag - {L_k^dag L_k, rho}/2 ).
    """

    jump_operators: list = field(default_factory=list)  # [(matrix, rate >= 0)]
    duration: float = 0.0

    def __post_init__(self):
        if self.duration < 0:
            raise ValidationError(f"duration must be >= 0, got {self.duration}")
        dims = set()
        for L, gamma in self.jump_operators:
            L = as_square(np.asarray(L), "jump operator")
            if gamma < 0:
                raise ValidationError(f"jump rate must be >= 0, got {gamma}")
            dims.add(L.shape[0])
        if len(dims) > 1:
            raise ValidationError(f"jump operators have mixed dimensions {sorted(dims)}")

    @property
    def dim(self) -> int | None:
        return self.jump_operators[0][0].shape[0] if self.jump_operators else None


def lindblad_generator(rho: np.ndarray, spec: LindbladSpec) -> np.ndarray:
    """Action of the Lindbladian on rho."""
    out = np.zeros_like(rho)
    for L, gamma in spec.jump_operators:
        L = np.asarray(L, dtype=complex)
        LdL = L.conj().T @ L
        out += gamma * (L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL))
    return out


def lindblad_superoperator(spec: LindbladSpec) -> np.ndarray:
    """Dense matrix of the Lindbladian acting on row-major vec(rho)."""
    d = spec.dim
    if d is None:
        raise ValidationError("superoperator requires at least one jump operator")
    eye = np.eye(d)
    S = np.zeros((d * d, d * d), dtype=complex)
    for L, gamma in spec.jump_operators:
        L = np.asarray(L, dtype=complex)
        LdL = L.conj().T @ L
        # vec(A rho B) = (A kron B^T) vec(rho) for row-major vec.
        S += gamma * (
            np.kron(L, L.conj())
            - 0.5 * np.kron(LdL, eye)
            - 0.5 * np.kron(eye, LdL.T)
        )
    return S


def _clip_positivity(rho: np.ndarray, target_trace: float) -> np.ndarray:
    w, V = np.linalg.eigh((rho + rho.conj().T) / 2)
    if w.min() < -POSITIVITY_CLIP:
        raise NumericalError(
            f"propagated state has eigenvalue {w.min():.3e}; integration failed"
        )
    if w.min() >= 0:
        return rho
    w = np.clip(w, 0.0, None)
    rho = (V * w) @ V.conj().T
    tr = float(np.trace(rho).real)
    return rho * (target_trace / tr)


def lindblad_propagate(
    rho0: np.ndarray,
    spec: LindbladSpec,
    method: str = "auto",
    rk4_step: float = 1e-4,
) -> np.ndarray:
    """Propagate rho0 under exp(L t) for t = spec.duration.

    method: "dense-superoperator" (dim <= 64), "fixed-step-rk4", or "auto".
    """
    rho0 = as_square(rho0, "initial state")
    d = rho0.shape[0]
    if spec.dim is not None and spec.dim != d:
        raise ValidationError(
            f"dimension mismatch: state is {d}, jump operators are {spec.dim}"
        )
    if spec.duration == 0 or not spec.jump_operators:
        return rho0.copy()

    if method == "auto":
        method = "dense-superoperator" if d <= DENSE_SUPEROP_MAX_DIM else "fixed-step-rk4"
    if method == "dense-superoperator":
        if d > DENSE_SUPEROP_MAX_DIM:
            raise ValidationError(
                f"dense superoperator limited to dim <= {DENSE_SUPEROP_MAX_DIM}, got {d}"
            )
        S = lindblad_superoperator(spec)
        prop = scipy.linalg.expm(S * spec.duration)
        rho = (prop @ rho0.reshape(-1)).reshape(d, d)
    elif method == "fixed-step-rk4":
        rho = _rk4(rho0, spec, rk4_step)
    else:
        raise ValidationError(f"unknown propagation method {method!r}")

    rho = (rho + rho.conj().T) / 2
    tr0 = float(np.trace(rho0).real)
    tr = float(np.trace(rho).real)
    if abs(tr - tr0) > 1e-9:
        raise NumericalError(f"trace drifted by {tr - tr0:.3e} during propagation")
    return _clip_positivity(rho, tr0)


def _rk4(rho0: np.ndarray, spec: LindbladSpec, step: float) -> np.ndarray:
    t = spec.duration
    n_steps = max(1, int(np.ceil(t / step)))
    h = t / n_steps
    rho = rho0.astype(complex)
    for _ in range(n_steps):
        k1 = lindblad_generator(rho, spec)
        k2 = lindblad_generator(rho + 0.5 * h * k1, spec)
        k3 = lindblad_generator(rho + 0.5 * h * k2, spec)
        k4 = lindblad_generator(rho + h * k3, spec)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return rho


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    w = np.linalg.eigvalsh(((a - b) + (a - b).conj().T) / 2)
    return 0.5 * float(np.sum(np.abs(w)))
