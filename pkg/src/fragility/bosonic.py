"""Truncated-Fock-space analog of the spin experiments: displaced Fock
probes, number-basis CFI sweeps under quadrature noise, and the large-J
scaling checks that connect the spin discontinuities to the bosonic limit.

Quadrature convention: X = (a + a^dag)/sqrt(2), P = i(a^dag - a)/sqrt(2),
so [X, P] = i and the vacuum has Var(X) = Var(P) = 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import CutoffError, ValidationError
from .fisher import support_threshold
from .linalg import LindbladSpec, lindblad_superoperator, pure_state_density

TAIL_LEVELS = 5
TAIL_MASS_TOL = 1e-10


@dataclass(frozen=True)
class FockSpace:
    n_max: int = 40

    @property
    def dim(self) -> int:
        return self.n_max + 1

    def lowering(self) -> np.ndarray:
        a = np.zeros((self.dim, self.dim), dtype=complex)
        n = np.arange(1, self.dim)
        a[n - 1, n] = np.sqrt(n)
        return a

    def raising(self) -> np.ndarray:
        return self.lowering().conj().T

    def position(self) -> np.ndarray:
        a = self.lowering()
        return (a + a.conj().T) / np.sqrt(2)

    def momentum(self) -> np.ndarray:
        a = self.lowering()
        return 1j * (a.conj().T - a) / np.sqrt(2)

    def number(self) -> np.ndarray:
        return np.diag(np.arange(self.dim).astype(complex))

    def tail_mass(self, vector: np.ndarray) -> float:
        return float(np.sum(np.abs(vector[self.n_max - TAIL_LEVELS + 1:]) ** 2))


def displacement_operator(alpha: float, space: FockSpace) -> np.ndarray:
    """D(alpha) = exp(alpha (a^dag - a)) for real alpha."""
    a = space.lowering()
    gen = alpha * (a.conj().T - a)
    # anti-Hermitian generator: exponentiate through the Hermitian part
    w, V = np.linalg.eigh(1j * gen)
    return (V * np.exp(-1j * w)) @ V.conj().T


def displaced_fock_state(space: FockSpace, n: int, alpha: float) -> np.ndarray:
    """D(alpha)|n> with a truncation-tail check."""
    if not (0 <= n < space.dim):
        raise ValidationError(f"Fock index {n} outside the truncated space")
    ket = np.zeros(space.dim, dtype=complex)
    ket[n] = 1.0
    out = displacement_operator(alpha, space) @ ket
    tail = space.tail_mass(out)
    if tail > TAIL_MASS_TOL:
        suggested = int(np.ceil(space.n_max + 10 + 4 * abs(alpha) ** 2))
        raise CutoffError(
            f"displaced state has tail mass {tail:.3e} above the top "
            f"{TAIL_LEVELS} levels; increase n_max (suggestion: {suggested})",
            suggested_cutoff=suggested,
        )
    return out


def quadrature_noise_propagator(space: FockSpace, gamma_t: float) -> np.ndarray:
    """exp(L t) for the jump set {sqrt(gamma) X, sqrt(gamma) P}, as a dense
    matrix on row-major vectorized states.  Probe-independent, so one
    propagator serves a whole sweep."""
    spec = LindbladSpec(
        jump_operators=[(space.position(), 1.0), (space.momentum(), 1.0)],
        duration=gamma_t,
    )
    S = lindblad_superoperator(spec)
    return scipy.linalg.expm(S * gamma_t)


def bosonic_cfi_sweep(probe_n: int, alphas: np.ndarray, gamma_t: float,
                      space: FockSpace | None = None) -> dict:
    """Number-basis CFI of the displaced Fock probe versus displacement,
    with the parameter generated by P (a position shift) and quadrature
    noise applied to the probe before encoding."""
    if space is None:
        space = FockSpace()
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    P = space.momentum()
    prop = quadrature_noise_propagator(space, gamma_t) if gamma_t > 0 else None
    d = space.dim
    cfi = np.empty(len(alphas))
    for k, alpha in enumerate(alphas):
        psi = displaced_fock_state(space, probe_n, alpha)
        rho = pure_state_density(psi)
        if prop is not None:
            rho = (prop @ rho.reshape(-1)).reshape(d, d)
            rho = (rho + rho.conj().T) / 2
        tau = support_threshold(rho)
        p = np.clip(np.diag(rho).real, 0.0, None)
        dp = np.diag(-1j * (P @ rho - rho @ P)).real
        mask = p > tau
        cfi[k] = float(np.sum(dp[mask] ** 2 / p[mask]))
    return {"alpha": alphas, "cfi": cfi, "probe_n": probe_n, "gamma_t": gamma_t}


def displaced_one_amplitude(space: FockSpace, n: int, alpha: float) -> float:
    """|<n|D(alpha)|1>|, the oracle whose zeros mark the sweep's dips."""
    return float(abs(displaced_fock_state(space, 1, alpha)[n]))


def fit_loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise ValidationError("scaling fit needs at least 3 points")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def hpa_scaling_check(j_values) -> dict:
    """Scaling exponents of the discontinuity sizes with total spin.

    Branch (a): relative size at the equatorial discontinuity (M = 0),
    expected to shrink as J^(-1/2).  Branch (b): absolute size at fixed
    excitation n = J - M (n = 1), expected to grow linearly in J.
    """
    from .analysis import closed_form_jump

    j_values = np.asarray(sorted(j_values), dtype=float)
    if np.any(j_values < 8):
        raise ValidationError("scaling check expects J >= 8")
    qfi_vals = 6 * j_values - 2
    rel_m0 = np.array([closed_form_jump(J, 0.0) for J in j_values]) / qfi_vals
    abs_n1 = np.array([closed_form_jump(J, J - 1.0) for J in j_values])
    return {
        "j_values": j_values,
        "m0_relative_slope": fit_loglog_slope(j_values, rel_m0),
        "n1_absolute_slope": fit_loglog_slope(j_values, abs_n1),
    }
