"""Classical and quantum Fisher information for discrete outcome models,
jump-discontinuity sizes, and the signal/SNR lower bounds.

Conventions: a parameter theta is encoded unitarily, rho_theta =
exp(-i theta H) rho exp(i theta H), and measured with a POVM {E_lam}.  The
classical Fisher information sums (dp)^2/p over the support only; outcomes
whose probability falls below a support threshold contribute nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InfiniteDiscontinuityError, ValidationError
from .linalg import as_square, hermitian_eigendecomposition, max_asymmetry, purity

TAU_DEFAULT = 1e-12
# For pure probes every nonzero outcome probability is bounded well away
# from the rounding floor, so the support cut can sit much lower; this keeps
# genuinely tiny tail outcomes (with non-negligible score) in the sum.
TAU_PURE = 1e-20
PURITY_PURE_CUT = 1.0 - 1e-10
# An outcome with vanishing probability must also have vanishing first
# derivative, otherwise the Fisher information diverges instead of jumping.
DERIVATIVE_TOL = 1e-6

PROB_FLOOR = -1e-12
PROB_SUM_TOL = 1e-10


@dataclass(frozen=True)
class OutcomeModel:
    """Finite outcome model: probabilities and their theta-derivative."""

    labels: Sequence
    probabilities: Callable[[float], np.ndarray]
    derivatives: Callable[[float], np.ndarray]
    tau_supp: float = TAU_DEFAULT
    second_derivatives: Callable[[float], np.ndarray] | None = None

    def probs_checked(self, theta: float) -> np.ndarray:
        p = np.asarray(self.probabilities(theta), dtype=float)
        if p.shape != (len(self.labels),):
            raise ValidationError(
                f"model returned {p.shape} probabilities for {len(self.labels)} outcomes"
            )
        if p.min() < PROB_FLOOR:
            raise ValidationError(f"negative probability {p.min():.3e} at theta={theta}")
        total = float(p.sum())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValidationError(
                f"probabilities sum to {total!r} at theta={theta}, expected 1"
            )
        return p


@dataclass(frozen=True)
class Povm:
    """Positive elements summing to the identity."""

    elements: list

    def __post_init__(self):
        if not self.elements:
            raise ValidationError("POVM needs at least one element")
        elems = [as_square(E, "POVM element") for E in self.elements]
        object.__setattr__(self, "elements", elems)
        d = elems[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for E in elems:
            if E.shape[0] != d:
                raise ValidationError("POVM elements have mixed dimensions")
            if max_asymmetry(E) > 1e-10:
                raise ValidationError("POVM element is not Hermitian")
            wmin = float(np.linalg.eigvalsh((E + E.conj().T) / 2).min())
            if wmin < -1e-10:
                raise ValidationError(f"POVM element has eigenvalue {wmin:.3e}")
            total += E
        if np.max(np.abs(total - np.eye(d))) > 1e-9:
            raise ValidationError("POVM elements do not sum to the identity")

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]


def projective_povm(vectors: np.ndarray) -> Povm:
    """Rank-1 POVM from the columns of a unitary matrix."""
    vectors = np.asarray(vectors, dtype=complex)
    return Povm([np.outer(vectors[:, k], vectors[:, k].conj())
                 for k in range(vectors.shape[1])])


@dataclass(frozen=True)
class EncodedModel:
    """Probe state with a Hermitian generator; theta enters unitarily."""

    probe: np.ndarray
    generator: np.ndarray
    theta: float = 0.0

    def __post_init__(self):
        probe = as_square(self.probe, "probe")
        gen = as_square(self.generator, "generator")
        if max_asymmetry(gen) > 1e-10:
            raise ValidationError("generator must be Hermitian within 1e-10")
        if probe.shape != gen.shape:
            raise ValidationError(
                f"probe dim {probe.shape[0]} != generator dim {gen.shape[0]}"
            )
        object.__setattr__(self, "probe", probe)
        object.__setattr__(self, "generator", gen)

    def state_at(self, theta: float) -> np.ndarray:
        w, V = hermitian_eigendecomposition(self.generator)
        U = (V * np.exp(-1j * theta * w)) @ V.conj().T
        return U @ self.probe @ U.conj().T


def support_threshold(rho: np.ndarray) -> float:
    """Support cut adapted to the probe: tighter for (numerically) pure states."""
    return TAU_PURE if purity(rho) > PURITY_PURE_CUT else TAU_DEFAULT


def induced_model(em: EncodedModel, povm: Povm,
                  tau_supp: float | None = None) -> OutcomeModel:
    """Outcome model p_theta(lam) = Tr(E_lam rho_theta) with analytic derivative
    dp = -i Tr(E_lam [H, rho_theta])."""
    if povm.dim != em.probe.shape[0]:
        raise ValidationError(
            f"POVM dim {povm.dim} != probe dim {em.probe.shape[0]}"
        )
    if tau_supp is None:
        tau_supp = support_threshold(em.probe)
    H = em.generator
    elements = povm.elements

    def probs(theta: float) -> np.ndarray:
        rho = em.state_at(theta)
        return np.array([float(np.trace(E @ rho).real) for E in elements])

    def derivs(theta: float) -> np.ndarray:
        rho = em.state_at(theta)
        comm = H @ rho - rho @ H
        return np.array([float((-1j * np.trace(E @ comm)).real) for E in elements])

    def second_derivs(theta: float) -> np.ndarray:
        rho = em.state_at(theta)
        comm = H @ rho - rho @ H
        dcomm = H @ comm - comm @ H
        return np.array([float(-np.trace(E @ dcomm).real) for E in elements])

    return OutcomeModel(
        labels=list(range(len(elements))),
        probabilities=probs,
        derivatives=derivs,
        tau_supp=tau_supp,
        second_derivatives=second_derivs,
    )


def cfi_distribution(model: OutcomeModel, theta: float) -> float:
    """Classical Fisher information sum over the support at theta."""
    p = model.probs_checked(theta)
    dp = np.asarray(model.derivatives(theta), dtype=float)
    mask = p > model.tau_supp
    return float(np.sum(dp[mask] ** 2 / p[mask]))


def cfi_state_povm(em: EncodedModel, povm: Povm,
                   tau_supp: float | None = None) -> float:
    """CFI of a unitarily encoded state measured by a POVM."""
    return cfi_distribution(induced_model(em, povm, tau_supp), em.theta)


def qfi(em: EncodedModel) -> float:
    """Quantum Fisher information via the symmetric logarithmic derivative.

    Built in the probe eigenbasis; eigenvalue pairs with w_i + w_j < 1e-10
    are dropped (rank-deficient directions carry no information).
    """
    rho = em.state_at(em.theta)
    H = em.generator
    w, V = hermitian_eigendecomposition(rho, tol=1e-9)
    # d(rho)/d(theta) = -i[H, rho] in the rotating frame.
    drho = -1j * (H @ rho - rho @ H)
    D = V.conj().T @ drho @ V
    denom = w[:, None] + w[None, :]
    keep = denom >= 1e-10
    terms = np.zeros_like(denom)
    terms[keep] = 2.0 * np.abs(D[keep]) ** 2 / denom[keep]
    return float(np.sum(terms))


def _check_vanishing(p: float, dp: float, tau: float, what: str) -> None:
    if p > tau:
        raise ValidationError(
            f"{what}: outcome probability {p:.3e} exceeds the support threshold {tau:g}"
        )
    if abs(dp) > DERIVATIVE_TOL:
        raise InfiniteDiscontinuityError(
            f"{what}: first derivative {dp:.3e} is nonzero at a zero-probability "
            "outcome, so the Fisher information diverges"
        )


def jump_size_distribution(model: OutcomeModel, theta: float, label,
                           fd_step: float = 1e-4) -> float:
    """Jump size 2 d^2p/dtheta^2 of a vanishing outcome.

    Uses the model's analytic second derivative when supplied, otherwise a
    central finite difference of the first derivative with step fd_step.
    """
    idx = list(model.labels).index(label)
    p = model.probs_checked(theta)[idx]
    dp = float(np.asarray(model.derivatives(theta), dtype=float)[idx])
    _check_vanishing(float(p), dp, model.tau_supp, "jump_size_distribution")
    if model.second_derivatives is not None:
        d2 = float(np.asarray(model.second_derivatives(theta), dtype=float)[idx])
    else:
        dplus = float(np.asarray(model.derivatives(theta + fd_step))[idx])
        dminus = float(np.asarray(model.derivatives(theta - fd_step))[idx])
        d2 = (dplus - dminus) / (2 * fd_step)
    return 2.0 * d2


def jump_size_pure(psi: np.ndarray, H: np.ndarray, elements: Sequence[np.ndarray],
                   tau_supp: float = TAU_PURE) -> float:
    """Jump size 4 sum_lam Tr(E_lam H psi psi^dag H) for a pure probe."""
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    H = as_square(H, "generator")
    hpsi = H @ psi
    total = 0.0
    for E in elements:
        E = as_square(E, "POVM element")
        p = float((psi.conj() @ E @ psi).real)
        dp = float((-1j * (psi.conj() @ E @ hpsi - hpsi.conj() @ E @ psi)).real)
        _check_vanishing(p, dp, tau_supp, "jump_size_pure")
        total += 4.0 * float((hpsi.conj() @ E @ hpsi).real)
    return total


def jump_size_mixed(rho: np.ndarray, H: np.ndarray, elements: Sequence[np.ndarray],
                    tau_supp: float = TAU_DEFAULT) -> float:
    """Jump size -2 sum_lam Tr(E_lam [H,[H,rho]]) for a possibly mixed probe."""
    rho = as_square(rho, "probe")
    H = as_square(H, "generator")
    comm = H @ rho - rho @ H
    dcomm = H @ comm - comm @ H
    total = 0.0
    for E in elements:
        E = as_square(E, "POVM element")
        p = float(np.trace(E @ rho).real)
        dp = float((-1j * np.trace(E @ comm)).real)
        _check_vanishing(p, dp, tau_supp, "jump_size_mixed")
        total += -2.0 * float(np.trace(E @ dcomm).real)
    return total


def signal_lower_bound(model: OutcomeModel, theta: float) -> float:
    """(d<Lambda>/dtheta)^2 / Var(Lambda): the method-of-moments floor on CFI.

    Outcome labels must be numeric.  Degenerate (zero-variance) models give 0.
    """
    lam = np.asarray(model.labels, dtype=float)
    p = model.probs_checked(theta)
    dp = np.asarray(model.derivatives(theta), dtype=float)
    mean = float(lam @ p)
    var = float((lam - mean) ** 2 @ p)
    if var <= 0:
        return 0.0
    dmean = float(lam @ dp)
    return dmean**2 / var


def snr_contribution(p_lam: float, dp_lam: float, eps: float, sigma_lam: float,
                     jump: float) -> float:
    """Small-probability contribution (1-eps) * jump * SNR of one outcome,
    with SNR = (1-eps) p / (eps sigma)."""
    if not (0.0 < eps < 1.0):
        raise ValidationError(f"eps must lie in (0, 1), got {eps}")
    if sigma_lam <= 0:
        raise ValidationError(f"sigma must be positive, got {sigma_lam}")
    if p_lam <= 0:
        return 0.0
    return (1.0 - eps) * jump * ((1.0 - eps) * p_lam) / (eps * sigma_lam)


def snr_exact_term(p_lam: float, dp_lam: float, eps: float, sigma_lam: float) -> float:
    """Exact CFI term of an outcome under identity mixing with weight eps."""
    denom = (1.0 - eps) * p_lam + eps * sigma_lam
    return (1.0 - eps) ** 2 * dp_lam**2 / denom if denom > 0 else 0.0
