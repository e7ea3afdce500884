"""Central experiments: CFI sweeps over the measurement angle, discontinuity
catalogs, fragile-state decompositions with the Jensen bound, the
approximate-loss formula, the sphere scan, and the echo measurement.

All sweeps work in the fiducial frame: instead of rotating the measurement
basis by beta, the inverse rotation is applied to the state and the
measurement stays in the J_z eigenbasis.  The generator J_y commutes with
the frame rotation, so the induced outcome model is unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .channels import NoiseChannel
from .errors import ValidationError
from .fisher import (
    TAU_DEFAULT,
    TAU_PURE,
    EncodedModel,
    Povm,
    cfi_state_povm,
    jump_size_pure,
    qfi,
    support_threshold,
)
from .linalg import as_square, hermitian_eigendecomposition, pure_state_density
from .spin import (
    CollectiveBasis,
    angular_momentum_operators,
    build_collective_basis,
    collective_operators,
    dicke_ket,
    discontinuity_angles,
    rotated_first_dicke_amplitudes,
    rotation_y,
)


@dataclass(frozen=True)
class FisherSweep:
    beta: np.ndarray
    cfi: np.ndarray
    qfi: float
    gamma_t: float = 0.0
    probe: str = ""
    noise: str = ""

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        cfi = np.asarray(self.cfi, dtype=float)
        if beta.ndim != 1 or beta.shape != cfi.shape:
            raise ValidationError("beta and cfi grids must be matching 1-D arrays")
        if np.any(np.diff(beta) <= 0):
            raise ValidationError("beta grid must be strictly increasing")
        if cfi.min() < -1e-10 or cfi.max() > self.qfi + 1e-8:
            raise ValidationError(
                f"CFI range [{cfi.min():.3e}, {cfi.max():.3e}] violates "
                f"[0, QFI + 1e-8] with QFI = {self.qfi}"
            )
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "cfi", cfi)


@dataclass(frozen=True)
class DiscontinuityRecord:
    beta_star: float
    M: float
    delta_f: float


@dataclass(frozen=True)
class FragileDecomposition:
    states: list  # unit vectors
    weights: np.ndarray
    residual: np.ndarray
    fragile_trace: float

    @property
    def residual_trace(self) -> float:
        return float(np.trace(self.residual).real)


def default_beta_grid(J: float, n_uniform: int = 1001, n_dense: int = 50,
                      halfwidth: float = 0.02,
                      beta_stars: np.ndarray | None = None) -> np.ndarray:
    """Uniform grid on [0, pi] densified around each discontinuity angle,
    with every discontinuity angle included exactly."""
    if beta_stars is None:
        _, beta_stars = discontinuity_angles(J)
    pts = [np.linspace(0.0, np.pi, n_uniform)]
    for b in np.atleast_1d(beta_stars):
        window = np.linspace(b - halfwidth, b + halfwidth, n_dense)
        pts.append(window[(window > 0) & (window < np.pi)])
        pts.append(np.array([b]))
    grid = np.unique(np.concatenate(pts))
    return grid


def _diagonal_probabilities(rho: np.ndarray, H: np.ndarray,
                            basis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """p and dp for the projective measurement given by the columns of basis."""
    comm = -1j * (H @ rho - rho @ H)
    p = np.einsum("im,ij,jm->m", basis.conj(), rho, basis).real
    dp = np.einsum("im,ij,jm->m", basis.conj(), comm, basis).real
    return p, dp


def _cfi_from_diag(p: np.ndarray, dp: np.ndarray, tau: float) -> float:
    mask = p > tau
    return float(np.sum(dp[mask] ** 2 / p[mask]))


def sweep_cfi(probe: np.ndarray, noise: NoiseChannel, J: float,
              beta_grid: np.ndarray | None = None) -> FisherSweep:
    """CFI versus measurement angle for a spin probe measured in the
    beta-rotated J_z eigenbasis with generator J_y.

    The noise channel acts on the probe before the parameter is encoded.
    """
    ops = angular_momentum_operators(J)
    probe = as_square(probe, "probe")
    if probe.shape[0] != ops.dim:
        raise ValidationError(f"probe dim {probe.shape[0]} != 2J+1 = {ops.dim}")
    if beta_grid is None:
        beta_grid = default_beta_grid(J)
    rho = noise.apply(probe)
    tau = support_threshold(rho)
    H = np.asarray(ops.jy)
    qfi_ref = qfi(EncodedModel(rho, H))
    cfi = np.empty(len(beta_grid))
    for k, beta in enumerate(beta_grid):
        basis = rotation_y(J, beta)
        p, dp = _diagonal_probabilities(rho, H, basis)
        cfi[k] = _cfi_from_diag(p, dp, tau)
    return FisherSweep(
        beta=beta_grid, cfi=cfi, qfi=qfi_ref,
        gamma_t=noise.gamma_t, probe=f"first-dicke J={J}", noise=noise.variant,
    )


def closed_form_jump(J: float, M: float) -> float:
    """Discontinuity size 8J ((J+M)/2J)^(J+M) ((J-M)/2J)^(J-M) C(2J, J-M),
    evaluated in the log domain so it stays finite up to J ~ hundreds."""
    if abs(M) >= J:
        raise ValidationError(f"M={M} must satisfy |M| < J={J}")
    log = (
        np.log(8 * J)
        + (J + M) * np.log((J + M) / (2 * J))
        + (J - M) * np.log((J - M) / (2 * J))
        + gammaln(2 * J + 1) - gammaln(J - M + 1) - gammaln(J + M + 1)
    )
    return float(np.exp(log))


def locate_discontinuities(J: float, validate: bool = True) -> list:
    """Catalog of (beta*, M, jump size) for the first excited Dicke probe,
    J_z-eigenbasis measurement, generator J_y.

    Sizes come from the closed form; with validate=True each is checked
    against the matrix-element jump formula.
    """
    ops = angular_momentum_operators(J)
    Ms, angles = discontinuity_angles(J)
    psi = dicke_ket(J, J - 1)
    records = []
    for M, beta in zip(Ms, angles):
        size = closed_form_jump(J, M)
        if validate:
            basis = rotation_y(J, beta)
            m_ket = basis[:, int(round(ops.J - M))]
            direct = jump_size_pure(
                psi, np.asarray(ops.jy), [np.outer(m_ket, m_ket.conj())]
            )
            rel = abs(direct - size) / size
            if rel > 1e-6:
                raise ValidationError(
                    f"jump size mismatch at (J={J}, M={M}): closed form {size}, "
                    f"matrix element {direct} (relative {rel:.2e})"
                )
        records.append(DiscontinuityRecord(beta_star=float(beta), M=float(M),
                                           delta_f=size))
    return records


RANGE_TOL = 1e-9
GREEDY_STOP = 1e-6


def max_fragile_weight(rho: np.ndarray, phi: np.ndarray,
                       eigendecomp: tuple[np.ndarray, np.ndarray] | None = None
                       ) -> float:
    """Largest q keeping rho - q |phi><phi| positive semidefinite.

    Equals 1/<phi|rho^+|phi> when phi lies in the range of rho (pseudo-inverse
    feasibility); 0 when any component of phi sticks out of the range.
    """
    phi = np.asarray(phi, dtype=complex).ravel()
    phi = phi / np.linalg.norm(phi)
    if eigendecomp is None:
        w, V = hermitian_eigendecomposition(as_square(rho, "state"), tol=1e-9)
    else:
        w, V = eigendecomp
    cut = 1e-12 * max(float(w.max()), 1e-300)
    keep = w > cut
    y = V[:, keep].conj().T @ phi
    out_of_range = 1.0 - float(np.sum(np.abs(y) ** 2))
    if out_of_range > RANGE_TOL:
        return 0.0
    denom = float(np.sum(np.abs(y) ** 2 / w[keep]))
    return 1.0 / denom if denom > 0 else 0.0


def fragile_decomposition(rho: np.ndarray, candidates: np.ndarray,
                          povm_elements: list | None = None
                          ) -> FragileDecomposition:
    """Greedy largest-weight-first extraction of fragile pure components.

    candidates: matrix whose columns are unit vectors, each annihilated by at
    least one of the supplied POVM elements (checked when given, tol 1e-8).
    Extraction stops when the best extractable weight drops below 1e-6; the
    leftover is the positive residual.
    """
    rho = as_square(rho, "state")
    candidates = np.asarray(candidates, dtype=complex)
    if candidates.ndim != 2 or candidates.shape[0] != rho.shape[0]:
        raise ValidationError("candidates must be columns matching the state dim")
    candidates = candidates / np.linalg.norm(candidates, axis=0)
    if povm_elements is not None:
        for k in range(candidates.shape[1]):
            c = candidates[:, k]
            probs = [float((c.conj() @ E @ c).real) for E in povm_elements]
            if min(probs) > 1e-8:
                raise ValidationError(
                    f"candidate {k} is not fragile: smallest outcome probability "
                    f"{min(probs):.3e}"
                )
    residual = rho.copy()
    states: list[np.ndarray] = []
    weights: list[float] = []
    while True:
        w, V = hermitian_eigendecomposition(
            (residual + residual.conj().T) / 2, tol=1e-8
        )
        cut = 1e-12 * max(float(w.max()), 1e-300)
        keep = w > cut
        if not np.any(keep):
            break
        Y = V[:, keep].conj().T @ candidates  # (rank, n_candidates)
        mass = np.sum(np.abs(Y) ** 2, axis=0)
        in_range = (1.0 - mass) <= RANGE_TOL
        denom = np.sum(np.abs(Y) ** 2 / w[keep, None], axis=0)
        q = np.where(in_range & (denom > 0), 1.0 / np.where(denom > 0, denom, 1.0), 0.0)
        best = int(np.argmax(q))
        if q[best] < GREEDY_STOP:
            break
        phi = candidates[:, best]
        states.append(phi.copy())
        weights.append(float(q[best]))
        residual = residual - q[best] * np.outer(phi, phi.conj())
    weights_arr = np.asarray(weights, dtype=float)
    residual = (residual + residual.conj().T) / 2
    return FragileDecomposition(
        states=states, weights=weights_arr, residual=residual,
        fragile_trace=float(weights_arr.sum()),
    )


def jensen_bound(decomp: FragileDecomposition, H: np.ndarray, povm: Povm) -> float:
    """Weighted ensemble CFI: sum_i q_i F_C[phi_i] + F_C[residual].

    The residual term uses degree-1 homogeneity of the CFI, F_C[w rho] =
    w F_C[rho], so the residual never needs renormalizing conceptually.
    """
    total = 0.0
    for phi, q in zip(decomp.states, decomp.weights):
        em = EncodedModel(pure_state_density(phi), H)
        total += q * cfi_state_povm(em, povm, tau_supp=TAU_PURE)
    tr = decomp.residual_trace
    if tr > 1e-12:
        em = EncodedModel(decomp.residual / tr, H)
        total += tr * cfi_state_povm(em, povm, tau_supp=TAU_DEFAULT)
    return total


def minimizing_condition_residual(p_model, g_model, theta: float) -> float:
    """max over outcomes of |g dp - p dg|; zero iff the ensemble member
    saturates Jensen's inequality."""
    p = np.asarray(p_model.probabilities(theta), dtype=float)
    dp = np.asarray(p_model.derivatives(theta), dtype=float)
    g = np.asarray(g_model.probabilities(theta), dtype=float)
    dg = np.asarray(g_model.derivatives(theta), dtype=float)
    if p.shape != g.shape:
        raise ValidationError("models must share the outcome set")
    return float(np.max(np.abs(g * dp - p * dg)))


def approximate_loss(p: np.ndarray, dp: np.ndarray, sigma: np.ndarray,
                     gamma_dt: float, jumps: np.ndarray,
                     tau_supp: float = TAU_PURE) -> float:
    """First-order estimate of the CFI lost when the distribution is perturbed
    to p + gamma_dt * sigma: sum_lam DF^(lam) / (p/(gamma_dt sigma) + 1).

    DF^(lam) is the jump size where p vanishes and (dp)^2/p elsewhere; sigma
    must be a trace-free direction (sums to zero).
    """
    p = np.asarray(p, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if abs(sigma.sum()) > 1e-10:
        raise ValidationError(
            f"noise direction must sum to 0, got {sigma.sum():.3e}"
        )
    if gamma_dt < 0:
        raise ValidationError("gamma_dt must be >= 0")
    if gamma_dt == 0:
        return 0.0
    total = 0.0
    for k in range(len(p)):
        if p[k] > tau_supp:
            num = dp[k] ** 2 / p[k]
        else:
            num = jumps[k]
        add = gamma_dt * sigma[k]
        denom = p[k] + add
        if num == 0 or add == 0 or denom <= 0:
            continue
        total += num * add / denom
    return total


@dataclass(frozen=True)
class EchoMeasurement:
    povm: Povm
    degenerate: bool
    jump: float


def loschmidt_echo_povm(psi: np.ndarray, H: np.ndarray,
                        theta: float) -> EchoMeasurement:
    """Three-element measurement {|psi><psi|, |perp><perp|, rest}, where
    |perp> spans the direction the encoded state leaves |psi| along.

    At theta = 0 the perp outcome has probability 0 with a discontinuity of
    size 4 |<perp|H|psi>|^2.  If the encoded state never leaves |psi>
    (H acts trivially on it), the degenerate two-element measurement is
    returned with a flag and jump 0.
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    H = as_square(H, "generator")
    d = len(psi)
    w, V = hermitian_eigendecomposition(H)
    chi = (V * np.exp(-1j * theta * w)) @ V.conj().T @ psi
    perp = chi - (psi.conj() @ chi) * psi
    if np.linalg.norm(perp) < 1e-12:
        # theta = 0 (or a revival): use the instantaneous escape direction.
        perp = H @ psi - (psi.conj() @ H @ psi) * psi
    norm = np.linalg.norm(perp)
    proj_psi = np.outer(psi, psi.conj())
    if norm < 1e-12:
        elements = [proj_psi, np.eye(d) - proj_psi]
        return EchoMeasurement(povm=Povm(elements), degenerate=True, jump=0.0)
    perp = perp / norm
    proj_perp = np.outer(perp, perp.conj())
    elements = [proj_psi, proj_perp, np.eye(d) - proj_psi - proj_perp]
    jump = 4.0 * abs(perp.conj() @ H @ psi) ** 2
    return EchoMeasurement(povm=Povm(elements), degenerate=False, jump=float(jump))


# ---------------------------------------------------------------------------
# Experiment drivers built from the pieces above.
# ---------------------------------------------------------------------------


def collective_fragile_candidates(J: float) -> np.ndarray:
    """Fiducial-frame fragile candidates: the rotated first excited Dicke
    state at every discontinuity angle, both rotation senses."""
    Ms, angles = discontinuity_angles(J)
    cols = []
    for beta in angles:
        for s in (1.0, -1.0):
            cols.append(rotated_first_dicke_amplitudes(J, s * beta))
    return np.column_stack(cols)


def jensen_sweep(J: float, noise: NoiseChannel,
                 beta_grid: np.ndarray | None = None) -> dict:
    """Fig.-3-style experiment: CFI, Jensen bound, and fragile/residual trace
    versus beta for the noisy first excited Dicke probe."""
    ops = angular_momentum_operators(J)
    if beta_grid is None:
        beta_grid = default_beta_grid(J)
    rho_noisy = noise.apply(pure_state_density(dicke_ket(J, J - 1)))
    tau = support_threshold(rho_noisy)
    H = np.asarray(ops.jy)
    candidates = collective_fragile_candidates(J)
    fiducial = Povm([np.outer(e, e.conj())
                     for e in np.eye(ops.dim, dtype=complex)])
    out = {"beta": np.asarray(beta_grid, dtype=float),
           "cfi": np.empty(len(beta_grid)),
           "jensen_bound": np.empty(len(beta_grid)),
           "fragile_trace": np.empty(len(beta_grid)),
           "residual_trace": np.empty(len(beta_grid))}
    for k, beta in enumerate(beta_grid):
        U = rotation_y(J, beta)
        rho_fid = U.conj().T @ rho_noisy @ U
        p, dp = _diagonal_probabilities(rho_fid, H, np.eye(ops.dim, dtype=complex))
        out["cfi"][k] = _cfi_from_diag(p, dp, tau)
        decomp = fragile_decomposition(rho_fid, candidates)
        out["jensen_bound"][k] = jensen_bound(decomp, H, fiducial)
        out["fragile_trace"][k] = decomp.fragile_trace
        out["residual_trace"][k] = decomp.residual_trace
    return out


def local_fragile_candidates(basis: CollectiveBasis) -> np.ndarray:
    """Fragile candidates for the N-qubit problem: the collective candidates
    of every irrep block, embedded through the block vectors."""
    cols = []
    for block in basis.blocks:
        J = block.J
        if J < 1:
            continue
        Ms, angles = discontinuity_angles(J)
        for beta in angles:
            for s in (1.0, -1.0):
                cols.append(block.vectors
                            @ rotated_first_dicke_amplitudes(J, s * beta))
    if not cols:
        raise ValidationError("no fragile candidates for this qubit count")
    return np.column_stack(cols)


def total_jz_projectors(N: int) -> tuple[np.ndarray, list]:
    """Projectors onto the eigenvalues of the total J_z on N qubits,
    diagonal in the product basis.  Returns (M values, projectors)."""
    diag = np.zeros(2**N)
    for idx in range(2**N):
        ones = bin(idx).count("1")
        diag[idx] = (N - 2 * ones) / 2.0
    m_values = np.arange(N / 2.0, -N / 2.0 - 0.5, -1.0)
    projectors = []
    for m in m_values:
        P = np.diag((np.abs(diag - m) < 1e-9).astype(complex))
        projectors.append(P)
    return m_values, projectors


def local_jensen_sweep(N: int, noise: NoiseChannel,
                       beta_grid: np.ndarray | None = None) -> dict:
    """Fig.-4-style experiment: N qubits in the top-block first excited Dicke
    state under local noise, measured via the total-J_z eigenvalue in the
    rotated frame."""
    basis = build_collective_basis(N)
    J_top = N / 2.0
    if beta_grid is None:
        stars = np.concatenate([discontinuity_angles(b.J)[1]
                                for b in basis.blocks if b.J >= 1])
        beta_grid = default_beta_grid(J_top, beta_stars=np.unique(stars))
    top = next(b for b in basis.blocks if b.J == J_top)
    psi = top.vectors @ dicke_ket(J_top, J_top - 1)
    rho_noisy = noise.apply(pure_state_density(psi))
    tau = support_threshold(rho_noisy)
    jx, jy, jz = collective_operators(N)
    H = jy
    wy, Vy = np.linalg.eigh(jy)
    _, projectors = total_jz_projectors(N)
    fiducial = Povm(projectors)
    candidates = local_fragile_candidates(basis)
    out = {"beta": np.asarray(beta_grid, dtype=float),
           "cfi": np.empty(len(beta_grid)),
           "jensen_bound": np.empty(len(beta_grid)),
           "fragile_trace": np.empty(len(beta_grid)),
           "residual_trace": np.empty(len(beta_grid))}
    comm_base = -1j * (H @ rho_noisy - rho_noisy @ H)
    for k, beta in enumerate(beta_grid):
        U = (Vy * np.exp(-1j * beta * wy)) @ Vy.conj().T
        rho_fid = U.conj().T @ rho_noisy @ U
        comm = U.conj().T @ comm_base @ U
        p = np.array([float(np.trace(P @ rho_fid).real) for P in projectors])
        dp = np.array([float(np.trace(P @ comm).real) for P in projectors])
        out["cfi"][k] = _cfi_from_diag(p, dp, tau)
        decomp = fragile_decomposition(rho_fid, candidates)
        out["jensen_bound"][k] = jensen_bound(decomp, H, fiducial)
        out["fragile_trace"][k] = decomp.fragile_trace
        out["residual_trace"][k] = decomp.residual_trace
    return out


def sphere_scan(J: float, eps: float, theta_grid: np.ndarray,
                phi_grid: np.ndarray) -> dict:
    """CFI of the identity-mixed first excited Dicke probe measured along the
    direction (theta_n, phi_n), with the generator co-rotated to stay in the
    measurement's meridian plane.

    Because both the probe and the fiducial measurement are J_z-diagonal, the
    result is exactly independent of phi_n.
    """
    from .channels import identity_mix

    ops = angular_momentum_operators(J)
    rho = identity_mix(pure_state_density(dicke_ket(J, J - 1)), eps)
    tau = support_threshold(rho)
    wz = ops.m_values()
    rows = {"theta_n": [], "phi_n": [], "cfi": []}
    for th in np.atleast_1d(theta_grid):
        for ph in np.atleast_1d(phi_grid):
            Rz = np.diag(np.exp(-1j * ph * wz))
            basis = Rz @ rotation_y(J, th)
            H = Rz @ np.asarray(ops.jy) @ Rz.conj().T
            p, dp = _diagonal_probabilities(rho, H, basis)
            rows["theta_n"].append(float(th))
            rows["phi_n"].append(float(ph))
            rows["cfi"].append(_cfi_from_diag(p, dp, tau))
    return {k: np.asarray(v) for k, v in rows.items()}
