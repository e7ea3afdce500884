"""End-to-end acceptance checks, one per headline property of the package.

Each test prints a single PASS line on success; pytest reports the failures.
"""

import time

import numpy as np

from fragility.analysis import (
    approximate_loss,
    closed_form_jump,
    default_beta_grid,
    jensen_sweep,
    local_jensen_sweep,
    locate_discontinuities,
    sphere_scan,
    sweep_cfi,
)
from fragility.bosonic import (
    FockSpace,
    bosonic_cfi_sweep,
    displaced_fock_state,
    displaced_one_amplitude,
    hpa_scaling_check,
)
from fragility.channels import (
    NoiseChannel,
    apply_local_depolarizing,
    identity_mix,
    local_depolarizing_spec,
    pathological_jump_operator,
)
from fragility.estimation import MleConfig, averaged_abs_bias, bias_monte_carlo
from fragility.fisher import (
    EncodedModel,
    OutcomeModel,
    Povm,
    cfi_distribution,
    cfi_state_povm,
    induced_model,
    jump_size_distribution,
    projective_povm,
    qfi,
)
from fragility.linalg import (
    LindbladSpec,
    lindblad_generator,
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


def _report(name, detail):
    print(f"PASS {name}: {detail}")


def test_criterion_01_qfi_anchor():
    start = time.perf_counter()
    values = {}
    for J in (1, 4, 16):
        em = EncodedModel(pure_state_density(dicke_ket(J, J - 1)),
                          np.asarray(angular_momentum_operators(J).jy))
        values[J] = qfi(em)
        assert abs(values[J] - (6 * J - 2)) < 1e-8
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    _report("criterion 01 (first-excited-probe QFI anchor)",
            f"QFI(J=1,4,16) = {values[1]:.6f}, {values[4]:.6f}, "
            f"{values[16]:.6f} in {elapsed:.3f} s")


def test_criterion_02_noiseless_plateau_and_jumps():
    J = 16
    probe = pure_state_density(dicke_ket(J, J - 1))
    records = locate_discontinuities(J)
    stars = np.array([r.beta_star for r in records])
    grid = default_beta_grid(J, n_uniform=1001, n_dense=50, beta_stars=stars)
    sweep = sweep_cfi(probe, NoiseChannel("none"), J, grid)
    # endpoints beta = 0, pi are the M = +/-J members of the arccos family
    all_stars = np.concatenate([[0.0, np.pi], stars])
    dist = np.min(np.abs(grid[:, None] - all_stars[None, :]), axis=1)
    plateau_err = np.max(np.abs(sweep.cfi[dist >= 1e-3] - 94.0))
    assert plateau_err < 1e-8
    worst_rel = 0.0
    for rec in records:
        idx = int(np.argmin(np.abs(grid - rec.beta_star)))
        assert abs(grid[idx] - rec.beta_star) < 1e-15
        deficit = 94.0 - sweep.cfi[idx]
        rel = abs(deficit - rec.delta_f) / rec.delta_f
        worst_rel = max(worst_rel, rel)
        assert rel < 1e-6
    _report("criterion 02 (noiseless plateau and jump deficits, J=16)",
            f"plateau err {plateau_err:.2e}, worst deficit rel {worst_rel:.2e} "
            f"over {len(records)} discontinuities")


def test_criterion_03_two_outcome_worked_example():
    # two-outcome model p(hit) = theta^2: regular at 0.1, fragile at 0
    model = OutcomeModel(
        labels=["hit", "miss"],
        probabilities=lambda t: np.array([t**2, 1 - t**2]),
        derivatives=lambda t: np.array([2 * t, -2 * t]),
        second_derivatives=lambda t: np.array([2.0, -2.0]),
    )
    at_01 = cfi_distribution(model, 0.1)
    at_0 = cfi_distribution(model, 0.0)
    jump = jump_size_distribution(model, 0.0, "hit")
    assert abs(at_01 - 4.0 / 0.99) < 1e-9
    assert at_0 == 0.0
    assert abs(jump - 4.0) < 1e-9
    _report("criterion 03 (two-outcome worked example)",
            f"CFI(0.1)={at_01:.9f}, CFI(0)={at_0}, jump={jump:.9f}")


def test_criterion_04_qubit_closed_form():
    sz = np.diag([1.0, -1.0]).astype(complex)
    up_x = np.array([1.0, 1.0]) / np.sqrt(2)
    worst = 0.0
    for p in (0.05, 0.1, 0.2, 0.3, 0.5):
        em = EncodedModel(identity_mix(pure_state_density(up_x), p), sz / 2)
        for beta in np.linspace(0.0, np.pi, 100):
            phase = np.exp(-1j * beta / 2)
            Ub = np.diag([phase, phase.conjugate()])
            E0 = Ub @ pure_state_density(up_x) @ Ub.conj().T
            got = cfi_state_povm(em, Povm([E0, np.eye(2) - E0]))
            q = (1 - p) ** 2
            expected = q * np.sin(beta) ** 2 / (1 - q * np.cos(beta) ** 2)
            worst = max(worst, abs(got - expected))
    assert worst < 1e-10
    _report("criterion 04 (mixed-qubit closed form, 100x5 grid)",
            f"max abs deviation {worst:.2e}")


def test_criterion_05_orthogonal_element_lemma():
    # whenever Tr(psi psi^dag E) = 0 with E PSD, Tr(A psi psi^dag E) = 0 too
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(2, 9))
        psi = rng.normal(size=d) + 1j * rng.normal(size=d)
        psi /= np.linalg.norm(psi)
        Q = np.eye(d) - np.outer(psi, psi.conj())
        B = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) @ Q
        E = B.conj().T @ B
        assert abs(psi.conj() @ E @ psi) < 1e-12
        A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        val = abs(np.trace(A @ np.outer(psi, psi.conj()) @ E))
        worst = max(worst, val)
    assert worst < 1e-11
    _report("criterion 05 (orthogonal-element lemma, 200 random instances)",
            f"max |Tr(A psi psi E)| = {worst:.2e}")


def test_criterion_06_local_channel_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(6)
    worst = 0.0
    for N in (2, 3, 4):
        d = 2**N
        A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = A @ A.conj().T
        rho /= np.trace(rho)
        for gamma_t in (0.001, 0.01, 0.05):
            product = apply_local_depolarizing(rho, N, gamma_t)
            integrated = lindblad_propagate(
                rho, local_depolarizing_spec(N, 1.0, gamma_t),
                method="fixed-step-rk4", rk4_step=1e-3)
            worst = max(worst, trace_distance(product, integrated))
    elapsed = time.perf_counter() - start
    assert worst < 1e-6
    assert elapsed < 30.0
    _report("criterion 06 (local product channel vs RK4 oracle)",
            f"max trace distance {worst:.2e} in {elapsed:.1f} s")


def test_criterion_07_jensen_bound():
    gamma_ts = (1e-4, 1e-3, 1e-2)
    # collective ensemble, J = 4
    J = 4
    _, stars4 = discontinuity_angles(J)
    grid_c = default_beta_grid(J, n_uniform=41, n_dense=5, beta_stars=stars4)
    worst_gap = np.inf
    min_trace_at_star = np.inf
    for gt in gamma_ts:
        noise = NoiseChannel("collective-depolarizing", gamma_t=gt, J=J)
        res = jensen_sweep(J, noise, grid_c)
        worst_gap = min(worst_gap, np.min(res["jensen_bound"] - res["cfi"]))
        if gt == 1e-4:
            near = np.min(np.abs(res["beta"][:, None] - stars4[None, :]),
                          axis=1) < 1e-3
            min_trace_at_star = min(min_trace_at_star,
                                    res["fragile_trace"][near].min())
    # local ensemble, N = 8 (symmetric-block discontinuity angles)
    N = 8
    grid_l = np.unique(np.concatenate([stars4, np.linspace(0.3, 2.8, 6)]))
    for gt in gamma_ts:
        noise = NoiseChannel("local-depolarizing", gamma_t=gt, N=N)
        res = local_jensen_sweep(N, noise, grid_l)
        worst_gap = min(worst_gap, np.min(res["jensen_bound"] - res["cfi"]))
        if gt == 1e-4:
            near = np.min(np.abs(res["beta"][:, None] - stars4[None, :]),
                          axis=1) < 1e-3
            min_trace_at_star = min(min_trace_at_star,
                                    res["fragile_trace"][near].min())
    assert worst_gap >= -1e-9
    assert min_trace_at_star >= 0.9
    _report("criterion 07 (convexity bound, collective J=4 and local N=8)",
            f"min(bound - CFI) = {worst_gap:.2e}, min fragile trace at "
            f"discontinuity angles {min_trace_at_star:.4f}")


def test_criterion_08_approximate_loss_and_well_width():
    J = 16
    ops = angular_momentum_operators(J)
    psi = dicke_ket(J, J - 1)
    rho = pure_state_density(psi)
    H = np.asarray(ops.jy)
    beta_star = np.pi / 2  # the M = 0 discontinuity
    U = rotation_y(J, beta_star)
    rho_fid = U.conj().T @ rho @ U
    spec = LindbladSpec(jump_operators=[(np.asarray(ops.jx), 1.0),
                                        (np.asarray(ops.jy), 1.0),
                                        (np.asarray(ops.jz), 1.0)],
                        duration=0.0)
    sigma_fid = np.diag(U.conj().T @ lindblad_generator(rho, spec) @ U).real
    povm = projective_povm(np.eye(33, dtype=complex))
    model = induced_model(EncodedModel(rho_fid, H), povm)
    p = model.probabilities(0.0)
    dp = model.derivatives(0.0)
    jumps = 4 * np.diag(H @ rho_fid @ H).real
    rels = {}
    for gdt, tol in ((1e-4, 0.15), (1e-5, 0.05)):
        noisy = NoiseChannel("collective-depolarizing", gamma_t=gdt,
                             J=J).apply(rho)
        cfi_noisy = cfi_state_povm(EncodedModel(U.conj().T @ noisy @ U, H),
                                   povm)
        exact = 94.0 - cfi_noisy  # loss relative to the noiseless plateau
        approx = approximate_loss(p, dp, sigma_fid, gdt, jumps)
        rels[gdt] = abs(approx - exact) / exact
        assert rels[gdt] < tol

    # half-width of the CFI well: where the vanishing outcome's probability
    # matches its noise-induced repopulation rate times gamma*dt
    m0_col = int(round(J))  # M = 0 column of the rotated basis

    def excess(delta, gdt):
        m0 = rotation_y(J, beta_star + delta)[:, m0_col]
        prob = abs(m0.conj() @ psi) ** 2
        repop = (m0.conj() @ lindblad_generator(rho, spec) @ m0).real
        return prob - gdt * repop

    gdts = np.array([1e-3, 1e-4, 1e-5])
    widths = []
    for gdt in gdts:
        lo, hi = 0.0, 0.3
        for _ in range(60):
            mid = (lo + hi) / 2
            if excess(mid, gdt) < 0:
                lo = mid
            else:
                hi = mid
        widths.append((lo + hi) / 2)
    exponent = float(np.polyfit(np.log(gdts), np.log(widths), 1)[0])
    assert abs(exponent - 0.5) < 0.1
    _report("criterion 08 (perturbative loss formula and well width)",
            f"rel err {rels[1e-4]:.3f} at 1e-4, {rels[1e-5]:.3f} at 1e-5, "
            f"width exponent {exponent:.3f}")


def test_criterion_09_single_discontinuity_noise():
    J = 16
    gamma_t = 1e-4
    psi = dicke_ket(J, J - 1)
    probe = pure_state_density(psi)
    Ms, angles = discontinuity_angles(J)
    qfi_ref = 6 * J - 2  # noiseless probe QFI, the common reference level
    summary = []
    for M in (2.0, 8.0, 14.0):
        beta_M = float(angles[list(Ms).index(M)])
        offsets = np.linspace(-0.05, 0.05, 21)
        offsets[10] = 0.0  # pin the window center to beta_M exactly
        window = beta_M + offsets
        off_center = window[offsets != 0.0]
        L = pathological_jump_operator(J, M, psi, beta_M)
        patho = NoiseChannel("custom-lindblad", gamma_t=gamma_t,
                             jump_operators=[(L, 1.0)])
        sweep_p = sweep_cfi(probe, patho, J, np.sort(off_center))
        ratio_p = sweep_p.cfi.min() / qfi_ref
        coll = NoiseChannel("collective-depolarizing", gamma_t=gamma_t, J=J)
        sweep_c = sweep_cfi(probe, coll, J, np.sort(window))
        ratio_c = sweep_c.cfi.min() / qfi_ref
        assert ratio_p >= 0.95
        assert ratio_c < 0.8
        summary.append(f"M={M:g}: {ratio_p:.4f} vs {ratio_c:.4f}")
    _report("criterion 09 (single-discontinuity noise leaves CFI intact)",
            "; ".join(summary))


def test_criterion_10_scaling_exponents():
    res = hpa_scaling_check([8, 16, 32, 64, 128])
    m0 = res["m0_relative_slope"]
    n1 = res["n1_absolute_slope"]
    assert abs(m0 + 0.5) < 0.05
    assert abs(n1 - 1.0) < 0.05
    _report("criterion 10 (discontinuity scaling with J)",
            f"relative M=0 slope {m0:.4f}, fixed-excitation slope {n1:.4f}")


def test_criterion_11_mle_bias():
    start = time.perf_counter()
    J = 16
    noise = NoiseChannel("collective-depolarizing", gamma_t=0.01, J=J)
    config = MleConfig(master_seed=0)
    betas = [0.2, np.pi / 2]
    first = bias_monte_carlo(J, noise, betas, config)
    second = bias_monte_carlo(J, noise, betas, config)
    assert all(a.mean_bias == b.mean_bias and a.sem == b.sem
               for a, b in zip(first, second))
    small = averaged_abs_bias(first, 0.2)
    large = averaged_abs_bias(first, np.pi / 2)
    assert large < small
    assert all(r.sem > 0 for r in first)
    elapsed = time.perf_counter() - start
    assert elapsed < 600.0
    _report("criterion 11 (grid-MLE bias ordering, fixed seed)",
            f"avg|bias| {large:.5f} at pi/2 < {small:.5f} at 0.2, "
            f"bit-identical rerun, {elapsed:.0f} s")


def test_criterion_12_bosonic_structure():
    space = FockSpace(50)
    alphas = np.linspace(0.0, 3.0, 601)
    flat = bosonic_cfi_sweep(0, alphas[1:], 0.0, space)["cfi"]
    spread = flat.max() - flat.min()
    assert spread < 1e-6

    noisy = bosonic_cfi_sweep(1, alphas, 1e-3, space)["cfi"]
    interior = (noisy[1:-1] < noisy[:-2]) & (noisy[1:-1] < noisy[2:])
    dips = alphas[1:-1][interior & (alphas[1:-1] > 0.1)]
    assert len(dips) >= 2
    step = alphas[1] - alphas[0]
    # interior zeros of the displaced-|1> amplitudes, bracketed by sign
    # changes of the signed overlap and refined by bisection
    zero_locs = []
    for n in range(1, 10):
        fine = np.linspace(0.05, 3.0, 1201)
        signed = np.array([displaced_fock_state(space, 1, a)[n].real
                           for a in fine])
        for k in np.flatnonzero(np.sign(signed[:-1]) != np.sign(signed[1:])):
            lo, hi = fine[k], fine[k + 1]
            for _ in range(50):
                mid = (lo + hi) / 2
                if (displaced_fock_state(space, 1, mid)[n].real
                        * signed[k] > 0):
                    lo = mid
                else:
                    hi = mid
            zero = (lo + hi) / 2
            assert displaced_one_amplitude(space, n, zero) < 1e-6
            zero_locs.append(zero)
    worst_offset = max(min(abs(d - z) for z in zero_locs) for d in dips)
    assert worst_offset <= step

    check = np.array([0.5, 1.5, 2.5])
    small = bosonic_cfi_sweep(1, check, 1e-3, space)["cfi"]
    big = bosonic_cfi_sweep(1, check, 1e-3, FockSpace(60))["cfi"]
    cutoff_rel = float(np.max(np.abs(small - big) / big))
    assert cutoff_rel < 1e-5
    _report("criterion 12 (bosonic sweep structure)",
            f"vacuum spread {spread:.2e}, {len(dips)} dips within one grid "
            f"step of amplitude zeros (worst offset {worst_offset:.4f}), "
            f"cutoff stability {cutoff_rel:.2e}")


def test_criterion_13_sphere_scan_symmetry():
    J = 16
    _, stars = discontinuity_angles(J)
    mids = (stars[:-1] + stars[1:]) / 2
    phis = np.linspace(0.0, 2 * np.pi, 8)
    probe_thetas = np.array([0.4, np.pi / 2, 2.3])
    res = sphere_scan(J, 0.01, probe_thetas, phis)
    cfi = res["cfi"].reshape(len(probe_thetas), len(phis))
    phi_spread = float(np.max(cfi.max(axis=1) - cfi.min(axis=1)))
    assert phi_spread < 1e-8

    star_cfi = sphere_scan(J, 0.01, stars, [0.0])["cfi"]
    mid_cfi = sphere_scan(J, 0.01, mids, [0.0])["cfi"]
    i = int(np.argmin(star_cfi))
    adjacent = max([mid_cfi[k] for k in (i - 1, i) if 0 <= k < len(mids)])
    ratio = star_cfi[i] / adjacent
    assert ratio <= 0.7
    _report("criterion 13 (measurement-sphere symmetry and stripes)",
            f"azimuthal spread {phi_spread:.2e}, deepest stripe at "
            f"{ratio:.2f} of the adjacent mid-stripe CFI")
