"""Command-line surface: validate JSON experiment configs, run them, and
emit CSV results plus a JSON run manifest.

Exit codes: 0 success, 1 schema error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, FragilityError
from .channels import NoiseChannel, pathological_jump_operator
from .spin import dicke_ket, discontinuity_angles

EXPERIMENT_KINDS = (
    "sweep-cfi", "discontinuities", "jensen", "local-noise-jensen",
    "sphere-scan", "mle-bias", "bosonic-sweep", "qubit-demo", "echo-demo",
    "hpa-scaling",
)

NOISE_VARIANTS = (
    "none", "collective-depolarizing", "local-depolarizing",
    "identity-mixing", "pathological-jump",
)

CONVENTIONS = {
    "quadrature": "X = (a + a^dag)/sqrt(2), P = i(a^dag - a)/sqrt(2)",
    "basis_order": "|J,M> with M descending from J to -J",
    "jensen_residual": "F_C evaluated directly on the unnormalized residual",
    "qubit_demo_gamma_t_column": "holds the identity-mixing weight p",
    "echo_demo_beta_column": "holds the encoded phase theta",
}


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _check_keys(obj: dict, allowed: set, where: str, errors: list) -> None:
    for key in obj:
        if key not in allowed:
            errors.append(f"{where}: unknown key {key!r}")


def _check_noise(noise, where: str, errors: list) -> None:
    if not isinstance(noise, dict):
        errors.append(f"{where}: noise must be an object")
        return
    _check_keys(noise, {"variant", "gamma_t", "epsilon", "M"}, where, errors)
    variant = noise.get("variant")
    if variant not in NOISE_VARIANTS:
        errors.append(
            f"{where}.variant: must be one of {', '.join(NOISE_VARIANTS)}"
        )
    gamma_t = noise.get("gamma_t", 0.0)
    if not _is_num(gamma_t) or gamma_t < 0:
        errors.append(f"{where}.gamma_t: must be a number >= 0")
    eps = noise.get("epsilon", 0.0)
    if not _is_num(eps) or not (0.0 <= eps <= 1.0):
        errors.append(f"{where}.epsilon: must lie in [0, 1]")
    if variant == "pathological-jump" and not _is_num(noise.get("M")):
        errors.append(f"{where}.M: pathological-jump noise needs a target M")


def _check_grid(grid, where: str, errors: list) -> None:
    if not isinstance(grid, dict):
        errors.append(f"{where}: must be an object")
        return
    _check_keys(grid, {"n_uniform", "n_dense", "halfwidth"}, where, errors)
    for key, low in (("n_uniform", 2), ("n_dense", 0)):
        v = grid.get(key)
        if v is not None and (not isinstance(v, int) or v < low):
            errors.append(f"{where}.{key}: must be an integer >= {low}")
    hw = grid.get("halfwidth")
    if hw is not None and (not _is_num(hw) or hw <= 0):
        errors.append(f"{where}.halfwidth: must be a positive number")


def _positive_int(cfg, key, errors, minimum=1):
    v = cfg.get(key)
    if v is not None and (not isinstance(v, int) or v < minimum):
        errors.append(f"{key}: must be an integer >= {minimum}")


def validate_config(cfg) -> list:
    """Schema check; returns the list of violations (empty when valid)."""
    errors: list[str] = []
    if not isinstance(cfg, dict):
        return ["config root must be an object"]
    kind = cfg.get("kind")
    if kind not in EXPERIMENT_KINDS:
        errors.append(f"kind: must be one of {', '.join(EXPERIMENT_KINDS)}")
        return errors

    common = {"kind", "output", "seed"}
    per_kind = {
        "sweep-cfi": common | {"J", "noise", "beta_grid"},
        "discontinuities": common | {"J"},
        "jensen": common | {"J", "noise", "beta_grid"},
        "local-noise-jensen": common | {"N", "noise", "beta_grid"},
        "sphere-scan": common | {"J", "epsilon", "n_theta", "n_phi"},
        "mle-bias": common | {"J", "noise", "betas", "mle"},
        "bosonic-sweep": common | {"probe_n", "gamma_t", "n_max", "alpha_max",
                                   "n_alpha"},
        "qubit-demo": common | {"p", "n_beta"},
        "echo-demo": common | {"J", "n_theta", "theta_max"},
        "hpa-scaling": common | {"j_values"},
    }
    _check_keys(cfg, per_kind[kind], "config", errors)

    out = cfg.get("output")
    if not isinstance(out, str) or not out:
        errors.append("output: must be a nonempty file name")
    seed = cfg.get("seed", 0)
    if not isinstance(seed, int):
        errors.append("seed: must be an integer")

    if "J" in per_kind[kind] and kind != "hpa-scaling":
        J = cfg.get("J")
        if not _is_num(J) or J <= 0 or abs(2 * J - round(2 * J)) > 1e-12:
            errors.append("J: must be a positive half-integer")
    if kind == "local-noise-jensen":
        N = cfg.get("N")
        if not isinstance(N, int) or not (2 <= N <= 10):
            errors.append("N: must be an integer in [2, 10]")
    if "noise" in cfg:
        _check_noise(cfg["noise"], "noise", errors)
    if "beta_grid" in cfg:
        _check_grid(cfg["beta_grid"], "beta_grid", errors)

    if kind == "sphere-scan":
        eps = cfg.get("epsilon")
        if not _is_num(eps) or not (0.0 <= eps <= 1.0):
            errors.append("epsilon: must lie in [0, 1]")
        _positive_int(cfg, "n_theta", errors, 2)
        _positive_int(cfg, "n_phi", errors, 1)
    elif kind == "mle-bias":
        betas = cfg.get("betas")
        if not isinstance(betas, list) or not betas or not all(
                _is_num(b) for b in betas):
            errors.append("betas: must be a nonempty list of numbers")
        mle = cfg.get("mle", {})
        if not isinstance(mle, dict):
            errors.append("mle: must be an object")
        else:
            _check_keys(mle, {"runs", "samples_per_run", "grid_resolution",
                              "theta0_points"}, "mle", errors)
            for key, low in (("runs", 1), ("samples_per_run", 1),
                             ("grid_resolution", 3), ("theta0_points", 1)):
                v = mle.get(key)
                if v is not None and (not isinstance(v, int) or v < low):
                    errors.append(f"mle.{key}: must be an integer >= {low}")
    elif kind == "bosonic-sweep":
        pn = cfg.get("probe_n")
        if pn not in (0, 1):
            errors.append("probe_n: must be 0 or 1")
        gt = cfg.get("gamma_t", 0.0)
        if not _is_num(gt) or gt < 0:
            errors.append("gamma_t: must be a number >= 0")
        _positive_int(cfg, "n_max", errors, 10)
        _positive_int(cfg, "n_alpha", errors, 2)
        am = cfg.get("alpha_max", 3.0)
        if not _is_num(am) or am <= 0:
            errors.append("alpha_max: must be a positive number")
    elif kind == "qubit-demo":
        p = cfg.get("p")
        if not _is_num(p) or not (0.0 <= p <= 1.0):
            errors.append("p: must lie in [0, 1]")
        _positive_int(cfg, "n_beta", errors, 2)
    elif kind == "echo-demo":
        _positive_int(cfg, "n_theta", errors, 2)
        tm = cfg.get("theta_max", 0.5)
        if not _is_num(tm) or tm <= 0:
            errors.append("theta_max: must be a positive number")
    elif kind == "hpa-scaling":
        jv = cfg.get("j_values")
        if (not isinstance(jv, list) or len(jv) < 3
                or not all(_is_num(j) and j >= 8 for j in jv)):
            errors.append("j_values: must be a list of >= 3 numbers, each >= 8")
    return errors


def _build_noise(cfg: dict, J: float | None = None,
                 N: int | None = None) -> NoiseChannel:
    spec = cfg.get("noise", {"variant": "none"})
    variant = spec["variant"]
    gamma_t = float(spec.get("gamma_t", 0.0))
    eps = float(spec.get("epsilon", 0.0))
    if variant == "pathological-jump":
        M = float(spec["M"])
        _, angles = discontinuity_angles(J)
        Ms = discontinuity_angles(J)[0]
        beta_M = float(angles[list(Ms).index(M)])
        L = pathological_jump_operator(J, M, dicke_ket(J, J - 1), beta_M)
        return NoiseChannel("custom-lindblad", gamma_t=gamma_t,
                            jump_operators=[(L, 1.0)])
    return NoiseChannel(variant, gamma_t=gamma_t, epsilon=eps, N=N, J=J)


def _beta_grid(cfg: dict, J: float, beta_stars=None):
    from .analysis import default_beta_grid

    grid = cfg.get("beta_grid", {})
    return default_beta_grid(
        J,
        n_uniform=grid.get("n_uniform", 1001),
        n_dense=grid.get("n_dense", 50),
        halfwidth=grid.get("halfwidth", 0.02),
        beta_stars=beta_stars,
    )


def fmt(x) -> str:
    if isinstance(x, float) or isinstance(x, np.floating):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def run_experiment(cfg: dict, out_dir: Path) -> list:
    """Execute one validated config; returns the list of files written."""
    from . import analysis, bosonic, estimation
    from .fisher import EncodedModel, Povm, cfi_state_povm, qfi
    from .linalg import pure_state_density
    from .spin import angular_momentum_operators, pauli_matrices, rotation_y

    kind = cfg["kind"]
    out_path = out_dir / cfg["output"]
    if kind == "sweep-cfi":
        J = float(cfg["J"])
        noise = _build_noise(cfg, J=J)
        sweep = analysis.sweep_cfi(
            pure_state_density(dicke_ket(J, J - 1)), noise, J, _beta_grid(cfg, J)
        )
        rows = [(b, c, sweep.qfi, noise.gamma_t)
                for b, c in zip(sweep.beta, sweep.cfi)]
        write_csv(out_path, ["beta", "cfi", "qfi", "gamma_t"], rows)
    elif kind == "discontinuities":
        J = float(cfg["J"])
        recs = analysis.locate_discontinuities(J)
        rows = [(r.beta_star, r.M, r.delta_f) for r in recs]
        write_csv(out_path, ["beta_star", "M", "delta_f"], rows)
    elif kind == "jensen":
        J = float(cfg["J"])
        noise = _build_noise(cfg, J=J)
        res = analysis.jensen_sweep(J, noise, _beta_grid(cfg, J))
        rows = zip(res["beta"], res["cfi"], res["jensen_bound"],
                   res["fragile_trace"], res["residual_trace"])
        write_csv(out_path, ["beta", "cfi", "jensen_bound", "fragile_trace",
                             "residual_trace"], rows)
    elif kind == "local-noise-jensen":
        N = int(cfg["N"])
        noise = _build_noise(cfg, N=N)
        from .spin import build_collective_basis

        stars = np.unique(np.concatenate(
            [discontinuity_angles(b.J)[1]
             for b in build_collective_basis(N).blocks if b.J >= 1]))
        res = analysis.local_jensen_sweep(N, noise,
                                          _beta_grid(cfg, N / 2, beta_stars=stars))
        rows = zip(res["beta"], res["cfi"], res["jensen_bound"],
                   res["fragile_trace"], res["residual_trace"])
        write_csv(out_path, ["beta", "cfi", "jensen_bound", "fragile_trace",
                             "residual_trace"], rows)
    elif kind == "sphere-scan":
        J = float(cfg["J"])
        eps = float(cfg["epsilon"])
        thetas = np.linspace(0.0, np.pi, int(cfg.get("n_theta", 181)))
        phis = np.linspace(0.0, 2 * np.pi, int(cfg.get("n_phi", 73)))
        res = analysis.sphere_scan(J, eps, thetas, phis)
        rows = [(t, p, c, eps) for t, p, c in
                zip(res["theta_n"], res["phi_n"], res["cfi"])]
        write_csv(out_path, ["theta_n", "phi_n", "cfi", "epsilon"], rows)
    elif kind == "mle-bias":
        J = float(cfg["J"])
        noise = _build_noise(cfg, J=J)
        mle = cfg.get("mle", {})
        config = estimation.MleConfig(
            grid_resolution=mle.get("grid_resolution", 2001),
            samples_per_run=mle.get("samples_per_run", 40),
            runs=mle.get("runs", 10000),
            theta0_points=mle.get("theta0_points", 11),
            master_seed=cfg.get("seed", 0),
        )
        results = estimation.bias_monte_carlo(J, noise, cfg["betas"], config)
        rows = [(r.beta, r.theta0, r.mean_bias, r.sem, r.runs) for r in results]
        write_csv(out_path, ["beta", "theta0", "mean_bias", "sem", "runs"], rows)
    elif kind == "bosonic-sweep":
        space = bosonic.FockSpace(int(cfg.get("n_max", 40)))
        alphas = np.linspace(0.0, float(cfg.get("alpha_max", 3.0)),
                             int(cfg.get("n_alpha", 601)))
        res = bosonic.bosonic_cfi_sweep(int(cfg["probe_n"]), alphas,
                                        float(cfg.get("gamma_t", 0.0)), space)
        rows = [(a, c, res["probe_n"], res["gamma_t"])
                for a, c in zip(res["alpha"], res["cfi"])]
        write_csv(out_path, ["alpha", "cfi", "probe_n", "gamma_t"], rows)
    elif kind == "qubit-demo":
        p = float(cfg["p"])
        n_beta = int(cfg.get("n_beta", 181))
        sx, sy, sz = pauli_matrices()
        up_x = np.array([1.0, 1.0]) / np.sqrt(2)
        from .channels import identity_mix

        rho = identity_mix(pure_state_density(up_x), p)
        em = EncodedModel(rho, sz / 2)
        qfi_ref = qfi(em)
        rows = []
        for beta in np.linspace(0.0, np.pi, n_beta):
            phase = np.exp(-1j * beta / 2)
            Ub = np.diag([phase, phase.conjugate()])
            E0 = Ub @ pure_state_density(up_x) @ Ub.conj().T
            povm = Povm([E0, np.eye(2) - E0])
            rows.append((beta, cfi_state_povm(em, povm), qfi_ref, p))
        write_csv(out_path, ["beta", "cfi", "qfi", "gamma_t"], rows)
    elif kind == "echo-demo":
        J = float(cfg["J"])
        ops = angular_momentum_operators(J)
        psi = rotation_y(J, 1.0) @ dicke_ket(J, J)
        H = np.asarray(ops.jy)
        echo = analysis.loschmidt_echo_povm(psi, H, 0.0)
        em0 = EncodedModel(pure_state_density(psi), H)
        qfi_ref = qfi(em0)
        thetas = np.linspace(-float(cfg.get("theta_max", 0.2)),
                             float(cfg.get("theta_max", 0.2)),
                             int(cfg.get("n_theta", 201)))
        rows = []
        for theta in thetas:
            em = EncodedModel(pure_state_density(psi), H, theta=theta)
            rows.append((theta, cfi_state_povm(em, echo.povm), qfi_ref, 0.0))
        write_csv(out_path, ["beta", "cfi", "qfi", "gamma_t"], rows)
    elif kind == "hpa-scaling":
        res = bosonic.hpa_scaling_check(cfg["j_values"])
        from .analysis import closed_form_jump

        rows = []
        for J in res["j_values"]:
            rows.append((J, closed_form_jump(J, 0.0) / (6 * J - 2),
                         closed_form_jump(J, J - 1.0)))
        write_csv(out_path, ["j_value", "m0_relative", "n1_absolute"], rows)
    else:  # pragma: no cover - guarded by validate_config
        raise ConfigError([f"kind: unknown experiment {kind!r}"])
    return [out_path]


def write_manifest(cfg: dict, out_dir: Path, outputs: list,
                   wall_time: float, threads: int) -> Path:
    manifest = {
        "config": cfg,
        "code_version": __version__,
        "wall_time_s": wall_time,
        "threads": threads,
        "conventions": CONVENTIONS,
        "outputs": [p.name for p in outputs],
    }
    path = out_dir / (Path(cfg["output"]).stem + ".manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc}"])
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fragility",
        description="Fisher-information fragility experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "validate"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        if name == "run":
            p.add_argument("--out-dir", default=".")
            p.add_argument("--threads", type=int, default=1)
            p.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        for v in exc.violations:
            print(v, file=sys.stderr)
        return 1

    violations = validate_config(cfg)
    if args.command == "validate":
        for v in violations:
            print(v)
        if not violations:
            print("config is valid")
        return 1 if violations else 0

    if violations:
        for v in violations:
            print(v, file=sys.stderr)
        return 1
    if args.seed is not None:
        cfg["seed"] = args.seed
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        outputs = run_experiment(cfg, out_dir)
    except FragilityError as exc:
        print(f"numerical failure in {cfg['kind']}: {exc}", file=sys.stderr)
        return 2
    wall = time.perf_counter() - start
    write_manifest(cfg, out_dir, outputs, wall, args.threads)
    return 0


if __name__ == "__main__":
    sys.exit(main())
