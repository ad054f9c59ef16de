"""Command-line front end for the learning pipeline.

Subcommands: ``learn`` runs the full posterior construction, ``sweep-j``
maps the Gaussian-case mismatch surface, ``gen`` writes synthetic datasets,
``diagnose`` prints basis and constraint summaries without sampling.

Exit codes: 0 success, 2 malformed config, 3 data shape mismatch, 4 solver
abort (the partial trace is still written, next to a ``.failed`` marker).
Every artifact embeds the config hash and seed in a header comment, and
reruns with equal configs are byte-identical.
"""

import argparse
import os
import sys

import numpy as np

from charlearn import matrixio
from charlearn.config import (
    ConfigError,
    config_hash,
    load_config,
    read_gen_config,
    read_run_config,
    read_sweep_config,
)
from charlearn.constraints import build_constraint_spec
from charlearn.datagen import (
    GaussianCaseConfig,
    SyntheticSupervisedConfig,
    gen_gaussian_case,
    gen_supervised,
    sweep_j,
)
from charlearn.posterior import build_posterior, default_grid, marginal_pdf
from charlearn.prior import fit_prior
from charlearn.reduction import RawDataset, fit_reduction, project_targets, scale_dataset
from charlearn.solver import SolverAbort, solve_lambda

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SHAPE = 3
EXIT_SOLVER = 4


class ShapeMismatch(ValueError):
    pass


def _header(tag, seed):
    return [f"config={tag} seed={seed}"]


def _write_csv(outdir, name, matrix, tag, seed):
    matrixio.save_matrix_csv(
        os.path.join(outdir, name), matrix, comments=_header(tag, seed)
    )


def _resolve_threads(threads):
    if threads == 0:
        return min(4, os.cpu_count() or 1)
    return max(1, threads)


def _load_dataset(cfg):
    training = matrixio.load_any(cfg.training_path)
    target = matrixio.load_any(cfg.target_path)
    n_x = training.shape[0]
    if cfg.n_q >= n_x:
        raise ShapeMismatch(
            f"data.n_q={cfg.n_q} must be smaller than the {n_x} training rows"
        )
    if target.shape[0] != cfg.n_q:
        raise ShapeMismatch(
            f"target has {target.shape[0]} rows, expected n_q={cfg.n_q}"
        )
    return RawDataset(
        training, range(0, cfg.n_q), range(cfg.n_q, n_x), target
    )


def _fit_pipeline(cfg):
    raw = _load_dataset(cfg)
    scaled, params = scale_dataset(raw)
    basis, reduced = fit_reduction(scaled, cfg.eps_pca)
    projected = project_targets(basis, scaled.target_matrix)
    prior = fit_prior(reduced)
    spec = build_constraint_spec(projected)
    return raw, params, basis, reduced, prior, spec


def _trace_rows(trace):
    rows = []
    for i, (lam, e, alpha) in enumerate(
        zip(trace.lambdas, trace.errs, trace.alphas), start=1
    ):
        rows.append([float(i), e, alpha, *lam.tolist()])
    return np.asarray(rows)


def cmd_learn(config_path, seed_override=None, threads=1):
    try:
        items = load_config(config_path)
        cfg = read_run_config(items, seed_override=seed_override)
        if seed_override is not None:
            items["sampler.seed"] = str(seed_override)
        tag = config_hash(items)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        raw, params, basis, reduced, prior, spec = _fit_pipeline(cfg)
    except (OSError, matrixio.FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ShapeMismatch, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHAPE

    outdir = cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    seed = cfg.sampler.seed
    failed_marker = os.path.join(outdir, ".failed")
    if os.path.exists(failed_marker):
        os.remove(failed_marker)

    try:
        trace = solve_lambda(
            prior, spec, reduced, cfg.sampler, cfg.solver, threads=_resolve_threads(threads)
        )
    except SolverAbort as exc:
        if cfg.emit_trace and exc.trace.n_iterations:
            _write_csv(outdir, "trace.csv", _trace_rows(exc.trace), tag, seed)
        with open(failed_marker, "w") as fh:
            fh.write(f"{exc}\n")
        print(f"error: solver aborted: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    ensemble = build_posterior(
        basis,
        params,
        trace.learned_set_sol,
        metadata={"seed": seed, "err_sol": trace.err_sol},
    )

    _write_csv(outdir, "posterior_q.csv", ensemble.q_samples, tag, seed)
    _write_csv(outdir, "posterior_w.csv", ensemble.w_samples, tag, seed)
    _write_csv(outdir, "lambda_sol.csv", trace.lambda_sol[:, None], tag, seed)
    _write_csv(outdir, "b_c.csv", spec.b_c[:, None], tag, seed)
    if cfg.emit_trace:
        _write_csv(outdir, "trace.csv", _trace_rows(trace), tag, seed)
    if cfg.emit_marginals:
        components = cfg.observe or list(range(min(3, ensemble.q_samples.shape[0])))
        for k in components:
            row = ensemble.q_samples[k]
            grid = default_grid(row)
            pdf = marginal_pdf(row, grid)
            _write_csv(
                outdir, f"marginal_q{k}.csv", np.vstack([grid, pdf]), tag, seed
            )
    print(
        f"learn: nu={basis.nu} N_r={spec.n_constraints} iterations={trace.n_iterations} "
        f"i_sol={trace.i_sol} err={trace.err_sol:.6g}"
    )
    return EXIT_OK


def cmd_sweep_j(config_path, seed_override=None, threads=1):
    try:
        items = load_config(config_path)
        cfg = read_sweep_config(items, seed_override=seed_override)
        if seed_override is not None:
            items["sweep.sample_seed"] = str(seed_override)
        tag = config_hash(items)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    m_values = np.arange(cfg.m_min, cfg.m_max + 0.5 * cfg.m_step, cfg.m_step)
    sigma_values = np.arange(
        cfg.sigma_min, cfg.sigma_max + 0.5 * cfg.sigma_step, cfg.sigma_step
    )
    base = GaussianCaseConfig(
        nu=cfg.nu,
        n_d=cfg.n_d,
        n_r=cfg.n_r,
        direction_seed=cfg.direction_seed,
        sample_seed=cfg.sample_seed,
    )
    surface = sweep_j(base, m_values, sigma_values)

    os.makedirs(cfg.output_dir, exist_ok=True)
    rows = [
        [m, sig, surface[i, j]]
        for i, m in enumerate(m_values)
        for j, sig in enumerate(sigma_values)
    ]
    _write_csv(cfg.output_dir, "surface.csv", np.asarray(rows), tag, cfg.sample_seed)
    i, j = np.unravel_index(np.argmin(surface), surface.shape)
    print(f"sweep-j: argmin at m={m_values[i]:g} sigma={sigma_values[j]:g}")
    return EXIT_OK


def cmd_gen(config_path, seed_override=None, threads=1):
    try:
        items = load_config(config_path)
        cfg = read_gen_config(items, seed_override=seed_override)
        if seed_override is not None:
            items["gen.seed"] = str(seed_override)
        tag = config_hash(items)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    os.makedirs(cfg.output_dir, exist_ok=True)
    if cfg.kind == "supervised":
        gen_cfg = SyntheticSupervisedConfig(
            n_w=cfg.n_w,
            n_q=cfg.n_q,
            n_d=cfg.n_d,
            n_r=cfg.n_r,
            n_u=cfg.n_u,
            noise=cfg.noise,
            quad_coupling=cfg.quad_coupling,
            target_shift=cfg.target_shift,
            target_fluct=cfg.target_fluct,
            mixing=cfg.mixing,
            seed=cfg.seed,
        )
        raw, target, _ = gen_supervised(gen_cfg)
        training = raw.x_matrix
    else:
        gauss_cfg = GaussianCaseConfig(
            nu=cfg.nu,
            n_d=cfg.n_d,
            n_r=cfg.n_r,
            m_targ=cfg.m_targ,
            sigma_targ=cfg.sigma_targ,
            direction_seed=cfg.seed,
            sample_seed=cfg.seed,
        )
        training, target = gen_gaussian_case(gauss_cfg)

    if cfg.file_format == "csv":
        _write_csv(cfg.output_dir, "training.csv", training, tag, cfg.seed)
        _write_csv(cfg.output_dir, "target.csv", target, tag, cfg.seed)
    else:
        matrixio.save_matrix(os.path.join(cfg.output_dir, "training.klcm"), training)
        matrixio.save_matrix(os.path.join(cfg.output_dir, "target.klcm"), target)
    print(
        f"gen: {cfg.kind} training {training.shape[0]}x{training.shape[1]} "
        f"target {target.shape[0]}x{target.shape[1]}"
    )
    return EXIT_OK


def cmd_diagnose(config_path, seed_override=None, threads=1):
    try:
        items = load_config(config_path)
        cfg = read_run_config(items, seed_override=seed_override)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        raw, params, basis, reduced, prior, spec = _fit_pipeline(cfg)
    except (OSError, matrixio.FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ShapeMismatch, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHAPE

    kappa = basis.kappa
    print(f"training: n_x={raw.n_x} (n_q={raw.n_q}, n_w={raw.n_w}) N_d={raw.n_samples}")
    print(f"targets:  N_r={raw.n_targets}")
    print(f"reduction: nu={basis.nu} eps_pca={basis.eps_pca:g} trace={basis.trace_cov:.6g}")
    print(f"eigenvalues: max={kappa[0]:.6g} min={kappa[-1]:.6g}")
    print(f"prior: s_sb={prior.s_sb:.6g} s_hat={prior.s_hat:.6g} kernels={prior.n_kernels}")
    print(
        f"constraints: s={spec.s:.6g} b_c in [{spec.b_c.min():.6g}, {spec.b_c.max():.6g}]"
    )
    return EXIT_OK


_COMMANDS = {
    "learn": cmd_learn,
    "sweep-j": cmd_sweep_j,
    "gen": cmd_gen,
    "diagnose": cmd_diagnose,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="charlearn",
        description="Probabilistic learning constrained by target realizations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="path to key=value config")
        cmd.add_argument("--seed", type=int, default=None, help="override the run seed")
        cmd.add_argument(
            "--threads", type=int, default=1, help="worker threads (0 = auto)"
        )
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = _COMMANDS[args.command]
    return handler(args.config, seed_override=args.seed, threads=args.threads)


if __name__ == "__main__":
    sys.exit(main())
