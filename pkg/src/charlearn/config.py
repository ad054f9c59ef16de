"""Flat key=value run configuration.

The config format is deliberately primitive and diff-friendly: one
``section.key = value`` assignment per line, ``#`` comments, blank lines
ignored.  Every run artifact embeds the SHA-256 hash of the resolved
assignments so reruns can be matched to their configuration.
"""

import hashlib
from dataclasses import dataclass, field

from charlearn.sampler import SamplerConfig
from charlearn.solver import SolverConfig


class ConfigError(ValueError):
    """Malformed or out-of-range configuration."""


def parse_config_text(text):
    """Parse ``section.key = value`` lines into a dict; strict on syntax."""
    items = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in items:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        items[key] = value
    return items


def load_config(path):
    with open(path) as fh:
        return parse_config_text(fh.read())


def config_hash(items):
    """Stable hash of the resolved assignments (sorted key=value lines)."""
    canon = "\n".join(f"{k} = {items[k]}" for k in sorted(items))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _convert(key, value, kind):
    try:
        if kind is bool:
            lowered = value.lower()
            if lowered in ("true", "yes", "1", "on"):
                return True
            if lowered in ("false", "no", "0", "off"):
                return False
            raise ValueError(value)
        return kind(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as {kind.__name__}") from None


class _Reader:
    """Typed accessors over the raw items, tracking which keys were used."""

    def __init__(self, items):
        self.items = dict(items)
        self.used = set()

    def get(self, key, kind, default=None, required=False):
        if key not in self.items:
            if required:
                raise ConfigError(f"missing required key {key!r}")
            return default
        self.used.add(key)
        return _convert(key, self.items[key], kind)

    def get_int_list(self, key, default=()):
        if key not in self.items:
            return list(default)
        self.used.add(key)
        raw = self.items[key]
        try:
            return [int(tok) for tok in raw.split(",") if tok.strip()]
        except ValueError:
            raise ConfigError(f"{key}: cannot parse {raw!r} as int list") from None

    def reject_unknown(self):
        unknown = set(self.items) - self.used
        if unknown:
            raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration of a full learning run."""

    training_path: str
    target_path: str
    output_dir: str
    n_q: int
    eps_pca: float
    sampler: SamplerConfig
    solver: SolverConfig
    emit_marginals: bool
    emit_trace: bool
    observe: list = field(default_factory=list)


def read_run_config(items, seed_override=None):
    """Build a ``RunConfig`` from parsed items, applying the seed override."""
    r = _Reader(items)
    training = r.get("data.training", str, required=True)
    target = r.get("data.target", str, required=True)
    outdir = r.get("data.output_dir", str, required=True)
    n_q = r.get("data.n_q", int, required=True)
    if n_q < 1:
        raise ConfigError("data.n_q must be positive")
    eps_pca = r.get("reduction.eps_pca", float, default=1e-4)
    if not 0.0 < eps_pca < 1.0:
        raise ConfigError("reduction.eps_pca must lie in (0, 1)")

    seed = r.get("sampler.seed", int, default=0)
    if seed_override is not None:
        seed = seed_override
    try:
        sampler = SamplerConfig(
            f0=r.get("sampler.f0", float, default=4.0),
            delta_t=r.get("sampler.delta_t", float, default=0.2188),
            m_s=r.get("sampler.m_s", int, default=30),
            n_mc=r.get("sampler.n_mc", int, default=1),
            seed=seed,
        )
        solver = SolverConfig(
            i_max=r.get("solver.i_max", int, default=10),
            alpha0=r.get("solver.alpha0", float, default=0.3),
            alpha_grow=r.get("solver.alpha_grow", float, default=1.5),
            alpha_shrink=r.get("solver.alpha_shrink", float, default=0.5),
            alpha_min=r.get("solver.alpha_min", float, default=0.01),
            hessian_jitter=r.get("solver.jitter", float, default=None),
            lm0=r.get("solver.lm0", float, default=0.1),
            tilt_cap0=r.get("solver.tilt_cap0", float, default=2.0),
            err_target=r.get("solver.err_target", float, default=None),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    cfg = RunConfig(
        training_path=training,
        target_path=target,
        output_dir=outdir,
        n_q=n_q,
        eps_pca=eps_pca,
        sampler=sampler,
        solver=solver,
        emit_marginals=r.get("output.emit_marginals", bool, default=False),
        emit_trace=r.get("output.emit_trace", bool, default=True),
        observe=r.get_int_list("output.observe"),
    )
    r.reject_unknown()
    return cfg


@dataclass(frozen=True)
class SweepConfig:
    """Resolved configuration of a J-surface sweep."""

    output_dir: str
    nu: int
    n_d: int
    n_r: int
    m_min: float
    m_max: float
    m_step: float
    sigma_min: float
    sigma_max: float
    sigma_step: float
    direction_seed: int
    sample_seed: int


def read_sweep_config(items, seed_override=None):
    r = _Reader(items)
    sample_seed = r.get("sweep.sample_seed", int, default=0)
    if seed_override is not None:
        sample_seed = seed_override
    cfg = SweepConfig(
        output_dir=r.get("data.output_dir", str, required=True),
        nu=r.get("sweep.nu", int, default=100),
        n_d=r.get("sweep.n_d", int, default=1000),
        n_r=r.get("sweep.n_r", int, default=100),
        m_min=r.get("sweep.m_min", float, default=-3.0),
        m_max=r.get("sweep.m_max", float, default=3.0),
        m_step=r.get("sweep.m_step", float, default=1.0),
        sigma_min=r.get("sweep.sigma_min", float, default=0.1),
        sigma_max=r.get("sweep.sigma_max", float, default=2.3),
        sigma_step=r.get("sweep.sigma_step", float, default=0.2),
        direction_seed=r.get("sweep.direction_seed", int, default=0),
        sample_seed=sample_seed,
    )
    r.reject_unknown()
    if cfg.m_step <= 0 or cfg.sigma_step <= 0:
        raise ConfigError("sweep steps must be positive")
    return cfg


@dataclass(frozen=True)
class GenConfig:
    """Resolved configuration of a dataset generation run."""

    output_dir: str
    kind: str
    file_format: str
    seed: int
    n_w: int
    n_q: int
    n_d: int
    n_r: int
    n_u: int
    noise: float
    quad_coupling: float
    target_shift: float
    target_fluct: float
    mixing: str
    nu: int
    m_targ: float
    sigma_targ: float


def read_gen_config(items, seed_override=None):
    r = _Reader(items)
    seed = r.get("gen.seed", int, default=0)
    if seed_override is not None:
        seed = seed_override
    kind = r.get("gen.kind", str, default="supervised")
    if kind not in ("supervised", "gaussian"):
        raise ConfigError("gen.kind must be 'supervised' or 'gaussian'")
    file_format = r.get("gen.format", str, default="csv")
    if file_format not in ("csv", "klcm"):
        raise ConfigError("gen.format must be 'csv' or 'klcm'")
    cfg = GenConfig(
        output_dir=r.get("data.output_dir", str, required=True),
        kind=kind,
        file_format=file_format,
        seed=seed,
        n_w=r.get("gen.n_w", int, default=40),
        n_q=r.get("gen.n_q", int, default=30),
        n_d=r.get("gen.n_d", int, default=200),
        n_r=r.get("gen.n_r", int, default=50),
        n_u=r.get("gen.n_u", int, default=4),
        noise=r.get("gen.noise", float, default=0.05),
        quad_coupling=r.get("gen.quad_coupling", float, default=0.3),
        target_shift=r.get("gen.target_shift", float, default=1.5),
        target_fluct=r.get("gen.target_fluct", float, default=0.5),
        mixing=r.get("gen.mixing", str, default="random"),
        nu=r.get("gen.nu", int, default=100),
        m_targ=r.get("gen.m_targ", float, default=0.0),
        sigma_targ=r.get("gen.sigma_targ", float, default=1.0),
    )
    r.reject_unknown()
    return cfg
