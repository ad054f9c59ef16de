import pytest

from charlearn.config import (
    ConfigError,
    config_hash,
    parse_config_text,
    read_gen_config,
    read_run_config,
    read_sweep_config,
)

RUN_TEXT = """
# pipeline inputs
data.training = train.csv
data.target = target.csv
data.output_dir = out
data.n_q = 30

sampler.f0 = 4
sampler.delta_t = 0.2188
sampler.m_s = 30
sampler.n_mc = 5
sampler.seed = 7

solver.i_max = 15
output.emit_marginals = true
output.observe = 0,1,2
"""


def test_parse_basic():
    items = parse_config_text(RUN_TEXT)
    assert items["data.n_q"] == "30"
    assert items["sampler.f0"] == "4"


def test_parse_rejects_bad_line():
    with pytest.raises(ConfigError, match="expected"):
        parse_config_text("data.training train.csv\n")


def test_parse_rejects_duplicate_key():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config_text("a.b = 1\na.b = 2\n")


def test_run_config_defaults_and_overrides():
    cfg = read_run_config(parse_config_text(RUN_TEXT))
    assert cfg.sampler.f0 == 4.0
    assert cfg.sampler.delta_t == 0.2188
    assert cfg.sampler.m_s == 30
    assert cfg.sampler.seed == 7
    assert cfg.solver.i_max == 15
    assert cfg.eps_pca == 1e-4  # default
    assert cfg.emit_marginals is True
    assert cfg.observe == [0, 1, 2]


def test_run_config_seed_override():
    cfg = read_run_config(parse_config_text(RUN_TEXT), seed_override=99)
    assert cfg.sampler.seed == 99


def test_run_config_missing_required():
    with pytest.raises(ConfigError, match="data.training"):
        read_run_config(parse_config_text("data.n_q = 3\n"))


def test_run_config_unknown_key():
    text = RUN_TEXT + "sampler.typo = 1\n"
    with pytest.raises(ConfigError, match="unknown keys"):
        read_run_config(parse_config_text(text))


def test_run_config_range_validation():
    text = RUN_TEXT.replace("sampler.delta_t = 0.2188", "sampler.delta_t = -1")
    with pytest.raises(ConfigError):
        read_run_config(parse_config_text(text))
    text = RUN_TEXT + "reduction.eps_pca = 2\n"
    with pytest.raises(ConfigError, match="eps_pca"):
        read_run_config(parse_config_text(text))


def test_config_hash_stable_and_sensitive():
    items = parse_config_text(RUN_TEXT)
    assert config_hash(items) == config_hash(dict(items))
    changed = dict(items)
    changed["sampler.seed"] = "8"
    assert config_hash(items) != config_hash(changed)


def test_sweep_config_defaults():
    cfg = read_sweep_config(parse_config_text("data.output_dir = out\n"))
    assert cfg.nu == 100 and cfg.n_d == 1000 and cfg.n_r == 100
    assert cfg.m_min == -3.0 and cfg.sigma_step == 0.2


def test_gen_config_kinds():
    cfg = read_gen_config(
        parse_config_text("data.output_dir = out\ngen.kind = gaussian\n")
    )
    assert cfg.kind == "gaussian"
    with pytest.raises(ConfigError, match="gen.kind"):
        read_gen_config(parse_config_text("data.output_dir = out\ngen.kind = x\n"))
