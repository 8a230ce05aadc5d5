from pathlib import Path

import pytest
import yaml

from treegroups.errors import ConfigError
from treegroups.specs import GHSpec, LemmaSpec, PatternSpec, load_spec, spec_from_dict

CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.yaml"))


def test_one_config_per_family():
    families = {load_spec(p).family for p in CONFIGS}
    assert families == {"generators", "pattern", "gs", "lemma", "gh", "affine"}


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.stem)
def test_config_echo_round_trips(path):
    spec = load_spec(path)
    again = spec_from_dict(spec.echo())
    assert again.echo() == spec.echo()
    G = spec.build(2)
    closed = spec.order(2)
    assert closed is None or closed == G.order


@pytest.mark.parametrize("doc", [
    None,
    {"degree": 2},
    {"family": "octopus", "degree": 2},
    {"family": "lemma", "degree": 1},
    {"family": "lemma", "degree": 2, "part": "K"},
    {"family": "generators", "degree": 2, "generators": []},
    {"family": "generators", "degree": 2, "generators": ["10[e"]},
    {"family": "gs", "degree": 4, "sigma": "1032"},
    {"family": "pattern", "degree": 2, "pattern": "most"},
    {"family": "gh", "outer": {"family": "lemma", "degree": 2}, "inner": {"family": "lemma", "degree": 3}},
])
def test_bad_configs(doc):
    with pytest.raises(ConfigError):
        spec_from_dict(doc)


def test_load_spec_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_spec(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("family: [unclosed\n")
    with pytest.raises(ConfigError):
        load_spec(bad)


def test_pattern_depth_two(tmp_path):
    doc = {"family": "pattern", "degree": 2, "pattern": {"kind": "full", "depth": 2}}
    spec = spec_from_dict(doc)
    assert isinstance(spec, PatternSpec)
    assert spec.order(3) == 128


def test_gh_spec_defaults():
    spec = spec_from_dict(yaml.safe_load("""
family: gh
outer: {family: lemma, degree: 2, part: G}
inner: {family: lemma, degree: 2, part: H}
"""))
    assert spec == GHSpec(LemmaSpec(2, "G"), LemmaSpec(2, "H"))
    assert spec.build(3).order == 32
