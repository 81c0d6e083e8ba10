import json

import pytest
from hypothesis import given, settings, strategies as st

from centralqc.config import RunConfig
from centralqc.errors import ConfigError

BASE = {"potential": {"type": "homogeneous", "k": 1.0, "alpha": 4.0},
        "window": {"r_lo": 0.3, "r_hi": 3.0}}


def test_defaults_fill_in():
    cfg = RunConfig.from_dict(BASE)
    assert cfg.dynamics.rho == 0.05
    assert cfg.grids.scan == 400
    assert cfg.output_dir == "out"


@settings(max_examples=60, deadline=None)
@given(lo=st.floats(0.05, 1.0), span=st.floats(0.1, 10.0),
       eps=st.lists(st.floats(1e-8, 1e-1), min_size=1, max_size=4, unique=True),
       scan=st.integers(2, 2000), rho=st.floats(0.0, 1.0),
       seed=st.one_of(st.none(), st.integers(0, 2**31)),
       I2=st.one_of(st.none(), st.floats(0.5, 3.0)))
def test_round_trip(lo, span, eps, scan, rho, seed, I2):
    data = dict(BASE, window={"r_lo": lo, "r_hi": lo + span},
                grids={"scan": scan}, expand={"I2": I2},
                dynamics={"epsilons": eps, "rho": rho, "rotation_seed": seed,
                          "perturbation": {"type": "saddle"}})
    cfg = RunConfig.from_dict(data)
    again = RunConfig.from_json(cfg.to_json())
    assert again == cfg
    assert again.to_json() == cfg.to_json()


@pytest.mark.parametrize("patch", [
    {"window": {"r_lo": 2.0, "r_hi": 1.0}},
    {"tolerances": {"root": 0.0}},
    {"dynamics": {"epsilons": [1e-3, 1e-3]}},
    {"dynamics": {"epsilons": [-1e-3]}},
    {"dynamics": {"initial_actions": [1.0]}},
    {"grids": {"actionmap_I1": [1.0, 0.5, 3]}},
    {"potential": {"type": "morse"}},
    {"dynamics": {"perturbation": {"type": "nope"}}},
    {"colour": "blue"},
    {"grids": {"shape": 3}},
])
def test_invalid_configs(patch):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(dict(BASE, **patch))


def test_missing_required_blocks():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"potential": BASE["potential"]})


def test_bad_json():
    with pytest.raises(ConfigError):
        RunConfig.from_json("{not json")


def test_load(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(BASE))
    assert RunConfig.load(path).build_potential().params == {"k": 1.0, "alpha": 4.0}
