import json
from pathlib import Path

import pytest

from agents.q_agent import AgentConfig
from core.errors import ConfigError
from ports.config_loader import DEFAULT_RUNS, config_from_dict, parse_config, save_config
from tests.conftest import write_tiny_maze_config

EXPERIMENTS = Path(__file__).resolve().parent.parent / "user_inputs" / "experiments"

CARTPOLE = {
    "domain": "cartpole",
    "target": {"x_bound": 2.4, "angle_deg": 30},
    "sources": [{"x_bound": 4.0, "angle_deg": 60}],
}


def test_domain_defaults_fill_missing_fields():
    config = config_from_dict(dict(CARTPOLE))
    assert config.name == "cartpole"
    assert config.n_runs == DEFAULT_RUNS
    assert config.budget_steps == 120000
    assert config.episode_budget == 220
    assert config.stage_steps == 2000
    assert config.agent == AgentConfig()
    assert config.agent.learning_rate == 0.6 and config.agent.discount == 0.9
    assert config.k == 1


def test_parse_resolves_layouts_against_config_folder(tmp_path):
    config = parse_config(write_tiny_maze_config(tmp_path))
    assert config.target["layout"] == str((tmp_path / "maze.txt").resolve())
    assert config.probe_steps == 30
    assert config.measure_steps == 30
    assert config.selectors == ["baseline", "rmgs"]


def test_saved_config_parses_back_equal(tmp_path):
    config = parse_config(write_tiny_maze_config(tmp_path, agent={"learning_rate": 0.5}))
    saved = save_config(config, tmp_path / "copy" / "tiny.json")
    assert parse_config(saved) == config


@pytest.mark.parametrize("overrides,field", [
    ({"n_runs": 0}, "n_runs"),
    ({"probe_steps": -5}, "probe_steps"),
    ({"seed": -1}, "seed"),
    ({"colour": "blue"}, "colour"),
    ({"selectors": ["rmgs", "oracle"]}, "selectors"),
    ({"selectors": ["fixed"]}, "fixed_order"),
    ({"selectors": ["fixed"], "fixed_order": [0, 0]}, "fixed_order"),
    ({"agent": {"learning_rate": 1.5}}, "agent"),
    ({"agent": {"momentum": 0.1}}, "agent.momentum"),
    ({"agent": {"tie_break": "first"}}, "agent"),
    ({"pair_features": "shape"}, "pair_features"),
    ({"sources": [{"keep": [0, 1]}]}, "sources[0].keep"),
])
def test_invalid_fields_name_the_field(tmp_path, overrides, field):
    with pytest.raises(ConfigError) as err:
        parse_config(write_tiny_maze_config(tmp_path, **overrides))
    assert err.value.field == field


def test_missing_layout_file(tmp_path):
    with pytest.raises(ConfigError) as err:
        parse_config(write_tiny_maze_config(tmp_path, target={"layout": "nowhere.txt"}))
    assert err.value.field == "target.layout"


def test_invalid_json_reports_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "domain": "maze",\n  "target": }\n', encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        parse_config(path)
    assert "line 3" in str(err.value)
    assert "column" in str(err.value)


def test_cartpole_bounds_must_be_positive():
    raw = dict(CARTPOLE, sources=[{"x_bound": 0, "angle_deg": 60}])
    with pytest.raises(ConfigError) as err:
        config_from_dict(raw)
    assert err.value.field == "sources[0].x_bound"


def test_env_seed_applies_only_when_config_has_none(tmp_path, monkeypatch):
    monkeypatch.setenv("CURRICULUM_SEED", "99")
    assert parse_config(write_tiny_maze_config(tmp_path)).seed == 3
    raw = json.loads((tmp_path / "tiny.json").read_text(encoding="utf-8"))
    del raw["seed"]
    (tmp_path / "tiny.json").write_text(json.dumps(raw), encoding="utf-8")
    assert parse_config(tmp_path / "tiny.json").seed == 99


def test_coverage_pair_features_are_maze_only():
    with pytest.raises(ConfigError) as err:
        config_from_dict({**CARTPOLE, "pair_features": "coverage"})
    assert err.value.field == "pair_features"


def test_shipped_grid_configs_break_ties_randomly():
    for name in ("maze", "gridworld"):
        config = parse_config(EXPERIMENTS / f"{name}.json")
        assert config.agent.tie_break == "random"
        assert config.agent.reset_epsilon_on_switch is False
    assert parse_config(EXPERIMENTS / "maze.json").pair_features == "coverage"
