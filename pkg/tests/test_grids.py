import json

import pytest

from boostbench.boosting import BoostParams
from boostbench.forest import ForestParams
from boostbench.grids import (DEFAULTS, PRESETS, PROPOSED_XGB_DEFAULT, ParamGrid, config_label,
                              expand_grid, get_grid, make_params)


@pytest.mark.parametrize("name,size", [("xgb_full", 3840), ("rf_full", 256), ("gb_full", 1920),
                                       ("xgb_no_gamma", 480), ("xgb_no_rand", 240),
                                       ("gb_no_rand", 30)])
def test_cardinalities(name, size):
    assert len(expand_grid(PRESETS[name])) == PRESETS[name].size == size


def test_first_axis_slowest():
    g = ParamGrid("t", "gb", (("learning_rate", (0.1, 0.2)), ("max_depth", (2, 3))))
    assert expand_grid(g) == [{"learning_rate": 0.1, "max_depth": 2},
                              {"learning_rate": 0.1, "max_depth": 3},
                              {"learning_rate": 0.2, "max_depth": 2},
                              {"learning_rate": 0.2, "max_depth": 3}]


def test_configs_are_distinct():
    configs = expand_grid(PRESETS["xgb_full"])
    assert len({config_label(c) for c in configs}) == len(configs)


def test_defaults_map_to_params():
    rf = make_params("rf", {})
    assert rf == ForestParams(n_trees=200, max_depth=None, max_features="sqrt")
    gb = make_params("gb", {}, seed=3)
    assert (gb.learning_rate, gb.max_depth, gb.subsample, gb.seed) == (0.1, 3, 1.0, 3)
    xgb = make_params("xgb", PROPOSED_XGB_DEFAULT)
    assert isinstance(xgb, BoostParams) and xgb.mode == "xgb"
    assert (xgb.gamma, xgb.max_depth, xgb.colsample_bylevel) == (0.2, 100, "sqrt")


def test_every_preset_config_builds_params():
    for grid in PRESETS.values():
        for config in expand_grid(grid)[:: max(1, grid.size // 50)]:
            make_params(grid.method, config)


def test_default_keys_cover_grid_axes():
    for grid in PRESETS.values():
        assert set(grid.axis_names) <= set(DEFAULTS[grid.method])


def test_json_grid_round_trip(tmp_path):
    p = tmp_path / "g.json"
    p.write_text(json.dumps(PRESETS["rf_full"].to_dict()))
    assert get_grid(str(p)) == PRESETS["rf_full"]


def test_grid_validation():
    with pytest.raises(ValueError):
        ParamGrid("x", "svm", (("a", (1,)),))
    with pytest.raises(ValueError):
        ParamGrid("x", "rf", (("max_depth", ()),))
    with pytest.raises(ValueError):
        make_params("svm", {})


def test_config_label():
    assert config_label({"learning_rate": 0.1, "max_depth": None}) == "learning_rate=0.1;max_depth=None"
