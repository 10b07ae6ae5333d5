"""Hyperparameter grids, default settings and config -> model-parameter mapping."""
import itertools
import json
from dataclasses import dataclass
from typing import Dict, List, Tuple

from .boosting import BoostParams
from .forest import ForestParams

METHODS = ("rf", "gb", "xgb")
N_TREES = 200

_LR = (0.025, 0.05, 0.1, 0.2, 0.3)
_FEATS = ("log2", "sqrt", 0.25, 1.0)
_SUB = (0.15, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class ParamGrid:
    """Named axes; configs are the Cartesian product, first axis slowest."""

    name: str
    method: str
    axes: Tuple[Tuple[str, tuple], ...]

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not self.axes:
            raise ValueError("a grid needs at least one axis")
        for axis, values in self.axes:
            if len(values) == 0:
                raise ValueError(f"axis {axis!r} has no values")

    @property
    def size(self) -> int:
        n = 1
        for _, values in self.axes:
            n *= len(values)
        return n

    @property
    def axis_names(self) -> List[str]:
        return [a for a, _ in self.axes]

    def to_dict(self):
        return {"name": self.name, "method": self.method,
                "axes": [[a, list(v)] for a, v in self.axes]}

    @classmethod
    def from_dict(cls, d):
        return cls(name=d.get("name", "custom"), method=d["method"],
                   axes=tuple((a, tuple(v)) for a, v in d["axes"]))

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def expand_grid(grid: ParamGrid) -> List[Dict]:
    """Every config of ``grid`` as a dict, in lexicographic axis order.

    The position in the returned list is the config index used for
    tie-breaking and in result files.
    """
    names = grid.axis_names
    return [dict(zip(names, combo)) for combo in itertools.product(*(v for _, v in grid.axes))]


PRESETS = {
    "rf_full": ParamGrid("rf_full", "rf", (
        ("max_depth", (5, 8, 10, None)),
        ("min_samples_split", (2, 5, 10, 20)),
        ("min_samples_leaf", (1, 25, 50, 70)),
        ("max_features", ("log2", 0.25, "sqrt", 1.0)),
    )),
    "gb_full": ParamGrid("gb_full", "gb", (
        ("learning_rate", _LR),
        ("max_depth", (2, 3, 5, 7, 10, None)),
        ("min_samples_split", (2, 5, 10, 20)),
        ("max_features", _FEATS),
        ("subsample", _SUB),
    )),
    "xgb_full": ParamGrid("xgb_full", "xgb", (
        ("learning_rate", _LR),
        ("gamma", (0.0, 0.1, 0.2, 0.3, 0.4, 1.0, 1.5, 2.0)),
        ("max_depth", (2, 3, 5, 7, 10, 100)),
        ("colsample_bylevel", _FEATS),
        ("subsample", _SUB),
    )),
}
PRESETS["xgb_no_gamma"] = ParamGrid("xgb_no_gamma", "xgb", tuple(
    (a, (0.0,) if a == "gamma" else v) for a, v in PRESETS["xgb_full"].axes))
PRESETS["xgb_no_rand"] = ParamGrid("xgb_no_rand", "xgb", tuple(
    (a, {"colsample_bylevel": ("sqrt",), "subsample": (0.75,)}.get(a, v))
    for a, v in PRESETS["xgb_full"].axes))
# gradient boosting without randomization: learning rate and depth only,
# the other axes held at their defaults (a reduced grid for desk-scale runs)
PRESETS["gb_no_rand"] = ParamGrid("gb_no_rand", "gb", (
    ("learning_rate", _LR),
    ("max_depth", (2, 3, 5, 7, 10, None)),
    ("min_samples_split", (2,)),
    ("max_features", (1.0,)),
    ("subsample", (1.0,)),
))

DEFAULTS = {
    "rf": {"max_depth": None, "min_samples_split": 2, "min_samples_leaf": 1,
           "max_features": "sqrt"},
    "gb": {"learning_rate": 0.1, "max_depth": 3, "min_samples_split": 2,
           "max_features": 1.0, "subsample": 1.0},
    "xgb": {"learning_rate": 0.1, "gamma": 0.0, "max_depth": 3,
            "colsample_bylevel": 1.0, "subsample": 1.0},
}

# settings suggested for XGBoost after analysing the full-grid test results
PROPOSED_XGB_DEFAULT = {"learning_rate": 0.05, "gamma": 0.2, "max_depth": 100,
                        "colsample_bylevel": "sqrt", "subsample": 0.75}


def get_grid(name_or_path) -> ParamGrid:
    """Preset by name, otherwise a JSON grid file."""
    if name_or_path in PRESETS:
        return PRESETS[name_or_path]
    return ParamGrid.from_json(name_or_path)


def make_params(method: str, config: Dict, seed: int = 0, n_trees: int = N_TREES):
    """Model parameters for ``method`` with ``config`` layered over the defaults."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    merged = {**DEFAULTS[method], **config}
    if method == "rf":
        return ForestParams(n_trees=n_trees, seed=seed, **merged)
    return BoostParams(n_trees=n_trees, mode=method, seed=seed, **merged)


def config_label(config: Dict) -> str:
    """Compact, stable text form such as ``learning_rate=0.1;max_depth=3``."""
    return ";".join(f"{k}={'None' if v is None else v}" for k, v in config.items())
