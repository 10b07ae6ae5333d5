"""Versioned JSON model files for boosted ensembles and forests.

Floats are written with Python's shortest round-trip repr, so a loaded
model predicts bit-for-bit like the one that was saved. The file also keeps
the column encodings and imputation values needed to read new CSV files.
"""
import json
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boosting import BoostedEnsemble
from .data import Schema
from .forest import Forest
from .losses import loss_from_dict
from .tree import Tree

FORMAT = "boostbench-model"
VERSION = 1


class ModelFormatError(ValueError):
    pass


@dataclass(eq=False)
class ModelBundle:
    """A fitted model plus what is needed to feed it raw CSV rows."""

    model: object
    schema: Optional[Schema] = None
    impute_means: Optional[np.ndarray] = None
    params: dict = field(default_factory=dict)

    @property
    def mode(self) -> str:
        return "forest" if isinstance(self.model, Forest) else self.model.mode


@contextmanager
def _deep_trees():
    # unlimited-depth trees nest one dict level per node depth
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20000))
    try:
        yield
    finally:
        sys.setrecursionlimit(old)


def _num(v):
    if v is None or isinstance(v, (str, bool)):
        return v
    if isinstance(v, (np.integer, int)):
        return int(v)
    return float(v)


def to_dict(bundle: ModelBundle) -> dict:
    m = bundle.model
    out = {"format": FORMAT, "version": VERSION, "mode": bundle.mode,
           "params": {k: _num(v) for k, v in bundle.params.items()},
           "schema": bundle.schema.to_dict() if bundle.schema is not None else None,
           "impute_means": (None if bundle.impute_means is None
                            else [None if np.isnan(v) else float(v) for v in bundle.impute_means])}
    if isinstance(m, Forest):
        out.update(n_features=m.n_features, n_classes=m.n_classes,
                   trees=[t.to_dict() for t in m.trees])
    elif isinstance(m, BoostedEnsemble):
        out.update(n_features=m.n_features, n_classes=m.n_classes, loss=m.loss.to_dict(),
                   base_score=[float(v) for v in m.base_score],
                   learning_rate=float(m.learning_rate),
                   trees=[[t.to_dict() for t in step] for step in m.trees])
    else:
        raise TypeError(f"cannot serialize {type(m).__name__}")
    return out


def from_dict(d: dict) -> ModelBundle:
    if d.get("format") != FORMAT:
        raise ModelFormatError("not a boostbench model file")
    if d.get("version") != VERSION:
        raise ModelFormatError(f"unsupported model version {d.get('version')!r}")
    try:
        mode = d["mode"]
        nf = int(d["n_features"])
        if mode == "forest":
            trees = [Tree.from_dict(t, nf, criterion="gini") for t in d["trees"]]
            model = Forest(trees=trees, n_classes=int(d["n_classes"]), n_features=nf)
        elif mode in ("gb", "xgb"):
            crit = "newton" if mode == "xgb" else "variance"
            trees = [[Tree.from_dict(t, nf, criterion=crit) for t in step] for step in d["trees"]]
            model = BoostedEnsemble(base_score=np.asarray(d["base_score"], dtype=np.float64),
                                    trees=trees, learning_rate=float(d["learning_rate"]),
                                    loss=loss_from_dict(d["loss"]), n_features=nf, mode=mode,
                                    n_classes=int(d["n_classes"]))
        else:
            raise ModelFormatError(f"unknown mode {mode!r}")
        schema = Schema.from_dict(d["schema"]) if d.get("schema") else None
        means = d.get("impute_means")
        if means is not None:
            means = np.array([np.nan if v is None else v for v in means], dtype=np.float64)
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from exc
    return ModelBundle(model, schema, means, dict(d.get("params", {})))


def dumps(bundle: ModelBundle) -> str:
    with _deep_trees():
        return json.dumps(to_dict(bundle), sort_keys=True, separators=(",", ":"),
                          allow_nan=False)


def loads(text: str) -> ModelBundle:
    with _deep_trees():
        return from_dict(json.loads(text))


def save_model(path, bundle: ModelBundle):
    with open(path, "w") as fh:
        fh.write(dumps(bundle))
        fh.write("\n")


def load_model(path) -> ModelBundle:
    with open(path) as fh:
        return loads(fh.read())
