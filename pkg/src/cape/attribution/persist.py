"""Versioned single-file model artifacts.

A model file is JSON carrying the format version, model kind, feature
schema, classes, seed, and kind-specific parameters.  Loading refuses any
other version.
"""

from __future__ import annotations

import json

from ..errors import FormatError
from .classifiers import _IMPLS, TrainedModel

MODEL_FORMAT = "cape-model/1"


def model_to_dict(model: TrainedModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "kind": model.kind,
        "feature_schema": list(model.feature_schema),
        "classes": list(model.classes),
        "seed": model.seed,
        "params": model.impl.params(),
    }


def save_model(model: TrainedModel, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(model_to_dict(model), handle, sort_keys=True,
                  separators=(",", ":"))
        handle.write("\n")


def model_from_dict(data: dict) -> TrainedModel:
    if data.get("format") != MODEL_FORMAT:
        raise FormatError(f"expected {MODEL_FORMAT}, got "
                          f"{data.get('format')!r}")
    kind = data["kind"]
    if kind not in _IMPLS:
        raise FormatError(f"unknown model kind {kind!r}")
    impl = _IMPLS[kind].from_params(data["params"])
    return TrainedModel(
        kind=kind,
        feature_schema=list(data["feature_schema"]),
        classes=list(data["classes"]),
        seed=int(data["seed"]),
        impl=impl,
    )


def load_model(path) -> TrainedModel:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path} is not a JSON model file") from exc
    return model_from_dict(data)
