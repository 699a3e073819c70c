"""Network document (de)serialization.

A network document is a versioned JSON object carrying the variable schema,
edge list, per-node model payloads, optional discretization maps, and a
provenance block. Floats survive the round trip exactly (Python's shortest
repr), and every structural invariant is re-validated on load.
"""
from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .data import DiscretizationMap, VariableKind
from .graph import Dag
from .models import (
    BayesianNetwork,
    ConditionalLinearGaussian,
    Cpt,
    Gaussian,
    LinearGaussian,
)

FORMAT_VERSION = 1


class DocumentError(ValueError):
    """Structurally invalid network document."""


def _config_key(config: tuple[int, ...]) -> str:
    return ",".join(str(c) for c in config)


def _parse_config(key: str) -> tuple[int, ...]:
    if key == "":
        return ()
    return tuple(int(c) for c in key.split(","))


def _model_payload(model) -> dict:
    if isinstance(model, Cpt):
        return {
            "type": "cpt",
            "cardinality": model.cardinality,
            "parents": list(model.parent_names),
            "rows": {_config_key(cfg): [float(p) for p in row] for cfg, row in model.rows.items()},
            "fallback": [float(p) for p in model.fallback],
        }
    if isinstance(model, Gaussian):
        return {"type": "gaussian", "mean": model.mean, "variance": model.variance}
    if isinstance(model, LinearGaussian):
        return {
            "type": "linear_gaussian",
            "intercept": model.intercept,
            "coefficients": list(model.coefficients),
            "residual_variance": model.residual_variance,
            "parents": list(model.parent_names),
        }
    if isinstance(model, ConditionalLinearGaussian):
        return {
            "type": "clg",
            "discrete_parents": list(model.discrete_parents),
            "continuous_parents": list(model.continuous_parents),
            "configs": {
                _config_key(cfg): {
                    "intercept": reg.intercept,
                    "coefficients": list(reg.coefficients),
                    "residual_variance": reg.residual_variance,
                }
                for cfg, reg in model.configs.items()
            },
            "fallback": {"mean": model.fallback.mean, "variance": model.fallback.variance},
        }
    raise TypeError(f"unknown model type {type(model)!r}")


def network_to_document(
    bn: BayesianNetwork, labels: dict[str, tuple[str, ...]], provenance: dict | None = None
) -> dict:
    variables = []
    for name, kind in zip(bn.dag.names, bn.dag.kinds):
        variables.append(
            {
                "name": name,
                "kind": kind.value,
                "labels": list(labels[name]) if name in labels else None,
            }
        )
    return {
        "format_version": FORMAT_VERSION,
        "variables": variables,
        "edges": sorted([list(e) for e in bn.dag.edges]),
        "models": {name: _model_payload(bn.models[name]) for name in bn.dag.names},
        "discretization": [
            {
                "column": m.column,
                "cut_points": list(m.cut_points),
                "bin_means": list(m.bin_means),
            }
            for m in bn.discretization
        ]
        or None,
        "provenance": provenance or {},
    }


def _model_from_payload(payload: dict):
    kind = payload.get("type")
    if kind == "cpt":
        rows = {
            _parse_config(k): np.asarray(v, dtype=np.float64)
            for k, v in payload["rows"].items()
        }
        for cfg, row in rows.items():
            if abs(float(row.sum()) - 1.0) > 1e-9 or (row < 0).any() or (row > 1).any():
                raise DocumentError(f"CPT row {cfg} is not a probability vector")
        return Cpt(
            int(payload["cardinality"]),
            tuple(payload["parents"]),
            rows,
            np.asarray(payload["fallback"], dtype=np.float64),
        )
    if kind == "gaussian":
        if payload["variance"] < 0:
            raise DocumentError("negative variance")
        return Gaussian(float(payload["mean"]), float(payload["variance"]))
    if kind == "linear_gaussian":
        if payload["residual_variance"] < 0:
            raise DocumentError("negative residual variance")
        return LinearGaussian(
            float(payload["intercept"]),
            tuple(float(c) for c in payload["coefficients"]),
            float(payload["residual_variance"]),
            tuple(payload["parents"]),
        )
    if kind == "clg":
        configs = {}
        for key, reg in payload["configs"].items():
            if reg["residual_variance"] < 0:
                raise DocumentError("negative residual variance")
            configs[_parse_config(key)] = LinearGaussian(
                float(reg["intercept"]),
                tuple(float(c) for c in reg["coefficients"]),
                float(reg["residual_variance"]),
                tuple(payload["continuous_parents"]),
            )
        fb = payload["fallback"]
        return ConditionalLinearGaussian(
            tuple(payload["discrete_parents"]),
            tuple(payload["continuous_parents"]),
            configs,
            Gaussian(float(fb["mean"]), float(fb["variance"])),
        )
    raise DocumentError(f"unknown model type {kind!r}")


def document_to_network(doc: dict) -> tuple[BayesianNetwork, dict[str, tuple[str, ...]], dict]:
    """Rebuild (network, label maps, provenance), re-validating all invariants."""
    if doc.get("format_version") != FORMAT_VERSION:
        raise DocumentError(f"unsupported format version {doc.get('format_version')!r}")
    try:
        names = tuple(v["name"] for v in doc["variables"])
        kinds = tuple(VariableKind(v["kind"]) for v in doc["variables"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"bad variable table: {exc}") from exc
    labels = {
        v["name"]: tuple(v["labels"])
        for v in doc["variables"]
        if v.get("labels") is not None
    }
    try:
        dag = Dag(names, kinds, frozenset(tuple(e) for e in doc["edges"]))
    except ValueError as exc:
        raise DocumentError(f"invalid graph: {exc}") from exc
    models = {}
    model_payloads = doc.get("models", {})
    if set(model_payloads) != set(names):
        raise DocumentError("models must cover exactly the declared variables")
    for name in names:
        models[name] = _model_from_payload(model_payloads[name])
    _check_taxonomy(dag, models, labels)
    maps = [
        DiscretizationMap(m["column"], tuple(m["cut_points"]), tuple(m["bin_means"]))
        for m in (doc.get("discretization") or [])
    ]
    bn = BayesianNetwork(dag, models, maps)
    return bn, labels, doc.get("provenance", {})


def _check_taxonomy(dag: Dag, models: dict, labels: dict):
    binned_or_discrete = set(labels)
    for name in dag.names:
        model = models[name]
        parents = dag.parents(name)
        discrete_here = name in binned_or_discrete
        if isinstance(model, Cpt):
            if not discrete_here:
                raise DocumentError(f"{name!r} has a CPT but no category labels")
            if set(model.parent_names) != set(parents):
                raise DocumentError(f"{name!r}: CPT parents do not match graph")
        elif isinstance(model, Gaussian):
            if parents:
                raise DocumentError(f"{name!r}: marginal Gaussian but graph has parents")
        elif isinstance(model, LinearGaussian):
            if set(model.parent_names) != set(parents):
                raise DocumentError(f"{name!r}: regression parents do not match graph")
        elif isinstance(model, ConditionalLinearGaussian):
            if set(model.discrete_parents) | set(model.continuous_parents) != set(parents):
                raise DocumentError(f"{name!r}: conditional regression parents do not match graph")


def documents_equal(a: dict, b: dict) -> bool:
    """Field-order-independent semantic equality of two documents."""
    return json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def atomic_write_text(path, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_network(bn: BayesianNetwork, labels, path, provenance: dict | None = None):
    doc = network_to_document(bn, labels, provenance)
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_network(path) -> tuple[BayesianNetwork, dict[str, tuple[str, ...]], dict]:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"not valid JSON: {exc}") from exc
    return document_to_network(doc)
