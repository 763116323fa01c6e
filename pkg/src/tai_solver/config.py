"""Scenario configuration: a YAML document with the top-level keys
``model``, ``timeline``, ``solver``, and ``report``."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from .econ_core import ModelParams
from .exceptions import ConfigurationError
from .timeline import ArrivalDistribution, NbbSpec, annualize, read_distribution_file
from .transition import SolverSettings

REQUIRED_KEYS = ("model", "timeline", "solver", "report")

_MODEL_KEYS = {"beta", "eta", "alpha", "delta", "g_sq", "g_tai", "lambda", "labor"}
_SOLVER_KEYS = {"terminal_year", "branch_horizon", "tol", "max_iter", "damping"}


@dataclass(frozen=True)
class ReportSettings:
    horizon: int = 30
    lambdas: tuple = (0.0, 1.0, 2.0, 4.0)
    out_dir: str = "out"

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigurationError("report horizon must be at least 1 year")
        if not self.lambdas:
            raise ConfigurationError("lambda list must be nonempty")


@dataclass(frozen=True)
class ScenarioConfig:
    params: ModelParams
    beliefs: ArrivalDistribution
    solver: SolverSettings
    report: ReportSettings

    def with_lambda(self, lam: float) -> "ScenarioConfig":
        return replace(self, params=replace(self.params, lam=lam))


def _check_mapping(section, name, allowed):
    if not isinstance(section, dict):
        raise ConfigurationError(f"'{name}' must be a mapping")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigurationError(f"unknown keys in '{name}': {sorted(unknown)}")


def _build_timeline(section, base_dir) -> ArrivalDistribution:
    sources = [k for k in ("annual_probs", "file", "nbb") if k in section]
    if len(sources) != 1:
        raise ConfigurationError(
            "timeline must specify exactly one of 'annual_probs', 'file', 'nbb'")
    label = section.get("source_label", "")
    source = sources[0]
    if source == "annual_probs":
        probs = np.asarray(section["annual_probs"], dtype=float)
        p_never = float(section.get("p_never", 1.0 - probs.sum()))
        return ArrivalDistribution(probs, p_never, source_label=label)
    if source == "file":
        path = section["file"]
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        if not os.path.exists(path):
            raise ConfigurationError(f"timeline file does not exist: {path}")
        return read_distribution_file(path, source_label=label or os.path.basename(path))
    nbb = section["nbb"]
    spec = NbbSpec(
        n_support=tuple(nbb["n_support"]),
        n_weights=tuple(nbb["n_weights"]),
        a=float(nbb["a"]),
        b=float(nbb["b"]),
        months_per_year=int(nbb.get("months_per_year", 12)),
        horizon_years=int(nbb.get("horizon_years", 60)),
    )
    return annualize(spec, source_label=label)


def parse_config(doc: dict, base_dir: str = ".") -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigurationError("configuration must be a mapping")
    missing = [k for k in REQUIRED_KEYS if k not in doc]
    if missing:
        raise ConfigurationError(f"missing top-level keys: {missing}")
    unknown = set(doc) - set(REQUIRED_KEYS)
    if unknown:
        raise ConfigurationError(f"unknown top-level keys: {sorted(unknown)}")

    model = dict(doc["model"] or {})
    _check_mapping(model, "model", _MODEL_KEYS)
    if "lambda" in model:
        model["lam"] = float(model.pop("lambda"))
    try:
        params = ModelParams(**{k: float(v) for k, v in model.items()})
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None

    solver_doc = dict(doc["solver"] or {})
    _check_mapping(solver_doc, "solver", _SOLVER_KEYS)
    for key in ("terminal_year", "branch_horizon", "max_iter"):
        if key in solver_doc:
            solver_doc[key] = int(solver_doc[key])
    solver = SolverSettings(**solver_doc)

    report_doc = dict(doc["report"] or {})
    _check_mapping(report_doc, "report", {"horizon", "lambdas", "out_dir"})
    if "lambdas" in report_doc:
        report_doc["lambdas"] = tuple(float(x) for x in report_doc["lambdas"])
    if "horizon" in report_doc:
        report_doc["horizon"] = int(report_doc["horizon"])
    report = ReportSettings(**report_doc)

    try:
        beliefs = _build_timeline(dict(doc["timeline"] or {}), base_dir)
    except (KeyError, ValueError) as exc:
        raise ConfigurationError(f"invalid timeline section: {exc}") from None

    if solver.terminal_year < beliefs.horizon:
        raise ConfigurationError(
            f"terminal_year ({solver.terminal_year}) must cover the timeline "
            f"horizon ({beliefs.horizon})")
    if report.horizon + 30 > solver.terminal_year:
        raise ConfigurationError(
            "terminal_year must exceed report horizon plus the 30-year bond window")
    return ScenarioConfig(params=params, beliefs=beliefs, solver=solver, report=report)


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
    return parse_config(doc, base_dir=os.path.dirname(os.path.abspath(path)))
