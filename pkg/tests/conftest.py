import importlib.resources as resources

import numpy as np
import pytest

from tai_solver import (
    ModelParams,
    SolverSettings,
    build_rate_table,
    read_anchor_file,
    read_distribution_file,
    solve_spine,
)

DATA = resources.files("tai_solver") / "data"


def data_path(name):
    return str(DATA / name)


@pytest.fixture(scope="session")
def baseline_beliefs():
    """Front-loaded belief file shipped with the package (the baseline)."""
    return read_distribution_file(data_path("timeline_metaculus_style.csv"),
                                  source_label="metaculus_style")


@pytest.fixture(scope="session")
def slow_beliefs():
    """Slower comparison belief file shipped with the package."""
    return read_distribution_file(data_path("timeline_cotra_style.csv"),
                                  source_label="cotra_style")


@pytest.fixture(scope="session")
def baseline_anchors():
    return read_anchor_file(data_path("anchors_metaculus_style.csv"))


@pytest.fixture(scope="session")
def slow_anchors():
    return read_anchor_file(data_path("anchors_cotra_style.csv"))


@pytest.fixture(scope="session")
def solver_settings():
    return SolverSettings()


class SolveCache:
    """Solve each (beliefs, lambda) scenario once per session, reusing the
    lambda-invariant branch cache within a belief file."""

    def __init__(self, settings):
        self.settings = settings
        self._spines = {}
        self._branch_caches = {}

    def spine(self, beliefs, lam):
        key = (beliefs.source_label, float(lam))
        if key not in self._spines:
            cache = self._branch_caches.get(beliefs.source_label)
            spine = solve_spine(ModelParams(lam=float(lam)), beliefs,
                                self.settings, branch_cache=cache)
            self._branch_caches[beliefs.source_label] = spine.branches
            self._spines[key] = spine
        return self._spines[key]

    def table(self, beliefs, lam, horizon=30):
        spine = self.spine(beliefs, lam)
        return build_rate_table(spine, beliefs, ModelParams(lam=float(lam)),
                                horizon=horizon)


@pytest.fixture(scope="session")
def solves(solver_settings):
    return SolveCache(solver_settings)


@pytest.fixture(scope="session")
def zero_hazard_beliefs():
    from tai_solver import ArrivalDistribution

    return ArrivalDistribution(np.zeros(60), 1.0, source_label="no_arrival")
