"""Habitat configs and helpers for the spreadcore test suite."""

import os

from spreadcore.discretize import CellGrid, sample_kernel
from spreadcore.evolve import TimeGrid
from spreadcore.habitat import load_config

ACCEPTANCE = bool(os.environ.get("SPREADCORE_ACCEPTANCE"))

CONSTANTS = {"a1": "2", "b1": "1", "c1": "0.5", "a2": "1", "b2": "1", "c2": "1"}
SCALED_COMPETITION = {
    "a1": "1",
    "b1": "1",
    "c1": "0.5",
    "a2": "1",
    "b2": "1.2",
    "c2": "1",
}
BALANCED_COMPETITION = dict(SCALED_COMPETITION, b2="1")
SPACE_TIME = dict(CONSTANTS, a1="2 + eps*sin(2*pi*t/T)*cos(2*pi*x/p)")


def habitat_config(
    coefficients=None,
    shape="uniform",
    radius=1.0,
    T=1.0,
    p=1.0,
    params=None,
    grid=None,
    run=None,
):
    """Return the text of a habitat config.

    Unless given, the grid is the small ``nt = 32``, ``nx = 16`` grid the unit
    tests run on.

    """
    coefficients = coefficients or CONSTANTS
    grid = dict({"nt": 32, "nx": 16, "check_nt": 16, "check_nx": 16}, **(grid or {}))
    lines = [
        "[kernel]",
        f"shape = {shape}",
        f"radius = {radius}",
        "",
        "[coefficients]",
    ]
    lines.extend(f'{name} = "{value}"' for name, value in coefficients.items())
    lines.extend(["", "[periods]", f"T = {T}", f"p = {p}", "", "[grid]"])
    lines.extend(f"{key} = {value}" for key, value in grid.items())
    for section, values in (("params", params), ("run", run)):
        if values:
            lines.extend(["", f"[{section}]"])
            lines.extend(f"{key} = {value}" for key, value in values.items())
    return "\n".join(lines) + "\n"


CONSTANTS_CONFIG = habitat_config()
SCALED_COMPETITION_CONFIG = habitat_config(SCALED_COMPETITION)
SPACE_TIME_CONFIG = habitat_config(SPACE_TIME, params={"eps": 0.3})


def grids(config):
    """Return the ``(habitat, time_grid, cell, kernel)`` of a loaded config."""
    habitat, settings = config.habitat, config.settings
    cell = CellGrid(habitat.p, settings.nx)
    return (
        habitat,
        TimeGrid(habitat.T, settings.nt),
        cell,
        sample_kernel(habitat.kernel, cell.dx),
    )


def load(text, *overrides):
    """Return the config of ``text`` with ``overrides`` applied."""
    return load_config(text, overrides)
