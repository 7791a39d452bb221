"""Declarative experiment configuration (JSON, validated against a schema)."""

import copy
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigurationError
from .forward import ScatterGrid, SolverConfig
from .inversion import circle_points, ring_points
from .randfield import StrengthProfile, grid_for_box

__all__ = [
    "ExperimentConfig",
    "load_config",
    "reference_config",
    "schema",
    "measurement_points",
    "sphere_points",
]


def schema():
    with resources.files(__package__).joinpath("configs/schema.json").open(encoding="utf-8") as fh:
        return json.load(fh)


def sphere_points(n, radius=2.0):
    """Fibonacci points on a sphere."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    t = np.pi * (1.0 + 5**0.5) * i
    s = np.sqrt(1.0 - z * z)
    return radius * np.column_stack([s * np.cos(t), s * np.sin(t), z])


def measurement_points(geom, dim):
    """Points of ``U`` from a geometry block.

    ``kind`` is ``"circle"`` (one circle or sphere of ``radius`` with ``count``
    points) or ``"rings"`` (concentric circles or spheres of ``radii`` with
    ``count`` points each).
    """
    kind = geom["kind"]
    if kind == "circle":
        radii = [geom["radius"]]
    elif kind == "rings":
        radii = list(geom["radii"])
    else:
        raise ConfigurationError(f"U.kind: unknown geometry {kind!r}")
    count = int(geom["count"])
    if dim == 2:
        if kind == "circle":
            return circle_points(count, radii[0], phase=2.0 * np.pi * geom.get("phase", 0.0))
        return ring_points(radii, count)
    return np.vstack([sphere_points(count, r) for r in radii])


@dataclass
class ExperimentConfig:
    data: dict

    def __post_init__(self):
        self.validate()

    def __getitem__(self, key):
        return self.data[key]

    @property
    def dim(self):
        return int(self.data["dim"])

    @property
    def m(self):
        return float(self.data["m"])

    @property
    def sigma(self):
        return float(self.data["sigma"])

    @property
    def master_seed(self):
        return int(self.data["master_seed"])

    def with_overrides(self, **kw):
        d = copy.deepcopy(self.data)
        for key, value in kw.items():
            if value is not None:
                d[key] = value
        return ExperimentConfig(d)

    def validate(self):
        try:
            jsonschema.validate(self.data, schema())
        except jsonschema.ValidationError as err:
            where = "/".join(str(p) for p in err.absolute_path) or "<root>"
            raise ConfigurationError(f"{where}: {err.message}") from None
        d = self.data
        dim, m = d["dim"], d["m"]
        if not (dim - 1 < m <= dim):
            raise ConfigurationError(f"m: order must lie in ({dim - 1}, {dim}], got {m}")
        if d["sigma"] < 0:
            raise ConfigurationError("sigma: damping must be nonnegative")
        lo, hi = d["D"]["lo"], d["D"]["hi"]
        if len(lo) != dim or len(hi) != dim:
            raise ConfigurationError("D: box bounds must have dim entries")
        band = d["band"]
        if not 0 < band["lo"] < band["hi"]:
            raise ConfigurationError("band: need 0 < lo < hi")
        if self.min_distance() <= 0:
            raise ConfigurationError("U: measurement set intersects D (distance must be positive)")
        self.profile()  # bumps inside D

    def profile(self):
        d = self.data
        box = (tuple(d["D"]["lo"]), tuple(d["D"]["hi"]))
        mu = d["mu"]
        try:
            if mu["kind"] == "constant":
                return StrengthProfile.constant(mu["amplitude"], box)
            return StrengthProfile.bumps(mu["centers"], mu["radii"], mu["amplitudes"], box)
        except ConfigurationError as err:
            raise ConfigurationError(f"mu: {err}") from None

    def points(self):
        return measurement_points(self.data["U"], self.dim)

    def diagnostic_points(self):
        return measurement_points(self.data["ensemble"].get("diagnostic_U", self.data["U"]), self.dim)

    def inversion_points(self):
        return measurement_points(self.data["inversion"].get("U", self.data["U"]), self.dim)

    def min_distance(self):
        grid = self.scatter_grid()
        sets = [self.points(), self.diagnostic_points()]
        if "inversion" in self.data:
            sets.append(self.inversion_points())
        return float(min(np.min(grid.distance_to(p)) for p in sets))

    def scatter_grid(self):
        d = self.data
        return ScatterGrid.from_box(d["D"]["lo"], d["D"]["hi"], d["grid"]["solver_n"])

    def reconstruction_grid(self):
        d = self.data
        return ScatterGrid.from_box(d["D"]["lo"], d["D"]["hi"], d["grid"]["reconstruction_n"])

    def field_grid(self):
        sg = self.scatter_grid()
        lo, hi = sg.box
        return grid_for_box(lo, hi, sg.h, self.data["grid"].get("margin"))

    def solver(self):
        s = self.data.get("solver", {})
        return SolverConfig(residual_tol=s.get("residual_tol", 1e-10),
                            condition_limit=s.get("condition_limit", 1e14))

    def to_dict(self):
        return copy.deepcopy(self.data)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigurationError(f"{path}: invalid JSON ({err})") from None
    return ExperimentConfig(data)


def reference_config(dim=2):
    name = f"configs/reference_{dim}d.json"
    with resources.files(__package__).joinpath(name).open(encoding="utf-8") as fh:
        return ExperimentConfig(json.load(fh))


def config_path(dim=2):
    return Path(str(resources.files(__package__).joinpath(f"configs/reference_{dim}d.json")))
