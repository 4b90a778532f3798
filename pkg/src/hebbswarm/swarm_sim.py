"""2D kinematic simulation of differential-drive robots on scalar light fields.

Coordinates are metres with the arena centred on the origin, so a 30 m arena
spans [-15, 15] on both axes. Headings are radians in [-pi, pi).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._kernels import G_MAX, NO_NEIGHBOUR_DIST

MAX_SPEED = 0.14
DT = 0.05
WHEEL_BASE = 0.0935
BODY_RADIUS = 0.08
SENSING_RANGE = 2.0
QUADRANTS = ("front", "left", "back", "right")

FIELD_KINDS = ("circular", "shifted-circular", "linear", "bimodal", "rosenbrock")


@dataclass(frozen=True)
class RobotPose:
    x: float
    y: float
    heading: float


@dataclass
class ScalarField:
    """Analytic light field with values in [0, 255].

    ``shifted-circular`` is a circular field whose peak jumps to
    ``shifted_centre`` once ``switch_time`` seconds have elapsed.
    """
    kind: str
    arena_size: float = 30.0
    params: dict = field(default_factory=dict)

    @property
    def half(self):
        return 0.5 * self.arena_size

    @property
    def centre(self):
        return (0.0, 0.0)

    @property
    def switch_time(self):
        if self.kind == "shifted-circular":
            return float(self.params["switch_time"])
        return math.inf

    def codes(self, after_switch=False):
        """Kernel representation ``(kind_code, params_array)``."""
        p = self.params
        if self.kind in ("circular", "shifted-circular"):
            c = p["shifted_centre"] if after_switch and self.kind == "shifted-circular" else p["centre"]
            return _kernels.CIRCULAR, np.array([c[0], c[1], p["falloff"]], dtype=np.float64)
        if self.kind == "linear":
            return _kernels.LINEAR, np.array([p["low"], p["high"]], dtype=np.float64)
        if self.kind == "bimodal":
            (ax, ay), (bx, by) = p["peaks"]
            return _kernels.BIMODAL, np.array([ax, ay, bx, by, p["falloff"]], dtype=np.float64)
        return _kernels.ROSENBROCK, np.array(
            [p["scale"], p["y_offset"], p["a"], p["b"], p["f_max"]], dtype=np.float64)

    def sample(self, x, y, t=0.0):
        """Field value(s) at position(s) ``(x, y)`` at time ``t`` seconds."""
        kind, params = self.codes(after_switch=t >= self.switch_time)
        xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
        ys = np.atleast_1d(np.asarray(y, dtype=np.float64))
        xs, ys = np.broadcast_arrays(xs, ys)
        out = np.array([_kernels.field_value(kind, params, a, b)
                        for a, b in zip(xs.ravel(), ys.ravel())]).reshape(xs.shape)
        return float(out[0]) if np.ndim(x) == 0 and np.ndim(y) == 0 else out

    def raster(self, n=300, t=0.0):
        """Values on an ``n x n`` grid spanning the arena (rows follow y)."""
        kind, params = self.codes(after_switch=t >= self.switch_time)
        xs = np.linspace(-self.half, self.half, n)
        return xs, xs.copy(), _kernels.field_grid(kind, params, xs, xs)

    def export(self, csv_path, json_path, n=300, t=0.0):
        xs, ys, grid = self.raster(n, t)
        np.savetxt(csv_path, grid, delimiter=",", fmt="%.6f")
        header = {"kind": self.kind, "arena_size": self.arena_size,
                  "params": _jsonable(self.params), "resolution": n,
                  "x_range": [float(xs[0]), float(xs[-1])],
                  "y_range": [float(ys[0]), float(ys[-1])], "time": t}
        with open(json_path, "w") as fh:
            json.dump(header, fh, indent=2)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _rosenbrock_max(scale, y_offset, a, b, half):
    # convex in y for fixed x, so the maximum sits on the lower or upper edge
    gx = np.linspace(-half, half, 200001) * scale
    best = 0.0
    for y in (-half, half):
        gy = y_offset + y * scale
        best = max(best, float(np.max((a - gx) ** 2 + b * (gy - gx * gx) ** 2)))
    return best


def make_field(kind, arena_size=30.0, **params):
    """Build a light field. Unspecified parameters take the defaults below.

    circular / shifted-circular: ``centre`` (0, 0), ``falloff`` 15 m,
    ``shifted_centre`` (3, 3), ``switch_time`` 300 s.
    linear: ramp along x from 0 at the left wall to 255 at the right wall.
    bimodal: two equal cones at (-7.5, 0) and (7.5, 0), ``falloff`` 15 m.
    rosenbrock: ``(a - X)^2 + b (Y - X^2)^2`` with the arena mapped onto
    X in [-2, 2], Y in [-1, 3]; negated and rescaled onto [0, 255].
    """
    half = 0.5 * arena_size
    if kind not in FIELD_KINDS:
        raise ValueError(f"unknown field kind {kind!r}; expected one of {FIELD_KINDS}")
    if kind in ("circular", "shifted-circular"):
        p = {"centre": (0.0, 0.0), "falloff": 15.0}
        if kind == "shifted-circular":
            p.update(shifted_centre=(3.0, 3.0), switch_time=300.0)
    elif kind == "linear":
        p = {"low": -half, "high": half}
    elif kind == "bimodal":
        p = {"peaks": ((-half / 2, 0.0), (half / 2, 0.0)), "falloff": 15.0}
    else:
        p = {"a": 1.0, "b": 100.0, "scale": 2.0 / half, "y_offset": 1.0}
    unknown = set(params) - set(p) - ({"f_max"} if kind == "rosenbrock" else set())
    if unknown:
        raise ValueError(f"unknown parameters for {kind!r}: {sorted(unknown)}")
    p.update(params)
    if kind == "rosenbrock" and "f_max" not in params:
        p["f_max"] = _rosenbrock_max(p["scale"], p["y_offset"], p["a"], p["b"], half)
    for key in ("falloff", "f_max"):
        if key in p and not p[key] > 0:
            raise ValueError(f"{key} must be positive")
    if kind == "linear" and p["high"] == p["low"]:
        raise ValueError("linear ramp needs distinct low/high positions")
    return ScalarField(kind, arena_size, p)


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean Gaussian sensor noise plus per-quadrant dropout.

    ``std_light`` is in rescaled [-1, 1] units (so 0.05 is 6.375 raw light
    units); ``std_theta`` is radians and ``std_dist`` metres.
    """
    std_light: float = 0.05
    std_theta: float = 0.043
    std_dist: float = 0.0046
    p_dropout: float = 0.20

    def __post_init__(self):
        if min(self.std_light, self.std_theta, self.std_dist) < 0:
            raise ValueError("noise standard deviations must be non-negative")
        if not 0.0 <= self.p_dropout <= 1.0:
            raise ValueError("dropout probability must lie in [0, 1]")

    @classmethod
    def none(cls):
        return cls(0.0, 0.0, 0.0, 0.0)

    @property
    def silent(self):
        return self.std_light == self.std_theta == self.std_dist == self.p_dropout == 0.0

    @property
    def std_light_raw(self):
        return self.std_light * 0.5 * G_MAX

    def draw(self, rng, shape):
        """Noise draws for ``shape`` robot-steps, always in the same stream order."""
        shape = tuple(shape)
        light = rng.standard_normal(shape) * self.std_light_raw
        theta = rng.standard_normal(shape + (4,)) * self.std_theta
        dist = rng.standard_normal(shape + (4,)) * self.std_dist
        drop = rng.random(shape + (4,))
        return light, theta, dist, drop


@dataclass
class SensorReading:
    light: float
    distances: np.ndarray
    headings: np.ndarray

    @classmethod
    def from_raw(cls, raw):
        raw = np.asarray(raw, dtype=np.float64)
        return cls(float(raw[0]), raw[1::2].copy(), raw[2::2].copy())

    def as_raw(self):
        raw = np.empty(9)
        raw[0] = self.light
        raw[1::2] = self.distances
        raw[2::2] = self.headings
        return raw


@dataclass
class World:
    field: ScalarField
    pos: np.ndarray
    heading: np.ndarray
    rng: np.random.Generator = None
    dt: float = DT
    t: int = 0
    max_speed: float = MAX_SPEED
    wheel_base: float = WHEEL_BASE
    body_radius: float = BODY_RADIUS
    collisions: bool = True
    sensing_range: float = SENSING_RANGE

    def __post_init__(self):
        self.pos = np.ascontiguousarray(self.pos, dtype=np.float64).reshape(-1, 2)
        self.heading = np.ascontiguousarray(self.heading, dtype=np.float64).reshape(-1)
        if self.heading.shape[0] != self.pos.shape[0]:
            raise ValueError("positions and headings disagree on the number of robots")
        self.heading[:] = [_kernels.wrap_angle(h) for h in self.heading]

    @classmethod
    def from_poses(cls, field, poses, **kwargs):
        pos = np.array([[p.x, p.y] for p in poses], dtype=np.float64)
        heading = np.array([p.heading for p in poses], dtype=np.float64)
        return cls(field, pos, heading, **kwargs)

    @property
    def n_robots(self):
        return self.pos.shape[0]

    @property
    def time(self):
        return self.t * self.dt

    @property
    def poses(self):
        return [RobotPose(float(x), float(y), float(h))
                for (x, y), h in zip(self.pos, self.heading)]

    def field_codes(self):
        return self.field.codes(after_switch=self.time >= self.field.switch_time)

    def phys_array(self, noise):
        return np.array([self.max_speed, self.wheel_base, self.dt, self.field.half,
                         self.body_radius, float(self.collisions), self.sensing_range,
                         noise.p_dropout], dtype=np.float64)

    def true_light(self):
        kind, params = self.field_codes()
        return np.array([_kernels.field_value(kind, params, x, y) for x, y in self.pos])


def spawn_swarm(n, field, rng, r_spawn=12.0, box=3.0, min_separation=2 * BODY_RADIUS,
                max_attempts=1000):
    """Place ``n`` robots in a ``box`` x ``box`` square around a random point
    on the circle of radius ``r_spawn`` about the field centre.
    """
    if n < 1:
        raise ValueError("swarm size must be at least 1")
    if r_spawn + box / 2 > field.half:
        raise ValueError("spawn box does not fit in the arena")
    angle = rng.uniform(0.0, 2 * math.pi)
    cx = field.centre[0] + r_spawn * math.cos(angle)
    cy = field.centre[1] + r_spawn * math.sin(angle)
    placed = np.empty((n, 2))
    for k in range(n):
        for _ in range(max_attempts):
            p = (cx + rng.uniform(-box / 2, box / 2), cy + rng.uniform(-box / 2, box / 2))
            if k == 0 or np.min(np.hypot(placed[:k, 0] - p[0], placed[:k, 1] - p[1])) >= min_separation:
                placed[k] = p
                break
        else:
            raise RuntimeError(f"could not place {n} robots without overlap in a {box} m box")
    headings = rng.uniform(-math.pi, math.pi, n)
    return [RobotPose(float(x), float(y), float(h)) for (x, y), h in zip(placed, headings)]


def sense(world, robot_index, noise, rng=None):
    """Noisy reading for one robot; uses ``world.rng`` when ``rng`` is omitted."""
    if not 0 <= robot_index < world.n_robots:
        raise IndexError(f"robot index {robot_index} out of range")
    rng = world.rng if rng is None else rng
    if rng is None and noise.silent:
        light_n, theta_n, dist_n, drop = 0.0, np.zeros(4), np.zeros(4), np.ones(4)
    elif rng is None:
        raise ValueError("noisy sensing needs a random stream (world.rng or rng)")
    else:
        light_n, theta_n, dist_n, drop = noise.draw(rng, ())
    kind, params = world.field_codes()
    raw = np.empty(9)
    _kernels.sense_raw(robot_index, world.pos, world.heading, kind, params,
                       world.sensing_range, float(light_n), theta_n, dist_n, drop,
                       noise.p_dropout, raw)
    return SensorReading.from_raw(raw)


def rescale(reading):
    """Affine map of a raw reading onto [-1, 1]^9 (light, then d/theta per quadrant)."""
    raw = reading.as_raw() if isinstance(reading, SensorReading) else np.asarray(reading, float)
    out = np.empty(9)
    _kernels.rescale_into(raw, out)
    return out


def step_kinematics(world, commands):
    """Advance every robot one ``dt`` from per-wheel commands in [-1, 1]."""
    cmds = np.ascontiguousarray(commands, dtype=np.float64).reshape(-1, 2)
    if cmds.shape[0] != world.n_robots:
        raise ValueError(f"expected {world.n_robots} command pairs, got {cmds.shape[0]}")
    _kernels.integrate(world.pos, world.heading, cmds, world.max_speed, world.wheel_base,
                       world.dt, world.field.half, world.body_radius, world.collisions)
    world.t += 1
    return world


def write_trajectory_csv(path, poses, light, dt=DT):
    """Rows of (t, robot_id, x, y, heading, light_raw) from a pose log.

    ``poses`` has shape (steps, robots, 3); ``light`` holds the true field
    value under each robot at each logged step.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "robot_id", "x", "y", "heading", "light_raw"])
        for k in range(poses.shape[0]):
            for r in range(poses.shape[1]):
                x, y, h = poses[k, r]
                writer.writerow([f"{k * dt:.2f}", r, f"{x:.6f}", f"{y:.6f}", f"{h:.6f}",
                                 f"{light[k, r]:.4f}"])


__all__ = ["RobotPose", "ScalarField", "NoiseModel", "SensorReading", "World", "make_field",
           "spawn_swarm", "sense", "rescale", "step_kinematics", "write_trajectory_csv",
           "G_MAX", "NO_NEIGHBOUR_DIST", "MAX_SPEED", "DT"]
