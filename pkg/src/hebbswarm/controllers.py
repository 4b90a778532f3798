"""Swarm controller conditions sharing one ``act`` interface.

Each controller owns per-robot buffers laid out for the compiled trial loop,
so ``act`` (one robot, one step) and a full simulated trial mutate exactly
the same state.
"""
from __future__ import annotations

import numpy as np

from . import _kernels
from .plastic_net import (Architecture, RuleSet, WeightState, init_weights,
                          unflatten_rules, unflatten_weights)
from .swarm_sim import G_MAX

DEFAULT_ARCH = Architecture((9, 9, 9, 2))
RECURRENT_ARCH = Architecture((11, 9, 2))
KINDS = ("hebbian", "baseline", "baseline_a", "hebbian_single", "recurrent")

# light thresholds (strictly above) and the matching probability of the green network
GREEN_THRESHOLDS = np.array([229.0, 178.0, 127.0])
GREEN_PROBS = np.array([1.0, 0.75, 0.50, 0.25])


def p_green(light, thresholds=GREEN_THRESHOLDS, probs=GREEN_PROBS):
    return float(_kernels.p_green(float(light), thresholds, probs))


class Controller:
    """Base class; subclasses fill ``weights`` (or ``bank``) and flags."""

    mode = 0
    plastic = False
    recurrent = False

    def __init__(self, arch, n_robots):
        if n_robots < 1:
            raise ValueError("a controller needs at least one robot")
        self.arch = arch
        self.n_robots = int(n_robots)
        self.sizes = arch.sizes_array()
        self.acts = np.zeros((self.n_robots, arch.n_neurons))
        self.prev_out = np.zeros((self.n_robots, arch.n_outputs))
        self.weights = np.zeros((self.n_robots, arch.n_weights))
        self.bank = np.zeros((2, arch.n_weights))
        self.assign = np.zeros(self.n_robots, dtype=np.int64)
        self.rules = np.zeros((arch.n_weights, 4))
        self.learning_rate = 0.0
        self.switch_every = 1
        self._steps = np.zeros(self.n_robots, dtype=np.int64)

    @property
    def n_sensor_inputs(self):
        return self.arch.n_inputs - (self.arch.n_outputs if self.recurrent else 0)

    def _check_index(self, robot_index):
        if not 0 <= robot_index < self.n_robots:
            raise IndexError(f"robot index {robot_index} out of range for {self.n_robots} robots")

    def _select(self, robot_index, s_in):
        return self.weights[robot_index]

    def act(self, robot_index, s_in):
        """Wheel commands for one robot from its rescaled sensor vector."""
        self._check_index(robot_index)
        s_in = np.asarray(s_in, dtype=np.float64)
        buf = self.acts[robot_index]
        if s_in.shape == (self.n_sensor_inputs,):
            buf[:self.n_sensor_inputs] = s_in
            if self.recurrent:
                buf[self.n_sensor_inputs:self.arch.n_inputs] = self.prev_out[robot_index]
        elif s_in.shape == (self.arch.n_inputs,):
            buf[:self.arch.n_inputs] = s_in
        else:
            raise ValueError(f"expected {self.n_sensor_inputs} sensor inputs, got {s_in.shape}")
        w = self._select(robot_index, s_in)
        _kernels.forward_into(w, self.sizes, buf)
        if self.plastic:
            _kernels.hebbian_into(w, self.rules, self.learning_rate, self.sizes, buf)
        out = buf[-self.arch.n_outputs:].copy()
        if self.recurrent:
            self.prev_out[robot_index] = out
        self._steps[robot_index] += 1
        return out

    def robot_weights(self):
        """(n_robots, n_weights) array of the weights each robot currently expresses."""
        if self.mode == 2:
            return self.bank[self.assign].copy()
        return self.weights.copy()

    def robot_net(self, robot_index):
        self._check_index(robot_index)
        return WeightState(self.arch, self.robot_weights()[robot_index])

    def snapshot(self):
        return {"kind": type(self).__name__, "layer_sizes": list(self.arch.layer_sizes),
                "weights": self.robot_weights().tolist(), "assignment": self.assign.tolist()}


class HebbianController(Controller):
    """Shared ABCD rules, one independently initialised network per robot."""

    plastic = True

    def __init__(self, rules, nets):
        super().__init__(rules.arch, len(nets))
        for r, net in enumerate(nets):
            if net.arch != rules.arch:
                raise ValueError("every network must match the rule architecture")
            self.weights[r] = net.values
        self.rules = rules.abcd.copy()
        self.learning_rate = float(rules.learning_rate)

    @property
    def rule_set(self):
        return RuleSet(self.arch, self.rules.copy(), self.learning_rate)


class HomogeneousController(Controller):
    """The same fixed network copied to every robot."""

    def __init__(self, weights, n_robots):
        super().__init__(weights.arch, n_robots)
        self.weights[:] = weights.values


class RecurrentController(HomogeneousController):
    """Homogeneous network whose previous outputs are appended to its inputs."""

    recurrent = True


class BaselineAController(Controller):
    """Two co-evolved networks; each robot picks one from its light reading."""

    mode = 2

    def __init__(self, green, red, n_robots, rng, switch_every=1,
                 thresholds=GREEN_THRESHOLDS, probs=GREEN_PROBS):
        if green.arch != red.arch:
            raise ValueError("green and red networks must share an architecture")
        super().__init__(green.arch, n_robots)
        self.bank[0] = green.values
        self.bank[1] = red.values
        split = np.arange(self.n_robots) % 2
        self.assign[:] = rng.permutation(split)
        self.rng = rng
        self.switch_every = int(switch_every)
        if self.switch_every < 1:
            raise ValueError("switch cadence must be at least one step")
        self.thresholds = np.asarray(thresholds, dtype=np.float64)
        self.probs = np.asarray(probs, dtype=np.float64)

    def choose(self, light, u):
        """0 (green) when ``u`` falls below the green probability at ``light``."""
        return 0 if u < _kernels.p_green(float(light), self.thresholds, self.probs) else 1

    def _select(self, robot_index, s_in):
        if self._steps[robot_index] % self.switch_every == 0:
            light = (s_in[0] + 1.0) * 0.5 * G_MAX
            self.assign[robot_index] = self.choose(light, self.rng.random())
        return self.bank[self.assign[robot_index]]


def genotype_length(kind, arch=None):
    if kind not in KINDS:
        raise ValueError(f"unknown controller kind {kind!r}; expected one of {KINDS}")
    if kind == "recurrent":
        arch = arch or RECURRENT_ARCH
    arch = arch or DEFAULT_ARCH
    n = arch.n_weights
    return {"hebbian": 4 * n, "hebbian_single": 4 * n, "baseline": n,
            "baseline_a": 2 * n, "recurrent": n}[kind]


def make_variant(kind, genotype, n_robots, rng, arch=None, switch_every=1,
                 shared_init=False):
    """Build a ready-to-run controller for ``n_robots`` robots.

    ``rng`` draws the random initial networks (Hebbian kinds) or the initial
    sub-group split (``baseline_a``). ``shared_init`` gives every Hebbian
    robot the same initial network.
    """
    expected = genotype_length(kind, arch)
    g = np.asarray(genotype, dtype=np.float64).ravel()
    if g.shape[0] != expected:
        raise ValueError(f"{kind} genotype must have length {expected}, got {g.shape[0]}")
    if kind == "recurrent":
        arch = arch or RECURRENT_ARCH
        return RecurrentController(unflatten_weights(g, arch), n_robots)
    arch = arch or DEFAULT_ARCH
    if kind in ("hebbian", "hebbian_single"):
        rules = unflatten_rules(g, arch)
        if shared_init:
            net = init_weights(arch, rng)
            nets = [net.copy() for _ in range(n_robots)]
        else:
            nets = [init_weights(arch, rng) for _ in range(n_robots)]
        return HebbianController(rules, nets)
    if kind == "baseline":
        return HomogeneousController(unflatten_weights(g, arch), n_robots)
    n = arch.n_weights
    return BaselineAController(unflatten_weights(g[:n], arch), unflatten_weights(g[n:], arch),
                               n_robots, rng, switch_every=switch_every)
