"""Feed-forward tanh networks with per-weight ABCD Hebbian plasticity.

Networks carry no biases. Weights of one network are kept as a single flat
float64 vector ordered layer-major, then row-major over the ``(post, pre)``
matrix of each layer transition; ``WeightState.matrices`` exposes views.
Rule genotypes interleave the four coefficients per weight (A, B, C, D)
in that same weight order.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels

RULE_BOUND = 5.0
LEARNING_RATE = 0.1


@dataclass(frozen=True)
class Architecture:
    layer_sizes: tuple[int, ...] = (9, 9, 9, 2)
    activation: str = "tanh"

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2:
            raise ValueError("an architecture needs at least an input and an output layer")
        if any(s < 1 for s in sizes):
            raise ValueError(f"layer sizes must be positive, got {sizes}")
        if self.activation != "tanh":
            raise ValueError(f"unsupported activation {self.activation!r}")
        object.__setattr__(self, "layer_sizes", sizes)

    @classmethod
    def grid(cls, depth, width, n_in=9, n_out=2):
        """Architecture with ``depth`` hidden layers of ``width`` units."""
        return cls((n_in,) + (width,) * depth + (n_out,))

    @property
    def shapes(self):
        s = self.layer_sizes
        return [(s[k + 1], s[k]) for k in range(len(s) - 1)]

    @property
    def n_weights(self):
        return sum(a * b for a, b in self.shapes)

    @property
    def n_neurons(self):
        return sum(self.layer_sizes)

    @property
    def n_inputs(self):
        return self.layer_sizes[0]

    @property
    def n_outputs(self):
        return self.layer_sizes[-1]

    def sizes_array(self):
        return np.asarray(self.layer_sizes, dtype=np.int64)


@dataclass
class WeightState:
    arch: Architecture
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != (self.arch.n_weights,):
            raise ValueError(
                f"expected {self.arch.n_weights} weights, got shape {self.values.shape}")

    @classmethod
    def from_matrices(cls, arch, matrices):
        if [np.shape(m) for m in matrices] != arch.shapes:
            raise ValueError(f"matrix shapes do not match {arch.shapes}")
        return cls(arch, np.concatenate([np.ravel(m) for m in matrices]))

    @property
    def matrices(self):
        out, off = [], 0
        for rows, cols in self.arch.shapes:
            out.append(self.values[off:off + rows * cols].reshape(rows, cols))
            off += rows * cols
        return out

    def copy(self):
        return WeightState(self.arch, self.values.copy())

    def to_csv(self, path):
        """One row per weight: layer, row, col, value."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["layer", "row", "col", "value"])
            for layer, mat in enumerate(self.matrices):
                for (r, c), v in np.ndenumerate(mat):
                    writer.writerow([layer, r, c, repr(float(v))])

    @classmethod
    def from_csv(cls, path, arch):
        values = np.zeros(arch.n_weights)
        offsets = np.cumsum([0] + [a * b for a, b in arch.shapes])
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                layer, r, c = int(row["layer"]), int(row["row"]), int(row["col"])
                cols = arch.shapes[layer][1]
                values[offsets[layer] + r * cols + c] = float(row["value"])
        return cls(arch, values)


@dataclass
class RuleSet:
    arch: Architecture
    abcd: np.ndarray
    learning_rate: float = LEARNING_RATE

    def __post_init__(self):
        self.abcd = np.ascontiguousarray(self.abcd, dtype=np.float64)
        if self.abcd.shape != (self.arch.n_weights, 4):
            raise ValueError(
                f"expected rules of shape ({self.arch.n_weights}, 4), got {self.abcd.shape}")
        if not self.learning_rate > 0:
            raise ValueError("learning rate must be positive")

    @classmethod
    def zeros(cls, arch):
        return cls(arch, np.zeros((arch.n_weights, 4)))

    A = property(lambda self: self.abcd[:, 0])
    B = property(lambda self: self.abcd[:, 1])
    C = property(lambda self: self.abcd[:, 2])
    D = property(lambda self: self.abcd[:, 3])


@dataclass
class ActivationTrace:
    """Post-activation values of every layer; entry 0 is the network input."""
    layers: list = field(default_factory=list)

    @classmethod
    def from_buffer(cls, arch, buf):
        offs = np.cumsum((0,) + arch.layer_sizes)
        return cls([buf[offs[k]:offs[k + 1]].copy() for k in range(len(arch.layer_sizes))])

    def to_buffer(self):
        return np.concatenate(self.layers).astype(np.float64)


def init_weights(arch, rng):
    """Independent U[-1, 1] draw for every weight."""
    return WeightState(arch, rng.uniform(-1.0, 1.0, arch.n_weights))


def forward(net, x):
    """Run the network on one input vector, returning (output, trace)."""
    arch = net.arch
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (arch.n_inputs,):
        raise ValueError(f"input must have shape ({arch.n_inputs},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains non-finite values")
    buf = np.zeros(arch.n_neurons)
    buf[:arch.n_inputs] = x
    _kernels.forward_into(net.values, arch.sizes_array(), buf)
    trace = ActivationTrace.from_buffer(arch, buf)
    return trace.layers[-1].copy(), trace


def hebbian_update(net, rules, trace, inplace=False):
    """Apply one ABCD step, ``w += mu * (A*ni*nj + B*ni + C*nj + D)``.

    ``ni`` is the activity of the pre-synaptic unit (earlier layer) and
    ``nj`` the post-synaptic one. No normalisation, no clipping.
    """
    arch = net.arch
    if rules.arch != arch:
        raise ValueError("rule set and network have different architectures")
    if [len(a) for a in trace.layers] != list(arch.layer_sizes):
        raise ValueError("activation trace does not match the architecture")
    target = net if inplace else net.copy()
    _kernels.hebbian_into(target.values, rules.abcd, float(rules.learning_rate),
                          arch.sizes_array(), trace.to_buffer())
    return target


def flatten_rules(rules):
    return rules.abcd.ravel().copy()


def unflatten_rules(genotype, arch, bound=RULE_BOUND, learning_rate=LEARNING_RATE):
    """Decode a ``4 * n_weights`` genotype, clamping every coefficient to [-bound, bound]."""
    g = np.asarray(genotype, dtype=np.float64).ravel()
    if g.shape[0] != 4 * arch.n_weights:
        raise ValueError(f"rule genotype must have length {4 * arch.n_weights}, got {g.shape[0]}")
    return RuleSet(arch, np.clip(g, -bound, bound).reshape(arch.n_weights, 4), learning_rate)


def flatten_weights(net):
    return net.values.copy()


def unflatten_weights(genotype, arch):
    g = np.asarray(genotype, dtype=np.float64).ravel()
    if g.shape[0] != arch.n_weights:
        raise ValueError(f"weight genotype must have length {arch.n_weights}, got {g.shape[0]}")
    return WeightState(arch, g.copy())


def save_genotype(path, genotype):
    Path(path).write_text(json.dumps([float(v) for v in np.ravel(genotype)]))


def load_genotype(path):
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = data["best_genotype"]
    return np.asarray(data, dtype=np.float64)
