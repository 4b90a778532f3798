"""Input checks shared by the estimator and the CLI."""
import numpy as np
from sklearn.utils.validation import check_array

from .controllers import genotype_length


def check_genotype(genotype, kind, arch=None):
    """Finite 1-D float genotype of the length ``kind`` requires."""
    g = check_array(np.asarray(genotype, dtype=np.float64).reshape(1, -1),
                    ensure_all_finite=True).ravel()
    expected = genotype_length(kind, arch)
    if g.shape[0] != expected:
        raise ValueError(f"{kind} genotype must have length {expected}, got {g.shape[0]}")
    return g


def check_sensor_inputs(X, n_inputs=9):
    """2-D batch of rescaled sensor vectors, each component in [-1, 1]."""
    X = check_array(X, dtype=np.float64, ensure_all_finite=True)
    if X.shape[1] != n_inputs:
        raise ValueError(f"expected {n_inputs} sensor inputs per row, got {X.shape[1]}")
    if np.any(np.abs(X) > 1.0):
        raise ValueError("rescaled sensor inputs must lie in [-1, 1]")
    return X


def check_weight_log(weights):
    """(time, agents, weights) float array without gaps."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 3:
        raise ValueError(f"expected a (time, agents, weights) array, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weight log contains non-finite entries")
    return w
