"""Fitness and weight-dynamics measures computed from trial logs."""
from __future__ import annotations

import csv

import numpy as np

from .swarm_sim import G_MAX


def _light_series(log):
    light = getattr(log, "light", log)
    light = np.asarray(light, dtype=np.float64)
    if light.ndim != 1 or light.size == 0:
        raise ValueError("fitness needs a non-empty 1-D series of swarm light values")
    return light


def fitness_trial(log, g_max=G_MAX):
    """Time-average of the swarm-mean light, normalised by ``g_max``."""
    light = _light_series(log)
    return float(light.sum() / (g_max * light.shape[0]))


def fitness_individual(f1, f2, f3):
    return float(np.median([f1, f2, f3]))


def _weight_series(weights):
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim == 2:
        w = w[:, None, :]
    if w.ndim != 3 or w.shape[0] == 0:
        raise ValueError("expected weights shaped (time, agents, weights)")
    if not np.all(np.isfinite(w)):
        raise ValueError("weight log contains missing or non-finite snapshots")
    return w


def mean_autocorrelation(weights, normalize=False, batch=256):
    """Raw autocorrelation ``sum_t w(t + tau) w(t)`` averaged over agents and weights.

    ``weights`` has shape (time, agents, weights); the sum runs over the valid
    overlap ``t = 0 .. T-1-tau``, returning lags ``0 .. T-1``. With
    ``normalize`` the curve is divided by its zero-lag value.
    """
    w = _weight_series(weights)
    n_t = w.shape[0]
    series = w.reshape(n_t, -1).T
    nfft = 1 << int(np.ceil(np.log2(2 * n_t - 1))) if n_t > 1 else 1
    power = np.zeros(nfft // 2 + 1)
    for start in range(0, series.shape[0], batch):
        spectrum = np.fft.rfft(series[start:start + batch], n=nfft, axis=1)
        power += np.sum(spectrum.real ** 2 + spectrum.imag ** 2, axis=0)
    acf = np.fft.irfft(power, n=nfft)[:n_t] / series.shape[0]
    if normalize:
        acf = acf / acf[0] if acf[0] != 0 else acf
    return acf


def mean_weight_std(snapshot):
    """Population STD across agents for each weight, averaged over weights."""
    s = np.asarray(snapshot, dtype=np.float64)
    if s.ndim != 2:
        raise ValueError("expected a snapshot shaped (agents, weights)")
    if s.shape[0] < 2:
        raise ValueError("heterogeneity needs at least two agents")
    # centring on one agent first keeps identical agents at exactly zero
    return float(np.mean(np.std(s - s[0], axis=0)))


def mean_weight_std_series(weights):
    w = _weight_series(weights)
    if w.shape[1] < 2:
        raise ValueError("heterogeneity needs at least two agents")
    return np.mean(np.std(w - w[:, :1], axis=1), axis=1)


def histogram_edges(snapshots, bins=50):
    """Bin edges spanning every snapshot, shared so histograms stay comparable."""
    lo = min(float(np.min(s)) for s in snapshots)
    hi = max(float(np.max(s)) for s in snapshots)
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    return np.linspace(lo, hi, bins + 1)


def weight_histogram(snapshot, bins=50):
    """Pooled histogram of all agents' weights; ``bins`` may be explicit edges."""
    values = np.asarray(snapshot, dtype=np.float64).ravel()
    if np.ndim(bins) == 0:
        edges = histogram_edges([values], int(bins))
    else:
        edges = np.asarray(bins, dtype=np.float64)
    counts, edges = np.histogram(np.clip(values, edges[0], edges[-1]), bins=edges)
    return edges, counts


def write_series_csv(path, header, *columns):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                             for v in row])


def write_histogram_csv(path, edges, counts):
    write_series_csv(path, ["bin_left", "bin_right", "count"], edges[:-1], edges[1:],
                     [int(c) for c in counts])
