"""Compiled inner loops shared by the Python API and the trial runner.

Everything here works on flat float64 buffers so that one code path serves
single-network calls (tests, ``Controller.act``) and the fused per-trial
loop. Weight layout is layer-major then row-major: for a transition with
``nin`` inputs and ``nout`` outputs, weight ``(j, i)`` (post ``j``, pre ``i``)
lives at ``offset + j * nin + i``.
"""
import math

import numpy as np
from numba import njit

CIRCULAR = 0
LINEAR = 1
BIMODAL = 2
ROSENBROCK = 3

G_MAX = 255.0
NO_NEIGHBOUR_DIST = 2.01
TWO_PI = 2.0 * math.pi
QUARTER_PI = 0.25 * math.pi


@njit(cache=True)
def wrap_angle(a):
    return (a + math.pi) % TWO_PI - math.pi


@njit(cache=True)
def field_value(kind, params, x, y):
    if kind == CIRCULAR:
        v = 1.0 - math.hypot(x - params[0], y - params[1]) / params[2]
    elif kind == LINEAR:
        v = (x - params[0]) / (params[1] - params[0])
    elif kind == BIMODAL:
        v1 = 1.0 - math.hypot(x - params[0], y - params[1]) / params[4]
        v2 = 1.0 - math.hypot(x - params[2], y - params[3]) / params[4]
        v = v1 if v1 > v2 else v2
    else:
        # params: scale, y_offset, a, b, f_max
        gx = x * params[0]
        gy = params[1] + y * params[0]
        f = (params[2] - gx) ** 2 + params[3] * (gy - gx * gx) ** 2
        v = 1.0 - f / params[4]
    if v <= 0.0:
        return 0.0
    if v >= 1.0:
        return G_MAX
    return G_MAX * v


@njit(cache=True)
def field_grid(kind, params, xs, ys):
    out = np.empty((ys.shape[0], xs.shape[0]))
    for r in range(ys.shape[0]):
        for c in range(xs.shape[0]):
            out[r, c] = field_value(kind, params, xs[c], ys[r])
    return out


@njit(cache=True)
def quadrant_of(bearing):
    """0 front, 1 left, 2 back, 3 right for a bearing in [-pi, pi)."""
    q = int(math.floor((bearing + QUARTER_PI) / (0.5 * math.pi)))
    return q % 4


@njit(cache=True)
def sense_raw(i, pos, heading, kind, params, sensing_range,
              light_noise, theta_noise, dist_noise, drop_u, p_drop, out):
    """Fill ``out`` (length 9) with the raw reading of robot ``i``.

    Layout: light, then (d, theta) for front, left, back, right. Noise draws
    are supplied by the caller; per-quadrant noise is only applied to actual
    detections. Returns the noiseless field value at the robot.
    """
    n = pos.shape[0]
    xi = pos[i, 0]
    yi = pos[i, 1]
    best = np.full(4, np.inf)
    bear = np.zeros(4)
    for k in range(n):
        if k == i:
            continue
        dx = pos[k, 0] - xi
        dy = pos[k, 1] - yi
        d = math.hypot(dx, dy)
        if d > sensing_range:
            continue
        b = wrap_angle(math.atan2(dy, dx) - heading[i])
        q = quadrant_of(b)
        if d < best[q]:
            best[q] = d
            bear[q] = b
    for q in range(4):
        if best[q] == np.inf or drop_u[q] < p_drop:
            out[1 + 2 * q] = NO_NEIGHBOUR_DIST
            out[2 + 2 * q] = 0.0
        else:
            d = best[q] + dist_noise[q]
            if d < 0.0:
                d = 0.0
            elif d > NO_NEIGHBOUR_DIST:
                d = NO_NEIGHBOUR_DIST
            out[1 + 2 * q] = d
            out[2 + 2 * q] = wrap_angle(bear[q] + theta_noise[q])
    true_light = field_value(kind, params, xi, yi)
    light = true_light + light_noise
    if light < 0.0:
        light = 0.0
    elif light > G_MAX:
        light = G_MAX
    out[0] = light
    return true_light


@njit(cache=True)
def rescale_into(raw, out):
    light = min(max(raw[0], 0.0), G_MAX)
    out[0] = light / (0.5 * G_MAX) - 1.0
    for q in range(4):
        d = min(max(raw[1 + 2 * q], 0.0), NO_NEIGHBOUR_DIST)
        th = min(max(raw[2 + 2 * q], -math.pi), math.pi)
        out[1 + 2 * q] = 2.0 * d / NO_NEIGHBOUR_DIST - 1.0
        out[2 + 2 * q] = th / math.pi


@njit(cache=True)
def forward_into(w, sizes, acts):
    """Propagate ``acts[:sizes[0]]`` through the net, tanh at every layer."""
    woff = 0
    aoff = 0
    for layer in range(sizes.shape[0] - 1):
        nin = sizes[layer]
        nout = sizes[layer + 1]
        for j in range(nout):
            s = 0.0
            base = woff + j * nin
            for i in range(nin):
                s += w[base + i] * acts[aoff + i]
            acts[aoff + nin + j] = math.tanh(s)
        woff += nin * nout
        aoff += nin


@njit(cache=True)
def hebbian_into(w, rules, mu, sizes, acts):
    """In-place ABCD update of every weight from recorded activations."""
    woff = 0
    aoff = 0
    for layer in range(sizes.shape[0] - 1):
        nin = sizes[layer]
        nout = sizes[layer + 1]
        for j in range(nout):
            nj = acts[aoff + nin + j]
            base = woff + j * nin
            for i in range(nin):
                ni = acts[aoff + i]
                k = base + i
                w[k] += mu * (rules[k, 0] * ni * nj + rules[k, 1] * ni
                              + rules[k, 2] * nj + rules[k, 3])
        woff += nin * nout
        aoff += nin


@njit(cache=True)
def p_green(light, thresholds, probs):
    for b in range(thresholds.shape[0]):
        if light > thresholds[b]:
            return probs[b]
    return probs[thresholds.shape[0]]


@njit(cache=True)
def integrate(pos, heading, cmds, max_speed, wheel_base, dt, half, radius,
              collisions):
    """Differential-drive Euler step with wall clamping and contact blocking.

    A robot whose new disc would overlap another robot keeps its old
    position (heading still turns), so displacement never exceeds
    ``max_speed * dt``.
    """
    n = pos.shape[0]
    old = pos.copy()
    moved = np.zeros(n, dtype=np.bool_)
    lim = half - radius
    for r in range(n):
        ul = min(max(cmds[r, 0], -1.0), 1.0)
        ur = min(max(cmds[r, 1], -1.0), 1.0)
        vl = ul * max_speed
        vr = ur * max_speed
        v = 0.5 * (vl + vr)
        om = (vr - vl) / wheel_base
        h = heading[r]
        nx = pos[r, 0] + v * math.cos(h) * dt
        ny = pos[r, 1] + v * math.sin(h) * dt
        nx = min(max(nx, -lim), lim)
        ny = min(max(ny, -lim), lim)
        heading[r] = wrap_angle(h + om * dt)
        if nx != pos[r, 0] or ny != pos[r, 1]:
            moved[r] = True
        pos[r, 0] = nx
        pos[r, 1] = ny
    if not collisions:
        return
    min_d2 = (2.0 * radius) ** 2
    changed = True
    while changed:
        changed = False
        for a in range(n):
            for b in range(a + 1, n):
                if not (moved[a] or moved[b]):
                    continue
                dx = pos[a, 0] - pos[b, 0]
                dy = pos[a, 1] - pos[b, 1]
                if dx * dx + dy * dy < min_d2:
                    if moved[a]:
                        pos[a, 0] = old[a, 0]
                        pos[a, 1] = old[a, 1]
                        moved[a] = False
                    if moved[b]:
                        pos[b, 0] = old[b, 0]
                        pos[b, 1] = old[b, 1]
                        moved[b] = False
                    changed = True


@njit(cache=True)
def run_chunk(t0, k0, n_steps, pos, heading,
              mode, weights, bank, assign, rules, mu, plastic, sizes,
              recurrent, prev_out, acts,
              kind_a, params_a, kind_b, params_b, switch_step,
              light_noise, theta_noise, dist_noise, drop_u, switch_u,
              phys, thresholds, probs, switch_every,
              light_out, pose_out, record_poses, wlog, weight_every,
              record_weights):
    """Advance a swarm ``n_steps`` control steps starting at global step t0.

    Logs are indexed from ``k0`` (the number of steps already logged).

    ``mode``: 0 per-robot networks (Hebbian, Baseline, recurrent), 2 two
    shared networks selected per robot through the light policy.
    ``phys``: max_speed, wheel_base, dt, half_arena, radius, collisions,
    sensing_range, p_dropout.
    """
    n = pos.shape[0]
    n_out = sizes[sizes.shape[0] - 1]
    out_off = acts.shape[1] - n_out
    raw = np.empty(9)
    scaled = np.empty(9)
    noisy_light = np.empty(n)
    cmds = np.empty((n, 2))
    for s in range(n_steps):
        t = t0 + s
        if t >= switch_step:
            kind = kind_b
            params = params_b
        else:
            kind = kind_a
            params = params_a
        # sense from the frozen state
        total = 0.0
        for r in range(n):
            total += sense_raw(r, pos, heading, kind, params, phys[6],
                               light_noise[s, r], theta_noise[s, r],
                               dist_noise[s, r], drop_u[s, r], phys[7], raw)
            noisy_light[r] = raw[0]
            rescale_into(raw, scaled)
            for k in range(9):
                acts[r, k] = scaled[k]
            if recurrent:
                for k in range(n_out):
                    acts[r, 9 + k] = prev_out[r, k]
        light_out[k0 + s] = total / n
        # act
        for r in range(n):
            if mode == 2:
                if t % switch_every == 0:
                    pg = p_green(noisy_light[r], thresholds, probs)
                    assign[r] = 0 if switch_u[s, r] < pg else 1
                wv = bank[assign[r]]
            else:
                wv = weights[r]
            forward_into(wv, sizes, acts[r])
            if plastic:
                hebbian_into(wv, rules, mu, sizes, acts[r])
            cmds[r, 0] = acts[r, out_off]
            cmds[r, 1] = acts[r, out_off + 1]
            if recurrent:
                for k in range(n_out):
                    prev_out[r, k] = acts[r, out_off + k]
        integrate(pos, heading, cmds, phys[0], phys[1], phys[2], phys[3],
                  phys[4], phys[5] > 0.5)
        if record_poses:
            for r in range(n):
                pose_out[k0 + s + 1, r, 0] = pos[r, 0]
                pose_out[k0 + s + 1, r, 1] = pos[r, 1]
                pose_out[k0 + s + 1, r, 2] = heading[r]
        if record_weights and (k0 + s + 1) % weight_every == 0:
            slot = (k0 + s + 1) // weight_every
            for r in range(n):
                if mode == 2:
                    wv = bank[assign[r]]
                else:
                    wv = weights[r]
                for k in range(wv.shape[0]):
                    wlog[slot, r, k] = wv[k]
