"""Hot simulation kernels: restart-diffusion walks with occupation binning.

Two interchangeable engines implement the same algorithm:

* a numba ``@njit`` kernel looping path-by-path (the default), and
* a vectorised pure-numpy fallback, selected by setting the environment
  variable ``JUMPSPECTRA_NUMBA=0`` (or automatically when numba is absent).

Both engines consume identical per-path splitmix64 streams, so each is
bitwise deterministic for a fixed seed.  Histogram accumulation is integer,
hence independent of accumulation order.  Trajectories may still differ
between engines by floating-point ULPs in the libm calls, which chaotic
dynamics amplify; cross-engine agreement is therefore statistical, not
bitwise.

Restart codes: 0 uniform disk, 1 radial-table rejection on the disk,
2 fixed point, 3 circle of radius r0, 4 uniform rectangle, 5 grid-table
rejection over the domain bounding box.  Domain codes: 0 unit disk,
1 rectangle (0,a) x (0,b).
"""

from __future__ import annotations

import math
import os

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_U53 = 2.0 ** -53

try:
    from numba import njit
    NUMBA_AVAILABLE = True
except ImportError:          # pragma: no cover - exercised via env flag instead
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap if not (args and callable(args[0])) else args[0]


def numba_enabled() -> bool:
    """True when the numba engine is active (env flag and availability)."""
    if os.environ.get("JUMPSPECTRA_NUMBA", "1").lower() in ("0", "false", "no"):
        return False
    return NUMBA_AVAILABLE


def derive_seeds(seed: int, n_paths: int) -> np.ndarray:
    """Independent splitmix64 stream states, one per path."""
    root = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    idx = np.arange(1, n_paths + 1, dtype=np.uint64)
    s = root + idx * _GOLDEN
    z = (s ^ (s >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


# ---------------------------------------------------------------------------
# numba engine
# ---------------------------------------------------------------------------

@njit(cache=True)
def _nb_next(state):
    s = state + _GOLDEN
    z = (s ^ (s >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return s, z ^ (z >> _S31)


@njit(cache=True)
def _nb_uniform(state):
    state, z = _nb_next(state)
    return state, float((z >> _S11) + _ONE) * _U53


@njit(cache=True)
def _nb_normals(state):
    state, u1 = _nb_uniform(state)
    state, u2 = _nb_uniform(state)
    r = math.sqrt(-2.0 * math.log(u1))
    return state, r * math.cos(2.0 * math.pi * u2), r * math.sin(2.0 * math.pi * u2)


@njit(cache=True)
def _nb_table(table, t):
    # linear interpolation of a [0,1]-gridded table
    pos = t * (table.size - 1)
    i = int(pos)
    if i >= table.size - 1:
        return table[table.size - 1]
    frac = pos - i
    return table[i] * (1.0 - frac) + table[i + 1] * frac


@njit(cache=True)
def _nb_grid(table2d, fx, fy):
    nx, ny = table2d.shape
    px = fx * (nx - 1)
    py = fy * (ny - 1)
    i = min(int(px), nx - 2)
    j = min(int(py), ny - 2)
    tx = px - i
    ty = py - j
    return (table2d[i, j] * (1 - tx) * (1 - ty) + table2d[i + 1, j] * tx * (1 - ty)
            + table2d[i, j + 1] * (1 - tx) * ty + table2d[i + 1, j + 1] * tx * ty)


@njit(cache=True)
def _nb_restart(state, restart_code, r0, r1, domain_code, d0, d1,
                radial_table, grid_table, btol, stats):
    # returns (state, x, y); loops until the point clears the boundary band
    while True:
        if restart_code == 0:
            state, u1 = _nb_uniform(state)
            state, u2 = _nb_uniform(state)
            rr = math.sqrt(u1)
            x = rr * math.cos(2.0 * math.pi * u2)
            y = rr * math.sin(2.0 * math.pi * u2)
        elif restart_code == 1:
            while True:
                state, u1 = _nb_uniform(state)
                state, u2 = _nb_uniform(state)
                state, u3 = _nb_uniform(state)
                rr = math.sqrt(u1)
                stats[1] += 1
                if u3 <= _nb_table(radial_table, rr):
                    stats[2] += 1
                    break
            x = rr * math.cos(2.0 * math.pi * u2)
            y = rr * math.sin(2.0 * math.pi * u2)
        elif restart_code == 2:
            x = r0
            y = r1
        elif restart_code == 3:
            state, u1 = _nb_uniform(state)
            x = r0 * math.cos(2.0 * math.pi * u1)
            y = r0 * math.sin(2.0 * math.pi * u1)
        elif restart_code == 4:
            state, u1 = _nb_uniform(state)
            state, u2 = _nb_uniform(state)
            x = d0 * u1
            y = d1 * u2
        else:
            while True:
                state, u1 = _nb_uniform(state)
                state, u2 = _nb_uniform(state)
                state, u3 = _nb_uniform(state)
                stats[1] += 1
                if domain_code == 0:
                    rr = math.sqrt(u1)
                    x = rr * math.cos(2.0 * math.pi * u2)
                    y = rr * math.sin(2.0 * math.pi * u2)
                    fx = 0.5 * (x + 1.0)
                    fy = 0.5 * (y + 1.0)
                else:
                    x = d0 * u1
                    y = d1 * u2
                    fx = u1
                    fy = u2
                if u3 <= _nb_grid(grid_table, fx, fy):
                    stats[2] += 1
                    break
        if domain_code == 0:
            if x * x + y * y < (1.0 - btol) * (1.0 - btol):
                return state, x, y
        else:
            if btol < x < d0 - btol and btol < y < d1 - btol:
                return state, x, y


@njit(cache=True)
def _nb_walk(seeds, n_steps, dt, btol, domain_code, d0, d1,
             restart_code, r0, r1, radial_table, grid_table,
             hist, hist_nx, hist_ny, restart_buf, stats):
    step = math.sqrt(2.0 * dt)
    cap = restart_buf.shape[0]
    for p in range(seeds.size):
        state = seeds[p]
        state, x, y = _nb_restart(state, restart_code, r0, r1, domain_code,
                                  d0, d1, radial_table, grid_table, btol, stats)
        for _ in range(n_steps):
            state, z0, z1 = _nb_normals(state)
            xn = x + step * z0
            yn = y + step * z1
            if domain_code == 0:
                exited = xn * xn + yn * yn >= (1.0 - btol) * (1.0 - btol)
            else:
                exited = not (btol < xn < d0 - btol and btol < yn < d1 - btol)
            if exited:
                bx, by = x, y
            else:
                bx, by = 0.5 * (x + xn), 0.5 * (y + yn)
            if domain_code == 0:
                rr = math.sqrt(bx * bx + by * by)
                ib = int(rr * hist_nx)
                if ib >= hist_nx:
                    ib = hist_nx - 1
                hist[ib] += 1
            else:
                ix = int(bx / d0 * hist_nx)
                iy = int(by / d1 * hist_ny)
                if ix >= hist_nx:
                    ix = hist_nx - 1
                if iy >= hist_ny:
                    iy = hist_ny - 1
                hist[ix * hist_ny + iy] += 1
            if exited:
                state, x, y = _nb_restart(state, restart_code, r0, r1,
                                          domain_code, d0, d1, radial_table,
                                          grid_table, btol, stats)
                if stats[0] < cap:
                    restart_buf[stats[0], 0] = x
                    restart_buf[stats[0], 1] = y
                stats[0] += 1
            else:
                x, y = xn, yn


# ---------------------------------------------------------------------------
# numpy fallback engine
# ---------------------------------------------------------------------------

def _np_uniform(state, mask):
    state[mask] += _GOLDEN
    z = state[mask]
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    z = z ^ (z >> _S31)
    return ((z >> _S11) + _ONE).astype(np.float64) * _U53


def _np_normals(state, mask):
    u1 = _np_uniform(state, mask)
    u2 = _np_uniform(state, mask)
    r = np.sqrt(-2.0 * np.log(u1))
    return r * np.cos(2.0 * math.pi * u2), r * np.sin(2.0 * math.pi * u2)


def _np_grid(table2d, fx, fy):
    nx, ny = table2d.shape
    px = fx * (nx - 1)
    py = fy * (ny - 1)
    i = np.minimum(px.astype(int), nx - 2)
    j = np.minimum(py.astype(int), ny - 2)
    tx = px - i
    ty = py - j
    return (table2d[i, j] * (1 - tx) * (1 - ty) + table2d[i + 1, j] * tx * (1 - ty)
            + table2d[i, j + 1] * (1 - tx) * ty + table2d[i + 1, j + 1] * tx * ty)


def _np_restart(state, mask, restart_code, r0, r1, domain_code, d0, d1,
                radial_table, grid_table, btol, stats, x, y):
    pending = mask.copy()
    while np.any(pending):
        idx = np.nonzero(pending)[0]
        if restart_code == 0:
            u1 = _np_uniform(state, idx)
            u2 = _np_uniform(state, idx)
            rr = np.sqrt(u1)
            px = rr * np.cos(2.0 * math.pi * u2)
            py = rr * np.sin(2.0 * math.pi * u2)
            placed = np.ones(idx.size, dtype=bool)
        elif restart_code == 1:
            u1 = _np_uniform(state, idx)
            u2 = _np_uniform(state, idx)
            u3 = _np_uniform(state, idx)
            rr = np.sqrt(u1)
            pos = rr * (radial_table.size - 1)
            i = np.minimum(pos.astype(int), radial_table.size - 2)
            frac = pos - i
            ratio = radial_table[i] * (1 - frac) + radial_table[i + 1] * frac
            stats[1] += idx.size
            placed = u3 <= ratio
            stats[2] += int(np.sum(placed))
            px = rr * np.cos(2.0 * math.pi * u2)
            py = rr * np.sin(2.0 * math.pi * u2)
        elif restart_code == 2:
            px = np.full(idx.size, r0)
            py = np.full(idx.size, r1)
            placed = np.ones(idx.size, dtype=bool)
        elif restart_code == 3:
            u1 = _np_uniform(state, idx)
            px = r0 * np.cos(2.0 * math.pi * u1)
            py = r0 * np.sin(2.0 * math.pi * u1)
            placed = np.ones(idx.size, dtype=bool)
        elif restart_code == 4:
            u1 = _np_uniform(state, idx)
            u2 = _np_uniform(state, idx)
            px = d0 * u1
            py = d1 * u2
            placed = np.ones(idx.size, dtype=bool)
        else:
            u1 = _np_uniform(state, idx)
            u2 = _np_uniform(state, idx)
            u3 = _np_uniform(state, idx)
            if domain_code == 0:
                rr = np.sqrt(u1)
                px = rr * np.cos(2.0 * math.pi * u2)
                py = rr * np.sin(2.0 * math.pi * u2)
                fx = 0.5 * (px + 1.0)
                fy = 0.5 * (py + 1.0)
            else:
                px = d0 * u1
                py = d1 * u2
                fx = u1
                fy = u2
            stats[1] += idx.size
            placed = u3 <= _np_grid(grid_table, fx, fy)
            stats[2] += int(np.sum(placed))
        if domain_code == 0:
            inside = px * px + py * py < (1.0 - btol) ** 2
        else:
            inside = ((btol < px) & (px < d0 - btol)
                      & (btol < py) & (py < d1 - btol))
        ok = placed & inside
        done = idx[ok]
        x[done] = px[ok]
        y[done] = py[ok]
        pending[done] = False


def _np_walk(seeds, n_steps, dt, btol, domain_code, d0, d1,
             restart_code, r0, r1, radial_table, grid_table,
             hist, hist_nx, hist_ny, restart_buf, stats):
    step = math.sqrt(2.0 * dt)
    n_paths = seeds.size
    state = seeds.copy()
    x = np.empty(n_paths)
    y = np.empty(n_paths)
    _np_restart(state, np.ones(n_paths, dtype=bool), restart_code, r0, r1,
                domain_code, d0, d1, radial_table, grid_table, btol, stats, x, y)
    cap = restart_buf.shape[0]
    for _ in range(n_steps):
        z0, z1 = _np_normals(state, np.arange(n_paths))
        xn = x + step * z0
        yn = y + step * z1
        if domain_code == 0:
            exited = xn * xn + yn * yn >= (1.0 - btol) ** 2
        else:
            exited = ~((btol < xn) & (xn < d0 - btol)
                       & (btol < yn) & (yn < d1 - btol))
        bx = np.where(exited, x, 0.5 * (x + xn))
        by = np.where(exited, y, 0.5 * (y + yn))
        if domain_code == 0:
            ib = np.minimum((np.hypot(bx, by) * hist_nx).astype(int), hist_nx - 1)
        else:
            ix = np.minimum((bx / d0 * hist_nx).astype(int), hist_nx - 1)
            iy = np.minimum((by / d1 * hist_ny).astype(int), hist_ny - 1)
            ib = ix * hist_ny + iy
        np.add.at(hist, ib, 1)
        x = np.where(exited, x, xn)
        y = np.where(exited, y, yn)
        if np.any(exited):
            _np_restart(state, exited, restart_code, r0, r1, domain_code,
                        d0, d1, radial_table, grid_table, btol, stats, x, y)
            new = np.nonzero(exited)[0]
            for p in new:
                if stats[0] < cap:
                    restart_buf[stats[0], 0] = x[p]
                    restart_buf[stats[0], 1] = y[p]
                stats[0] += 1


def run_walk(seeds, n_steps, dt, btol, domain_code, d0, d1,
             restart_code, r0, r1, radial_table, grid_table,
             hist_nx, hist_ny, restart_cap, force_numpy=False):
    """Dispatch to the active engine; returns (hist, restart_buf, stats)."""
    hist = np.zeros(hist_nx * hist_ny, dtype=np.int64)
    restart_buf = np.zeros((restart_cap, 2))
    stats = np.zeros(4, dtype=np.int64)
    args = (seeds, n_steps, dt, btol, domain_code, d0, d1, restart_code,
            r0, r1, radial_table, grid_table, hist, hist_nx, hist_ny,
            restart_buf, stats)
    if numba_enabled() and not force_numpy:
        _nb_walk(*args)
        stats[3] = 1
    else:
        _np_walk(*args)
        stats[3] = 0
    return hist, restart_buf, stats
