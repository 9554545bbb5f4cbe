"""Parameter sweeps: correlation vs time, max over time, and temperature scans."""

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .optimize import golden_section_max
from .qcorrelations import concurrence_analytic_array, discord_analytic_array
from .spinmodel import OMEGA0_DEFAULT, PhysicalConstants, beta_from_temperature, check_beta

QUANTITIES = ("concurrence", "discord")
ABSCISSAS = ("time", "temperature")

PERIOD = 4.0 * math.pi / 3.0
N_TIME_GRID = 2000
TIME_TOL = 1e-10
VERTEX_STEP = 1e-5
CRITICAL_T_RESOLUTION = 1e-5  # kelvin
THREADS_ENV = "DIPOLAR_QCORR_THREADS"

# Fixed batch size keeps results independent of the worker count.
_BETA_CHUNK = 16


def worker_count():
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1


def quantity_function(quantity):
    """Vectorized ``f(beta, g, t)`` for the named correlation measure."""
    if quantity == "concurrence":
        return concurrence_analytic_array
    if quantity == "discord":
        return discord_analytic_array
    raise ValueError(f"quantity must be one of {QUANTITIES}, got {quantity!r}")


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep.

    ``start``/``stop`` are dimensionless times for time sweeps and kelvin
    for temperature sweeps. ``beta`` is only used by time sweeps.
    """

    quantity: str
    abscissa: str
    g: float
    start: float
    stop: float
    points: int
    beta: float = 0.0
    omega0: float = OMEGA0_DEFAULT

    def __post_init__(self):
        quantity_function(self.quantity)
        if self.abscissa not in ABSCISSAS:
            raise ValueError(f"abscissa must be one of {ABSCISSAS}, got {self.abscissa!r}")
        if int(self.points) != self.points or self.points < 2:
            raise ValueError(f"points must be an integer >= 2, got {self.points!r}")
        if not self.start < self.stop:
            raise ValueError(f"need start < stop, got {self.start!r} >= {self.stop!r}")
        if not math.isfinite(self.g) or self.g < 0:
            raise ValueError(f"g must be finite and >= 0, got {self.g!r}")
        if self.abscissa == "time":
            if self.start < 0:
                raise ValueError("time sweeps need start >= 0")
            check_beta(self.beta)
        elif self.start <= 0:
            raise ValueError("temperature sweeps need start > 0 K")

    def grid(self):
        return np.linspace(self.start, self.stop, int(self.points))


@dataclass
class SweepResult:
    """Records ``(abscissa, value, t_star)`` in ascending abscissa order.

    ``t_star`` is ``None`` for time sweeps.
    """

    records: list
    meta: dict = field(default_factory=dict)

    @property
    def abscissas(self):
        return np.array([r[0] for r in self.records])

    @property
    def values(self):
        return np.array([r[1] for r in self.records])


def _meta(spec, started):
    meta = asdict(spec)
    if spec.abscissa == "temperature":
        del meta["beta"]
    meta["code_version"] = __version__
    meta["wall_time_s"] = time.perf_counter() - started
    return meta


def time_sweep(spec: SweepSpec):
    if spec.abscissa != "time":
        raise ValueError("time_sweep needs abscissa='time'")
    started = time.perf_counter()
    ts = spec.grid()
    values = quantity_function(spec.quantity)(spec.beta, spec.g, ts)
    records = [(float(t), float(v), None) for t, v in zip(ts, values)]
    return SweepResult(records=records, meta=_meta(spec, started))


def _max_over_time_batch(quantity, betas, g, window=PERIOD, n_grid=N_TIME_GRID):
    f = quantity_function(quantity)
    betas = np.asarray(betas, dtype=float)
    ts = np.linspace(0.0, window, n_grid)
    grid = np.stack([f(b, g, ts) for b in betas])
    idx = np.argmax(grid, axis=1)
    grid_max = grid[np.arange(len(betas)), idx]
    lo = ts[np.maximum(idx - 1, 0)]
    hi = ts[np.minimum(idx + 1, n_grid - 1)]
    t_ref, v_ref = golden_section_max(
        lambda t: f(betas, g, t), lo, hi, TIME_TOL, width=2.0 * (ts[1] - ts[0])
    )
    better = v_ref > grid_max
    t_best = np.where(better, t_ref, ts[idx])
    v_best = np.where(better, v_ref, grid_max)
    return _polish_vertex(lambda t: f(betas, g, t), t_best, v_best, ts[-1])


def _polish_vertex(f, t0, v0, t_max, h=VERTEX_STEP):
    """Parabolic vertex through ``t0 - h, t0, t0 + h``.

    Golden section pins a smooth maximum only to ~sqrt(eps); the symmetric
    three-point vertex is limited by ``eps / h`` instead. The step is kept
    only when it stays within ``h`` and does not lower the value.
    """
    inside = (t0 - h >= 0.0) & (t0 + h <= t_max)
    fm, fp = f(np.clip(t0 - h, 0.0, t_max)), f(np.clip(t0 + h, 0.0, t_max))
    curv = fp - 2.0 * v0 + fm
    with np.errstate(divide="ignore", invalid="ignore"):
        shift = np.where(curv < 0, 0.5 * h * (fm - fp) / curv, 0.0)
    ok = inside & (curv < 0) & (np.abs(shift) <= h)
    t_new = np.where(ok, t0 + shift, t0)
    v_new = f(t_new)
    keep = ok & (v_new >= v0)
    return np.where(keep, t_new, t0), np.where(keep, v_new, v0)


def _max_over_time_many(quantity, betas, g, workers=None):
    betas = np.asarray(betas, dtype=float)
    chunks = [betas[i:i + _BETA_CHUNK] for i in range(0, len(betas), _BETA_CHUNK)]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _max_over_time_batch(quantity, b, g), chunks))
    else:
        parts = [_max_over_time_batch(quantity, b, g) for b in chunks]
    t_star = np.concatenate([p[0] for p in parts]) if parts else np.empty(0)
    values = np.concatenate([p[1] for p in parts]) if parts else np.empty(0)
    return t_star, values


def max_over_time(quantity, beta, g):
    """Largest value of ``quantity`` over one oscillation period ``[0, 4 pi / 3]``.

    Dephasing only shrinks the time-dependent terms, so later periods cannot
    beat the first. Uses a 2000-point grid, smallest t on ties, then
    golden-section refinement around the best grid point and a final
    parabolic-vertex polish.

    Returns ``(t_star, value)``.
    """
    check_beta(beta)
    if not math.isfinite(g) or g < 0:
        raise ValueError(f"g must be finite and >= 0, got {g!r}")
    t_star, value = _max_over_time_batch(quantity, [beta], g)
    return float(t_star[0]), float(value[0])


def temperature_sweep(spec: SweepSpec, workers=None):
    if spec.abscissa != "temperature":
        raise ValueError("temperature_sweep needs abscissa='temperature'")
    started = time.perf_counter()
    consts = PhysicalConstants(omega0=spec.omega0)
    temps = spec.grid()
    betas = [beta_from_temperature(float(T), consts) for T in temps]
    for b in betas:
        check_beta(b)
    t_star, values = _max_over_time_many(spec.quantity, betas, spec.g, workers)
    records = [(float(T), float(v), float(ts)) for T, v, ts in zip(temps, values, t_star)]
    return SweepResult(records=records, meta=_meta(spec, started))


def run_sweep(spec: SweepSpec, workers=None):
    if spec.abscissa == "time":
        return time_sweep(spec)
    return temperature_sweep(spec, workers)


def critical_temperature(g, omega0=OMEGA0_DEFAULT, bracket=(5e-3, 100e-3)):
    """Temperature (K) above which no entanglement is ever reached.

    Bisects on whether the maximum concurrence over time is positive, down
    to 0.01 mK.
    """
    consts = PhysicalConstants(omega0=omega0)
    lo, hi = (float(v) for v in bracket)
    if not 0 < lo < hi:
        raise ValueError(f"bracket must satisfy 0 < low < high, got {bracket!r}")

    def entangled(T):
        return max_over_time("concurrence", beta_from_temperature(T, consts), g)[1] > 0

    if not entangled(lo) or entangled(hi):
        raise ValueError(
            f"bracket ({lo!r} K, {hi!r} K) does not straddle the entanglement threshold"
        )
    while hi - lo > CRITICAL_T_RESOLUTION:
        mid = 0.5 * (lo + hi)
        if entangled(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
