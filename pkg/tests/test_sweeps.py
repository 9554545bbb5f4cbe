import math

import numpy as np
import pytest

from dipolar_qcorr.qcorrelations import concurrence_analytic_array, discord_analytic_array
from dipolar_qcorr.sweeps import (
    PERIOD,
    SweepSpec,
    critical_temperature,
    max_over_time,
    run_sweep,
    temperature_sweep,
    time_sweep,
    worker_count,
)

OMEGA0 = 2 * math.pi * 5e8


def test_sweep_spec_validation():
    SweepSpec("concurrence", "time", 0.0, 0.0, 1.0, 2)
    bad = [
        dict(quantity="entropy"),
        dict(abscissa="beta"),
        dict(points=1),
        dict(points=2.5),
        dict(start=1.0, stop=1.0),
        dict(g=-0.1),
        dict(abscissa="temperature", start=0.0),
    ]
    base = dict(quantity="concurrence", abscissa="time", g=0.0, start=0.0, stop=1.0, points=5)
    for override in bad:
        with pytest.raises(ValueError):
            SweepSpec(**{**base, **override})


def test_time_sweep_zero_at_infinite_temperature():
    res = time_sweep(SweepSpec("concurrence", "time", 0.0, 0.0, 4.0, 41, beta=0.0))
    assert len(res.records) == 41
    assert np.all(res.values == 0)
    assert all(r[2] is None for r in res.records)


def test_time_sweep_periodic():
    spec = SweepSpec("concurrence", "time", 0.0, 0.0, 2 * PERIOD, 201, beta=1.5)
    res = time_sweep(spec)
    v = res.values
    assert np.max(np.abs(v[:101] - v[100:])) < 1e-12


def test_time_sweep_discord_zeros():
    res = time_sweep(SweepSpec("discord", "time", 0.5, 0.0, 2 * PERIOD, 241, beta=1.5))
    t, v = res.abscissas, res.values
    for target in (2 * math.pi / 3, 4 * math.pi / 3):
        assert discord_analytic_array(1.5, 0.5, target) < 1e-9
    interior = (t > 0.05) & (np.abs(t - 2 * math.pi / 3) > 0.05) & (np.abs(t - 4 * math.pi / 3) > 0.05)
    interior &= t < 4 * math.pi / 3
    assert np.all(v[interior] > 0)


def test_records_sorted_and_meta():
    res = run_sweep(SweepSpec("discord", "time", 0.1, 0.5, 3.0, 11, beta=1.5))
    assert np.all(np.diff(res.abscissas) > 0)
    for key in ("quantity", "abscissa", "g", "start", "stop", "points", "beta", "code_version", "wall_time_s"):
        assert key in res.meta


def test_max_over_time_examples():
    t_star, value = max_over_time("concurrence", 0.0, 0.3)
    assert (t_star, value) == (0.0, 0.0)
    t_star, value = max_over_time("concurrence", 50.0, 0.0)
    assert abs(value - 1) < 1e-9 and abs(t_star - math.pi / 3) < 1e-8
    t_star, value = max_over_time("discord", 50.0, 0.0)
    assert abs(value - 1) < 1e-6 and abs(t_star - math.pi / 3) < 1e-8


def test_max_over_time_input_errors():
    with pytest.raises(ValueError):
        max_over_time("concurrence", -1.0, 0.0)
    with pytest.raises(ValueError):
        max_over_time("concurrence", 1.0, -1.0)
    with pytest.raises(ValueError):
        max_over_time("purity", 1.0, 0.0)


@pytest.mark.parametrize("quantity", ["concurrence", "discord"])
@pytest.mark.parametrize("beta,g", [(1.5, 0.0), (1.5, 0.5), (5.0, 2.0), (0.5, 0.1)])
def test_first_period_holds_the_global_maximum(quantity, beta, g):
    f = concurrence_analytic_array if quantity == "concurrence" else discord_analytic_array
    wide = np.linspace(0, 8 * math.pi, 24001)
    _, value = max_over_time(quantity, beta, g)
    assert np.max(f(beta, g, wide)) <= value + 1e-12


@pytest.mark.parametrize("quantity", ["concurrence", "discord"])
def test_max_decreases_with_rate(quantity):
    values = [max_over_time(quantity, 1.5, g)[1] for g in (0, 0.1, 0.5, 1, 2)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_temperature_sweep_concurrence_cutoff():
    spec = SweepSpec("concurrence", "temperature", 0.0, 5e-3, 50e-3, 46, omega0=OMEGA0)
    res = temperature_sweep(spec)
    temps, values = res.abscissas, res.values
    assert np.all(np.diff(values) <= 0)
    positive = temps[values > 0]
    assert 25e-3 < positive.max() < 29e-3
    assert np.all(values[temps > 29e-3] == 0)


def test_temperature_sweep_discord_positive():
    spec = SweepSpec("discord", "temperature", 0.0, 5e-3, 50e-3, 46, omega0=OMEGA0)
    assert np.all(temperature_sweep(spec).values > 0)


def test_hot_limit_is_nearly_uncorrelated():
    for quantity in ("concurrence", "discord"):
        res = temperature_sweep(SweepSpec(quantity, "temperature", 0.0, 0.9, 1.0, 2, omega0=OMEGA0))
        assert np.all(res.values < 1e-3)


def test_temperature_sweep_is_worker_independent():
    spec = SweepSpec("discord", "temperature", 0.5, 5e-3, 100e-3, 40, omega0=OMEGA0)
    serial = temperature_sweep(spec, workers=1).records
    parallel = temperature_sweep(spec, workers=4).records
    assert serial == parallel
    assert temperature_sweep(spec, workers=4).records == parallel


def test_temperature_sweep_rejects_time_spec():
    with pytest.raises(ValueError):
        temperature_sweep(SweepSpec("discord", "time", 0.5, 0.0, 1.0, 4))


def test_critical_temperature():
    t0 = critical_temperature(0.0, OMEGA0, (5e-3, 100e-3))
    assert 25e-3 <= t0 <= 29e-3
    t2 = critical_temperature(2.0, OMEGA0, (5e-3, 100e-3))
    assert t2 < t0
    with pytest.raises(ValueError):
        critical_temperature(0.0, OMEGA0, (5e-3, 10e-3))
    with pytest.raises(ValueError):
        critical_temperature(0.0, OMEGA0, (10e-3, 5e-3))


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("DIPOLAR_QCORR_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("DIPOLAR_QCORR_THREADS", "0")
    with pytest.raises(ValueError):
        worker_count()
    monkeypatch.delenv("DIPOLAR_QCORR_THREADS")
    assert worker_count() >= 1
