"""Synthetic year of hourly demand and solar availability.

The generator is fully documented so runs are reproducible from the seed
alone.  With day index d (0-based), hour center h = hour + 0.5, and one
shared random stream:

Demand per load node, peak = nominal_kva * power_factor:
    shape(h)    = 0.45 + 0.30 exp(-(h-8)^2/(2*2.2^2))
                       + 0.55 exp(-(h-19)^2/(2*2.8^2)), rescaled to max 1
    season(d)   = 1 + 0.12 cos(2 pi (d - 20) / 365)         (winter peak)
    noise(d,h)  = 1 + 0.06 N(0,1)
    load        = max(0, peak * shape * season * noise)

Solar availability per solar unit, scale = capacity:
    daylen(d)   = 12 + 2.8 cos(2 pi (d - 172) / 365)        (summer solstice)
    frac        = (h - (12 - daylen/2)) / daylen
    clearsky    = sin(pi frac)^1.2 inside (0, 1), else 0    (night is zero)
    bright(d)   = 0.72 + 0.18 cos(2 pi (d - 172) / 365)
    clouds(d)   = Beta(5, 2) draw per day
    jitter(d,h) = max(0, 1 + 0.08 N(0,1))
    solar       = clip(scale * bright * clearsky * clouds * jitter,
                       0, capacity)

CSV layout for persisted profiles: one row per hour of the span, columns
day, hour, then one column per source (load_<node>, solar_<unit>).
"""
from __future__ import annotations

import csv
import os
import tempfile

import numpy as np

from ..model import PlanningInstance
from ..scenarios import ProfileSet


def synth_profiles(instance: PlanningInstance, seed: int,
                   n_days: int = 365) -> ProfileSet:
    """Deterministic hourly kW series for every load node and solar unit."""
    if n_days < 1:
        raise ValueError("need at least one day")
    rng = np.random.default_rng(seed)
    day = np.arange(n_days, dtype=float)[:, None]
    hour = np.arange(24, dtype=float)[None, :] + 0.5

    loads: dict[int, np.ndarray] = {}
    shape = (0.45
             + 0.30 * np.exp(-((hour - 8.0) ** 2) / (2 * 2.2 ** 2))
             + 0.55 * np.exp(-((hour - 19.0) ** 2) / (2 * 2.8 ** 2)))
    shape = shape / shape.max()
    season = 1.0 + 0.12 * np.cos(2 * np.pi * (day - 20.0) / 365.0)
    for load in instance.loads:
        peak = load.nominal_kva * load.power_factor
        noise = 1.0 + 0.06 * rng.standard_normal((n_days, 24))
        loads[load.node] = np.clip(peak * shape * season * noise, 0.0, None)

    solar: dict[str, np.ndarray] = {}
    daylen = 12.0 + 2.8 * np.cos(2 * np.pi * (day - 172.0) / 365.0)
    frac = (hour - (12.0 - daylen / 2.0)) / daylen
    clearsky = np.where((frac > 0.0) & (frac < 1.0),
                        np.sin(np.pi * np.clip(frac, 0.0, 1.0)) ** 1.2, 0.0)
    bright = 0.72 + 0.18 * np.cos(2 * np.pi * (day - 172.0) / 365.0)
    for gen in instance.generators:
        if not gen.is_solar:
            continue
        clouds = rng.beta(5.0, 2.0, size=(n_days, 1))
        jitter = np.clip(1.0 + 0.08 * rng.standard_normal((n_days, 24)),
                         0.0, None)
        series = gen.capacity * bright * clearsky * clouds * jitter
        solar[gen.id] = np.clip(series, 0.0, gen.capacity)
    return ProfileSet(loads=loads, solar=solar)


def write_profiles_csv(profiles: ProfileSet, path) -> None:
    n_days = profiles.n_days
    columns = ([("load", n) for n in sorted(profiles.loads)]
               + [("solar", g) for g in sorted(profiles.solar)])
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["day", "hour"]
                            + [f"{kind}_{key}" for kind, key in columns])
            for d in range(n_days):
                for h in range(24):
                    row = [d, h]
                    for kind, key in columns:
                        series = (profiles.loads[key] if kind == "load"
                                  else profiles.solar[key])
                        row.append(repr(float(series[d, h])))
                    writer.writerow(row)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_profiles_csv(path) -> ProfileSet:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header or header[:2] != ["day", "hour"]:
            raise ValueError("profile CSV must start with day,hour columns")
        columns = []
        for name in header[2:]:
            kind, _, key = name.partition("_")
            if kind == "load":
                columns.append(("load", int(key)))
            elif kind == "solar":
                columns.append(("solar", key))
            else:
                raise ValueError(f"unknown profile column {name!r}")
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows or len(rows) % 24 != 0:
        raise ValueError("profile CSV must hold whole days")
    data = np.asarray(rows, dtype=float)
    n_days = len(rows) // 24
    loads: dict[int, np.ndarray] = {}
    solar: dict[str, np.ndarray] = {}
    for j, (kind, key) in enumerate(columns):
        series = data[:, 2 + j].reshape(n_days, 24)
        if kind == "load":
            loads[key] = series
        else:
            solar[key] = series
    return ProfileSet(loads=loads, solar=solar)
