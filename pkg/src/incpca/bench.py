"""Wall-clock comparison of the incremental engine against repeated batch PCA.

Three timing modes, each reported at a grid of prefix lengths ``n``:

``incremental``
    time from the start of warm-up until sample ``n`` has been pushed, measured
    inside a single pass over the stream.
``batch-single``
    time of one :func:`~incpca.oracle.batch_pca` call on the first ``n`` rows.
``batch-cumulative``
    the cost of keeping a batch answer current: the sum of ``batch-single``
    over every prefix from ``n_start`` up to ``n``.

Every mode is repeated ``trials`` times and summarized as mean and
(population) standard deviation; no trial is discarded.  One untimed run
before the trials loads the compiled kernels.
"""

import time

import numpy as np

from .config import PcaConfig
from .engine import IncrementalPCA
from .generators import random_stream
from .oracle import batch_pca

MODES = ("incremental", "batch-single", "batch-cumulative")
DEFAULT_TRIALS = 33


def prefix_grid(n_start, n, points=20):
    """Increasing, unique prefix lengths from ``n_start`` to ``n`` inclusive."""
    if n < n_start:
        raise ValueError(f"n={n} is smaller than n_start={n_start}")
    grid = np.linspace(n_start, n, max(points, 1)).round().astype(int)
    return np.unique(np.append(grid, n))


def time_incremental(x, grid, config, clock=time.perf_counter):
    """Elapsed time at each grid prefix during one warm-up + push pass."""
    out = np.empty(len(grid))
    marks = {int(k): i for i, k in enumerate(grid)}
    t0 = clock()
    eng = IncrementalPCA.warmup(x[: config.n_start], config)
    if config.n_start in marks:
        out[marks[config.n_start]] = clock() - t0
    for k in range(config.n_start, int(grid[-1])):
        eng.push(x[k])
        i = marks.get(k + 1)
        if i is not None:
            out[i] = clock() - t0
    return out


def time_batch(x, grid, config, cumulative=True, clock=time.perf_counter):
    """Per-prefix batch cost at the grid points and, optionally, the running
    total over every prefix ``n_start..n``.  Returns ``(single, cumulative)``;
    ``cumulative`` is ``None`` when not requested."""
    grid = [int(k) for k in grid]
    stop = grid[-1]
    lengths = range(config.n_start, stop + 1) if cumulative else grid
    single = {}
    total = 0.0
    running = {}
    for k in lengths:
        t0 = clock()
        batch_pca(x[:k], config)
        dt = clock() - t0
        total += dt
        single[k] = dt
        running[k] = total
    s = np.array([single[k] for k in grid])
    c = np.array([running[k] for k in grid]) if cumulative else None
    return s, c


def run_benchmark(m=27, n=1000, trials=DEFAULT_TRIALS, modes=MODES, seed=0,
                  n_start=None, points=20, config=None, data=None, clock=time.perf_counter):
    """Run the requested modes and return table rows
    ``{mode, n, mean_seconds, std_seconds, trials}``."""
    if trials < 1:
        raise ValueError("trials must be positive")
    unknown = set(modes) - set(MODES)
    if unknown:
        raise ValueError(f"unknown mode(s) {sorted(unknown)}; choose from {MODES}")
    if config is None:
        config = PcaConfig(m=m, n_start=n_start)
    if data is None:
        data = random_stream(config.m, n, seed).data
    grid = prefix_grid(config.n_start, n, points)
    # load the compiled kernels once so trial 0 does not pay for it
    primed = IncrementalPCA.warmup(data[: config.n_start], config)
    if len(data) > config.n_start:
        primed.push(data[config.n_start])
    batch_pca(data[: config.n_start], config)

    samples = {mode: np.empty((trials, len(grid))) for mode in modes}
    want_batch = "batch-single" in modes or "batch-cumulative" in modes
    for t in range(trials):
        if "incremental" in modes:
            samples["incremental"][t] = time_incremental(data, grid, config, clock)
        if want_batch:
            single, cum = time_batch(data, grid, config, "batch-cumulative" in modes, clock)
            if "batch-single" in modes:
                samples["batch-single"][t] = single
            if cum is not None:
                samples["batch-cumulative"][t] = cum

    rows = []
    for mode in modes:
        mean = samples[mode].mean(axis=0)
        std = samples[mode].std(axis=0)
        for k, mu, sd in zip(grid, mean, std):
            rows.append({"mode": mode, "n": int(k), "mean_seconds": float(mu),
                         "std_seconds": float(sd), "trials": trials})
    return rows


def series(rows, mode):
    """``(n, mean_seconds)`` arrays for one mode of a benchmark table."""
    sel = [r for r in rows if r["mode"] == mode]
    return (np.array([r["n"] for r in sel], dtype=float),
            np.array([r["mean_seconds"] for r in sel], dtype=float))


def linear_r2(n, t):
    """Coefficient of determination of a least-squares line through (n, t)."""
    n = np.asarray(n, dtype=float)
    t = np.asarray(t, dtype=float)
    coef = np.polyfit(n, t, 1)
    resid = t - np.polyval(coef, n)
    ss_tot = np.sum((t - t.mean()) ** 2)
    if ss_tot == 0.0:
        return 1.0
    return 1.0 - np.sum(resid**2) / ss_tot


def quadratic_coefficient(n, t):
    """Leading coefficient of a least-squares parabola through (n, t)."""
    return float(np.polyfit(np.asarray(n, float), np.asarray(t, float), 2)[0])


def crossover(n, incremental, batch_cumulative):
    """First prefix from which batch-cumulative stays above incremental, or None."""
    above = np.asarray(batch_cumulative) > np.asarray(incremental)
    for i in range(len(above)):
        if above[i:].all():
            return int(n[i])
    return None
