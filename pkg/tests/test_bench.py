import numpy as np
import pytest

from incpca.bench import (
    MODES,
    crossover,
    linear_r2,
    prefix_grid,
    quadratic_coefficient,
    run_benchmark,
    series,
    time_batch,
)
from incpca.config import PcaConfig


def test_grid():
    g = prefix_grid(5, 100, 10)
    assert g[0] == 5 and g[-1] == 100 and np.all(np.diff(g) > 0)
    np.testing.assert_array_equal(prefix_grid(4, 4, 10), [4])
    with pytest.raises(ValueError):
        prefix_grid(10, 5)


def test_single_trial_single_prefix_has_zero_std():
    rows = run_benchmark(m=3, n=4, trials=1, points=1)
    assert {r["mode"] for r in rows} == set(MODES)
    assert all(r["std_seconds"] == 0.0 and r["n"] == 4 and r["trials"] == 1 for r in rows)


def test_cumulative_is_sum_of_singles(rng):
    x = rng.normal(size=(30, 3))
    cfg = PcaConfig(m=3)
    ticks = iter(np.arange(0, 1000, 0.5))
    single, cum = time_batch(x, list(range(4, 31)), cfg, clock=lambda: next(ticks))
    np.testing.assert_allclose(cum, np.cumsum(single))


def test_table_structure():
    rows = run_benchmark(m=3, n=40, trials=2, modes=("incremental",), points=5)
    assert [r["n"] for r in rows] == [4, 13, 22, 31, 40]
    n, t = series(rows, "incremental")
    assert np.all(np.diff(t) > 0)


def test_bad_parameters():
    with pytest.raises(ValueError):
        run_benchmark(m=2, n=10, trials=0)
    with pytest.raises(ValueError):
        run_benchmark(m=2, n=10, modes=("quantum",))


def test_fit_helpers():
    n = np.arange(10.0, 110.0, 10.0)
    assert linear_r2(n, 3 * n + 1) == pytest.approx(1.0)
    assert quadratic_coefficient(n, 2 * n**2 + n) == pytest.approx(2.0)
    assert crossover(n, n, 0.5 * n + 20) is None
    assert crossover(n, n, 2 * n - 50) == 60
