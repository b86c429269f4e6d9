import math

import numpy as np
import pytest

from aoinet import simulator as sim
from aoinet.analysis import buffer_nonempty, cond_avg_aoi, cond_peak_aoi
from aoinet.geometry import BipolarTopology
from aoinet.params import ParamError, Region, SystemParams


def test_deterministic_cycle():
    avg, peak, busy = sim.queue_oracle(1.0, 1.0, 20_000, seed=0)
    assert (avg, peak, busy) == (1.0, 1.0, 1.0)


def test_half_half_point():
    avg, peak, busy = sim.queue_oracle(0.5, 0.5, 1_000_000, seed=1)
    assert avg == pytest.approx(3.0, rel=0.01)
    assert peak == pytest.approx(10.0 / 3.0, rel=0.01)
    assert busy == pytest.approx(2.0 / 3.0, rel=0.01)


def test_grid_against_closed_forms():
    rng = np.random.default_rng(123)
    for _ in range(6):
        xi = float(rng.uniform(0.15, 1.0))
        s = float(rng.uniform(0.15, 1.0))
        avg, peak, busy = sim.queue_oracle(xi, s, 400_000, seed=int(rng.integers(1 << 30)))
        assert avg == pytest.approx(cond_avg_aoi(xi, 1.0, s), rel=0.025)
        assert peak == pytest.approx(cond_peak_aoi(xi, 1.0, s), rel=0.025)
        assert busy == pytest.approx(buffer_nonempty(xi, 1.0, s), rel=0.02)


def test_backends_agree_exactly():
    if "compiled" not in sim.available_backends():
        pytest.skip("compiled backend not built")
    a = sim.queue_oracle(0.4, 0.7, 50_000, seed=9, backend="compiled")
    b = sim.queue_oracle(0.4, 0.7, 50_000, seed=9, backend="python")
    assert a == b


def test_oracle_matches_network_kernel_on_isolated_link():
    """Cross-check two independent queue implementations: the dedicated
    oracle loop and the full network kernel with noise tuned so the
    per-attempt success probability equals s."""
    s_target, xi = 0.55, 0.45
    r, theta, ptx = 0.5, 1.0, 50.0
    sigma2 = -math.log(s_target) * ptx / (theta * r**3.8)
    params = SystemParams(lam=0.0, r=r, alpha=3.8, theta=theta, p=1.0, xi=xi,
                          ptx=ptx, sigma2=sigma2)
    reg = Region(50.0)
    topo = BipolarTopology(tx=np.array([[25.0, 25.0]]),
                           rx=np.array([[25.5, 25.0]]), region=reg, r=r)
    m = sim.run(topo, params, slots=400_000, warmup=40_000, seed=2)
    avg, peak, busy = sim.queue_oracle(xi, s_target, 400_000, seed=3)
    assert m.network_avg_aoi == pytest.approx(avg, rel=0.03)
    assert m.network_peak_aoi == pytest.approx(peak, rel=0.03)
    assert m.emp_busy[0] == pytest.approx(busy, rel=0.02)
    assert m.emp_success[0] == pytest.approx(s_target, abs=0.01)


def test_rejects_invalid_rates():
    with pytest.raises(ParamError):
        sim.queue_oracle(0.5, 0.0, 1000)
    with pytest.raises(ParamError):
        sim.queue_oracle(1.5, 0.5, 1000)
