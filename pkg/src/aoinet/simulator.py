"""Slot-synchronous simulation of LCFS-with-replacement queues under
ALOHA gating and SINR-based delivery.

The hot loop lives in the compiled extension ``aoinet._kernel`` when it
built successfully and in ``aoinet._engine_py`` otherwise; both expose
the same semantics and consume identical random streams. Set
``AOINET_FORCE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _engine_py
from .geometry import BipolarTopology, build_neighbor_csr, torus_distance_matrix
from .params import ParamError, SystemParams, noise_exponent

try:
    from . import _kernel  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on build environment
    _kernel = None

__all__ = [
    "SimMetrics",
    "SimContext",
    "backend_name",
    "available_backends",
    "prepare_context",
    "run",
    "queue_oracle",
    "peak_outage_empirical",
    "default_near_radius",
]

LINK_CSV_SCHEMA = "aoinet-linkstats v1"


def _forced_python() -> bool:
    return os.environ.get("AOINET_FORCE_PYTHON", "") not in ("", "0")


def backend_name() -> str:
    """Name of the engine that ``run`` will use by default."""
    if _kernel is not None and not _forced_python():
        return "compiled"
    return "python"


def available_backends() -> list[str]:
    out = ["python"]
    if _kernel is not None:
        out.insert(0, "compiled")
    return out


@dataclass
class SimMetrics:
    """Per-link and network statistics from a completed run.

    Per-link arrays are indexed by link id. Links that never delivered a
    packet inside the measurement window are *censored*: their average
    AoI is excluded from the network aggregate (and they count as outage
    for any peak-AoI threshold).
    """

    n_links: int
    slots_measured: int
    seed: int
    backend: str
    attempts: np.ndarray
    deliveries: np.ndarray
    busy_slots: np.ndarray
    age_sum: np.ndarray
    peak_sum: np.ndarray

    @property
    def emp_success(self) -> np.ndarray:
        out = np.full(self.n_links, np.nan)
        mask = self.attempts > 0
        out[mask] = self.deliveries[mask] / self.attempts[mask]
        return out

    @property
    def emp_busy(self) -> np.ndarray:
        return self.busy_slots / self.slots_measured

    @property
    def avg_aoi(self) -> np.ndarray:
        return self.age_sum / self.slots_measured

    @property
    def peak_aoi_mean(self) -> np.ndarray:
        out = np.full(self.n_links, np.nan)
        mask = self.deliveries > 0
        out[mask] = self.peak_sum[mask] / self.deliveries[mask]
        return out

    @property
    def censored(self) -> np.ndarray:
        return self.deliveries == 0

    @property
    def censored_count(self) -> int:
        return int(self.censored.sum())

    @property
    def diverged(self) -> bool:
        return self.censored_count > 0

    @property
    def network_avg_aoi(self) -> float:
        ok = ~self.censored
        if not ok.any():
            return math.inf
        return float(self.avg_aoi[ok].mean())

    @property
    def network_peak_aoi(self) -> float:
        ok = ~self.censored
        if not ok.any():
            return math.inf
        return float(self.peak_aoi_mean[ok].mean())

    @property
    def network_emp_success(self) -> float:
        vals = self.emp_success
        ok = ~np.isnan(vals)
        return float(vals[ok].mean()) if ok.any() else math.nan

    def peak_outage(self, a_threshold: float) -> float:
        """Fraction of links whose mean peak AoI exceeds the threshold.

        Censored links count as outage (their peak never materialized).
        """
        if self.n_links == 0:
            return math.nan
        peaks = self.peak_aoi_mean
        exceed = np.where(np.isnan(peaks), True, peaks > a_threshold)
        return float(exceed.mean())

    def to_csv(self, path: str | Path) -> None:
        """One row per link plus a NETWORK summary row; schema versioned."""
        succ, busy = self.emp_success, self.emp_busy
        avg, peak = self.avg_aoi, self.peak_aoi_mean
        with open(path, "w", newline="") as fh:
            fh.write(f"# {LINK_CSV_SCHEMA} slots_measured={self.slots_measured} "
                     f"seed={self.seed} backend={self.backend}\n")
            w = csv.writer(fh)
            w.writerow(["link_id", "emp_success", "emp_busy", "avg_aoi", "peak_aoi_mean"])
            for i in range(self.n_links):
                w.writerow([i, repr(float(succ[i])), repr(float(busy[i])),
                            repr(float(avg[i])), repr(float(peak[i]))])
            w.writerow(["NETWORK", repr(self.network_emp_success),
                        repr(float(busy.mean()) if self.n_links else math.nan),
                        repr(self.network_avg_aoi), repr(self.network_peak_aoi)])


def peak_outage_empirical(metrics: SimMetrics, a_threshold: float) -> float:
    return metrics.peak_outage(a_threshold)


def default_near_radius(params: SystemParams, side: float) -> float:
    """Radius of the stage-1 interferer neighborhood.

    Large enough that the expected out-of-neighborhood interference
    exponent stays below ~0.1 at full activity, small enough to keep the
    mean neighbor count bounded. Only a performance knob: the sampled
    delivery law does not depend on it.
    """
    tra = params.theta * params.r**params.alpha
    base = 3.0 * tra ** (1.0 / params.alpha)
    if params.lam > 0:
        r_far = (2.0 * math.pi * params.lam * tra / (0.1 * (params.alpha - 2.0))) ** (
            1.0 / (params.alpha - 2.0))
        r_deg = math.sqrt(96.0 / (math.pi * params.lam))
        radius = max(base, min(r_far, r_deg))
    else:
        radius = base
    return min(radius, side / 2.0 * 0.999)


@dataclass
class SimContext:
    """Precomputed interference structures, reusable across runs that share
    the topology and the (r, theta, alpha) triple."""

    topo: BipolarTopology
    theta_r_alpha: float
    alpha: float
    interf: np.ndarray | None
    near_indptr: np.ndarray
    near_idx: np.ndarray
    near_val: np.ndarray | None
    near_radius: float


def prepare_context(topo: BipolarTopology, params: SystemParams,
                    near_radius: float | None = None,
                    matrix_max_links: int = 6000) -> SimContext:
    """Build the interference log-factor matrix (or positional fallback
    structures when the dense matrix would exceed ``matrix_max_links``²)."""
    n = topo.n
    side = topo.region.side
    tra = params.theta * params.r**params.alpha
    if near_radius is None:
        near_radius = default_near_radius(params, side)
    indptr, idx = build_neighbor_csr(topo.rx, topo.tx, near_radius, topo.region)
    # CSR rows are receivers, entries are transmitter indices
    if n <= matrix_max_links:
        d = torus_distance_matrix(topo.rx, topo.tx, topo.region)
        np.fill_diagonal(d, params.r)  # own-link distance, excluded from sums anyway
        interf = np.log1p(tra * d ** (-params.alpha))
        near_val = None
    else:
        interf = None
        vals = []
        for i in range(n):
            js = idx[indptr[i]:indptr[i + 1]]
            dx = np.abs(topo.tx[js, 0] - topo.rx[i, 0])
            dy = np.abs(topo.tx[js, 1] - topo.rx[i, 1])
            if topo.region.boundary == "torus":
                np.minimum(dx, side - dx, out=dx)
                np.minimum(dy, side - dy, out=dy)
            vals.append(np.log1p(tra * (dx * dx + dy * dy) ** (-params.alpha / 2.0)))
        near_val = (np.concatenate(vals) if vals
                    else np.zeros(0, dtype=np.float64))
    return SimContext(topo=topo, theta_r_alpha=tra, alpha=params.alpha,
                      interf=interf, near_indptr=indptr, near_idx=idx,
                      near_val=near_val, near_radius=near_radius)


@dataclass
class _RunState:
    buf: np.ndarray
    gen: np.ndarray
    aoi: np.ndarray
    age_sum: np.ndarray
    busy_cnt: np.ndarray
    attempt_cnt: np.ndarray
    deliver_cnt: np.ndarray
    peak_sum: np.ndarray
    frame_busy: np.ndarray

    @classmethod
    def fresh(cls, n: int) -> "_RunState":
        z = lambda: np.zeros(n, dtype=np.int64)
        return cls(buf=np.zeros(n, dtype=np.uint8), gen=z(),
                   aoi=np.ones(n, dtype=np.int64), age_sum=z(), busy_cnt=z(),
                   attempt_cnt=z(), deliver_cnt=z(), peak_sum=z(), frame_busy=z())


def run(topo: BipolarTopology, params: SystemParams, slots: int,
        warmup: int | None = None, policy=None, seed: int = 0, *,
        backend: str | None = None, fading: str = "rayleigh",
        context: SimContext | None = None, near_radius: float | None = None,
        matrix_max_links: int = 6000, check_invariants: bool = False) -> SimMetrics:
    """Simulate ``slots`` time slots on a fixed topology.

    Parameters
    ----------
    policy : optional access policy object
        Must expose ``frame_len`` (int or None) plus ``reset(topo, params)
        -> eta array`` and ``update(frame_index, frame_busy_frac) -> eta
        array``. ``None`` uses the constant ALOHA probability ``params.p``.
    warmup : int, optional
        Slots discarded from all statistics; defaults to 10% of ``slots``.
    fading : {"rayleigh", "frozen"}
        "frozen" pins every channel gain at 1 (deterministic SINR given
        the active set); diagnostic only, served by the python engine.
    """
    if topo.n == 0:
        raise ParamError("cannot compute network metrics on an empty topology")
    if warmup is None:
        warmup = slots // 10
    if not 0 <= warmup < slots:
        raise ParamError(f"need slots > warmup >= 0, got slots={slots} warmup={warmup}")
    if fading not in ("rayleigh", "frozen"):
        raise ParamError(f"unknown fading mode {fading!r}")

    n = topo.n
    chosen = backend or backend_name()
    if chosen == "compiled" and (_kernel is None):
        raise ParamError("compiled backend requested but extension not built")
    if fading == "frozen" or check_invariants:
        chosen = "python"

    bitgen = np.random.PCG64(np.random.SeedSequence(seed))
    rng = np.random.Generator(bitgen)
    state = _RunState.fresh(n)
    c0 = noise_exponent(params)

    if policy is None:
        eta = np.full(n, params.p, dtype=np.float64)
        frame_len = None
    else:
        eta = np.asarray(policy.reset(topo, params), dtype=np.float64).copy()
        frame_len = policy.frame_len

    if fading == "frozen":
        d = torus_distance_matrix(topo.rx, topo.tx, topo.region)
        np.fill_diagonal(d, np.inf)  # self term excluded via infinite distance
        lin_gain = d ** (-params.alpha)
        signal_over_theta = params.r ** (-params.alpha) / params.theta
        noise_lin = params.sigma2 / params.ptx
        ctx = None
    else:
        ctx = context or prepare_context(topo, params, near_radius=near_radius,
                                         matrix_max_links=matrix_max_links)
        if not math.isclose(ctx.theta_r_alpha, params.theta * params.r**params.alpha,
                            rel_tol=1e-12):
            raise ParamError("context was prepared for different (theta, r, alpha)")

    torus = 1 if topo.region.boundary == "torus" else 0
    txx, txy = np.ascontiguousarray(topo.tx[:, 0]), np.ascontiguousarray(topo.tx[:, 1])
    rxx, rxy = np.ascontiguousarray(topo.rx[:, 0]), np.ascontiguousarray(topo.rx[:, 1])

    def run_chunk(t0: int, count: int) -> None:
        if fading == "frozen":
            _engine_py.run_slots_frozen(
                rng, t0, count, warmup, params.xi, eta, lin_gain,
                signal_over_theta, noise_lin,
                state.buf, state.gen, state.aoi, state.age_sum, state.busy_cnt,
                state.attempt_cnt, state.deliver_cnt, state.peak_sum,
                state.frame_busy)
        elif chosen == "compiled":
            _kernel.run_slots(
                bitgen.capsule, t0, count, warmup, params.xi, eta, c0,
                ctx.interf, ctx.near_indptr, ctx.near_idx, ctx.near_val,
                txx, txy, rxx, rxy, topo.region.side, torus,
                ctx.theta_r_alpha, ctx.alpha,
                state.buf, state.gen, state.aoi, state.age_sum, state.busy_cnt,
                state.attempt_cnt, state.deliver_cnt, state.peak_sum,
                state.frame_busy)
        else:
            _engine_py.run_slots(
                rng, t0, count, warmup, params.xi, eta, c0,
                ctx.interf, ctx.near_indptr, ctx.near_idx, ctx.near_val,
                txx, txy, rxx, rxy, topo.region.side, torus,
                ctx.theta_r_alpha, ctx.alpha,
                state.buf, state.gen, state.aoi, state.age_sum, state.busy_cnt,
                state.attempt_cnt, state.deliver_cnt, state.peak_sum,
                state.frame_busy, check_invariants=check_invariants)

    if frame_len is None:
        run_chunk(0, slots)
    else:
        t = 0
        frame_index = 0
        while t < slots:
            count = min(frame_len, slots - t)
            state.frame_busy[:] = 0
            run_chunk(t, count)
            t += count
            frame_index += 1
            if t < slots:
                new_eta = policy.update(frame_index, state.frame_busy / count)
                eta[:] = np.asarray(new_eta, dtype=np.float64)

    return SimMetrics(
        n_links=n, slots_measured=slots - warmup, seed=seed,
        backend="python" if fading == "frozen" else chosen,
        attempts=state.attempt_cnt, deliveries=state.deliver_cnt,
        busy_slots=state.busy_cnt, age_sum=state.age_sum,
        peak_sum=state.peak_sum)


def queue_oracle(xi: float, s: float, slots: int, seed: int = 0,
                 warmup: int | None = None, *, backend: str | None = None
                 ) -> tuple[float, float, float]:
    """Monte-Carlo (avg AoI, mean peak AoI, busy fraction) of one isolated
    LCFS-with-replacement queue with per-attempt success probability ``s``.

    Independent of the closed-form queue results it is used to check.
    """
    if not 0.0 < s <= 1.0:
        raise ParamError(f"success probability must lie in (0, 1], got {s}")
    if not 0.0 < xi <= 1.0:
        raise ParamError(f"xi must lie in (0, 1], got {xi}")
    if warmup is None:
        warmup = slots // 10
    chosen = backend or backend_name()
    bitgen = np.random.PCG64(np.random.SeedSequence(seed))
    if chosen == "compiled" and _kernel is not None:
        out = _kernel.queue_oracle_run(bitgen.capsule, slots, warmup, xi, s)
    else:
        out = _engine_py.queue_oracle_run(np.random.Generator(bitgen), slots,
                                          warmup, xi, s)
    age_sum, busy, _attempts, deliveries, peak_sum, measured = out
    avg = age_sum / measured
    peak = peak_sum / deliveries if deliveries else math.inf
    return avg, peak, busy / measured
