"""Locally adaptive slotted ALOHA.

Each node observes the receivers inside a disk-shaped stopping set of
radius R around its transmitter, collects buffer-occupancy reports from
those neighbors once per frame, and re-solves a scalar fixed point for
its own channel access probability. Out-of-window interference enters
through a mean-field tail integral. Forcing every occupancy report to 1
recovers the dominant-system baseline (DS-LA).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .geometry import BipolarTopology, StoppingSet, build_neighbor_csr, neighbors_in, torus_distance
from .metadist import MetaDistribution
from .params import DerivedParams, ParamError, SystemParams, derive, noise_exponent
from .analysis import buffer_nonempty

__all__ = [
    "tail_integral",
    "solve_eta",
    "solve_eta_many",
    "conditional_success_given_window",
    "AdaptivePolicy",
    "PolicyTraceEntry",
    "run_algorithm1",
]


def tail_integral(window_radius: float, lam: float, mean_a: float,
                  params: SystemParams, derived: DerivedParams) -> float:
    """Mean-field interference weight of nodes beyond the stopping set:

        lam * E[a] * int_{|z| > R} dz / (1 + |z|^alpha / (theta r^alpha))
        = pi lam E[a] theta^delta r^2 * int_{v_R}^inf dv / (1 + v^(alpha/2))

    with v_R = (R / (theta^(1/alpha) r))^2. R = 0 recovers the full-plane
    value pi lam E[a] theta^delta r^2 C(alpha).
    """
    if window_radius < 0:
        raise ParamError(f"window_radius must be nonnegative, got {window_radius}")
    if lam == 0.0 or mean_a == 0.0:
        return 0.0
    half = params.alpha / 2.0
    v_r = (window_radius / (params.theta ** (1.0 / params.alpha) * params.r)) ** 2
    # map v = v_R + x/(1-x) onto [0, 1)
    val, _ = quad(
        lambda x: 1.0 / ((1.0 + (v_r + x / (1.0 - x)) ** half) * (1.0 - x) ** 2),
        0.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=200)
    pref = math.pi * lam * mean_a * params.theta**derived.delta * params.r**2
    return pref * val


def _eta_balance(eta, d0j: np.ndarray, a_j: np.ndarray, tail: float):
    """h(eta) = 1/eta - sum_j 1/(1 + D_0j - a_j eta) - tail, strictly
    decreasing on (0, 1] with h(0+) = +inf."""
    return 1.0 / eta - (1.0 / (1.0 + d0j - a_j * eta)).sum() - tail


def solve_eta(neighbor_terms, tail: float, *, tol: float = 1e-10) -> float:
    """Channel access probability from local observations.

    ``neighbor_terms`` is a sequence of (D_0j, a_j) pairs: normalized
    own-transmitter-to-neighbor-receiver path gains and the neighbors'
    reported buffer occupancies. Returns 1 when the congestion condition
    sum_j 1/(1 + D_0j - a_j) + tail <= 1 fails to bind, else the unique
    root of the balance equation in (0, 1), bisected to ``tol``.
    """
    terms = list(neighbor_terms)
    d0j = np.asarray([t[0] for t in terms], dtype=float)
    a_j = np.asarray([t[1] for t in terms], dtype=float)
    if np.any(d0j <= 0.0):
        raise ParamError("all D_0j must be positive")
    if np.any((a_j < 0.0) | (a_j > 1.0)):
        raise ParamError("occupancy reports must lie in [0, 1]")
    if np.any(1.0 + d0j - a_j <= 0.0):
        raise ParamError("1 + D_0j - a_j must stay positive")
    if tail < 0.0:
        raise ParamError("tail must be nonnegative")

    if (1.0 / (1.0 + d0j - a_j)).sum() + tail <= 1.0:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _eta_balance(mid, d0j, a_j, tail) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_eta_many(indptr: np.ndarray, d0j: np.ndarray, a_flat: np.ndarray,
                   tails: np.ndarray, *, iters: int = 50) -> np.ndarray:
    """Vectorized bisection of the per-node balance equation.

    ``indptr``/``d0j`` hold CSR neighbor gains per node, ``a_flat`` the
    matching occupancy reports, ``tails`` the per-node out-of-window term.
    """
    n = indptr.shape[0] - 1
    counts = np.diff(indptr)
    empty = counts == 0

    def _segment_sums(values: np.ndarray) -> np.ndarray:
        if values.size == 0:
            return np.zeros(n)
        # reduceat rejects start indices == values.size (trailing empty rows)
        starts = np.minimum(indptr[:-1], values.size - 1)
        sums = np.add.reduceat(values, starts)
        sums[empty] = 0.0
        return sums

    cond = _segment_sums(1.0 / (1.0 + d0j - a_flat)) + tails
    eta = np.ones(n, dtype=np.float64)
    active = cond > 1.0
    if not active.any():
        return eta
    lo = np.zeros(n)
    hi = np.ones(n)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        mid_rep = np.repeat(mid, counts)
        ssum = _segment_sums(1.0 / (1.0 + d0j - a_flat * mid_rep))
        h = 1.0 / mid - ssum - tails
        go_up = h > 0.0
        lo = np.where(go_up, mid, lo)
        hi = np.where(go_up, hi, mid)
    eta[active] = (0.5 * (lo + hi))[active]
    return eta


def conditional_success_given_window(node: int, window: StoppingSet,
                                     topo: BipolarTopology, etas: np.ndarray,
                                     a_hats: np.ndarray, mean_a: float,
                                     params: SystemParams,
                                     derived: DerivedParams) -> float:
    """Window-conditioned success probability of one link: the noise factor
    times the product over in-window interfering transmitters times the
    mean-field exponent for everything outside the window (diagnostic
    companion of the policy objective)."""
    c0 = noise_exponent(params)
    idx = neighbors_in(window, topo, self_index=node, point="tx")
    d = torus_distance(topo.tx[idx], topo.rx[node][None, :], topo.region)
    dji = d**params.alpha / (params.theta * params.r**params.alpha)
    prod = float(np.prod(1.0 - etas[idx] * a_hats[idx] / (1.0 + dji))) if idx.size else 1.0
    tail = tail_integral(window.radius, params.lam, mean_a, params, derived)
    return math.exp(-c0) * prod * math.exp(-tail)


@dataclass
class PolicyTraceEntry:
    frame_index: int
    eta: np.ndarray
    reported_a: np.ndarray


@dataclass
class AdaptivePolicy:
    """Frame-based locally adaptive ALOHA (plugs into ``simulator.run``).

    Every ``frame_len`` slots each node reports its empirical busy
    fraction over the elapsed frame to the links whose receivers fall in
    its stopping set and re-solves its access probability. ``dominant``
    forces all occupancy terms to 1 (DS-LA baseline). ``mean_a`` fixes
    the out-of-window occupancy; by default it tracks the running
    network-wide empirical mean (or 1 under ``dominant``).
    """

    window_radius: float
    frame_len: int = 200
    dominant: bool = False
    mean_a: float | None = None
    collect_trace: bool = False
    trace: list = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.frame_len < 1:
            raise ParamError(f"frame_len must be >= 1, got {self.frame_len}")
        if self.window_radius < 0:
            raise ParamError("window_radius must be nonnegative")

    @staticmethod
    def mean_a_from_analysis(dist: MetaDistribution, params: SystemParams,
                             n_masses: int = 512) -> float:
        """E[a] = int buffer_nonempty(xi, p, t) dF(t) from a solved law."""
        t, w = dist.masses(n_masses)
        vals = np.array([buffer_nonempty(params.xi, params.p, ti) for ti in t])
        return float((w * vals).sum())

    def reset(self, topo: BipolarTopology, params: SystemParams) -> np.ndarray:
        self._params = params
        self._derived = derive(params)
        indptr, idx = build_neighbor_csr(topo.tx, topo.rx, self.window_radius,
                                         topo.region)
        # D_0j = |X_0 - y_j|^alpha / (theta r^alpha) for receivers y_j in the window
        d_chunks = []
        for i in range(topo.n):
            js = idx[indptr[i]:indptr[i + 1]]
            if js.size:
                d = torus_distance(topo.tx[i][None, :], topo.rx[js], topo.region)
                d_chunks.append(d**params.alpha
                                / (params.theta * params.r**params.alpha))
        self._indptr = indptr
        self._idx = idx
        self._d0j = (np.concatenate(d_chunks) if d_chunks
                     else np.zeros(0, dtype=np.float64))
        self._n = topo.n
        # model density for the tail term; fall back to the realized one for
        # hand-built topologies carrying lam = 0
        self._lam_tail = params.lam if params.lam > 0 else topo.n / topo.region.area
        self.trace = []
        eta = np.ones(topo.n, dtype=np.float64)
        if self.collect_trace:
            self.trace.append(PolicyTraceEntry(0, eta.copy(),
                                               np.ones(topo.n)))
        return eta

    def update(self, frame_index: int, frame_busy_frac: np.ndarray) -> np.ndarray:
        a_hat = np.ones_like(frame_busy_frac) if self.dominant \
            else np.asarray(frame_busy_frac, dtype=np.float64)
        mean_a = self.mean_a
        if mean_a is None:
            mean_a = 1.0 if self.dominant else float(a_hat.mean())
        tail = tail_integral(self.window_radius, self._lam_tail, mean_a,
                             self._params, self._derived)
        a_flat = a_hat[self._idx]
        eta = solve_eta_many(self._indptr, self._d0j, a_flat,
                             np.full(self._n, tail))
        if self.collect_trace:
            self.trace.append(PolicyTraceEntry(frame_index, eta.copy(), a_hat.copy()))
        return eta


def run_algorithm1(topo: BipolarTopology, params: SystemParams, slots: int,
                   warmup: int | None = None, *, frame_len: int = 200,
                   window_radius: float = 20.0, seed: int = 0,
                   dominant: bool = False, mean_a: float | None = None,
                   collect_trace: bool = False, **run_kwargs):
    """Simulate the locally adaptive protocol on a fixed topology.

    Returns (metrics, policy); ``policy.trace`` holds per-frame (eta,
    reported occupancy) snapshots when ``collect_trace`` is set.
    """
    from . import simulator

    policy = AdaptivePolicy(window_radius=window_radius, frame_len=frame_len,
                            dominant=dominant, mean_a=mean_a,
                            collect_trace=collect_trace)
    metrics = simulator.run(topo, params, slots, warmup=warmup, policy=policy,
                            seed=seed, **run_kwargs)
    return metrics, policy
