"""Pure-numpy fallback engine.

Implements the same per-slot semantics and random-draw layout as the
compiled kernel (3 uniforms per link per slot: arrival, ALOHA gate,
delivery; 2 per slot for the single-queue oracle), so a given seed
produces the same trajectory on either backend. The delivery decision
here forms the full interference sum directly instead of staging through
the near-neighbor bound; the sampled law is identical.

Only intended for small problems and as a cross-check: the slot loop is
Python-level. An optional per-slot invariant check validates the AoI
recursion and the replacement discipline on every step.
"""

from __future__ import annotations

import numpy as np

__all__ = ["backend_name", "run_slots", "run_slots_frozen", "queue_oracle_run"]


def backend_name() -> str:
    return "python"


def _torus_gather_logfactors(i, txidx, txx, txy, rxx, rxy, side, torus,
                             theta_r_alpha, half_alpha):
    dx = np.abs(txx[txidx] - rxx[i])
    dy = np.abs(txy[txidx] - rxy[i])
    if torus:
        np.minimum(dx, side - dx, out=dx)
        np.minimum(dy, side - dy, out=dy)
    d2 = dx * dx + dy * dy
    return np.log1p(theta_r_alpha * d2 ** (-half_alpha))


def run_slots(rng, t0, nslots, measure_start, xi, eta, c0,
              interf, near_indptr, near_idx, near_val,
              txx, txy, rxx, rxy, side, torus, theta_r_alpha, alpha,
              buf, gen, aoi, age_sum, busy_cnt, attempt_cnt,
              deliver_cnt, peak_sum, frame_busy,
              check_invariants=False):
    """Mirror of the compiled ``run_slots``; see that module for semantics."""
    n = buf.shape[0]
    half_alpha = alpha / 2.0
    use_matrix = interf is not None
    for t in range(t0, t0 + nslots):
        measuring = t >= measure_start
        u_arr = rng.random(n)
        u_gate = rng.random(n)
        u_del = rng.random(n)

        arrived = u_arr < xi
        buf[arrived] = 1
        gen[arrived] = t
        busy = buf.astype(bool)
        frame_busy += busy
        tx = busy & (u_gate < eta)
        txidx = np.flatnonzero(tx)
        if measuring:
            busy_cnt += busy
            attempt_cnt += tx

        delivered = np.zeros(n, dtype=bool)
        if txidx.size:
            if use_matrix:
                sub = interf[np.ix_(txidx, txidx)]
                totals = sub.sum(axis=1) - np.diag(sub)
            else:
                totals = np.array([
                    _torus_gather_logfactors(
                        i, txidx[txidx != i], txx, txy, rxx, rxy, side, torus,
                        theta_r_alpha, half_alpha).sum()
                    for i in txidx
                ])
            delivered[txidx] = u_del[txidx] < np.exp(-c0 - totals)

        if check_invariants:
            # replacement discipline: an arrival slot leaves that slot's stamp
            assert np.all(gen[arrived] == t)
            assert np.all(buf[arrived] == 1)
            # deliveries only from transmitting links
            assert not np.any(delivered & ~tx)

        if measuring:
            age_sum += aoi
            peak_sum += np.where(delivered, aoi, 0)
            deliver_cnt += delivered

        prev_aoi = aoi.copy() if check_invariants else None
        reset_val = t - gen + 1
        aoi[:] = np.where(delivered, reset_val, aoi + 1)
        buf[delivered] = 0

        if check_invariants:
            # AoI recursion: +1 without delivery, reset to t - gen + 1 with one
            assert np.all(aoi[~delivered] == prev_aoi[~delivered] + 1)
            assert np.all(aoi[delivered] == reset_val[delivered])
            assert np.all(aoi[delivered] <= prev_aoi[delivered] + 1)
            assert np.all(aoi >= 1)
    return None


def run_slots_frozen(rng, t0, nslots, measure_start, xi, eta,
                     lin_gain, signal_over_theta, noise_lin,
                     buf, gen, aoi, age_sum, busy_cnt, attempt_cnt,
                     deliver_cnt, peak_sum, frame_busy):
    """Deterministic-fade diagnostic variant (all channel gains frozen at 1).

    Delivery happens iff r^-alpha / theta exceeds the sum of interfering
    link gains plus sigma2/ptx. Draw layout matches ``run_slots`` so the
    arrival/gating trajectory for a given seed is unchanged.
    """
    n = buf.shape[0]
    for t in range(t0, t0 + nslots):
        measuring = t >= measure_start
        u_arr = rng.random(n)
        u_gate = rng.random(n)
        rng.random(n)  # delivery draws unused but kept for stream alignment

        arrived = u_arr < xi
        buf[arrived] = 1
        gen[arrived] = t
        busy = buf.astype(bool)
        frame_busy += busy
        tx = busy & (u_gate < eta)
        txidx = np.flatnonzero(tx)
        if measuring:
            busy_cnt += busy
            attempt_cnt += tx

        delivered = np.zeros(n, dtype=bool)
        if txidx.size:
            sub = lin_gain[np.ix_(txidx, txidx)]
            interference = sub.sum(axis=1) - np.diag(sub)
            delivered[txidx] = signal_over_theta > interference + noise_lin

        if measuring:
            age_sum += aoi
            peak_sum += np.where(delivered, aoi, 0)
            deliver_cnt += delivered

        aoi[:] = np.where(delivered, t - gen + 1, aoi + 1)
        buf[delivered] = 0
    return None


def queue_oracle_run(rng, nslots, measure_start, xi, s):
    """Mirror of the compiled single-queue oracle."""
    draws = rng.random((nslots, 2))
    buf = 0
    gen = 0
    aoi = 1
    age_sum = busy = attempts = deliveries = peak_sum = measured = 0
    for t in range(nslots):
        measuring = t >= measure_start
        delivered = False
        if draws[t, 0] < xi:
            buf = 1
            gen = t
        if buf:
            if measuring:
                busy += 1
                attempts += 1
            if draws[t, 1] < s:
                delivered = True
        if measuring:
            measured += 1
            age_sum += aoi
        if delivered:
            if measuring:
                peak_sum += aoi
                deliveries += 1
            aoi = t - gen + 1
            buf = 0
        else:
            aoi += 1
    return age_sum, busy, attempts, deliveries, peak_sum, measured
