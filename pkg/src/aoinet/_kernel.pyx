# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled slot-loop engine.

Semantics are identical to ``aoinet._engine_py``: per slot, Bernoulli
arrivals overwrite the unit buffer, occupied buffers transmit with their
node-specific access probability, and a transmission is delivered iff a
uniform draw falls below the Rayleigh-faded success probability

    exp(-c0) * prod_{j active, j != i} 1 / (1 + theta r^alpha / d_ji^alpha)

which is the exact conditional delivery law given the active set (the
i.i.d. unit-mean exponential fades integrate out in closed form and the
per-receiver fade sets are disjoint, so deliveries are conditionally
independent across links within a slot).

Interference log-factors log1p(theta r^alpha / d^alpha) are either read
from a dense (receiver, transmitter) matrix or recomputed from positions
when the matrix would not fit in memory. A near-neighbor bound rejects
most failed transmissions before the full interference sum is formed;
the staging never changes the sampled outcome, only the work done.

Random draws follow a fixed per-slot layout (3 uniforms per link: arrival,
ALOHA gate, delivery) from a single PCG64 stream so that runs are
reproducible and both engines consume identical streams.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport exp, log1p, pow, sqrt
from numpy.random cimport bitgen_t

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.uint8_t u8


def backend_name():
    return "compiled"


def run_slots(object capsule,
              i64 t0, i64 nslots, i64 measure_start,
              double xi, double[::1] eta, double c0,
              object interf_obj,
              i64[::1] near_indptr, i64[::1] near_idx,
              object near_val_obj,
              double[::1] txx, double[::1] txy,
              double[::1] rxx, double[::1] rxy,
              double side, int torus,
              double theta_r_alpha, double alpha,
              u8[::1] buf, i64[::1] gen, i64[::1] aoi,
              i64[::1] age_sum, i64[::1] busy_cnt, i64[::1] attempt_cnt,
              i64[::1] deliver_cnt, i64[::1] peak_sum, i64[::1] frame_busy):
    """Advance the network by ``nslots`` slots starting at absolute slot t0.

    Mutates the state and accumulator arrays in place. Statistics arrays
    only accumulate for slots >= measure_start; ``frame_busy`` always
    accumulates (the adaptive policy resets it between frames).
    """
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
    cdef Py_ssize_t n = buf.shape[0]
    cdef double[:, ::1] interf = None
    cdef double[::1] near_val = None
    cdef bint use_matrix = interf_obj is not None
    if use_matrix:
        interf = interf_obj
    if near_val_obj is not None:
        near_val = near_val_obj

    work = np.empty((3, n), dtype=np.float64)
    cdef double[:, ::1] u = work
    txlist_arr = np.empty(n, dtype=np.int64)
    cdef i64[::1] txlist = txlist_arr
    flags = np.zeros((2, n), dtype=np.uint8)
    cdef u8[:, ::1] fl = flags  # fl[0]=is_tx, fl[1]=delivered

    cdef Py_ssize_t i, j, m, mm, ptr
    cdef i64 t, k
    cdef bint measuring
    cdef double near, total, s1, udel, dx, dy, d2, half_alpha = alpha / 2.0
    cdef double halfside = side / 2.0

    for t in range(t0, t0 + nslots):
        measuring = t >= measure_start
        for i in range(n):
            u[0, i] = bg.next_double(bg.state)
        for i in range(n):
            u[1, i] = bg.next_double(bg.state)
        for i in range(n):
            u[2, i] = bg.next_double(bg.state)

        # arrivals (replacement), busy census, ALOHA gating
        k = 0
        for i in range(n):
            if u[0, i] < xi:
                buf[i] = 1
                gen[i] = t
            if buf[i]:
                frame_busy[i] += 1
                if measuring:
                    busy_cnt[i] += 1
                if u[1, i] < eta[i]:
                    fl[0, i] = 1
                    txlist[k] = i
                    k += 1
                    if measuring:
                        attempt_cnt[i] += 1

        # deliveries: stage-1 near bound, then exact full interference sum
        for m in range(k):
            i = txlist[m]
            udel = u[2, i]
            near = 0.0
            if use_matrix:
                for ptr in range(near_indptr[i], near_indptr[i + 1]):
                    j = near_idx[ptr]
                    if fl[0, j]:
                        near += interf[i, j]
            else:
                for ptr in range(near_indptr[i], near_indptr[i + 1]):
                    j = near_idx[ptr]
                    if fl[0, j]:
                        near += near_val[ptr]
            s1 = exp(-c0 - near)
            if udel >= s1:
                continue
            total = 0.0
            if use_matrix:
                for mm in range(k):
                    total += interf[i, txlist[mm]]
                total -= interf[i, i]
            else:
                for mm in range(k):
                    j = txlist[mm]
                    if j == i:
                        continue
                    dx = txx[j] - rxx[i]
                    if dx < 0.0:
                        dx = -dx
                    dy = txy[j] - rxy[i]
                    if dy < 0.0:
                        dy = -dy
                    if torus:
                        if dx > halfside:
                            dx = side - dx
                        if dy > halfside:
                            dy = side - dy
                    d2 = dx * dx + dy * dy
                    total += log1p(theta_r_alpha * pow(d2, -half_alpha))
            if udel < exp(-c0 - total):
                fl[1, i] = 1

        # age accumulation and end-of-slot AoI recursion
        for i in range(n):
            if measuring:
                age_sum[i] += aoi[i]
            if fl[1, i]:
                if measuring:
                    peak_sum[i] += aoi[i]
                    deliver_cnt[i] += 1
                aoi[i] = t - gen[i] + 1
                buf[i] = 0
                fl[1, i] = 0
            else:
                aoi[i] += 1
            fl[0, i] = 0
    return None


def queue_oracle_run(object capsule, i64 nslots, i64 measure_start,
                     double xi, double s):
    """Single isolated LCFS-with-replacement queue with Bernoulli(s) service.

    Returns (age_sum, busy, attempts, deliveries, peak_sum, slots_measured).
    Two uniforms are drawn per slot (arrival, service) in fixed order.
    """
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
    cdef i64 t, gen = 0, aoi = 1
    cdef u8 buf = 0
    cdef i64 age_sum = 0, busy = 0, attempts = 0, deliveries = 0, peak_sum = 0
    cdef i64 measured = 0
    cdef double ua, us
    cdef bint measuring, delivered

    for t in range(nslots):
        measuring = t >= measure_start
        ua = bg.next_double(bg.state)
        us = bg.next_double(bg.state)
        delivered = False
        if ua < xi:
            buf = 1
            gen = t
        if buf:
            if measuring:
                busy += 1
                attempts += 1
            if us < s:
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
