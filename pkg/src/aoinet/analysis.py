"""Closed-form and semi-analytical AoI quantities.

Queue-level conditional results (average AoI, peak AoI, buffer occupancy
as functions of the arrival rate, access probability, and per-attempt
success probability), the network average AoI obtained by deconditioning
over the success-probability law, the peak-AoI outage probability via
monotone inversion, and the sparse/dense regime formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metadist import MetaDistribution
from .params import DerivedParams, ParamError, SystemParams, noise_exponent

__all__ = [
    "AoiReport",
    "cond_avg_aoi",
    "cond_peak_aoi",
    "buffer_nonempty",
    "network_avg_aoi",
    "peak_outage",
    "PeakOutageResult",
    "favorable_bound",
    "density_threshold",
    "optimal_access_probability",
    "noise_limited_avg_aoi",
    "regime_results",
    "lambert_w0",
]


def _check_rates(xi: float, p: float, mu: float) -> None:
    if not 0.0 < xi <= 1.0:
        raise ParamError(f"xi must lie in (0, 1], got {xi}")
    if not 0.0 < p * mu <= 1.0:
        raise ParamError(f"p*mu must lie in (0, 1], got {p * mu}")


def cond_avg_aoi(xi: float, p: float, mu: float) -> float:
    """Average AoI of one link with departure rate p*mu: 1/xi + 1/(p mu) - 1."""
    _check_rates(xi, p, mu)
    return 1.0 / xi + 1.0 / (p * mu) - 1.0


def cond_peak_aoi(xi: float, p: float, mu: float) -> float:
    """Mean peak AoI of one link:
    1/xi + 1/(p mu) + 1/(1 - (1-xi)(1-p mu)) - 2."""
    _check_rates(xi, p, mu)
    y = p * mu
    return 1.0 / xi + 1.0 / y + 1.0 / (1.0 - (1.0 - xi) * (1.0 - y)) - 2.0


def buffer_nonempty(xi: float, p: float, mu: float) -> float:
    """Stationary buffer non-empty probability xi / (xi + (1-xi) p mu)."""
    if not 0.0 < xi <= 1.0:
        raise ParamError(f"xi must lie in (0, 1], got {xi}")
    if not 0.0 <= p * mu <= 1.0:
        raise ParamError(f"p*mu must lie in [0, 1], got {p * mu}")
    return xi / (xi + (1.0 - xi) * p * mu)


def network_avg_aoi(dist: MetaDistribution, xi: float, p: float, *,
                    eps: float | None = None) -> float:
    """Network average AoI 1/xi - 1 + E[1/(p T)] under the success law.

    For a Beta law the mean inverse is (a+b-1)/(a-1), finite only when the
    lower shape parameter a = kappa*beta/(1-kappa) exceeds 1; a divergent
    integral returns +inf (the links near the origin singularity dominate).
    ``eps`` optionally censors the law below a cutoff and integrates over
    t >= eps instead of flagging divergence (sensitivity analysis aid).
    """
    base = 1.0 / xi - 1.0
    if dist.kind == "point":
        return base + 1.0 / (p * dist.t0)
    if dist.kind == "beta" and eps is None:
        a, b = dist.shape_a, dist.shape_b
        if a <= 1.0:
            return math.inf
        return base + (a + b - 1.0) / (a - 1.0) / p
    t, w = dist.masses(2048)
    if eps is not None:
        keep = t >= eps
        t, w = t[keep], w[keep]
        total = w.sum()
        if total <= 0:
            return math.inf
        w = w / total
    elif dist.kind == "tabulated" and float(dist.cdf(1e-9)) > 0:
        return math.inf
    return base + float((w / t).sum()) / p


def _peak_excess(y: float, xi: float, c: float) -> float:
    """g(y) - c with y = p*mu: the conditional mean peak AoI exceeds the
    threshold iff this is positive (strictly decreasing in y)."""
    return 1.0 / y + 1.0 / (xi + (1.0 - xi) * y) - c


@dataclass(frozen=True)
class PeakOutageResult:
    probability: float
    mu_threshold: float
    c: float
    residual: float
    candidate_roots: dict


def peak_outage(a_threshold: float, dist: MetaDistribution, xi: float, p: float,
                *, tol: float = 1e-14, return_details: bool = False):
    """P(conditional mean peak AoI exceeds ``a_threshold``).

    The peak expression is strictly decreasing in mu, so the event is
    {mu < mu_th} where g(mu_th) = c = A + 2 - 1/xi; mu_th comes from
    bisection on (0, 1] (the printed closed-form discriminant disagrees
    with its own derivation, so the root is found by inversion and the
    closed-form candidates are only reported in the diagnostics).
    """
    if a_threshold <= 0:
        raise ParamError(f"a_threshold must be positive, got {a_threshold}")
    if not 0.0 < xi <= 1.0 or not 0.0 < p <= 1.0:
        raise ParamError("xi and p must lie in (0, 1]")
    c = a_threshold + 2.0 - 1.0 / xi

    # candidate closed forms, recorded for diagnostics only
    roots: dict = {"printed": math.nan, "derived": math.nan}
    if c > 0 and xi < 1.0:
        disc_printed = xi**2 * c**2 + 4 * xi * c + 2 * xi**2 * c - 3 * xi**2
        if disc_printed >= 0:
            roots["printed"] = (-xi * (1 + c) + math.sqrt(disc_printed)) / (
                2 * c * (1 - xi) * p)
        disc_derived = (c * xi + xi - 2.0) ** 2 + 4 * c * (1 - xi) * xi
        roots["derived"] = (-(c * xi + xi - 2.0) + math.sqrt(disc_derived)) / (
            2 * c * (1 - xi)) / p
    elif c > 0 and xi == 1.0:
        roots["derived"] = 1.0 / ((c - 1.0) * p) if c > 1.0 else math.inf

    if c <= 0 or _peak_excess(p, xi, c) >= 0.0:
        # even a perfect link (mu = 1) exceeds the threshold
        result = PeakOutageResult(probability=1.0, mu_threshold=1.0, c=c,
                                  residual=_peak_excess(p, xi, c) if c > 0 else math.inf,
                                  candidate_roots=roots)
        return result if return_details else result.probability

    lo, hi = 0.0, 1.0  # g(0+) = +inf > 0, g(1) < 0: bracketed
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _peak_excess(p * mid, xi, c) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * max(1.0, hi):
            break
    mu_th = 0.5 * (lo + hi)
    # Newton polish to drive the substitution residual to rounding level
    for _ in range(4):
        y = p * mu_th
        g = _peak_excess(y, xi, c)
        dg = -1.0 / y**2 - (1.0 - xi) / (xi + (1.0 - xi) * y) ** 2
        step = g / (dg * p)
        mu_new = mu_th - step
        if 0.0 < mu_new <= 1.0:
            mu_th = mu_new
    residual = _peak_excess(p * mu_th, xi, c)
    result = PeakOutageResult(probability=float(dist.cdf(mu_th)),
                              mu_threshold=mu_th, c=c, residual=residual,
                              candidate_roots=roots)
    return result if return_details else result.probability


def lambert_w0(x: float, tol: float = 1e-14, max_iter: int = 100) -> float:
    """Principal Lambert W by Newton iteration: w e^w = x for x >= 0."""
    if x < 0:
        raise ParamError(f"lambert_w0 requires x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    w = math.log1p(x) if x < math.e else math.log(x) - math.log(math.log(x))
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - x
        step = f / (ew * (1.0 + w))
        w -= step
        if abs(step) < tol * max(1.0, abs(w)):
            break
    return w


def favorable_bound(xi: float, p: float, params: SystemParams,
                    derived: DerivedParams) -> float:
    """Z(xi, p) = 1/xi - 1 + exp(lam pi r^2 theta^delta C(alpha) p xi)/p,
    the Jensen lower bound obtained from the single-shot (no-retransmission)
    system."""
    expo = (params.lam * math.pi * params.r**2 * params.theta**derived.delta
            * derived.c_alpha * p * xi)
    return 1.0 / xi - 1.0 + math.exp(expo) / p


def noise_limited_avg_aoi(xi: float, p: float, params: SystemParams) -> float:
    """Sparse-limit network average AoI 1/xi - 1 + exp(theta r^alpha/rho)/p."""
    return 1.0 / xi - 1.0 + math.exp(noise_exponent(params)) / p


def density_threshold(p: float, params: SystemParams,
                      derived: DerivedParams) -> float:
    """lambda_0 = W0(p) / (p pi r^2 theta^delta C(alpha)): above it the
    bound Z is no longer monotone decreasing in xi."""
    return lambert_w0(p) / (p * math.pi * params.r**2
                            * params.theta**derived.delta * derived.c_alpha)


def optimal_access_probability(xi: float, params: SystemParams,
                               derived: DerivedParams) -> float:
    """p* = min(1, 1/(xi lam pi r^2 theta^delta C(alpha))), the minimizer
    of the favorable-system bound Z over p."""
    k = xi * params.lam * math.pi * params.r**2 \
        * params.theta**derived.delta * derived.c_alpha
    if k <= 0:
        return 1.0
    return min(1.0, 1.0 / k)


@dataclass(frozen=True)
class AoiReport:
    """Bundle of regime-level quantities for one parameter point."""

    noise_limited_aoi: float
    bound_z: float
    lambda0: float
    p_star: float
    noise_limited: bool
    density_above_threshold: bool


def regime_results(params: SystemParams, derived: DerivedParams) -> AoiReport:
    """Closed-form regime quantities at the configured (xi, p, lam).

    The noise-limited flag marks parameter points where interference
    inflates the favorable bound by less than 1% over the pure-noise AoI.
    """
    nl = noise_limited_avg_aoi(params.xi, params.p, params)
    z = favorable_bound(params.xi, params.p, params, derived)
    lam0 = density_threshold(params.p, params, derived)
    return AoiReport(
        noise_limited_aoi=nl,
        bound_z=z,
        lambda0=lam0,
        p_star=optimal_access_probability(params.xi, params, derived),
        noise_limited=bool(z <= nl * 1.01),
        density_above_threshold=bool(params.lam > lam0),
    )
