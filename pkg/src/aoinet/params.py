"""Model constants, unit conversions, and derived quantities.

All internal computation uses linear units (mW for powers, linear SINR
threshold). dB / dBm values are accepted only at the configuration
boundary and converted on the way in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from scipy.integrate import quad

__all__ = [
    "SystemParams",
    "DerivedParams",
    "Region",
    "ParamError",
    "derive",
    "interference_scale_integral",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_mw",
    "mw_to_dbm",
    "parse_config",
    "params_from_config",
    "region_from_config",
    "DEFAULTS",
]


class ParamError(ValueError):
    """Raised when a parameter violates its validity range."""


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_mw(x_dbm: float) -> float:
    return 10.0 ** (x_dbm / 10.0)


def mw_to_dbm(x_mw: float) -> float:
    return 10.0 * math.log10(x_mw)


@dataclass(frozen=True)
class SystemParams:
    """Physical and protocol constants of the random-access network.

    Attributes
    ----------
    lam : float
        Spatial density of transmitters (nodes per m^2).
    r : float
        Transmitter-receiver link distance (m).
    alpha : float
        Path-loss exponent, must exceed 2.
    theta : float
        SINR decoding threshold (linear).
    p : float
        Slotted-ALOHA channel access probability, in (0, 1].
    xi : float
        Packet arrival probability per slot, in (0, 1].
    ptx : float
        Transmit power (mW).
    sigma2 : float
        Noise power (mW).
    """

    lam: float
    r: float
    alpha: float
    theta: float
    p: float
    xi: float
    ptx: float
    sigma2: float

    def __post_init__(self) -> None:
        if not self.alpha > 2.0:
            raise ParamError(
                f"alpha must exceed 2 (interference scale integral diverges), got {self.alpha}"
            )
        if not 0.0 < self.xi <= 1.0:
            raise ParamError(f"xi must lie in (0, 1], got {self.xi}")
        if not 0.0 < self.p <= 1.0:
            raise ParamError(f"p must lie in (0, 1], got {self.p}")
        if not self.theta > 0.0:
            raise ParamError(f"theta must be positive, got {self.theta}")
        if not self.r > 0.0:
            raise ParamError(f"r must be positive, got {self.r}")
        if self.lam < 0.0:
            raise ParamError(f"lam must be nonnegative, got {self.lam}")
        if not self.ptx > 0.0:
            raise ParamError(f"ptx must be positive, got {self.ptx}")
        if not self.sigma2 >= 0.0:
            raise ParamError(f"sigma2 must be nonnegative, got {self.sigma2}")

    def replace(self, **kwargs) -> "SystemParams":
        fields = {k: getattr(self, k) for k in
                  ("lam", "r", "alpha", "theta", "p", "xi", "ptx", "sigma2")}
        fields.update(kwargs)
        return SystemParams(**fields)


@dataclass(frozen=True)
class DerivedParams:
    """Quantities derived from :class:`SystemParams`.

    ``rho`` is the SNR ptx/sigma2, ``delta`` is 2/alpha, and ``c_alpha``
    is the interference scale integral int_0^inf dv / (1 + v^(alpha/2)).
    """

    rho: float
    delta: float
    c_alpha: float


@dataclass(frozen=True)
class Region:
    """Square deployment region, optionally with wrap-around boundaries."""

    side: float
    boundary: str = "torus"

    def __post_init__(self) -> None:
        if not self.side > 0.0:
            raise ParamError(f"side must be positive, got {self.side}")
        if self.boundary not in ("torus", "open"):
            raise ParamError(f"boundary must be 'torus' or 'open', got {self.boundary!r}")

    @property
    def area(self) -> float:
        return self.side * self.side


def interference_scale_integral(alpha: float) -> float:
    """Compute int_0^inf dv / (1 + v^(alpha/2)) by adaptive quadrature.

    Diverges for alpha <= 2; equals (2*pi/alpha)/sin(2*pi/alpha) in
    closed form, which the test suite uses as an independent check.
    """
    if not alpha > 2.0:
        raise ParamError(f"integral diverges for alpha <= 2, got alpha={alpha}")
    half = alpha / 2.0
    # head on [0, 1] plus tail substituted with w = v^(-alpha/2), which
    # turns the slow algebraic decay into an integrable endpoint singularity
    head, _ = quad(lambda v: 1.0 / (1.0 + v**half), 0.0, 1.0,
                   epsabs=1e-14, epsrel=1e-14, limit=200)
    tail, _ = quad(lambda w: w ** (-2.0 / alpha) / (1.0 + w), 0.0, 1.0,
                   epsabs=1e-14, epsrel=1e-14, limit=200)
    return head + (2.0 / alpha) * tail


def derive(params: SystemParams) -> DerivedParams:
    """Derive SNR, the 2/alpha exponent, and the interference scale integral."""
    return DerivedParams(
        rho=params.ptx / params.sigma2,
        delta=2.0 / params.alpha,
        c_alpha=interference_scale_integral(params.alpha),
    )


def noise_exponent(params: SystemParams) -> float:
    """theta * r^alpha / rho, the noise term in every success-probability exponent."""
    return params.theta * params.r**params.alpha * params.sigma2 / params.ptx


# Baseline configuration: alpha=3.8, theta=0 dB, ptx=17 dBm, sigma2=-90 dBm,
# frame length 200 slots, desk-scale 200 m square region.
DEFAULTS: dict = {
    "lam": 1e-2,
    "r": 0.5,
    "alpha": 3.8,
    "theta_db": 0.0,
    "p": 1.0,
    "xi": 0.5,
    "ptx_dbm": 17.0,
    "sigma2_dbm": -90.0,
    "side": 200.0,
    "boundary": "torus",
    "slots": 10_000,
    "warmup": None,  # defaults to 10% of slots downstream
    "frame_len": 200,
    "window_radius": 20.0,
}


def _coerce(token: str):
    token = token.strip()
    low = token.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        v = float(token)
    except ValueError:
        return token
    if v == int(v) and ("." not in token and "e" not in low):
        return int(token)
    return v


def parse_config(path: str | Path) -> dict:
    """Parse a flat ``key = value`` config file.

    Lines starting with '#' are comments. Comma-separated values parse to
    lists (used for sweep grids). Numbers become int/float, ``true`` /
    ``false`` become booleans, everything else stays a string.
    """
    out: dict = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParamError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if "," in value:
            out[key] = [_coerce(tok) for tok in value.split(",") if tok.strip()]
        else:
            out[key] = _coerce(value)
    return out


def params_from_config(cfg: dict) -> SystemParams:
    """Build :class:`SystemParams` from a config dict, applying defaults.

    Power/threshold keys may be given either in linear units (``theta``,
    ``ptx_mw``, ``sigma2_mw``) or in dB/dBm (``theta_db``, ``ptx_dbm``,
    ``sigma2_dbm``); the dB forms win if both are present.
    """
    merged = {**DEFAULTS, **cfg}
    if "lambda" in cfg:
        merged["lam"] = cfg["lambda"]
    theta = merged.get("theta")
    if "theta_db" in cfg or theta is None:
        theta = db_to_linear(merged["theta_db"])
    ptx = merged.get("ptx_mw")
    if "ptx_dbm" in cfg or ptx is None:
        ptx = dbm_to_mw(merged["ptx_dbm"])
    sigma2 = merged.get("sigma2_mw")
    if "sigma2_dbm" in cfg or sigma2 is None:
        sigma2 = dbm_to_mw(merged["sigma2_dbm"])
    return SystemParams(
        lam=float(merged["lam"]),
        r=float(merged["r"]),
        alpha=float(merged["alpha"]),
        theta=float(theta),
        p=float(merged["p"]),
        xi=float(merged["xi"]),
        ptx=float(ptx),
        sigma2=float(sigma2),
    )


def region_from_config(cfg: dict) -> Region:
    merged = {**DEFAULTS, **cfg}
    return Region(side=float(merged["side"]), boundary=str(merged["boundary"]))
