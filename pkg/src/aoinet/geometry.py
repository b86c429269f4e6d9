"""Poisson bipolar topologies on a square region with wrap-around metric."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .params import ParamError, Region, SystemParams

__all__ = [
    "BipolarTopology",
    "StoppingSet",
    "sample_bipolar",
    "torus_distance",
    "torus_distance_matrix",
    "neighbors_in",
    "save_topology_csv",
    "load_topology_csv",
]


@dataclass(frozen=True)
class BipolarTopology:
    """One static realization of transmitter/receiver positions.

    ``tx`` and ``rx`` are (n, 2) float arrays; ``rx[i]`` sits at torus
    distance ``r`` from ``tx[i]`` in a uniformly random direction.
    """

    tx: np.ndarray
    rx: np.ndarray
    region: Region
    r: float

    def __post_init__(self) -> None:
        if self.tx.shape != self.rx.shape or self.tx.ndim != 2 or self.tx.shape[1] != 2:
            raise ParamError("tx and rx must both be (n, 2) arrays")

    @property
    def n(self) -> int:
        return self.tx.shape[0]


@dataclass(frozen=True)
class StoppingSet:
    """Disk-shaped local observation window centered at a point."""

    center: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise ParamError(f"radius must be nonnegative, got {self.radius}")


def sample_bipolar(params: SystemParams, region: Region, seed: int) -> BipolarTopology:
    """Sample transmitter positions as a Poisson process and attach receivers.

    The node count is Poisson(lam * area); positions are i.i.d. uniform.
    Transmitter positions are drawn before receiver angles on a single
    stream, so the transmitter layout for a given seed does not depend on
    how receivers are placed.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    n = rng.poisson(params.lam * region.area)
    tx = rng.random((n, 2)) * region.side
    angles = rng.random(n) * (2.0 * np.pi)
    offset = np.column_stack((np.cos(angles), np.sin(angles))) * params.r
    rx = tx + offset
    if region.boundary == "torus":
        rx = np.mod(rx, region.side)
    return BipolarTopology(tx=tx, rx=rx, region=region, r=params.r)


def torus_distance(a, b, region: Region) -> float | np.ndarray:
    """Minimum image-convention distance between points ``a`` and ``b``.

    Falls back to the plain Euclidean distance for open-boundary regions.
    Accepts single points or broadcastable arrays of shape (..., 2).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = np.abs(a - b)
    if region.boundary == "torus":
        d = np.minimum(d, region.side - d)
    out = np.sqrt((d * d).sum(axis=-1))
    return float(out) if out.ndim == 0 else out


def torus_distance_matrix(points_a: np.ndarray, points_b: np.ndarray,
                          region: Region, block: int = 256) -> np.ndarray:
    """All-pairs distances, computed in row blocks to bound peak memory."""
    na = points_a.shape[0]
    out = np.empty((na, points_b.shape[0]), dtype=np.float64)
    for start in range(0, na, block):
        stop = min(start + block, na)
        dx = np.abs(points_a[start:stop, None, 0] - points_b[None, :, 0])
        dy = np.abs(points_a[start:stop, None, 1] - points_b[None, :, 1])
        if region.boundary == "torus":
            np.minimum(dx, region.side - dx, out=dx)
            np.minimum(dy, region.side - dy, out=dy)
        out[start:stop] = np.sqrt(dx * dx + dy * dy)
    return out


def neighbors_in(window: StoppingSet, topo: BipolarTopology, self_index: int,
                 point: str = "rx") -> np.ndarray:
    """Indices of links whose receiver (or transmitter) lies in the window.

    ``point='rx'`` selects links j != self_index with receiver inside the
    torus disk (the set summed over when solving for the access
    probability); ``point='tx'`` selects interfering transmitters instead.
    """
    pts = topo.rx if point == "rx" else topo.tx
    d = torus_distance(window.center[None, :], pts, topo.region)
    idx = np.flatnonzero(d <= window.radius)
    return idx[idx != self_index]


def build_neighbor_csr(centers: np.ndarray, points: np.ndarray, radius: float,
                       region: Region) -> tuple[np.ndarray, np.ndarray]:
    """CSR lists of ``points`` within ``radius`` of each center (self excluded).

    Returns (indptr, indices) with indices sorted ascending within each
    row. Uses a KD-tree with periodic boundaries for torus regions.
    """
    n = centers.shape[0]
    if n == 0 or radius <= 0:
        return np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    boxsize = region.side if region.boundary == "torus" else None
    radius = min(radius, region.side / 2.0 * 0.999999) if boxsize else radius
    tree = cKDTree(np.mod(points, region.side) if boxsize else points, boxsize=boxsize)
    lists = tree.query_ball_point(np.mod(centers, region.side) if boxsize else centers,
                                  radius)
    indptr = np.zeros(n + 1, dtype=np.int64)
    chunks = []
    for i, lst in enumerate(lists):
        arr = np.asarray([j for j in lst if j != i], dtype=np.int64)
        arr.sort()
        chunks.append(arr)
        indptr[i + 1] = indptr[i] + arr.size
    indices = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
    return indptr, indices


def save_topology_csv(topo: BipolarTopology, path: str | Path) -> None:
    """Write links as (id, tx_x, tx_y, rx_x, rx_y) rows for later replay."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# aoinet-topology v1 side={topo.region.side!r} "
                 f"boundary={topo.region.boundary} r={topo.r!r}\n")
        writer = csv.writer(fh)
        writer.writerow(["id", "tx_x", "tx_y", "rx_x", "rx_y"])
        for i in range(topo.n):
            writer.writerow([i, repr(float(topo.tx[i, 0])), repr(float(topo.tx[i, 1])),
                             repr(float(topo.rx[i, 0])), repr(float(topo.rx[i, 1]))])


def load_topology_csv(path: str | Path) -> BipolarTopology:
    with open(path, newline="") as fh:
        header = fh.readline()
        if not header.startswith("# aoinet-topology v1"):
            raise ParamError(f"{path}: not an aoinet topology file")
        meta = dict(tok.split("=", 1) for tok in header.split() if "=" in tok)
        reader = csv.reader(fh)
        next(reader)  # column header
        rows = [[float(v) for v in row[1:]] for row in reader if row]
    arr = np.asarray(rows, dtype=float).reshape(-1, 4)
    region = Region(side=float(meta["side"]), boundary=meta["boundary"])
    return BipolarTopology(tx=arr[:, 0:2].copy(), rx=arr[:, 2:4].copy(),
                           region=region, r=float(meta["r"]))
