"""Free-space line-of-sight channel between two aligned QF-UCA arrays.

Transmit and receive arrays are identical, coplanar at each end, facing each
other across an axial distance D.  The complex gain between a transmit
element at planar point p_t and a receive element at p_r is

    h = (beta * lambda / 4pi) * exp(-2j*pi*d/lambda) / d,

with d the element-to-element distance.  Three distance models are offered:

* ``exact``      sqrt(D^2 + |p_r - p_t|^2); the physical default.
* ``approx``     the first-order far-field expansion, kept verbatim in the
                 form with all-positive cross-level cosine terms (whose signs
                 disagree with the planar dot-product expansion; see
                 `approx_distance`).  Valid for validation when D >> R.
* ``separable``  the same expansion with the cross-level terms dropped.  The
                 per-level phase contributions then factor, which makes the
                 channel matrix exactly block-circulant at every nesting
                 level - the idealized regime in which DFT demodulation is
                 exact.  At meter-scale apertures and centimeter wavelengths
                 the exact channel is far from block-circulant (the link sits
                 inside the Rayleigh range), so this model is what reproduces
                 the idealized multiplexing behavior.

The channel matrix is indexed by logical (not physical) element indices,
rows = receive, columns = transmit, outermost level slowest; coincident
physical elements simply produce identical rows/columns, which models a
shared element radiating the sum of its logical feeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .geometry import DimensionSpec, all_positions, position_of
from .transforms import idft_matrix

__all__ = [
    "SPEED_OF_LIGHT",
    "ChannelParams",
    "DistanceModel",
    "exact_distance",
    "approx_distance",
    "element_gain",
    "assemble_H",
    "circulant_deviation",
    "block_diagonalize",
    "export_channel_csv",
]

SPEED_OF_LIGHT = 299_792_458.0

DistanceModel = Literal["exact", "approx", "separable"]


@dataclass(frozen=True)
class ChannelParams:
    """Physical link constants: wavelength (m), gain constant beta, axial
    transmitter-receiver distance D (m)."""

    wavelength: float
    beta: float = 1.0
    distance: float = 100.0

    def __post_init__(self) -> None:
        if self.wavelength <= 0 or self.beta <= 0 or self.distance <= 0:
            raise ValueError("wavelength, beta, and distance must be positive")

    @classmethod
    def from_frequency(cls, frequency_hz: float, beta: float = 1.0,
                       distance: float = 100.0) -> "ChannelParams":
        if frequency_hz <= 0:
            raise ValueError("frequency must be positive")
        return cls(wavelength=SPEED_OF_LIGHT / frequency_hz, beta=beta,
                   distance=distance)


def exact_distance(p_t: Sequence[float], p_r: Sequence[float], axial: float) -> float:
    """Euclidean distance between elements on planes `axial` meters apart."""
    if axial <= 0:
        raise ValueError("axial distance must be positive")
    p_t = np.asarray(p_t, dtype=float)
    p_r = np.asarray(p_r, dtype=float)
    return float(math.sqrt(axial * axial + float(np.sum((p_r - p_t) ** 2))))


def _angles_and_radii(spec: DimensionSpec, idx: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    spec._check_index(idx)
    n = spec.n_levels
    ang = np.array([2.0 * math.pi * idx[j] / spec.cells[n - 1 - j] for j in range(n)])
    rad = np.array([spec.radii[n - 1 - j] for j in range(n)])
    return ang, rad  # ordered outermost level first


def approx_distance(spec: DimensionSpec, idx_t: Sequence[int], idx_r: Sequence[int],
                    axial: float, cross_terms: bool = True) -> float:
    """First-order expansion of the element distance in 1/D.

    The per-level (diagonal) terms are R_n^2 (1 - cos(theta_n - phi_n)) / D.
    With `cross_terms` the cross-level sum R_i R_j (cos(theta_i - theta_j)
    + cos(phi_i - phi_j) + cos(theta_i - phi_j) + cos(phi_i - theta_j)) / D is
    added in exactly this all-positive form, although the planar dot-product
    expansion yields alternating signs (cos(ti-tj) - cos(ti-pj) - cos(pi-tj)
    + cos(pi-pj)); the discrepancy only matters for multi-level arrays, and
    the exact model is authoritative.  `cross_terms=False` gives the
    separable model.
    """
    if axial <= 0:
        raise ValueError("axial distance must be positive")
    phi, rad = _angles_and_radii(spec, idx_t)
    theta, _ = _angles_and_radii(spec, idx_r)
    d = axial + float(np.sum(rad ** 2 * (1.0 - np.cos(theta - phi)))) / axial
    if cross_terms:
        n = spec.n_levels
        acc = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                acc += rad[i] * rad[j] * (
                    math.cos(theta[i] - theta[j]) + math.cos(phi[i] - phi[j])
                    + math.cos(theta[i] - phi[j]) + math.cos(phi[i] - theta[j]))
        d += acc / axial
    return d


def element_gain(distance: float | np.ndarray, params: ChannelParams) -> complex | np.ndarray:
    """Complex free-space gain at the given element-to-element distance."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    g = (params.beta * params.wavelength / (4.0 * np.pi)) \
        * np.exp(-2j * np.pi * d / params.wavelength) / d
    return complex(g) if np.isscalar(distance) else g


def _distance_matrix(spec: DimensionSpec, axial: float,
                     distance_model: DistanceModel) -> np.ndarray:
    if distance_model == "exact":
        pts = all_positions(spec)
        dx = pts[:, 0][None, :] - pts[:, 0][:, None]
        dy = pts[:, 1][None, :] - pts[:, 1][:, None]
        return np.sqrt(axial * axial + dx * dx + dy * dy)
    if distance_model not in ("approx", "separable"):
        raise ValueError(f"unknown distance model {distance_model!r}")
    n = spec.n_levels
    # per-level azimuths for every flat index, outermost level first
    shape = tuple(reversed(spec.cells))
    ang = np.empty((spec.n_modes, n))
    for j in range(n):
        lev = n - 1 - j
        a = 2.0 * math.pi * np.arange(spec.cells[lev]) / spec.cells[lev]
        sl = [None] * n
        sl[j] = slice(None)
        ang[:, j] = np.broadcast_to(a[tuple(sl)], shape).reshape(-1)
    rad = np.array([spec.radii[n - 1 - j] for j in range(n)])
    theta = ang[:, None, :]   # receive rows
    phi = ang[None, :, :]     # transmit columns
    d = axial + (rad ** 2 * (1.0 - np.cos(theta - phi))).sum(axis=2) / axial
    if distance_model == "approx":
        for i in range(n):
            for j in range(i + 1, n):
                d += rad[i] * rad[j] * (
                    np.cos(theta[:, :, i] - theta[:, :, j])
                    + np.cos(phi[:, :, i] - phi[:, :, j])
                    + np.cos(theta[:, :, i] - phi[:, :, j])
                    + np.cos(phi[:, :, i] - theta[:, :, j])) / axial
    return d


def assemble_H(spec: DimensionSpec, params: ChannelParams,
               distance_model: DistanceModel = "exact") -> np.ndarray:
    """Channel matrix over logical indices (rows receive, columns transmit)."""
    d = _distance_matrix(spec, params.distance, distance_model)
    return element_gain(d, params)


def circulant_deviation(h: np.ndarray, n_blocks: int) -> float:
    """Relative Frobenius distance from the nearest block-circulant matrix.

    The matrix is read as an n_blocks x n_blocks grid of equal square blocks;
    the nearest block-circulant structure averages the blocks along each
    cyclic diagonal.  Returns 0 for exactly block-circulant input.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("matrix must be square")
    if h.shape[0] % n_blocks:
        raise ValueError("block count must divide the matrix order")
    m = h.shape[0] // n_blocks
    blocks = h.reshape(n_blocks, m, n_blocks, m).transpose(0, 2, 1, 3)
    mean = np.zeros((n_blocks, m, m), dtype=complex)
    for v in range(n_blocks):
        for k in range(n_blocks):
            mean[(k - v) % n_blocks] += blocks[v, k]
    mean /= n_blocks
    nearest = np.empty_like(blocks)
    for v in range(n_blocks):
        for k in range(n_blocks):
            nearest[v, k] = mean[(k - v) % n_blocks]
    num = np.linalg.norm(blocks - nearest)
    den = np.linalg.norm(h)
    return float(num / den) if den > 0 else 0.0


def block_diagonalize(h: np.ndarray, n_blocks: int) -> tuple[list[np.ndarray], float]:
    """Conjugate the channel by the top-level block DFT and split it.

    Computes G = (F (x) I)^H @ H @ (F (x) I) with F the unitary inverse DFT of
    order `n_blocks`, returns the list of diagonal blocks of G and the
    leakage, i.e. the relative Frobenius norm of G's off-diagonal-block part.
    For an exactly block-circulant H the leakage vanishes and block q equals
    the DFT combination sum_m B_m exp(2j*pi*m*q/n_blocks) of the first block
    row B_m.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("matrix must be square")
    if h.shape[0] % n_blocks:
        raise ValueError("block count must divide the matrix order")
    m = h.shape[0] // n_blocks
    f = idft_matrix(n_blocks)
    # contract the block DFT on the block axes only: O(K^3 m^2) instead of M^3
    t = h.reshape(n_blocks, m, n_blocks, m)
    g = np.einsum("vp,vakb,kq->paqb", f.conj(), t, f, optimize=True)
    diag = [np.ascontiguousarray(g[q, :, q, :]) for q in range(n_blocks)]
    off = g.copy()
    for q in range(n_blocks):
        off[q, :, q, :] = 0.0
    total = np.linalg.norm(g)
    leakage = float(np.linalg.norm(off) / total) if total > 0 else 0.0
    return diag, leakage


def export_channel_csv(h: np.ndarray, path: str | Path) -> None:
    """Dump a channel matrix as CSV rows (row, col, re, im)."""
    h = np.asarray(h)
    lines = ["row,col,re,im"]
    for v in range(h.shape[0]):
        for k in range(h.shape[1]):
            lines.append(f"{v},{k},{h[v, k].real:.17g},{h[v, k].imag:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
