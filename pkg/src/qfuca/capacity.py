"""Spectral efficiency and layout efficiency.

Each mode carries rate log2(1 + |v|^2 * P / sigma2) with |v| its equivalent
channel gain, P its allocated power, and sigma2 the noise variance; the
spectral efficiency (SE) is the sum over all modes, and the efficiency of
the array-element layout (EOAL) is SE per physical element under uniform
power allocation.

The system SNR knob is calibrated at the receiver input: sigma2 is set so
that total-received-power-per-element / noise-per-element equals the
requested SNR at a reference axial distance (uniform excitation at distance
D puts roughly P_total * (beta*lambda/4piD)^2 on each receive element).  The
calibration stays pinned to the reference distance during distance sweeps so
propagation loss shows up in the rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .channel import ChannelParams

__all__ = [
    "SeReport",
    "uniform_power_allocation",
    "sigma2_for_snr",
    "spectral_efficiency",
    "eoal",
    "mode_tuples",
]


def mode_tuples(dims: Sequence[int]) -> list[tuple[int, ...]]:
    """Mode index tuples (l_N, ..., l_1) in flat order (outermost slowest)."""
    dims = tuple(dims)
    shape = tuple(reversed(dims))
    return [tuple(int(x) for x in np.unravel_index(f, shape))
            for f in range(math.prod(dims))]


def uniform_power_allocation(total_power: float, n_modes: int) -> np.ndarray:
    """Split the power budget evenly; the sum of the result is exact."""
    if total_power < 0:
        raise ValueError("total power must be >= 0")
    if n_modes < 1:
        raise ValueError("need at least one mode")
    return np.full(n_modes, total_power / n_modes)


def sigma2_for_snr(snr_db: float, params: ChannelParams, total_power: float = 1.0,
                   ref_distance: Optional[float] = None) -> float:
    """Noise variance realizing the requested receiver-input SNR."""
    if total_power <= 0:
        raise ValueError("total power must be positive")
    d = params.distance if ref_distance is None else ref_distance
    g = params.beta * params.wavelength / (4.0 * math.pi * d)
    return total_power * g * g / (10.0 ** (snr_db / 10.0))


@dataclass(frozen=True)
class SeReport:
    """Per-mode rates plus the totals.

    `gains` are |v| per mode; dead modes carry zero rate by construction
    (zero gain).  `eoal` is present when the element count is known.
    """

    dims: tuple[int, ...]
    gains: np.ndarray
    powers: np.ndarray
    sigma2: np.ndarray
    snr: np.ndarray
    rates: np.ndarray
    se_total: float
    n_elements: Optional[int] = None

    @property
    def eoal(self) -> Optional[float]:
        if self.n_elements is None:
            return None
        return self.se_total / self.n_elements

    def rows(self) -> Iterable[tuple]:
        for tup, g, p, s2, snr, rate in zip(mode_tuples(self.dims), self.gains,
                                            self.powers, self.sigma2,
                                            self.snr, self.rates):
            yield tup, float(g), float(p), float(s2), float(snr), float(rate)

    def to_csv(self, path: str | Path) -> None:
        lines = ["mode,gain,power_w,sigma2_w,snr,rate_bits_per_hz"]
        for tup, g, p, s2, snr, rate in self.rows():
            mode = "|".join(str(x) for x in tup)
            lines.append(f"{mode},{g:.12g},{p:.12g},{s2:.12g},{snr:.12g},{rate:.12g}")
        lines.append(f"TOTAL,,,,,{self.se_total:.12g}")
        if self.n_elements is not None:
            lines.append(f"EOAL({self.n_elements} elements),,,,,{self.eoal:.12g}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def spectral_efficiency(gains: np.ndarray, powers: np.ndarray,
                        sigma2: float | np.ndarray,
                        dims: Optional[Sequence[int]] = None,
                        n_elements: Optional[int] = None) -> SeReport:
    """Sum-rate over modes.

    `sigma2` is a single noise variance by default; a per-mode vector is
    accepted for noise-propagation analyses.  A zero variance is only legal
    when every mode with power has zero gain.
    """
    gains = np.asarray(gains, dtype=float)
    powers = np.asarray(powers, dtype=float)
    if gains.shape != powers.shape:
        raise ValueError("gains and powers must have equal length")
    if np.any(powers < 0):
        raise ValueError("powers must be >= 0")
    s2 = np.broadcast_to(np.asarray(sigma2, dtype=float), gains.shape).copy()
    live = (gains > 0) & (powers > 0)
    if np.any(s2[live] <= 0):
        raise ValueError("noise variance must be positive for live modes")
    snr = np.zeros_like(gains)
    snr[live] = gains[live] ** 2 * powers[live] / s2[live]
    rates = np.log2(1.0 + snr)
    if dims is None:
        dims = (len(gains),)
    return SeReport(dims=tuple(int(k) for k in dims), gains=gains, powers=powers,
                    sigma2=s2, snr=snr, rates=rates,
                    se_total=float(rates.sum()), n_elements=n_elements)


def eoal(se_total: float, n_elements: int) -> float:
    """Average spectral efficiency per physical array element."""
    if n_elements < 1:
        raise ValueError("element count must be >= 1")
    return se_total / n_elements
