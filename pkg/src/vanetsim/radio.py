"""Friis power chain, log-distance path loss and Nakagami fading."""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

WAVELENGTH_80211 = 0.125   # 2.4 GHz
WAVELENGTH_80211P = 0.0508  # 5.9 GHz


class RadioDomainError(ValueError):
    pass


@dataclass(frozen=True)
class RadioParams:
    """Static radio configuration of one run.

    ``pl_fs_d0`` defaults to the free-space loss at ``d0`` and ``rx_threshold``
    to the unattenuated Friis power at ``range_R``.
    """

    p_tx: float = 0.1
    g_tx: float = 1.0
    g_rx: float = 1.0
    wavelength: float = WAVELENGTH_80211P
    n: float = 2.0
    d0: float = 1.0
    pl_fs_d0: float | None = None
    alpha: float = 1.0
    d_min: float = 1.0
    range_R: float = 200.0
    rx_threshold: float | None = None

    def __post_init__(self):
        for name in ("p_tx", "g_tx", "g_rx", "wavelength", "d0", "d_min", "range_R"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise RadioDomainError(f"{name} must be > 0, got {value!r}")
        if not self.n >= 1:
            raise RadioDomainError(f"path-loss exponent must be >= 1, got {self.n!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise RadioDomainError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        if self.d_min > self.range_R:
            raise RadioDomainError("d_min must not exceed range_R")
        if self.pl_fs_d0 is None:
            object.__setattr__(self, "pl_fs_d0",
                               20.0 * math.log10(4.0 * math.pi * self.d0 / self.wavelength))
        elif self.pl_fs_d0 < 0:
            raise RadioDomainError("pl_fs_d0 must be >= 0")
        if self.rx_threshold is None:
            object.__setattr__(self, "rx_threshold", friis_rx_power(self.range_R, self))
        elif not self.rx_threshold > 0:
            raise RadioDomainError("rx_threshold must be > 0")


@dataclass(frozen=True)
class NakagamiSchedule:
    """Nakagami shape ``m`` per distance band; ``breakpoints`` split the bands."""

    breakpoints: tuple[float, ...] = (80.0, 200.0)
    shapes: tuple[float, ...] = (3.0, 1.5, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "shapes", tuple(float(m) for m in self.shapes))
        if len(self.shapes) != len(self.breakpoints) + 1:
            raise RadioDomainError("need exactly one more shape than breakpoints")
        if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
            raise RadioDomainError("breakpoints must be strictly ascending")
        if any(m < 0.5 for m in self.shapes):
            raise RadioDomainError("Nakagami shape must be >= 0.5")

    def shape_at(self, d):
        """Shape for a scalar distance or an array of distances."""
        if np.ndim(d) == 0:
            return self.shapes[bisect_right(self.breakpoints, float(d))]
        idx = np.searchsorted(self.breakpoints, d, side="right")
        return np.asarray(self.shapes)[idx]


def _check_distance(d: float, rp: RadioParams) -> None:
    if not d >= rp.d_min:
        raise RadioDomainError(f"distance {d!r} is inside the near field (d_min = {rp.d_min})")


def link_gain(rp: RadioParams) -> float:
    """Combined antenna and spreading gain ``g_tx*g_rx*lambda^2/(16 pi^2)``."""
    return rp.g_tx * rp.g_rx * rp.wavelength**2 / (16.0 * math.pi**2)


def friis_rx_power(d: float, rp: RadioParams) -> float:
    _check_distance(d, rp)
    return rp.p_tx * rp.wavelength**2 * rp.g_tx * rp.g_rx / (16.0 * math.pi**2 * d * d)


def power_ratio_db(d: float, rp: RadioParams) -> float:
    """Transmit-to-receive power ratio in dB."""
    return 10.0 * math.log10(rp.p_tx / friis_rx_power(d, rp))


def max_received_power(d: float, rp: RadioParams) -> float:
    """Unattenuated power at ``d``; at ``d_min`` this is the global maximum."""
    _check_distance(d, rp)
    return rp.p_tx * link_gain(rp) / (d * d)


def attenuated_power(d: float, rp: RadioParams) -> float:
    return rp.alpha * max_received_power(d, rp)


def path_loss_db(d: float, rp: RadioParams, literal: bool = True) -> float:
    """Log-distance path loss.

    With ``literal`` the reference-distance loss enters twice
    (``2*PL(d0) + 10 n log10(d/d0)``); otherwise the standard single term.
    """
    if not d >= rp.d0:
        raise RadioDomainError(f"distance {d!r} below reference distance {rp.d0}")
    base = 2.0 * rp.pl_fs_d0 if literal else rp.pl_fs_d0
    return base + 10.0 * rp.n * math.log10(d / rp.d0)


def invert_path_loss(pl: float, rp: RadioParams, literal: bool = True) -> float:
    """Distance whose :func:`path_loss_db` equals ``pl``."""
    base = 2.0 * rp.pl_fs_d0 if literal else rp.pl_fs_d0
    if not pl >= base:
        raise RadioDomainError(f"path loss {pl!r} dB below the d0 floor {base:.6g} dB")
    return rp.d0 * 10.0 ** ((pl - base) / (10.0 * rp.n))


def nakagami_sample(mean_power, d, sched: NakagamiSchedule, rng: np.random.Generator):
    """Faded received power: Gamma with shape ``m(d)`` and mean ``mean_power``.

    Accepts scalars or equal-length arrays for ``mean_power`` and ``d``.
    """
    mean = np.asarray(mean_power, dtype=float)
    if np.any(mean < 0):
        raise RadioDomainError("mean power must be >= 0")
    m = sched.shape_at(d)
    out = rng.gamma(m, mean / m)
    if np.ndim(out) == 0:
        return float(out)
    return out
