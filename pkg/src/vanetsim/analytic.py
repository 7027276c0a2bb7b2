"""Distance distribution of the epoch mobility process and the derived
communication-probability curves.

A node moves through exponentially distributed epochs (rate ``beta``); in each
epoch it keeps a speed drawn from ``normal(mu, sigma)``.  Its travelled
distance at time ``t`` is modelled as normal with mean ``mu*t`` and variance
``a*(beta*t - 1 + exp(-beta*t))`` where ``a = 2*sigma**2/beta**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from scipy.special import log_ndtr

EPS_FLOOR = 1e-12
DEFAULT_TOL = 1e-9
MAX_DEPTH = 60
MAX_EVALS = 2_000_000

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_TINY = 1e-300


class DomainError(ValueError):
    """Argument outside the domain where a formula is defined."""


class DegenerateConditionError(ValueError):
    """Conditioning event has (numerically) zero probability."""


class IntegrationError(ArithmeticError):
    """Adaptive quadrature ran out of subdivisions."""

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


class ConvergenceError(ArithmeticError):
    """Steady-state extrapolation did not settle inside the horizon."""

    def __init__(self, message: str, last_value: float):
        super().__init__(message)
        self.last_value = last_value


@dataclass(frozen=True)
class MobilityParams:
    """Epoch rate ``beta`` (1/s), speed mean ``mu`` and std-dev ``sigma`` (m/s)."""

    beta: float = 1.0
    mu: float = 1.0
    sigma: float = 3.0
    a: float = field(init=False)

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise DomainError(f"beta must be a positive finite rate, got {self.beta!r}")
        if not (math.isfinite(self.mu) and self.mu >= 0):
            raise DomainError(f"mu must be >= 0, got {self.mu!r}")
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise DomainError(f"sigma must be >= 0, got {self.sigma!r}")
        object.__setattr__(self, "a", 2.0 * self.sigma**2 / self.beta**2)


@dataclass(frozen=True)
class AnalyticQuery:
    r: float
    t: float

    def __post_init__(self):
        if not math.isfinite(self.r):
            raise DomainError(f"r must be finite, got {self.r!r}")
        if not (math.isfinite(self.t) and self.t > 0):
            raise DomainError(f"t must be > 0 (t = 0 is a point mass), got {self.t!r}")


@dataclass(frozen=True)
class CurveSpec:
    r_min: float = 0.0
    r_max: float = 200.0
    samples: int = 201
    t: float = 10.0

    def __post_init__(self):
        if not self.r_min < self.r_max:
            raise DomainError("r_min must be below r_max")
        if self.samples < 2:
            raise DomainError("a curve needs at least two samples")
        if not self.t > 0:
            raise DomainError("t must be > 0")

    def grid(self) -> list[float]:
        step = (self.r_max - self.r_min) / (self.samples - 1)
        return [self.r_min + i * step for i in range(self.samples)]


# ---------------------------------------------------------------------------
# quadrature


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    *,
    rel_tol: float = 0.0,
    points: Iterable[float] | None = None,
    max_depth: int = MAX_DEPTH,
    max_evals: int = MAX_EVALS,
) -> float:
    """Adaptive Simpson quadrature of ``f`` over ``[a, b]``.

    ``tol`` is an absolute error target.  With ``rel_tol > 0`` the target is
    ``max(tol, rel_tol * |I|)`` using a coarse first estimate of ``I``, which
    is what tiny-valued integrands need.  ``points`` are interior breakpoints
    (peaks, kinks) that the initial partition must contain.

    Raises :class:`IntegrationError` (carrying the best estimate) if some
    panel still fails the error test at ``max_depth`` or the evaluation
    budget runs out.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("integration limits must be finite")
    if a > b:
        raise DomainError(f"integration limits out of order: a={a} > b={b}")
    if a == b:
        return 0.0

    cuts = sorted({a, b, *(p for p in (points or ()) if a < p < b)})
    # 4 initial panels per segment so that narrow features are not stepped over
    panels = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        h = (hi - lo) / 4
        panels.extend((lo + k * h, lo + (k + 1) * h) for k in range(4))

    evals = 0
    work = []
    coarse = 0.0
    for lo, hi in panels:
        mid = 0.5 * (lo + hi)
        flo, fmid, fhi = f(lo), f(mid), f(hi)
        evals += 3
        whole = (hi - lo) * (flo + 4.0 * fmid + fhi) / 6.0
        coarse += whole
        work.append((lo, hi, flo, fmid, fhi, whole))

    target = max(tol, rel_tol * abs(coarse))
    span = b - a
    total = 0.0
    failed = False
    stack = [(lo, hi, flo, fmid, fhi, whole, target * (hi - lo) / span, 0)
             for lo, hi, flo, fmid, fhi, whole in work]
    while stack:
        lo, hi, flo, fmid, fhi, whole, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        evals += 2
        left = (mid - lo) * (flo + 4.0 * flm + fmid) / 6.0
        right = (hi - mid) * (fmid + 4.0 * frm + fhi) / 6.0
        delta = left + right - whole
        if abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        elif depth >= max_depth or evals >= max_evals:
            failed = True
            total += left + right + delta / 15.0
        else:
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
    if failed:
        raise IntegrationError(
            f"quadrature on [{a}, {b}] did not reach tol {target:.3g}", total)
    return total


# ---------------------------------------------------------------------------
# moments and densities


def _variance_core(x: float) -> float:
    # x - 1 + exp(-x), stable near 0
    if x < 1e-3:
        return x * x * (0.5 - x * (1.0 / 6.0 - x / 24.0))
    return x + math.expm1(-x)


def moments(t: float, p: MobilityParams) -> tuple[float, float]:
    """Mean ``mu*t`` and variance ``a*(beta*t - 1 + exp(-beta*t))`` at time ``t``."""
    if not (math.isfinite(t) and t >= 0):
        raise DomainError(f"t must be finite and >= 0, got {t!r}")
    return p.mu * t, p.a * _variance_core(p.beta * t)


def _normal_pdf(r: float, mean: float, var: float) -> float:
    return math.exp(-((r - mean) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


def _checked_variance(t: float, p: MobilityParams) -> tuple[float, float]:
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"t must be > 0, got {t!r}")
    mean, var = moments(t, p)
    if var <= 0.0:
        # sigma == 0: the distance is deterministic and has no density
        raise DomainError("distance variance is zero; density undefined")
    return mean, var


def pdf_distance(q: AnalyticQuery, p: MobilityParams) -> float:
    mean, var = _checked_variance(q.t, p)
    return _normal_pdf(q.r, mean, var)


def _gauss_breakpoints(lo: float, hi: float, mean: float, sd: float) -> list[float]:
    return [mean + k * sd for k in (-8, -4, -2, -1, 0, 1, 2, 4, 8) if lo < mean + k * sd < hi]


def _gauss_piece(kind: str, lo: float, hi: float, mean: float, var: float, tol: float) -> float:
    if hi <= lo:
        return 0.0
    f = _DENSITIES[kind]
    return integrate(lambda y: f(y, mean, var), lo, hi, _TINY, rel_tol=tol,
                     points=_gauss_breakpoints(lo, hi, mean, math.sqrt(var)))


@lru_cache(maxsize=256)
def _gauss_total(kind: str, mean: float, var: float, tol: float) -> float:
    split = max(mean, 0.0)
    cut = mean + 40.0 * math.sqrt(var)
    return (_gauss_piece(kind, 0.0, split, mean, var, tol)
            + _gauss_piece(kind, split, cut, mean, var, tol))


def _gauss_mass(kind: str, r: float, mean: float, var: float, tol: float) -> float:
    """Mass of a Gaussian-shaped density on ``[0, r]``.

    Below the mean the head ``[0, r]`` is integrated directly; above it the
    value is ``total - tail(r)`` with the tail cut at 40 sd.  Both pieces use
    a relative tolerance, so the result stays nondecreasing in ``r`` even
    where the density is vanishingly small, and is exactly constant once
    ``r`` is past the cut.
    """
    if r <= mean:
        return _gauss_piece(kind, 0.0, r, mean, var, tol)
    cut = mean + 40.0 * math.sqrt(var)
    return _gauss_total(kind, mean, var, tol) - _gauss_piece(kind, min(r, cut), cut, mean, var, tol)


def cdf_distance(q: AnalyticQuery, p: MobilityParams, tol: float = DEFAULT_TOL) -> float:
    """Probability mass of the distance density on ``[0, r]``."""
    if q.r < 0:
        raise DomainError(f"r must be >= 0, got {q.r!r}")
    mean, var = _checked_variance(q.t, p)
    if q.r == 0:
        return 0.0
    value = _gauss_mass("pdf", q.r, mean, var, tol)
    return min(1.0, max(0.0, value))


def comm_density(q: AnalyticQuery, p: MobilityParams = MobilityParams()) -> float:
    """Communication-probability density ``gamma / omega`` at distance ``r``."""
    mean, var = _checked_variance(q.t, p)
    return _gamma_over_omega(q.r, mean, var)


def _gamma_over_omega(r: float, mean: float, var: float) -> float:
    omega = math.sqrt(2.0 * math.pi * var)
    gamma = math.exp(-((r - mean) ** 2) / (2.0 * var))
    return gamma / omega


_DENSITIES = {"pdf": _normal_pdf, "comm": _gamma_over_omega}


def comm_probability(r: float, t: float, p: MobilityParams = MobilityParams(),
                     tol: float = DEFAULT_TOL) -> float:
    """Integral of :func:`comm_density` over ``[0, r]``."""
    if not (math.isfinite(r) and r >= 0):
        raise DomainError(f"r must be finite and >= 0, got {r!r}")
    mean, var = _checked_variance(t, p)
    if r == 0:
        return 0.0
    value = _gauss_mass("comm", r, mean, var, tol)
    return min(1.0, max(0.0, value))


def efficiency(r: float, t: float, p: MobilityParams = MobilityParams(),
               tol: float = DEFAULT_TOL) -> float:
    """Communication efficiency in percent."""
    return 100.0 * comm_probability(r, t, p, tol)


def conditional_pdf(q: AnalyticQuery, p: MobilityParams = MobilityParams(),
                    range_R: float = 200.0, tol: float = DEFAULT_TOL) -> float:
    """Density at ``r`` conditioned on the node lying inside ``[0, r]``.

    Only defined for ``r < range_R``.  A conditioning mass below
    :data:`EPS_FLOOR` raises :class:`DegenerateConditionError`.
    """
    if q.r >= range_R:
        raise DomainError(f"r={q.r} is outside the radio range {range_R}")
    mass = comm_probability(q.r, q.t, p, tol)
    if mass < EPS_FLOOR:
        raise DegenerateConditionError(
            f"conditioning mass {mass:.3g} below {EPS_FLOOR:g} at r={q.r}, t={q.t}")
    return comm_density(q, p) / mass


def _conditional_ratio(r: float, z: float, p: MobilityParams) -> float:
    """density(r) / P(0 <= X <= r) at time ``z``, evaluated in log space.

    Tail-stable counterpart of :func:`conditional_pdf` for use inside the
    time average, where the conditioning mass underflows for large ``z``.
    """
    if z <= 0.0 or r <= 0.0:
        return 0.0
    mean, var = moments(z, p)
    if var <= 0.0:
        return 0.0
    sd = math.sqrt(var)
    log_pdf = -((r - mean) ** 2) / (2.0 * var) - math.log(sd) - _LOG_SQRT_2PI
    hi = float(log_ndtr((r - mean) / sd))
    lo = float(log_ndtr(-mean / sd))
    gap = lo - hi
    if gap >= 0.0:
        return 0.0
    log_mass = hi + math.log(-math.expm1(gap))
    return math.exp(log_pdf - log_mass)


def _ratio_breakpoints(r: float, lo: float, hi: float, p: MobilityParams) -> list[float]:
    if p.mu <= 0:
        return []
    z0 = r / p.mu
    return [c for c in (0.25 * z0, 0.5 * z0, z0, 2 * z0, 4 * z0, 16 * z0, 64 * z0) if lo < c < hi]


def _ratio_integral(r: float, lo: float, hi: float, p: MobilityParams, rel_tol: float) -> float:
    return integrate(lambda z: _conditional_ratio(r, z, p), lo, hi, 0.0, rel_tol=rel_tol,
                     points=_ratio_breakpoints(r, lo, hi, p))


def time_averaged_pdf(r: float, t: float, p: MobilityParams = MobilityParams(),
                      rel_tol: float = 1e-10) -> float:
    """Conditional density averaged over an arrival time uniform on ``(0, t)``."""
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"t must be > 0, got {t!r}")
    return _ratio_integral(r, 0.0, t, p, rel_tol) / t


def extrapolate_limit(segment: Callable[[float, float], float], t_start: float,
                      tol: float, horizon: float) -> float:
    """Limit of ``(1/t) * integral_0^t g`` as ``t`` grows, by horizon doubling.

    ``segment(lo, hi)`` returns the integral of ``g`` over ``[lo, hi]``.  The
    cumulative integral ``W(t)`` is modelled as ``L*t + A*log(t) + B``; three
    successive horizons ``t, 2t, 4t`` then give ``L = (W(4t) - 2W(2t) + W(t))/t``
    exactly.  Doubling stops once two successive estimates of ``L`` agree to
    ``tol`` relatively.
    """
    if tol <= 0:
        raise DomainError("tol must be > 0")
    if not t_start > 0:
        raise DomainError("t_start must be > 0")
    ts = [t_start]
    ws = [segment(0.0, t_start)]
    prev = None
    while True:
        t_next = 2.0 * ts[-1]
        if t_next > horizon:
            raise ConvergenceError(
                f"no convergence to rel tol {tol:g} by t = {ts[-1]:g}",
                prev if prev is not None else ws[-1] / ts[-1])
        ws.append(ws[-1] + segment(ts[-1], t_next))
        ts.append(t_next)
        if len(ws) < 3:
            continue
        estimate = (ws[-1] - 2.0 * ws[-2] + ws[-3]) / ts[-3]
        if prev is not None and estimate != 0.0 and abs(estimate - prev) < tol * abs(estimate):
            return estimate
        prev = estimate


def steady_state_pdf(r: float, p: MobilityParams = MobilityParams(), tol: float = 1e-4,
                     t_start: float = 10.0, horizon: float = 2.0**16,
                     rel_tol: float = 1e-11) -> float:
    """Large-time limit of :func:`time_averaged_pdf`."""
    return extrapolate_limit(lambda lo, hi: _ratio_integral(r, lo, hi, p, rel_tol),
                             t_start, tol, horizon)


def steady_state_closed_form(r: float, p: MobilityParams = MobilityParams()) -> float:
    """Asymptotic value ``k / (1 - exp(-k r))`` with ``k = mu*beta/(2 sigma^2)``.

    Follows from the Mills-ratio behaviour of the conditional density once the
    mean has drifted far beyond ``r``; used as a cross-check.
    """
    k = p.mu / (p.a * p.beta)
    return k / -math.expm1(-k * r)


def curve_rows(t_values: Sequence[float], curve: CurveSpec = CurveSpec(),
               p: MobilityParams = MobilityParams()) -> list[tuple[float, float, float, float, float]]:
    """Rows ``(r, t, density, probability, efficiency)`` for each requested ``t``."""
    rows = []
    for t in t_values:
        for r in CurveSpec(curve.r_min, curve.r_max, curve.samples, t).grid():
            prob = comm_probability(r, t, p)
            rows.append((r, t, comm_density(AnalyticQuery(r, t), p), prob, 100.0 * prob))
    return rows
