"""Epoch mobility sampling and four-lane highway kinematics."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .analytic import MobilityParams

NODE_COUNTS = (25, 50, 75, 100)
SPEEDS = (2.0, 7.0, 15.0, 30.0)


class ScenarioError(ValueError):
    pass


# ---------------------------------------------------------------------------
# epoch process


@dataclass(frozen=True)
class EpochWalker:
    position: float
    current_speed: float
    epoch_remaining: float
    params: MobilityParams
    epochs: int = 1

    @classmethod
    def start(cls, params: MobilityParams, rng: np.random.Generator) -> "EpochWalker":
        return cls(0.0, rng.normal(params.mu, params.sigma),
                   rng.exponential(1.0 / params.beta), params)


def epoch_advance(w: EpochWalker, dt: float, rng: np.random.Generator) -> EpochWalker:
    """Move a walker forward by ``dt`` seconds, crossing epoch boundaries as needed."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    p = w.params
    pos, speed, left, epochs = w.position, w.current_speed, w.epoch_remaining, w.epochs
    while dt > 0:
        if left > dt:
            pos += speed * dt
            left -= dt
            break
        pos += speed * left
        dt -= left
        speed = rng.normal(p.mu, p.sigma)
        left = rng.exponential(1.0 / p.beta)
        epochs += 1
    return replace(w, position=pos, current_speed=speed, epoch_remaining=left, epochs=epochs)


def sample_distances(t: float, params: MobilityParams, n: int,
                     rng: np.random.Generator) -> np.ndarray:
    """Distances of ``n`` independent fresh walkers after ``t`` seconds (vectorized)."""
    remaining = np.full(n, float(t))
    pos = np.zeros(n)
    active = np.arange(n)
    while active.size:
        dur = rng.exponential(1.0 / params.beta, active.size)
        speed = rng.normal(params.mu, params.sigma, active.size)
        used = np.minimum(dur, remaining[active])
        pos[active] += speed * used
        remaining[active] -= used
        active = active[remaining[active] > 0]
    return pos


# ---------------------------------------------------------------------------
# highway


@dataclass(frozen=True)
class HighwayScenario:
    """Four lanes, two directions; lanes 0-1 run forward (+x), 2-3 in reverse."""

    node_count: int = 50
    speed: float = 15.0
    length: float = 1500.0
    lane_width: float = 5.0
    lanes: int = 4
    wrap: bool = True

    def __post_init__(self):
        if self.lanes != 4:
            raise ScenarioError("the highway model has exactly 4 lanes")
        if self.node_count < 2:
            raise ScenarioError(f"need at least 2 nodes, got {self.node_count}")
        if self.speed < 0 or self.length <= 0 or self.lane_width <= 0:
            raise ScenarioError("speed must be >= 0, length and lane_width > 0")

    def direction(self, lane):
        return np.where(np.asarray(lane) < 2, 1.0, -1.0)


@dataclass(frozen=True)
class HighwayState:
    x: np.ndarray
    lane: np.ndarray

    def coords(self, s: HighwayScenario) -> np.ndarray:
        return np.column_stack([self.x, (self.lane + 0.5) * s.lane_width])


def lane_split(node_count: int, lanes: int = 4) -> list[int]:
    base, extra = divmod(node_count, lanes)
    return [base + (1 if k < extra else 0) for k in range(lanes)]


def initial_placement(s: HighwayScenario, rng: np.random.Generator) -> HighwayState:
    """Uniform positions along each lane; the remainder goes to the lower lanes."""
    lane = np.repeat(np.arange(s.lanes), lane_split(s.node_count, s.lanes))
    x = rng.uniform(0.0, s.length, s.node_count)
    return HighwayState(x, lane)


def highway_step(s: HighwayScenario, state: HighwayState, dt: float) -> HighwayState:
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    x = state.x + s.direction(state.lane) * s.speed * dt
    if s.wrap:
        x = np.mod(x, s.length)
    else:
        x = np.clip(x, 0.0, s.length)
    return HighwayState(x, state.lane)
