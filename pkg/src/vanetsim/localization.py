"""Sender localization from two received-strength distance estimates.

The receiver measures the sender's signal at two probe points ``A1`` and
``A2`` a distance ``L`` apart on its track, converts each reading to a
distance with the inverse path-loss law, and derives a bearing ``phi`` from
the distance difference.  Because ``cos(phi) = cos(-phi)`` the bearing fixes
two mirror-image candidates; a signal-strength probe toward one side decides.

Frame convention: the anchor ``A0`` is the midpoint of ``A1 A2``, ``A1`` lies
ahead along the track direction ``u`` and ``phi`` is measured from ``u``.
With ``u = (0, 1)`` the candidates are ``(x0 +/- d sin phi, y0 + d cos phi)``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .radio import RadioParams, friis_rx_power, invert_path_loss, path_loss_db

CLAMP_SLACK = 1e-12
FAR_FIELD_RATIO = 10.0
# Lateral probe step as a fraction of L.  A full-L step overshoots senders that
# sit less than L/2 off the track and reports the wrong side.
PROBE_FRACTION = 0.01

Point = tuple[float, float]


class LocalizationError(ValueError):
    pass


class InconsistentObservation(LocalizationError):
    """Distance difference larger than the probe separation."""


class AmbiguousObservation(LocalizationError):
    """Flat probe with two distinct candidates."""


@dataclass(frozen=True)
class LocalizationObservation:
    x1: float
    x2: float
    L: float
    anchor: Point = (0.0, 0.0)
    trend_probe: float = 0.0

    def __post_init__(self):
        if not self.L > 0:
            raise LocalizationError(f"probe separation must be > 0, got {self.L!r}")
        if min(self.x1, self.x2) < FAR_FIELD_RATIO * self.L:
            raise LocalizationError(
                f"sender too close: distances ({self.x1:.6g}, {self.x2:.6g}) must be "
                f">= {FAR_FIELD_RATIO:g} x L = {FAR_FIELD_RATIO * self.L:.6g}")

    @property
    def distance(self) -> float:
        return 0.5 * (self.x1 + self.x2)


@dataclass(frozen=True)
class LocalizationResult:
    distance: float
    phi: float
    candidates: tuple[Point, Point]
    chosen: int

    @property
    def position(self) -> Point:
        return self.candidates[self.chosen]

    @property
    def merged(self) -> bool:
        return self.candidates[0] == self.candidates[1]


def estimate_bearing(obs: LocalizationObservation) -> float:
    """Bearing ``arccos((x2 - x1) / L)`` in ``[0, pi]``."""
    arg = (obs.x2 - obs.x1) / obs.L
    if abs(arg) > 1.0 + CLAMP_SLACK:
        raise InconsistentObservation(
            f"|x2 - x1| = {abs(obs.x2 - obs.x1):.6g} exceeds L = {obs.L:.6g}")
    if abs(arg) >= 1.0 - CLAMP_SLACK:
        # on-track sender: snap so round-off cannot split the merged candidate
        return 0.0 if arg > 0 else math.pi
    return math.acos(arg)


def candidate_positions(anchor: Point, d: float, phi: float) -> tuple[Point, Point]:
    if not d > 0:
        raise LocalizationError(f"distance must be > 0, got {d!r}")
    x0, y0 = anchor
    if phi in (0.0, math.pi):
        s, c = 0.0, (d if phi == 0.0 else -d)   # sin(pi) is not exactly 0 in floats
    else:
        s, c = d * math.sin(phi), d * math.cos(phi)
    return (x0 + s, y0 + c), (x0 - s, y0 + c)


def disambiguate(candidates: tuple[Point, Point], trend_probe: float) -> int:
    """Pick candidate 0 if strength rose toward it, 1 if it fell."""
    if trend_probe > 0:
        return 0
    if trend_probe < 0:
        return 1
    if candidates[0] == candidates[1]:
        return 0
    raise AmbiguousObservation("flat signal-strength probe cannot separate the candidates")


def locate(obs: LocalizationObservation) -> LocalizationResult:
    """Bearing, candidates and choice for an observation in the ``u = +y`` frame."""
    phi = estimate_bearing(obs)
    cands = candidate_positions(obs.anchor, obs.distance, phi)
    return LocalizationResult(obs.distance, phi, cands, disambiguate(cands, obs.trend_probe))


# ---------------------------------------------------------------------------
# synthetic scenes


@dataclass(frozen=True)
class Scene:
    """A sender and a receiver track for an end-to-end localization run.

    ``noise_db`` is a calibration offset added to both path-loss readings.
    """

    sender: Point
    anchor: Point = (0.0, 0.0)
    L: float = 10.0
    track: Point = (0.0, 1.0)
    radio: RadioParams = RadioParams()
    literal: bool = True
    noise_db: float = 0.0

    def __post_init__(self):
        ux, uy = self.track
        norm = math.hypot(ux, uy)
        if norm == 0:
            raise LocalizationError("track direction must be non-zero")
        object.__setattr__(self, "track", (ux / norm, uy / norm))

    @property
    def lateral(self) -> Point:
        # track direction turned clockwise; the "+ d sin phi" side
        ux, uy = self.track
        return (uy, -ux)

    def probe_points(self) -> tuple[Point, Point]:
        (x0, y0), (ux, uy), h = self.anchor, self.track, 0.5 * self.L
        return (x0 + h * ux, y0 + h * uy), (x0 - h * ux, y0 - h * uy)

    def true_distance(self) -> float:
        return _dist(self.anchor, self.sender)


def _dist(p: Point, q: Point) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def _to_world(scene: Scene, local: Point) -> Point:
    # local coordinates are (lateral, along-track) offsets from the anchor
    (vx, vy), (ux, uy) = scene.lateral, scene.track
    a, b = local[0] - scene.anchor[0], local[1] - scene.anchor[1]
    return (scene.anchor[0] + a * vx + b * ux, scene.anchor[1] + a * vy + b * uy)


def measure(scene: Scene) -> LocalizationObservation:
    """Distance estimates at both probe points plus the lateral strength probe."""
    a1, a2 = scene.probe_points()
    rp = scene.radio
    x1 = invert_path_loss(path_loss_db(_dist(a1, scene.sender), rp, scene.literal)
                          + scene.noise_db, rp, scene.literal)
    x2 = invert_path_loss(path_loss_db(_dist(a2, scene.sender), rp, scene.literal)
                          + scene.noise_db, rp, scene.literal)
    vx, vy = scene.lateral
    h = PROBE_FRACTION * scene.L
    step = (scene.anchor[0] + h * vx, scene.anchor[1] + h * vy)
    probe = 10.0 * math.log10(friis_rx_power(_dist(step, scene.sender), rp)
                              / friis_rx_power(_dist(scene.anchor, scene.sender), rp))
    return LocalizationObservation(x1, x2, scene.L, scene.anchor, probe)


def localize(scene: Scene) -> LocalizationResult:
    """Run the full measure / bearing / candidates / choice chain on a scene."""
    local = locate(measure(scene))
    world = tuple(_to_world(scene, c) for c in local.candidates)
    return LocalizationResult(local.distance, local.phi, world, local.chosen)


def localization_error(scene: Scene, result: LocalizationResult) -> float:
    """Chosen-position error relative to the true sender distance."""
    return _dist(result.position, scene.sender) / scene.true_distance()


def random_scene(rng: random.Random, noise_db: float = 0.0, L: float = 10.0) -> Scene:
    """Sender at a uniform radius in [10.5L, 100L] and uniform angle around the anchor,
    with a calibration offset drawn uniformly from ``[-noise_db, noise_db]``.

    The extra half probe spacing keeps both probes in the far field."""
    r = rng.uniform((FAR_FIELD_RATIO + 0.5) * L, 100.0 * L)
    th = rng.uniform(0.0, 2.0 * math.pi)
    offset = rng.uniform(-noise_db, noise_db) if noise_db else 0.0
    return Scene(sender=(r * math.cos(th), r * math.sin(th)), L=L, noise_db=offset)
