"""Vision filtering: Kalman smoothing, confidence gating and camera fusion.

Per-camera detections arrive as :class:`DetectionFrame` records. The
:class:`Tracker` predicts every track to the frame time, fuses detections of
the same object seen by several cameras, associates them to tracks by gated
nearest neighbour, and keeps a per-track confidence that decides whether the
object is reported as valid. Tracks that go unseen keep moving on the motion
model alone until their confidence has been zero for ``expiry`` seconds.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .geom import Vec2, normalize_angle

Matrix = Union[np.ndarray, Callable[[float], np.ndarray]]


class TrackerError(ValueError):
    pass


# -- Kalman filter -----------------------------------------------------------

@dataclass(frozen=True)
class KalmanModel:
    """Linear-Gaussian model. ``F`` and ``Q`` may be functions of ``dt``."""

    F: Matrix
    H: np.ndarray
    Q: Matrix
    R: np.ndarray
    B: np.ndarray | None = None

    def transition(self, dt: float) -> np.ndarray:
        return self.F(dt) if callable(self.F) else self.F

    def process_noise(self, dt: float) -> np.ndarray:
        return self.Q(dt) if callable(self.Q) else self.Q


@dataclass(frozen=True)
class KalmanState:
    x: np.ndarray
    P: np.ndarray
    t: float = 0.0


def constant_velocity_model(sigma_a: float, sigma_z: float, dims: int = 2) -> KalmanModel:
    """State ``[p_1..p_d, v_1..v_d]`` driven by white acceleration noise.

    The acceleration is held constant over each step and drawn with standard
    deviation ``sigma_a`` (mm/s^2), so ``Q = sigma_a^2 G G^T`` with
    ``G = [dt^2/2, dt]``. Only positions are observed, with standard
    deviation ``sigma_z``.
    """
    eye = np.eye(dims)
    zero = np.zeros((dims, dims))
    q = sigma_a * sigma_a
    ident = np.eye(2 * dims)
    shift = np.block([[zero, eye], [zero, zero]])
    q_pos = q * np.block([[eye, zero], [zero, zero]])
    q_cross = q * np.block([[zero, eye], [eye, zero]])
    q_vel = q * np.block([[zero, zero], [zero, eye]])

    @functools.lru_cache(maxsize=64)
    def F(dt: float) -> np.ndarray:
        out = ident + dt * shift
        out.flags.writeable = False
        return out

    @functools.lru_cache(maxsize=64)
    def Q(dt: float) -> np.ndarray:
        out = (dt ** 4 / 4.0) * q_pos + (dt ** 3 / 2.0) * q_cross + dt * dt * q_vel
        out.flags.writeable = False
        return out

    H = np.hstack([eye, zero])
    R = sigma_z * sigma_z * eye
    return KalmanModel(F=F, H=H, Q=Q, R=R)


def kalman_predict(s: KalmanState, m: KalmanModel, dt: float,
                   u: np.ndarray | None = None) -> KalmanState:
    if dt < 0:
        raise TrackerError(f"cannot predict backwards in time (dt={dt})")
    F = m.transition(dt)
    x = F @ s.x
    if u is not None and m.B is not None:
        x = x + m.B @ u
    P = F @ s.P @ F.T + m.process_noise(dt)
    return KalmanState(x, 0.5 * (P + P.T), s.t + dt)


def kalman_update(s: KalmanState, m: KalmanModel, z: np.ndarray,
                  innovation: np.ndarray | None = None) -> KalmanState:
    """Measurement update in Joseph form.

    ``innovation`` overrides ``z - H x`` (used for wrapped angles).
    """
    z = np.asarray(z, dtype=float)
    H, R = m.H, m.R
    if z.shape != (H.shape[0],):
        raise TrackerError(f"measurement has shape {z.shape}, expected ({H.shape[0]},)")
    y = z - H @ s.x if innovation is None else innovation
    PHt = s.P @ H.T
    S = H @ PHt + R
    K = PHt @ _inverse(S)
    x = s.x + K @ y
    A = _identity(len(s.x)) - K @ H
    P = A @ s.P @ A.T + K @ R @ K.T
    return KalmanState(x, 0.5 * (P + P.T), s.t)


def _inverse(S: np.ndarray) -> np.ndarray:
    # closed form for the 1x1 and 2x2 systems the tracker uses
    n = S.shape[0]
    if n == 1:
        det = S[0, 0]
        if det == 0.0:
            raise TrackerError("innovation covariance is singular")
        return np.array([[1.0 / det]])
    if n == 2:
        a, b, c, d = S[0, 0], S[0, 1], S[1, 0], S[1, 1]
        det = a * d - b * c
        if det == 0.0:
            raise TrackerError("innovation covariance is singular")
        return np.array([[d, -b], [-c, a]]) / det
    try:
        return np.linalg.inv(S)
    except np.linalg.LinAlgError as exc:
        raise TrackerError("innovation covariance is singular") from exc


_IDENTITIES: dict[int, np.ndarray] = {}


def _identity(n: int) -> np.ndarray:
    eye = _IDENTITIES.get(n)
    if eye is None:
        eye = _IDENTITIES[n] = np.eye(n)
        eye.flags.writeable = False
    return eye


# -- confidence ------------------------------------------------------------

@dataclass(frozen=True)
class ConfidenceParams:
    p_seen: float = 0.2
    p_lost: float = 0.1
    p_valid: float = 0.8

    def __post_init__(self) -> None:
        if not (self.p_seen > 0 and self.p_lost > 0 and 0 < self.p_valid < 1):
            raise ValueError("need p_seen > 0, p_lost > 0 and 0 < p_valid < 1")


def confidence_step(c: float, seen: bool, params: ConfidenceParams) -> float:
    c = c + params.p_seen if seen else c - params.p_lost
    return min(max(c, 0.0), 1.0)


def is_valid(c: float, params: ConfidenceParams) -> bool:
    return c > params.p_valid


# -- cameras and fusion ------------------------------------------------------

@dataclass(frozen=True)
class CameraModel:
    id: int
    center: Vec2
    coverage_radius: float
    n_obs: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", Vec2(*self.center))
        if not self.coverage_radius > 0:
            raise ValueError("coverage_radius must be positive")

    def covers(self, p: Vec2, slack: float = 0.05) -> bool:
        return self.center.dist(p) <= self.coverage_radius * (1.0 + slack)


@dataclass(frozen=True)
class Detection:
    camera_id: int
    kind: tuple            # ("ball",) or ("robot", team, number)
    position: Vec2
    orientation: float | None = None


@dataclass(frozen=True)
class DetectionFrame:
    t: float
    camera_id: int
    detections: tuple[Detection, ...] = ()


def fuse_detections(dets: Sequence[tuple[Detection, CameraModel]],
                    inverse_weights: bool = False) -> Vec2:
    """Weighted mean of one object's positions as seen by several cameras.

    Each detection is weighted by its distance from the camera's projection
    center relative to the camera's coverage radius. ``inverse_weights``
    flips this so detections near the center dominate instead.
    """
    if not dets:
        raise TrackerError("cannot fuse an empty detection list")
    weights = []
    for det, cam in dets:
        w = cam.center.dist(det.position) / cam.coverage_radius
        if inverse_weights:
            w = 1.0 / max(w, 1e-6)
        weights.append(w)
    total = math.fsum(weights)
    if total == 0.0:
        weights = [1.0] * len(dets)
        total = float(len(dets))
    x = math.fsum(w * d.position[0] for w, (d, _) in zip(weights, dets)) / total
    y = math.fsum(w * d.position[1] for w, (d, _) in zip(weights, dets)) / total
    return Vec2(x, y)


def camera_model_refine(model: CameraModel, det: Detection) -> CameraModel:
    """Grow coverage to include ``det`` and move the center toward the
    running mean of everything this camera has seen."""
    if det.camera_id != model.id:
        raise TrackerError(f"detection from camera {det.camera_id} given to camera {model.id}")
    n = model.n_obs + 1
    c = model.center + (Vec2(*det.position) - model.center) / n
    radius = max(model.coverage_radius, model.center.dist(det.position))
    return CameraModel(model.id, c, radius, n)


# -- tracker ---------------------------------------------------------------

@dataclass(frozen=True)
class TrackerConfig:
    sigma_a_ball: float = 1000.0
    sigma_a_robot: float = 2000.0
    sigma_z: float = 10.0
    sigma_a_theta: float = 20.0   # rad/s^2, heading acceleration noise
    sigma_z_theta: float = 0.05   # rad
    confidence: ConfidenceParams = ConfidenceParams()
    gate_radius: float = 300.0
    fusion_radius: float = 150.0
    expiry: float = 1.0           # s at zero confidence before a track is dropped
    initial_velocity_sigma: float = 3000.0
    inverse_weights: bool = False
    refine_cameras: bool = True


@dataclass(frozen=True)
class TrackedObject:
    """Immutable snapshot of one track."""

    id: int
    kind: tuple
    state: KalmanState
    confidence: float
    frames_since_seen: int
    valid: bool
    theta: float | None = None
    omega: float | None = None

    @property
    def position(self) -> Vec2:
        return Vec2(float(self.state.x[0]), float(self.state.x[1]))

    @property
    def velocity(self) -> Vec2:
        return Vec2(float(self.state.x[2]), float(self.state.x[3]))


@dataclass
class _Track:
    id: int
    kind: tuple
    state: KalmanState
    confidence: float
    frames_since_seen: int = 0
    zero_since: float | None = None
    heading: KalmanState | None = None


@dataclass
class _Measurement:
    kind: tuple
    position: Vec2
    orientation: float | None
    camera_id: int
    index: int


def _heading_model(cfg: TrackerConfig) -> KalmanModel:
    return constant_velocity_model(cfg.sigma_a_theta, cfg.sigma_z_theta, dims=1)


class Tracker:
    """Single-writer world model fed by per-camera detection frames."""

    def __init__(self, config: TrackerConfig = TrackerConfig(),
                 cameras: Iterable[CameraModel] = ()):
        self.config = config
        self.cameras: dict[int, CameraModel] = {c.id: c for c in cameras}
        self._tracks: list[_Track] = []
        self._next_id = 0
        self._last_t: dict[int, float] = {}
        self._ball_model = constant_velocity_model(config.sigma_a_ball, config.sigma_z)
        self._robot_model = constant_velocity_model(config.sigma_a_robot, config.sigma_z)
        self._theta_model = _heading_model(config)

    # public API

    def ingest_frame(self, frame: DetectionFrame) -> tuple[TrackedObject, ...]:
        return self.ingest_tick([frame])

    def ingest_tick(self, frames: Sequence[DetectionFrame]) -> tuple[TrackedObject, ...]:
        """Process frames from different cameras captured at the same tick."""
        if not frames:
            return self.snapshot()
        for f in frames:
            last = self._last_t.get(f.camera_id)
            if last is not None and f.t < last:
                raise TrackerError(
                    f"frame from camera {f.camera_id} at t={f.t} is older than t={last}")
        t = max(f.t for f in frames)
        for f in frames:
            self._last_t[f.camera_id] = f.t
        for tr in self._tracks:
            self._predict(tr, t)
        if self.config.refine_cameras:
            for f in frames:
                for d in f.detections:
                    self._refine_camera(d)
        measurements = self._fuse(frames)
        matched = self._associate(measurements)
        cp = self.config.confidence
        viewing = [self.cameras.get(f.camera_id) for f in frames]
        seen_ids = set()
        for tr, meas in matched:
            self._update(tr, meas)
            tr.confidence = confidence_step(tr.confidence, True, cp)
            tr.frames_since_seen = 0
            seen_ids.add(tr.id)
        for tr in self._tracks:
            if tr.id in seen_ids:
                continue
            if self._should_have_seen(tr, viewing):
                tr.confidence = confidence_step(tr.confidence, False, cp)
            tr.frames_since_seen += 1
        matched_meas = {id(m) for _, m in matched}
        for m in measurements:
            if id(m) not in matched_meas:
                self._spawn(m, t)
        for tr in self._tracks:
            if tr.confidence > 0.0:
                tr.zero_since = None
            elif tr.zero_since is None:
                tr.zero_since = t
        self._tracks = [tr for tr in self._tracks
                        if tr.zero_since is None or t - tr.zero_since <= self.config.expiry]
        return self.snapshot()

    def snapshot(self) -> tuple[TrackedObject, ...]:
        return tuple(self._freeze(tr) for tr in self._tracks)

    def best(self, kind: tuple, valid_only: bool = True) -> TrackedObject | None:
        """Most confident track of the given kind."""
        cp = self.config.confidence
        cands = [tr for tr in self._tracks
                 if tr.kind == kind and (not valid_only or is_valid(tr.confidence, cp))]
        if not cands:
            return None
        tr = max(cands, key=lambda tr: (tr.confidence, -tr.frames_since_seen, -tr.id))
        return self._freeze(tr)

    def _freeze(self, tr: _Track) -> TrackedObject:
        theta = omega = None
        if tr.heading is not None:
            theta = normalize_angle(float(tr.heading.x[0]))
            omega = float(tr.heading.x[1])
        return TrackedObject(tr.id, tr.kind, tr.state, tr.confidence, tr.frames_since_seen,
                             is_valid(tr.confidence, self.config.confidence), theta, omega)

    def add_track(self, kind: tuple, state: KalmanState, confidence: float | None = None,
                  theta: float | None = None) -> int:
        """Seed a track directly (e.g. from a prior world model); returns its id."""
        c = self.config.confidence.p_seen if confidence is None else confidence
        heading = None if theta is None else self._new_heading(theta, state.t)
        self._tracks.append(_Track(self._next_id, kind, state, min(max(c, 0.0), 1.0),
                                   0, None, heading))
        self._next_id += 1
        return self._next_id - 1

    # internals

    def _model_for(self, kind: tuple) -> KalmanModel:
        return self._ball_model if kind[0] == "ball" else self._robot_model

    def _predict(self, tr: _Track, t: float) -> None:
        dt = t - tr.state.t
        if dt <= 0.0:
            return
        tr.state = kalman_predict(tr.state, self._model_for(tr.kind), dt)
        if tr.heading is not None:
            tr.heading = kalman_predict(tr.heading, self._theta_model, dt)

    def _update(self, tr: _Track, m: _Measurement) -> None:
        tr.state = kalman_update(tr.state, self._model_for(tr.kind), np.array(m.position))
        if m.orientation is None:
            return
        if tr.heading is None:
            tr.heading = self._new_heading(m.orientation, tr.state.t)
            return
        h = self._theta_model.H
        innov = np.array([normalize_angle(m.orientation - float((h @ tr.heading.x)[0]))])
        tr.heading = kalman_update(tr.heading, self._theta_model,
                                   np.array([m.orientation]), innovation=innov)

    def _new_heading(self, theta: float, t: float) -> KalmanState:
        sz = self.config.sigma_z_theta
        return KalmanState(np.array([theta, 0.0]), np.diag([sz * sz, 10.0 ** 2]), t)

    def _spawn(self, m: _Measurement, t: float) -> None:
        sz = self.config.sigma_z
        sv = self.config.initial_velocity_sigma
        state = KalmanState(np.array([m.position[0], m.position[1], 0.0, 0.0]),
                            np.diag([sz * sz, sz * sz, sv * sv, sv * sv]), t)
        heading = None if m.orientation is None else self._new_heading(m.orientation, t)
        self._tracks.append(_Track(self._next_id, m.kind, state,
                                   self.config.confidence.p_seen, 0, None, heading))
        self._next_id += 1

    def _refine_camera(self, d: Detection) -> None:
        cam = self.cameras.get(d.camera_id)
        if cam is None:
            self.cameras[d.camera_id] = CameraModel(d.camera_id, d.position, 1.0, 1)
        else:
            self.cameras[d.camera_id] = camera_model_refine(cam, d)

    def _should_have_seen(self, tr: _Track, viewing: list[CameraModel | None]) -> bool:
        pos = Vec2(float(tr.state.x[0]), float(tr.state.x[1]))
        return any(cam is None or cam.covers(pos) for cam in viewing)

    def _fuse(self, frames: Sequence[DetectionFrame]) -> list[_Measurement]:
        # cluster same-kind detections from different cameras that lie within
        # the fusion radius of each other, then collapse each cluster
        raw = []
        for f in sorted(frames, key=lambda f: f.camera_id):
            for i, d in enumerate(f.detections):
                raw.append((f.camera_id, i, d))
        if len(frames) == 1:
            return [_Measurement(d.kind, Vec2(*d.position), d.orientation, cid, i)
                    for cid, i, d in raw]
        used = [False] * len(raw)
        out = []
        r = self.config.fusion_radius
        for a, (cid, i, d) in enumerate(raw):
            if used[a]:
                continue
            used[a] = True
            group = [d]
            cams = {cid}
            for b in range(a + 1, len(raw)):
                cid_b, _, d_b = raw[b]
                if (not used[b] and cid_b not in cams and d_b.kind == d.kind
                        and Vec2(*d_b.position).dist(d.position) <= r):
                    used[b] = True
                    group.append(d_b)
                    cams.add(cid_b)
            if len(group) == 1:
                pos = Vec2(*d.position)
            else:
                pairs = [(g, self.cameras.get(g.camera_id)) for g in group]
                if any(c is None for _, c in pairs):
                    pos = Vec2(sum(g.position[0] for g in group) / len(group),
                               sum(g.position[1] for g in group) / len(group))
                else:
                    pos = fuse_detections(pairs, self.config.inverse_weights)
            orient = next((g.orientation for g in group if g.orientation is not None), None)
            out.append(_Measurement(d.kind, pos, orient, cid, i))
        return out

    def _associate(self, measurements: list[_Measurement]) -> list[tuple[_Track, _Measurement]]:
        gate = self.config.gate_radius
        pairs = []
        for mi, m in enumerate(measurements):
            for ti, tr in enumerate(self._tracks):
                if tr.kind != m.kind:
                    continue
                dist = math.hypot(tr.state.x[0] - m.position[0], tr.state.x[1] - m.position[1])
                if dist <= gate:
                    pairs.append((dist, m.camera_id, m.index, ti, mi))
        pairs.sort()
        used_t, used_m = set(), set()
        out = []
        for _, _, _, ti, mi in pairs:
            if ti in used_t or mi in used_m:
                continue
            used_t.add(ti)
            used_m.add(mi)
            out.append((self._tracks[ti], measurements[mi]))
        return out


# -- ingestion format -------------------------------------------------------

def parse_frame(record: Union[str, bytes, dict]) -> DetectionFrame:
    """Parse one JSON detection record.

    ``{"t": s, "camera_id": int, "balls": [{"x", "y"}],
    "robots_blue": [{"id", "x", "y", "theta"}], "robots_yellow": [...]}``
    """
    if isinstance(record, (str, bytes)):
        try:
            record = json.loads(record)
        except json.JSONDecodeError as exc:
            raise TrackerError(f"malformed detection record: {exc}") from exc
    try:
        t = float(record["t"])
        cam = int(record["camera_id"])
        dets = [Detection(cam, ("ball",), Vec2(float(b["x"]), float(b["y"])))
                for b in record.get("balls", [])]
        for team in ("blue", "yellow"):
            for r in record.get(f"robots_{team}", []):
                theta = r.get("theta")
                dets.append(Detection(cam, ("robot", team, int(r["id"])),
                                      Vec2(float(r["x"]), float(r["y"])),
                                      None if theta is None else float(theta)))
    except KeyError as exc:
        raise TrackerError(f"detection record is missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise TrackerError(f"detection record has a bad value: {exc}") from exc
    return DetectionFrame(t, cam, tuple(dets))


def frame_to_record(frame: DetectionFrame) -> dict:
    rec: dict = {"t": frame.t, "camera_id": frame.camera_id, "balls": [],
                 "robots_blue": [], "robots_yellow": []}
    for d in frame.detections:
        if d.kind[0] == "ball":
            rec["balls"].append({"x": d.position[0], "y": d.position[1]})
        else:
            rec[f"robots_{d.kind[1]}"].append({"id": d.kind[2], "x": d.position[0],
                                               "y": d.position[1], "theta": d.orientation})
    return rec


def parse_camera(record: dict) -> CameraModel:
    try:
        return CameraModel(int(record["id"]), Vec2(*map(float, record["center"])),
                           float(record["coverage_radius"]))
    except KeyError as exc:
        raise TrackerError(f"camera record is missing field {exc.args[0]!r}") from exc


def object_to_record(obj: TrackedObject) -> dict:
    rec = {"id": obj.id, "kind": obj.kind[0], "t": obj.state.t,
           "x": obj.position[0], "y": obj.position[1],
           "vx": obj.velocity[0], "vy": obj.velocity[1],
           "confidence": round(obj.confidence, 12), "valid": obj.valid}
    if obj.kind[0] == "robot":
        rec["team"], rec["number"] = obj.kind[1], obj.kind[2]
        rec["theta"] = obj.theta
    return rec
