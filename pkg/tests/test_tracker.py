import json
import math

import numpy as np
import pytest

from sslkit.geom import Vec2
from sslkit.tracker import (CameraModel, ConfidenceParams, Detection, DetectionFrame,
                            KalmanModel, KalmanState, Tracker, TrackerConfig, TrackerError,
                            camera_model_refine, confidence_step, constant_velocity_model,
                            frame_to_record, fuse_detections, is_valid, kalman_predict,
                            kalman_update, parse_frame)

CP = ConfidenceParams()
BALL = ("ball",)
WIDE = CameraModel(0, Vec2(0, 0), 9000.0)


def ball_frame(t, *points, cam=0):
    return DetectionFrame(t, cam, tuple(Detection(cam, BALL, Vec2(*p)) for p in points))


# -- Kalman ------------------------------------------------------------------

def test_predict_examples():
    m = constant_velocity_model(0.0, 1.0)
    s = kalman_predict(KalmanState(np.zeros(4), np.eye(4)), m, 1.0)
    assert np.array_equal(s.x, np.zeros(4))
    s = kalman_predict(KalmanState(np.array([100.0, 0, 50, 0]), np.eye(4)), m, 2.0)
    np.testing.assert_allclose(s.x, [200, 0, 50, 0])
    ident = KalmanModel(F=np.eye(2), H=np.eye(2), Q=np.eye(2), R=np.eye(2))
    s = kalman_predict(KalmanState(np.zeros(2), np.eye(2)), ident, 1.0)
    np.testing.assert_array_equal(s.P, 2 * np.eye(2))
    with pytest.raises(TrackerError):
        kalman_predict(s, ident, -0.1)


def test_perfect_measurement_dominates():
    m = constant_velocity_model(100.0, 1e-6)  # R = 1e-12 I
    s = KalmanState(np.array([0.0, 0, 10, 10]), np.eye(4) * 1e4)
    s = kalman_update(s, m, np.array([500.0, 300.0]))
    np.testing.assert_allclose(s.x[:2], [500, 300], atol=1e-6)


def test_repeated_perfect_measurements_stop_the_state():
    m = constant_velocity_model(0.0, 1e-6)
    s = KalmanState(np.array([0.0, 0, 300, -200]), np.eye(4) * 1e4)
    for _ in range(40):
        s = kalman_update(kalman_predict(s, m, 0.05), m, np.array([500.0, 300.0]))
    np.testing.assert_allclose(s.x, [500, 300, 0, 0], atol=1e-3)


def test_scalar_steady_state_gain():
    q, r = 0.01, 1.0
    m = KalmanModel(F=np.eye(1), H=np.eye(1), Q=np.array([[q]]), R=np.array([[r]]))
    s = KalmanState(np.zeros(1), np.eye(1))
    for _ in range(500):
        prior = kalman_predict(s, m, 1.0)
        gain = prior.P[0, 0] / (prior.P[0, 0] + r)
        s = kalman_update(prior, m, np.zeros(1))
    # oracle: iterate the variance recursion by hand
    p = 1.0
    for _ in range(10_000):
        p_prior = p + q
        p = p_prior * r / (p_prior + r)
    k_oracle = (p + q) / (p + q + r)
    assert gain == pytest.approx(k_oracle, abs=1e-9)
    # and the positive root of the stationary prior variance equation
    p_prior = (q + math.sqrt(q * q + 4 * q * r)) / 2
    assert gain == pytest.approx(p_prior / (p_prior + r), abs=1e-9)


def test_singular_innovation_rejected():
    m = KalmanModel(F=np.eye(1), H=np.eye(1), Q=np.zeros((1, 1)), R=np.zeros((1, 1)))
    with pytest.raises(TrackerError):
        kalman_update(KalmanState(np.zeros(1), np.zeros((1, 1))), m, np.ones(1))


# -- confidence ----------------------------------------------------------------

def test_confidence_examples():
    c = 0.0
    for _ in range(5):
        c = confidence_step(c, True, CP)
    assert c == 1.0
    assert confidence_step(1.0, True, CP) == 1.0
    assert confidence_step(0.6, False, CP) == pytest.approx(0.5)
    assert confidence_step(0.05, False, CP) == 0.0
    assert not is_valid(0.8, CP)
    assert is_valid(1.0, CP)


def test_short_flicker_never_valid():
    c, peak = 0.0, 0.0
    for seen in [True] * 3 + [False] * 10:
        c = confidence_step(c, seen, CP)
        peak = max(peak, c)
        assert not is_valid(c, CP)
    assert peak == pytest.approx(0.6)


# -- cameras and fusion --------------------------------------------------------

def test_fusion_examples():
    det = Detection(0, BALL, Vec2(1000, 500))
    assert fuse_detections([(det, WIDE)]) == (1000, 500)
    a = CameraModel(1, Vec2(-3000, 0), 4000.0)
    b = CameraModel(2, Vec2(5000, 0), 4000.0)
    out = fuse_detections([(Detection(1, BALL, Vec2(990, 0)), a),
                           (Detection(2, BALL, Vec2(1010, 0)), b)])
    assert out.x == pytest.approx(1000, abs=1e-9) and out.y == 0
    with pytest.raises(TrackerError):
        fuse_detections([])


def test_fusion_weights_follow_distance_from_center():
    a = CameraModel(1, Vec2(0, 0), 4000.0)
    b = CameraModel(2, Vec2(4000, 0), 4000.0)
    da, db = Detection(1, BALL, Vec2(2000, 0)), Detection(2, BALL, Vec2(2100, 0))
    wa, wb = 2000 / 4000, 1900 / 4000
    expected = (wa * 2000 + wb * 2100) / (wa + wb)
    assert fuse_detections([(da, a), (db, b)]).x == pytest.approx(expected, abs=1e-9)
    wa, wb = 1 / wa, 1 / wb
    expected = (wa * 2000 + wb * 2100) / (wa + wb)
    assert fuse_detections([(da, a), (db, b)], inverse_weights=True).x == pytest.approx(expected)


def test_camera_refine_examples():
    cam = CameraModel(3, Vec2(0, 0), 3000.0)
    assert camera_model_refine(cam, Detection(3, BALL, Vec2(3500, 0))).coverage_radius == 3500
    assert camera_model_refine(cam, Detection(3, BALL, Vec2(100, 0))).coverage_radius == 3000
    assert camera_model_refine(cam, Detection(3, BALL, Vec2(100, 0))).center == (50, 0)
    with pytest.raises(TrackerError):
        camera_model_refine(cam, Detection(4, BALL, Vec2(0, 0)))


# -- tracker -------------------------------------------------------------------

def test_spawn_from_empty_world():
    tr = Tracker(cameras=[WIDE])
    (obj,) = tr.ingest_frame(ball_frame(0.0, (100, 200)))
    assert obj.kind == BALL and obj.position == (100, 200)
    assert obj.confidence == pytest.approx(CP.p_seen) and not obj.valid


def test_coasting_without_detections():
    tr = Tracker(cameras=[WIDE])
    m = constant_velocity_model(1000.0, 10.0)
    tr.add_track(BALL, KalmanState(np.array([0.0, 0, 1000, 0]), np.eye(4)), confidence=1.0)
    for k in range(1, 6):
        (obj,) = tr.ingest_frame(ball_frame(k / 60))
    assert obj.position.x == pytest.approx(5000 / 60) and obj.position.y == 0
    assert obj.confidence == pytest.approx(1.0 - 5 * CP.p_lost)
    # coasting is exactly the composition of model predictions
    s = KalmanState(np.array([0.0, 0, 1000, 0]), np.eye(4))
    for k in range(1, 6):
        s = kalman_predict(s, m, k / 60 - (k - 1) / 60)
    np.testing.assert_array_equal(obj.state.x, s.x)
    np.testing.assert_array_equal(obj.state.P, s.P)


def test_spurious_detection_never_valid():
    tr = Tracker(cameras=[WIDE])
    for k in range(12):
        pts = [(k * 10.0, 0.0)] + ([(-3000.0, 2500.0)] if k < 3 else [])
        objs = tr.ingest_frame(ball_frame(k / 60, *pts))
        far = [o for o in objs if o.position.x < -2000]
        assert all(not o.valid for o in far)
    real = tr.best(BALL)
    assert real is not None and real.valid and real.position.x == pytest.approx(110, abs=5)


def test_continuous_object_valid_within_five_frames():
    tr = Tracker(cameras=[WIDE])
    valid_at = None
    for k in range(8):
        (obj,) = tr.ingest_frame(ball_frame(k / 60, (0, 0)))
        if obj.valid and valid_at is None:
            valid_at = k + 1
    assert valid_at == 5 and obj.confidence == 1.0


def test_out_of_order_frame_rejected():
    tr = Tracker(cameras=[WIDE])
    tr.ingest_frame(ball_frame(1.0, (0, 0)))
    with pytest.raises(TrackerError):
        tr.ingest_frame(ball_frame(0.5, (0, 0)))


def test_tracks_expire():
    tr = Tracker(TrackerConfig(expiry=0.5), cameras=[WIDE])
    tr.ingest_frame(ball_frame(0.0, (0, 0)))
    for k in range(1, 60):
        objs = tr.ingest_frame(ball_frame(k / 60))
    assert objs == ()


def test_track_outside_camera_keeps_confidence():
    left = CameraModel(0, Vec2(-3000, 0), 3000.0)
    right = CameraModel(1, Vec2(3000, 0), 3000.0)
    tr = Tracker(TrackerConfig(refine_cameras=False), cameras=[left, right])
    for k in range(5):
        tr.ingest_frame(ball_frame(k / 60, (-3000, 0), cam=0))
    before = tr.best(BALL).confidence
    for k in range(5, 10):
        tr.ingest_frame(ball_frame(k / 60, cam=1))
    assert tr.best(BALL).confidence == before


def test_two_cameras_fuse_into_one_track():
    a = CameraModel(1, Vec2(-3000, 0), 4000.0)
    b = CameraModel(2, Vec2(3000, 0), 4000.0)
    tr = Tracker(TrackerConfig(refine_cameras=False), cameras=[a, b])
    objs = tr.ingest_tick([ball_frame(0.0, (-10, 5), cam=1), ball_frame(0.0, (10, 5), cam=2)])
    assert len(objs) == 1 and objs[0].position == pytest.approx((0, 5))


def test_robot_heading_is_filtered():
    tr = Tracker(cameras=[WIDE])
    kind = ("robot", "blue", 3)
    for k in range(30):
        th = math.pi - 0.01 + 0.02 * (k % 2)  # jitters across the +-pi seam
        frame = DetectionFrame(k / 60, 0, (Detection(0, kind, Vec2(0, 0), th),))
        (obj,) = tr.ingest_frame(frame)
    assert abs(abs(obj.theta) - math.pi) < 0.02


def test_record_round_trip():
    frame = DetectionFrame(0.25, 1, (Detection(1, BALL, Vec2(1.5, -2.0)),
                                     Detection(1, ("robot", "yellow", 4), Vec2(7, 8), 0.5)))
    assert parse_frame(json.dumps(frame_to_record(frame))) == frame
    with pytest.raises(TrackerError, match="camera_id"):
        parse_frame('{"t": 0}')
    with pytest.raises(TrackerError):
        parse_frame("{nope")


def test_noise_reduction_small():
    rng = np.random.default_rng(5)
    tr = Tracker(cameras=[WIDE])
    raw, filt = [], []
    for k in range(300):
        t = k / 60
        truth = np.array([-3000 + 1500 * t, 500 - 400 * t])
        z = truth + rng.normal(0, 10, 2)
        (obj,) = tr.ingest_frame(ball_frame(t, tuple(z)))
        if k >= 30:
            raw.append(z - truth)
            filt.append(np.array(obj.position) - truth)
    rmse = lambda e: math.sqrt(np.mean(np.sum(np.square(e), axis=1)))
    assert rmse(filt) < rmse(raw)
