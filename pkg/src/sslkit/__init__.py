"""Perception and planning toolkit for small-size robot soccer."""

from .geom import FieldGeometry, Pose, Vec2, angle_between, ray_field_exit
from .interception import (BallModel, HeatMap, InterceptKind, InterceptParams, InterceptResult,
                           intercept, intercept_heatmap, predict_ball_position,
                           write_heatmap_csv, write_heatmap_pgm)
from .motion import MotionLimits, TimeProfile, arrival_time, plan_1d, predict_robot_arrival_time
from .radio import (ControlPacket, RobotCommand, bandwidth_estimate, decode, encode,
                    packets_for)
from .simworld import PassScenario, SimConfig, pass_success_rate, sweep
from .tactics import (BallTarget, MarkingPoint, Skill, SkillChoice, assign_roles,
                      marking_point, select_skill)
from .tracker import (CameraModel, ConfidenceParams, Detection, DetectionFrame, KalmanModel,
                      KalmanState, Tracker, TrackerConfig, confidence_step,
                      constant_velocity_model, fuse_detections, is_valid, kalman_predict,
                      kalman_update)

__version__ = "0.1.0"
