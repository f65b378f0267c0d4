"""Vision-based path following for a quad-rotor with virtual target points."""

from .errors import ConfigError, TrackError
from .imaging import BinaryFrame, GrayFrame, Kernel, PixelFrame, binarize, channel_conv, erode
from .ips import IpsConfig, IpsOutput, VtpTrackerState, process_frame
from .mission import MissionInputs, MissionState, Phase, step_mission
from .planner import PlannerConfig, Waypoint, plan_step, predicted_speed
from .sim import RunMetrics, SimConfig, TrajectoryLog, run, sweep_alpha
from .vehicle import DroneState, VehicleParams, step_vehicle
from .world import CameraModel, TrackSpec, load_track, parse_track, path_distance, render_frame

__version__ = "0.1.0"
