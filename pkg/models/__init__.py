"""
Data Models for the Rendezvous & Docking MPC Simulator

This module exports all data model classes used throughout the application.
"""

from .orbit import OrbitParams, OrbitState, LosState, TranslationInput, MU_EARTH
from .attitude import InertiaParams, AttitudeState, WheelInput
from .target import TargetMotion, TargetMode, TargetKinematics, DesiredPose
from .mpc import (DiscreteModel, PredictionOperators, MpcTuning, CondensedCost, ConstraintParams,
                  ConstraintFamily, LinearInequalities, Selector, POSITION_FAMILIES, ATTITUDE_FAMILIES)
from .qp import QpProblem, QpSolution, QpStatus, KktResiduals, WarmStart
from .wrap import WrapChannel, WrapEvent, PendingShift, Direction
from .scenario import (Scenario, RunMode, StepRecord, TrajectoryLog, Metrics, ComparisonRow,
                       ComparisonReport, TRACKING_CHANNELS, ANGLE_CHANNELS, MARGIN_KEYS)

__all__ = [
    'OrbitParams', 'OrbitState', 'LosState', 'TranslationInput', 'MU_EARTH',
    'InertiaParams', 'AttitudeState', 'WheelInput',
    'TargetMotion', 'TargetMode', 'TargetKinematics', 'DesiredPose',
    'DiscreteModel', 'PredictionOperators', 'MpcTuning', 'CondensedCost', 'ConstraintParams',
    'ConstraintFamily', 'LinearInequalities', 'Selector', 'POSITION_FAMILIES', 'ATTITUDE_FAMILIES',
    'QpProblem', 'QpSolution', 'QpStatus', 'KktResiduals', 'WarmStart',
    'WrapChannel', 'WrapEvent', 'PendingShift', 'Direction',
    'Scenario', 'RunMode', 'StepRecord', 'TrajectoryLog', 'Metrics', 'ComparisonRow',
    'ComparisonReport', 'TRACKING_CHANNELS', 'ANGLE_CHANNELS', 'MARGIN_KEYS',
]
