"""Propeller damage detection, localization and sizing from IMU and control logs."""

__version__ = "0.1.0"
