"""Driven quantum dot-cavity simulator: Mollow spectra, sideband linewidths and phonon-rate calibration."""

from ._core import (
    ConfigError,
    DimensionError,
    DriveTarget,
    Frame,
    InvalidArgument,
    IoError,
    MollowError,
    NumericalError,
    SystemParams,
    estimated_rabi,
    fit_lower_sideband,
    fit_segmented,
    locate_breakpoint,
    preset_names,
    preset_text,
    run_config,
    simulate_spectrum,
    vacuum_rabi_splitting,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "DriveTarget",
    "Frame",
    "InvalidArgument",
    "IoError",
    "MollowError",
    "NumericalError",
    "SystemParams",
    "estimated_rabi",
    "fit_lower_sideband",
    "fit_segmented",
    "locate_breakpoint",
    "preset_names",
    "preset_text",
    "run_config",
    "simulate_spectrum",
    "vacuum_rabi_splitting",
]
