"""Simulation and verification of local times of stochastic processes."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    HypothesisViolation,
    ProcessSpec,
    RngStream,
    SamplePath,
    ScalingReport,
    TimeGrid,
    make_grid,
    substream,
)
from .processes import PathSampler, make_sampler, sample_paths  # noqa: E402

__all__ = [
    "HypothesisViolation",
    "PathSampler",
    "ProcessSpec",
    "RngStream",
    "SamplePath",
    "ScalingReport",
    "TimeGrid",
    "make_grid",
    "make_sampler",
    "sample_paths",
    "substream",
    "__version__",
]
