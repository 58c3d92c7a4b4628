"""Discrete Bernoulli diffusion on graph edges, with constraint-guaranteed
conditional sampling, an MMD evaluation harness, and a steering service."""

from .graphs import GraphSample
from .kernels import Kernel, NoiseSchedule, default_schedule

__all__ = ["GraphSample", "Kernel", "NoiseSchedule", "default_schedule"]
__version__ = "0.1.0"
