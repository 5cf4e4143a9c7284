"""Simulation framework for compensation-motion based synergy personalisation.

Time domain: the synergy controller and IMU feature pipeline turn one reach
into trunk/shoulder forward displacements. Iteration domain: an
extremum-seeking personaliser adjusts the synergy from the per-reach cost.
"""
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
