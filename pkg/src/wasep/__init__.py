"""Simulation and verification toolkit for weakly asymmetric corner
growth on discrete bridges: exact equilibrium sampling, hydrodynamic
comparison against an inviscid conservation law, discrete heat kernels,
and Hopf-Cole fluctuation diagnostics."""

__version__ = "0.1.0"

from .model import ModelParams, make_params  # noqa: F401
