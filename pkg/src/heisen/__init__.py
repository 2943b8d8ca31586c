"""Spectral calculus of sub-Laplacian multipliers on the Heisenberg group."""
from .group import Point, MultiIndex, SmoothField, group_mul, inverse, dilate, homogeneous_norm
from .algebra import AlgebraElement, parse_expression, format_element
from .biradial import SpectralGrid, BiradialFunction, BiradialInput, analyze, synthesize
from .multipliers import MultiplierSpec, JointMultiplierSpec, kernel_coeffs, apply, parse_symbol
from .probes import ProbeReport, EvolutionState, evolve

__version__ = "0.1.0"

__all__ = [
    "Point", "MultiIndex", "SmoothField", "group_mul", "inverse", "dilate",
    "homogeneous_norm", "AlgebraElement", "parse_expression", "format_element",
    "SpectralGrid", "BiradialFunction", "BiradialInput", "analyze", "synthesize",
    "MultiplierSpec", "JointMultiplierSpec", "kernel_coeffs", "apply", "parse_symbol",
    "ProbeReport", "EvolutionState", "evolve",
]
