"""Strain-gradient (simplified Toupin-Mindlin) nanoplate: Neumann problem solver and
unique-continuation laboratory."""

from .discretization import assemble, build_space, eval_field
from .geometry import Disk, MappedDomain, RoundedRectangle, boundary_frame, map_jacobians, surface_derivatives
from .material import (MaterialField, convexity_probe, couple_M, couple_Mh, eval_coefficients,
                       eval_tensors)
from .neumann import NeumannData, compatibility_check, load_functional, synthesize
from .solver import solve, stability_report

__version__ = "0.1.0"

__all__ = [
    "MaterialField", "eval_coefficients", "eval_tensors", "couple_M", "couple_Mh", "convexity_probe",
    "Disk", "RoundedRectangle", "MappedDomain", "boundary_frame", "surface_derivatives", "map_jacobians",
    "NeumannData", "compatibility_check", "synthesize", "load_functional",
    "build_space", "assemble", "eval_field", "solve", "stability_report",
]
