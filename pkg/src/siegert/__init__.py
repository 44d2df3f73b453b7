"""Resonance energies and widths from real Laguerre basis sets.

The stabilization method sweeps a coupling strength, localises resonances
through density-overlap minima and converts the boundary density of a real
eigenvector into a width. An exact Siegert solver serves as reference.
"""
__version__ = "0.1.0"

from .basis import LaguerreBasis, assemble_factors, dump_matrices, gauss_laguerre
from .exact import ComplexEnergy, ExactResonance, find_resonance, matching_function
from .potentials import LambdaFamily, PotentialSpec, WellBarrierParams, well_barrier
from .stabilization import do_curve, localize, sweep
from .width import WidthInput, gamma_from_width_input, gamma_general, gamma_p_wave, gamma_s_wave

__all__ = [
    "ComplexEnergy", "ExactResonance", "LambdaFamily", "LaguerreBasis", "PotentialSpec",
    "WellBarrierParams", "WidthInput", "assemble_factors", "do_curve", "dump_matrices",
    "find_resonance", "gamma_from_width_input", "gamma_general", "gamma_p_wave", "gamma_s_wave",
    "gauss_laguerre", "localize", "matching_function", "sweep", "well_barrier",
]
