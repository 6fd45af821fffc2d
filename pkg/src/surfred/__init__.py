"""Surface-code decoding hardness reductions with exact arithmetic."""

from surfred.pauli import PauliOperator, parse_rational
from surfred.lattice import RotatedLayout, SyndromeVector, build_rotated_layout
from surfred.noise import NoiseModel, QubitNoise

__all__ = [
    "PauliOperator",
    "parse_rational",
    "RotatedLayout",
    "SyndromeVector",
    "build_rotated_layout",
    "NoiseModel",
    "QubitNoise",
]
