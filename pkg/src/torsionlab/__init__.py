"""Torsion of finite cochain complexes, Witten deformation, zeta determinants,
discrete Morse complexes and parameter-dependent operator determinants."""
from .complex_core import (CochainComplex, ComplexError, LaplacianSpectrum, TorsionValue,
                           ValidationReport, euler_characteristic, laplacian, spectrum,
                           tensor_product, torsion, torsion_via_bases, validate_complex)
from .kernels import BACKEND

__all__ = [
    "BACKEND", "CochainComplex", "ComplexError", "LaplacianSpectrum", "TorsionValue",
    "ValidationReport", "euler_characteristic", "laplacian", "spectrum", "tensor_product",
    "torsion", "torsion_via_bases", "validate_complex",
]
__version__ = "0.1.0"
