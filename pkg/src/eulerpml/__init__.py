"""Smith-factorization PML for the 2D linearized Euler equations.

Layers:
    core     parameter records, validation, grids, damping profiles
    polymat  polynomial matrices, Smith normal form, symbol factorizations
    modes    mode exponents, eigenvectors, interface reflection solves
    solver   staggered-grid FDTD stepper with the auxiliary-field layer
    harness  reference runs, error tables, stability probes, config I/O
    cli      the eulerpml command line front end
"""

from .core import FlowParams, FourierPoint, GridSpec, PmlConfig, SourceSpec
from .errors import EulerPmlError

__version__ = "0.1.0"

__all__ = [
    "EulerPmlError",
    "FlowParams",
    "FourierPoint",
    "GridSpec",
    "PmlConfig",
    "SourceSpec",
    "__version__",
]
