"""Integration of forms, densities and two-jet integrands through cochains on the pair groupoid."""
from .cochain import Cochain, RelativeCochain
from .integrate import ConvergenceReport
from .mesh import Triangulation
from .stochastic import BrownianPath, Jet2Integrand, MonteCarloReport

__version__ = "0.1.0"

__all__ = [
    "BrownianPath",
    "Cochain",
    "ConvergenceReport",
    "Jet2Integrand",
    "MonteCarloReport",
    "RelativeCochain",
    "Triangulation",
    "__version__",
]
