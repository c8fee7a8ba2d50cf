"""Small correlating circuits over arbitrary distributions, and certified hard random juntas."""
from .corefn import Distribution, TruthTable
from .circuit import Circuit
from .kernels import BACKEND

__all__ = ["BACKEND", "Circuit", "Distribution", "TruthTable"]
__version__ = "0.1.0"
