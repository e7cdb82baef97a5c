"""Heat kernels of Vladimirov-type operators on finite adeles and on ``R x A_f``."""

from .adele import AdeleBatch, Ball, FiniteAdele, Sphere, character
from .adelic import AdelePoint, AdelicKernel
from .errors import AdelheatError, PrecisionError, ResourceError, UsageError
from .filtration import Filtration
from .heat import HeatKernelFin, TransitionFunction
from .markov import FiniteAdeleSampler, PathSample, simulate_path, simulate_paths
from .schwartz import RadialProfile, TestFunction, fourier, inverse_fourier
from .stable import StableKernel

__version__ = "0.1.0"

__all__ = [
    "AdeleBatch", "AdelePoint", "AdelheatError", "AdelicKernel", "Ball", "FiniteAdele",
    "FiniteAdeleSampler", "Filtration", "HeatKernelFin", "PathSample", "PrecisionError",
    "RadialProfile", "ResourceError", "Sphere", "StableKernel", "TestFunction",
    "TransitionFunction", "UsageError", "character", "fourier", "inverse_fourier",
    "simulate_path", "simulate_paths",
]
