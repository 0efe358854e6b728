"""kobalab: Kobayashi metric brackets, automorphism dynamics and SU(1,k) tools on model domains."""
from . import automorphisms, domains, dynamics, kernels, kobayashi, liegroup
from .domains import WHP, Ball, Domain, Ellipse, Polydisc
from .errors import DegenerateOptimizationError, KobalabError, NumericError, PreconditionError, SearchFailure

__version__ = "0.1.0"

__all__ = [
    "automorphisms", "domains", "dynamics", "kernels", "kobayashi", "liegroup",
    "Ball", "Domain", "Ellipse", "Polydisc", "WHP",
    "KobalabError", "PreconditionError", "NumericError", "SearchFailure", "DegenerateOptimizationError",
]
