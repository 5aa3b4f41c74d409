"""Two-block group-algebra quantum LDPC codes: construction, girth search,
message-passing decoding, Monte Carlo evaluation and decoder diagnostics."""

from .code_builder import CssCode, GeneratorSets, build_2bga, margulis_generators
from .decoder import DecoderConfig, decode
from .finite_group import FiniteGroup, GroupElement, GroupSpec
from .gf2 import BinMatrix

__version__ = "0.1.0"

__all__ = [
    "BinMatrix",
    "CssCode",
    "DecoderConfig",
    "FiniteGroup",
    "GeneratorSets",
    "GroupElement",
    "GroupSpec",
    "build_2bga",
    "decode",
    "margulis_generators",
    "__version__",
]
