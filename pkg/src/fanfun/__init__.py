"""Exact workbench for fan functionals on Cantor space.

Submodules: ``cantor`` (bit strings, cylinders, trees, dyadic measure),
``functionals`` (associates and paths), ``fan`` (special covers),
``weakfan`` (weak covers), ``kleene`` (the S1-S9 interpreter), ``atr``
(transfinite recursion via covers), ``structures`` (Θ-structure codes)
and ``cli``.
"""

__version__ = "0.1.0"

from .cantor import BinaryTree, BitString, Cylinder, Dyadic, covers_cantor, cylinder_measure, union_measure
from .errors import FanError
from .functionals import Associate, Fuel, apply
from .verdict import Verdict

__all__ = [
    "Associate", "BinaryTree", "BitString", "Cylinder", "Dyadic", "FanError", "Fuel", "Verdict",
    "__version__", "apply", "covers_cantor", "cylinder_measure", "union_measure",
]
