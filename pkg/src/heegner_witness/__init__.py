"""Desk-scale witness pipeline: Heegner points, ring class towers, L-values.

The package verifies, curve by curve, every constructive ingredient needed to
grow the Mordell-Weil rank through a tower of ring class fields: the auxiliary
imaginary quadratic field, the prime q and the prime sequence {p_n}, the exact
Galois structure of the ring class steps, numeric Heegner point identities
(trace relation, Gross-Zagier correspondence), and the exact q-divisibility
bookkeeping that rules out a finitely generated limit group.
"""

__version__ = "0.1.0"

from .ec_core import CurveQ, an_series, ap, count_points, discriminant, good_reduction
from .quadforms import (
    class_group,
    kronecker,
    reduced_forms,
    ring_class_structure,
    splitting_type,
    unit_quotient_structure,
)

__all__ = [
    "CurveQ",
    "an_series",
    "ap",
    "count_points",
    "discriminant",
    "good_reduction",
    "kronecker",
    "splitting_type",
    "reduced_forms",
    "class_group",
    "unit_quotient_structure",
    "ring_class_structure",
    "__version__",
]
