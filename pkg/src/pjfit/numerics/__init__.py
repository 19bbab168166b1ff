"""Dense 2-D float64 math with hand-derived gradients.

Values are numpy arrays; every operation knows its own vector-Jacobian
product and records it on a Tape. There is no general graph machinery,
only the fixed op vocabulary the ranking model needs.
"""

from pjfit.numerics.matrix import DimensionError, Matrix, Tape
from pjfit.numerics.params import BoundParams, Param, ParamStore, glorot_uniform
from pjfit.numerics.optim import TrainingDivergedError, adam_step
from pjfit.numerics.rng import seeded_rng, spawn_rngs
from pjfit.numerics.gradcheck import finite_diff_check
from pjfit.numerics import ops

__all__ = [
    "DimensionError",
    "Matrix",
    "Tape",
    "Param",
    "ParamStore",
    "BoundParams",
    "glorot_uniform",
    "TrainingDivergedError",
    "adam_step",
    "seeded_rng",
    "spawn_rngs",
    "finite_diff_check",
    "ops",
]
