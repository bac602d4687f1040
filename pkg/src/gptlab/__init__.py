"""gpt-lab: executable convex operational framework for generalized probabilistic theories."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .geometry import Cone, dual_cone, orthant, direct_sum, same_ray_set  # noqa: E402,F401
from .statespace import (  # noqa: E402,F401
    StateSpace,
    dual_space,
    is_weakly_self_dual,
    make_classical,
    make_irregular_hexagon,
    make_polygon,
    space_from_rays,
)
from .composite import is_separable, max_tensor, min_tensor  # noqa: E402,F401

__all__ = [
    "Cone",
    "StateSpace",
    "direct_sum",
    "dual_cone",
    "dual_space",
    "is_separable",
    "is_weakly_self_dual",
    "make_classical",
    "make_irregular_hexagon",
    "make_polygon",
    "max_tensor",
    "min_tensor",
    "orthant",
    "same_ray_set",
    "space_from_rays",
]
