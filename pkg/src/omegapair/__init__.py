"""Nearest admissible matrix pair toolkit.

Find the closest pair (E~, A~) to a given real pair (E, A) such that the
pencil s E~ - A~ is regular, impulse-free, and has all finite eigenvalues
inside a prescribed LMI region of the complex plane. Regions are composed
from standard primitives (half-planes, disks, strips, sectors, ellipses,
parabolic and hyperbolic regions) and their intersections.

Two solvers are provided: a projected fast gradient method for the open
left half-plane, and an extrapolated block coordinate descent for general
regions whose convex subproblem is handled by a built-in log-barrier
interior-point method.
"""

from .regions import (
    LmiRegion,
    RegionPrimitive,
    disk,
    ellipsoid,
    from_primitive,
    horizontal_strip,
    hurwitz,
    intersect,
    left_conic_sector,
    left_half_plane,
    left_hyperbola,
    left_parabola,
    membership,
    right_conic_sector,
    right_half_plane,
    right_hyperbola,
    right_parabola,
    schur,
    vertical_strip,
)
from .pencil import MatrixPair, admissibility_check, regularity_check, spectrum
from .dh import Certificate, DhParam, realize, verify_certificate
from .fgm import FgmOptions, solve_hurwitz
from .bcd import BcdOptions, solve_general
from .bench import grcar, msd, near_schur, relative_error

__all__ = [
    "LmiRegion",
    "RegionPrimitive",
    "MatrixPair",
    "DhParam",
    "Certificate",
    "FgmOptions",
    "BcdOptions",
    "disk",
    "ellipsoid",
    "from_primitive",
    "horizontal_strip",
    "hurwitz",
    "intersect",
    "left_conic_sector",
    "left_half_plane",
    "left_hyperbola",
    "left_parabola",
    "membership",
    "right_conic_sector",
    "right_half_plane",
    "right_hyperbola",
    "right_parabola",
    "schur",
    "vertical_strip",
    "spectrum",
    "regularity_check",
    "admissibility_check",
    "realize",
    "verify_certificate",
    "solve_hurwitz",
    "solve_general",
    "grcar",
    "msd",
    "near_schur",
    "relative_error",
]

__version__ = "0.1.0"
