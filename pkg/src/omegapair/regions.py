"""LMI regions of the complex plane.

A region is the set {z : B + C z + C^T conj(z) < 0} (matrix negative
definite) for a real symmetric B and a real square C. This module builds
such (B, C) pairs for twelve standard primitives (half-planes, strips,
disks, conic sectors, ellipses, parabolic and hyperbolic regions),
composes them by intersection, evaluates membership of complex points,
and exposes the per-primitive stability LMI blocks used by the solvers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import block_diag

__all__ = [
    "RegionPrimitive",
    "LmiRegion",
    "Membership",
    "left_conic_sector",
    "right_conic_sector",
    "disk",
    "vertical_strip",
    "left_half_plane",
    "right_half_plane",
    "ellipsoid",
    "left_parabola",
    "right_parabola",
    "left_hyperbola",
    "right_hyperbola",
    "horizontal_strip",
    "from_primitive",
    "intersect",
    "characteristic_matrix",
    "membership",
    "uniform_part_nonempty",
    "stability_lmi_blocks",
    "initial_scalar_interval",
    "region_from_dict",
    "region_to_dict",
    "load_region",
    "is_hurwitz",
    "hurwitz",
    "schur",
]

DEFAULT_MARGIN_TOL = 1e-9

PRIMITIVE_KINDS = (
    "left_conic_sector",
    "right_conic_sector",
    "disk",
    "vertical_strip",
    "left_half_plane",
    "right_half_plane",
    "ellipsoid",
    "left_parabola",
    "right_parabola",
    "left_hyperbola",
    "right_hyperbola",
    "horizontal_strip",
)

# Factor c such that -(B (x) T + (C-C^T) (x) J - (C+C^T) (x) R) equals
# c times the stability block, up to a signed block permutation for the
# disk (which uses the conventional (B, C) with C = [[0,0],[-1,0]]).
TABLE_BLOCK_SCALE = {
    "left_conic_sector": 2.0,
    "right_conic_sector": 2.0,
    "disk": 1.0,
    "vertical_strip": 2.0,
    "left_half_plane": 2.0,
    "right_half_plane": 2.0,
    "ellipsoid": 1.0,
    "left_parabola": 1.0,
    "right_parabola": 1.0,
    "left_hyperbola": 1.0,
    "right_hyperbola": 1.0,
    "horizontal_strip": 1.0,
}


@dataclass(frozen=True)
class RegionPrimitive:
    """One elementary region, identified by kind and scalar parameters."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PRIMITIVE_KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        _validate_params(self.kind, self.params)

    def __getattr__(self, name):
        try:
            return self.params[name]
        except KeyError:
            raise AttributeError(name) from None

    def to_dict(self):
        return {"kind": self.kind, **self.params}


def _require(cond, message):
    if not cond:
        raise ValueError(message)


def _validate_params(kind, params):
    p = params
    if kind in ("left_conic_sector", "right_conic_sector"):
        _require(set(p) == {"a", "theta"}, f"{kind} takes parameters a, theta")
        _require(0.0 < p["theta"] < math.pi / 2,
                 f"sector half-angle theta must be in (0, pi/2), got {p['theta']}")
    elif kind == "disk":
        _require(set(p) == {"q", "r"}, "disk takes parameters q, r")
        _require(p["r"] > 0, f"disk radius r must be positive, got {p['r']}")
    elif kind == "vertical_strip":
        _require(set(p) == {"h", "k"}, "vertical_strip takes parameters h, k")
        _require(p["h"] < p["k"],
                 f"vertical_strip needs h < k, got h={p['h']}, k={p['k']}")
    elif kind == "left_half_plane":
        _require(set(p) == {"k"}, "left_half_plane takes parameter k")
    elif kind == "right_half_plane":
        _require(set(p) == {"h"}, "right_half_plane takes parameter h")
    elif kind == "ellipsoid":
        _require(set(p) == {"q_e", "a_e", "b_e"},
                 "ellipsoid takes parameters q_e, a_e, b_e")
        _require(p["a_e"] > 0, f"ellipsoid semi-axis a_e must be positive, got {p['a_e']}")
        _require(p["b_e"] > 0, f"ellipsoid semi-axis b_e must be positive, got {p['b_e']}")
    elif kind in ("left_parabola", "right_parabola"):
        _require(set(p) == {"q_p", "c_p"}, f"{kind} takes parameters q_p, c_p")
        _require(p["c_p"] > 0, f"parabola curvature c_p must be positive, got {p['c_p']}")
    elif kind in ("left_hyperbola", "right_hyperbola"):
        _require(set(p) == {"a_h", "b_h"}, f"{kind} takes parameters a_h, b_h")
        _require(p["a_h"] > 0, f"hyperbola semi-axis a_h must be positive, got {p['a_h']}")
        _require(p["b_h"] > 0, f"hyperbola semi-axis b_h must be positive, got {p['b_h']}")
    elif kind == "horizontal_strip":
        _require(set(p) == {"w"}, "horizontal_strip takes parameter w")
        _require(p["w"] > 0, f"horizontal_strip half-width w must be positive, got {p['w']}")


def left_conic_sector(a, theta):
    """Sector opening left from apex (a, 0) with half-angle theta."""
    return RegionPrimitive("left_conic_sector", {"a": float(a), "theta": float(theta)})


def right_conic_sector(a, theta):
    """Sector opening right from apex (a, 0) with half-angle theta."""
    return RegionPrimitive("right_conic_sector", {"a": float(a), "theta": float(theta)})


def disk(q, r):
    """Open disk centered at (q, 0) with radius r."""
    return RegionPrimitive("disk", {"q": float(q), "r": float(r)})


def vertical_strip(h, k):
    """Open strip {h < Re(z) < k}."""
    return RegionPrimitive("vertical_strip", {"h": float(h), "k": float(k)})


def left_half_plane(k):
    """Open half-plane {Re(z) < k}."""
    return RegionPrimitive("left_half_plane", {"k": float(k)})


def right_half_plane(h):
    """Open half-plane {Re(z) > h}."""
    return RegionPrimitive("right_half_plane", {"h": float(h)})


def ellipsoid(q_e, a_e, b_e):
    """Open ellipse centered at (q_e, 0), horizontal semi-axis a_e, vertical b_e."""
    return RegionPrimitive("ellipsoid", {"q_e": float(q_e), "a_e": float(a_e), "b_e": float(b_e)})


def left_parabola(q_p, c_p):
    """Region left of the parabola Re(z) = q_p - (c_p/2) Im(z)^2."""
    return RegionPrimitive("left_parabola", {"q_p": float(q_p), "c_p": float(c_p)})


def right_parabola(q_p, c_p):
    """Region right of the parabola Re(z) = q_p + (c_p/2) Im(z)^2."""
    return RegionPrimitive("right_parabola", {"q_p": float(q_p), "c_p": float(c_p)})


def left_hyperbola(a_h, b_h):
    """Interior of the left branch of x^2/a_h^2 - y^2/b_h^2 = 1."""
    return RegionPrimitive("left_hyperbola", {"a_h": float(a_h), "b_h": float(b_h)})


def right_hyperbola(a_h, b_h):
    """Interior of the right branch of x^2/a_h^2 - y^2/b_h^2 = 1."""
    return RegionPrimitive("right_hyperbola", {"a_h": float(a_h), "b_h": float(b_h)})


def horizontal_strip(w):
    """Open strip {|Im(z)| < w}."""
    return RegionPrimitive("horizontal_strip", {"w": float(w)})


def _primitive_bc(p: RegionPrimitive):
    """Characteristic matrices (B, C) of one primitive.

    Chosen so that -(B (x) T + (C-C^T) (x) J - (C+C^T) (x) R) reproduces
    the stability block of `stability_lmi_blocks` times TABLE_BLOCK_SCALE
    (exactly for all kinds except the disk, where the two agree up to a
    signed block permutation).
    """
    k = p.kind
    if k == "left_conic_sector":
        a, th = p.a, p.theta
        s, c = math.sin(th), math.cos(th)
        B = -2.0 * a * s * np.eye(2)
        C = np.array([[s, c], [-c, s]])
    elif k == "right_conic_sector":
        a, th = p.a, p.theta
        s, c = math.sin(th), math.cos(th)
        B = 2.0 * a * s * np.eye(2)
        C = np.array([[-s, c], [-c, -s]])
    elif k == "disk":
        q, r = p.q, p.r
        B = np.array([[-r, q], [q, -r]])
        C = np.array([[0.0, 0.0], [-1.0, 0.0]])
    elif k == "vertical_strip":
        h, kk = p.h, p.k
        B = np.diag([-2.0 * kk, 2.0 * h])
        C = np.diag([1.0, -1.0])
    elif k == "left_half_plane":
        B = np.array([[-2.0 * p.k]])
        C = np.array([[1.0]])
    elif k == "right_half_plane":
        B = np.array([[2.0 * p.h]])
        C = np.array([[-1.0]])
    elif k == "ellipsoid":
        q, a, b = p.q_e, p.a_e, p.b_e
        B = np.array([[-a, -q], [-q, -a]])
        C = np.array([[0.0, (1.0 + a / b) / 2.0], [(1.0 - a / b) / 2.0, 0.0]])
    elif k == "left_parabola":
        g = math.sqrt(p.c_p / 2.0)
        B = np.diag([-1.0, -p.q_p])
        C = np.array([[0.0, g / 2.0], [-g / 2.0, 0.5]])
    elif k == "right_parabola":
        g = math.sqrt(p.c_p / 2.0)
        B = np.diag([-1.0, p.q_p])
        C = np.array([[0.0, g / 2.0], [-g / 2.0, -0.5]])
    elif k == "left_hyperbola":
        a, b = p.a_h, p.b_h
        B = np.array([[0.0, 1.0], [1.0, 0.0]])
        C = np.array([[1.0 / (2 * a), 1.0 / (2 * b)], [-1.0 / (2 * b), 1.0 / (2 * a)]])
    elif k == "right_hyperbola":
        a, b = p.a_h, p.b_h
        B = np.array([[0.0, 1.0], [1.0, 0.0]])
        C = np.array([[-1.0 / (2 * a), 1.0 / (2 * b)], [-1.0 / (2 * b), -1.0 / (2 * a)]])
    elif k == "horizontal_strip":
        w = p.w
        B = np.diag([-w, -w])
        C = np.array([[0.0, 0.5], [-0.5, 0.0]])
    else:  # pragma: no cover
        raise ValueError(f"unknown region kind {k!r}")
    return B, C


def _freeze(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LmiRegion:
    """A region {z : B + C z + C^T conj(z) < 0} with its building blocks.

    B is stored exactly symmetric. `primitives` records the intersection
    structure when the region was assembled from primitives; it is empty
    for regions built from raw (B, C).
    """

    B: np.ndarray
    C: np.ndarray
    primitives: tuple = ()

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        C = np.asarray(self.C, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise ValueError("B must be square")
        if C.shape != B.shape:
            raise ValueError("C must match the shape of B")
        object.__setattr__(self, "B", _freeze((B + B.T) / 2.0))
        object.__setattr__(self, "C", _freeze(C))
        object.__setattr__(self, "primitives", tuple(self.primitives))

    @property
    def size(self) -> int:
        return self.B.shape[0]


class Membership(NamedTuple):
    status: str  # "inside" | "boundary" | "outside"
    margin: float


def from_primitive(p: RegionPrimitive) -> LmiRegion:
    """Region for a single primitive; size 1 for half-planes, 2 otherwise."""
    B, C = _primitive_bc(p)
    return LmiRegion(B, C, (p,))


def intersect(*regions) -> LmiRegion:
    """Intersection of regions, by block-diagonal concatenation of (B, C)."""
    regs = [r if isinstance(r, LmiRegion) else from_primitive(r) for r in regions]
    if not regs:
        raise ValueError("intersect needs at least one region")
    B = block_diag(*[r.B for r in regs])
    C = block_diag(*[r.C for r in regs])
    prims = sum((r.primitives for r in regs), ())
    return LmiRegion(B, C, prims)


def characteristic_matrix(region: LmiRegion, z: complex) -> np.ndarray:
    """Evaluate B + C z + C^T conj(z); Hermitian by construction."""
    z = complex(z)
    F = region.B + region.C * z + region.C.T * np.conj(z)
    return (F + F.conj().T) / 2.0


def membership(region: LmiRegion, z: complex,
               margin_tol: float = DEFAULT_MARGIN_TOL) -> Membership:
    """Classify z by the largest eigenvalue of the characteristic matrix.

    margin is -lambda_max, so positive margins mean strictly inside.
    """
    lam_max = float(np.linalg.eigvalsh(characteristic_matrix(region, z))[-1])
    if lam_max < -margin_tol:
        status = "inside"
    elif lam_max > margin_tol:
        status = "outside"
    else:
        status = "boundary"
    return Membership(status, -lam_max)


def uniform_part_nonempty(region: LmiRegion, tol: float = DEFAULT_MARGIN_TOL) -> bool:
    """True iff C + C^T is positive or negative definite.

    This is exactly the condition under which {z : C z + C^T conj(z) < 0}
    is a nonempty cone.
    """
    sym = region.C + region.C.T
    eigs = np.linalg.eigvalsh(sym)
    scale = max(1.0, float(np.abs(eigs).max()))
    return bool(eigs[0] > tol * scale or eigs[-1] < -tol * scale)


def _check_tjr(T, J, R):
    T = np.asarray(T, dtype=float)
    J = np.asarray(J, dtype=float)
    R = np.asarray(R, dtype=float)
    n = T.shape[0]
    for name, M in (("T", T), ("J", J), ("R", R)):
        if M.ndim != 2 or M.shape != (n, n):
            raise ValueError(f"{name} must be {n}x{n}, got {M.shape}")
    return T, J, R


def stability_lmi_blocks(p: RegionPrimitive, T, J, R) -> np.ndarray:
    """Stability block of one primitive, linear in (T, J, R).

    The condition "block > 0" (positive definite) on T = E Q^{-1}, skew J
    and symmetric R places all finite eigenvalues of (T Q, (J - R) Q)
    inside the primitive's region.
    """
    T, J, R = _check_tjr(T, J, R)
    k = p.kind
    if k == "left_conic_sector":
        s, c = math.sin(p.theta), math.cos(p.theta)
        D = s * (p.a * T + R)
        return np.block([[D, -c * J], [c * J, D]])
    if k == "right_conic_sector":
        s, c = math.sin(p.theta), math.cos(p.theta)
        D = -s * (p.a * T + R)
        return np.block([[D, -c * J], [c * J, D]])
    if k == "disk":
        q, r = p.q, p.r
        return np.block([[r * T, q * T - J + R], [q * T + J + R, r * T]])
    if k == "vertical_strip":
        Z = np.zeros_like(T)
        return np.block([[p.k * T + R, Z], [Z, -p.h * T - R]])
    if k == "left_half_plane":
        return p.k * T + R
    if k == "right_half_plane":
        return -p.h * T - R
    if k == "ellipsoid":
        q, a, b = p.q_e, p.a_e, p.b_e
        off = q * T + (a / b) * J + R
        return np.block([[a * T, off.T], [off, a * T]])
    if k == "left_parabola":
        g = math.sqrt(p.c_p / 2.0)
        return np.block([[T, -g * J], [g * J, p.q_p * T + R]])
    if k == "right_parabola":
        g = math.sqrt(p.c_p / 2.0)
        return np.block([[T, -g * J], [g * J, -p.q_p * T - R]])
    if k == "left_hyperbola":
        a, b = p.a_h, p.b_h
        return np.block([[R / a, -T - J / b], [-T + J / b, R / a]])
    if k == "right_hyperbola":
        a, b = p.a_h, p.b_h
        return np.block([[-R / a, -T - J / b], [-T + J / b, -R / a]])
    if k == "horizontal_strip":
        return np.block([[p.w * T, -J], [J, p.w * T]])
    raise ValueError(f"unknown region kind {k!r}")  # pragma: no cover


def initial_scalar_interval(p: RegionPrimitive):
    """Open interval of rho making the block at (T, J, R) = (I, 0, rho I)
    positive definite. Endpoints may be +-inf."""
    k = p.kind
    inf = math.inf
    if k == "left_conic_sector":
        return (-p.a, inf)
    if k == "right_conic_sector":
        return (-inf, -p.a)
    if k == "disk":
        return (-p.q - p.r, -p.q + p.r)
    if k == "vertical_strip":
        return (-p.k, -p.h)
    if k == "left_half_plane":
        return (-p.k, inf)
    if k == "right_half_plane":
        return (-inf, -p.h)
    if k == "ellipsoid":
        return (-p.q_e - p.a_e, -p.q_e + p.a_e)
    if k == "left_parabola":
        return (-p.q_p, inf)
    if k == "right_parabola":
        return (-inf, -p.q_p)
    if k == "left_hyperbola":
        return (p.a_h, inf)
    if k == "right_hyperbola":
        return (-inf, -p.a_h)
    if k == "horizontal_strip":
        return (-inf, inf)
    raise ValueError(f"unknown region kind {k!r}")  # pragma: no cover


def hurwitz() -> LmiRegion:
    """The open left half-plane {Re(z) < 0}."""
    return from_primitive(left_half_plane(0.0))


def schur() -> LmiRegion:
    """The open unit disk."""
    return from_primitive(disk(0.0, 1.0))


def is_hurwitz(region: LmiRegion) -> bool:
    """True iff the region is exactly the single primitive {Re(z) < 0}."""
    return (len(region.primitives) == 1
            and region.primitives[0].kind == "left_half_plane"
            and region.primitives[0].k == 0.0)


def in_closed_left_half_plane(region: LmiRegion, probe_box: float = 1e3,
                              samples: int = 400) -> bool:
    """Heuristic test that the region lies in {Re(z) <= 0}.

    Exact for regions built from primitives (interval arithmetic on their
    real-axis extents); for raw (B, C) regions falls back to sampling the
    right half of a large box.
    """
    if region.primitives:
        # The intersection is in the closed left half-plane as soon as one
        # factor is; each primitive's maximal real part is available in
        # closed form.
        for p in region.primitives:
            if _max_real_part(p) <= 0.0:
                return True
        return False
    rng = np.random.default_rng(20170301)
    pts = rng.uniform(0, probe_box, size=samples) + 1j * rng.uniform(
        -probe_box, probe_box, size=samples)
    pts = np.concatenate([pts, np.linspace(1e-9, probe_box, 50)])
    return not any(membership(region, z).status == "inside" for z in pts)


def _max_real_part(p: RegionPrimitive) -> float:
    k = p.kind
    if k == "left_conic_sector":
        return p.a
    if k == "disk":
        return p.q + p.r
    if k == "vertical_strip":
        return p.k
    if k == "left_half_plane":
        return p.k
    if k == "ellipsoid":
        return p.q_e + p.a_e
    if k == "left_parabola":
        return p.q_p
    if k == "left_hyperbola":
        return -p.a_h
    return math.inf


def region_from_dict(obj) -> LmiRegion:
    """Build a region from its JSON form.

    Accepted forms: {"intersect": [primitive, ...]}, {"raw": {"B": ..., "C": ...}},
    or a single primitive object {"kind": ..., ...}.
    """
    if not isinstance(obj, dict):
        raise ValueError("region spec must be a JSON object")
    if "raw" in obj:
        raw = obj["raw"]
        return LmiRegion(np.asarray(raw["B"], dtype=float),
                         np.asarray(raw["C"], dtype=float))
    if "intersect" in obj:
        prims = [_primitive_from_dict(d) for d in obj["intersect"]]
        if not prims:
            raise ValueError("region spec 'intersect' list is empty")
        return intersect(*prims)
    if "kind" in obj:
        return from_primitive(_primitive_from_dict(obj))
    raise ValueError("region spec needs one of the keys 'intersect', 'raw', 'kind'")


def _primitive_from_dict(d) -> RegionPrimitive:
    d = dict(d)
    try:
        kind = d.pop("kind")
    except KeyError:
        raise ValueError("primitive spec is missing 'kind'") from None
    return RegionPrimitive(kind, {k: float(v) for k, v in d.items()})


def region_to_dict(region: LmiRegion):
    if region.primitives:
        return {"intersect": [p.to_dict() for p in region.primitives]}
    return {"raw": {"B": region.B.tolist(), "C": region.C.tolist()}}


def load_region(path) -> LmiRegion:
    with open(path) as fh:
        return region_from_dict(json.load(fh))
