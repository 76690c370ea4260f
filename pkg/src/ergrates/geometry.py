"""Convex bodies and the vector operations the rest of the package leans on.

Three body families are supported: centered balls, centered axis-aligned
ellipsoids, and the unit cube [0,1]^d.  Balls and ellipsoids are strictly
convex with smooth boundary; the cube is neither, and the operations that
need curvature or a unique support point reject it loudly rather than
returning something plausible.

Vectors are plain 1-D float ndarrays.  Every binary operation validates
that dimensions agree; silent broadcasting across mismatched dimensions is
exactly the bug class this module exists to prevent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Ball",
    "Cube",
    "Ellipsoid",
    "ConvexBody",
    "as_vec",
    "dot",
    "hadamard",
    "volume",
    "support",
    "extremal_points",
    "gaussian_curvature",
    "width",
    "is_strictly_convex",
    "parse_body",
    "format_body",
]

# Closed forms below are only trusted for d <= 4; quadrature oracles
# elsewhere stop at d <= 3.
MAX_DIM = 4

# Relative tolerance for "p lies on the boundary" in the defining equation.
BOUNDARY_RTOL = 1e-8


def as_vec(x, dim: int | None = None) -> np.ndarray:
    """Coerce x to a finite 1-D float vector, optionally checking its length."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    if dim is not None and v.size != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {v.size}")
    return v


def dot(x, y) -> float:
    """Euclidean inner product; raises on dimension mismatch."""
    x = as_vec(x)
    y = as_vec(y, dim=x.size)
    return float(np.dot(x, y))


def hadamard(x, t) -> np.ndarray:
    """Coordinatewise product x o t; raises on dimension mismatch."""
    x = as_vec(x)
    t = as_vec(t, dim=x.size)
    return x * t


def _unit(eta) -> np.ndarray:
    eta = as_vec(eta)
    n = float(np.linalg.norm(eta))
    if n == 0.0:
        raise ValueError("direction must be nonzero")
    if abs(n - 1.0) > 1e-9:
        raise ValueError(f"direction must be a unit vector (|eta| = {n:.3e})")
    return eta


def _unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def unit_sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in R^d (d=1 gives 2 points)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def _check_dim(d: int) -> None:
    if not 1 <= d <= MAX_DIM:
        raise ValueError(f"dimension must be in [1, {MAX_DIM}], got {d}")


@dataclass(frozen=True)
class Ball:
    """Centered Euclidean ball of radius R in R^d."""

    radius: float
    dim: int = 2

    def __post_init__(self):
        _check_dim(self.dim)
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"radius must be positive, got {self.radius}")

    @property
    def semi_axes(self) -> np.ndarray:
        return np.full(self.dim, float(self.radius))


@dataclass(frozen=True)
class Ellipsoid:
    """Centered axis-aligned ellipsoid sum_k (x_k / a_k)^2 <= 1."""

    axes: tuple[float, ...]

    def __post_init__(self):
        axes = tuple(float(a) for a in self.axes)
        _check_dim(len(axes))
        if any(not (np.isfinite(a) and a > 0) for a in axes):
            raise ValueError(f"semi-axes must be positive, got {axes}")
        object.__setattr__(self, "axes", axes)

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def semi_axes(self) -> np.ndarray:
        return np.asarray(self.axes, dtype=float)


@dataclass(frozen=True)
class Cube:
    """Unit cube [0,1]^d.  Not strictly convex; several operations reject it."""

    dim: int = 2

    def __post_init__(self):
        _check_dim(self.dim)


ConvexBody = Ball | Ellipsoid | Cube


def is_strictly_convex(body: ConvexBody) -> bool:
    return not isinstance(body, Cube)


def volume(body: ConvexBody) -> float:
    """Lebesgue volume L_d of the body."""
    if isinstance(body, Ball):
        return _unit_ball_volume(body.dim) * body.radius ** body.dim
    if isinstance(body, Ellipsoid):
        return _unit_ball_volume(body.dim) * float(np.prod(body.semi_axes))
    if isinstance(body, Cube):
        return 1.0
    raise TypeError(f"unknown body {body!r}")


def support(body: ConvexBody, eta) -> float:
    """Support function max_{y in K} (y, eta) for a unit direction eta.

    Parameters
    ----------
    body : ConvexBody
    eta : array_like
        Unit direction; anything off the unit sphere by more than 1e-9 is
        rejected so that callers do not silently feed scaled directions.

    Returns
    -------
    float
        The support value.  Positively homogeneous of degree 1 when
        extended off the sphere, which is why normalization is forced here.
    """
    eta = _unit(eta)
    if isinstance(body, Ball):
        as_vec(eta, dim=body.dim)
        return float(body.radius)
    if isinstance(body, Ellipsoid):
        a = body.semi_axes
        as_vec(eta, dim=a.size)
        return float(np.linalg.norm(a * eta))
    if isinstance(body, Cube):
        as_vec(eta, dim=body.dim)
        return float(np.sum(np.maximum(eta, 0.0)))
    raise TypeError(f"unknown body {body!r}")


def extremal_points(body: ConvexBody, eta) -> tuple[np.ndarray, np.ndarray]:
    """Unique boundary maximizer/minimizer (x+, x-) of (y, eta).

    Only defined for strictly convex bodies; the cube has faces, so the
    maximizer is not unique and the call is rejected.
    """
    eta = _unit(eta)
    if isinstance(body, Ball):
        as_vec(eta, dim=body.dim)
        xp = body.radius * eta
        return xp, -xp
    if isinstance(body, Ellipsoid):
        a = body.semi_axes
        as_vec(eta, dim=a.size)
        # Lagrange condition: boundary normal x/a^2 parallel to eta.
        u = float(np.linalg.norm(a * eta))
        xp = (a * a) * eta / u
        return xp, -xp
    if isinstance(body, Cube):
        raise ValueError("extremal points are not unique for the cube")
    raise TypeError(f"unknown body {body!r}")


def _on_boundary(body: Ball | Ellipsoid, p: np.ndarray) -> bool:
    a = body.semi_axes
    q = float(np.sum((p / a) ** 2))
    return abs(q - 1.0) <= BOUNDARY_RTOL


def gaussian_curvature(body: ConvexBody, p) -> float:
    """Gaussian curvature of the boundary at a boundary point p.

    For the ellipsoid sum (x_k/a_k)^2 = 1 the product of the d-1 principal
    curvatures at p has the closed form

        kappa(p) = (prod_k a_k^2)^(-1) * (sum_k p_k^2 / a_k^4)^(-(d+1)/2),

    which reduces to R^(1-d) on the ball.  p must satisfy the defining
    equation to relative tolerance 1e-8.
    """
    if isinstance(body, Cube):
        raise ValueError("cube boundary has no curvature (flat faces)")
    if isinstance(body, Ball):
        p = as_vec(p, dim=body.dim)
        if not _on_boundary(body, p):
            raise ValueError("point is not on the boundary")
        return float(body.radius) ** (1 - body.dim)
    if isinstance(body, Ellipsoid):
        a = body.semi_axes
        p = as_vec(p, dim=a.size)
        if not _on_boundary(body, p):
            raise ValueError("point is not on the boundary")
        d = a.size
        s = float(np.sum(p * p / a ** 4))
        return 1.0 / (float(np.prod(a * a)) * s ** ((d + 1) / 2.0))
    raise TypeError(f"unknown body {body!r}")


def width(body: ConvexBody, eta) -> float:
    """Width of the body along eta.

    Strictly convex bodies use the extremal points, (x+ - x-, eta); the
    cube falls back to the support-sum identity, which is equivalent.
    """
    eta = _unit(eta)
    if is_strictly_convex(body):
        xp, xm = extremal_points(body, eta)
        return float(np.dot(xp - xm, eta))
    return support(body, eta) + support(body, -eta)


# -- body spec strings -------------------------------------------------------
#
# Grammar used by config files and the CLI:
#   ball:R          (dimension supplied separately, default 2)
#   ellipsoid:a1,a2[,a3[,a4]]
#   cube            (dimension supplied separately, default 2)


def parse_body(spec: str, dim: int = 2) -> ConvexBody:
    """Parse a body spec string; raises ValueError with a usable message."""
    spec = spec.strip()
    if spec == "cube":
        return Cube(dim=dim)
    if spec.startswith("ball:"):
        try:
            r = float(spec[len("ball:"):])
        except ValueError:
            raise ValueError(f"bad ball spec {spec!r}: radius must be a number") from None
        return Ball(radius=r, dim=dim)
    if spec.startswith("ellipsoid:"):
        body = spec[len("ellipsoid:"):]
        try:
            axes = tuple(float(tok) for tok in body.split(","))
        except ValueError:
            raise ValueError(f"bad ellipsoid spec {spec!r}: axes must be numbers") from None
        if len(axes) < 2:
            raise ValueError(f"bad ellipsoid spec {spec!r}: need at least two axes")
        return Ellipsoid(axes=axes)
    raise ValueError(f"unknown body spec {spec!r} (expected ball:R, ellipsoid:a1,a2[,a3], or cube)")


def format_body(body: ConvexBody) -> str:
    if isinstance(body, Ball):
        return f"ball:{body.radius:.12g}"
    if isinstance(body, Ellipsoid):
        return "ellipsoid:" + ",".join(f"{a:.12g}" for a in body.axes)
    if isinstance(body, Cube):
        return "cube"
    raise TypeError(f"unknown body {body!r}")
