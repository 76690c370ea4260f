"""Spectral measures on R^d and the quantities the rate theory extracts.

Four measure families: finite atomic combs, radial power laws
c |x|^(gamma-d) on a punctured ball, anisotropic power products
c prod |x_k|^(alpha_k - 1) on a box, and finite sums of those.  All are
finite measures with no atom at the origin.

The two geometric quantities consumed downstream are the mass of small
ellipsoidal / box neighborhoods of the origin and the singular integral
int |x|^(-q) dsigma.  Masses are analytic in the symmetric cases and fall
back to angular quadrature (radial direction integrated in closed form)
otherwise; the singular integral is analytic for radial power laws and
otherwise runs a dyadic-shell probe that must come down on one of three
explicit outcomes: a value, infinity, or "undetermined" (an exception,
never a fabricated number).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .geometry import as_vec, unit_sphere_area

__all__ = [
    "AtomicMeasure",
    "RadialPowerMeasure",
    "AnisotropicPowerMeasure",
    "SumMeasure",
    "SpectralMeasure",
    "EllipsoidNeighborhood",
    "BoxNeighborhood",
    "Neighborhood",
    "UndeterminedDivergenceError",
    "mass",
    "singular_integral",
    "dyadic_singular_probe",
    "density_at",
    "total_mass",
    "parse_measure",
    "format_measure",
]


class UndeterminedDivergenceError(RuntimeError):
    """The dyadic divergence probe could not classify the integral."""


# -- measures ----------------------------------------------------------------


@dataclass(frozen=True)
class AtomicMeasure:
    """sum_j w_j * delta(x_j) with w_j > 0 and x_j != 0.  Empty = zero measure."""

    points: tuple[tuple[float, ...], ...]
    weights: tuple[float, ...]
    dim: int

    def __post_init__(self):
        pts = tuple(tuple(float(c) for c in p) for p in self.points)
        wts = tuple(float(w) for w in self.weights)
        if len(pts) != len(wts):
            raise ValueError("points and weights must pair up")
        for p in pts:
            if len(p) != self.dim:
                raise ValueError(f"atom {p} does not have dimension {self.dim}")
            if not any(c != 0.0 for c in p):
                raise ValueError("atoms at the origin are not allowed")
        if any(w <= 0.0 for w in wts):
            raise ValueError("atom weights must be positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)

    @property
    def locations(self) -> np.ndarray:
        if not self.points:
            return np.zeros((0, self.dim))
        return np.asarray(self.points, dtype=float)

    @property
    def weight_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)


@dataclass(frozen=True)
class RadialPowerMeasure:
    """Density c |x|^(gamma - d) on 0 < |x| <= R; total mass c*S_d*R^gamma/gamma."""

    gamma: float
    radius: float
    scale: float
    dim: int

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.scale < 0:
            raise ValueError("scale must be nonnegative")

    @classmethod
    def with_total_mass(cls, gamma: float, radius: float, total: float, dim: int):
        if gamma <= 0 or radius <= 0:
            raise ValueError("gamma and radius must be positive")
        s = total * gamma / (unit_sphere_area(dim) * radius ** gamma)
        return cls(gamma=gamma, radius=radius, scale=s, dim=dim)


@dataclass(frozen=True)
class AnisotropicPowerMeasure:
    """Density c prod_k |x_k|^(alpha_k - 1) on the box |x_k| <= b_k."""

    alphas: tuple[float, ...]
    halfwidths: tuple[float, ...]
    scale: float

    def __post_init__(self):
        al = tuple(float(a) for a in self.alphas)
        hw = tuple(float(b) for b in self.halfwidths)
        if len(al) != len(hw):
            raise ValueError("alphas and halfwidths must share a dimension")
        if any(a <= 0 for a in al):
            raise ValueError("every alpha must be positive")
        if any(b <= 0 for b in hw):
            raise ValueError("every box halfwidth must be positive")
        if self.scale < 0:
            raise ValueError("scale must be nonnegative")
        object.__setattr__(self, "alphas", al)
        object.__setattr__(self, "halfwidths", hw)

    @property
    def dim(self) -> int:
        return len(self.alphas)

    @classmethod
    def with_total_mass(cls, alphas, halfwidths, total: float):
        probe = cls(alphas=tuple(alphas), halfwidths=tuple(halfwidths), scale=1.0)
        return cls(
            alphas=probe.alphas,
            halfwidths=probe.halfwidths,
            scale=total / total_mass(probe),
        )


@dataclass(frozen=True)
class SumMeasure:
    """Finite sum of measures of the other families, sharing one dimension."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("sum measure needs at least one part")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise ValueError(f"sum parts disagree on dimension: {sorted(dims)}")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self) -> int:
        return self.parts[0].dim


SpectralMeasure = AtomicMeasure | RadialPowerMeasure | AnisotropicPowerMeasure | SumMeasure


def total_mass(m: SpectralMeasure) -> float:
    if isinstance(m, AtomicMeasure):
        return float(sum(m.weights))
    if isinstance(m, RadialPowerMeasure):
        return m.scale * unit_sphere_area(m.dim) * m.radius ** m.gamma / m.gamma
    if isinstance(m, AnisotropicPowerMeasure):
        out = m.scale
        for a, b in zip(m.alphas, m.halfwidths):
            out *= 2.0 * b ** a / a
        return out
    if isinstance(m, SumMeasure):
        return float(sum(total_mass(p) for p in m.parts))
    raise TypeError(f"unknown measure {m!r}")


def is_zero_measure(m: SpectralMeasure) -> bool:
    return total_mass(m) == 0.0


# -- neighborhoods of the origin ---------------------------------------------


@dataclass(frozen=True)
class EllipsoidNeighborhood:
    """Open ellipsoid {x : sum (x_k / delta_k)^2 < 1}."""

    semi_axes: tuple[float, ...]

    def __post_init__(self):
        ax = tuple(float(a) for a in self.semi_axes)
        if any(a <= 0 for a in ax):
            raise ValueError("neighborhood semi-axes must be positive")
        object.__setattr__(self, "semi_axes", ax)

    @classmethod
    def from_inverse(cls, t):
        t = as_vec(t)
        if np.any(t <= 0):
            raise ValueError("t must be positive in every coordinate")
        return cls(semi_axes=tuple(1.0 / t))

    @property
    def dim(self) -> int:
        return len(self.semi_axes)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = np.asarray(self.semi_axes)
        return np.sum((pts / d[None, :]) ** 2, axis=1) < 1.0

    def radial_profile(self, omega: np.ndarray) -> np.ndarray:
        """Boundary radius along unit directions omega (rows)."""
        d = np.asarray(self.semi_axes)
        return 1.0 / np.linalg.norm(np.atleast_2d(omega) / d[None, :], axis=1)


@dataclass(frozen=True)
class BoxNeighborhood:
    """Half-open box {x : -h_k < x_k <= h_k}, the image of {-1 < t_k x_k <= 1}."""

    halfwidths: tuple[float, ...]

    def __post_init__(self):
        hw = tuple(float(h) for h in self.halfwidths)
        if any(h <= 0 for h in hw):
            raise ValueError("box halfwidths must be positive")
        object.__setattr__(self, "halfwidths", hw)

    @classmethod
    def from_inverse(cls, t):
        t = as_vec(t)
        if np.any(t <= 0):
            raise ValueError("t must be positive in every coordinate")
        return cls(halfwidths=tuple(1.0 / t))

    @property
    def dim(self) -> int:
        return len(self.halfwidths)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        h = np.asarray(self.halfwidths)
        return np.all((pts > -h[None, :]) & (pts <= h[None, :]), axis=1)

    def radial_profile(self, omega: np.ndarray) -> np.ndarray:
        om = np.abs(np.atleast_2d(omega))
        h = np.asarray(self.halfwidths)
        with np.errstate(divide="ignore"):
            ratios = np.where(om > 0.0, h[None, :] / om, np.inf)
        return np.min(ratios, axis=1)


Neighborhood = EllipsoidNeighborhood | BoxNeighborhood


# -- angular quadrature helpers ----------------------------------------------
#
# Masses of star-shaped sets under power-homogeneous densities reduce to
# integrals over the first orthant of the sphere (everything here is even
# per axis).  End segments use Gauss-Jacobi rules so the |omega_k|^(alpha-1)
# axis singularities are absorbed into the weights; radial truncation kinks
# are located numerically and become segment breakpoints.

_QUAD_ORDER = 24


def _end_power_rule(a: float, b: float, exponent: float, at_lower: bool, order: int):
    """Rule on [a, b] for integrands ~ (x-a)^exponent or (b-x)^exponent.

    Returned weights apply to the full integrand (the singular factor is
    divided back out at the nodes), so callers never special-case ends.
    """
    if exponent == 0.0:
        x, w = np.polynomial.legendre.leggauss(order)
        half = 0.5 * (b - a)
        return a + half * (x + 1.0), half * w
    if at_lower:
        x, w = special.roots_jacobi(order, 0.0, exponent)
        half = 0.5 * (b - a)
        nodes = a + half * (x + 1.0)
        weights = w * (half ** (exponent + 1.0)) / (nodes - a) ** exponent
        return nodes, weights
    x, w = special.roots_jacobi(order, exponent, 0.0)
    half = 0.5 * (b - a)
    nodes = a + half * (x + 1.0)
    weights = w * (half ** (exponent + 1.0)) / (b - nodes) ** exponent
    return nodes, weights


def _segment_rules(breaks: list[float], exp_lo: float, exp_hi: float, order: int):
    """Per-segment rules on [breaks[0], breaks[-1]] with singular ends."""
    nodes, weights = [], []
    n_seg = len(breaks) - 1
    for i in range(n_seg):
        a, b = breaks[i], breaks[i + 1]
        if b - a <= 0:
            continue
        if i == 0 and exp_lo != 0.0:
            nd, wt = _end_power_rule(a, b, exp_lo, at_lower=True, order=order)
        elif i == n_seg - 1 and exp_hi != 0.0:
            nd, wt = _end_power_rule(a, b, exp_hi, at_lower=False, order=order)
        else:
            x, w = np.polynomial.legendre.leggauss(order)
            half = 0.5 * (b - a)
            nd, wt = a + half * (x + 1.0), half * w
        nodes.append(nd)
        weights.append(wt)
    return np.concatenate(nodes), np.concatenate(weights)


def _refined_breaks(breaks: list[float], max_len: float) -> list[float]:
    """Split long segments so narrow angular features are resolved.

    Keeps the original break points, so Gauss-Jacobi end rules still sit
    flush against the singular ends.
    """
    out = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        n = max(1, int(math.ceil((b - a) / max_len)))
        out.extend(a + (b - a) * k / n for k in range(n))
    out.append(breaks[-1])
    return out


def _crossings(fn, lo: float, hi: float, n: int = 4096) -> list[float]:
    """Sign changes of fn on (lo, hi), refined by brentq."""
    xs = np.linspace(lo, hi, n)
    vals = fn(xs)
    out = []
    for i in range(n - 1):
        if vals[i] == 0.0:
            out.append(float(xs[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            out.append(float(optimize.brentq(lambda x: float(fn(np.array([x]))[0]), xs[i], xs[i + 1], xtol=1e-14)))
    return out


def _octant_directions_2d(phi: np.ndarray) -> np.ndarray:
    return np.stack([np.cos(phi), np.sin(phi)], axis=-1)


def _orthant_integral_2d(exponents: tuple[float, float], g, extra_breaks=()) -> float:
    """4 * int over phi in (0, pi/2) of |cos|^(e1) |sin|^(e2) ... folded into g.

    g(omega_rows) must contain the full angular integrand including the
    |omega_k|^(alpha_k - 1) factors; exponents = (alpha_1 - 1, alpha_2 - 1)
    tell the rule which end singularities to absorb.
    """
    e1, e2 = exponents
    breaks = sorted({0.0, math.pi / 2} | {float(b) for b in extra_breaks if 0.0 < b < math.pi / 2})
    breaks = _refined_breaks(breaks, math.pi / 32)
    nodes, weights = _segment_rules(list(breaks), exp_lo=e2, exp_hi=e1, order=_QUAD_ORDER)
    vals = g(_octant_directions_2d(nodes))
    return 4.0 * float(np.sum(vals * weights))


def _orthant_integral_3d(
    alphas: tuple[float, float, float], g, inner_breaks_fn=None, outer_breaks=()
) -> float:
    """8 * iterated integral over the first octant of the sphere.

    Outer variable phi, inner variable theta (polar).  The inner integral
    carries phi-dependent breakpoints (radial truncation kinks move with
    phi), which keeps each 1-D integral piecewise smooth.
    """
    a1, a2, a3 = alphas
    # theta end behavior: sin(theta)^(a1+a2-1) at 0, cos(theta)^(a3-1) at pi/2
    th_lo, th_hi = a1 + a2 - 1.0, a3 - 1.0
    ph_lo, ph_hi = a2 - 1.0, a1 - 1.0

    phi_breaks = sorted(
        {0.0, math.pi / 4, math.pi / 2}
        | {float(b) for b in outer_breaks if 0.0 < b < math.pi / 2}
    )
    phi_breaks = _refined_breaks(phi_breaks, math.pi / 16)
    phi_nodes, phi_weights = _segment_rules(phi_breaks, exp_lo=ph_lo, exp_hi=ph_hi, order=_QUAD_ORDER)

    total = 0.0
    for phi, wphi in zip(phi_nodes, phi_weights):
        breaks = {0.0, math.pi / 4, math.pi / 2}
        if inner_breaks_fn is not None:
            breaks |= {b for b in inner_breaks_fn(phi) if 0.0 < b < math.pi / 2}
        th_breaks = _refined_breaks(sorted(breaks), math.pi / 16)
        th_nodes, th_weights = _segment_rules(th_breaks, exp_lo=th_lo, exp_hi=th_hi, order=_QUAD_ORDER)
        st, ct = np.sin(th_nodes), np.cos(th_nodes)
        om = np.stack([st * math.cos(phi), st * math.sin(phi), ct], axis=-1)
        # sin(theta) from the surface element; the alpha powers live in g
        total += wphi * float(np.sum(g(om) * st * th_weights))
    return 8.0 * total


def _angular_density(m, om: np.ndarray) -> np.ndarray:
    """Angular factor A(omega) of the density: radial=scale, aniso=scale*prod|omega|^(alpha-1)."""
    if isinstance(m, RadialPowerMeasure):
        return np.full(om.shape[0], m.scale)
    al = np.asarray(m.alphas)
    return m.scale * np.prod(np.abs(om) ** (al[None, :] - 1.0), axis=1)


def _support_profile(m, om: np.ndarray) -> np.ndarray:
    """Radial extent of the measure's support along unit directions omega."""
    if isinstance(m, RadialPowerMeasure):
        return np.full(om.shape[0], m.radius)
    h = np.asarray(m.halfwidths)
    with np.errstate(divide="ignore"):
        ratios = np.where(np.abs(om) > 0.0, h[None, :] / np.abs(om), np.inf)
    return np.min(ratios, axis=1)


def _power_exponents(m) -> tuple[float, ...]:
    if isinstance(m, RadialPowerMeasure):
        return (0.0,) * m.dim
    return tuple(a - 1.0 for a in m.alphas)


def _radial_order(m) -> float:
    """Exponent s with mass ~ rho^s along each ray (gamma or sum of alphas)."""
    return m.gamma if isinstance(m, RadialPowerMeasure) else float(sum(m.alphas))


def _box_corner_breaks_2d(h) -> list[float]:
    return [math.atan2(h[1], h[0])]


def _continuous_mass(m, hood: Neighborhood) -> float:
    d = m.dim
    if hood.dim != d:
        raise ValueError("measure and neighborhood disagree on dimension")
    s = _radial_order(m)

    # d = 1: everything is an interval; do it in closed form.
    if d == 1:
        rho_n = hood.radial_profile(np.array([[1.0]]))[0]
        rho_s = _support_profile(m, np.array([[1.0]]))[0]
        r = min(rho_n, rho_s)
        return 2.0 * _angular_density(m, np.array([[1.0]]))[0] * r ** s / s

    # fully symmetric radial case: closed form
    if isinstance(m, RadialPowerMeasure) and isinstance(hood, EllipsoidNeighborhood):
        ax = hood.semi_axes
        if all(a == ax[0] for a in ax):
            r = min(ax[0], m.radius)
            return m.scale * unit_sphere_area(d) * r ** s / s

    def g(om):
        rho = np.minimum(hood.radial_profile(om), _support_profile(m, om))
        return _angular_density(m, om) * rho ** s / s

    if d == 2:
        breaks: list[float] = []
        if isinstance(hood, BoxNeighborhood):
            breaks += _box_corner_breaks_2d(hood.halfwidths)
        if isinstance(m, AnisotropicPowerMeasure):
            breaks += _box_corner_breaks_2d(m.halfwidths)

        def delta(phi):
            om = _octant_directions_2d(np.asarray(phi))
            return hood.radial_profile(om) - _support_profile(m, om)

        breaks += _crossings(delta, 1e-9, math.pi / 2 - 1e-9)
        return _orthant_integral_2d(_power_exponents(m), g, extra_breaks=breaks)

    if d == 3:

        def inner_breaks(phi):
            def delta(theta):
                theta = np.asarray(theta)
                st, ct = np.sin(theta), np.cos(theta)
                om = np.stack(
                    [st * math.cos(phi), st * math.sin(phi), ct], axis=-1
                )
                return hood.radial_profile(om) - _support_profile(m, om)

            out = _crossings(delta, 1e-9, math.pi / 2 - 1e-9, n=1024)
            for h in boxes:
                # min-switch between the x/y faces and the z face
                denom = max(math.cos(phi) / h[0], math.sin(phi) / h[1])
                out.append(math.atan2(1.0, denom * h[2]))
            return out

        boxes = []
        if isinstance(hood, BoxNeighborhood):
            boxes.append(hood.halfwidths)
        if isinstance(m, AnisotropicPowerMeasure):
            boxes.append(m.halfwidths)
        outer_breaks = [math.atan2(h[1], h[0]) for h in boxes]
        alphas = (1.0, 1.0, 1.0) if isinstance(m, RadialPowerMeasure) else m.alphas
        return _orthant_integral_3d(
            alphas, g, inner_breaks_fn=inner_breaks, outer_breaks=outer_breaks
        )

    raise ValueError(f"mass quadrature supports d <= 3, got d = {d}")


def mass(m: SpectralMeasure, hood: Neighborhood) -> float:
    """sigma(N) for an ellipsoidal or box neighborhood N of the origin.

    Atomic masses are exact membership sums (box membership is half-open,
    matching {-1 < t_k x_k <= 1}); continuous families integrate the
    radial direction in closed form and the angular part numerically when
    no symmetric closed form applies.
    """
    if isinstance(m, AtomicMeasure):
        if m.dim != hood.dim:
            raise ValueError("measure and neighborhood disagree on dimension")
        if not m.points:
            return 0.0
        inside = hood.contains(m.locations)
        return float(np.sum(m.weight_array[inside]))
    if isinstance(m, SumMeasure):
        return float(sum(mass(p, hood) for p in m.parts))
    if isinstance(m, (RadialPowerMeasure, AnisotropicPowerMeasure)):
        return _continuous_mass(m, hood)
    raise TypeError(f"unknown measure {m!r}")


# -- singular integral -------------------------------------------------------

_DYADIC_SHELLS = 40
_DIVERGENCE_CAP = 1e12
_GEOMETRIC_RATIO = 0.95


def _dyadic_detect(term, j_max: int = _DYADIC_SHELLS):
    """Classify sum_j term(j) over shrinking dyadic shells j = 1, 2, ...

    Returns ("divergent", None) once partial sums pass the cap,
    ("convergent", total_with_tail) when the last ten ratios stay below
    the geometric threshold (tail extrapolated geometrically), and
    ("undetermined", None) otherwise.
    """
    terms = []
    partial = 0.0
    for j in range(1, j_max + 1):
        t = term(j)
        terms.append(t)
        partial += t
        if partial > _DIVERGENCE_CAP:
            return "divergent", None
    ratios = [
        terms[i + 1] / terms[i] if terms[i] > 0 else np.inf
        for i in range(len(terms) - 11, len(terms) - 1)
    ]
    if all(r < _GEOMETRIC_RATIO for r in ratios):
        r_last = ratios[-1]
        tail = terms[-1] * r_last / (1.0 - r_last) if terms[-1] > 0 else 0.0
        return "convergent", partial + tail
    return "undetermined", None


def _angular_total(m) -> float:
    """int over the sphere of the angular density factor A(omega)."""
    if isinstance(m, RadialPowerMeasure):
        return m.scale * unit_sphere_area(m.dim)
    al = m.alphas
    out = 2.0 * m.scale
    for a in al:
        out *= math.gamma(a / 2.0)
    return out / math.gamma(sum(al) / 2.0)


def dyadic_singular_probe(m, q: float):
    """Dyadic-shell classification of int |x|^(-q) dsigma for one power family.

    The shells r_top 2^(-j) <= |x| < r_top 2^(-j+1) sit inside the support,
    so shell masses are exact; the region outside the inscribed ball is a
    finite angular integral added to a convergent total.
    """
    if not isinstance(m, (RadialPowerMeasure, AnisotropicPowerMeasure)):
        raise TypeError("probe applies to the continuous power families")
    s = _radial_order(m) - q
    a_tot = _angular_total(m)
    if isinstance(m, RadialPowerMeasure):
        r_top = m.radius
    else:
        r_top = min(m.halfwidths)

    def shell_term(j: int) -> float:
        hi = r_top * 2.0 ** (-j + 1)
        lo = r_top * 2.0 ** (-j)
        if s != 0.0:
            return a_tot * (hi ** s - lo ** s) / s
        return a_tot * math.log(2.0)

    verdict, inner = _dyadic_detect(shell_term)
    if verdict == "divergent":
        return math.inf
    if verdict == "undetermined":
        raise UndeterminedDivergenceError(
            f"dyadic probe inconclusive for exponent s = {s:.4g} "
            f"(neither geometric decay nor blow-up within {_DYADIC_SHELLS} shells)"
        )

    if isinstance(m, RadialPowerMeasure):
        return inner  # support is the ball of radius r_top: nothing outside

    # outer piece: box minus inscribed ball, finite for every s
    if m.dim == 1:
        outer = 0.0  # the box IS the interval [-r_top, r_top]
    else:
        def g(om):
            rho = _support_profile(m, om)
            if s != 0.0:
                rad = (rho ** s - r_top ** s) / s
            else:
                rad = np.log(rho / r_top)
            return _angular_density(m, om) * rad

        if m.dim == 2:
            breaks = _box_corner_breaks_2d(m.halfwidths)
            outer = _orthant_integral_2d(_power_exponents(m), g, extra_breaks=breaks)
        else:
            h = m.halfwidths

            def inner_breaks(phi):
                denom = max(math.cos(phi) / h[0], math.sin(phi) / h[1])
                return [math.atan2(1.0, denom * h[2])]

            outer = _orthant_integral_3d(
                m.alphas,
                g,
                inner_breaks_fn=inner_breaks,
                outer_breaks=[math.atan2(h[1], h[0])],
            )
    return inner + outer


def singular_integral(m: SpectralMeasure, q: float) -> float:
    """int |x|^(-q) dsigma(x); returns math.inf when it diverges.

    Atomic sums and radial power laws are analytic; anisotropic families
    go through the dyadic-shell probe, which raises
    UndeterminedDivergenceError rather than guess in the gray zone.
    """
    if q <= 0:
        raise ValueError("q must be positive")
    if isinstance(m, AtomicMeasure):
        if not m.points:
            return 0.0
        r = np.linalg.norm(m.locations, axis=1)
        return float(np.sum(m.weight_array * r ** (-q)))
    if isinstance(m, RadialPowerMeasure):
        if m.gamma > q:
            return (
                m.scale
                * unit_sphere_area(m.dim)
                * m.radius ** (m.gamma - q)
                / (m.gamma - q)
            )
        return math.inf
    if isinstance(m, AnisotropicPowerMeasure):
        return dyadic_singular_probe(m, q)
    if isinstance(m, SumMeasure):
        parts = []
        undetermined = None
        for p in m.parts:
            try:
                parts.append(singular_integral(p, q))
            except UndeterminedDivergenceError as exc:
                undetermined = exc
        if any(math.isinf(v) for v in parts):
            return math.inf
        if undetermined is not None:
            raise undetermined
        return float(sum(parts))
    raise TypeError(f"unknown measure {m!r}")


# -- densities ---------------------------------------------------------------


def density_at(m: SpectralMeasure, x) -> float:
    """Lebesgue density at x for the continuous families; atomic raises."""
    x = as_vec(x)
    if isinstance(m, AtomicMeasure):
        raise ValueError("atomic measures have no density")
    if isinstance(m, RadialPowerMeasure):
        as_vec(x, dim=m.dim)
        r = float(np.linalg.norm(x))
        if r == 0.0 or r > m.radius:
            return 0.0
        return m.scale * r ** (m.gamma - m.dim)
    if isinstance(m, AnisotropicPowerMeasure):
        as_vec(x, dim=m.dim)
        h = np.asarray(m.halfwidths)
        if np.any(np.abs(x) > h):
            return 0.0
        al = np.asarray(m.alphas)
        with np.errstate(divide="ignore"):
            factors = np.abs(x) ** (al - 1.0)
        out = m.scale * float(np.prod(factors))
        return out
    if isinstance(m, SumMeasure):
        return float(sum(density_at(p, x) for p in m.parts))
    raise TypeError(f"unknown measure {m!r}")


# -- measure spec strings ----------------------------------------------------
#
# Grammar (see README):
#   atomic:[(x1,x2;w),(x1,x2;w),...]
#   radial:gamma,R,mass
#   aniso:a1,a2;b1,b2;mass
#   sum:[spec|spec|...]


def _split_top(s: str, sep: str) -> list[str]:
    out, depth, cur = [], 0, []
    for ch in s:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out


def parse_measure(spec: str, dim: int = 2) -> SpectralMeasure:
    """Parse a measure spec string; raises ValueError with a usable message."""
    spec = spec.strip()
    if spec.startswith("atomic:"):
        body = spec[len("atomic:"):].strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise ValueError(f"bad atomic spec {spec!r}: expected atomic:[(x;w),...]")
        inner = body[1:-1].strip()
        if not inner:
            return AtomicMeasure(points=(), weights=(), dim=dim)
        points, weights = [], []
        for tok in _split_top(inner, ","):
            tok = tok.strip()
            if not (tok.startswith("(") and tok.endswith(")")):
                raise ValueError(f"bad atom {tok!r} in {spec!r}")
            try:
                loc_s, w_s = tok[1:-1].split(";")
                points.append(tuple(float(c) for c in loc_s.split(",")))
                weights.append(float(w_s))
            except ValueError:
                raise ValueError(f"bad atom {tok!r} in {spec!r}") from None
        d = len(points[0])
        return AtomicMeasure(points=tuple(points), weights=tuple(weights), dim=d)
    if spec.startswith("radial:"):
        try:
            gamma, radius, m_tot = (float(v) for v in spec[len("radial:"):].split(","))
        except ValueError:
            raise ValueError(f"bad radial spec {spec!r}: expected radial:gamma,R,mass") from None
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        return RadialPowerMeasure.with_total_mass(gamma, radius, m_tot, dim=dim)
    if spec.startswith("aniso:"):
        parts = spec[len("aniso:"):].split(";")
        if len(parts) != 3:
            raise ValueError(f"bad aniso spec {spec!r}: expected aniso:a1,..;b1,..;mass")
        try:
            alphas = tuple(float(v) for v in parts[0].split(","))
            halfwidths = tuple(float(v) for v in parts[1].split(","))
            m_tot = float(parts[2])
        except ValueError:
            raise ValueError(f"bad aniso spec {spec!r}: fields must be numbers") from None
        return AnisotropicPowerMeasure.with_total_mass(alphas, halfwidths, m_tot)
    if spec.startswith("sum:"):
        body = spec[len("sum:"):].strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise ValueError(f"bad sum spec {spec!r}: expected sum:[spec|spec|...]")
        parts = tuple(parse_measure(tok.strip(), dim=dim) for tok in _split_top(body[1:-1], "|"))
        return SumMeasure(parts=parts)
    raise ValueError(
        f"unknown measure spec {spec!r} (expected atomic:..., radial:..., aniso:..., or sum:[...])"
    )


def format_measure(m: SpectralMeasure) -> str:
    if isinstance(m, AtomicMeasure):
        atoms = ",".join(
            "(" + ",".join(f"{c:.12g}" for c in p) + f";{w:.12g})"
            for p, w in zip(m.points, m.weights)
        )
        return f"atomic:[{atoms}]"
    if isinstance(m, RadialPowerMeasure):
        return f"radial:{m.gamma:.12g},{m.radius:.12g},{total_mass(m):.12g}"
    if isinstance(m, AnisotropicPowerMeasure):
        return (
            "aniso:"
            + ",".join(f"{a:.12g}" for a in m.alphas)
            + ";"
            + ",".join(f"{b:.12g}" for b in m.halfwidths)
            + f";{total_mass(m):.12g}"
        )
    if isinstance(m, SumMeasure):
        return "sum:[" + "|".join(format_measure(p) for p in m.parts) + "]"
    raise TypeError(f"unknown measure {m!r}")
