"""Hyperbolic-plane normalization of the degree-2 torsion class.

SL(2, R) acts on the upper half-plane H2 (curvature -1, volume form
dx dy / y^2 in the standard orientation) by fractional-linear maps, with
SO(2) stabilizing the base point o = i.  The bounded group 2-cocycle

    (g, h) -> (1/2 pi) vol(geodesic triangle o, g o, g h o)

represents the generator against which the torsion class is measured.  The
same one-parameter subgroups act on the circle (the projective boundary,
coordinate x with boundary parameter u = tan(pi x)), giving explicit
fundamental vector fields; for the traceless generators

    A = diag(1, -1)  ->  A* = (1/(2 pi i)) (e^{2 pi i x} - e^{-2 pi i x}) d/dx
    N = [[0, 1], [0, 0]]  ->  N* = (1/(4 pi)) (e^{2 pi i x} + e^{-2 pi i x} + 2) d/dx

and the plane fields are A#(o) = (0, 2), N#(o) = (1, 0) with
vol(A#(o), N#(o)) = -2, which fixes every downstream sign.

The class coefficient c with (pullback of T2) = (c / 2 pi) vol is obtained
by pairing the Lie 2-cochain on (A*, N*) against that volume value.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .torsion import GAMMA_5_4, TorsionTwoForm, clausen
from .witt import VectorField, lie_cocycle

ORIGIN = 1j  # SO(2)-fixed point of the half-plane model

A_GEN = np.array([[1.0, 0.0], [0.0, -1.0]])
N_GEN = np.array([[0.0, 1.0], [0.0, 0.0]])
SO2_GEN = np.array([[0.0, -1.0], [1.0, 0.0]])  # positive direction of SO(2)


def check_sl2(g: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {g.shape}")
    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    if abs(det - 1.0) > tol:
        raise ValueError(f"determinant {det} is not 1 within {tol}")
    return g


def sl2_exp(e: np.ndarray) -> np.ndarray:
    """exp of a traceless 2x2 real matrix, via e^2 = -det(e) I."""
    e = np.asarray(e, dtype=float)
    if abs(e[0, 0] + e[1, 1]) > 1e-12 * max(1.0, float(np.max(np.abs(e)))):
        raise ValueError("generator must be traceless")
    d = float(e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0])
    eye = np.eye(2)
    if d < 0:
        mu = math.sqrt(-d)
        return math.cosh(mu) * eye + (math.sinh(mu) / mu) * e
    if d > 0:
        nu = math.sqrt(d)
        return math.cos(nu) * eye + (math.sin(nu) / nu) * e
    return eye + e


def mobius(g: np.ndarray, z: complex) -> complex:
    """Fractional-linear action (a z + b)/(c z + d) on the upper half-plane."""
    g = check_sl2(g)
    if z.imag <= 0:
        raise ValueError(f"point {z} is not in the upper half-plane")
    return (g[0, 0] * z + g[0, 1]) / (g[1, 0] * z + g[1, 1])


def iwasawa_angle(g: np.ndarray) -> float:
    """SO(2)-component angle of the polar splitting g = R(theta) P.

    The rotation factor maximizes the overlap with g, giving the closed form
    theta = atan2(c - b, a + d); continuous near the identity with
    theta(1) = 0, and theta(R(phi)) = phi for |phi| < pi.
    """
    g = check_sl2(g)
    return math.atan2(g[1, 0] - g[0, 1], g[0, 0] + g[1, 1])


def hyperbolic_distance(z1: complex, z2: complex) -> float:
    arg = 1.0 + (abs(z1 - z2) ** 2) / (2.0 * z1.imag * z2.imag)
    return math.acosh(max(arg, 1.0))


def _clamped_acos(x: float) -> float:
    return math.acos(min(1.0, max(-1.0, x)))


def triangle_area(z0: complex, z1: complex, z2: complex) -> float:
    """Oriented hyperbolic area of the geodesic triangle, by angle defect.

    |area| = pi - (sum of interior angles) < pi; the sign is the orientation
    of the vertex cycle (positive for counterclockwise in the half-plane
    model, matching the dx dy / y^2 volume form).  Degenerate triples give 0.
    """
    pts = (z0, z1, z2)
    scale = max(abs(z0 - z1), abs(z1 - z2), abs(z2 - z0))
    if scale < 1e-14:
        return 0.0
    if min(abs(z0 - z1), abs(z1 - z2), abs(z2 - z0)) < 1e-14 * scale:
        return 0.0
    sides = []
    for i in range(3):
        sides.append(hyperbolic_distance(pts[(i + 1) % 3], pts[(i + 2) % 3]))
    angles = []
    for i in range(3):
        opp, b, c = sides[i], sides[(i + 1) % 3], sides[(i + 2) % 3]
        num = math.cosh(b) * math.cosh(c) - math.cosh(opp)
        den = math.sinh(b) * math.sinh(c)
        angles.append(_clamped_acos(num / den) if den > 0 else 0.0)
    defect = math.pi - sum(angles)
    cross = (z1 - z0).real * (z2 - z0).imag - (z1 - z0).imag * (z2 - z0).real
    orientation = 1.0 if cross > 0 else -1.0 if cross < 0 else 0.0
    return orientation * max(defect, 0.0)


def triangle_area_oracle(z0: complex, z1: complex, z2: complex, samples: int = 4000) -> float:
    """Boundary-quadrature oracle for the oriented area.

    Integrates dx/y along the oriented geodesic boundary (Green's theorem
    for the volume form dx dy / y^2), sampling each arc with the midpoint
    rule; independent of the angle-defect path.
    """
    total = 0.0
    for u, v in ((z0, z1), (z1, z2), (z2, z0)):
        total += _edge_integral(u, v, samples)
    return total


def _edge_integral(u: complex, v: complex, samples: int) -> float:
    if abs(u - v) < 1e-15:
        return 0.0
    if abs(u.real - v.real) < 1e-13 * max(1.0, abs(u - v)):
        return 0.0  # vertical geodesic: dx = 0
    c = (abs(u) ** 2 - abs(v) ** 2) / (2.0 * (u.real - v.real))
    r = abs(u - c)
    phi_u = math.atan2(u.imag, u.real - c)
    phi_v = math.atan2(v.imag, v.real - c)
    phi = np.linspace(phi_u, phi_v, samples + 1)
    x = c + r * np.cos(phi)
    y = r * np.sin(phi)
    xm = 0.5 * (x[1:] + x[:-1])
    ym = 0.5 * (y[1:] + y[:-1])
    dx = np.diff(x)
    return float(np.sum(dx / ym))


def area_cocycle(g: np.ndarray, h: np.ndarray) -> float:
    """(g, h) -> (1/2 pi) vol(o, g o, g h o); a bounded 2-cocycle."""
    go = mobius(g, ORIGIN)
    gho = mobius(np.asarray(g) @ np.asarray(h), ORIGIN)
    return triangle_area(ORIGIN, go, gho) / (2.0 * math.pi)


def angle_cochain(g: np.ndarray, h: np.ndarray) -> float:
    """(g, h) -> (1/2 pi)(theta(g h) - theta(g) - theta(h)), theta the polar angle.

    A second representative of the same class as area_cocycle (they differ
    by a coboundary); compared against it in the verification suite.
    """
    gh = np.asarray(g) @ np.asarray(h)
    return (iwasawa_angle(gh) - iwasawa_angle(g) - iwasawa_angle(h)) / (2.0 * math.pi)


def volume_form(u: tuple[float, float], v: tuple[float, float], at: complex = ORIGIN) -> float:
    """vol = dx dy / y^2 evaluated on two tangent vectors."""
    return (u[0] * v[1] - u[1] * v[0]) / at.imag**2


def fundamental_field_plane(e: np.ndarray) -> tuple[float, float]:
    """Tangent vector at o of t -> exp(t e) . o, for traceless e.

    The action differentiates to the quadratic field z -> q + 2 p z - r z^2
    for e = [[p, q], [r, -p]]; returned as (dx, dy) at o.
    """
    e = np.asarray(e, dtype=float)
    if abs(e[0, 0] + e[1, 1]) > 1e-12 * max(1.0, float(np.max(np.abs(e)))):
        raise ValueError("generator must be traceless")
    p, q, r = e[0, 0], e[0, 1], e[1, 0]
    vel = q + 2.0 * p * ORIGIN - r * ORIGIN**2
    return (vel.real, vel.imag)


def fundamental_field_circle(e: np.ndarray) -> VectorField:
    """Circle vector field of a traceless generator, via u = tan(pi x).

    The boundary action u -> (a u + b)/(c u + d) differentiates to
    u' = q + 2 p u - r u^2, i.e.

      f(x) = [ (q - r)/2 + ((q + r)/2) cos(2 pi x) + p sin(2 pi x) ] / pi.

    Reproduces A* and N* coefficient-exactly on the standard generators.
    """
    e = np.asarray(e, dtype=float)
    if abs(e[0, 0] + e[1, 1]) > 1e-12 * max(1.0, float(np.max(np.abs(e)))):
        raise ValueError("generator must be traceless")
    p, q, r = e[0, 0], e[0, 1], e[1, 0]
    c0 = (q - r) / (2.0 * math.pi)
    c_plus = (q + r) / (4.0 * math.pi) - 1j * p / (2.0 * math.pi)
    c_minus = (q + r) / (4.0 * math.pi) + 1j * p / (2.0 * math.pi)
    return VectorField({0: c0, 1: c_plus, -1: c_minus})


@dataclasses.dataclass(frozen=True)
class ClassCoefficient:
    """Measured coefficient of the torsion class against the area generator."""

    a: float
    measured: float
    closed_form_normalized: float  # -(1/(2^{5/2} pi^{7/2})) Gamma(5/4) Cl2(2 pi a)
    volume_pairing: float  # vol(A#(o), N#(o)); must equal -2
    cochain_value: complex  # the Lie 2-cochain on (A*, N*)


def class_coefficient(a: float, form: TorsionTwoForm) -> ClassCoefficient:
    """Coefficient c with (pullback of T2) = (c / 2 pi) vol on the plane.

    Pairs the Lie 2-cochain on the fundamental fields (A*, N*) against the
    volume pairing vol(A#, N#) = -2.  The closed-form normalization
    -(2^{-5/2} pi^{-7/2}) Gamma(5/4) Cl2(2 pi a) is reported alongside; only
    the shape (proportionality to Gamma(5/4) Cl2(2 pi a)) is asserted, the
    overall constant is measured.
    """
    a_star = fundamental_field_circle(A_GEN)
    n_star = fundamental_field_circle(N_GEN)
    pairing = lie_cocycle(form, a_star, n_star)
    vol = volume_form(fundamental_field_plane(A_GEN), fundamental_field_plane(N_GEN))
    measured = 2.0 * math.pi * pairing / vol
    if abs(measured.imag) > 1e-9 * max(1.0, abs(measured)):
        raise ValueError(f"class coefficient should be real, got {measured}")
    closed = -(2.0**-2.5) * math.pi**-3.5 * GAMMA_5_4 * clausen(form.a)
    return ClassCoefficient(
        a=form.a,
        measured=measured.real,
        closed_form_normalized=closed,
        volume_pairing=vol,
        cochain_value=pairing,
    )
