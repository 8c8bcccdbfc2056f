"""Quadrature building blocks shared by the spectral and torsion modules.

Three rules are provided:

* composite Gauss-Legendre on [0, 1] with panel edges refined geometrically
  toward both endpoints, for simplex-time integrands with boundary layers
  of width down to ~2^-depth;
* a tensorized (Duffy) rule on the standard 2-simplex;
* the trapezoid rule in u = log t on (0, infinity), which converges
  spectrally for integrands that decay (double-)exponentially at both ends
  of the t axis and self-reports a node-doubling error estimate.
"""

from __future__ import annotations

import functools
import math

import numpy as np


class QuadratureError(RuntimeError):
    """Raised when a quadrature cannot certify its requested tolerance."""


@functools.lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of n-point Gauss-Legendre on [-1, 1] (cached)."""
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def geometric_edges(depth: int = 20) -> np.ndarray:
    """Panel edges on [0, 1], dyadically refined toward 0 and 1.

    Edges are 0, 2^-depth, ..., 1/4, 1/2, 3/4, ..., 1 - 2^-depth, 1.
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    left = [0.0] + [2.0 ** -j for j in range(depth, 0, -1)]
    right = [1.0 - 2.0 ** -j for j in range(2, depth + 1)] + [1.0]
    return np.array(left + right)


def unit_interval_rule(nodes_per_panel: int = 16, depth: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on [0, 1] over geometric panels.

    Resolves integrands with exponential boundary layers at either end
    (width >= ~2^-depth) to close to machine precision.
    """
    x, w = gauss_legendre(nodes_per_panel)
    edges = geometric_edges(depth)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


def simplex2_rule(n: int = 24) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tensorized rule on the 2-simplex {s1, s2 >= 0, s1 + s2 <= 1}.

    Duffy substitution s1 = u, s2 = v (1 - u) with Jacobian (1 - u) on a
    Gauss-Legendre grid in (u, v).  Returns (s1, s2, weights); the weights
    sum to 1/2, the area of the simplex.
    """
    x, w = gauss_legendre(n)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    uu, vv = np.meshgrid(u, u, indexing="ij")
    ww = np.outer(wu, wu) * (1.0 - uu)
    s1 = uu.ravel()
    s2 = (vv * (1.0 - uu)).ravel()
    return s1, s2, ww.ravel()


def log_time_grid(t_min: float, t_max: float, nodes: int) -> np.ndarray:
    """Uniform grid in u = log t with an odd node count (for halving)."""
    if not (0.0 < t_min < t_max):
        raise ValueError(f"need 0 < t_min < t_max, got ({t_min}, {t_max})")
    if nodes < 9:
        raise ValueError("too few nodes for a certifiable rule")
    if nodes % 2 == 0:
        nodes += 1
    return np.linspace(math.log(t_min), math.log(t_max), nodes)


def trapezoid_with_estimate(values: np.ndarray, h: float) -> tuple[float, float]:
    """Trapezoid sum with a node-doubling error estimate.

    The estimate is |I_h - I_2h| on the (odd-length) grid; for spectrally
    convergent integrands it overestimates the true error of I_h.
    """
    if values.ndim != 1 or values.size % 2 == 0:
        raise ValueError("expected an odd-length 1-d sample array")
    full = np.trapezoid(values, dx=h)
    half = np.trapezoid(values[::2], dx=2.0 * h)
    return float(full), abs(float(full) - float(half))


def integrate_log_axis(
    integrand,
    t_min: float,
    t_max: float,
    nodes: int,
    *,
    jacobian: str = "dt",
    rel_tol: float | None = None,
) -> float:
    """Integrate f over (t_min, t_max) after substituting t = e^u.

    jacobian="dt" computes integral f(t) dt, jacobian="dt_over_t" computes
    integral f(t) dt/t.  If rel_tol is given, the node-doubling estimate
    must certify it (with a small absolute floor), else QuadratureError.
    """
    u = log_time_grid(t_min, t_max, nodes)
    t = np.exp(u)
    f = np.asarray([integrand(tv) for tv in t], dtype=float)
    if jacobian == "dt":
        f = f * t
    elif jacobian != "dt_over_t":
        raise ValueError(f"unknown jacobian {jacobian!r}")
    value, err = trapezoid_with_estimate(f, float(u[1] - u[0]))
    if rel_tol is not None:
        scale = max(abs(value), 1e-6 * float(np.max(np.abs(f)) + 1.0))
        if err > rel_tol * scale + 1e-13:
            raise QuadratureError(
                f"node-doubling estimate {err:.3e} exceeds rel_tol {rel_tol:.1e} "
                f"(value {value:.6e}, nodes {len(u)})"
            )
    return value
