"""Transforms between positive potentials and leafwise mean-curvature velocities.

A strictly positive u corresponds to the velocity H = -n * grad(log u); the
inverse map integrates -H/n to a log-potential and exponentiates, with the
overall scale fixed by the gauge integral(u) = fiber length.

On circle fibers the log derivative is evaluated spectrally, so the pair of
maps invert each other to rounding for smooth data; on intervals the stencil
derivative pairs with a corrected trapezoid antiderivative and the round trip
closes at second order.
"""
from __future__ import annotations

import numpy as np

from .errors import NonPositiveField, NotConservative
from .fiber import (
    FiberGrid,
    ScalarField,
    VectorAlongFiber,
    _diff1,
    fourier_derivative,
    grad_log,
    integrate,
)

CIRCULATION_TOL = 1e-8


def velocity_from_potential_fn(u: ScalarField, n: float) -> VectorAlongFiber:
    """H = -n * d/dx log(u) for strictly positive u."""
    if u.grid.periodic:
        m = float(np.min(u.values))
        if m <= 0.0:
            raise NonPositiveField(f"velocity map needs a positive field, min value {m}")
        logs = ScalarField(u.grid, np.log(u.values))
        return VectorAlongFiber(u.grid, -float(n) * fourier_derivative(logs).values)
    return grad_log(u, -float(n))


def _antiderivative_circle(vals: np.ndarray, grid: FiberGrid) -> np.ndarray:
    # spectral antiderivative of a zero-mean periodic sample
    m = grid.n_points
    k = 2.0 * np.pi * np.fft.rfftfreq(m, d=grid.spacing)
    spec = np.fft.rfft(vals)
    spec[0] = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        spec[1:] = spec[1:] / (1j * k[1:])
    if m % 2 == 0:
        spec[-1] = 0.0
    return np.fft.irfft(spec, m)


def _antiderivative_interval(vals: np.ndarray, grid: FiberGrid) -> np.ndarray:
    # cumulative trapezoid with an endpoint-gradient correction (fourth order)
    h = grid.spacing
    out = np.zeros_like(vals)
    out[1:] = np.cumsum(0.5 * h * (vals[1:] + vals[:-1]))
    slope = _diff1(vals, h, periodic=False)
    out -= (h * h / 12.0) * (slope - slope[0])
    return out


def potential_from_velocity(H: VectorAlongFiber, n: float) -> ScalarField:
    """Reconstruct u > 0 with -n*(grad u)/u = H, normalized to integral(u) = length.

    On a circle the velocity must have (numerically) zero circulation; a
    circulation beyond CIRCULATION_TOL * length means no single-valued
    potential exists.
    """
    g = H.grid
    nf = float(n)
    if g.periodic:
        circ = integrate(H)
        if abs(circ) > CIRCULATION_TOL * g.length:
            raise NotConservative(
                f"circulation {circ:g} exceeds {CIRCULATION_TOL:g} * length; "
                "no single-valued potential"
            )
        psi = _antiderivative_circle(-H.values / nf, g)
    else:
        psi = _antiderivative_interval(-H.values / nf, g)
    u = np.exp(psi - np.max(psi))
    u_field = ScalarField(g, u)
    return ScalarField(g, u * (g.length / integrate(u_field)))


def roundtrip_residual(u: ScalarField, n: float) -> float:
    """Sup distance between u (gauge-normalized) and the inverse of its velocity."""
    back = potential_from_velocity(velocity_from_potential_fn(u, n), n)
    normed = u.values * (u.grid.length / integrate(u))
    return float(np.max(np.abs(back.values - normed)))
