"""Mixed-curvature quantities of a totally geodesic fiber with extrinsic data.

Conventions for a one-dimensional fiber with n-dimensional orthogonal
distribution: H is the trace of the shape operators, |b|^2 the squared norm
of the second fundamental form, and beta_D = (n*|b|^2 - |H|^2) / n^2 >= 0
measures how far the distribution is from being umbilical.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InconsistentData
from .fiber import (
    ScalarField,
    VectorAlongFiber,
    derivative,
    divergence,
    grad_log,
)

_AGREE_TOL = 1e-12


@dataclass(frozen=True)
class ExtrinsicData:
    """Pointwise extrinsic data of the orthogonal distribution along one fiber."""

    n: int
    b_norm_sq: ScalarField
    H: VectorAlongFiber
    T_norm_sq: ScalarField
    principal_curvatures: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"distribution rank must be at least 1, got {self.n}")
        grid = self.H.grid
        if self.b_norm_sq.grid != grid or self.T_norm_sq.grid != grid:
            raise ValueError("extrinsic fields live on different grids")
        if np.min(self.T_norm_sq.values) < 0.0:
            raise ValueError("|T|^2 must be nonnegative")
        scale = 1.0 + float(np.max(np.abs(self.b_norm_sq.values)))
        gap = self.n * self.b_norm_sq.values - self.H.values ** 2
        if np.min(gap) < -_AGREE_TOL * self.n * scale:
            raise ValueError("n*|b|^2 >= |H|^2 fails; data are not realizable")
        if self.principal_curvatures is not None:
            k = np.array(self.principal_curvatures, dtype=float, copy=True)
            if k.shape != (grid.n_points, self.n):
                raise ValueError(
                    f"principal curvatures must have shape {(grid.n_points, self.n)}"
                )
            k.flags.writeable = False
            object.__setattr__(self, "principal_curvatures", k)

    @classmethod
    def from_principal_curvatures(cls, grid, k: np.ndarray, T_norm_sq: ScalarField | None = None):
        k = np.asarray(k, dtype=float)
        n = k.shape[1]
        if T_norm_sq is None:
            T_norm_sq = ScalarField(grid, np.zeros(grid.n_points))
        return cls(
            n=n,
            b_norm_sq=ScalarField(grid, np.sum(k * k, axis=1)),
            H=VectorAlongFiber(grid, np.sum(k, axis=1)),
            T_norm_sq=T_norm_sq,
            principal_curvatures=k,
        )


def beta_D(data: ExtrinsicData) -> ScalarField:
    """Non-umbilicity function (n*|b|^2 - |H|^2)/n^2.

    When principal curvatures are supplied the pairwise-difference formula
    sum_{i<j} (k_i - k_j)^2 / n^2 is evaluated too, and the two routes must
    agree pointwise to within 1e-12.
    """
    n = data.n
    general = (n * data.b_norm_sq.values - data.H.values ** 2) / (n * n)
    if data.principal_curvatures is not None:
        k = data.principal_curvatures
        pair = np.zeros(k.shape[0])
        for i in range(n):
            for j in range(i + 1, n):
                pair += (k[:, i] - k[:, j]) ** 2
        pair /= n * n
        scale = 1.0 + float(np.max(np.abs(k))) ** 2
        dev = float(np.max(np.abs(pair - general)))
        if dev > _AGREE_TOL * scale:
            raise InconsistentData(
                f"trace-form and pairwise beta_D disagree by {dev:g}; "
                "principal curvatures do not match |b|^2 and H"
            )
        general = pair
    return ScalarField(data.H.grid, general)


def sc_mix_minus_T2(H: VectorAlongFiber, n: int, betaD: ScalarField) -> ScalarField:
    """Sc_mix - |T|^2 evaluated from the velocity: div H - |H|^2/n - n*beta_D."""
    if betaD.grid != H.grid:
        raise ValueError("fields live on different grids")
    div = divergence(H).values
    return ScalarField(H.grid, div - H.values ** 2 / n - n * betaD.values)


def riccati_residual(k: ScalarField, K: ScalarField) -> float:
    """Sup norm of dk/dx - k^2 - K, the surface-of-revolution Riccati relation.

    On interval grids the two nodes nearest each end are skipped: k itself
    already carries one-sided end stencils, and differentiating it again
    does not compose to second order there.
    """
    if K.grid != k.grid:
        raise ValueError("fields live on different grids")
    res = derivative(k).values - k.values ** 2 - K.values
    if not k.grid.periodic:
        res = res[2:-2]
    return float(np.max(np.abs(res)))


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Per-time diagnostics attached to flow trajectories; every entry is finite."""

    t: float
    betaD_drift: float
    conservation_drift: float
    riccati_res: float
    min_u: float
    rayleigh: float
    scmix_minus_T2_dev: float

    def __post_init__(self):
        for name in (
            "t",
            "betaD_drift",
            "conservation_drift",
            "riccati_res",
            "min_u",
            "rayleigh",
            "scmix_minus_T2_dev",
        ):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"diagnostic {name} is not finite")


def _half_grad_log_ratio(T2: np.ndarray, mask: np.ndarray, grid) -> np.ndarray:
    # centered difference of log(T2)/2 on the mask; equals grad log |T|
    # where T2 > 0.  The mask guarantees both neighbors are inside, so the
    # logarithm is only ever taken at points bounded away from zero.
    h = grid.spacing
    w = np.log(np.where(T2 > 0.0, T2, 1.0))
    out = np.zeros_like(T2)
    if grid.periodic:
        num = np.roll(w, -1) - np.roll(w, 1)
    else:
        num = np.zeros_like(w)
        num[1:-1] = w[2:] - w[:-2]
    out[mask] = num[mask] / (2.0 * h * 2.0)
    return out


def conserved_quantity(H: VectorAlongFiber, T2: ScalarField, n: int, eps_T: float = 1e-8):
    """2H - n * grad log |T| where |T|^2 > eps_T, with the evaluation mask.

    The mask keeps points whose neighbors also carry |T|^2 > eps_T, so the
    centered ratio derivative never touches the degenerate set.
    """
    grid = H.grid
    t2 = T2.values
    inside = t2 > eps_T
    if grid.periodic:
        mask = inside & np.roll(inside, 1) & np.roll(inside, -1)
    else:
        mask = inside.copy()
        mask[1:-1] &= inside[2:] & inside[:-2]
        mask[0] = mask[-1] = False
    q = 2.0 * H.values - n * _half_grad_log_ratio(t2, mask, grid)
    return q, mask


def conservation_report(states, n: int, eps_T: float = 1e-8) -> list[DiagnosticsRecord]:
    """Drift diagnostics along a normalized-flow trajectory.

    States must expose t, H, betaD, T2 and may expose u, rayleigh,
    scmix_dev, riccati_res; drifts are sup norms against the first state.
    """
    if not states:
        raise ValueError("empty trajectory")
    first = states[0]
    beta0 = first.betaD.values
    q0, mask0 = conserved_quantity(first.H, first.T2, n, eps_T)
    out = []
    for st in states:
        beta_drift = float(np.max(np.abs(st.betaD.values - beta0)))
        q, mask = conserved_quantity(st.H, st.T2, n, eps_T)
        both = mask & mask0
        drift = float(np.max(np.abs(q[both] - q0[both]))) if np.any(both) else 0.0
        u = getattr(st, "u", None)
        min_u = float(np.min(u.values)) if u is not None else 0.0
        out.append(
            DiagnosticsRecord(
                t=float(st.t),
                betaD_drift=beta_drift,
                conservation_drift=drift,
                riccati_res=float(getattr(st, "riccati_res", 0.0)),
                min_u=min_u,
                rayleigh=float(getattr(st, "rayleigh", 0.0)),
                scmix_minus_T2_dev=float(getattr(st, "scmix_dev", 0.0)),
            )
        )
    return out


def surface_extrinsic_data(rho: ScalarField, T_norm_sq: ScalarField | None = None) -> ExtrinsicData:
    """Extrinsic data of a surface of revolution with profile rho > 0 (n = 1)."""
    grid = rho.grid
    k = grad_log(rho, -1.0)
    if T_norm_sq is None:
        T_norm_sq = ScalarField(grid, np.zeros(grid.n_points))
    return ExtrinsicData(
        n=1,
        b_norm_sq=ScalarField(grid, k.values ** 2),
        H=VectorAlongFiber(grid, k.values),
        T_norm_sq=T_norm_sq,
        principal_curvatures=k.values.reshape(-1, 1),
    )
