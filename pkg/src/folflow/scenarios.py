"""End-to-end flow scenarios built on the steppers and spectral tools.

Three drivers are provided:

* run_surface_of_revolution: the profile radius obeys d(rho)/dt = rho_xx,
  and the induced curvatures k = -(log rho)_x, K = -rho_xx/rho are tracked
  together with the axial profile and the conformal metric factor.
* run_twisted_product: every base slice of the warping function obeys
  d(f)/dt = n * f_yy along its fiber; slices relax to their fiber means.
* run_normalized_flow: u obeys du/dt = n*(u_xx + betaD*u); the normalized
  curvature quantity Sc_mix - |T|^2 converges to n*lambda0, and |T|^2 is
  transported by its exponential integrating factor.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curvature import DiagnosticsRecord, conserved_quantity, riccati_residual
from .errors import GapTooSmall, NotConverged, ProfileDegenerate
from .fiber import (
    FiberGrid,
    ScalarField,
    VectorAlongFiber,
    derivative,
    divergence,
    grad_log,
    integrate,
    laplacian,
)
from .parabolic import PERIODIC, Dirichlet, HeatStepper, Periodic, Scheme, StepperConfig, _step_count
from .schrodinger import GroundState, ground_state

SLOPE_TOL = 1e-8


# ---------------------------------------------------------------------------
# surface of revolution


@dataclass(frozen=True)
class SurfaceState:
    t: float
    rho: ScalarField
    h: ScalarField
    k: ScalarField
    K: ScalarField
    conformal_factor: ScalarField


@dataclass
class SurfaceTrajectory:
    states: list[SurfaceState]
    diagnostics: list[DiagnosticsRecord]
    series: dict[str, np.ndarray]


@dataclass
class SurfaceConfig:
    grid: FiberGrid
    rho0: ScalarField
    dt: float
    t_end: float
    record_every: int = 10
    scheme: Scheme = Scheme.CRANK_NICOLSON
    axial_origin: float = 0.0


def _cumtrapz(vals: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(vals)
    out[1:] = np.cumsum(0.5 * h * (vals[1:] + vals[:-1]))
    return out


def _check_profile(rho: np.ndarray, slope: np.ndarray, t: float):
    if np.min(rho) <= 0.0:
        raise ProfileDegenerate(f"profile pinched off (min rho = {np.min(rho):g}) at t = {t:g}")
    worst = float(np.max(np.abs(slope)))
    if worst > 1.0 + SLOPE_TOL:
        raise ProfileDegenerate(
            f"profile slope |rho_x| = {worst:g} exceeds 1 at t = {t:g}; "
            "the surface is no longer a graph over arclength"
        )


def _surface_state(grid, rho, rho0_vals, t, axial_origin) -> SurfaceState:
    slope = derivative(rho).values
    _check_profile(rho.values, slope, t)
    h_slope = np.sqrt(np.maximum(1.0 - slope * slope, 0.0))
    h = axial_origin + _cumtrapz(h_slope, grid.spacing)
    k = -derivative(rho).values / rho.values
    kk = -laplacian(rho).values / rho.values
    conf = (rho.values / rho0_vals) ** 2
    return SurfaceState(
        t=t,
        rho=rho,
        h=ScalarField(grid, h),
        k=ScalarField(grid, k),
        K=ScalarField(grid, kk),
        conformal_factor=ScalarField(grid, conf),
    )


def _arc_residual(state: SurfaceState) -> float:
    # h is rebuilt from sqrt(1 - slope^2) each step; the constraint is measured
    # against that stored axial slope
    slope = derivative(state.rho).values
    rebuilt = np.sqrt(np.maximum(1.0 - slope * slope, 0.0))
    return float(np.max(np.abs(slope ** 2 + rebuilt ** 2 - 1.0)))


def run_surface_of_revolution(cfg: SurfaceConfig) -> SurfaceTrajectory:
    """Evolve a revolution profile by d(rho)/dt = rho_xx and track curvatures.

    Interval profiles keep their endpoint radii fixed; circle profiles are
    closed tori.  The conformal factor (rho/rho0)^2 is cross-checked against
    exp(-2 * int_0^t K) accumulated along the run.
    """
    grid = cfg.grid
    rho = cfg.rho0
    if rho.grid != grid:
        raise ValueError("initial profile lives on a different grid")
    boundary = PERIODIC if grid.periodic else Dirichlet(float(rho.values[0]), float(rho.values[-1]))
    stepper = HeatStepper(
        grid, None, StepperConfig(cfg.dt, 1.0, cfg.scheme, boundary)
    )
    n_steps = _step_count(cfg.t_end, cfg.dt)
    rho0_vals = rho.values.copy()

    int_k_gauss = np.zeros(grid.n_points)
    gauss_prev = -laplacian(rho).values / rho.values

    states: list[SurfaceState] = []
    series = {key: [] for key in (
        "t", "sup_K", "sup_k", "min_rho", "arc_residual", "riccati_res", "conformal_dev",
    )}
    diagnostics = []

    def record(state: SurfaceState):
        ric = riccati_residual(state.k, state.K)
        conf_dev = float(
            np.max(np.abs(np.exp(-2.0 * int_k_gauss) - state.conformal_factor.values))
        )
        states.append(state)
        series["t"].append(state.t)
        series["sup_K"].append(float(np.max(np.abs(state.K.values))))
        series["sup_k"].append(float(np.max(np.abs(state.k.values))))
        series["min_rho"].append(float(np.min(state.rho.values)))
        series["arc_residual"].append(_arc_residual(state))
        series["riccati_res"].append(ric)
        series["conformal_dev"].append(conf_dev)
        diagnostics.append(
            DiagnosticsRecord(
                t=state.t,
                betaD_drift=0.0,
                conservation_drift=0.0,
                riccati_res=ric,
                min_u=float(np.min(state.rho.values)),
                rayleigh=0.0,
                scmix_minus_T2_dev=ric,
            )
        )

    record(_surface_state(grid, rho, rho0_vals, 0.0, cfg.axial_origin))
    for step in range(1, n_steps + 1):
        t = step * cfg.dt
        rho = stepper.step(rho)
        gauss = -laplacian(rho).values / rho.values
        int_k_gauss += 0.5 * cfg.dt * (gauss_prev + gauss)
        gauss_prev = gauss
        if step % cfg.record_every == 0 or step == n_steps:
            record(_surface_state(grid, rho, rho0_vals, t, cfg.axial_origin))
        else:
            slope = derivative(rho).values
            _check_profile(rho.values, slope, t)
    return SurfaceTrajectory(states, diagnostics, {k: np.array(v) for k, v in series.items()})


def linear_interpolant(grid: FiberGrid, left: float, right: float) -> ScalarField:
    """Boundary-respecting straight-line profile, the interval steady state."""
    return ScalarField(grid, left + (right - left) * grid.x / grid.length)


def surface_evolution_crosscheck(traj: SurfaceTrajectory) -> dict[str, float]:
    """Residuals of dk/dt = d/dx(K) and dK/dt = N(N(K)) - 2k N(K), N = d/dx.

    Time derivatives are centered over the recorded states, so the result is
    O(dt_rec^2 + h^2) for a resolved run.  On interval grids the sup skips
    the three nodes nearest each end: the one-sided end stencils are second
    order individually but do not compose to second order, and the identity
    is a property of the interior dynamics.
    """
    states = traj.states
    if len(states) < 3:
        raise ValueError("need at least three recorded states")
    dts = np.diff([s.t for s in states])
    if np.max(np.abs(dts - dts[0])) > 1e-9 * dts[0]:
        raise ValueError("records are not uniformly spaced in time")
    dt_rec = float(dts[0])
    view = slice(None) if states[0].rho.grid.periodic else slice(3, -3)
    res_k = 0.0
    res_cap = 0.0
    for j in range(1, len(states) - 1):
        prev_s, cur, nxt = states[j - 1], states[j], states[j + 1]
        nk = derivative(cur.K).values
        dk_dt = (nxt.k.values - prev_s.k.values) / (2.0 * dt_rec)
        res_k = max(res_k, float(np.max(np.abs((dk_dt - nk)[view]))))
        nnk = derivative(ScalarField(cur.K.grid, nk)).values
        dk_cap = (nxt.K.values - prev_s.K.values) / (2.0 * dt_rec)
        res_cap = max(
            res_cap,
            float(np.max(np.abs((dk_cap - (nnk - 2.0 * cur.k.values * nk))[view]))),
        )
    return {"k_residual": res_k, "K_residual": res_cap}


# ---------------------------------------------------------------------------
# twisted products


@dataclass(frozen=True)
class TwistedState:
    t: float
    f: tuple[ScalarField, ...]
    H: tuple[VectorAlongFiber, ...]

    @property
    def base_points(self) -> int:
        return len(self.f)


@dataclass
class TwistedTrajectory:
    states: list[TwistedState]
    diagnostics: list[DiagnosticsRecord]
    series: dict[str, np.ndarray]
    fiber_means: np.ndarray


@dataclass
class TwistedConfig:
    grid: FiberGrid
    n: int
    f0_slices: tuple[ScalarField, ...]
    dt: float
    t_end: float
    record_every: int = 10
    scheme: Scheme = Scheme.CRANK_NICOLSON


def run_twisted_product(cfg: TwistedConfig) -> TwistedTrajectory:
    """Evolve each base slice of the warping function by d(f)/dt = n * f_yy.

    The fiber is closed; every slice keeps its fiber mass and relaxes to its
    own fiber mean, which is reported as the limit value per slice.
    """
    grid = cfg.grid
    if not grid.periodic:
        raise ValueError("twisted-product fibers must be closed (circle topology)")
    if cfg.n < 1:
        raise ValueError("distribution rank must be at least 1")
    slices = list(cfg.f0_slices)
    if not slices:
        raise ValueError("need at least one base slice")
    for f in slices:
        if f.grid != grid:
            raise ValueError("slice lives on a different grid")
        if np.min(f.values) <= 0.0:
            raise ValueError("warping slices must be strictly positive")
    stepper = HeatStepper(
        grid, None, StepperConfig(cfg.dt, float(cfg.n), cfg.scheme, PERIODIC)
    )
    n_steps = _step_count(cfg.t_end, cfg.dt)
    means = np.array([integrate(f) / grid.length for f in slices])
    masses0 = np.array([integrate(f) for f in slices])

    def make_state(t, fs):
        hs = tuple(grad_log(f, -1.0) for f in fs)
        return TwistedState(t, tuple(fs), hs)

    states = [make_state(0.0, slices)]
    series = {key: [] for key in ("t", "sup_H", "mass_drift", "sup_dist_to_mean")}
    diagnostics = []

    def record(state: TwistedState):
        masses = np.array([integrate(f) for f in state.f])
        drift = float(np.max(np.abs(masses - masses0)))
        dist = max(
            float(np.max(np.abs(f.values - mean))) for f, mean in zip(state.f, means)
        )
        sup_h = max(float(np.max(np.abs(h.values))) for h in state.H)
        series["t"].append(state.t)
        series["sup_H"].append(sup_h)
        series["mass_drift"].append(drift)
        series["sup_dist_to_mean"].append(dist)
        diagnostics.append(
            DiagnosticsRecord(
                t=state.t,
                betaD_drift=0.0,
                conservation_drift=0.0,
                riccati_res=0.0,
                min_u=min(float(np.min(f.values)) for f in state.f),
                rayleigh=0.0,
                scmix_minus_T2_dev=0.0,
            )
        )

    record(states[0])
    current = slices
    for step in range(1, n_steps + 1):
        t = step * cfg.dt
        current = [stepper.step(f) for f in current]
        if step % cfg.record_every == 0 or step == n_steps:
            state = make_state(t, current)
            states.append(state)
            record(state)
    return TwistedTrajectory(
        states, diagnostics, {k: np.array(v) for k, v in series.items()}, means
    )


def twisted_burgers_residual(traj: TwistedTrajectory, n: int) -> float:
    """Residual of dH/dt + n*(H^2)_y = n*(div H)_y over the recorded states.

    This is the velocity-form evolution implied by the slice heat equation;
    it is O(dt_rec^2 + h^2) for a resolved run.
    """
    states = traj.states
    if len(states) < 3:
        raise ValueError("need at least three recorded states")
    dts = np.diff([s.t for s in states])
    if np.max(np.abs(dts - dts[0])) > 1e-9 * dts[0]:
        raise ValueError("records are not uniformly spaced in time")
    dt_rec = float(dts[0])
    worst = 0.0
    for j in range(1, len(states) - 1):
        for prev_h, cur_h, next_h in zip(states[j - 1].H, states[j].H, states[j + 1].H):
            dh_dt = (next_h.values - prev_h.values) / (2.0 * dt_rec)
            grid = cur_h.grid
            quad = derivative(ScalarField(grid, cur_h.values ** 2)).values
            lead = derivative(divergence(cur_h)).values
            worst = max(worst, float(np.max(np.abs(dh_dt + n * quad - n * lead))))
    return worst


# ---------------------------------------------------------------------------
# normalized fiber-bundle flow


@dataclass(frozen=True)
class NormalizedState:
    t: float
    u: ScalarField
    H: VectorAlongFiber
    betaD: ScalarField
    T2: ScalarField
    scmixT2: ScalarField
    Phi: float


@dataclass
class NormalizedTrajectory:
    states: list[NormalizedState]
    diagnostics: list[DiagnosticsRecord]
    ground: GroundState
    Phi: float
    n: int
    eps_T: float
    series: dict[str, np.ndarray]
    growth_exponent: ScalarField


@dataclass
class NormalizedConfig:
    grid: FiberGrid
    n: int
    betaD: ScalarField
    u0: ScalarField
    T2_0: ScalarField
    dt: float
    t_end: float
    record_every: int = 10
    scheme: Scheme = Scheme.CRANK_NICOLSON
    gap_min: float = 1e-6
    eps_T: float = 1e-8


def normalized_scmix(u: ScalarField, betaD: ScalarField, n: int) -> ScalarField:
    """Sc_mix - |T|^2 along the flow, evaluated through the positive solution:
    -n * (u_xx + betaD * u) / u.  Its fixed points are exactly the discrete
    eigenfunctions, so the long-time value is exactly n * lambda0."""
    vals = -n * (laplacian(u).values + betaD.values * u.values) / u.values
    return ScalarField(u.grid, vals)


def run_normalized_flow(cfg: NormalizedConfig) -> NormalizedTrajectory:
    """Drive du/dt = n*(u_xx + betaD*u) and transport |T|^2 alongside.

    |T|^2 is updated each step by the exponential integrating factor
    exp(4 * (Sc_mix - |T|^2 - Phi) dt) with the trapezoid average of the
    exponent, so zeros of |T|^2 persist exactly and the sign never flips.
    """
    grid = cfg.grid
    if not grid.periodic:
        raise ValueError("normalized flow runs on closed fibers (circle topology)")
    if cfg.n < 1:
        raise ValueError("distribution rank must be at least 1")
    beta_min = float(np.min(cfg.betaD.values))
    if beta_min < -1e-12:
        raise ValueError(f"betaD must be nonnegative, min value {beta_min}")
    betaD = ScalarField(grid, np.maximum(cfg.betaD.values, 0.0))
    if np.min(cfg.u0.values) <= 0.0:
        raise ValueError("u0 must be strictly positive")
    if np.min(cfg.T2_0.values) < 0.0:
        raise ValueError("|T|^2 must be nonnegative")

    gs = ground_state(betaD)
    if gs.gap < cfg.gap_min:
        raise GapTooSmall(
            f"spectral gap {gs.gap:g} below {cfg.gap_min:g}; "
            "convergence rates are not resolvable"
        )
    n = cfg.n
    phi = n * gs.lambda0
    h_limit = grad_log(gs.e0, -float(n))

    stepper = HeatStepper(
        grid,
        ScalarField(grid, n * betaD.values),
        StepperConfig(cfg.dt, float(n), cfg.scheme, PERIODIC),
    )
    n_steps = _step_count(cfg.t_end, cfg.dt)

    u = cfg.u0
    scmix = normalized_scmix(u, betaD, n)
    exponent = np.zeros(grid.n_points)
    t2_0_vals = cfg.T2_0.values

    states: list[NormalizedState] = []
    diagnostics: list[DiagnosticsRecord] = []
    series = {key: [] for key in (
        "t", "sup_dev_scmix", "rayleigh", "min_u", "betaD_drift",
        "conservation_drift", "h_dev", "mass",
    )}
    q0 = None
    mask0 = None

    def record(t, u_field, scmix_field, exp_now):
        nonlocal q0, mask0
        t2 = ScalarField(grid, t2_0_vals * np.exp(exp_now))
        h_field = grad_log(u_field, -float(n))
        state = NormalizedState(t, u_field, h_field, betaD, t2, scmix_field, phi)
        q, mask = conserved_quantity(h_field, t2, n, cfg.eps_T)
        if q0 is None:
            q0, mask0 = q, mask
        both = mask & mask0
        drift = float(np.max(np.abs(q[both] - q0[both]))) if np.any(both) else 0.0
        dev = float(np.max(np.abs(scmix_field.values - phi)))
        hu = -laplacian(u_field).values - betaD.values * u_field.values
        ray = float(
            integrate(ScalarField(grid, u_field.values * hu))
            / integrate(u_field * u_field)
        )
        h_dev = float(np.max(np.abs(h_field.values - h_limit.values)))
        states.append(state)
        diagnostics.append(
            DiagnosticsRecord(
                t=t,
                betaD_drift=0.0,
                conservation_drift=drift,
                riccati_res=0.0,
                min_u=float(np.min(u_field.values)),
                rayleigh=ray,
                scmix_minus_T2_dev=dev,
            )
        )
        series["t"].append(t)
        series["sup_dev_scmix"].append(dev)
        series["rayleigh"].append(ray)
        series["min_u"].append(float(np.min(u_field.values)))
        series["betaD_drift"].append(0.0)
        series["conservation_drift"].append(drift)
        series["h_dev"].append(h_dev)
        series["mass"].append(integrate(u_field))

    record(0.0, u, scmix, exponent)
    for step in range(1, n_steps + 1):
        t = step * cfg.dt
        u = stepper.step(u)
        scmix_new = normalized_scmix(u, betaD, n)
        exponent += 4.0 * cfg.dt * (0.5 * (scmix.values + scmix_new.values) - phi)
        scmix = scmix_new
        if step % cfg.record_every == 0 or step == n_steps:
            record(t, u, scmix, exponent)
    return NormalizedTrajectory(
        states=states,
        diagnostics=diagnostics,
        ground=gs,
        Phi=phi,
        n=n,
        eps_T=cfg.eps_T,
        series={k: np.array(v) for k, v in series.items()},
        growth_exponent=ScalarField(grid, exponent),
    )


@dataclass(frozen=True)
class PositivityReport:
    limit_scmix: ScalarField
    positive_everywhere: bool
    min_value: float
    threshold_ratio: float


def positivity_verdict(traj: NormalizedTrajectory, converged_tol: float = 1e-5) -> PositivityReport:
    """Sign of the limiting mixed curvature Sc_mix = |T|^2 + (Sc_mix - |T|^2).

    Requires the run to have converged (final sup deviation of the
    normalized quantity from Phi below converged_tol).  threshold_ratio is
    the uniform initial |T|^2 that would exactly neutralize n*lambda0,
    divided by max betaD: an empirical stand-in for the non-effective
    constant in front of max betaD.
    """
    final = traj.states[-1]
    dev = float(np.max(np.abs(final.scmixT2.values - traj.Phi)))
    if dev > converged_tol:
        raise NotConverged(
            f"normalized quantity still {dev:g} from its limit (tolerance {converged_tol:g}); "
            "run longer before asking for the limit sign"
        )
    limit = ScalarField(final.u.grid, final.T2.values + final.scmixT2.values)
    min_val = float(np.min(limit.values))
    max_beta = float(np.max(final.betaD.values))
    lam0 = traj.ground.lambda0
    if lam0 < 0.0 and max_beta > 0.0:
        needed = float(np.max(-traj.n * lam0 * np.exp(-traj.growth_exponent.values)))
        ratio = needed / max_beta
    else:
        ratio = 0.0
    return PositivityReport(
        limit_scmix=limit,
        positive_everywhere=bool(min_val > 0.0),
        min_value=min_val,
        threshold_ratio=ratio,
    )


@dataclass(frozen=True)
class RateFit:
    rate: float
    window: tuple[float, float]
    n_points: int


def fit_decay_rate(
    ts,
    values,
    head_frac: float = 0.1,
    floor_frac: float = 1e-8,
    floor_abs: float = 1e-12,
) -> RateFit:
    """Least-squares exponential rate of a decaying positive series.

    The fit window drops the initial transient (values above head_frac of
    the starting value) and the numerical floor (below floor_frac of the
    start or floor_abs).
    """
    ts = np.asarray(ts, dtype=float)
    vals = np.asarray(values, dtype=float)
    if ts.shape != vals.shape or ts.ndim != 1:
        raise ValueError("ts and values must be matching 1-d arrays")
    positive = vals > 0.0
    if not np.any(positive):
        raise ValueError("series has no positive values to fit")
    ref = vals[np.argmax(positive)]
    lo = max(floor_frac * ref, floor_abs)
    mask = positive & (vals <= head_frac * ref) & (vals >= lo)
    if np.sum(mask) < 5:
        raise ValueError(
            f"only {int(np.sum(mask))} points inside the fit window; "
            "run longer or loosen the window"
        )
    slope, _ = np.polyfit(ts[mask], np.log(vals[mask]), 1)
    window_ts = ts[mask]
    return RateFit(rate=float(-slope), window=(float(window_ts[0]), float(window_ts[-1])), n_points=int(np.sum(mask)))
