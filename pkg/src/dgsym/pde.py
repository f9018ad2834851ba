"""Discretized dynamics: homogeneous functionals, the two-field evolution
system, an RK4 stepper, residual evaluation, and closed-form reference
solutions (heat kernels, free-Schroedinger packets, and similarity solutions
used by the symmetry tests).

State is log-polar, psi = exp(r + i s).  In these variables the five
homogeneous functionals are polynomial in derivatives:

    R1 = lap s + 2 grad r . grad s        R2 = 2 lap r + 4 |grad r|^2
    R3 = |grad s|^2                       R4 = 2 grad r . grad s
    R5 = 4 |grad r|^2

and the free evolution system reads

    r_t = 2 nu2 lap r + nu1 lap s + 4 nu2 |grad r|^2 + 2 nu1 grad r . grad s
    s_t = -(2 mu2 lap r + mu1 lap s + 4 (mu2+mu5) |grad r|^2
            + 2 (mu1+mu4) grad r . grad s + mu3 |grad s|^2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .fields import Grid, LogPolarField, Trajectory
from .kernels import evolution_rhs, first_second_derivatives
from .params import DGParams, predicate_report

__all__ = [
    "Functionals", "functionals", "dg_rhs", "evolve", "EvolutionBlowup",
    "ResidualReport", "residual", "se_residual",
    "heat_solution", "se_gaussian", "plane_wave_solution",
    "HeatGaussian", "SEPacket", "PlaneWave", "GaugedSolution",
    "ScaleSimilaritySolution", "HJSimilaritySolution",
    "heat_residual", "rhs_coefficients",
]


class Functionals(NamedTuple):
    R1: np.ndarray
    R2: np.ndarray
    R3: np.ndarray
    R4: np.ndarray
    R5: np.ndarray


def _zero_boundary(arr, grid):
    if grid.bc == "periodic":
        return arr
    for axis in range(grid.n):
        sl = [slice(None)] * grid.n
        sl[axis] = 0
        arr[tuple(sl)] = 0.0
        sl[axis] = -1
        arr[tuple(sl)] = 0.0
    return arr


def _derivative_bundle(field: LogPolarField):
    grid = field.grid
    periodic = grid.bc == "periodic"
    r_d = first_second_derivatives(field.r, grid)
    s_d = first_second_derivatives(field.s, grid, wrap=periodic)
    lap_r = sum(d2 for _, d2 in r_d)
    lap_s = sum(d2 for _, d2 in s_d)
    gr2 = sum(d1 * d1 for d1, _ in r_d)
    gs2 = sum(d1 * d1 for d1, _ in s_d)
    grgs = sum(rd[0] * sd[0] for rd, sd in zip(r_d, s_d))
    return lap_r, lap_s, gr2, gs2, grgs


def functionals(field: LogPolarField) -> Functionals:
    """R1..R5 via centered second-order stencils (boundary ring zeroed)."""
    grid = field.grid
    lap_r, lap_s, gr2, gs2, grgs = _derivative_bundle(field)
    out = Functionals(
        R1=lap_s + 2.0 * grgs,
        R2=2.0 * lap_r + 4.0 * gr2,
        R3=gs2,
        R4=2.0 * grgs,
        R5=4.0 * gr2,
    )
    return Functionals(*(_zero_boundary(a, grid) for a in out))


def rhs_coefficients(p: DGParams) -> tuple:
    """Nine stencil-combination coefficients of the evolution right-hand side."""
    f = p.as_float_dict()
    return (
        2.0 * f["nu2"], f["nu1"], 4.0 * f["nu2"], 2.0 * f["nu1"],
        -2.0 * f["mu2"], -f["mu1"], -4.0 * (f["mu2"] + f["mu5"]),
        -2.0 * (f["mu1"] + f["mu4"]), -f["mu3"],
    )


def dg_rhs(p: DGParams, field: LogPolarField) -> tuple:
    """(r_t, s_t) of the free evolution system; boundary ring is zero on
    dirichlet grids (boundary values are imposed, not evolved)."""
    return evolution_rhs(field.r, field.s, field.grid, rhs_coefficients(p))


class EvolutionBlowup(RuntimeError):
    def __init__(self, step, t, norm):
        super().__init__(f"|r| reached {norm:.3g} at step {step} (t={t:.6g}); "
                         "the evolution left the trusted regime")
        self.step, self.t, self.norm = step, t, norm


def evolve(p: DGParams, field0: LogPolarField, steps: int, dt: float | None = None,
           c_cfl: float = 0.2, bc_values: Callable | None = None,
           blowup: float = 100.0, save_every: int = 1) -> Trajectory:
    """Method-of-lines RK4 on the evolution system.

    dt defaults to c_cfl * dx_min^2 and may not exceed it.  On dirichlet
    grids ``bc_values(coords, t) -> (r, s)`` supplies boundary data at stage
    times (convergence studies pin them to a closed-form solution).
    """
    grid = field0.grid
    dx2 = min(grid.spacings) ** 2
    if dt is None:
        dt = c_cfl * dx2
    if dt > c_cfl * dx2 * (1.0 + 1e-12):
        raise ValueError(f"dt={dt:.3g} violates the stability rule "
                         f"dt <= c_cfl*dx^2 = {c_cfl * dx2:.3g}")
    if steps < 0:
        raise ValueError("steps must be >= 0")

    dirichlet = grid.bc == "dirichlet"
    if dirichlet and bc_values is None:
        raise ValueError("dirichlet evolution needs bc_values pinned to a "
                         "reference solution")
    coords = grid.coords()
    mask = np.zeros(grid.shape, dtype=bool)
    if dirichlet:
        for axis in range(grid.n):
            sl = [slice(None)] * grid.n
            sl[axis] = 0
            mask[tuple(sl)] = True
            sl[axis] = -1
            mask[tuple(sl)] = True

    coeffs = rhs_coefficients(p)

    def pin(r, s, t):
        if dirichlet:
            rb, sb = bc_values(coords, t)
            r[mask] = np.broadcast_to(rb, grid.shape)[mask]
            s[mask] = np.broadcast_to(sb, grid.shape)[mask]
        return r, s

    traj = Trajectory(grid, [field0.copy()])
    r = field0.r.copy()
    s = field0.s.copy()
    t = field0.t
    for step in range(1, steps + 1):
        k1r, k1s = evolution_rhs(r, s, grid, coeffs)
        r2, s2 = pin(r + 0.5 * dt * k1r, s + 0.5 * dt * k1s, t + 0.5 * dt)
        k2r, k2s = evolution_rhs(r2, s2, grid, coeffs)
        r3, s3 = pin(r + 0.5 * dt * k2r, s + 0.5 * dt * k2s, t + 0.5 * dt)
        k3r, k3s = evolution_rhs(r3, s3, grid, coeffs)
        r4, s4 = pin(r + dt * k3r, s + dt * k3s, t + dt)
        k4r, k4s = evolution_rhs(r4, s4, grid, coeffs)
        r = r + (dt / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
        s = s + (dt / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
        t = field0.t + step * dt
        r, s = pin(r, s, t)
        norm = float(np.max(np.abs(r)))
        if not math.isfinite(norm) or norm > blowup:
            raise EvolutionBlowup(step, t, norm)
        if step % save_every == 0 or step == steps:
            traj.append(LogPolarField(grid, t, r.copy(), s.copy()))
    return traj


# ---------------------------------------------------------------------------
# Residuals.

@dataclass(frozen=True)
class ResidualReport:
    r_linf: float
    r_l2: float
    s_linf: float
    s_l2: float

    @property
    def linf(self) -> float:
        return max(self.r_linf, self.s_linf)

    @property
    def l2(self) -> float:
        return math.hypot(self.r_l2, self.s_l2)

    def to_json_dict(self):
        return {"r_linf": self.r_linf, "r_l2": self.r_l2,
                "s_linf": self.s_linf, "s_l2": self.s_l2,
                "linf": self.linf, "l2": self.l2}


def _time_derivative(prev, cur, nxt, h1, h2):
    """Three-point first derivative at the middle slice, exact on quadratics."""
    return (h1 * h1 * nxt - h2 * h2 * prev + (h2 * h2 - h1 * h1) * cur) \
        / (h1 * h2 * (h1 + h2))


def _interior_slice(grid: Grid):
    if grid.bc == "periodic":
        return (slice(None),) * grid.n
    return (slice(1, -1),) * grid.n


def _residual_fields(rhs_fn, traj: Trajectory):
    """Generic (rhs - d/dt) residual over the inner time slices."""
    if len(traj) < 3:
        raise ValueError("residual needs at least 3 time slices")
    times = traj.times
    inner = _interior_slice(traj.grid)
    res_r, res_s = [], []
    for k in range(1, len(traj) - 1):
        h1 = times[k] - times[k - 1]
        h2 = times[k + 1] - times[k]
        if h1 <= 0 or h2 <= 0:
            raise ValueError("trajectory times must be strictly increasing")
        r_t = _time_derivative(traj[k - 1].r, traj[k].r, traj[k + 1].r, h1, h2)
        s_t = _time_derivative(traj[k - 1].s, traj[k].s, traj[k + 1].s, h1, h2)
        rhs_r, rhs_s = rhs_fn(traj[k])
        res_r.append((rhs_r - r_t)[inner])
        res_s.append((rhs_s - s_t)[inner])
    return np.array(res_r), np.array(res_s)


def _norms(arr) -> tuple:
    return float(np.max(np.abs(arr))), float(np.sqrt(np.mean(arr * arr)))


def residual(p: DGParams, traj: Trajectory) -> ResidualReport:
    """Residual norms of both evolution equations over interior points.

    Time derivatives are centered three-point differences (non-uniform time
    stamps allowed); a trajectory solves the system iff both residuals vanish
    to discretization order.
    """
    res_r, res_s = _residual_fields(lambda f: dg_rhs(p, f), traj)
    (r_linf, r_l2), (s_linf, s_l2) = _norms(res_r), _norms(res_s)
    return ResidualReport(r_linf, r_l2, s_linf, s_l2)


def se_residual(a: float, traj: Trajectory) -> ResidualReport:
    """Residual of the free linear Schroedinger equation i psi_t = a lap psi,
    written in log-polar variables."""

    def rhs(fld):
        lap_r, lap_s, gr2, gs2, grgs = _derivative_bundle(fld)
        rt = a * (lap_s + 2.0 * grgs)
        st = -a * (lap_r + gr2 - gs2)
        return (_zero_boundary(rt, fld.grid), _zero_boundary(st, fld.grid))

    res_r, res_s = _residual_fields(rhs, traj)
    (r_linf, r_l2), (s_linf, s_l2) = _norms(res_r), _norms(res_s)
    return ResidualReport(r_linf, r_l2, s_linf, s_l2)


# ---------------------------------------------------------------------------
# Closed-form reference solutions.

def _sum_sq(xs, center, shift=0.0):
    total = 0.0
    for i, x in enumerate(xs):
        c = center[i] if center is not None else 0.0
        total = total + (np.asarray(x) - c + (shift[i] if shift is not None else 0.0)) ** 2
    return total


@dataclass(frozen=True)
class HeatGaussian:
    """Positive solution of d_t phi + sign * D lap phi = 0.

    direction='forward' means d_t phi + D lap phi = 0 (a Gaussian sharpening
    toward its focus time, valid for t < focus_time); 'backward' means
    d_t phi - D lap phi = 0 (spreading, valid for t > focus_time).  An offset
    keeps the solution bounded away from zero.
    """

    D: float
    direction: str
    n: int = 1
    amplitude: float = 1.0
    center: tuple | None = None
    focus_time: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.D <= 0:
            raise ValueError("diffusion coefficient must be positive")
        if self.direction not in ("forward", "backward"):
            raise ValueError("direction must be 'forward' or 'backward'")
        if self.amplitude < 0 or self.offset < 0 or self.amplitude + self.offset == 0:
            raise ValueError("need amplitude, offset >= 0, not both zero")

    def _tau(self, t):
        tau = (self.focus_time - t) if self.direction == "forward" else (t - self.focus_time)
        if np.any(np.asarray(tau) <= 0):
            side = "<" if self.direction == "forward" else ">"
            raise ValueError(f"heat kernel valid only for t {side} {self.focus_time}")
        return tau

    def value(self, xs, t):
        if self.amplitude == 0:
            return self.offset + np.zeros_like(np.asarray(xs[0], dtype=float))
        tau = self._tau(t)
        q = _sum_sq(xs, self.center, None)
        return self.offset + self.amplitude * tau ** (-self.n / 2.0) \
            * np.exp(-q / (4.0 * self.D * tau))

    def sign(self) -> float:
        return 1.0 if self.direction == "forward" else -1.0


def heat_solution(D, direction, n=1, amplitude=1.0, center=None,
                  focus_time=None, offset=0.0) -> HeatGaussian:
    if focus_time is None:
        focus_time = 1.0 if direction == "forward" else -0.25
    return HeatGaussian(D=float(D), direction=direction, n=n,
                        amplitude=float(amplitude), center=center,
                        focus_time=float(focus_time), offset=float(offset))


def heat_residual(sol: HeatGaussian, grid: Grid, times) -> float:
    """L2 finite-difference residual of d_t phi + sign * D lap phi = 0."""
    vals = [sol.value(grid.coords(), t) for t in times]
    inner = _interior_slice(grid)
    res = []
    for k in range(1, len(times) - 1):
        h1, h2 = times[k] - times[k - 1], times[k + 1] - times[k]
        phi_t = _time_derivative(vals[k - 1], vals[k], vals[k + 1], h1, h2)
        lap = sum(d2 for _, d2 in first_second_derivatives(vals[k], grid))
        res.append((phi_t + sol.sign() * sol.D * lap)[inner])
    return float(np.sqrt(np.mean(np.square(res))))


@dataclass(frozen=True)
class SEPacket:
    """Nowhere-zero Gaussian packet solving i psi_t = a lap psi.

    Continuous analytic phase (no wrapping): r and s come from the exact
    complex logarithm of the packet, with the principal branch safe because
    1 + 4ia b0 t stays in the right half plane.
    """

    a: float
    n: int = 1
    b0: float = -0.25
    center: tuple | None = None
    k: tuple | None = None
    amplitude: float = 1.0

    def __post_init__(self):
        if self.a == 0:
            raise ValueError("dispersion coefficient must be nonzero")
        if self.b0 >= 0:
            raise ValueError("b0 must be negative for a normalizable packet")
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")

    def _pieces(self, t):
        z = 1.0 + 4.0j * self.a * self.b0 * t
        logA = -(self.n / 2.0) * np.log(z)
        B = self.b0 / z
        return z, logA, B

    def _k(self):
        return np.zeros(self.n) if self.k is None else np.asarray(self.k, dtype=float)

    def _moved(self, xs, t):
        k = self._k()
        shift = 2.0 * self.a * k * t
        return _sum_sq(xs, self.center, shift), k

    def rs(self, xs, t):
        _, logA, B = self._pieces(t)
        q, k = self._moved(xs, t)
        phase_pw = sum(kj * np.asarray(x) for kj, x in zip(k, xs)) \
            + self.a * float(k @ k) * t
        r = math.log(self.amplitude) + logA.real + B.real * q
        s = logA.imag + B.imag * q + phase_pw
        return np.asarray(r, dtype=float), np.asarray(s, dtype=float)

    def rs_t(self, xs, t):
        """Exact time derivatives (oracle for the discrete right-hand side)."""
        z, _, B = self._pieces(t)
        dlogA = -(self.n / 2.0) * (4.0j * self.a * self.b0) / z
        dB = -4.0j * self.a * B * B
        q, k = self._moved(xs, t)
        shift = 2.0 * self.a * k * t
        dq = sum(2.0 * (np.asarray(x) - (self.center[i] if self.center else 0.0)
                        + shift[i]) * 2.0 * self.a * k[i]
                 for i, x in enumerate(xs))
        r_t = dlogA.real + dB.real * q + B.real * dq
        s_t = dlogA.imag + dB.imag * q + B.imag * dq + self.a * float(k @ k)
        return np.asarray(r_t, dtype=float), np.asarray(s_t, dtype=float)

    def psi(self, xs, t):
        r, s = self.rs(xs, t)
        return np.exp(r + 1j * s)


def se_gaussian(a, n=1, b0=-0.25, center=None, k=None, amplitude=1.0) -> SEPacket:
    return SEPacket(a=float(a), n=n, b0=float(b0), center=center, k=k,
                    amplitude=float(amplitude))


@dataclass(frozen=True)
class SEPacketSum:
    """Superposition of packets with a dominant first member.

    A single Gaussian packet is quadratic in (r, s), which centered stencils
    differentiate exactly; superpositions restore generic fourth derivatives
    and are the right vehicle for order-of-accuracy studies.  The first
    packet must dominate the rest pointwise so psi never vanishes and the
    phase unwraps analytically: s = s_1 + arg(1 + sum psi_j/psi_1).
    """

    packets: tuple

    def __post_init__(self):
        if len(self.packets) < 1:
            raise ValueError("need at least one packet")
        if len({pk.a for pk in self.packets}) != 1:
            raise ValueError("all packets must share the dispersion coefficient")

    def _ratio(self, xs, t):
        lead = self.packets[0]
        r1, s1 = lead.rs(xs, t)
        total = 0.0
        for pk in self.packets[1:]:
            rj, sj = pk.rs(xs, t)
            total = total + np.exp(rj - r1 + 1j * (sj - s1))
        mag = np.abs(1.0 + total)
        if np.any(mag <= 0.1):
            raise ValueError("leading packet no longer dominates; psi may vanish")
        return r1, s1, total

    def rs(self, xs, t):
        r1, s1, total = self._ratio(xs, t)
        w = 1.0 + total
        return r1 + np.log(np.abs(w)), s1 + np.angle(w)

    def rs_t(self, xs, t):
        """d/dt of (r, s) from psi_t / psi = sum_j (psi_j/psi)(r_j + i s_j)_t."""
        r1, s1, _ = self._ratio(xs, t)
        num = 0.0
        den = 0.0
        for pk in self.packets:
            rj, sj = pk.rs(xs, t)
            rjt, sjt = pk.rs_t(xs, t)
            w = np.exp(rj - r1 + 1j * (sj - s1))
            num = num + w * (rjt + 1j * sjt)
            den = den + w
        ratio = num / den
        return ratio.real, ratio.imag


@dataclass(frozen=True)
class PlaneWave:
    """r = r0, s = k.x - omega t; solves the system when omega = mu3 |k|^2."""

    k: tuple
    omega: float
    r0: float = 0.0

    def rs(self, xs, t):
        k = np.asarray(self.k, dtype=float)
        s = sum(kj * np.asarray(x) for kj, x in zip(k, xs)) - self.omega * t
        return np.full_like(np.asarray(s, dtype=float), self.r0), s


def plane_wave_solution(p: DGParams, k) -> PlaneWave:
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.size != p.n:
        raise ValueError("wave vector must have one component per axis")
    return PlaneWave(k=tuple(k), omega=float(p.mu3) * float(k @ k))


@dataclass(frozen=True)
class GaugedSolution:
    """(r, s) -> (r, gamma r + Lambda s) applied to a base evaluator."""

    base: object
    Lambda: float
    gamma: float

    def rs(self, xs, t):
        r, s = self.base.rs(xs, t)
        return r, self.gamma * r + self.Lambda * s

    def rs_t(self, xs, t):
        r_t, s_t = self.base.rs_t(xs, t)
        return r_t, self.gamma * r_t + self.Lambda * s_t


@dataclass(frozen=True)
class ScaleSimilaritySolution:
    """Closed-form solution of the two-parameter special class with nu2 = 0:

        r = -(n/2) ln(t - t0) + bump * exp(-|x/(t-t0)|^2)
        s = -|x|^2 / (4 nu1 (t - t0))

    Valid for any profile in place of the Gaussian bump; used to exercise the
    scaling, expansion and time-inversion flows on a genuinely curved field.
    """

    p: DGParams
    t0: float = -1.0
    bump: float = 0.5

    def __post_init__(self):
        rep = predicate_report(self.p)
        if not (rep["GalSub"] and rep["FinSub"] and self.p.nu2 == 0):
            raise ValueError("similarity solution needs the nu2 = 0 point of "
                             "the doubly-special class")

    def rs(self, xs, t):
        tt = t - self.t0
        if np.any(np.asarray(tt) <= 0):
            raise ValueError("similarity solution valid for t > t0")
        q = _sum_sq(xs, None, None)
        u2 = q / tt ** 2
        r = -(self.p.n / 2.0) * np.log(tt) + self.bump * np.exp(-u2)
        s = -q / (4.0 * float(self.p.nu1) * tt)
        return r, s


@dataclass(frozen=True)
class HJSimilaritySolution:
    """Closed-form solution on the commutative infinite subfamily:

        z = 2 nu2 r + nu1 s = -|x|^2 / (8 (t - t0))
        r = -(n/4) ln(t - t0) + bump * exp(-|x|^2/(t-t0))
    """

    p: DGParams
    t0: float = -1.0
    bump: float = 0.5

    def __post_init__(self):
        if not predicate_report(self.p)["InfaSub"]:
            raise ValueError("needs the commutative infinite subfamily")

    def rs(self, xs, t):
        tt = t - self.t0
        if np.any(np.asarray(tt) <= 0):
            raise ValueError("valid for t > t0")
        q = _sum_sq(xs, None, None)
        z = -q / (8.0 * tt)
        r = -(self.p.n / 4.0) * np.log(tt) + self.bump * np.exp(-q / tt)
        s = (z - 2.0 * float(self.p.nu2) * r) / float(self.p.nu1)
        return r, s
