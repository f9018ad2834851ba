"""Grids, discretized log-polar wavefunctions, trajectories, and file formats.

A wavefunction is stored as the pair (r, s) = (ln|psi|, unwrapped arg psi) on
a uniform grid in one or two spatial dimensions.  Nowhere-vanishing psi is a
structural assumption: r must be finite everywhere and s must have no jump of
2 pi between neighbors.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Grid", "LogPolarField", "Trajectory", "sample_evaluator",
           "interp_field", "write_snapshot", "read_snapshot",
           "write_trajectory", "read_trajectory"]


@dataclass(frozen=True)
class Grid:
    """Uniform grid: n in {1,2}, per-axis extent, N points per axis."""

    n: int
    npts: int
    bounds: tuple
    bc: str = "dirichlet"

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError("dynamics support n in {1, 2}")
        if self.npts < 16:
            raise ValueError("need at least 16 points per axis")
        if self.bc not in ("periodic", "dirichlet"):
            raise ValueError(f"unknown boundary condition {self.bc!r}")
        bounds = tuple(tuple(float(v) for v in ab) for ab in self.bounds)
        if len(bounds) != self.n:
            raise ValueError("one (a, b) extent required per axis")
        for a, b in bounds:
            if not b > a:
                raise ValueError("extent must have b > a")
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def make(cls, n=1, npts=64, extent=(-4.0, 4.0), bc="dirichlet") -> "Grid":
        return cls(n=n, npts=npts, bounds=(tuple(extent),) * n, bc=bc)

    def dx(self, axis: int = 0) -> float:
        a, b = self.bounds[axis]
        return (b - a) / self.npts if self.bc == "periodic" else (b - a) / (self.npts - 1)

    @property
    def spacings(self) -> tuple:
        return tuple(self.dx(i) for i in range(self.n))

    def axis(self, i: int = 0) -> np.ndarray:
        a, b = self.bounds[i]
        if self.bc == "periodic":
            return a + self.dx(i) * np.arange(self.npts)
        return np.linspace(a, b, self.npts)

    def coords(self) -> tuple:
        axes = [self.axis(i) for i in range(self.n)]
        if self.n == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    @property
    def shape(self) -> tuple:
        return (self.npts,) * self.n

    def refine(self, factor: int = 2) -> "Grid":
        npts = self.npts * factor if self.bc == "periodic" \
            else (self.npts - 1) * factor + 1
        return Grid(n=self.n, npts=npts, bounds=self.bounds, bc=self.bc)


@dataclass
class LogPolarField:
    """(r, s) arrays over a grid at time stamp t."""

    grid: Grid
    t: float
    r: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=np.float64)
        self.s = np.asarray(self.s, dtype=np.float64)
        if self.r.shape != self.grid.shape or self.s.shape != self.grid.shape:
            raise ValueError("field arrays must match the grid shape")

    def validate(self) -> "LogPolarField":
        if not np.all(np.isfinite(self.r)):
            raise ValueError("r must be finite everywhere (psi must not vanish)")
        if not np.all(np.isfinite(self.s)):
            raise ValueError("s must be finite everywhere")
        for axis in range(self.grid.n):
            jumps = np.abs(np.diff(self.s, axis=axis))
            if jumps.size and jumps.max() > np.pi:
                raise ValueError("s has a neighbor jump above pi; unwrap the phase")
        return self

    def copy(self) -> "LogPolarField":
        return LogPolarField(self.grid, self.t, self.r.copy(), self.s.copy())

    def psi(self) -> np.ndarray:
        return np.exp(self.r + 1j * self.s)


@dataclass
class Trajectory:
    """Time-ordered sequence of fields on a common grid."""

    grid: Grid
    fields: list = field(default_factory=list)

    def __post_init__(self):
        for f in self.fields:
            if f.grid != self.grid:
                raise ValueError("all fields must share the trajectory grid")

    @property
    def times(self) -> np.ndarray:
        return np.array([f.t for f in self.fields])

    def __len__(self):
        return len(self.fields)

    def __getitem__(self, k) -> LogPolarField:
        return self.fields[k]

    def append(self, f: LogPolarField):
        if f.grid != self.grid:
            raise ValueError("grid mismatch")
        self.fields.append(f)


def sample_evaluator(evaluator, grid: Grid, t: float) -> LogPolarField:
    """Sample an (r, s) evaluator with signature rs(coords_tuple, t) on a grid."""
    r, s = evaluator.rs(grid.coords(), t)
    return LogPolarField(grid, float(t),
                         np.broadcast_to(r, grid.shape).copy(),
                         np.broadcast_to(s, grid.shape).copy())


def sample_trajectory(evaluator, grid: Grid, times) -> Trajectory:
    return Trajectory(grid, [sample_evaluator(evaluator, grid, t) for t in times])


# ---------------------------------------------------------------------------
# Interpolation (for grid-relocating flows).

def interp_field(f: LogPolarField, points: tuple, tol: float = 1e-9) -> tuple:
    """Cubic interpolation of (r, s) at off-grid points.

    ``points`` is a tuple of coordinate arrays, one per axis, broadcastable to
    a common shape.  Points may not leave the grid support by more than
    ``tol``; phase winding across a periodic seam makes cubic phase
    interpolation ill-posed, so relocation is a dirichlet-grid operation.
    """
    from scipy.interpolate import CubicSpline, RectBivariateSpline

    grid = f.grid
    if grid.bc != "dirichlet":
        raise NotImplementedError(
            "relocating interpolation needs a dirichlet grid; vertical flows "
            "work on any grid")
    for i, pts in enumerate(points):
        a, b = grid.bounds[i]
        pts = np.asarray(pts)
        if pts.min() < a - tol or pts.max() > b + tol:
            raise ValueError(
                f"flow leaves grid support on axis {i}: "
                f"[{pts.min():.4g}, {pts.max():.4g}] vs [{a}, {b}]")
    clipped = [np.clip(np.asarray(pts, dtype=float), *grid.bounds[i])
               for i, pts in enumerate(points)]
    if grid.n == 1:
        x = grid.axis(0)
        return (CubicSpline(x, f.r)(clipped[0]),
                CubicSpline(x, f.s)(clipped[0]))
    x, y = grid.axis(0), grid.axis(1)
    rsp = RectBivariateSpline(x, y, f.r, kx=3, ky=3)
    ssp = RectBivariateSpline(x, y, f.s, kx=3, ky=3)
    shape = np.broadcast(*clipped).shape
    px, py = (np.broadcast_to(c, shape).ravel() for c in clipped)
    return (rsp.ev(px, py).reshape(shape), ssp.ev(px, py).reshape(shape))


# ---------------------------------------------------------------------------
# Snapshot / trajectory files.

def write_snapshot(f: LogPolarField, path) -> None:
    """CSV with header x[,y],t,r,s."""
    coords = f.grid.coords()
    cols = [c.ravel() for c in coords]
    header = ["x", "y"][: f.grid.n] + ["t", "r", "s"]
    data = np.column_stack(cols + [np.full(cols[0].size, f.t),
                                   f.r.ravel(), f.s.ravel()])
    np.savetxt(path, data, delimiter=",", header=",".join(header), comments="")


def read_snapshot(path, grid: Grid) -> LogPolarField:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    t = float(data[0, grid.n])
    r = data[:, grid.n + 1].reshape(grid.shape)
    s = data[:, grid.n + 2].reshape(grid.shape)
    return LogPolarField(grid, t, r, s)


def _grid_to_json(grid: Grid) -> dict:
    return {"n": grid.n, "npts": grid.npts, "bounds": [list(b) for b in grid.bounds],
            "bc": grid.bc}


def _grid_from_json(d) -> Grid:
    return Grid(n=d["n"], npts=d["npts"],
                bounds=tuple(tuple(b) for b in d["bounds"]), bc=d["bc"])


def write_trajectory(traj: Trajectory, outdir, params_json=None, dt=None) -> str:
    """Snapshot directory plus a manifest.json describing grid and timing."""
    os.makedirs(outdir, exist_ok=True)
    names = []
    for k, f in enumerate(traj.fields):
        name = f"snap{k:05d}.csv"
        write_snapshot(f, os.path.join(outdir, name))
        names.append(name)
    manifest = {
        "grid": _grid_to_json(traj.grid),
        "times": [float(t) for t in traj.times],
        "dt": dt,
        "params": params_json,
        "snapshots": names,
    }
    mpath = os.path.join(outdir, "manifest.json")
    with open(mpath, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return mpath


def read_trajectory(outdir) -> Trajectory:
    with open(os.path.join(outdir, "manifest.json")) as fh:
        manifest = json.load(fh)
    grid = _grid_from_json(manifest["grid"])
    fields = [read_snapshot(os.path.join(outdir, name), grid)
              for name in manifest["snapshots"]]
    return Trajectory(grid, fields)
