import numpy as np
import pytest

from dgsym import kernels
from dgsym.fields import (Grid, LogPolarField, Trajectory, read_snapshot,
                          read_trajectory, sample_evaluator, sample_trajectory,
                          write_snapshot, write_trajectory)
from dgsym.pde import (EvolutionBlowup, SEPacketSum, dg_rhs, evolve,
                       functionals, heat_residual, heat_solution,
                       plane_wave_solution, residual, se_gaussian, se_residual)


def interior(arr):
    return arr[1:-1]


# ---------------------------------------------------------------------------
# grids and fields

def test_grid_validation():
    with pytest.raises(ValueError):
        Grid.make(npts=8)
    with pytest.raises(ValueError):
        Grid.make(bc="weird")
    with pytest.raises(ValueError):
        Grid(n=3, npts=32, bounds=((0, 1),) * 3)
    g = Grid.make(npts=64, extent=(-2.0, 2.0), bc="periodic")
    assert g.dx() == pytest.approx(4.0 / 64)
    assert Grid.make(npts=64).dx() == pytest.approx(8.0 / 63)


def test_field_validation():
    g = Grid.make(npts=32, extent=(-1, 1))
    x = g.coords()[0]
    with pytest.raises(ValueError):
        LogPolarField(g, 0.0, np.full(32, np.inf), np.zeros(32)).validate()
    jumpy = np.zeros(32)
    jumpy[16:] = 4.0
    with pytest.raises(ValueError):
        LogPolarField(g, 0.0, np.zeros(32), jumpy).validate()
    LogPolarField(g, 0.0, -x ** 2, 0.1 * x).validate()


def test_snapshot_round_trip(tmp_path):
    g = Grid.make(npts=32, extent=(-1, 1))
    x = g.coords()[0]
    f = LogPolarField(g, 0.25, -x ** 2, 0.3 * x)
    path = tmp_path / "snap.csv"
    write_snapshot(f, path)
    f2 = read_snapshot(path, g)
    assert f2.t == pytest.approx(0.25)
    np.testing.assert_allclose(f2.r, f.r, atol=1e-12)
    np.testing.assert_allclose(f2.s, f.s, atol=1e-12)


def test_trajectory_round_trip(tmp_path):
    g = Grid.make(npts=32, extent=(-1, 1))
    x = g.coords()[0]
    traj = Trajectory(g, [LogPolarField(g, 0.1 * k, -x ** 2 + 0.01 * k, 0.2 * x)
                          for k in range(3)])
    write_trajectory(traj, tmp_path / "run", params_json={"n": 1}, dt=0.1)
    back = read_trajectory(tmp_path / "run")
    assert len(back) == 3
    np.testing.assert_allclose(back.times, traj.times, atol=1e-12)
    np.testing.assert_allclose(back[2].r, traj[2].r, atol=1e-12)


# ---------------------------------------------------------------------------
# functionals

def test_functionals_constant_field():
    g = Grid.make(npts=32, extent=(-1, 1), bc="periodic")
    f = LogPolarField(g, 0.0, np.full(32, 0.7), np.full(32, -0.2))
    F = functionals(f)
    for arr in F:
        assert np.max(np.abs(arr)) == 0.0


def test_functionals_plane_wave_periodic_winding():
    g = Grid.make(npts=64, extent=(0, 2 * np.pi), bc="periodic")
    x = g.coords()[0]
    k = 3.0
    F = functionals(LogPolarField(g, 0.0, np.zeros_like(x), k * x))
    np.testing.assert_allclose(F.R3, k * k, atol=1e-10)
    for arr in (F.R1, F.R2, F.R4, F.R5):
        assert np.max(np.abs(arr)) < 1e-10


def test_functionals_gaussian_profile():
    g = Grid.make(npts=64, extent=(-2, 2))
    x = g.coords()[0]
    F = functionals(LogPolarField(g, 0.0, -x ** 2, np.zeros_like(x)))
    np.testing.assert_allclose(interior(F.R5), 16 * interior(x) ** 2, atol=1e-10)
    np.testing.assert_allclose(interior(F.R2), -4 + 16 * interior(x) ** 2,
                               atol=1e-10)
    for arr in (F.R1, F.R3, F.R4):
        assert np.max(np.abs(arr)) < 1e-12


def test_functionals_scale_invariance():
    """Homogeneity of degree zero: r -> r + const changes nothing."""
    g = Grid.make(npts=48, extent=(-2, 2), bc="periodic")
    x = g.coords()[0]
    f1 = LogPolarField(g, 0.0, 0.3 * np.sin(np.pi * x / 2), 0.2 * np.cos(np.pi * x))
    f2 = LogPolarField(g, 0.0, f1.r + 3.7, f1.s + 1.1)
    F1, F2 = functionals(f1), functionals(f2)
    for a, b in zip(F1, F2):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_laplacian_decomposition():
    """i R1 + R2/2 - R3 - R5/4 agrees with the discrete lap(psi)/psi."""
    def err(npts):
        g = Grid.make(npts=npts, extent=(0, 2 * np.pi), bc="periodic")
        x = g.coords()[0]
        f = LogPolarField(g, 0.0, 0.3 * np.sin(x), 0.4 * np.cos(x))
        F = functionals(f)
        combo = 1j * F.R1 + 0.5 * F.R2 - F.R3 - 0.25 * F.R5
        psi = f.psi()
        dx = g.dx()
        lap = (np.roll(psi, -1) - 2 * psi + np.roll(psi, 1)) / dx ** 2
        return np.max(np.abs(combo - lap / psi))

    e1, e2 = err(64), err(128)
    assert e1 < 2e-3
    assert e1 / e2 > 3.0  # both sides differ at second order


# ---------------------------------------------------------------------------
# right-hand side

def test_rhs_constant_field(pts):
    g = Grid.make(npts=32, extent=(-1, 1), bc="periodic")
    f = LogPolarField(g, 0.0, np.full(32, 0.5), np.full(32, 1.0))
    rt, st = dg_rhs(pts["generic"], f)
    assert np.max(np.abs(rt)) == 0.0 and np.max(np.abs(st)) == 0.0


def test_rhs_matches_packet_derivative(pts):
    p = pts["linear-se"]
    pack = se_gaussian(float(p.nu1), b0=-0.25, k=(0.3,))
    g = Grid.make(npts=64, extent=(-3, 3))
    f = sample_evaluator(pack, g, 0.05)
    rt, st = dg_rhs(p, f)
    rte, ste = pack.rs_t(g.coords(), 0.05)
    assert np.max(np.abs(interior(rt) - interior(rte))) < 1e-10
    assert np.max(np.abs(interior(st) - interior(ste))) < 1e-10


def test_rhs_plane_wave_infinite_subfamily(pts):
    p = pts["infsub"]
    g = Grid.make(npts=64, extent=(0, 2 * np.pi), bc="periodic")
    f = sample_evaluator(plane_wave_solution(p, (3.0,)), g, 0.0)
    rt, st = dg_rhs(p, f)
    assert np.max(np.abs(rt)) < 1e-10
    np.testing.assert_allclose(st, 2.0 * float(p.nu1) * 9.0, atol=1e-10)


@pytest.mark.parametrize("bc", ["periodic", "dirichlet"])
@pytest.mark.parametrize("n", [1, 2])
def test_rhs_backend_parity(pts, bc, n):
    if not kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    p = pts["sym1b-nu2"]
    g = Grid.make(n=n, npts=32, extent=(-2, 2), bc=bc)
    rng = np.random.default_rng(3)
    r = 0.2 * rng.standard_normal(g.shape)
    s = 0.2 * rng.standard_normal(g.shape)
    # smooth them slightly to stay in a sane range
    f = LogPolarField(g, 0.0, r, s)
    try:
        kernels.set_backend("numba")
        rt1, st1 = dg_rhs(p, f)
        kernels.set_backend("numpy")
        rt2, st2 = dg_rhs(p, f)
    finally:
        kernels.set_backend(None)
    np.testing.assert_allclose(rt1, rt2, atol=1e-12)
    np.testing.assert_allclose(st1, st2, atol=1e-12)


def test_backend_selection():
    with pytest.raises(ValueError):
        kernels.set_backend("cuda")
    kernels.set_backend("numpy")
    assert kernels.active_backend() == "numpy"
    kernels.set_backend(None)


# ---------------------------------------------------------------------------
# evolution

def test_evolve_zero_steps(pts):
    g = Grid.make(npts=32, extent=(-1, 1), bc="periodic")
    x = g.coords()[0]
    f0 = LogPolarField(g, 0.0, 0.1 * np.cos(np.pi * x), np.zeros(32))
    traj = evolve(pts["sym1b"], f0, steps=0)
    assert len(traj) == 1
    np.testing.assert_array_equal(traj[0].r, f0.r)


def test_evolve_rejects_large_dt(pts):
    g = Grid.make(npts=32, extent=(-1, 1), bc="periodic")
    f0 = LogPolarField(g, 0.0, np.zeros(32), np.zeros(32))
    with pytest.raises(ValueError):
        evolve(pts["sym1b"], f0, steps=1, dt=1.0)


def test_evolve_requires_bc_on_dirichlet(pts):
    g = Grid.make(npts=32, extent=(-1, 1), bc="dirichlet")
    f0 = LogPolarField(g, 0.0, np.zeros(32), np.zeros(32))
    with pytest.raises(ValueError):
        evolve(pts["sym1b"], f0, steps=1)


def test_evolve_blowup_detector(pts):
    g = Grid.make(npts=32, extent=(-1, 1), bc="periodic")
    x = g.coords()[0]
    f0 = LogPolarField(g, 0.0, 0.5 * np.cos(np.pi * x), np.zeros(32))
    with pytest.raises(EvolutionBlowup):
        evolve(pts["sym1b"], f0, steps=5, blowup=0.1)


def test_evolve_matches_closed_form(pts):
    """Order-2 convergence toward the exact packet superposition."""
    p = pts["linear-se"]
    a = float(p.nu1)
    sol = SEPacketSum((se_gaussian(a, b0=-0.2),
                       se_gaussian(a, b0=-0.35, center=(0.7,), k=(1.2,),
                                   amplitude=0.25)))

    def run(npts):
        g = Grid.make(npts=npts, extent=(-4, 4))
        f0 = sample_evaluator(sol, g, 0.0)
        dt0 = 0.2 * min(g.spacings) ** 2
        steps = int(np.ceil(0.05 / dt0))
        traj = evolve(p, f0, steps, dt=0.05 / steps, bc_values=sol.rs)
        fin = traj[-1]
        rex, sex = sol.rs(g.coords(), fin.t)
        return max(np.max(np.abs(fin.r - rex)), np.max(np.abs(fin.s - sex)))

    e1, e2 = run(48), run(96)
    assert 3.0 < e1 / e2 < 5.5


def test_evolve_periodic_plane_wave(pts):
    p = pts["infsub"]
    g = Grid.make(npts=48, extent=(0, 2 * np.pi), bc="periodic")
    pw = plane_wave_solution(p, (2.0,))
    f0 = sample_evaluator(pw, g, 0.0)
    traj = evolve(p, f0, steps=40)
    fin = traj[-1]
    rex, sex = pw.rs(g.coords(), fin.t)
    assert np.max(np.abs(fin.r - rex)) < 1e-8
    assert np.max(np.abs(fin.s - sex)) < 1e-8


# ---------------------------------------------------------------------------
# residuals

def test_residual_constant_trajectory(pts):
    g = Grid.make(npts=32, extent=(-1, 1), bc="periodic")
    fields = [LogPolarField(g, 0.1 * k, np.full(32, 0.3), np.full(32, -0.1))
              for k in range(4)]
    rep = residual(pts["generic"], Trajectory(g, fields))
    assert rep.linf < 1e-14


def test_residual_needs_three_slices(pts):
    g = Grid.make(npts=32, extent=(-1, 1), bc="periodic")
    fields = [LogPolarField(g, 0.1 * k, np.zeros(32), np.zeros(32))
              for k in range(2)]
    with pytest.raises(ValueError):
        residual(pts["generic"], Trajectory(g, fields))


def test_residual_detects_perturbation(pts):
    from dgsym.linearize import heat_pair_to_dg, linearization_data
    p = pts["sym1b"]
    data = linearization_data(p)
    fp = heat_solution(data.diffusion, "forward", amplitude=0.8,
                       focus_time=1.0, offset=0.5)
    fm = heat_solution(data.diffusion, "backward", amplitude=0.6,
                       focus_time=-0.3, offset=0.4)
    sol = heat_pair_to_dg(fp, fm, p)
    g = Grid.make(npts=64, extent=(-4, 4))
    times = np.linspace(0.0, 0.2, 9)
    clean = sample_trajectory(sol, g, times)
    base = residual(p, clean)
    x = g.coords()[0]
    bent = Trajectory(g, [LogPolarField(g, f.t, f.r, f.s + 0.05 * x)
                          for f in clean.fields])
    assert residual(p, bent).l2 > 4 * base.l2


# ---------------------------------------------------------------------------
# closed forms

def test_heat_solution_constant_solves_both():
    for direction in ("forward", "backward"):
        sol = heat_solution(1.0, direction, amplitude=0.0, offset=1.0)
        g = Grid.make(npts=32, extent=(-2, 2))
        assert heat_residual(sol, g, np.linspace(0.0, 0.3, 5)) == 0.0


def test_heat_solution_gaussian_order(pts):
    sol = heat_solution(np.sqrt(2.0), "forward", offset=0.2)
    g1, g2 = Grid.make(npts=64, extent=(-4, 4)), Grid.make(npts=127, extent=(-4, 4))
    r1 = heat_residual(sol, g1, np.linspace(0.0, 0.2, 9))
    r2 = heat_residual(sol, g2, np.linspace(0.0, 0.2, 17))
    assert 3.0 < r1 / r2 < 5.0


def test_heat_solution_positivity_and_validation():
    with pytest.raises(ValueError):
        heat_solution(-1.0, "forward")
    with pytest.raises(ValueError):
        heat_solution(1.0, "sideways")
    sol = heat_solution(1.0, "forward", amplitude=0.5, offset=0.25)
    g = Grid.make(npts=32, extent=(-3, 3))
    for t in np.linspace(0.0, 0.5, 6):
        assert np.all(sol.value(g.coords(), t) > 0)
    with pytest.raises(ValueError):
        sol.value(g.coords(), 2.0)  # beyond the focus time


def test_se_gaussian_validation_and_plane_wave():
    with pytest.raises(ValueError):
        se_gaussian(0.0)
    a, k = -1.0, 2.0
    g = Grid.make(npts=48, extent=(0, 2 * np.pi), bc="periodic")
    x = g.coords()[0]
    times = np.linspace(0.0, 0.1, 5)
    fields = [LogPolarField(g, t, np.zeros_like(x), k * x + a * k * k * t)
              for t in times]
    rep = se_residual(a, Trajectory(g, fields))
    assert rep.linf < 1e-10


def test_se_gaussian_nowhere_zero_and_order(pts):
    p = pts["linear-se"]
    a = float(p.nu1)
    sol = SEPacketSum((se_gaussian(a, b0=-0.2),
                       se_gaussian(a, b0=-0.3, center=(0.6,), amplitude=0.3)))
    g1, g2 = Grid.make(npts=64, extent=(-4, 4)), Grid.make(npts=127, extent=(-4, 4))
    r = sample_evaluator(sol, g1, 0.0).r
    assert np.all(np.isfinite(r))
    r1 = se_residual(a, sample_trajectory(sol, g1, np.linspace(0, 0.1, 9)))
    r2 = se_residual(a, sample_trajectory(sol, g2, np.linspace(0, 0.1, 17)))
    assert 3.0 < r1.l2 / r2.l2 < 5.0


def test_evolve_plane_wave_2d(pts):
    from dgsym.params import reference_points
    p = reference_points(2)["infsub"]
    g = Grid.make(n=2, npts=24, extent=(0, 2 * np.pi), bc="periodic")
    pw = plane_wave_solution(p, (1.0, 2.0))
    f0 = sample_evaluator(pw, g, 0.0)
    traj = evolve(p, f0, steps=20)
    fin = traj[-1]
    rex, sex = pw.rs(g.coords(), fin.t)
    assert np.max(np.abs(fin.r - rex)) < 1e-8
    assert np.max(np.abs(fin.s - sex)) < 1e-8


def test_evolve_diffusive_point_self_consistent():
    """No closed form available: the residual check certifies the run."""
    from dgsym.params import DGParams
    from fractions import Fraction
    p = DGParams(n=1, nu1=1, nu2=Fraction(1, 2))
    g = Grid.make(npts=48, extent=(0, 2 * np.pi), bc="periodic")
    x = g.coords()[0]
    f0 = LogPolarField(g, 0.0, 0.2 * np.cos(x), 0.1 * np.sin(x))
    traj = evolve(p, f0, steps=60, save_every=6)
    rep = residual(p, traj)
    assert rep.l2 < 5e-3
