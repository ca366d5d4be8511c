import math

from hypothesis import given, strategies as st
import numpy as np
import pytest

from dqdcavity.electrostatics import (BACKENDS, OUTER_BOUNDARY, SPLIT_GATE_DOTS, Electrode,
                                      GateLayout, LayoutError, SolverError,
                                      coupling_from_beta, differential_lever_arm,
                                      lever_arm_slice, parallel_plate, solve_lever_arm,
                                      solve_potential, split_gate, square_box)
from dqdcavity.electrostatics.kernels import get_backend
from dqdcavity.electrostatics.solver import error_bound_factor, optimal_omega
from dqdcavity.io import read_csv

BACKEND_NAMES = sorted(BACKENDS)


@pytest.fixture(scope="module")
def coarse():
    return split_gate(spacing=10)


@pytest.fixture(scope="module")
def coarse_maps(coarse):
    return {e.name: solve_potential(coarse, e.name) for e in coarse.electrodes}


# -- layout -------------------------------------------------------------------

def test_split_gate_validates_and_has_expected_grid(coarse):
    assert coarse.shape == (41, 41, 13)
    assert coarse.plane_index == 4
    assert {e.name for e in coarse.electrodes} >= {"P1", "P2", "CP", "B2"}


def test_layout_json_round_trip(tmp_path, coarse):
    p = tmp_path / "layout.json"
    p.write_text(__import__("json").dumps(coarse.to_dict()))
    again = GateLayout.from_json(p)
    assert again.to_dict() == coarse.to_dict()


def test_refined_layout_halves_spacing(coarse):
    fine = coarse.refined()
    assert fine.spacing == 5
    assert fine.shape == (81, 81, 25)


@pytest.mark.parametrize("kwargs, match", [
    (dict(electrodes=[Electrode("a", (0, 0, 10, 10, 10, 10)),
                      Electrode("a", (20, 20, 10, 30, 30, 10))]), "unique|duplicate"),
    (dict(electrodes=[Electrode("a", (0, 0, 10, 20, 20, 10)),
                      Electrode("b", (10, 10, 10, 30, 30, 10))]), "overlap"),
    (dict(electrodes=[Electrode("a", (12, 12, 10, 18, 18, 10))]), "covers no"),
    (dict(electrodes=[Electrode("a", (0, 0, 10, 100, 10, 10))]), "domain|outside"),
    (dict(well_depth=15.0), "plane|well"),
    (dict(well_depth=40.0), "plane|well|inside"),
])
def test_invalid_layouts_are_rejected(kwargs, match):
    base = dict(domain=(40, 40, 40), spacing=10, well_depth=20.0, electrodes=[])
    base.update(kwargs)
    with pytest.raises(LayoutError, match=match):
        GateLayout(**base)


def test_unknown_gate_and_bad_role_raise():
    with pytest.raises(LayoutError):
        Electrode("x", (0, 0, 0, 1, 1, 1), role="floating")
    with pytest.raises(LayoutError):
        parallel_plate(d=10).electrode("nope")


# -- reference problems -------------------------------------------------------

@pytest.mark.parametrize("backend", BACKEND_NAMES)
def test_parallel_plate_is_linear(backend):
    lay = parallel_plate(d=100, spacing=2)
    g = solve_potential(lay, "hot", tol=1e-8, backend=backend)
    z = np.arange(lay.shape[2]) * lay.spacing
    np.testing.assert_allclose(g.values[0, 0, :], 1 - z / 100, atol=1e-8)
    lm = solve_lever_arm(lay, "hot", backend=backend)
    assert lm.alpha[0, 0] == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("backend", BACKEND_NAMES)
def test_square_box_centre_quarter(backend):
    lm = solve_lever_arm(square_box(L=100, spacing=2), "hot", tol=1e-7, backend=backend)
    assert lm.at((50, 50)) == pytest.approx(0.25, abs=1e-3)


def test_square_box_walls_sum_to_one():
    """By symmetry the four walls contribute equally; hot wall + boundary = 1."""
    lay = square_box(L=60, spacing=2)
    hot = solve_potential(lay, "hot", tol=1e-9).values
    rest = solve_potential(lay, OUTER_BOUNDARY, tol=1e-9).values
    interior = ~solve_potential(lay, "hot", tol=1e-9).fixed
    np.testing.assert_allclose((hot + rest)[interior], 1.0, atol=1e-8)


def test_backends_agree_bitwise(coarse):
    if "compiled" not in BACKENDS:
        pytest.skip("compiled kernel not built")
    a = solve_potential(coarse, "CP", backend="compiled")
    b = solve_potential(coarse, "CP", backend="python")
    assert a.iterations == b.iterations
    np.testing.assert_array_equal(a.values, b.values)


def test_backend_selection():
    assert get_backend("python").__name__.endswith("_sor_py")
    with pytest.raises(ValueError):
        get_backend("fortran")


# -- invariants ---------------------------------------------------------------

def test_maximum_principle_on_split_gate(coarse_maps):
    for name, g in coarse_maps.items():
        assert g.values.min() >= -g.residual, name
        assert g.values.max() <= 1 + g.residual, name


def test_superposition_sums_to_one(coarse, coarse_maps):
    total = sum(g.values for g in coarse_maps.values())
    total = total + solve_potential(coarse, OUTER_BOUNDARY).values
    assert np.abs(total - 1).max() <= 10 * 1e-6


def test_residual_history_non_increasing(coarse_maps):
    for g in coarse_maps.values():
        h = np.array(g.history)
        assert np.all(np.diff(h) <= 1e-15)


def test_residual_bounds_true_error():
    lay = split_gate(spacing=20)
    loose = solve_potential(lay, "P1", tol=1e-3)
    tight = solve_potential(lay, "P1", tol=1e-11)
    assert np.abs(loose.values - tight.values).max() <= loose.residual + tight.residual


def test_mirror_symmetric_gates_give_mirrored_maps():
    lay = GateLayout((100, 60, 60), 5, 20.0, [
        Electrode("L", (20, 20, 40, 35, 40, 45)),
        Electrode("R", (65, 20, 40, 80, 40, 45)),
    ])
    a = solve_lever_arm(lay, "L", tol=1e-9).alpha
    b = solve_lever_arm(lay, "R", tol=1e-9).alpha
    np.testing.assert_allclose(a, b[::-1, :], atol=1e-8)


@st.composite
def random_2d_layouts(draw):
    n = 12
    boxes = []
    taken = np.zeros((n + 1, n + 1), bool)
    for k in range(draw(st.integers(1, 3))):
        x0 = draw(st.integers(1, n - 2))
        y0 = draw(st.integers(1, n - 2))
        x1 = draw(st.integers(x0, min(x0 + 3, n - 1)))
        y1 = draw(st.integers(y0, min(y0 + 3, n - 1)))
        # keep one node of clearance so boxes never touch
        if taken[x0 - 1:x1 + 2, y0 - 1:y1 + 2].any():
            continue
        taken[x0:x1 + 1, y0:y1 + 1] = True
        boxes.append(Electrode(f"g{k}", (x0, y0, 0, x1, y1, 0)))
    if not boxes:
        boxes.append(Electrode("g0", (5, 5, 0, 6, 6, 0)))
    return GateLayout((n, n, 0), 1, 0.0, boxes)


@given(random_2d_layouts())
def test_random_layouts_obey_max_principle_and_superposition(lay):
    grids = [solve_potential(lay, e.name, tol=1e-9) for e in lay.electrodes]
    grids.append(solve_potential(lay, OUTER_BOUNDARY, tol=1e-9))
    for g in grids:
        assert g.values.min() >= -1e-9 and g.values.max() <= 1 + 1e-9
    total = sum(g.values for g in grids)
    assert np.abs(total - 1).max() <= 10 * 1e-9


def test_omega_and_bound_factor():
    assert optimal_omega((1, 1, 101)) == pytest.approx(
        2 / (1 + math.sin(math.pi / 100)), rel=1e-12)
    assert 1 < optimal_omega((41, 41, 13)) < 2
    assert error_bound_factor((1, 1, 101)) == pytest.approx(100 ** 2 / 4)


def test_solver_errors():
    lay = split_gate(spacing=20)
    with pytest.raises(SolverError) as info:
        solve_potential(lay, "P1", tol=1e-12, max_iter=5)
    assert info.value.iterations == 5 and info.value.residual > 1e-12
    with pytest.raises(ValueError):
        solve_potential(lay, "P1", tol=0)
    with pytest.raises(LayoutError):
        solve_potential(lay, "P9")


# -- lever-arm maps -----------------------------------------------------------

def test_lever_arm_map_interpolation_and_bounds(coarse):
    lm = solve_lever_arm(coarse, "P1")
    i, j = 16, 20
    assert lm.at((lm.x[i], lm.y[j])) == pytest.approx(lm.alpha[i, j], abs=1e-15)
    mid = lm.at((lm.x[i] + 5, lm.y[j]))
    assert mid == pytest.approx(0.5 * (lm.alpha[i, j] + lm.alpha[i + 1, j]))
    with pytest.raises(ValueError):
        lm.at((-1.0, 200.0))
    with pytest.raises(ValueError):
        lm.alpha[0, 0] = 1.0


def test_plunger_lever_arms_favour_their_own_dot(coarse):
    d1, d2 = SPLIT_GATE_DOTS["dot1"], SPLIT_GATE_DOTS["dot2"]
    p1 = solve_lever_arm(coarse, "P1")
    cp = solve_lever_arm(coarse, "CP")
    assert p1.at(d1) > p1.at(d2)
    assert differential_lever_arm(cp, d2, d1) > 0


def test_no_strict_interior_extremum(coarse_maps):
    g = coarse_maps["CP"]
    v = g.values
    inner = (slice(1, -1),) * 3
    nbrs = []
    for a in range(3):
        for d in (-1, 1):
            nbrs.append(np.roll(v, d, axis=a)[inner])
    nbrs = np.stack(nbrs)
    free = ~g.fixed[inner]
    assert np.all(v[inner][free] <= nbrs.max(axis=0)[free] + g.residual)
    assert np.all(v[inner][free] >= nbrs.min(axis=0)[free] - g.residual)


def test_refinement_deltas_shrink():
    d1, d2 = SPLIT_GATE_DOTS["dot1"], SPLIT_GATE_DOTS["dot2"]
    vals = []
    for h in (20, 10, 5):
        lm = solve_lever_arm(split_gate(spacing=h), "CP", tol=1e-8)
        vals.append(np.array([lm.at(d1), lm.at(d2)]))
    assert np.all(np.abs(vals[2] - vals[1]) <= np.abs(vals[1] - vals[0]))


def test_beta_identity_antisymmetry_and_mirror_zero(coarse):
    lm = solve_lever_arm(coarse, "CP")
    r1, r2 = (170.0, 195.0), (235.0, 207.0)
    assert differential_lever_arm(lm, r1, r1) == 0.0
    assert differential_lever_arm(lm, r1, r2) == -differential_lever_arm(lm, r2, r1)
    sym = GateLayout((100, 60, 60), 5, 20.0, [Electrode("C", (40, 20, 40, 60, 40, 45))])
    m = solve_lever_arm(sym, "C", tol=1e-10)
    assert abs(differential_lever_arm(m, (30, 30), (70, 30))) < 1e-10
    with pytest.raises(ValueError):
        differential_lever_arm(m, (30, 30), (130, 30))


def test_slice_inside_enclosing_electrode_is_one():
    # the well plane sits inside a thick hot electrode filling the lateral extent
    lay = GateLayout((40, 40, 60), 5, 30.0, [Electrode("hot", (0, 0, 20, 40, 40, 40))])
    lm = solve_lever_arm(lay, "hot")
    _, a = lever_arm_slice(lm, (0, 0), (40, 40), 9)
    np.testing.assert_array_equal(a, 1.0)


def test_capacitor_slice_is_linear_ramp():
    # 1D along x: hot face at x = 0, grounded outer face at x = 100
    lay = GateLayout((100, 0, 0), 2, 0.0, [Electrode("hot", (0, 0, 0, 0, 0, 0))])
    lm = solve_lever_arm(lay, "hot", tol=1e-9)
    dist, a = lever_arm_slice(lm, (0, 0), (100, 0), 26)
    np.testing.assert_allclose(a, 1 - dist / 100, atol=1e-9)


def test_cp_profile_decreases_away_from_gate_edge(coarse):
    lm = solve_lever_arm(coarse, "CP")
    # from the CP edge (y = 230) out across the channel, at x = 300
    _, a = lever_arm_slice(lm, (300, 230), (300, 120), 12)
    assert np.all(np.diff(a) < 0)


def test_slice_and_csv(tmp_path, coarse):
    lm = solve_lever_arm(coarse, "P2")
    dist, alpha = lever_arm_slice(lm, (100, 200), (300, 200), 21)
    assert dist[0] == 0 and dist[-1] == pytest.approx(200)
    assert alpha.argmax() in range(12, 16)
    with pytest.raises(ValueError):
        lever_arm_slice(lm, (100, 200), (300, 200), 1)
    lm.to_csv(tmp_path / "a.csv")
    cols = read_csv(tmp_path / "a.csv")
    assert list(cols) == ["x_nm", "y_nm", "alpha"]
    np.testing.assert_array_equal(cols["alpha"], lm.alpha.ravel())


# -- coupling -----------------------------------------------------------------

@given(st.floats(0, 1), st.floats(0, 1), st.floats(1e9, 2e10), st.floats(10, 1000))
def test_coupling_linear_in_beta_and_sqrt_in_z0(b1, b2, f_c, z0):
    g = coupling_from_beta
    assert g(b1 + b2, f_c, z0) == pytest.approx(g(b1, f_c, z0) + g(b2, f_c, z0), rel=1e-12,
                                                abs=1e-6)
    assert g(b1, f_c, 4 * z0) == pytest.approx(2 * g(b1, f_c, z0), rel=1e-12, abs=1e-6)
    assert g(b1, 2 * f_c, z0) == pytest.approx(2 * g(b1, f_c, z0), rel=1e-12, abs=1e-6)


def test_coupling_rejects_nonphysical_inputs():
    with pytest.raises(ValueError):
        coupling_from_beta(0.1, -1.0, 50)
    with pytest.raises(ValueError):
        coupling_from_beta(0.1, 1e9, 0)
