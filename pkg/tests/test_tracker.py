import numpy as np
import pytest

from numprimdec.deflation import deflate_ideal
from numprimdec.nid import WitnessSet, monodromy_group
from numprimdec.polycore import DimensionError, parse
from numprimdec.tracker import (
    Homotopy,
    PolyBlock,
    SlicingPlane,
    TrackerConfig,
    TrackingError,
    dedup,
    match_points,
    move_witness,
    newton_refine,
    slice_and_solve,
    solve_total_degree,
    track_path,
)


def homotopy(start_text, target_text, gamma=0.6 + 0.8j):
    return Homotopy(PolyBlock(parse(start_text)), PolyBlock(parse(target_text)), gamma)


def sorted_points(points):
    return sorted((np.asarray(p) for p in points), key=lambda p: tuple(np.round(p.real, 6)) + tuple(np.round(p.imag, 6)))


def test_track_path_quadratic():
    p = track_path(homotopy("vars: x\nx^2 - 1", "vars: x\nx^2 - 4"), [1], TrackerConfig())
    assert abs(p.coords[0] ** 2 - 4) < 1e-8


def test_track_path_identity():
    p = track_path(homotopy("vars: x y\nx^2 - 1\ny - x", "vars: x y\nx^2 - 1\ny - x", gamma=1.0), [1, 1], TrackerConfig())
    assert np.allclose(p.coords, [1, 1], atol=1e-12)


def test_track_path_linear():
    p = track_path(homotopy("vars: x\nx - 1", "vars: x\nx - (3+4*i)"), [1], TrackerConfig())
    assert abs(p.coords[0] - (3 + 4j)) < 1e-10


def test_track_path_failure_raises():
    # the target has no finite root, so the path diverges
    hom = homotopy("vars: x\nx - 1", "vars: x\n0*x + 1 + 0*x")
    with pytest.raises((TrackingError, ValueError)):
        track_path(hom, [1], TrackerConfig(max_steps=200))


def test_homotopy_shape_mismatch():
    with pytest.raises(DimensionError):
        homotopy("vars: x\nx - 1", "vars: x y\nx - 1\ny")


def test_solve_univariate():
    pts = sorted_points(solve_total_degree(parse("vars: x\nx^2 - 1")))
    assert np.allclose([p[0] for p in pts], [-1, 1], atol=1e-10)


def test_solve_cubic_line(fixture_system):
    pts = solve_total_degree(fixture_system("cubic_line.sys"), rng=np.random.default_rng(3))
    assert sorted(round(p.coords[0].real, 8) for p in pts) == [1, 2, 3]
    for p in pts:
        assert p.residual < 1e-10


def test_solve_complex_roots():
    pts = sorted_points(solve_total_degree(parse("vars: x1 x2\nx1^2 + 1\nx2 - x1")))
    assert np.allclose(pts, [[-1j, -1j], [1j, 1j]], atol=1e-10)


def test_solve_rejects_non_square():
    with pytest.raises(DimensionError):
        solve_total_degree(parse("vars: x y\nx - 1"))


def test_slice_hyperplane_by_line(rng):
    s = parse("vars: x1 x2\nx1")
    sol = slice_and_solve(s, SlicingPlane.random(1, 2, rng), rng=rng)
    assert len(sol.points) == 1 and sol.residuals[0] < 1e-10


def test_slice_circle_by_line(rng):
    s = parse("vars: x1 x2\nx1^2 + x2^2 - 1")
    assert len(slice_and_solve(s, SlicingPlane.random(1, 2, rng), rng=rng).points) == 2


def witness_example_plane(rng):
    """The 5 slicing equations ``x2 = -3x1 + 2``, ``a3 = x1 - 3``, ``a_i = c_i x1 + d_i``."""
    A = np.zeros((5, 7), dtype=complex)
    b = np.zeros(5, dtype=complex)
    A[0, :2] = [3, 1]
    b[0] = 2
    A[1, 0], A[1, 6], b[1] = -1, 1, -3
    c = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    dd = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    for i in range(3):
        A[2 + i, 0], A[2 + i, 3 + i], b[2 + i] = -c[i], 1, dd[i]
    return SlicingPlane(A, b)


def test_slice_witness_example(x3sq_parabola, rng):
    D = deflate_ideal(x3sq_parabola, 1)
    sol = slice_and_solve(D.system, witness_example_plane(rng), rng=rng)
    proj = sorted_points(D.project(p) for p in sol.points)
    assert np.allclose(proj, [[1, -1, 0], [2, -4, 0], [3, -7, 0]], atol=1e-6)
    groups = monodromy_group(sol.points, D.system, sol.slice, cfg=TrackerConfig(), rng=rng, tracking=sol.tracking_system)
    assert sorted(len(g) for g in groups) == [1, 2]


def circle_witness(rng):
    s = parse("vars: x1 x2\nx1^2 + x2^2 - 1")
    sol = slice_and_solve(s, SlicingPlane.random(1, 2, rng), rng=rng)
    return WitnessSet(0, s, sol.slice, sol.points, 1, 1, 2, tracking_system=sol.tracking_system)


def test_move_witness_identity(rng):
    W = circle_witness(rng)
    V = move_witness(W, W.slice, rng=rng)
    assert np.all(match_points(W.points, V.points, 1e-10) >= 0)


def test_move_witness_round_trip(rng):
    W = circle_witness(rng)
    L2 = SlicingPlane.random(1, 2, rng)
    V = move_witness(W, L2, rng=rng)
    assert len(V.points) == 2 and np.all(L2.residual(V.points) < 1e-10)
    back = move_witness(V, W.slice, rng=rng)
    m = match_points(back.points, W.points, 1e-6)
    assert sorted(m) == [0, 1]


def test_move_witness_preserves_degree(x3sq_parabola, rng):
    D = deflate_ideal(x3sq_parabola, 1)
    sol = slice_and_solve(D.system, witness_example_plane(rng), rng=rng)
    W = WitnessSet(1, D.system, sol.slice, sol.points, 5, 1, 3, tracking_system=sol.tracking_system)
    V = move_witness(W, SlicingPlane.random(5, 7, rng), rng=rng)
    assert len(V.points) == 3


def test_move_witness_shape_check(rng):
    W = circle_witness(rng)
    with pytest.raises(DimensionError):
        move_witness(W, SlicingPlane.random(2, 2, rng), rng=rng)


def test_newton_refine_examples():
    s = parse("vars: x\nx^2 - 1")
    p, ok = newton_refine(s, [1.01])
    assert ok and abs(p.coords[0] - 1) < 1e-12
    p, ok = newton_refine(s, [1.0])
    assert ok and p.coords[0] == 1
    p, ok = newton_refine(parse("vars: x\nx^2 - 1\nx^3 - 1"), [1.1])
    assert ok and abs(p.coords[0] - 1) < 1e-12


def test_dedup_relative():
    X = np.array([[1.0], [1.0 + 1e-9], [2.0], [1e6], [1e6 + 0.5]], dtype=complex)
    assert list(dedup(X)) == [0, 2, 3]


def test_config_validation():
    with pytest.raises(ValueError):
        TrackerConfig(endpoint_tol=0)
    with pytest.raises(ValueError):
        TrackerConfig(min_step=1.0)


def test_deterministic_and_thread_independent():
    sq = parse("vars: x y z\nx^2 + y^2 + z^2 - 3\nx*y*z - 1\nx - y + 2*z - 2")
    a = solve_total_degree(sq, TrackerConfig(seed=5))
    b = solve_total_degree(sq, TrackerConfig(seed=5))
    c = solve_total_degree(sq, TrackerConfig(seed=5, threads=3))
    assert [p.coords.tobytes() for p in a] == [p.coords.tobytes() for p in b]
    assert len(a) == len(c) and np.all(match_points(np.array([p.coords for p in a]), np.array([p.coords for p in c]), 1e-9) >= 0)
