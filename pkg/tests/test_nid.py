from collections import Counter

import numpy as np
import pytest

from numprimdec.deflation import deflate_ideal
from numprimdec.nid import (
    WitnessSet,
    is_in_component,
    linear_trace_test,
    monodromy_group,
    nid,
    witness_superset,
)
from numprimdec.polycore import parse
from numprimdec.tracker import SlicingPlane, TrackerConfig

CONIC = parse("vars: x1 x2\nx1^2 + x2^2 - 1")
CROSS = parse("vars: x1 x2\nx1*x2")


def signature(ws):
    return Counter((w.dim_downstairs, w.degree) for w in ws)


def test_witness_superset_examples(rng):
    assert len(witness_superset(CROSS, 1, rng=rng).points) == 2
    assert len(witness_superset(CONIC, 1, rng=rng).points) == 2
    empty = parse("vars: x1 x2\n0")
    assert len(witness_superset(empty, 2, rng=rng).points) == 1
    with pytest.raises(ValueError):
        witness_superset(CONIC, 3, rng=rng)


def test_nid_plane_and_line(fixture_system, rng):
    ws = nid(fixture_system("plane_line.sys"), rng=rng)
    assert signature(ws) == Counter({(2, 1): 1, (1, 1): 1})
    line = next(w for w in ws if w.dim_downstairs == 1)
    assert np.allclose(line.points[:, 1:], 0, atol=1e-8)


def test_nid_conic(rng):
    ws = nid(CONIC, rng=rng)
    assert signature(ws) == Counter({(1, 2): 1})
    assert not ws[0].possibly_incomplete


def test_nid_deflated_example(xsq_xyz, rng):
    ws = nid(deflate_ideal(xsq_xyz, 1), rng=rng)
    assert signature(ws) == Counter({(2, 1): 1, (1, 1): 2})
    lines = sorted((w for w in ws if w.dim_downstairs == 1), key=lambda w: abs(w.projections()[0, 1]))
    # one line projects into V(x1, x2) and the other into V(x1, x3)
    assert np.allclose(lines[0].projections()[:, :2], 0, atol=1e-6)
    assert np.allclose(lines[1].projections()[:, [0, 2]], 0, atol=1e-6)


def test_nid_residuals(fixture_system, rng):
    for w in nid(fixture_system("plane_line.sys"), rng=rng):
        assert np.all(w.residuals() < 1e-6)
        assert w.slice.codim == w.dim_upstairs


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
@pytest.mark.parametrize("name", ["plane_line.sys", "xsq_xyz.sys", "x2_xy_y2.sys", "x3sq_parabola.sys"])
def test_nid_stable_across_seeds(fixture_system, name, seed):
    s = fixture_system(name)
    ref = signature(nid(s, rng=np.random.default_rng(100)))
    assert signature(nid(s, rng=np.random.default_rng(seed))) == ref


def _plane_witness(rng):
    s = parse("vars: x1 x2 x3\nx1")
    return nid(s, rng=rng)[0]


def test_is_in_component_examples(xsq_xyz, rng):
    W = _plane_witness(rng)
    assert is_in_component(W.projections()[0], W, rng=rng)
    assert not is_in_component([1, 1, 1], W, rng=rng)
    ws = nid(deflate_ideal(xsq_xyz, 1), rng=rng)
    line12 = next(w for w in ws if w.dim_downstairs == 1 and np.allclose(w.projections()[:, 1], 0, atol=1e-6))
    assert is_in_component([0, 0, 5], line12, rng=rng)
    assert not is_in_component([0, 5, 0], line12, rng=rng)
    with pytest.raises(ValueError):
        is_in_component([np.nan, 0, 0], line12, rng=rng)


@pytest.mark.parametrize("dist", [2e-3, 1e-2, 1.0])
def test_is_in_component_rejects_distant(rng, dist):
    W = _plane_witness(rng)
    y = np.array([dist, 0.3 + 0.2j, -1.1])
    assert not is_in_component(y, W, rng=rng)
    assert is_in_component(y * [0, 1, 1], W, rng=rng)


def test_monodromy_examples(rng):
    sol = witness_superset(CROSS, 1, rng=rng)
    assert sorted(map(len, monodromy_group(sol.points, CROSS, sol.slice, rng=rng, tracking=sol.tracking_system))) == [1, 1]
    sol = witness_superset(CONIC, 1, rng=rng)
    assert sorted(map(len, monodromy_group(sol.points, CONIC, sol.slice, rng=rng, tracking=sol.tracking_system))) == [2]
    line = parse("vars: x1 x2\nx1 - x2")
    sol = witness_superset(line, 1, rng=rng)
    assert monodromy_group(sol.points, line, sol.slice, rng=rng) == [[0]]


def test_monodromy_blocks_stay_inside_components(fixture_system, rng):
    s = fixture_system("plane_line.sys")
    D = deflate_ideal(s, 0)
    sol = witness_superset(D.system, 1, rng=rng)
    for blk in monodromy_group(sol.points, D.system, sol.slice, rng=rng, tracking=sol.tracking_system):
        pts = sol.points[blk]
        on_plane = np.abs(pts[:, 0]) < 1e-8
        on_line = np.all(np.abs(pts[:, 1:]) < 1e-8, axis=1)
        assert on_plane.all() or on_line.all()


def test_trace_test_examples(rng):
    sol = witness_superset(CONIC, 1, rng=rng)
    kw = dict(rng=rng, tracking=sol.tracking_system)
    assert linear_trace_test(sol.points, CONIC, sol.slice, **kw)
    assert not linear_trace_test(sol.points[:1], CONIC, sol.slice, **kw)
    sol = witness_superset(CROSS, 1, rng=rng)
    assert linear_trace_test(sol.points[:1], CROSS, sol.slice, rng=rng, tracking=sol.tracking_system)


def test_degree_additivity(rng):
    s = parse("vars: x1 x2 x3\nx1*x2*x3")
    ws = nid(s, rng=rng)
    assert signature(ws) == Counter({(2, 1): 3})
    assert len(witness_superset(s, 2, rng=rng).points) == sum(w.degree for w in ws)


def test_witness_set_metadata(rng):
    W = _plane_witness(rng)
    assert isinstance(W, WitnessSet) and W.order == 0
    assert W.ambient_dim == 3 and W.degree == 1
    assert W.tracking(rng) is not None
    assert isinstance(W.slice, SlicingPlane)


def test_inconsistent_system_is_empty(rng):
    assert nid(parse("vars: x\n1"), TrackerConfig(), rng) == []
