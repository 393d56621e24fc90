"""Numerical irreducible decomposition by a top-down dimension sweep.

Each dimension level is sliced independently (no cascade).  Candidate
points that lie on a previously found higher-dimensional component are
removed with a homotopy membership test; the survivors are grouped into
irreducible pieces by monodromy loops and certified by the linear trace
test.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from math import comb

import numpy as np

from .deflation import DeflatedSystem
from .dualspace import corank
from .deflation import deflation_matrix_at
from .polycore import PolySystem, random_complex, random_unit_complex
from .tracker import (
    OK,
    AffineBlock,
    SlicingPlane,
    TrackerConfig,
    TrackingError,
    _inf_norm,
    full_block,
    match_points,
    move_points,
    slice_and_solve,
    squared_system,
)

log = logging.getLogger(__name__)

DEFAULT_LOOPS = 8
RANK_TOL = 1e-8
# Junk points on non-reduced components are only accurate to about 1e-5
# (the residual is flat there), so the sweep filters with a looser match.
FILTER_TOL = 1e-3


@dataclass
class WitnessSet:
    """Witness data ``(order, slice, points)`` for one irreducible component.

    ``system`` is the full (unsquared) system in the ambient space of the
    points; projections keep the first ``n_base`` coordinates.
    """

    order: int
    system: PolySystem
    slice: SlicingPlane
    points: np.ndarray
    dim_upstairs: int
    dim_downstairs: int
    n_base: int
    possibly_pseudo: bool = False
    possibly_incomplete: bool = False
    tracking_system: PolySystem | None = field(default=None, repr=False)

    @property
    def degree(self) -> int:
        return len(self.points)

    @property
    def ambient_dim(self) -> int:
        return self.system.n

    def projections(self) -> np.ndarray:
        return self.points[:, : self.n_base]

    def tracking(self, rng=None) -> PolySystem | None:
        """Squared-up system used to move the slice (built lazily)."""
        codim = self.ambient_dim - self.dim_upstairs
        if self.tracking_system is None and codim > 0:
            rng = rng if rng is not None else np.random.default_rng(0)
            self.tracking_system = squared_system(self.system.nonzero(), codim, rng)
        return self.tracking_system

    def residuals(self) -> np.ndarray:
        blk = full_block(self.system, self.slice.block())
        F, _ = blk(self.points, np.arange(len(self.points)))
        return _inf_norm(F)


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------


def witness_superset(system: PolySystem, dim: int, cfg: TrackerConfig | None = None, rng=None):
    """Slice by a random plane of codimension ``dim`` and solve.

    Returns a :class:`SliceSolution`; its points lie on components of
    dimension at least ``dim``.
    """
    cfg = cfg or TrackerConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    m = system.n
    if not 0 <= dim <= m:
        raise ValueError(f"dimension {dim} outside 0..{m}")
    L = SlicingPlane.random(dim, m, rng)
    return slice_and_solve(system, L, cfg, rng)


def _containment_slices(ys: np.ndarray, W: WitnessSet, e: int, rng):
    """Per-query target slices whose projection passes through each ``y``.

    The first ``e`` equations involve only the projected coordinates and pass
    through ``y``; the remaining ``k - e`` equations are random.
    """
    k, m = W.dim_upstairs, W.ambient_dim
    q, nproj = ys.shape
    A = np.zeros((q, k, m), dtype=complex)
    b = np.zeros((q, k), dtype=complex)
    R = random_complex(rng, (q, e, nproj))
    A[:, :e, :nproj] = R
    b[:, :e] = np.einsum("qen,qn->qe", R, ys)
    if k > e:
        A[:, e:, :] = random_complex(rng, (q, k - e, m))
        b[:, e:] = random_complex(rng, (q, k - e))
    return A, b


def contains(
    ys, W: WitnessSet, cfg: TrackerConfig | None = None, rng=None, tol: float = 1e-6, retries: int = 2
) -> np.ndarray:
    """Vectorized membership test for many query points at once.

    ``ys`` has ``n_base`` columns (projected test) or ``ambient_dim`` columns
    (test in the ambient space of ``W``).  Returns a boolean array.  Queries
    without a match whose paths did not all succeed are retried up to
    ``retries`` times.
    """
    cfg = cfg or TrackerConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    ys = np.atleast_2d(np.asarray(ys, dtype=complex))
    q, nproj = ys.shape
    if nproj == W.ambient_dim:
        e = W.dim_upstairs
    elif nproj == W.n_base:
        e = W.dim_downstairs
    else:
        raise ValueError(f"query points have {nproj} coordinates; expected {W.n_base} or {W.ambient_dim}")
    if q == 0:
        return np.zeros(0, dtype=bool)
    if W.dim_upstairs == 0:
        # a point component: direct comparison
        return np.array([match_points(y[None], W.points[:, :nproj], tol)[0] >= 0 for y in ys])
    inside = np.zeros(q, dtype=bool)
    todo = np.arange(q)
    for _ in range(retries + 1):
        hit, failed = _contains_once(ys[todo], W, e, cfg, rng, tol)
        inside[todo[hit]] = True
        # an undecided query (no hit, some path lost) is retried with new slices and gamma
        todo = todo[~hit & failed]
        if todo.size == 0:
            break
    return inside


def _contains_once(ys, W: WitnessSet, e: int, cfg, rng, tol):
    q, nproj = ys.shape
    deg = W.degree
    A, b = _containment_slices(ys, W, e, rng)
    A = np.repeat(A, deg, axis=0)
    b = np.repeat(b, deg, axis=0)
    starts = np.tile(W.points, (q, 1))
    res = move_points(starts, W.tracking(rng), W.slice, AffineBlock(A, b), cfg, rng)
    ends = res.points[:, :nproj].reshape(q, deg, nproj)
    ok = (res.status == OK).reshape(q, deg)
    dist = _inf_norm(ends - ys[:, None, :])
    hit = ok & (dist <= tol * (1.0 + _inf_norm(ys))[:, None])
    return hit.any(axis=1), ~ok.all(axis=1)


def is_in_component(y, W: WitnessSet, cfg: TrackerConfig | None = None, rng=None, tol: float = 1e-6) -> bool:
    """Whether ``y`` lies on the component (or its projection) represented by ``W``."""
    y = np.asarray(y, dtype=complex)
    if not np.all(np.isfinite(y)):
        raise ValueError("query point must be finite")
    return bool(contains(y[None, :], W, cfg, rng, tol)[0])


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)

    def blocks(self):
        groups: dict[int, list[int]] = {}
        for i in range(len(self.parent)):
            groups.setdefault(self.find(i), []).append(i)
        return sorted(groups.values())


def _loop_permutation(points, tracking, L: SlicingPlane, cfg, rng, tol=1e-6):
    """Images of ``points`` under one random loop ``L -> L'' -> L`` (-1 on failure)."""
    mid = SlicingPlane.random(L.codim, L.ambient_dim, rng)
    r1 = move_points(points, tracking, L, mid.block(), cfg, rng)
    perm = np.full(len(points), -1)
    ok1 = np.nonzero(r1.status == OK)[0]
    if ok1.size == 0:
        return perm
    r2 = move_points(r1.points[ok1], tracking, mid, L.block(), cfg, rng)
    ok2 = r2.status == OK
    perm[ok1[ok2]] = match_points(r2.points[ok2], points, tol)
    return perm


def monodromy_group(points, system, L: SlicingPlane, loops: int = DEFAULT_LOOPS, cfg=None, rng=None, tracking=None):
    """Partition of ``points`` induced by ``loops`` random monodromy loops.

    ``system`` is the full system; ``tracking`` (its square-up) is built when
    not supplied.  Returns a list of index lists.
    """
    cfg = cfg or TrackerConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    points = np.atleast_2d(np.asarray(points, dtype=complex))
    if tracking is None:
        tracking = squared_system(system.nonzero(), system.n - L.codim, rng)
    uf = _UnionFind(len(points))
    for _ in range(loops):
        perm = _loop_permutation(points, tracking, L, cfg, rng)
        for i, j in enumerate(perm):
            if j >= 0:
                uf.union(i, int(j))
    return uf.blocks()


def _traces(points, tracking, L: SlicingPlane, cfg, rng):
    """Points moved to two parallel translates of ``L``.

    Returns ``(shifts, moved, ok)`` where ``moved[s]`` are the endpoints for
    the ``s``-th translate.
    """
    k = L.codim
    direction = random_complex(rng, k)
    shifts = [0.2 * complex(random_unit_complex(rng)), -0.3 * complex(random_unit_complex(rng))]
    moved, oks = [], []
    for s in shifts:
        res = move_points(points, tracking, L, L.translated(s * direction).block(), cfg, rng)
        moved.append(res.points)
        oks.append(res.status == OK)
    return shifts, moved, np.logical_and.reduce(oks)


def _trace_ok(block, points, shifts, moved, ok, tol=1e-6) -> bool:
    if not np.all(ok[block]):
        return False
    s0 = points[block].sum(axis=0)
    s1 = moved[0][block].sum(axis=0)
    s2 = moved[1][block].sum(axis=0)
    slope1 = (s1 - s0) / shifts[0]
    slope2 = (s2 - s0) / shifts[1]
    scale = 1.0 + max(np.max(np.abs(s0)), np.max(np.abs(slope1)))
    return bool(np.max(np.abs(slope1 - slope2)) <= tol * scale)


def linear_trace_test(block, system, L: SlicingPlane, cfg=None, rng=None, tracking=None) -> bool:
    """True when the centroid of ``block`` moves affinely under parallel slice translation."""
    cfg = cfg or TrackerConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    pts = np.atleast_2d(np.asarray(block, dtype=complex))
    if tracking is None:
        tracking = squared_system(system.nonzero(), system.n - L.codim, rng)
    shifts, moved, ok = _traces(pts, tracking, L, cfg, rng)
    return _trace_ok(np.arange(len(pts)), pts, shifts, moved, ok)


def decompose_fiber(points, tracking, L, loops, cfg, rng):
    """Monodromy grouping validated by the trace test.

    Returns ``(blocks, complete_flags)``.  Loops stop early once every block
    passes the trace test.
    """
    n = len(points)
    if n == 0:
        return [], []
    shifts, moved, ok = _traces(points, tracking, L, cfg, rng)
    uf = _UnionFind(n)
    blocks = uf.blocks()
    complete = [_trace_ok(b, points, shifts, moved, ok) for b in blocks]
    for _ in range(loops):
        if all(complete):
            break
        perm = _loop_permutation(points, tracking, L, cfg, rng)
        for i, j in enumerate(perm):
            if j >= 0:
                uf.union(i, int(j))
        blocks = uf.blocks()
        complete = [_trace_ok(b, points, shifts, moved, ok) for b in blocks]
    return blocks, complete


def downstairs_dim(system: PolySystem, point, k: int, n_base: int, deflated: DeflatedSystem | None = None) -> int:
    """Dimension of the projection of the component through ``point``.

    Uses the projection of the Jacobian kernel when that kernel has the
    component's dimension ``k``.  Otherwise (non-reduced component) falls
    back to ``k - corank A^(d)(y)``, the fiber dimension of the bundle.
    """
    if n_base == system.n:
        return k
    point = np.asarray(point, dtype=complex)
    gens = system.nonzero()
    if len(gens):
        from .tracker import PolyBlock

        _, J = PolyBlock(gens)(point[None], np.zeros(1, dtype=int))
        J = J[0]
        _, s, vh = np.linalg.svd(J, full_matrices=True)
        rank = int(np.sum(s >= RANK_TOL * max(s[0] if s.size else 0, 1.0)))
        K = vh[rank:].conj().T
    else:
        K = np.eye(system.n, dtype=complex)
    if K.shape[1] == k:
        P = K[:n_base, :]
        if P.size == 0:
            return 0
        sp = np.linalg.svd(P, compute_uv=False)
        return int(np.sum(sp > RANK_TOL))
    if deflated is not None and deflated.order > 0:
        y = point[:n_base]
        fiber = corank(deflation_matrix_at(deflated.base, deflated.order, y), RANK_TOL)
        return max(k - fiber, 0)
    log.warning("could not determine projected dimension reliably; using upstairs dimension")
    return min(k, n_base)


# ---------------------------------------------------------------------------
# the sweep
# ---------------------------------------------------------------------------


def nid(
    system: PolySystem | DeflatedSystem,
    cfg: TrackerConfig | None = None,
    rng=None,
    loops: int = DEFAULT_LOOPS,
    min_dim: int | None = None,
    max_dim: int | None = None,
) -> list[WitnessSet]:
    """Witness sets for the isolated components of ``V(system)``.

    ``min_dim``/``max_dim`` restrict the sweep to a range of upstairs
    dimensions known to contain every component.
    """
    cfg = cfg or TrackerConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    deflated = system if isinstance(system, DeflatedSystem) else None
    full = deflated.system if deflated is not None else system
    order = deflated.order if deflated is not None else 0
    n_base = deflated.n if deflated is not None else full.n
    m = full.n
    gens = full.nonzero()
    if any(g.degree == 0 for g in gens):
        return []
    if len(gens) == 0:
        L = SlicingPlane.random(m, m, rng)
        pt = np.linalg.solve(L.matrix, L.offset)[None, :]
        return [WitnessSet(order, full, L, pt, m, n_base if n_base < m else m, n_base)]
    top = m - 1
    bottom = max(0, m - len(gens))
    if max_dim is not None:
        top = min(top, max_dim)
    if min_dim is not None:
        bottom = max(bottom, min_dim)
    found: list[WitnessSet] = []
    for k in range(top, bottom - 1, -1):
        sol = witness_superset(full, k, cfg, rng)
        pts = sol.points
        log.info("dim %d: %d candidate points", k, len(pts))
        for W in found:
            if len(pts) == 0:
                break
            inside = contains(pts, W, cfg, rng, FILTER_TOL)
            pts = pts[~inside]
        if len(pts) == 0:
            continue
        blocks, complete = decompose_fiber(pts, sol.tracking_system, sol.slice, loops, cfg, rng)
        for blk, good in zip(blocks, complete):
            wpts = pts[blk]
            e = downstairs_dim(full, wpts[0], k, n_base, deflated)
            found.append(
                WitnessSet(
                    order=order,
                    system=full,
                    slice=sol.slice,
                    points=wpts,
                    dim_upstairs=k,
                    dim_downstairs=e,
                    n_base=n_base,
                    possibly_incomplete=not good,
                    tracking_system=sol.tracking_system,
                )
            )
        log.info("dim %d: %d components", k, len(blocks))
    return found
