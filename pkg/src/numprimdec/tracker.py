"""Homotopy continuation.

Paths are tracked in batches: every array carries a leading batch axis and
each path keeps its own ``t`` and step size, so one numpy call advances all
active paths.  The homotopy is always ``H(x, t) = (1 - t) * gamma * S(x) +
t * T(x)`` with square start/target systems ``S`` and ``T``.

Predictor: classical RK4 on ``dx/dt = -H_x^{-1} H_t``.  Corrector: at most
``max_corrector_iters`` Newton steps.  The step doubles after five
consecutive successes and halves on failure.  There is no endgame; endpoints
are polished by Gauss-Newton on the target and accepted on residual.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .polycore import (
    CompiledSystem,
    DimensionError,
    PolySystem,
    random_combination,
    random_complex,
    random_unit_complex,
)

log = logging.getLogger(__name__)

OK, DIVERGED, UNDERFLOW, MAX_STEPS, FAILED = 0, 1, 2, 3, 4
STATUS_NAMES = {OK: "ok", DIVERGED: "diverged", UNDERFLOW: "step underflow", MAX_STEPS: "max steps", FAILED: "failed"}


class TrackingError(RuntimeError):
    """A homotopy could not be tracked reliably."""


@dataclass(frozen=True)
class TrackerConfig:
    initial_step: float = 0.05
    min_step: float = 1e-7
    max_step: float = 0.1
    corrector_tol: float = 1e-10
    residual_tol: float = 1e-13
    max_corrector_iters: int = 3
    max_steps: int = 3000
    endpoint_tol: float = 1e-6
    dedup_tol: float = 1e-6
    divergence_bound: float = 1e8
    refine_tol: float = 1e-13
    refine_iters: int = 200
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        for name in ("initial_step", "min_step", "max_step", "corrector_tol", "residual_tol", "endpoint_tol", "dedup_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.min_step > self.initial_step:
            raise ValueError("min_step must not exceed initial_step")
        if self.max_corrector_iters < 1 or self.max_steps < 1:
            raise ValueError("iteration counts must be positive")


@dataclass
class Point:
    coords: np.ndarray
    residual: float = float("nan")

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=complex)
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("point has non-finite coordinates")

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)


# ---------------------------------------------------------------------------
# batched square systems
# ---------------------------------------------------------------------------


class PolyBlock:
    """Polynomial equations shared by every path of a batch."""

    def __init__(self, system: PolySystem | CompiledSystem):
        self.compiled = system if isinstance(system, CompiledSystem) else CompiledSystem(system)
        self.rows = self.compiled.P
        self.n = self.compiled.n

    def __call__(self, X, idx):
        return self.compiled.values_and_jacobian(X)


class AffineBlock:
    """Affine equations ``A x - b``; ``A`` and ``b`` may carry a batch axis."""

    def __init__(self, A, b):
        self.A = np.asarray(A, dtype=complex)
        self.b = np.asarray(b, dtype=complex)
        self.batched = self.A.ndim == 3
        self.rows = self.A.shape[-2]
        self.n = self.A.shape[-1]

    def __call__(self, X, idx):
        if self.batched:
            A, b = self.A[idx], self.b[idx]
            F = np.einsum("bkm,bm->bk", A, X) - b
            return F, A
        F = X @ self.A.T - self.b
        return F, np.broadcast_to(self.A, (X.shape[0],) + self.A.shape)


class StackedSystem:
    def __init__(self, blocks):
        self.blocks = [b for b in blocks if b.rows > 0]
        self.rows = sum(b.rows for b in self.blocks)
        self.n = blocks[0].n

    def __call__(self, X, idx):
        parts = [b(X, idx) for b in self.blocks]
        F = np.concatenate([p[0] for p in parts], axis=1)
        J = np.concatenate([p[1] for p in parts], axis=1)
        return F, J


class TotalDegreeStart:
    """Start system ``x_i^{d_i} - r_i``."""

    def __init__(self, degrees: Sequence[int], r):
        self.degrees = np.asarray(degrees, dtype=np.int64)
        self.r = np.asarray(r, dtype=complex)
        self.rows = self.n = len(self.degrees)

    def __call__(self, X, idx):
        d = self.degrees
        F = X ** d - self.r
        Jd = d * X ** np.maximum(d - 1, 0)
        J = np.zeros(X.shape + (X.shape[1],), dtype=complex)
        k = np.arange(X.shape[1])
        J[:, k, k] = Jd
        return F, J

    def start_points(self) -> np.ndarray:
        roots = [
            self.r[i] ** (1.0 / self.degrees[i]) * np.exp(2j * np.pi * np.arange(self.degrees[i]) / self.degrees[i])
            for i in range(self.n)
        ]
        grids = np.meshgrid(*roots, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)


@dataclass
class Homotopy:
    start: object
    target: object
    gamma: complex

    def __post_init__(self):
        if self.start.rows != self.target.rows or self.start.n != self.target.n:
            raise DimensionError("start and target systems must have matching shapes")
        if self.start.rows != self.start.n:
            raise DimensionError(f"homotopy is not square ({self.start.rows} equations, {self.start.n} unknowns)")

    @property
    def n(self):
        return self.start.n

    def evaluate(self, X, t, idx):
        S, Sx = self.start(X, idx)
        T, Tx = self.target(X, idx)
        s = ((1 - t) * self.gamma)[:, None]
        tt = t[:, None]
        H = s * S + tt * T
        Hx = s[:, :, None] * Sx + tt[:, :, None] * Tx
        Ht = T - self.gamma * S
        return H, Hx, Ht


def _solve(J, r):
    """Batched ``J^{-1} r``; exactly singular matrices get a pseudo-inverse.

    The batch is bisected on failure so that one singular matrix does not
    push the well-posed ones onto the (truncating) pseudo-inverse.
    """
    try:
        return np.linalg.solve(J, r[..., None])[..., 0]
    except np.linalg.LinAlgError:
        if J.shape[0] == 1:
            return np.einsum("bij,bj->bi", np.linalg.pinv(J, rcond=1e-14), r)
        h = J.shape[0] // 2
        return np.concatenate([_solve(J[:h], r[:h]), _solve(J[h:], r[h:])])


def _inf_norm(X):
    return np.max(np.abs(X), axis=-1) if X.shape[-1] else np.zeros(X.shape[:-1])


@dataclass
class TrackResult:
    points: np.ndarray
    status: np.ndarray
    t: np.ndarray
    steps: np.ndarray = field(default=None)

    @property
    def ok(self):
        return self.status == OK


def _track_batch(hom: Homotopy, X0: np.ndarray, cfg: TrackerConfig) -> TrackResult:
    X = np.array(X0, dtype=complex, copy=True)
    B = X.shape[0]
    t = np.zeros(B)
    h = np.full(B, cfg.initial_step)
    succ = np.zeros(B, dtype=np.int64)
    status = np.full(B, -1)
    steps = np.zeros(B, dtype=np.int64)
    all_idx = np.arange(B)

    def velocity(Xa, ta, idx):
        _, Hx, Ht = hom.evaluate(Xa, ta, idx)
        return -_solve(Hx, Ht)

    for _ in range(cfg.max_steps):
        active = np.nonzero(status < 0)[0]
        if active.size == 0:
            break
        idx = all_idx[active]
        xa, ta = X[active], t[active]
        ha = np.minimum(h[active], 1.0 - ta)
        hc = ha[:, None]
        with np.errstate(all="ignore"):
            k1 = velocity(xa, ta, idx)
            k2 = velocity(xa + 0.5 * hc * k1, ta + 0.5 * ha, idx)
            k3 = velocity(xa + 0.5 * hc * k2, ta + 0.5 * ha, idx)
            k4 = velocity(xa + hc * k3, ta + ha, idx)
            xp = xa + hc / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            tn = np.where(ta + ha >= 1.0 - 1e-15, 1.0, ta + ha)
            converged = np.zeros(active.size, dtype=bool)
            prev = np.full(active.size, np.inf)
            bad = ~np.all(np.isfinite(xp), axis=1)
            for _it in range(cfg.max_corrector_iters):
                H, Hx, _ = hom.evaluate(xp, tn, idx)
                # on a non-reduced path Newton only converges linearly; a
                # residual at rounding level is accepted as it stands
                flat = _inf_norm(H) <= cfg.residual_tol * (1.0 + _inf_norm(xp))
                converged |= flat
                dx = _solve(Hx, H)
                dx[flat] = 0
                xp = xp - dx
                nd = _inf_norm(dx)
                bad |= ~np.isfinite(nd) | (nd > 2 * prev)
                prev = nd
                converged |= nd <= cfg.corrector_tol * (1.0 + _inf_norm(xp))
                if np.all(converged | bad):
                    break
            # a vanishing Newton step with a large residual means a singular
            # Jacobian, not convergence
            bad |= _inf_norm(H) > cfg.endpoint_tol * (1.0 + _inf_norm(xp))
        accept = converged & ~bad & np.all(np.isfinite(xp), axis=1)
        acc = active[accept]
        rej = active[~accept]
        X[acc] = xp[accept]
        t[acc] = tn[accept]
        steps[active] += 1
        succ[acc] += 1
        grow = acc[succ[acc] >= 5]
        h[grow] = np.minimum(2 * h[grow], cfg.max_step)
        succ[grow] = 0
        h[rej] *= 0.5
        succ[rej] = 0
        done = acc[t[acc] >= 1.0]
        status[done] = OK
        big = acc[_inf_norm(X[acc]) > cfg.divergence_bound]
        status[big] = DIVERGED
        under = rej[h[rej] < cfg.min_step]
        status[under] = UNDERFLOW
    status[status < 0] = MAX_STEPS
    return TrackResult(X, status, t, steps)


def track(hom: Homotopy, X0, cfg: TrackerConfig) -> TrackResult:
    """Track every row of ``X0`` from ``t = 0`` to ``t = 1``.

    With ``cfg.threads > 1`` the batch is split into contiguous chunks tracked
    on a thread pool; chunk results are concatenated in order, so the output
    does not depend on scheduling.
    """
    X0 = np.atleast_2d(np.asarray(X0, dtype=complex))
    if X0.shape[0] == 0:
        return TrackResult(X0.copy(), np.zeros(0, dtype=int), np.zeros(0), np.zeros(0, dtype=int))
    if X0.shape[1] != hom.n:
        raise DimensionError(f"start points have {X0.shape[1]} coordinates, homotopy has {hom.n}")
    threads = cfg.threads if cfg.threads > 0 else _cpu_count()
    if threads <= 1 or X0.shape[0] < 2 * threads:
        return _track_batch(hom, X0, cfg)
    chunks = np.array_split(np.arange(X0.shape[0]), threads)

    def run(ix):
        return _track_batch(_SubHomotopy(hom, ix), X0[ix], cfg)

    with ThreadPoolExecutor(threads) as pool:
        parts = list(pool.map(run, chunks))
    return TrackResult(
        np.concatenate([p.points for p in parts]),
        np.concatenate([p.status for p in parts]),
        np.concatenate([p.t for p in parts]),
        np.concatenate([p.steps for p in parts]),
    )


def _cpu_count():
    import os

    return os.cpu_count() or 1


class _SubHomotopy(Homotopy):
    """View of a homotopy restricted to a subset of batch rows."""

    def __init__(self, hom: Homotopy, ix):
        self.start, self.target, self.gamma = hom.start, hom.target, hom.gamma
        self._ix = ix

    def evaluate(self, X, t, idx):
        return Homotopy.evaluate(self, X, t, self._ix[idx])


def track_path(hom: Homotopy, start_point, cfg: TrackerConfig) -> Point:
    """Track a single path; raises :class:`TrackingError` on failure."""
    res = track(hom, np.asarray(start_point, dtype=complex)[None, :], cfg)
    if res.status[0] != OK:
        raise TrackingError(f"path failed: {STATUS_NAMES[int(res.status[0])]} at t={res.t[0]:.6g}")
    x = res.points[0]
    H, _, _ = hom.evaluate(x[None], np.ones(1), np.zeros(1, dtype=int))
    return Point(x, float(np.max(np.abs(H))) if H.size else 0.0)


# ---------------------------------------------------------------------------
# refinement, residuals, deduplication
# ---------------------------------------------------------------------------


def refine_batch(system, X, tol: float = 1e-13, max_iter: int = 80, idx=None):
    """Gauss-Newton on a (possibly overdetermined) batched system.

    ``system`` is any batched block (``PolyBlock``, ``StackedSystem``...).
    Returns ``(points, converged)``.  Steps use a pseudo-inverse, so the
    iteration also settles on singular or positive-dimensional solution sets.
    """
    X = np.array(X, dtype=complex, copy=True)
    B = X.shape[0]
    if idx is None:
        idx = np.arange(B)
    conv = np.zeros(B, dtype=bool)
    live = np.arange(B)
    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            if live.size == 0:
                break
            F, J = system(X[live], idx[live])
            dx = np.einsum("bij,bj->bi", np.linalg.pinv(J, rcond=1e-12), F)
            ok = np.all(np.isfinite(dx), axis=1)
            X[live[ok]] -= dx[ok]
            small = ok & (_inf_norm(dx) <= tol * (1.0 + _inf_norm(X[live])))
            conv[live[small]] = True
            live = live[ok & ~small]
    return X, conv


def newton_refine(system: PolySystem, x, tol: float = 1e-13, max_iter: int = 80) -> tuple[Point, bool]:
    """Gauss-Newton refinement of one point; returns ``(point, converged)``."""
    x = np.asarray(x, dtype=complex)
    if len(x) != system.n:
        raise DimensionError(f"point has {len(x)} coordinates, expected {system.n}")
    X, conv = refine_batch(PolyBlock(system), x[None, :], tol, max_iter)
    return Point(X[0], system.residual(X[0])), bool(conv[0])


def residuals(system, X, idx=None) -> np.ndarray:
    X = np.atleast_2d(X)
    if idx is None:
        idx = np.arange(X.shape[0])
    if system.rows == 0:
        return np.zeros(X.shape[0])
    F, _ = system(X, idx)
    return _inf_norm(F)


def dedup(X: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Indices of representatives after merging points within ``tol`` relative distance."""
    keep: list[int] = []
    if len(X) == 0:
        return np.zeros(0, dtype=int)
    scale = 1.0 + _inf_norm(X)
    for i in range(len(X)):
        if keep:
            K = np.asarray(keep)
            d = _inf_norm(X[K] - X[i])
            if np.any(d <= tol * np.maximum(scale[K], scale[i])):
                continue
        keep.append(i)
    return np.asarray(keep, dtype=int)


def canonical_order(X: np.ndarray) -> np.ndarray:
    """Permutation sorting points by their coordinates rounded to 1e-9."""
    if len(X) == 0:
        return np.zeros(0, dtype=int)
    R = np.round(X, 9)
    keys = [R[:, j].imag for j in reversed(range(X.shape[1]))] + [R[:, j].real for j in reversed(range(X.shape[1]))]
    return np.lexsort(keys)


def match_points(A: np.ndarray, B: np.ndarray, tol: float) -> np.ndarray:
    """For each row of ``A`` the index of the nearest row of ``B`` within ``tol`` (relative), else -1."""
    out = np.full(len(A), -1)
    if len(A) == 0 or len(B) == 0:
        return out
    D = np.max(np.abs(A[:, None, :] - B[None, :, :]), axis=2)
    j = np.argmin(D, axis=1)
    scale = 1.0 + np.maximum(_inf_norm(A), _inf_norm(B[j]))
    good = D[np.arange(len(A)), j] <= tol * scale
    out[good] = j[good]
    return out


# ---------------------------------------------------------------------------
# slicing planes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SlicingPlane:
    """Affine plane ``{x : matrix @ x = offset}`` in C^m."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.matrix, dtype=complex))
        if np.asarray(self.matrix).size == 0:
            A = np.asarray(self.matrix, dtype=complex).reshape(0, A.shape[-1] if A.ndim == 2 else 0)
        b = np.asarray(self.offset, dtype=complex).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise DimensionError("slice matrix and offset disagree")
        if A.shape[0] and np.linalg.matrix_rank(A) < A.shape[0]:
            raise ValueError("slice equations are not independent")
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "offset", b)

    @property
    def codim(self) -> int:
        return self.matrix.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def random(cls, k: int, m: int, rng: np.random.Generator) -> "SlicingPlane":
        return cls(random_complex(rng, (k, m)), random_complex(rng, k))

    @classmethod
    def through(cls, matrix, point) -> "SlicingPlane":
        A = np.asarray(matrix, dtype=complex)
        return cls(A, A @ np.asarray(point, dtype=complex))

    def block(self) -> AffineBlock:
        return AffineBlock(self.matrix, self.offset)

    def residual(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        if self.codim == 0:
            return np.zeros(X.shape[0])
        return _inf_norm(X @ self.matrix.T - self.offset)

    def translated(self, shift) -> "SlicingPlane":
        return SlicingPlane(self.matrix, self.offset + np.asarray(shift, dtype=complex))


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------


def _as_points(X, res) -> list[Point]:
    return [Point(x, float(r)) for x, r in zip(X, res)]


def solve_total_degree_array(
    target, degrees, cfg: TrackerConfig, rng: np.random.Generator, refine_system=None
) -> tuple[np.ndarray, np.ndarray]:
    """Total-degree homotopy for a batched square ``target``.

    Returns refined, deduplicated endpoints and their residuals against
    ``refine_system`` (defaults to the target).  Diverged or failed paths are
    dropped.
    """
    degrees = [int(d) for d in degrees]
    if any(d < 1 for d in degrees):
        raise ValueError("total-degree homotopy needs equations of positive degree")
    start = TotalDegreeStart(degrees, random_unit_complex(rng, len(degrees)))
    hom = Homotopy(start, target, complex(random_unit_complex(rng)))
    X0 = start.start_points()
    res = track(hom, X0, cfg)
    near_end = (res.status == OK) | ((res.status == UNDERFLOW) & (res.t > 1 - 1e-3)) | (
        (res.status == MAX_STEPS) & (res.t > 1 - 1e-3)
    )
    X = res.points[near_end]
    check = refine_system if refine_system is not None else target
    X, _ = refine_batch(check, X, cfg.refine_tol, cfg.refine_iters)
    finite = np.all(np.isfinite(X), axis=1) & (_inf_norm(X) < cfg.divergence_bound)
    X = X[finite]
    r = residuals(check, X)
    good = r < cfg.endpoint_tol
    X, r = X[good], r[good]
    keep = dedup(X, cfg.dedup_tol)
    X, r = X[keep], r[keep]
    order = canonical_order(X)
    log.debug("total degree: %d paths, %d endpoints kept", len(X0), len(X))
    return X[order], r[order]


def solve_total_degree(square: PolySystem, cfg: TrackerConfig | None = None, rng=None) -> list[Point]:
    """All isolated solutions of a square system by a total-degree homotopy."""
    cfg = cfg or TrackerConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    if len(square) != square.n:
        raise DimensionError(f"system is not square ({len(square)} equations, {square.n} unknowns)")
    X, r = solve_total_degree_array(PolyBlock(square), square.degrees(), cfg, rng)
    return _as_points(X, r)


@dataclass
class SliceSolution:
    points: np.ndarray
    residuals: np.ndarray
    slice: SlicingPlane
    tracking_system: PolySystem | None


def squared_system(system: PolySystem, codim: int, rng) -> PolySystem | None:
    """Random square-up of ``system`` to ``codim`` equations (None when ``codim`` is 0)."""
    if codim == 0:
        return None
    return random_combination(system, codim, rng)


def tracking_block(tracking: PolySystem | None, plane_block, m: int):
    blocks = []
    if tracking is not None:
        blocks.append(PolyBlock(tracking))
    blocks.append(plane_block)
    return StackedSystem(blocks)


def full_block(system: PolySystem, plane_block):
    gens = system.nonzero()
    blocks = [PolyBlock(gens)] if len(gens) else []
    blocks.append(plane_block)
    return StackedSystem(blocks)


def slice_and_solve(
    system: PolySystem, L: SlicingPlane, cfg: TrackerConfig | None = None, rng=None, tracking: PolySystem | None = None
) -> SliceSolution:
    """Points of ``V(system) ∩ L`` reachable by a total-degree homotopy.

    The nonlinear part is squared up to ``m - codim(L)`` equations; endpoints
    are kept when the residual of the unsquared system and of ``L`` is below
    ``cfg.endpoint_tol``.
    """
    cfg = cfg or TrackerConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    m = system.n
    if L.ambient_dim != m:
        raise DimensionError("slice lives in a different ambient space")
    c = m - L.codim
    gens = system.nonzero()
    if any(g.degree == 0 for g in gens):
        return SliceSolution(np.zeros((0, m), dtype=complex), np.zeros(0), L, None)
    if c > 0 and len(gens) == 0:
        raise ValueError("system has no equations but the slice is not of full codimension")
    if tracking is None:
        tracking = squared_system(gens, c, rng)
    plane = L.block()
    target = tracking_block(tracking, plane, m)
    degrees = (tracking.degrees() if tracking is not None else []) + [1] * L.codim
    X, r = solve_total_degree_array(target, degrees, cfg, rng, refine_system=full_block(system, plane))
    return SliceSolution(X, r, L, tracking)


def move_points(
    points: np.ndarray,
    tracking: PolySystem | None,
    L_from: SlicingPlane,
    targets: AffineBlock,
    cfg: TrackerConfig,
    rng: np.random.Generator,
    idx=None,
):
    """Track points along ``(1-t) gamma [G; L_from] + t [G; L_to]``.

    ``targets`` may be batched (one target slice per path).  Returns the
    ``TrackResult`` after polishing successful endpoints on the target.
    """
    m = L_from.ambient_dim
    start = tracking_block(tracking, L_from.block(), m)
    target = tracking_block(tracking, targets, m)
    hom = Homotopy(start, target, complex(random_unit_complex(rng)))
    res = track(hom, points, cfg)
    return finish_endpoints(res, target, cfg)


def finish_endpoints(res: TrackResult, target, cfg: TrackerConfig) -> TrackResult:
    """Polish endpoints on the target and settle their status.

    Paths that stalled within 1e-3 of ``t = 1`` (typical near singular
    endpoints) are polished too; anything with a residual above
    ``cfg.endpoint_tol`` afterwards is marked failed.
    """
    near = (res.status == UNDERFLOW) | (res.status == MAX_STEPS)
    cand = np.nonzero((res.status == OK) | (near & (res.t > 1 - 1e-3)))[0]
    if cand.size:
        Xr, _ = refine_batch(target, res.points[cand], cfg.refine_tol, cfg.refine_iters, idx=cand)
        res.points[cand] = Xr
        good = np.all(np.isfinite(Xr), axis=1) & (residuals(target, Xr, cand) <= cfg.endpoint_tol)
        res.status[cand[good]] = OK
        res.status[cand[~good]] = FAILED
    return res


def move_witness(W, L_new: SlicingPlane, system=None, cfg: TrackerConfig | None = None, rng=None, retries: int = 3):
    """Move a witness set to the slice ``L_new``.

    Retries with a fresh ``gamma`` when a path fails or two endpoints
    coincide.  Returns a new witness set with the same cardinality.
    """
    cfg = cfg or TrackerConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    if L_new.codim != W.slice.codim or L_new.ambient_dim != W.slice.ambient_dim:
        raise DimensionError("new slice must match the witness slice shape")
    tracking = W.tracking(rng)
    for attempt in range(retries + 1):
        res = move_points(W.points, tracking, W.slice, L_new.block(), cfg, rng)
        if np.all(res.status == OK) and len(dedup(res.points, cfg.dedup_tol)) == len(res.points):
            return replace(W, slice=L_new, points=res.points)
        log.info("move_witness attempt %d failed; retrying with a new gamma", attempt + 1)
    raise TrackingError("could not move witness set without path failures or crossings")
