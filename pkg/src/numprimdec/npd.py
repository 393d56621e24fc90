"""Numerical primary decomposition and ideal membership.

Components of ``V(I)`` (isolated and embedded) are found as projections of
isolated components of the deflated varieties ``X^(d)`` for ``d = 0..d_max``.
Membership of ``g`` in ``I`` is decided by checking that ``g`` is annihilated
by the truncated dual space at one generic point of every component.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from math import comb
from typing import Any, Sequence

import numpy as np

from .deflation import deflate_ideal, deflation_matrix_at, exponents_up_to
from .dualspace import DEFAULT_RANK_TOL, numerical_kernel
from .nid import DEFAULT_LOOPS, FILTER_TOL, WitnessSet, _containment_slices, contains, nid
from .polycore import DimensionError, Polynomial, PolySystem, differentiate, evaluate
from .tracker import OK, AffineBlock, SlicingPlane, TrackerConfig, TrackingError, _inf_norm, move_points

log = logging.getLogger(__name__)


@dataclass
class ComponentRecord:
    """One discovered component: its witness set and the first order it appeared at."""

    witness: WitnessSet
    first_order: int
    possibly_pseudo: bool = False

    @property
    def status(self) -> str:
        return "isolated-at-order-0" if self.first_order == 0 else f"discovered-at-order-{self.first_order}"

    @property
    def samples(self) -> np.ndarray:
        return self.witness.projections()

    @property
    def dim(self) -> int:
        return self.witness.dim_downstairs

    @property
    def degree(self) -> int:
        return self.witness.degree


@dataclass
class NPDResult:
    components: list[ComponentRecord]
    d_max: int
    seed: int
    unfiltered: bool = True
    config: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)


@dataclass(frozen=True)
class MembershipReport:
    verdict: bool
    residuals: tuple[float, ...]
    degree: int
    threshold: float


# ---------------------------------------------------------------------------
# sweep bounds
# ---------------------------------------------------------------------------


def sweep_bounds(n: int, d: int, e_min: int, e_max: int) -> tuple[int, int]:
    """Range of upstairs dimensions that can hold an isolated component of ``X^(d)``.

    Over a generic point of an isolated ``E``-dimensional component the fiber
    of ``X^(d)`` contains the order-``d`` jets along the component, which
    have dimension ``C(E+d, d)``.  An embedded component needs a strictly
    larger fiber than the component containing it.  Hence every component
    of ``X^(d)`` has dimension at least ``C(e_min+d, d)`` plus one when
    ``e_min > 0``, and at most ``e_max + C(n+d, d)``.
    """
    if d == 0:
        return e_min, e_max
    low = comb(e_min + d, d) + (1 if e_min > 0 else 0)
    high = e_max + comb(n + d, d)
    return low, high


# ---------------------------------------------------------------------------
# visible components and the truncated loop
# ---------------------------------------------------------------------------


def _flag_nested(records: Sequence[ComponentRecord], cfg, rng):
    """Set ``possibly_pseudo`` on records lying inside a strictly larger one."""
    for r in records:
        for big in records:
            if big.dim > r.dim and contains(r.samples[:1], big.witness, cfg, rng, FILTER_TOL)[0]:
                r.possibly_pseudo = True
                break


def visible_components(
    system: PolySystem,
    d: int,
    cfg: TrackerConfig | None = None,
    rng=None,
    loops: int = DEFAULT_LOOPS,
    dim_range: tuple[int, int] | None = None,
) -> list[ComponentRecord]:
    """Projections of the isolated components of ``X^(d)``.

    ``dim_range`` gives the smallest and largest downstairs dimension of an
    isolated component of ``V(system)``; it narrows the dimension sweep for
    ``d > 0`` and is computed by an order-0 decomposition when omitted.
    Records lying on a strictly larger record are flagged ``possibly_pseudo``.
    """
    if d < 0:
        raise ValueError("deflation order must be non-negative")
    cfg = cfg or TrackerConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    dsys = deflate_ideal(system, d)
    if d == 0:
        ws = nid(dsys, cfg, rng, loops)
    else:
        if dim_range is None:
            base = nid(deflate_ideal(system, 0), cfg, rng, loops)
            if not base:
                return []
            dims = [w.dim_downstairs for w in base]
            dim_range = (min(dims), max(dims))
        low, high = sweep_bounds(system.n, d, *dim_range)
        ws = nid(dsys, cfg, rng, loops, min_dim=low, max_dim=high)
    records = [ComponentRecord(w, d) for w in ws]
    records.sort(key=lambda r: -r.dim)
    _flag_nested(records, cfg, rng)
    return records


def _coincide(a: ComponentRecord, b: ComponentRecord, cfg, rng, tol=FILTER_TOL) -> bool:
    if a.dim != b.dim:
        return False
    if a.dim == 0:
        ya, yb = a.samples[0], b.samples[0]
        return bool(_inf_norm(ya - yb) <= tol * (1 + max(_inf_norm(ya), _inf_norm(yb))))
    return bool(contains(a.samples[:1], b.witness, cfg, rng, tol)[0] and contains(b.samples[:1], a.witness, cfg, rng, tol)[0])


def npd(
    system: PolySystem,
    d_max: int = 1,
    cfg: TrackerConfig | None = None,
    rng=None,
    loops: int = DEFAULT_LOOPS,
) -> NPDResult:
    """Unfiltered numerical primary decomposition up to deflation order ``d_max``.

    New candidates are processed by decreasing downstairs dimension.  A
    candidate that coincides with a recorded component (same dimension,
    mutual containment) is not added again; the record keeps its first
    order but takes the newer witness set.  Candidates lying on a strictly
    larger recorded component are kept and flagged ``possibly_pseudo``.
    """
    if d_max < 0:
        raise ValueError("d_max must be non-negative")
    cfg = cfg or TrackerConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    records: list[ComponentRecord] = []
    dim_range = None
    for d in range(d_max + 1):
        cands = visible_components(system, d, cfg, rng, loops, dim_range)
        if d == 0:
            if not cands:
                break
            dims = [c.dim for c in cands]
            dim_range = (min(dims), max(dims))
        for c in cands:
            same = next((r for r in records if _coincide(c, r, cfg, rng)), None)
            if same is not None:
                same.witness = c.witness
                continue
            c.possibly_pseudo = any(
                r.dim > c.dim and contains(c.samples[:1], r.witness, cfg, rng, FILTER_TOL)[0] for r in records
            ) or c.possibly_pseudo
            records.append(c)
        log.info("order %d: %d candidates, %d records", d, len(cands), len(records))
    return NPDResult(records, d_max, cfg.seed)


# ---------------------------------------------------------------------------
# ideal membership
# ---------------------------------------------------------------------------


def membership_threshold(g: Polynomial, rel_tol: float = 1e-6) -> float:
    return rel_tol * (1.0 + g.coeff_norm())


def _annihilation_residual(g: Polynomial, system: PolySystem, x, d: int, tol: float) -> float:
    A = deflation_matrix_at(system, d, x)
    K, _ = numerical_kernel(A, tol)
    betas = exponents_up_to(system.n, d)
    values = np.array([evaluate(differentiate(g, b), x) for b in betas], dtype=complex)
    if K.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(values @ K)))


def ideal_membership(
    g: Polynomial,
    system: PolySystem,
    result: NPDResult,
    cfg: TrackerConfig | None = None,
    tol: float = DEFAULT_RANK_TOL,
    rel_tol: float = 1e-6,
) -> MembershipReport:
    """Decide ``g in I`` by dual-space annihilation at one point per component.

    ``d = deg g``.  For each record the kernel of ``A^(d)(x)`` at a projected
    witness point ``x`` is computed; ``g`` is a member iff every kernel
    functional sends it below ``1e-6 * (1 + ||g||)``.  A point where the
    kernel cannot be built is replaced by the next witness point.
    """
    if g.ring.n != system.n:
        raise DimensionError("polynomial and system live in different rings")
    if len(result.components) == 0:
        raise ValueError("decomposition has no components")
    d = max(g.degree, 0)
    thr = membership_threshold(g, rel_tol)
    worst = []
    for rec in result.components:
        res = None
        for x in rec.samples:
            try:
                res = _annihilation_residual(g, system, x, d, tol)
                break
            except (FloatingPointError, np.linalg.LinAlgError) as exc:
                log.info("dual space failed at a witness point (%s); trying the next one", exc)
        if res is None:
            raise TrackingError("no usable witness point for a component")
        worst.append(res)
    return MembershipReport(bool(all(r < thr for r in worst)), tuple(worst), d, thr)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def sample_component(
    record: ComponentRecord, count: int, cfg: TrackerConfig | None = None, rng=None, base: PolySystem | None = None
) -> np.ndarray:
    """``count`` points on the component, as rows in the base coordinates.

    Each sample is an endpoint of the witness set moved to a fresh random
    slice.  With ``base`` given, samples whose residual on it exceeds the
    endpoint tolerance are rejected and redrawn.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    cfg = cfg or TrackerConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    W = record.witness
    if W.dim_upstairs == 0:
        return np.repeat(W.projections()[:1], count, axis=0)
    out: list[np.ndarray] = []
    for _ in range(5):
        need = count - len(out)
        if need <= 0:
            break
        A, b = _containment_slices(np.zeros((need, W.n_base)), W, 0, rng)
        res = move_points(W.points[:1].repeat(need, axis=0), W.tracking(rng), W.slice, AffineBlock(A, b), cfg, rng)
        pts = res.points[res.status == OK, : W.n_base]
        if base is not None and len(pts):
            pts = pts[np.array([base.residual(p) for p in pts]) < cfg.endpoint_tol]
        out.extend(pts)
    if len(out) < count:
        raise TrackingError(f"only {len(out)} of {count} samples could be tracked")
    return np.array(out[:count])


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _c(z) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _uc(pair) -> complex:
    return complex(pair[0], pair[1])


def witness_to_json(W: WitnessSet, possibly_pseudo: bool = False) -> dict[str, Any]:
    return {
        "order": W.order,
        "ambient_dim": W.ambient_dim,
        "slice": {
            "matrix": [[_c(v) for v in row] for row in W.slice.matrix],
            "offset": [_c(v) for v in W.slice.offset],
        },
        "points": [[_c(v) for v in p] for p in W.points],
        "dim_upstairs": W.dim_upstairs,
        "dim_downstairs": W.dim_downstairs,
        "degree": W.degree,
        "possibly_pseudo": bool(possibly_pseudo),
    }


def witness_from_json(obj: dict, system: PolySystem) -> WitnessSet:
    """Rebuild a witness set; ``system`` is the base system it was computed for."""
    try:
        order = int(obj["order"])
        m = int(obj["ambient_dim"])
        rows = [[_uc(v) for v in row] for row in obj["slice"]["matrix"]]
        matrix = np.array(rows, dtype=complex).reshape(len(rows), m)
        offset = np.array([_uc(v) for v in obj["slice"]["offset"]], dtype=complex)
        points = np.array([[_uc(v) for v in p] for p in obj["points"]], dtype=complex).reshape(-1, m)
        k, e = int(obj["dim_upstairs"]), int(obj["dim_downstairs"])
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed witness set: {exc!r}") from None
    dsys = deflate_ideal(system, order)
    if dsys.ambient_dim != m:
        raise DimensionError(f"witness set lives in C^{m} but the order-{order} deflation has {dsys.ambient_dim} coordinates")
    if len(points) != int(obj.get("degree", len(points))):
        raise ValueError("witness degree does not match the number of points")
    return WitnessSet(order, dsys.system, SlicingPlane(matrix, offset), points, k, e, system.n)


def npd_to_json(result: NPDResult) -> dict[str, Any]:
    comps = []
    for r in result.components:
        obj = witness_to_json(r.witness, r.possibly_pseudo)
        obj["first_order"] = r.first_order
        comps.append(obj)
    out = {"seed": result.seed, "d_max": result.d_max, "components": comps}
    if result.config:
        out["config"] = result.config
    return out


def npd_from_json(obj: dict, system: PolySystem) -> NPDResult:
    try:
        comps = obj["components"]
        seed, d_max = int(obj["seed"]), int(obj["d_max"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed decomposition file: {exc!r}") from None
    records = []
    for c in comps:
        W = witness_from_json(c, system)
        records.append(ComponentRecord(W, int(c.get("first_order", W.order)), bool(c.get("possibly_pseudo", False))))
    return NPDResult(records, d_max, seed, config=dict(obj.get("config", {})))


def dumps(obj: dict, pretty: bool = False) -> str:
    return json.dumps(obj, indent=2 if pretty else None, sort_keys=False)
