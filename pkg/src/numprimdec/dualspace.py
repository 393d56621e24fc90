"""Truncated dual spaces as numerical kernels of deflation matrices.

A vector ``a`` in ``ker A^(d)(x)`` is read as the functional
``Q = sum_beta a_beta Delta^beta_x`` with ``Delta^beta_x(f) = (d^beta f)(x)``
(no factorial normalization).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Mapping, Sequence

import numpy as np

from .deflation import deflation_matrix_at, exponents_up_to
from .polycore import DimensionError, Polynomial, PolySystem, differentiate, evaluate

DEFAULT_RANK_TOL = 1e-8


class NotStabilizedError(RuntimeError):
    """Corank did not stabilize below the order cap."""


@dataclass(frozen=True)
class DualFunctional:
    base_point: tuple[complex, ...]
    coeffs: Mapping[tuple[int, ...], complex]

    def __post_init__(self):
        object.__setattr__(self, "base_point", tuple(complex(v) for v in self.base_point))
        clean = {tuple(b): complex(c) for b, c in self.coeffs.items() if c != 0}
        object.__setattr__(self, "coeffs", clean)

    @property
    def n(self) -> int:
        return len(self.base_point)

    @property
    def order(self) -> int:
        return max((sum(b) for b in self.coeffs), default=-1)

    @classmethod
    def unit(cls, base_point, beta):
        return cls(base_point, {tuple(beta): 1.0})

    def __call__(self, g: Polynomial) -> complex:
        return apply_functional(self, g)

    def vector(self, d: int) -> np.ndarray:
        """Coefficient vector in the column order of ``A^(d)``."""
        betas = exponents_up_to(self.n, d)
        return np.array([self.coeffs.get(b, 0j) for b in betas], dtype=complex)

    def __add__(self, other: "DualFunctional"):
        coeffs = dict(self.coeffs)
        for b, c in other.coeffs.items():
            coeffs[b] = coeffs.get(b, 0) + c
        return DualFunctional(self.base_point, coeffs)

    def scale(self, c: complex) -> "DualFunctional":
        return DualFunctional(self.base_point, {b: c * v for b, v in self.coeffs.items()})

    def almost_equal(self, other: "DualFunctional", tol=1e-12) -> bool:
        keys = set(self.coeffs) | set(other.coeffs)
        return all(abs(self.coeffs.get(k, 0) - other.coeffs.get(k, 0)) <= tol for k in keys)


@dataclass(frozen=True)
class DualSpaceBasis:
    base_point: tuple[complex, ...]
    order: int
    basis: tuple[DualFunctional, ...]
    tol: float
    singular_values: tuple[float, ...] = ()

    @property
    def dim(self) -> int:
        return len(self.basis)

    def matrix(self) -> np.ndarray:
        """Basis as rows of coefficient vectors (shape ``dim x C(n+d, d)``)."""
        n = len(self.base_point)
        if not self.basis:
            return np.zeros((0, comb(n + self.order, self.order)), dtype=complex)
        return np.array([q.vector(self.order) for q in self.basis])

    def projection_residual(self, v) -> float:
        """Distance from ``v`` to the span of the basis."""
        M = self.matrix()
        v = np.asarray(v, dtype=complex)
        if M.shape[0] == 0:
            return float(np.linalg.norm(v))
        return float(np.linalg.norm(v - M.T @ (M.conj() @ v)))

    def annihilates(self, g: Polynomial) -> float:
        """Largest modulus of ``Q(g)`` over the basis."""
        return max((abs(apply_functional(q, g)) for q in self.basis), default=0.0)


def numerical_kernel(A: np.ndarray, tol: float = DEFAULT_RANK_TOL):
    """Orthonormal kernel basis (columns) and singular values of ``A``.

    The rank is the number of singular values ``>= tol * max(sigma_0, 1)``.
    """
    rows, cols = A.shape
    if rows == 0:
        return np.eye(cols, dtype=complex), np.zeros(0)
    if not np.all(np.isfinite(A)):
        raise FloatingPointError("matrix has non-finite entries")
    _, s, vh = np.linalg.svd(A, full_matrices=True)
    cut = tol * max(s[0] if s.size else 0.0, 1.0)
    rank = int(np.sum(s >= cut))
    return vh[rank:].conj().T, s


def corank(A: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> int:
    return numerical_kernel(A, tol)[0].shape[1]


def _basis_from_vectors(x, d, K, tol, s) -> DualSpaceBasis:
    n = len(x)
    betas = exponents_up_to(n, d)
    funcs = []
    for k in range(K.shape[1]):
        vec = K[:, k]
        funcs.append(DualFunctional(x, {b: c for b, c in zip(betas, vec)}))
    return DualSpaceBasis(tuple(complex(v) for v in x), d, tuple(funcs), tol, tuple(float(v) for v in s))


def truncated_dual_space(system: PolySystem, x, d: int, tol: float = DEFAULT_RANK_TOL) -> DualSpaceBasis:
    """Orthonormal basis of ``D^(d)_x[I]`` realized as ``ker A^(d)(x)``."""
    if d < 0:
        raise ValueError("order must be non-negative")
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if len(x) != system.n:
        raise DimensionError(f"point has {len(x)} coordinates, expected {system.n}")
    if not np.all(np.isfinite(np.asarray(x, dtype=complex))):
        raise FloatingPointError("point has non-finite coordinates")
    A = deflation_matrix_at(system, d, x)
    K, s = numerical_kernel(A, tol)
    return _basis_from_vectors(x, d, K, tol, s)


def multiplicity(system: PolySystem, x, tol: float = DEFAULT_RANK_TOL, d_cap: int = 10) -> int:
    """Stabilized corank of ``A^(d)(x)``; equals the multiplicity at an isolated point."""
    if d_cap < 2:
        raise ValueError("d_cap must be at least 2")
    prev = corank(deflation_matrix_at(system, 0, x), tol)
    for d in range(1, d_cap + 1):
        cur = corank(deflation_matrix_at(system, d, x), tol)
        if cur == prev:
            return cur
        prev = cur
    raise NotStabilizedError(f"corank still growing at order {d_cap} (last value {prev})")


def apply_functional(Q: DualFunctional, g: Polynomial) -> complex:
    if g.ring.n != Q.n:
        raise DimensionError("functional and polynomial live in different dimensions")
    total = 0j
    for beta, c in Q.coeffs.items():
        total += c * evaluate(differentiate(g, beta), Q.base_point)
    return total


def chi(Q: DualFunctional, i: int) -> DualFunctional:
    """Differentiation operator: ``Delta^beta -> beta_i Delta^(beta - e_i)``."""
    coeffs: dict[tuple[int, ...], complex] = {}
    for beta, c in Q.coeffs.items():
        if beta[i] == 0:
            continue
        b = list(beta)
        b[i] -= 1
        b = tuple(b)
        coeffs[b] = coeffs.get(b, 0) + beta[i] * c
    return DualFunctional(Q.base_point, coeffs)


def delta(Q: DualFunctional, i: int) -> DualFunctional:
    """Integration operator: ``Delta^beta -> Delta^(beta + e_i)``."""
    coeffs = {}
    for beta, c in Q.coeffs.items():
        b = list(beta)
        b[i] += 1
        coeffs[tuple(b)] = c
    return DualFunctional(Q.base_point, coeffs)


def span_basis(vectors: Sequence[np.ndarray], tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis (columns) of the span of ``vectors``."""
    V = np.array(vectors, dtype=complex).T
    if V.size == 0:
        return V.reshape(V.shape[0] if V.ndim == 2 else 0, 0)
    u, s, _ = np.linalg.svd(V, full_matrices=False)
    rank = int(np.sum(s > tol * max(s[0], 1.0)))
    return u[:, :rank]


def dual_space_from_witness(W, y, samples: int = 8, cfg=None, rng=None, tol: float = 1e-6) -> DualSpaceBasis:
    """Span of the fiber of a deflated component over ``y``.

    ``W`` is a witness set of an isolated component of ``X^(d)`` with
    ``d >= 1``.  Its points are moved to ``samples`` random slices whose
    projection passes through ``y``; the ``a``-parts of endpoints lying over
    ``y`` are functionals in ``D^(d)_y[I]`` and their span is returned.  The
    achieved dimension may fall short of the full dual space when
    ``samples`` is small.
    """
    from .nid import _containment_slices
    from .tracker import OK, AffineBlock, TrackerConfig, _inf_norm, move_points

    if samples < 1:
        raise ValueError("samples must be at least 1")
    if W.order < 1:
        raise ValueError("witness set must come from a deflation of order at least 1")
    cfg = cfg or TrackerConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    y = np.asarray(y, dtype=complex)
    if len(y) != W.n_base:
        raise DimensionError(f"point has {len(y)} coordinates, expected {W.n_base}")
    ys = np.repeat(y[None, :], samples, axis=0)
    A, b = _containment_slices(ys, W, W.dim_downstairs, rng)
    deg = W.degree
    res = move_points(
        np.tile(W.points, (samples, 1)),
        W.tracking(rng),
        W.slice,
        AffineBlock(np.repeat(A, deg, axis=0), np.repeat(b, deg, axis=0)),
        cfg,
        rng,
    )
    over = (res.status == OK) & (_inf_norm(res.points[:, : W.n_base] - y) <= tol * (1 + _inf_norm(y)))
    vecs = [p[W.n_base :] for p in res.points[over]]
    K = span_basis(vecs, DEFAULT_RANK_TOL) if vecs else np.zeros((W.ambient_dim - W.n_base, 0), dtype=complex)
    return _basis_from_vectors(tuple(y), W.order, K, DEFAULT_RANK_TOL, ())
