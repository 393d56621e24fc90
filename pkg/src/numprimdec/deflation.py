"""Deflation matrices and deflation ideals.

The deflation matrix of order ``d`` has one row per pair ``(alpha, j)`` with
``|alpha| < d`` and one column per ``beta`` with ``|beta| <= d``; the entry is
``d^beta (x^alpha f_j)``.  The deflation ideal adds the entries of
``A @ a`` to the original generators in the ring ``C[x, a]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from math import comb
from typing import Sequence

import numpy as np

from .polycore import (
    DimensionError,
    Polynomial,
    PolySystem,
    VariableList,
    differentiate,
    evaluate,
    mul_monomial,
)


def exponents_of_degree(n: int, k: int) -> list[tuple[int, ...]]:
    """All exponent vectors of total degree ``k``, lexicographically descending."""
    out = []
    for combo in combinations_with_replacement(range(n), k):
        e = [0] * n
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    out.sort(reverse=True)
    return out


def exponents_up_to(n: int, d: int) -> list[tuple[int, ...]]:
    """Exponents with ``|beta| <= d``: by ascending degree, lex-descending within a degree.

    For ``n = 3, d = 1`` this is ``0, e1, e2, e3``, the column order of the
    displayed deflation matrices.
    """
    out = []
    for k in range(d + 1):
        out.extend(exponents_of_degree(n, k))
    return out


def ambient_dim(n: int, d: int) -> int:
    """Number of coordinates ``(x, a)`` of the order-``d`` deflated space."""
    if n < 1 or d < 0:
        raise ValueError("need n >= 1 and d >= 0")
    if d == 0:
        return n
    return n + comb(n + d, d)


def deflated_plane_dim(n: int, k: int, d: int) -> int:
    """Dimension of the order-``d`` deflation of a codimension-``k`` plane in C^n."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    if d == 0:
        return n - k
    return (n - k) + comb(n - k + d, d)


@dataclass(frozen=True)
class DeflationMatrix:
    order: int
    rows: tuple[tuple[tuple[int, ...], int], ...]
    cols: tuple[tuple[int, ...], ...]
    entries: tuple[tuple[Polynomial, ...], ...]
    ring: VariableList

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    def entry(self, alpha, j, beta) -> Polynomial:
        r = self.rows.index((tuple(alpha), j))
        c = self.cols.index(tuple(beta))
        return self.entries[r][c]


def deflation_matrix(system: PolySystem, d: int) -> DeflationMatrix:
    if d < 1:
        raise ValueError("deflation order must be at least 1")
    n = system.n
    alphas = exponents_up_to(n, d - 1)
    betas = exponents_up_to(n, d)
    rows, entries = [], []
    for alpha in alphas:
        for j, f in enumerate(system.generators):
            g = mul_monomial(f, alpha)
            rows.append((alpha, j))
            entries.append(tuple(differentiate(g, beta) for beta in betas))
    return DeflationMatrix(d, tuple(rows), tuple(betas), tuple(entries), system.ring)


def _check_point(x, n):
    if len(x) != n:
        raise DimensionError(f"point has {len(x)} coordinates, expected {n}")


def deflation_matrix_at(system: PolySystem, d: int, x: Sequence[complex]) -> np.ndarray:
    """Numerical deflation matrix ``A^(d)(x)``.

    Built from the Taylor coefficients of each ``x^alpha f_j`` at ``x`` rather
    than from symbolic entries, which keeps high orders cheap.
    """
    n = system.n
    _check_point(x, n)
    x = np.asarray(x, dtype=complex)
    betas = exponents_up_to(n, d)
    if d == 0:
        return np.zeros((0, 1), dtype=complex)
    col = {b: k for k, b in enumerate(betas)}
    alphas = exponents_up_to(n, d - 1)
    A = np.zeros((len(alphas) * len(system.generators), len(betas)), dtype=complex)
    r = 0
    for alpha in alphas:
        for f in system.generators:
            g = mul_monomial(f, alpha)
            for beta in betas:
                A[r, col[beta]] = evaluate(differentiate(g, beta), x)
            r += 1
    if not np.all(np.isfinite(A)):
        raise FloatingPointError("deflation matrix has non-finite entries")
    return A


def a_variable_name(beta: Sequence[int]) -> str:
    return "a_" + "_".join(str(b) for b in beta)


@dataclass(frozen=True)
class DeflatedSystem:
    order: int
    base: PolySystem
    ext_ring: VariableList
    system: PolySystem
    col_index: dict = field(hash=False, compare=False)

    @property
    def base_ring(self) -> VariableList:
        return self.base.ring

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def ambient_dim(self) -> int:
        return self.ext_ring.n

    @property
    def generators(self):
        return self.system.generators

    def project(self, point):
        return project(point, self)


def deflate_ideal(system: PolySystem, d: int) -> DeflatedSystem:
    """Order-``d`` deflation; ``d = 0`` is the identity deflation."""
    if d < 0:
        raise ValueError("deflation order must be non-negative")
    if d == 0:
        return DeflatedSystem(0, system, system.ring, system, {})
    n = system.n
    betas = exponents_up_to(n, d)
    names = system.ring.names + tuple(a_variable_name(b) for b in betas)
    ext = VariableList(names)
    col_index = {b: n + k for k, b in enumerate(betas)}
    A = deflation_matrix(system, d)
    gens = [f.embed(ext) for f in system.generators]
    for row in A.entries:
        acc = Polynomial.zero(ext)
        for beta, entry in zip(A.cols, row):
            if entry.is_zero():
                continue
            avar = Polynomial.variable(col_index[beta], ext)
            acc = acc + entry.embed(ext) * avar
        gens.append(acc)
    return DeflatedSystem(d, system, ext, PolySystem(tuple(gens), ext), col_index)


def project(point, dsys: DeflatedSystem):
    """Natural projection ``(x, a) -> x``."""
    pt = np.asarray(point, dtype=complex)
    if pt.shape[-1] != dsys.ambient_dim:
        raise DimensionError(f"point has {pt.shape[-1]} coordinates, expected {dsys.ambient_dim}")
    return pt[..., : dsys.n]
