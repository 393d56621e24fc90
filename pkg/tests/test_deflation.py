from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numprimdec.deflation import (
    ambient_dim,
    deflate_ideal,
    deflated_plane_dim,
    deflation_matrix,
    deflation_matrix_at,
    exponents_up_to,
    project,
)
from numprimdec.dualspace import numerical_kernel
from numprimdec.polycore import (
    DimensionError,
    differentiate,
    evaluate,
    format_polynomial,
    mul_monomial,
    parse,
    parse_polynomial,
)


def entries_text(A):
    return [[format_polynomial(e) for e in row] for row in A.entries]


def test_matrix_of_xsq_xyz(xsq_xyz):
    A = deflation_matrix(xsq_xyz, 1)
    assert A.shape == (2, 4)
    assert A.cols == ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))
    assert entries_text(A) == [["x1^2", "2*x1", "0", "0"], ["x1*x2*x3", "x2*x3", "x1*x3", "x1*x2"]]


def test_matrix_single_linear():
    A = deflation_matrix(parse("vars: x1\nx1"), 1)
    assert entries_text(A) == [["x1", "1"]]


def test_matrix_of_second_example():
    J = parse("vars: x1 x2 x3\nx1^2\nx1*x2^2*x3\nx1*x2*x3^2")
    A = deflation_matrix(J, 1)
    assert A.shape == (3, 4)
    assert entries_text(A)[1] == ["x1*x2^2*x3", "x2^2*x3", "2*x1*x2*x3", "x1*x2^2"]


def test_matrix_shape_counts():
    s = parse("vars: x y z\nx^2\ny*z\nx - z")
    for d in (1, 2, 3):
        A = deflation_matrix(s, d)
        assert A.shape == (3 * comb(3 + d - 1, d - 1), comb(3 + d, d))
        for (alpha, j) in A.rows:
            assert sum(alpha) < d


def test_matrix_rejects_order_zero(xsq_xyz):
    with pytest.raises(ValueError):
        deflation_matrix(xsq_xyz, 0)


def test_matrix_at_examples(xsq_xyz):
    assert np.array_equal(deflation_matrix_at(xsq_xyz, 1, (0, 0, 0)), np.zeros((2, 4)))
    A = deflation_matrix_at(parse("vars: x1 x2 x3\nx1^2"), 1, (1, 1, 1))
    assert np.array_equal(A, [[1, 2, 0, 0]])
    J = parse("vars: x1 x2 x3\nx1^2\nx1*x2^2*x3\nx1*x2*x3^2")
    assert np.array_equal(deflation_matrix_at(J, 1, (0, 1, 1)), [[0, 0, 0, 0], [0, 1, 0, 0], [0, 1, 0, 0]])
    with pytest.raises(DimensionError):
        deflation_matrix_at(xsq_xyz, 1, (0, 0))


def test_matrix_at_agrees_with_symbolic(rng):
    s = parse("vars: x y\nx^2*y - y\nx*y^3 + 2")
    x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    for d in (1, 2, 3):
        A = deflation_matrix(s, d)
        num = deflation_matrix_at(s, d, x)
        sym = np.array([[e(x) for e in row] for row in A.entries])
        assert np.allclose(num, sym, atol=1e-12)


def test_deflate_ideal_xsq_xyz(xsq_xyz):
    D = deflate_ideal(xsq_xyz, 1)
    ring = D.ext_ring
    assert ring.names == ("x1", "x2", "x3", "a_0_0_0", "a_1_0_0", "a_0_1_0", "a_0_0_1")
    expect = [
        "x1^2",
        "x1*x2*x3",
        "a_0_0_0*x1^2 + 2*a_1_0_0*x1",
        "a_0_0_0*x1*x2*x3 + a_1_0_0*x2*x3 + a_0_1_0*x1*x3 + a_0_0_1*x1*x2",
    ]
    assert list(D.generators) == [parse_polynomial(t, ring) for t in expect]
    assert D.ambient_dim == 7


def test_deflate_ideal_identity(xsq_xyz):
    D = deflate_ideal(xsq_xyz, 0)
    assert D.system is xsq_xyz and D.ambient_dim == 3


def test_deflation_of_plane():
    # V(x1) in C^3 at order 1: the only a-variable forced to vanish is a_(1,0,0)
    D = deflate_ideal(parse("vars: x1 x2 x3\nx1"), 1)
    extra = D.generators[1]
    a100 = D.col_index[(1, 0, 0)]
    assert extra.terms.get(tuple(1 if k == a100 else 0 for k in range(D.ambient_dim))) == 1
    x = np.array([0, 0.3, -2])
    A = deflation_matrix_at(D.base, 1, x)
    K, _ = numerical_kernel(A)
    assert K.shape[1] == 3
    assert np.allclose(K[1], 0)


def test_ambient_and_plane_dims():
    assert ambient_dim(3, 1) == 7
    assert ambient_dim(5, 0) == 5
    assert ambient_dim(2, 2) == 8
    assert deflated_plane_dim(3, 1, 1) == 5
    for n in (1, 2, 4):
        assert deflated_plane_dim(n, n, 3) == 1
        assert deflated_plane_dim(n, 0, 1) == n + n + 1


def test_project(xsq_xyz):
    D = deflate_ideal(parse("vars: x1 x2 x3\nx3^2\nx3*(x2+x1^2)"), 1)
    p = np.array([2, -4, 0, 1, 2, 3, 4], dtype=complex)
    assert np.array_equal(project(p, D), [2, -4, 0])
    D0 = deflate_ideal(xsq_xyz, 0)
    assert np.array_equal(project([1, 2, 3], D0), [1, 2, 3])
    with pytest.raises(DimensionError):
        project([1, 2, 3], D)


def test_construction_is_deterministic(xsq_xyz):
    a, b = deflate_ideal(xsq_xyz, 2), deflate_ideal(xsq_xyz, 2)
    assert a.generators == b.generators and a.ext_ring == b.ext_ring


def test_exponent_order():
    assert exponents_up_to(3, 1) == [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
    assert exponents_up_to(2, 2)[3:] == [(2, 0), (1, 1), (0, 2)]


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------


def subspace_gap(K1, K2):
    """Largest residual of projecting each basis onto the other."""
    r1 = np.linalg.norm(K1 - K2 @ (K2.conj().T @ K1)) if K1.size else 0.0
    r2 = np.linalg.norm(K2 - K1 @ (K1.conj().T @ K2)) if K2.size else 0.0
    return max(r1, r2)


# (G1, point sampler on V(I))
IDEALS = [
    ("x1^2", "x1*x2*x3", lambda r: (0, r[0], r[1])),
    ("x3^2", "x3*(x2+x1^2)", lambda r: (r[0], r[1], 0)),
    ("x1*x2", "x1*x3", lambda r: (0, r[0], r[1])),
    ("x1*x2", "x1*x3", lambda r: (r[0], 0, 0)),
]


@settings(max_examples=100, deadline=None)
@given(st.integers(0, len(IDEALS) - 1), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_generator_independence(which, d, seed):
    f1, f2, sampler = IDEALS[which]
    r = np.random.default_rng(seed)
    x = np.array(sampler(r.standard_normal(2) + 1j * r.standard_normal(2)), dtype=complex)
    g1 = parse(f"vars: x1 x2 x3\n{f1}\n{f2}")
    g2 = parse(f"vars: x1 x2 x3\n{f1}\n{f2}\n{f1} + {f2}\nx1*({f1})")
    K1, _ = numerical_kernel(deflation_matrix_at(g1, d, x))
    K2, _ = numerical_kernel(deflation_matrix_at(g2, d, x))
    assert K1.shape == K2.shape
    assert subspace_gap(K1, K2) < 1e-8


@settings(max_examples=100, deadline=None)
@given(st.integers(0, len(IDEALS) - 1), st.integers(1, 2), st.integers(0, 2**32 - 1))
def test_poly_in_ideal_is_annihilated(which, d, seed):
    f1, f2, sampler = IDEALS[which]
    r = np.random.default_rng(seed)
    s = parse(f"vars: x1 x2 x3\n{f1}\n{f2}")
    x = np.array(sampler(r.standard_normal(2) + 1j * r.standard_normal(2)), dtype=complex)
    g = None
    for f in s.generators:
        for alpha in exponents_up_to(3, 2):
            c = complex(r.standard_normal(), r.standard_normal())
            term = mul_monomial(f, alpha).scale(c)
            g = term if g is None else g + term
    K, _ = numerical_kernel(deflation_matrix_at(s, d, x))
    betas = exponents_up_to(3, d)
    vals = np.array([evaluate(differentiate(g, b), x) for b in betas])
    scale = (1 + g.coeff_norm()) * (1 + np.max(np.abs(x))) ** g.degree
    assert np.max(np.abs(vals @ K)) < 1e-6 * scale
