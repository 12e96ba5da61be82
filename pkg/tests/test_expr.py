import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from acopf_tighten.expr import Poly, det2, det3


def fd_gradient(poly, x, h=1e-6):
    g = np.zeros(len(x))
    for i in range(len(x)):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (poly.value(xp) - poly.value(xm)) / (2 * h)
    return g


def fd_hessian(poly, x, h=1e-4):
    n = len(x)
    H = np.zeros((n, n))
    for i in range(n):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        H[i, i] = (poly.value(xp) - 2 * poly.value(x) + poly.value(xm)) / (h * h)
        for j in range(n):
            if j == i:
                continue
            xpp, xpm, xmp, xmm = (x.copy() for _ in range(4))
            xpp[i] += h
            xpp[j] += h
            xmm[i] -= h
            xmm[j] -= h
            xpm[i] += h
            xpm[j] -= h
            xmp[i] -= h
            xmp[j] += h
            H[i, j] = (poly.value(xpp) - poly.value(xpm) - poly.value(xmp) + poly.value(xmm)) / (4 * h * h)
    return H


def dense_grad(poly, x, n):
    g = np.zeros(n)
    for i, v in poly.gradient(x).items():
        g[i] = v
    return g


def dense_hess(poly, x, n):
    H = np.zeros((n, n))
    for (i, j), v in poly.hessian(x).items():
        H[i, j] += v
        if i != j:
            H[j, i] += v
    return H


def random_poly(rng, n, terms=8):
    p = Poly()
    for _ in range(terms):
        deg = rng.integers(0, 4)
        key = tuple(sorted(rng.integers(0, n, size=deg).tolist()))
        p = p + Poly({key: float(rng.normal())})
    return p


def test_algebra_basics():
    x0, x1 = Poly.variable(0), Poly.variable(1)
    p = (x0 + 2.0) * (x1 - 3.0)
    x = [2.0, 5.0]
    assert p.value(x) == pytest.approx((2 + 2) * (5 - 3))
    assert (x0 * x0 * x0).degree() == 3
    with pytest.raises(ValueError):
        _ = (x0 * x0) * (x1 * x1)


def test_substitute_and_remap():
    x0, x1, x2 = (Poly.variable(i) for i in range(3))
    p = x0 * x1 + 2.0 * x2 + 1.0
    q = p.substitute({1: 3.0})
    assert q.value([2.0, 0.0, 5.0]) == pytest.approx(2 * 3 + 10 + 1)
    r = q.remap({0: 0, 2: 1})
    assert r.value([2.0, 5.0]) == pytest.approx(17.0)


def test_ad_matches_finite_differences():
    rng = np.random.default_rng(42)
    n = 6
    for _ in range(25):
        p = random_poly(rng, n)
        x = rng.uniform(0.5, 2.0, size=n)
        g = dense_grad(p, x, n)
        g_fd = fd_gradient(p, x)
        np.testing.assert_allclose(g, g_fd, rtol=1e-6, atol=1e-6)
        H = dense_hess(p, x, n)
        H_fd = fd_hessian(p, x)
        np.testing.assert_allclose(H, H_fd, rtol=1e-4, atol=1e-4)


def hermitian_from_parts(a, b, c, x1, y1, x2, y2, x3, y3):
    return np.array(
        [
            [a, x1 + 1j * y1, x2 + 1j * y2],
            [x1 - 1j * y1, b, x3 + 1j * y3],
            [x2 - 1j * y2, x3 - 1j * y3, c],
        ]
    )


def test_det3_identity_and_rank1():
    vars_ = [Poly.variable(i) for i in range(9)]
    d3 = det3(*vars_)
    # identity block
    assert d3.value([1, 1, 1, 0, 0, 0, 0, 0, 0]) == pytest.approx(1.0)
    # all-ones real block is rank one: determinant zero
    assert d3.value([1, 1, 1, 1, 0, 1, 0, 1, 0]) == pytest.approx(0.0)


@settings(max_examples=200)
@given(st.lists(st.floats(min_value=-2, max_value=2, allow_nan=False), min_size=9, max_size=9))
def test_det3_matches_cofactor_eval(vals):
    a, b, c, x1, y1, x2, y2, x3, y3 = vals
    d3 = det3(*[Poly.variable(i) for i in range(9)])
    M = hermitian_from_parts(a, b, c, x1, y1, x2, y2, x3, y3)
    # cofactor expansion along the first row
    det = (
        M[0, 0] * (M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
        - M[0, 1] * (M[1, 0] * M[2, 2] - M[1, 2] * M[2, 0])
        + M[0, 2] * (M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0])
    )
    assert abs(det.imag) < 1e-12
    assert d3.value(vals) == pytest.approx(det.real, abs=1e-10)


@given(
    st.floats(min_value=0.5, max_value=1.5),
    st.floats(min_value=0.5, max_value=1.5),
    st.floats(min_value=-1.5, max_value=1.5),
    st.floats(min_value=-1.5, max_value=1.5),
)
def test_det2_matches_numpy(a, b, wr, wi):
    d2 = det2(*[Poly.variable(i) for i in range(4)])
    M = np.array([[a, wr + 1j * wi], [wr - 1j * wi, b]])
    assert d2.value([a, b, wr, wi]) == pytest.approx(np.linalg.det(M).real, abs=1e-12)
