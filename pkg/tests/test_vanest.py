import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pairform import cochain as C
from pairform import vanest as VE
from pairform.errors import DomainError, ParameterError, PreconditionError
from pairform.forms import elementary_form

coef = st.floats(-2, 2, allow_nan=False).filter(lambda a: abs(a) > 1e-3)
pts = st.floats(-1.5, 1.5, allow_nan=False)


def a0_cochain(n, seed):
    """Normalized even-invariant n-cochain on R^n: an antisymmetric part plus det^2 times a
    symmetric weight, so its leading term is the antisymmetric part alone."""
    r = np.random.default_rng(seed)
    c, b = r.normal(size=2)
    k = r.normal(size=n)
    base = C.Cochain(n, n, lambda P: c * np.cos(P[:, 0] @ k) * np.linalg.det(P[:, 1:] - P[:, :1]))
    alt = C.antisymmetrize(base)

    def ev(P):
        det = np.linalg.det(P[:, 1:] - P[:, :1])
        return alt.evaluate(P) + b * np.exp(np.sin(P.mean(axis=1) @ k)) * det ** 2

    return C.Cochain(n, n, ev, symmetry_tag="even_invariant", normalized=True), alt


def alt_oracle(n, seed, x):
    """Analytic VE of antisym(c cos(k.x0) det[y - x]): the unnormalized det has VE 1 on the
    standard frame, and mean_i cos(k.x_i) -> cos(k.x) on the diagonal."""
    r = np.random.default_rng(seed)
    c, _ = r.normal(size=2)
    k = r.normal(size=n)
    return c * math.cos(float(np.dot(k, x)))


# -- van_est -----------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_det_volume(n):
    x = np.linspace(0.1, 0.7, n)
    assert VE.van_est(C.det_volume(n), x, np.eye(n)) == pytest.approx(1 / math.factorial(n), abs=1e-8)


def test_left_riemann_and_zero():
    f = lambda x: np.exp(x) * np.sin(x)
    for x in (-1.0, 0.0, 0.4, 2.5):
        assert VE.van_est(C.left_riemann(f), [x], [[1.0]]) == pytest.approx(f(x), rel=1e-8)
    assert VE.van_est(C.zero(2, 2), [0.3, 0.2], np.eye(2)) == 0.0


def test_degree_zero_returns_value():
    assert VE.van_est(C.function_cochain(lambda x, y: x * y, 2), [2.0, 3.0]) == 6.0


def test_domain_exit():
    om = C.winding()
    with pytest.raises(DomainError):
        VE.van_est(om, [1.0, 0.0], [[-2.0, 0.0]], h=1.0)


def test_bad_vectors():
    with pytest.raises(ParameterError):
        VE.van_est(C.det_volume(2), [0, 0], [[1, 0]])


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("seed", range(3))
def test_leading_term_analytic(n, seed):
    om, _ = a0_cochain(n, seed)
    x = np.random.default_rng(seed + 10).uniform(-1, 1, n)
    assert VE.van_est(om, x, np.eye(n)) == pytest.approx(alt_oracle(n, seed, x), abs=1e-6)


@settings(max_examples=25, deadline=None)
@given(a=coef, x=pts, y=pts, seed=st.integers(0, 5))
def test_multilinearity(a, x, y, seed):
    om, _ = a0_cochain(2, seed)
    V = np.array([[1.0, 0.3], [-0.2, 0.8]])
    base = VE.van_est(om, [x, y], V)
    for i in range(2):
        W = V.copy()
        W[i] *= a
        assert VE.van_est(om, [x, y], W) == pytest.approx(a * base, abs=1e-6)


@settings(max_examples=25, deadline=None)
@given(x=pts, y=pts, seed=st.integers(0, 5))
def test_antisymmetry(x, y, seed):
    om, _ = a0_cochain(2, seed)
    V = np.array([[0.7, 0.3], [-0.4, 1.1]])
    assert VE.van_est(om, [x, y], V[::-1]) == pytest.approx(-VE.van_est(om, [x, y], V), abs=1e-6)


# -- standard van Est --------------------------------------------------------

def test_standard_examples():
    assert VE.van_est_standard(C.det_volume(2), [0.2, 0.4], np.eye(2)) == pytest.approx(1.0, abs=1e-8)
    om = C.left_riemann(np.cos)
    assert VE.van_est_standard(om, [0.3], [[1.0]]) == VE.van_est(om, [0.3], [[1.0]])
    F = lambda x: x ** 3 - np.sin(x)
    for x in (-0.5, 0.0, 1.2):
        assert VE.van_est_standard(C.antiderivative(F), [x], [[1.0]]) == \
            pytest.approx(3 * x ** 2 - np.cos(x), abs=1e-8)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("seed", range(4))
def test_standard_is_factorial_multiple(n, seed):
    om, _ = a0_cochain(n, seed)
    x = np.random.default_rng(seed).uniform(-1, 1, n)
    V = np.eye(n) + 0.2 * np.random.default_rng(seed + 1).normal(size=(n, n))
    ve = VE.van_est(om, x, V)
    std = VE.van_est_standard(om, x, V)
    assert std == pytest.approx(math.factorial(n) * ve, rel=1e-4)


# -- jet2 --------------------------------------------------------------------

def pair(fn):
    return C.Cochain(1, 1, lambda P: fn(P[:, 0, 0], P[:, 1, 0]))


def test_jet2_examples():
    f, fp = np.sin, np.cos
    for x in (-1.0, 0.3, 2.0):
        j = VE.jet2(pair(lambda a, b: f(a) * (b - a)), x)
        assert j.f_val == pytest.approx(f(x), abs=1e-9) and j.g_val == pytest.approx(0, abs=1e-7)
        j = VE.jet2(pair(lambda a, b: f(b) * (b - a)), x)
        assert j.f_val == pytest.approx(f(x), abs=1e-9) and j.g_val == pytest.approx(fp(x), abs=1e-7)
        j = VE.jet2(pair(lambda a, b: (b - a) ** 2), x)
        assert j.f_val == pytest.approx(0, abs=1e-9) and j.g_val == pytest.approx(1, abs=1e-7)


def test_jet2_precondition():
    with pytest.raises(PreconditionError):
        VE.jet2(pair(lambda a, b: 1 + b - a), 0.0)
    with pytest.raises(ParameterError):
        VE.jet2(C.det_volume(2), 0.0)


@settings(max_examples=30, deadline=None)
@given(a=coef, b=coef, x=pts)
def test_jet2_linear(a, b, x):
    o1 = pair(lambda u, v: np.sin(u) * (v - u) + (v - u) ** 2 * np.cos(v))
    o2 = pair(lambda u, v: np.exp(v) - np.exp(u))
    j1, j2 = VE.jet2(o1, x), VE.jet2(o2, x)
    j = VE.jet2(o1.scaled(a) + o2.scaled(b), x)
    assert j.f_val == pytest.approx(a * j1.f_val + b * j2.f_val, abs=1e-8)
    assert j.g_val == pytest.approx(a * j1.g_val + b * j2.g_val, abs=1e-6)


# -- leading term ------------------------------------------------------------

TS = [2.0 ** -k for k in range(3, 9)]


def slope(om, x):
    res = [VE.leading_term_residual(om, x, t) for t in TS]
    return float(np.polyfit(np.log(TS), np.log(res), 1)[0]), res


def test_leading_term_det_volume_exact():
    for t in TS:
        assert VE.leading_term_residual(C.det_volume(2), [0.3, -0.1], t) == pytest.approx(0, abs=1e-15)


def test_leading_term_cubic():
    s, res = slope(pair(lambda a, b: (b - a) ** 3), [0.4])
    assert np.allclose(res, np.array(TS) ** 3, rtol=1e-6)
    assert s == pytest.approx(3.0, abs=0.01)


def test_leading_term_left_riemann_has_no_remainder():
    # f(x)(y - x) equals its leading term, so the residual is rounding only
    res = [VE.leading_term_residual(C.left_riemann(lambda x: x ** 2), [0.7], t) for t in TS]
    assert max(res) < 1e-9


def test_leading_term_right_riemann_slope():
    s, _ = slope(C.right_riemann(lambda x: x ** 2), [0.7])
    assert s >= 2 - 0.05


def test_leading_term_needs_full_dimension():
    with pytest.raises(ParameterError):
        VE.leading_term_residual(C.antiderivative(np.sin, 2), [0, 0], 0.1)


# -- algebroid differential --------------------------------------------------

def test_ve_delta_commutation_examples():
    assert VE.ve_delta_commutation(C.antiderivative(np.sin), [0.3], [[1.0], [0.5]]) <= 1e-8
    assert VE.ve_delta_commutation(C.zero(1, 2), [0.3, 0.1], np.eye(2)) == 0.0
    alt = C.antisymmetrize(C.left_riemann(np.cos))
    assert VE.ve_delta_commutation(alt, [0.2], [[1.0], [0.7]], h=1e-3) <= 1e-4


def test_ve_delta_commutation_2d():
    # antisym(f(x0) (dx)(y - x)) in R^2; d(f dx) = -f_y dx^dy
    f = lambda x, y: np.sin(x) * np.exp(y)
    om = C.antisymmetrize(C.Cochain(1, 2, lambda P: f(P[:, 0, 0], P[:, 0, 1]) *
                                    (P[:, 1, 0] - P[:, 0, 0])))
    x = [0.3, -0.4]
    assert VE.ve_delta_commutation(om, x, np.eye(2), h=1e-3) <= 1e-4
    # dual route: VE(delta om)(e1, e2) against the analytic 2-form value -f_y/2
    lhs = VE.van_est(C.differential(om), x, np.eye(2), h=1e-3)
    assert lhs == pytest.approx(-0.5 * f(*x), abs=1e-6)


def test_exterior_derivative_of_exact_form_is_zero():
    form = VE.ve_form(C.antiderivative(lambda x, y, z: x * y * z + np.sin(x), 3))
    for V in (np.eye(3)[:2], np.eye(3)[1:]):
        assert abs(VE.exterior_derivative(form, [0.3, 0.5, -0.2], V)) <= 1e-7


@pytest.mark.parametrize("coeffs", [(1.0, 0.0, 0.0), (0.5, -2.0, 1.5)])
def test_poincare_primitive(coeffs):
    a, b, c = coeffs
    omega = (elementary_form([0, 1], 3, a) + elementary_form([1, 2], 3, b)
             + elementary_form([0, 2], 3, c))
    Om = C.convex_hull_cocycle(omega)
    prim = VE.ve_form(C.trivialize(Om, [0.0, 0.0, 0.0]))
    x = np.array([0.3, -0.2, 0.5])
    for i, j in ((0, 1), (1, 2), (0, 2)):
        V = np.eye(3)[[i, j]]
        expected = float(omega(x[None], V[None])[0])
        assert VE.exterior_derivative(prim, x, V) == pytest.approx(expected, abs=1e-4)
