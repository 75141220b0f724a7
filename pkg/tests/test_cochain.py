import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pairform import cochain as C
from pairform.errors import DomainError, EvaluationError, ParameterError, SymmetryError
from pairform.forms import elementary_form, volume_form

RNG = np.random.default_rng(1234)
floats = st.floats(-3, 3, allow_nan=False)


def tuples(n_points, d, count=200, seed=0):
    return np.random.default_rng(seed).uniform(-2, 2, (count, n_points, d))


def f_x(P):
    return np.sin(P[:, 0, 0]) + P[:, 0, 0] ** 2


# -- permute -----------------------------------------------------------------

def test_permute_swap_and_identity():
    assert C.permute(("a", "b"), (1, 0)) == ("b", "a")
    assert C.permute((1, 2, 3), (0, 1, 2)) == (1, 2, 3)
    with pytest.raises(ParameterError):
        C.permute((1, 2), (0, 0))


@given(st.permutations(range(5)), st.permutations(range(5)))
def test_permute_composition(sigma, tau):
    t = tuple("abcde")
    assert C.permute(C.permute(t, sigma), tau) == C.permute(t, C.compose(tau, sigma))


# -- (anti)symmetrization ----------------------------------------------------

def test_antisymmetrize_example():
    f = np.cos
    om = C.Cochain(1, 1, lambda P: f(P[:, 0, 0]) * (P[:, 1, 0] - P[:, 0, 0]))
    alt = C.antisymmetrize(om)
    P = tuples(2, 1)
    x, y = P[:, 0, 0], P[:, 1, 0]
    assert np.allclose(alt.evaluate(P), 0.5 * (f(x) + f(y)) * (y - x), atol=1e-14)


def test_antisymmetrize_idempotent_on_antisymmetric():
    om = C.det_volume(2)
    P = tuples(3, 2)
    assert np.allclose(C.antisymmetrize(om).evaluate(P), om.evaluate(P), atol=1e-14)


def test_antisymmetrize_kills_square():
    om = C.Cochain(1, 1, lambda P: (P[:, 1, 0] - P[:, 0, 0]) ** 2)
    assert np.allclose(C.antisymmetrize(om).evaluate(tuples(2, 1)), 0.0)


def even_invariant_sample(seed):
    """Normalized, even-invariant 2-cochain on R^2: antisymmetric plus symmetric part."""
    r = np.random.default_rng(seed)
    a, b = r.normal(size=2)

    def ev(P):
        E = P[:, 1:, :] - P[:, :1, :]
        det = np.linalg.det(E)
        m = P.mean(axis=1)
        # cyclic-invariant weight: invariant under even permutations only
        cyc = P[:, 0, 0] * P[:, 1, 1] + P[:, 1, 0] * P[:, 2, 1] + P[:, 2, 0] * P[:, 0, 1]
        return a * det * np.cos(cyc) + b * det ** 2 * np.exp(m[:, 0])

    return C.Cochain(2, 2, ev, symmetry_tag="even_invariant", normalized=True)


@pytest.mark.parametrize("seed", range(5))
def test_even_invariant_decomposition(seed):
    om = even_invariant_sample(seed)
    P = tuples(3, 2, seed=seed)
    C.check_symmetry(om, P)
    C.check_normalized(om, P)
    total = C.antisymmetrize(om).evaluate(P) + C.symmetrize(om).evaluate(P)
    assert np.allclose(total, om.evaluate(P), atol=1e-12, rtol=0)


def test_check_symmetry_flags_violation():
    bad = C.Cochain(1, 1, lambda P: P[:, 0, 0] * (P[:, 1, 0] - P[:, 0, 0]),
                    symmetry_tag="completely_antisymmetric")
    with pytest.raises(SymmetryError):
        C.check_symmetry(bad, tuples(2, 1))
    notnorm = C.Cochain(1, 1, lambda P: 1.0 + 0 * P[:, 0, 0], normalized=True)
    with pytest.raises(SymmetryError):
        C.check_normalized(notnorm, tuples(2, 1))


@pytest.mark.parametrize("om,P", [
    (C.det_volume(2), tuples(3, 2)),
    (C.antiderivative(np.sin), tuples(2, 1)),
    (C.winding(), tuples(2, 2, seed=3) * 0.2 + 1),
    (C.density_measure(lambda x, y: 1 + x * x, 2), tuples(3, 2)),
    (C.euler(2, 2), tuples(3, 2)),
    (C.dirac([0.0, 0.0], 2), np.zeros((4, 3, 2))),
    (C.convex_hull_cocycle(elementary_form([0, 1], 3, lambda x, y, z: x * z)), tuples(3, 3)),
    (C.random_antisymmetric(2, 2, 5), tuples(3, 2)),
])
def test_builtin_tags_hold(om, P):
    C.check_symmetry(om, P)
    if om.normalized:
        C.check_normalized(om, P)


# -- differential ------------------------------------------------------------

def test_differential_of_function():
    F = C.function_cochain(np.exp)
    P = tuples(2, 1)
    assert np.allclose(C.differential(F).evaluate(P), np.exp(P[:, 1, 0]) - np.exp(P[:, 0, 0]))


@pytest.mark.parametrize("om", [
    C.function_cochain(np.sin),
    C.Cochain(1, 2, lambda P: np.sin(P[:, 0, 0] * P[:, 1, 1]) + P[:, 1, 0] ** 3),
    C.Cochain(2, 1, lambda P: np.cos(P[:, 0, 0] - 2 * P[:, 2, 0]) * P[:, 1, 0]),
])
def test_delta_squared_zero(om):
    dd = C.differential(C.differential(om))
    P = tuples(om.degree + 3, om.ambient_dim)
    assert np.max(np.abs(dd.evaluate(P))) <= 1e-12


def test_delta_commutes_with_antisymmetrization():
    om = C.Cochain(1, 2, lambda P: np.sin(P[:, 0, 0]) * (P[:, 1, 1] - P[:, 0, 1]) + P[:, 1, 0])
    P = tuples(3, 2)
    a = C.antisymmetrize(C.differential(om)).evaluate(P)
    b = C.differential(C.antisymmetrize(om)).evaluate(P)
    assert np.allclose(a, b, atol=1e-12)


def test_is_cocycle_examples():
    P = tuples(3, 1, count=10_000)
    rep = C.is_cocycle(C.antiderivative(lambda x: x ** 3 - np.sin(x)), P, tol=1e-12)
    assert rep.passed and rep.max_residual <= 1e-12 and rep.n_samples == 10_000
    nonclosed = C.left_riemann(lambda x: x ** 2)
    rep = C.is_cocycle(nonclosed, np.array([[[0.0], [1.0], [2.0]]]))
    # delta(f(x)(y-x)) at (0,1,2) = f(1)*1 - f(0)*2 + f(0)*1 = 1
    assert rep.max_residual == pytest.approx(1.0) and not rep.passed
    assert C.is_cocycle(C.zero(1), lambda: P).max_residual == 0.0


def test_is_cocycle_domain_error():
    P = np.array([[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]])
    with pytest.raises(DomainError):
        C.is_cocycle(C.winding(), P)


# -- trivialize --------------------------------------------------------------

def test_trivialize_antiderivative():
    F = lambda x: x ** 3 + 1
    om = C.antiderivative(F)
    tm = C.trivialize(om, 0.0)
    X = tuples(1, 1)
    assert np.allclose(tm.evaluate(X), F(X[:, 0, 0]) - F(0.0))
    P = tuples(2, 1)
    assert np.allclose(C.differential(tm).evaluate(P), om.evaluate(P), atol=1e-12)


def test_trivialize_zero():
    assert np.all(C.trivialize(C.zero(2, 2), [0, 0]).evaluate(tuples(2, 2)) == 0)


def test_trivialize_convex_hull_area():
    om = C.convex_hull_cocycle(elementary_form([0, 1], 2))
    tm = C.trivialize(om, [0.0, 0.0])
    P = tuples(3, 2)
    assert np.allclose(C.differential(tm).evaluate(P), om.evaluate(P), atol=1e-10)
    # oracle: signed triangle area
    E = P[:, 1:] - P[:, :1]
    assert np.allclose(om.evaluate(P), 0.5 * np.linalg.det(E), atol=1e-14)


def test_trivialize_general_cocycle():
    # d((1 + z) dx^dy) = dz^dx^dy, so this form is not closed
    form = elementary_form([0, 1], 3, lambda x, y, z: 1 + z) + elementary_form([1, 2], 3, 2.0)
    # each coefficient omits the variable that would make d nonzero, and is polynomial so the
    # quadrature is exact
    closed = elementary_form([0, 1], 3, lambda x, y, z: 1 + x * y) + \
        elementary_form([1, 2], 3, lambda x, y, z: y * z ** 2)
    om = C.convex_hull_cocycle(closed)
    P = tuples(4, 3, count=100) * 0.5
    assert C.is_cocycle(om, P, tol=1e-12).passed
    assert not C.is_cocycle(C.convex_hull_cocycle(form, quad_degree=9), P, tol=1e-6).passed
    tm = C.trivialize(om, [0.1, -0.2, 0.3])
    Q = tuples(3, 3, count=100) * 0.5
    assert np.allclose(C.differential(tm).evaluate(Q), om.evaluate(Q), atol=1e-10)


def test_trivialize_locality():
    tm = C.trivialize(C.winding(), [1.0, 0.0])
    with pytest.raises(DomainError):
        tm(np.array([-1.0, 0.0]))
    with pytest.raises(ParameterError):
        C.trivialize(C.function_cochain(np.sin), [0.0])


# -- pullback ----------------------------------------------------------------

def test_pullback_identity():
    om = C.det_volume(2)
    P = tuples(3, 2)
    assert np.array_equal(C.pullback(om, lambda X: X, 2).evaluate(P), om.evaluate(P))


def test_pullback_telescopes_for_rough_path():
    r = np.random.default_rng(9)
    ts = np.linspace(0, 1, 200)
    vals = np.cumsum(r.normal(size=200)) * 0.1
    phi = C.SampledPath(ts, vals)
    F = lambda x: np.cos(3 * x) + x
    pb = C.pullback(C.antiderivative(F), phi, 1)
    grid = np.sort(np.concatenate([[0, 1], r.uniform(0, 1, 50)]))
    P = np.stack([grid[:-1], grid[1:]], 1)[:, :, None]
    assert math.fsum(pb.evaluate(P)) == pytest.approx(F(vals[-1]) - F(vals[0]), abs=1e-12)


def test_pullback_left_riemann_stieltjes():
    ts = np.linspace(0, 1, 11)
    vals = ts ** 2
    phi = C.SampledPath(ts, vals)
    om = C.left_riemann(np.exp)
    pb = C.pullback(om, phi, 1)
    P = np.stack([ts[:-1], ts[1:]], 1)[:, :, None]
    expected = np.exp(vals[:-1]) * np.diff(vals)
    assert np.allclose(pb.evaluate(P), expected, atol=1e-15)


def test_pullback_undefined_point():
    phi = C.SampledPath(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    pb = C.pullback(C.antiderivative(np.sin), phi, 1)
    with pytest.raises(EvaluationError):
        pb(0.5, 1.5)

    def boom(X):
        raise RuntimeError("nope")

    with pytest.raises(EvaluationError):
        C.pullback(C.antiderivative(np.sin), boom, 1)(0.0, 1.0)


# -- builtins ----------------------------------------------------------------

def test_builtin_examples():
    assert C.det_volume(2)([0, 0], [1, 0], [0, 1]) == pytest.approx(0.5)
    assert C.builtin("antiderivative", np.sin)(0, math.pi / 2) == pytest.approx(1.0)
    assert C.euler(2)(0.3, 0.3, 0.3) == 1.0
    assert C.euler(1)(0.3, 0.4) == -1.0
    assert C.euler(2)(0.3, 0.4, 0.5) == 1.0
    assert C.dirac([1.0])(1.0) == 1.0 and C.dirac([1.0])(1.5) == 0.0
    with pytest.raises(ParameterError):
        C.builtin("nonexistent")


def test_left_riemann_value():
    om = C.left_riemann(lambda x, y: x + 2 * y, 2)
    assert om([1, 1], [2, 1], [1, 3]) == pytest.approx(3 * 0.5 * 2)


def test_density_measure_oracle():
    h = lambda x, y: x * y + 1
    om = C.density_measure(h, 2)
    P = tuples(3, 2, count=20)
    # oracle: integral of x*y + 1 over a triangle via vertex/edge-midpoint formula (exact for
    # quadratics): area/3 * sum h(edge midpoints)
    area = 0.5 * np.abs(np.linalg.det(P[:, 1:] - P[:, :1]))
    mids = (P + np.roll(P, -1, axis=1)) / 2
    oracle = area / 3 * h(mids[..., 0], mids[..., 1]).sum(axis=1)
    assert np.allclose(om.evaluate(P), oracle, rtol=1e-12)
    # embedded 1-simplices in R^2: length-weighted
    seg = C.density_measure(1.0, 1, 2)
    assert seg([0, 0], [3, 4]) == pytest.approx(5.0)


def test_convex_hull_degenerate_is_zero():
    om = C.convex_hull_cocycle(volume_form(2, lambda x, y: np.exp(x)))
    assert om([0, 0], [1, 1], [2, 2]) == 0.0
    assert om([0, 0], [0, 0], [1, 3]) == 0.0


def test_convex_hull_polynomial_oracle():
    om = C.convex_hull_cocycle(volume_form(2, lambda x, y: x))
    P = tuples(3, 2, count=30)
    signed = 0.5 * np.linalg.det(P[:, 1:] - P[:, :1])
    assert np.allclose(om.evaluate(P), signed * P[:, :, 0].mean(axis=1), rtol=1e-12)


def test_winding_quarter_turn():
    assert C.winding()([1, 0], [0, 1]) == pytest.approx(math.pi / 2)
    assert C.winding()([0, 1], [1, 0]) == pytest.approx(-math.pi / 2)


def test_relative_cochain_degrees():
    C.RelativeCochain(C.det_volume(2), C.winding())
    with pytest.raises(ParameterError):
        C.RelativeCochain(C.det_volume(2), C.function_cochain(np.sin, 2))
    with pytest.raises(ParameterError):
        C.RelativeCochain(C.antiderivative(np.sin), C.function_cochain(np.sin, 2))


def test_shape_errors():
    with pytest.raises(ParameterError):
        C.det_volume(2).evaluate(np.zeros((3, 3)))
    with pytest.raises(ParameterError):
        C.Cochain(1, 1, lambda P: 0, locality_radius=0)


@settings(max_examples=40)
@given(a=floats, b=floats, x=floats, y=floats)
def test_linear_combination(a, b, x, y):
    om = C.antiderivative(np.sin).scaled(a) + C.antiderivative(np.cos).scaled(b)
    assert om(x, y) == pytest.approx(a * (np.sin(y) - np.sin(x)) + b * (np.cos(y) - np.cos(x)),
                                     abs=1e-12)
