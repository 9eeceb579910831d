import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from tippingscope.bifurcation import (bounded_linear_solution, classify_order, classify_region,
                                      compute_mu, dconcavity_band, default_horizon,
                                      find_lambda_pair, inflection_curve, mu_cosine_closed_form,
                                      region_map)
from tippingscope.errors import BadBracket, NonDecayingKernel
from tippingscope.models import AlleePredationModel, Decomposition, PeriodicModel
from tippingscope.poincare import find_fixed_points

TWO_PI = 2 * math.pi
const = lambda v: (lambda s: np.full(np.shape(s), float(v)))


# --- bounded linear solution ----------------------------------------------------

@given(c0=st.floats(-5, 5), d0=st.floats(0.05, 3), lam=st.floats(-2, 2))
def test_constant_coefficients(c0, d0, lam):
    b, bound = bounded_linear_solution(const(c0), const(d0), lam, 0.0)
    assert abs(b + (c0 + lam) / d0) < 1e-10 * max(1.0, abs(c0 + lam) / d0)
    assert bound < 1e-10


def test_cosine_forcing_closed_form():
    d = 0.1
    for t in (0.0, 0.7, 3.0):
        b, _ = bounded_linear_solution(np.cos, const(d), 0.0, t)
        exact = -(d * math.cos(t) - math.sin(t)) / (d * d + 1)
        assert abs(b - exact) < 1e-9
    b0, _ = bounded_linear_solution(np.cos, const(d), 0.0, 0.0)
    assert b0 == pytest.approx(-0.0990099009900990, abs=1e-9)


def test_cosine_forcing_against_scipy_quad():
    d = 0.1
    H = default_horizon(const(d))
    ref = -quad(lambda s: math.exp(-d * s) * math.cos(s), 0, H, limit=2000)[0]
    b, _ = bounded_linear_solution(np.cos, const(d), 0.0, 0.0)
    assert abs(b - ref) < 1e-9


def test_default_horizon_value():
    assert default_horizon(const(0.1)) == pytest.approx(-math.log(1e-13) / 0.1)


def test_affinity_in_lambda():
    d = lambda s: 0.1 + 0.05 * np.sin(s)
    c = lambda s: np.cos(s) + 0.3 * np.sin(2 * s)
    lams = np.linspace(-1, 1, 5)
    vals = np.array([bounded_linear_solution(c, d, lam, 0.4)[0] for lam in lams])
    coef = np.polyfit(lams, vals, 1)
    assert np.max(np.abs(np.polyval(coef, lams) - vals)) < 1e-9


def test_non_decaying_kernel():
    with pytest.raises(NonDecayingKernel):
        bounded_linear_solution(np.cos, const(-0.1), 0.0, 0.0)
    with pytest.raises(NonDecayingKernel):
        bounded_linear_solution(np.cos, const(0.1), 0.0, 0.0, horizon=10.0)


# --- mu thresholds ----------------------------------------------------------------

def test_mu_cosine_published_value():
    mu = compute_mu(np.cos, const(0.1))
    assert mu.mu_minus == pytest.approx(0.0995037190209989, abs=1e-7)
    assert mu.mu_plus == pytest.approx(-0.0995037190209989, abs=1e-7)
    assert mu.mu_plus <= mu.mu_minus


@pytest.mark.parametrize("d", [0.05, 0.1, 0.5])
def test_mu_quadrature_vs_closed_form(d):
    q = compute_mu(np.cos, const(d))
    c = mu_cosine_closed_form(d)
    assert c.mu_minus == d / math.sqrt(d * d + 1)
    assert abs(q.mu_minus - c.mu_minus) < 1e-7 and abs(q.mu_plus - c.mu_plus) < 1e-7


def test_mu_constant_forcing():
    mu = compute_mu(const(0.25), const(0.1))
    assert mu.mu_minus == pytest.approx(-0.25, abs=1e-12)
    assert mu.mu_plus == pytest.approx(-0.25, abs=1e-12)


def test_mu_grid_off_extremum_is_polished():
    # an 7-point grid misses the extremal phase; polishing recovers it
    grid = np.linspace(0, TWO_PI, 8)[:-1] + 0.2
    mu = compute_mu(np.cos, const(0.1), grid)
    assert abs(mu.mu_minus - mu_cosine_closed_form(0.1).mu_minus) < 1e-7


# --- lambda values and ordering -------------------------------------------------------

def test_lambda_pair_signs_o4():
    lp = find_lambda_pair(PeriodicModel(0.1, 0.05, 0.05), tol=1e-3)
    assert lp.lambda_minus < 0 < lp.lambda_plus
    assert lp.bracket_width <= 1e-3


def test_lambda_pair_signs_o5():
    lp = find_lambda_pair(PeriodicModel(0.1, 0.5, 0.5), tol=1e-3)
    assert lp.lambda_plus < 0 < lp.lambda_minus


def test_lambda_pair_bad_bracket():
    with pytest.raises(BadBracket):
        find_lambda_pair(PeriodicModel(0.1, 0.05, 0.05), search=(0.5, 1.0), tol=1e-2)
    with pytest.raises(BadBracket):
        find_lambda_pair(PeriodicModel(0.1, 0.05, 0.05), search=(1.0, 1.0))


def test_count_is_monotone_step_in_lambda():
    m = PeriodicModel(0.1, 0.05, 0.05, split="minus")
    counts = [find_fixed_points(m.with_lambda(l).field).count for l in np.linspace(-0.4, 0.4, 50)]
    assert counts[0] == 0 and counts[-1] == 2
    assert all(b >= a for a, b in zip(counts, counts[1:]))
    assert set(counts) <= {0, 1, 2}


def test_fixed_points_move_apart_with_lambda():
    m = PeriodicModel(0.1, 0.05, 0.05, split="minus")
    lams = np.linspace(0.0, 0.3, 7)
    pts = [find_fixed_points(m.with_lambda(l).field).points for l in lams]
    rep = [p[0].x for p in pts]
    att = [p[1].x for p in pts]
    assert all(b > a + 1e-8 for a, b in zip(att, att[1:]))
    assert all(b < a - 1e-8 for a, b in zip(rep, rep[1:]))


def test_repulsive_fixed_point_equals_linear_solution():
    d = 0.1
    mu = mu_cosine_closed_form(d)
    m = PeriodicModel(d, 0.05, 0.05, split="minus")
    for lam in (mu.mu_minus + 0.05, mu.mu_minus + 0.2):
        r = find_fixed_points(m.with_lambda(lam).field).points[0]
        b, _ = bounded_linear_solution(np.cos, const(d), lam, 0.0)
        assert b < 0 and abs(r.x - b) < 1e-7


@pytest.mark.parametrize("gm,gp,case", [
    (0.005, 0.005, "O1"), (0.05, 0.005, "O2"), (0.005, 0.05, "O3"),
    (0.05, 0.05, "O4"), (0.5, 0.5, "O5")])
def test_classify_order(gm, gp, case):
    assert classify_order(0.1, gm, gp).case == case


def test_classify_order_grid_invariance():
    for gm, gp in [(0.05, 0.005), (0.5, 0.5)]:
        assert classify_order(0.1, gm, gp, omega_grid=100).case == \
            classify_order(0.1, gm, gp, omega_grid=400).case


# --- Allee model: inflection, regions -----------------------------------------------

def test_inflection_curve_signs():
    grid = np.linspace(0, TWO_PI, 100, endpoint=False)
    cur = inflection_curve(AlleePredationModel(), grid)
    assert not cur.failures
    assert np.all((cur.b > 0) & (cur.b < 50))
    assert np.all(cur.h_yyy < 0) and np.all(cur.h_y > 0)
    assert cur.b[0] == pytest.approx(3.22683, abs=1e-5)


def test_classify_region_defaults():
    rc = classify_region(AlleePredationModel(), 39.3, 39.2)
    assert (rc.n_roots, rc.concave_convex, rc.d_concave) == (3, True, False)


def test_classify_region_no_predation():
    assert classify_region(AlleePredationModel(), 39.3, 0.0).n_roots == 3


def _positive_roots_by_quartic(K, Dl, r=3.0, S=0.3, b=620.0):
    # h / y cleared of denominators: r (K - y)(y - S)(b + y^2) - Dl K^2 y
    p = r * np.polymul(np.polymul([-1.0, K], [1.0, -S]), [1.0, 0.0, b])
    p = np.polysub(p, [Dl * K * K, 0.0])
    return sorted(z.real for z in np.roots(p) if abs(z.imag) < 1e-9 and z.real > 0)


def test_root_count_along_orbit_matches_quartic():
    m = AlleePredationModel()
    for w in np.linspace(0, TWO_PI, 90, endpoint=False):
        K, Dl = 39.3 + math.cos(w), 39.2 + math.sin(w)
        expected = 1 + len(_positive_roots_by_quartic(K, Dl))
        assert classify_region(m, K, Dl).n_roots == expected


def test_orbit_leaves_three_root_region():
    # at omega = 1 the positive root pair has vanished
    assert _positive_roots_by_quartic(39.3 + math.cos(1.0), 39.2 + math.sin(1.0)) == []
    assert classify_region(AlleePredationModel(), 39.3 + math.cos(1.0), 39.2 + math.sin(1.0)).n_roots == 1


def test_region_map_shape_and_threads():
    m = AlleePredationModel()
    Ks, Ds, c1 = region_map(m, grid=(6, 5), threads=1)
    _, _, c2 = region_map(m, grid=(6, 5), threads=3)
    assert len(Ks) == 6 and len(Ds) == 5
    assert c1 == c2
    assert Ks[0] == pytest.approx(38.3 + 2.0 / 12)


# --- d-concavity band ---------------------------------------------------------------------

def _poly_dec(g3):
    z = lambda t: 0.0
    return Decomposition(z, z, lambda t, x: 0.0, lambda t, x: 0.0, lambda t, x: g3(x))


def test_band_cubic_is_global():
    band = dconcavity_band(_poly_dec(lambda x: -6.0), np.linspace(0, 1, 3), x_max=10)
    assert np.all(band.alpha == -10) and np.all(band.beta == 10)
    assert np.all(band.alpha_star == -10) and np.all(band.beta_star == 10)


def test_band_quintic():
    # g = -x^5 has g_xxx = -60 x^2 <= 0
    band = dconcavity_band(_poly_dec(lambda x: -60 * x * x), [0.0], x_max=10)
    assert band.alpha[0] == -10 and band.beta[0] == 10


def test_band_one_sided():
    # g = -x^6/2 has g_xxx = -60 x^3, positive for x < 0
    band = dconcavity_band(_poly_dec(lambda x: -60 * x ** 3), [0.0], x_max=10)
    assert band.alpha[0] == 0 and band.alpha_star[0] == 0
    assert band.beta[0] == 10


@settings(max_examples=25)
@given(root=st.floats(-5, 5), scale=st.floats(0.1, 3))
def test_band_ordering(root, scale):
    # g_xxx changes sign at x = root
    band = dconcavity_band(_poly_dec(lambda x: scale * (x - root) * (1 if root < 0 else -1)),
                           [0.0, 1.0], x_max=8, n=400)
    for i in range(2):
        assert band.alpha[i] <= band.alpha_star[i] <= 0 <= band.beta_star[i] <= band.beta[i]
