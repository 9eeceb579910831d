import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq, lsq_linear

from tippingscope.errors import (InvalidGeometry, NonPositiveCurrentGeneration, OutOfDomain,
                                 RankDeficient)
from tippingscope.shapefit import (GrowthDataset, SplineFit, build_basis, eval_basis, eval_spline,
                                   fit, ingest_generations, read_dataset_csv, spline_roots)

BASIS = build_basis(3.0, 7.0, 2, 3)


def fit_of(basis, alpha):
    return SplineFit(basis, np.asarray(alpha, dtype=float), 0.0, [])


# --- basis -------------------------------------------------------------------------

def test_knots_of_small_example():
    assert BASIS.knots.tolist() == [0, 1, 2, 3, 4, 5, 6, 7]
    assert BASIS.size == 8


def test_knots_unequal_spacing():
    B = build_basis(45.0, 335.0, 3, 7)
    assert np.allclose(np.diff(B.knots[:5]), 45 / 4)
    assert np.allclose(np.diff(B.knots[4:]), 290 / 8)
    assert B.knots[4] == 45.0 and B.knots[-1] == 335.0


@pytest.mark.parametrize("args", [(0, 1, 1, 1), (2, 1, 1, 1), (1, 2, -1, 0), (1, 2, 1.5, 0),
                                  (1, math.inf, 1, 1)])
def test_invalid_geometry(args):
    with pytest.raises(InvalidGeometry):
        build_basis(*args)


def test_hat_functions():
    B = BASIS
    assert B.second_derivative(1, 0.0) == 2.0
    assert B.second_derivative(1, 1.0) == 0.0
    assert B.second_derivative(2, 1.0) == 1.0   # peak 1/h at t_{i-1}
    assert B.second_derivative(3, 2.0) == 1.0
    assert B.second_derivative(4, 4.0) == -1.0  # -1/h~ at t_i
    assert B.second_derivative(7, 7.0) == -2.0  # -2/h~ at b


@pytest.mark.parametrize("i", [1, 2, 3])
def test_convex_hats_have_unit_mass(i):
    mass = quad(lambda t: BASIS.second_derivative(i, t), 0, 3, points=[1, 2], epsabs=1e-13)[0]
    assert abs(mass - 1.0) < 1e-12


def test_values_and_slopes_at_zero():
    v = eval_basis(BASIS, 0.0)
    s = eval_basis(BASIS, 0.0, 1)
    c = eval_basis(BASIS, 0.0, 2)
    assert np.all(v == 0)
    assert s[0] == 1.0 and np.all(s[1:] == 0)
    assert c[1] == 2.0


def test_second_derivative_matches_hats_by_fd():
    B = build_basis(45.0, 335.0, 3, 7)
    xs = np.linspace(0.5, 334.5, 97)
    e = 1e-3
    fd = (eval_basis(B, xs + e) - 2 * eval_basis(B, xs) + eval_basis(B, xs - e)) / e ** 2
    for i in range(1, B.size):
        assert np.max(np.abs(fd[:, i] - B.second_derivative(i, xs))) < 1e-6


def test_shape_of_individual_functions():
    xs_in = np.linspace(3, 7, 41)
    slopes = eval_basis(BASIS, xs_in, 1)
    for i in BASIS.convex_indices:
        assert np.allclose(slopes[:, i], 1.0, atol=1e-13)
    xs_left = np.linspace(0, 3, 31)
    for i in BASIS.concave_indices:
        assert np.all(eval_basis(BASIS, xs_left)[:, i] == 0)
        assert np.all(BASIS.second_derivative(i, np.linspace(0, 7, 71)) <= 0)


def test_closed_form_equals_double_integral():
    B = build_basis(45.0, 335.0, 3, 7)
    rng = np.random.default_rng(1)
    for x in rng.uniform(0, 335, 20):
        for i in range(1, B.size):
            # C_i(x) = int_0^x (x - t) M_i(t) dt
            pts = [k for k in B.knots if 0 < k < x]
            ref = quad(lambda t: (x - t) * B.second_derivative(i, t), 0, x, points=pts or None,
                       epsabs=1e-12, epsrel=1e-13, limit=200)[0]
            assert abs(eval_basis(B, x)[i] - ref) < 1e-9 * max(1.0, abs(ref))


def test_out_of_domain():
    with pytest.raises(OutOfDomain):
        eval_basis(BASIS, 7.5)
    with pytest.raises(OutOfDomain):
        eval_spline(fit_of(BASIS, np.ones(8)), [-0.1, 1.0])


# --- evaluation --------------------------------------------------------------------------

def test_identity_combination():
    f = fit_of(BASIS, [1, 0, 0, 0, 0, 0, 0, 0])
    xs = np.linspace(0, 7, 15)
    v, d1, d2 = eval_spline(f, xs)
    assert np.allclose(v, xs, atol=1e-15) and np.allclose(d1, 1) and np.allclose(d2, 0)


@given(st.lists(st.floats(-5, 5), min_size=8, max_size=8))
def test_theta_vanishes_at_zero(alpha):
    assert eval_spline(fit_of(BASIS, alpha), 0.0)[0] == 0.0


@given(a0=st.floats(-5, 5), rest=st.lists(st.floats(0, 5), min_size=7, max_size=7))
def test_shape_certificate(a0, rest):
    f = fit_of(BASIS, [a0] + rest)
    h = 1e-4
    left = np.linspace(h, 3 - h, 60)
    right = np.linspace(3 + h, 7 - h, 80)
    sd = lambda x: (eval_spline(f, x + h)[0] - 2 * eval_spline(f, x)[0] + eval_spline(f, x - h)[0]) / h ** 2
    assert np.all(sd(left) >= -1e-6)
    assert np.all(sd(right) <= 1e-6)


# --- ingestion ---------------------------------------------------------------------------

def test_ingest_examples():
    ds = ingest_generations([(10, 10), (10, 20), (10, 0)])
    assert ds.points == [(10.0, 0.0), (10.0, 10 * math.log(2))]
    assert ds.points[1][1] == pytest.approx(6.931471805599453)
    assert ds.excluded_rows == 1
    assert ds.provenance == [(10.0, 10.0), (10.0, 20.0)]


def test_ingest_rejects_nonpositive_current():
    with pytest.raises(NonPositiveCurrentGeneration):
        ingest_generations([(10, 12), (0, 5)])


def test_read_csv_modes(tmp_path):
    p = tmp_path / "gen.csv"
    p.write_text("p_t,p_t1\n10,20\n5,0\n8,8\n", encoding="utf-8")
    ds = read_dataset_csv(str(p))
    assert len(ds) == 2 and ds.excluded_rows == 1
    q = tmp_path / "direct.csv"
    q.write_text("x,y\n1.5,0.25\n2,-1\n", encoding="utf-8")
    ds = read_dataset_csv(str(q))
    assert ds.points == [(1.5, 0.25), (2.0, -1.0)]
    with pytest.raises(ValueError):
        read_dataset_csv(str(q), mode="generations")


# --- fitting ----------------------------------------------------------------------------

def strong_allee_alpha(basis):
    """Feasible coefficients of a spline negative near 0, positive in the
    middle and negative at b (for the a=3, b=7 basis)."""
    alpha = np.empty(basis.size)
    alpha[0] = -1.0
    alpha[1:basis.m + 2] = 1.0
    alpha[basis.m + 2:] = 3.0
    return alpha


def shaped_alpha(basis):
    alpha = np.full(basis.size, 0.01)
    alpha[0] = -0.5
    return alpha


def test_generate_and_recover():
    B = build_basis(45.0, 335.0, 3, 7)
    rng = np.random.default_rng(3)
    alpha = np.concatenate([[-2.0], rng.uniform(0.0, 1.0, B.size - 1)])
    x = rng.uniform(0, 335, 150)
    y = eval_basis(B, x) @ alpha
    f = fit(B, GrowthDataset(x, y))
    assert np.max(np.abs(f.alpha - alpha)) < 1e-8
    assert f.sse < 1e-16


def test_identity_data():
    x = np.linspace(0.5, 7, 40)
    f = fit(BASIS, GrowthDataset(x, x))
    assert f.alpha[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(f.alpha[1:] == 0.0)
    assert f.active_set == list(range(1, 8))


def test_bound_is_hit_exactly():
    x = np.linspace(0.1, 7, 60)
    y = -0.3 * eval_basis(BASIS, x)[:, 2] + 0.5 * x + 0.2 * eval_basis(BASIS, x)[:, 5]
    A = eval_basis(BASIS, x)
    free = np.linalg.lstsq(A, y, rcond=None)[0]
    assert free[2] < 0
    f = fit(BASIS, GrowthDataset(x, y), lb=0.1)
    assert f.alpha[2] == 0.1
    assert f.sse >= float(np.sum((A @ free - y) ** 2))
    assert np.all(f.alpha[1:] >= 0.1 - 1e-12)


@pytest.mark.parametrize("lb", [0.0, 0.1])
def test_matches_scipy_bounded_solver(lb):
    B = build_basis(45.0, 335.0, 3, 7)
    rng = np.random.default_rng(7)
    x = rng.uniform(0, 335, 200)
    y = eval_basis(B, x) @ shaped_alpha(B) + rng.normal(0, 3, 200)
    f = fit(B, GrowthDataset(x, y), lb)
    lo = np.r_[-np.inf, np.full(B.size - 1, lb)]
    ref = lsq_linear(eval_basis(B, x), y, bounds=(lo, np.inf), method="bvls", tol=1e-14)
    assert np.max(np.abs(f.alpha - ref.x)) < 1e-8
    assert f.kkt_residual < 1e-8


def test_kkt_and_perturbation_optimality():
    B = build_basis(45.0, 335.0, 3, 7)
    rng = np.random.default_rng(11)
    x = rng.uniform(0, 335, 200)
    y = eval_basis(B, x) @ shaped_alpha(B) + rng.normal(0, 3, 200)
    f = fit(B, GrowthDataset(x, y), 0.1)
    A = eval_basis(B, x)
    sse = lambda a: float(np.sum((A @ a - y) ** 2))
    free = [i for i in range(B.size) if i not in f.active_set]
    for i in free:
        for step in (1e-4, -1e-4):
            a = f.alpha.copy()
            a[i] += step
            assert sse(a) >= f.sse
    for i in f.active_set:
        a = f.alpha.copy()
        a[i] += 1e-4
        assert sse(a) >= f.sse


def test_rank_deficient():
    x = np.array([1.0, 2.0, 3.0])
    with pytest.raises(RankDeficient):
        fit(BASIS, GrowthDataset(x, x))


@settings(max_examples=20)
@given(seed=st.integers(0, 2 ** 31 - 1))
def test_row_permutation_is_bitwise_invariant(seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 7, 50)
    y = np.sin(x) + rng.normal(0, 0.1, 50)
    f1 = fit(BASIS, GrowthDataset(x, y), 0.0)
    p = rng.permutation(50)
    f2 = fit(BASIS, GrowthDataset(x[p], y[p]), 0.0)
    assert f1.alpha.tobytes() == f2.alpha.tobytes() and f1.sse == f2.sse


# --- roots --------------------------------------------------------------------------------

def test_identity_has_no_roots():
    f = fit_of(BASIS, [1, 0, 0, 0, 0, 0, 0, 0])
    assert spline_roots(f) == [] and f.allee_threshold is None


def test_synthetic_strong_allee_roots():
    alpha = strong_allee_alpha(BASIS)
    f = fit_of(BASIS, alpha)
    roots = spline_roots(f)
    # with theta(0) = 0 these are the three roots of a strong Allee curve
    assert len(roots) == 2
    theta = lambda x: float(eval_basis(BASIS, x) @ alpha)
    xs = np.linspace(1e-3, 7, 7001)
    v = np.array([theta(x) for x in xs])
    ref = [brentq(theta, xs[k], xs[k + 1], xtol=1e-14) for k in np.flatnonzero(v[:-1] * v[1:] < 0)]
    assert np.allclose(roots, ref, atol=1e-8)
    assert f.allee_threshold == roots[0]
    assert f.to_dict()["allee_threshold"] == roots[0]


def test_fit_recovers_allee_threshold():
    alpha = strong_allee_alpha(BASIS)
    x = np.linspace(0.05, 7, 120)
    y = eval_basis(BASIS, x) @ alpha
    f = fit(BASIS, GrowthDataset(x, y))
    assert np.allclose(spline_roots(f), spline_roots(fit_of(BASIS, alpha)), atol=1e-8)
