import numpy as np
import pytest
from numpy.testing import assert_allclose

from blendcop.blend import BlendedModel
from blendcop.errors import ModelNotBuiltError
from blendcop.families import make_copula
from blendcop.quadrature import QuadratureSpec, gauss_legendre
from blendcop.weighting import make_weighting
from oracles import gl_2d

# Frozen oracle values. K values come from the midpoint rule at 1024/2048
# with Richardson extrapolation in 1/n (plain refinement stalls at ~1e-4 on
# the corner ridge); margins from nested trapezoids on a corner-packed grid.
K_POW_ORACLE = 1.01126017  # gumbel(2) tail / gaussian(0.6) body / power(1.5)
F_HALF_ORACLE = 0.49195686  # F_U(0.5) of the same model
Q95_ORACLE = 0.95486492  # F_U^-1(0.95) of the same model
K_EXP_ORACLE = 0.99220406  # gumbel(2)/gaussian(0.6)/exp_complement(1.5)
F09_PDF_ORACLE = 1.01735395  # f_U(0.9) of the exp_complement model
GUMBEL2_CDF_HALF = 0.37521422724648177

TABLE4_CASES = [
    ("gaussian(0.6) tail / frank(2) body", "gaussian", [0.6], "frank", [2.0]),
    ("gumbel(3) tail / frank(1) body", "gumbel", [3.0], "frank", [1.0]),
    ("gaussian(0.5) tail / gumbel(1.2) body", "gaussian", [0.5], "gumbel", [1.2]),
    ("husler_reiss(2) tail / gumbel(2) body", "husler_reiss", [2.0], "gumbel", [2.0]),
]


def build(tail, tparams, body, bparams, wtag="power", theta=1.5, **quad_kw):
    quad = QuadratureSpec(**quad_kw) if quad_kw else None
    return BlendedModel(
        make_copula(tail, tparams), make_copula(body, bparams), make_weighting(wtag, theta), quad
    ).build()


@pytest.fixture(scope="module")
def power_model():
    return build("gumbel", [2.0], "gaussian", [0.6], "power", 1.5)


@pytest.fixture(scope="module")
def exp_model():
    return build("gumbel", [2.0], "gaussian", [0.6], "exp_complement", 1.5)


def test_requires_build():
    m = BlendedModel(
        make_copula("gumbel", [2.0]), make_copula("gaussian", [0.6]), make_weighting("power", 1.5)
    )
    with pytest.raises(ModelNotBuiltError):
        m.cstar_pdf(0.5, 0.5)
    with pytest.raises(ModelNotBuiltError):
        _ = m.norm_constants


def test_norm_constants_against_oracle(power_model, exp_model):
    assert_allclose(power_model.norm_constants[0], K_POW_ORACLE, atol=1e-4)
    assert_allclose(exp_model.norm_constants[0], K_EXP_ORACLE, atol=1e-4)


def test_K_additivity(power_model):
    K, Kt, Kb = power_model.norm_constants
    assert abs(K - (Kt + Kb)) <= 1e-10 * K


def test_degenerate_weight_reduces_to_tail():
    m = build("gumbel", [2.0], "gaussian", [0.6], "power", 1e-12)
    K, Kt, Kb = m.norm_constants
    assert_allclose(Kt, 1.0, atol=1e-5)
    assert abs(Kb) < 1e-5
    tail = make_copula("gumbel", [2.0])
    grid = np.linspace(0.1, 0.9, 7)
    U, V = np.meshgrid(grid, grid, indexing="ij")
    # eps-inset omits O(eps) corner mass from K, hence the 1e-5 slack
    assert_allclose(m.cstar_pdf(U, V), tail.pdf(U, V), rtol=1e-5)
    assert_allclose(m.copula_pdf(U, V), tail.pdf(U, V), rtol=2e-4, atol=1e-4)
    assert_allclose(m.copula_cdf(0.5, 0.5), GUMBEL2_CDF_HALF, atol=1e-3)


def test_identical_components_collapse():
    m = build("gaussian", [0.6], "gaussian", [0.6], "power", 1.7)
    comp = make_copula("gaussian", [0.6])
    assert_allclose(m.norm_constants[0], 1.0, atol=1e-5)
    xs = np.linspace(0.05, 0.95, 19)
    assert_allclose(m.marginal_cdf(0, xs), xs, atol=1e-5)
    assert_allclose(m.marginal_pdf(1, xs), np.ones_like(xs), atol=1e-5)
    assert_allclose(m.marginal_quantile(0, 0.73), 0.73, atol=1e-5)
    U, V = np.meshgrid(xs[::3], xs[::3], indexing="ij")
    assert_allclose(m.copula_pdf(U, V), comp.pdf(U, V), rtol=1e-4)
    assert_allclose(m.copula_cdf(0.3, 0.7), comp.cdf(0.3, 0.7), atol=1e-3)


def test_identical_independence_cdf_example():
    m = build("gaussian", [0.0], "gaussian", [0.0], "power", 1.5)
    assert_allclose(m.copula_cdf(0.3, 0.7), 0.21, atol=1e-3)


def test_cstar_density_formula(power_model):
    K = power_model.norm_constants[0]
    tail = make_copula("gumbel", [2.0])
    body = make_copula("gaussian", [0.6])
    w = make_weighting("power", 1.5)
    pt = (0.5, 0.5)
    pi = w(*pt)
    expected = (pi * tail.pdf(*pt) + (1 - pi) * body.pdf(*pt)) / K_POW_ORACLE
    assert_allclose(power_model.cstar_pdf(*pt), expected, rtol=2e-4)
    assert_allclose(K, K_POW_ORACLE, atol=1e-4)


def test_cstar_integrates_to_one(power_model, exp_model):
    for m in (power_model, exp_model):
        total = gl_2d(lambda u, v: m.cstar_pdf(u, v), n=256, eps=1e-7)
        assert_allclose(total, 1.0, atol=2e-3)


def test_marginal_cdf_against_oracle(power_model):
    assert_allclose(power_model.marginal_cdf(0, 0.5), F_HALF_ORACLE, atol=1e-4)
    assert power_model.marginal_cdf(0, power_model.quad.eps) < 1e-4
    assert power_model.marginal_cdf(0, 1.0 - power_model.quad.eps) > 1.0 - 1e-4
    xs = np.linspace(0.01, 0.99, 50)
    F = power_model.marginal_cdf(0, xs)
    assert np.all(np.diff(F) > 0)


def test_marginal_pdf_against_oracle(exp_model):
    assert_allclose(exp_model.marginal_pdf(0, 0.9), F09_PDF_ORACLE, atol=1e-4)
    xs = np.linspace(0.02, 0.98, 33)
    assert np.all(exp_model.marginal_pdf(0, xs) > 0.0)
    # trapezoid of the cached pdf grid reproduces the cached cdf grid
    ax = exp_model._cache["axes"][0]
    F_trap = np.concatenate(
        [[0.0], np.cumsum(0.5 * (ax.pdf_values[1:] + ax.pdf_values[:-1]) * np.diff(ax.grid))]
    )
    assert np.max(np.abs(F_trap - ax.cdf_values)) < 1e-4


def test_marginal_quantile_against_oracle(power_model):
    assert_allclose(power_model.marginal_quantile(0, 0.95), Q95_ORACLE, atol=2e-4)
    qs = np.linspace(0.01, 0.99, 99)
    x = power_model.marginal_quantile(0, qs)
    back = power_model.marginal_cdf(0, x)
    assert np.max(np.abs(back - qs)) < 1e-4
    with pytest.raises(ValueError):
        power_model.marginal_quantile(0, 1.5)


def test_marginal_quantile_out_of_grid_fallback(power_model):
    ax = power_model._cache["axes"][0]
    q = 0.5 * (ax.cdf_values[-1] + 1.0)  # beyond the cached grid
    x = power_model.marginal_quantile(0, q)
    assert ax.grid[-1] - 1e-4 <= x < 1.0
    assert_allclose(power_model.marginal_survival_exact(0, 1.0 - x), 1.0 - q, rtol=1e-8)


def test_exact_integrals_match_cache(power_model):
    for x in (0.2, 0.5, 0.9):
        assert_allclose(
            power_model.marginal_cdf_exact(0, x), power_model.marginal_cdf(0, x), atol=1e-4
        )
        assert_allclose(
            power_model.marginal_survival_exact(0, 1.0 - x),
            1.0 - power_model.marginal_cdf(0, x),
            atol=1e-4,
        )


def test_copula_pdf_normalises(power_model):
    total = gl_2d(lambda u, v: power_model.copula_pdf(u, v), n=128, eps=1e-6)
    assert_allclose(total, 1.0, atol=2e-3)


def test_copula_uniform_margins(power_model):
    x, w = gauss_legendre(64, 1e-6, 1.0 - 1e-6)
    for u in np.linspace(0.01, 0.99, 99):
        row = power_model.copula_pdf(np.full_like(x, u), x) @ w
        assert abs(row - 1.0) < 5e-3, f"margin at u={u}: {row}"
    for v in np.linspace(0.05, 0.95, 10):
        col = power_model.copula_pdf(x, np.full_like(x, v)) @ w
        assert abs(col - 1.0) < 5e-3


def test_copula_cdf_frechet_and_monotone(power_model):
    grid = np.linspace(0.1, 0.9, 5)
    U, V = np.meshgrid(grid, grid, indexing="ij")
    C = power_model.copula_cdf(U, V)
    assert np.all(C <= np.minimum(U, V) + 1e-6)
    assert np.all(C >= np.maximum(U + V - 1, 0.0) - 1e-6)
    assert np.all(np.diff(C, axis=0) > -1e-9)
    assert np.all(np.diff(C, axis=1) > -1e-9)


def test_joint_upper_survival_matches_brute_force(power_model):
    from blendcop.quadrature import corner_refined

    for r in (0.7, 0.9, 0.99):
        x = power_model.marginal_quantile(0, r)
        xs, xw = corner_refined(16, x, 1.0 - 1e-12)
        vals = power_model.cstar_pdf(xs[:, None], xs[None, :])
        brute = float(xw @ vals @ xw)
        got = power_model.joint_upper_survival(x, x)
        assert_allclose(got, brute, rtol=5e-4)


@pytest.mark.parametrize("label,tt,tp,bt,bp", TABLE4_CASES)
@pytest.mark.parametrize("wtag", ["power", "exp_complement"])
def test_grid_refinement_stability(label, tt, tp, bt, bp, wtag):
    coarse = build(tt, tp, bt, bp, wtag, 1.0)
    fine = build(tt, tp, bt, bp, wtag, 1.0, nodes=128)
    assert abs(coarse.norm_constants[0] - fine.norm_constants[0]) < 1e-5
    grid = np.linspace(0.15, 0.85, 5)
    U, V = np.meshgrid(grid, grid, indexing="ij")
    c0 = coarse.copula_pdf(U, V)
    c1 = fine.copula_pdf(U, V)
    assert np.max(np.abs(c0 / c1 - 1.0)) < 1e-3


def test_save_load_round_trip(tmp_path, power_model):
    path = tmp_path / "model.txt"
    power_model.save(path)
    again = BlendedModel.load(path)
    assert again.tail == power_model.tail
    assert again.body == power_model.body
    assert again.weighting == power_model.weighting
    assert again.quad == power_model.quad
    again.build()
    pts = (np.array([0.3, 0.7]), np.array([0.6, 0.8]))
    assert_allclose(again.copula_pdf(*pts), power_model.copula_pdf(*pts), rtol=1e-12)


def test_with_params(power_model):
    other = power_model.with_params(0.7, (2.5,), (0.3,))
    assert other.params.theta == 0.7
    assert other.tail.params == (2.5,)
    assert other.body.params == (0.3,)
    assert not other.built
