"""Variational mean quadratures against closed forms and adaptive oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from ohlab import numkit, pwmean

GRID_1024 = numkit.make_grid(1024)
GRID_2048 = numkit.make_grid(2048)


def _random_unitary(rng, m):
    q, _ = np.linalg.qr(rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
    return q


def _scalar_pair(a, b):
    return pwmean.CommutingPair(np.eye(1), np.array([a]), np.array([b]))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 100.0), st.floats(0.01, 100.0))
def test_scalar_primal_and_dual_hit_geometric_mean(a, b):
    pair = _scalar_pair(a, b)
    x = np.ones(1)
    target = np.sqrt(a * b)
    assert pwmean.pw_primal(pair, x, GRID_1024) == pytest.approx(target, rel=1e-9)
    assert pwmean.pw_dual(pair, x, GRID_1024) == pytest.approx(target, rel=1e-9)


def test_scalar_adaptive_quad_oracle():
    # independent adaptive quadrature of the same integrand, with the
    # endpoint weight handled by quad's algebraic-singularity mode
    a, b = 0.7, 13.0
    f = lambda t: 1.0 / (t / a + (1.0 - t) / b)
    val, err = quad(f, 0.0, 1.0, weight="alg", wvar=(-0.5, -0.5))
    val /= np.pi
    assert err < 1e-6
    assert val == pytest.approx(np.sqrt(a * b), rel=1e-9)
    pair = _scalar_pair(a, b)
    assert pwmean.pw_primal(pair, np.ones(1), GRID_2048) == pytest.approx(val, rel=1e-9)


def test_per_eigenvector_product_identity():
    # primal(v_i) * dual(v_i) = a_i b_i exactly, on any grid however coarse
    rng = np.random.default_rng(7)
    basis = _random_unitary(rng, 3)
    pair = pwmean.CommutingPair(basis, np.array([1.0, 3.0, 1e5]), np.array([2.0, 1e-4, 7.0]))
    coarse = numkit.make_grid(16)
    for i in range(3):
        v = basis[:, i]
        p = pwmean.pw_primal(pair, v, coarse)
        d = pwmean.pw_dual(pair, v, coarse)
        assert p * d == pytest.approx(pair.a_eigs[i] * pair.b_eigs[i], rel=1e-12)


def test_stiff_scalar_gap_shrinks():
    a, b = 1.0, 1e5
    pair = _scalar_pair(a, b)
    x = np.ones(1)
    target = np.sqrt(a * b)
    gaps = []
    for res in (256, 512, 1024, 2048):
        g = numkit.make_grid(res)
        gaps.append(abs(pwmean.pw_primal(pair, x, g) - pwmean.pw_dual(pair, x, g)))
    assert all(gaps[i + 1] < gaps[i] for i in range(3))
    assert gaps[-1] / target < 1e-8
    p = pwmean.pw_primal(pair, x, GRID_2048)
    assert abs(p - target) / target < 1e-8


def test_stiff_matrix_pair_brackets_geomean():
    rng = np.random.default_rng(8)
    basis = _random_unitary(rng, 4)
    a = np.exp(rng.uniform(-1, 1, 4))
    b = np.exp(rng.uniform(-1, 1, 4))
    b[0] = a[0] * 1e5
    pair = pwmean.CommutingPair(basis, a, b)
    x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    x /= np.linalg.norm(x)
    exact = pwmean.geomean_form(pair, x)
    gaps = []
    for res in (256, 512, 1024, 2048):
        g = numkit.make_grid(res)
        gaps.append(abs(pwmean.pw_primal(pair, x, g) - pwmean.pw_dual(pair, x, g)))
    assert all(gaps[i + 1] < gaps[i] for i in range(3))
    assert pwmean.pw_primal(pair, x, GRID_2048) == pytest.approx(exact, rel=1e-3)
    assert pwmean.pw_dual(pair, x, GRID_2048) == pytest.approx(exact, rel=1e-3)


def test_swap_symmetry_and_scale_slide():
    rng = np.random.default_rng(9)
    basis = _random_unitary(rng, 3)
    a = np.array([0.5, 2.0, 9.0])
    b = np.array([4.0, 0.3, 1.0])
    x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    pair = pwmean.CommutingPair(basis, a, b)
    swapped = pwmean.CommutingPair(basis, b, a)
    g = numkit.make_grid(512)
    assert pwmean.pw_primal(pair, x, g) == pytest.approx(
        pwmean.pw_primal(swapped, x, g), rel=1e-12)
    # the geometric mean only sees the product a_i b_i
    slid = pwmean.CommutingPair(basis, 4.0 * a, b / 4.0)
    assert pwmean.pw_primal(slid, x, GRID_2048) == pytest.approx(
        pwmean.pw_primal(pair, x, GRID_2048), rel=1e-10)


def test_from_matrices_roundtrip():
    rng = np.random.default_rng(10)
    basis = _random_unitary(rng, 4)
    a_eigs = np.array([0.2, 1.0, 3.0, 8.0])
    b_eigs = np.array([5.0, 0.1, 2.0, 2.0])
    a = (basis * a_eigs) @ basis.conj().T
    b = (basis * b_eigs) @ basis.conj().T
    pair = pwmean.CommutingPair.from_matrices(a, b)
    assert np.linalg.norm(pair.a_matrix() - a) < 1e-10
    assert np.linalg.norm(pair.b_matrix() - b) < 1e-10
    x = rng.standard_normal(4)
    expect = float(x @ ((basis * np.sqrt(a_eigs * b_eigs)) @ basis.conj().T @ x).real)
    assert pwmean.geomean_form(pair, x) == pytest.approx(expect, rel=1e-12)


def test_from_matrices_degenerate_cluster():
    # degenerate block of A forces the re-diagonalization of B inside it
    rng = np.random.default_rng(11)
    basis = _random_unitary(rng, 3)
    a = (basis * np.array([1.0, 1.0, 2.0])) @ basis.conj().T
    b = (basis * np.array([3.0, 4.0, 5.0])) @ basis.conj().T
    pair = pwmean.CommutingPair.from_matrices(a, b)
    assert np.linalg.norm(pair.a_matrix() - a) < 1e-9
    assert np.linalg.norm(pair.b_matrix() - b) < 1e-9


def test_from_matrices_rejects_noncommuting():
    a = np.diag([1.0, 2.0])
    b = np.array([[1.0, 0.5], [0.5, 1.0]])
    with pytest.raises(ValueError, match="commute"):
        pwmean.CommutingPair.from_matrices(a, b)


def test_pair_validation():
    with pytest.raises(ValueError, match="unitary"):
        pwmean.CommutingPair(2 * np.eye(2), np.ones(2), np.ones(2))
    with pytest.raises(ValueError, match="positive"):
        pwmean.CommutingPair(np.eye(2), np.array([1.0, -1.0]), np.ones(2))
    with pytest.raises(ValueError):
        pwmean.CommutingPair(np.eye(2), np.ones(3), np.ones(2))
    with pytest.raises(ValueError):
        pwmean.pw_primal(_scalar_pair(1.0, 1.0), np.ones(2), GRID_1024)


def test_dual_reg_and_underflow():
    pair = _scalar_pair(2.0, 3.0)
    x = np.ones(1)
    base = pwmean.pw_dual(pair, x, GRID_1024)
    assert pwmean.pw_dual(pair, x, GRID_1024, reg=0.1) < base
    with pytest.raises(ValueError):
        pwmean.pw_dual(pair, x, GRID_1024, reg=-1.0)
    extreme = _scalar_pair(1e300, 1e-300)
    with pytest.raises(RuntimeError, match="spread"):
        pwmean.pw_dual(extreme, x, numkit.make_grid(64))


def test_alpha_half_is_the_base_measure():
    rng = np.random.default_rng(12)
    basis = _random_unitary(rng, 3)
    pair = pwmean.CommutingPair(basis, np.array([1.0, 2.0, 5.0]), np.array([3.0, 0.4, 5.0]))
    x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    am = pwmean.alpha_mean(pair, 0.5, x, GRID_1024)
    assert am == pytest.approx(pwmean.pw_primal(pair, x, GRID_1024), rel=1e-14)


def test_alpha_quarter_frozen_value():
    # a = 1, b = 16, alpha = 1/4: a^{3/4} b^{1/4} = 2
    pair = _scalar_pair(1.0, 16.0)
    val = pwmean.alpha_mean(pair, 0.25, np.ones(1), GRID_1024)
    assert abs(val - 2.0) / 2.0 < 5e-7


def test_alpha_mean_matrix_case():
    rng = np.random.default_rng(13)
    basis = _random_unitary(rng, 3)
    a = np.array([0.7, 2.0, 4.0])
    b = np.array([1.5, 0.2, 6.0])
    pair = pwmean.CommutingPair(basis, a, b)
    x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    alpha = 0.3
    xt = basis.conj().T @ x
    exact = float(np.sum(a ** (1 - alpha) * b ** alpha * np.abs(xt) ** 2))
    assert pwmean.alpha_mean(pair, alpha, x, GRID_2048) == pytest.approx(exact, rel=1e-6)


def test_alpha_normalization_against_beta_constant():
    for alpha in (0.2, 0.5, 0.8):
        assert pwmean.alpha_normalization(alpha, GRID_1024) == pytest.approx(1.0, abs=1e-12)
        total, err = quad(lambda t: 1.0, 0.0, 1.0, weight="alg", wvar=(-alpha, alpha - 1.0))
        assert err < 1e-8
        assert total == pytest.approx(np.pi / np.sin(np.pi * alpha), rel=1e-10)
    # sub-interval mass in regularized units, checked by plain quadrature
    alpha = 0.3
    sub = numkit.make_grid(256, region=(0.2, 0.7))
    raw, err = quad(lambda t: t ** (-alpha) * (1 - t) ** (alpha - 1.0), 0.2, 0.7)
    assert err < 1e-10
    expect = raw / (np.pi / np.sin(np.pi * alpha))
    assert pwmean.alpha_normalization(alpha, sub) == pytest.approx(expect, rel=1e-10)


def test_alpha_range_validation():
    pair = _scalar_pair(1.0, 2.0)
    for bad in (0.0, 1.0, -0.3, 1.7):
        with pytest.raises(ValueError):
            pwmean.alpha_mean(pair, bad, np.ones(1), GRID_1024)
        with pytest.raises(ValueError):
            pwmean.alpha_normalization(bad, GRID_1024)
