import numpy as np
import pytest

from nehari.errors import ConfigurationError, SymbolFormatError
from nehari.symbol import (
    CircleGrid,
    MatrixSymbol,
    adjoint_symbol,
    block_diag,
    conj_symbol,
    dumps_symbol,
    evaluate,
    fit_from_samples,
    hcat,
    linf_norm,
    loads_symbol,
    multiply,
    pointwise_svd,
    symbol_from_dict,
    symbol_to_dict,
    transpose_symbol,
)

RNG = np.random.default_rng(20240817)


def random_symbol(rows, cols, lo, hi, rng=RNG):
    coeffs = rng.standard_normal((hi - lo + 1, rows, cols)) + 1j * rng.standard_normal(
        (hi - lo + 1, rows, cols)
    )
    return MatrixSymbol(lo, coeffs)


def test_evaluate_identity_constant():
    s = MatrixSymbol.identity(2)
    g = CircleGrid(8)
    vals = evaluate(s, g)
    assert np.allclose(vals, np.eye(2)[None, :, :])


def test_evaluate_single_monomial_zbar():
    s = MatrixSymbol.scalar({-1: 1.0})
    g = CircleGrid(8)
    vals = evaluate(s, g)[:, 0, 0]
    assert np.allclose(vals, np.conj(g.points))


def test_evaluate_direct_summation_oracle():
    # zbar + 0.5*zbar^2 at zeta = 1 sums to 1.5
    s = MatrixSymbol.scalar({-1: 1.0, -2: 0.5})
    g = CircleGrid(16)
    vals = evaluate(s, g)[:, 0, 0]
    zetas = g.points
    oracle = np.conj(zetas) + 0.5 * np.conj(zetas) ** 2
    assert np.allclose(vals, oracle, atol=1e-13)
    assert abs(vals[0] - 1.5) < 1e-13


def test_multiply_inverse_monomials():
    zbar = MatrixSymbol.scalar({-1: 1.0})
    z = MatrixSymbol.scalar({1: 1.0})
    prod = multiply(zbar, z).trim()
    assert prod.band == (0, 0)
    assert prod.coeff(0)[0, 0] == 1.0


def test_multiply_disjoint_support_vanishes():
    a = MatrixSymbol.monomial(-1, np.diag([1.0, 0.0]))
    b = MatrixSymbol.constant(np.diag([0.0, 1.0]))
    assert multiply(a, b).is_zero(1e-15)


def test_multiply_row_times_column_convolution_oracle():
    # (1, z)/sqrt2 times (1, z)^t/sqrt2 -> (1 + z^2)/2, value 1 at zeta = 1
    inv = 1.0 / np.sqrt(2.0)
    row = MatrixSymbol(0, np.array([[[inv, 0.0]], [[0.0, inv]]], dtype=complex))
    col = row.transpose()
    prod = multiply(row, col)
    # direct convolution oracle
    assert abs(prod.coeff(0)[0, 0] - 0.5) < 1e-15
    assert abs(prod.coeff(2)[0, 0] - 0.5) < 1e-15
    assert abs(prod.coeff(1)[0, 0]) < 1e-15
    g = CircleGrid(8)
    assert abs(evaluate(prod, g)[0, 0, 0] - 1.0) < 1e-14


def test_adjoint_of_zbar_is_z():
    s = MatrixSymbol.scalar({-1: 1.0})
    assert adjoint_symbol(s).trim().band == (1, 1)


def test_adjoint_of_constant_unitary():
    q, _ = np.linalg.qr(RNG.standard_normal((3, 3)) + 1j * RNG.standard_normal((3, 3)))
    s = MatrixSymbol.constant(q)
    assert np.allclose(adjoint_symbol(s).coeff(0), q.conj().T)


def test_adjoint_coefficient_flip():
    s = MatrixSymbol.scalar({-1: 1.0, -2: 0.5})
    a = adjoint_symbol(s).trim()
    assert a.band == (1, 2)
    assert abs(a.coeff(1)[0, 0] - 1.0) < 1e-15
    assert abs(a.coeff(2)[0, 0] - 0.5) < 1e-15


def test_conj_and_transpose_basics():
    z = MatrixSymbol.scalar({1: 1.0})
    assert conj_symbol(z).trim().band == (-1, -1)
    col = MatrixSymbol(0, np.array([[[1.0], [0.0]], [[0.0], [1.0]]], dtype=complex))
    row = transpose_symbol(col)
    assert (row.rows, row.cols) == (1, 2)


def test_adjoint_equals_conj_of_transpose():
    s = random_symbol(3, 2, -2, 3)
    a = adjoint_symbol(s)
    b = conj_symbol(transpose_symbol(s))
    assert np.allclose((a - b).coeffs, 0.0, atol=1e-15)


def test_adjoint_matches_pointwise_hermitian():
    s = random_symbol(2, 3, -2, 2)
    g = CircleGrid.for_symbol(s, 64)
    lhs = evaluate(adjoint_symbol(s), g)
    rhs = np.conj(np.transpose(evaluate(s, g), (0, 2, 1)))
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_linf_norm_unimodular_and_block_max():
    g = CircleGrid(64)
    assert abs(linf_norm(MatrixSymbol.scalar({-1: 1.0}), g) - 1.0) < 1e-12
    s = MatrixSymbol.monomial(-1, np.diag([1.0, 0.5]))
    assert abs(linf_norm(s, g) - 1.0) < 1e-12


def test_linf_norm_calculus_oracle():
    # |zbar + 0.5 zbar^2| = |1 + 0.5 e^{i theta}| peaks at theta = 0 with value 1.5
    s = MatrixSymbol.scalar({-1: 1.0, -2: 0.5})
    g = CircleGrid(256)
    theta = g.theta
    oracle = np.abs(np.conj(np.exp(1j * theta)) + 0.5 * np.conj(np.exp(1j * theta)) ** 2).max()
    assert abs(linf_norm(s, g) - oracle) < 1e-13
    assert abs(linf_norm(s, g) - 1.5) < 1e-13


def test_pointwise_svd_diagonal_oracle():
    s = MatrixSymbol.monomial(-1, np.diag([1.0, 0.5]))
    g = CircleGrid(32)
    sv, u, vh = pointwise_svd(s, g)
    assert np.allclose(sv, np.array([1.0, 0.5])[None, :], atol=1e-12)
    # oracle: numpy svd of the plainly evaluated matrices
    direct = np.linalg.svd(evaluate(s, g), compute_uv=False)
    assert np.allclose(sv, direct)


def test_pointwise_svd_zero_symbol():
    sv, _, _ = pointwise_svd(MatrixSymbol.zeros(2, 2), CircleGrid(8))
    assert np.allclose(sv, 0.0)


def test_pointwise_svd_invariant_under_adjoint():
    s = random_symbol(3, 2, -1, 2)
    g = CircleGrid.for_symbol(s, 64)
    sv1, _, _ = pointwise_svd(s, g)
    sv2, _, _ = pointwise_svd(adjoint_symbol(s), g)
    assert np.allclose(np.sort(sv1, axis=1), np.sort(sv2, axis=1), atol=1e-12)


def test_adjoint_is_involution():
    s = random_symbol(2, 2, -3, 1)
    back = adjoint_symbol(adjoint_symbol(s))
    assert back.lo == s.lo
    assert np.allclose(back.coeffs, s.coeffs)


def test_multiply_associative_on_random_triples():
    for _ in range(8):
        a = random_symbol(2, 3, -2, 1)
        b = random_symbol(3, 2, 0, 2)
        c = random_symbol(2, 2, -1, 1)
        left = multiply(multiply(a, b), c)
        right = multiply(a, multiply(b, c))
        assert (left - right).trim(0.0).coeff_l2() < 1e-12 * max(1.0, left.coeff_l2())


def test_evaluate_respects_products():
    a = random_symbol(2, 2, -2, 2)
    b = random_symbol(2, 2, -1, 3)
    prod = multiply(a, b)
    g = CircleGrid.for_symbol(prod, 64)
    lhs = evaluate(prod, g)
    rhs = np.einsum("tij,tjk->tik", evaluate(a, g), evaluate(b, g))
    assert np.abs(lhs - rhs).max() < 1e-12


def test_linf_monotone_and_stable_under_refinement():
    # corpus symbols attain their sup on dyadic grid points
    corpus = [
        MatrixSymbol.scalar({-1: 1.0, -2: 0.5}),
        MatrixSymbol.monomial(-1, np.diag([1.0, 0.5])),
        MatrixSymbol.monomial(-1, np.eye(2)),
    ]
    for s in corpus:
        g = CircleGrid(256)
        coarse = linf_norm(s, g)
        fine = linf_norm(s, g.refined())
        assert fine >= coarse - 1e-15
        assert abs(fine - coarse) <= 1e-10 * max(1.0, coarse)


def test_grid_aliasing_guard():
    s = MatrixSymbol.scalar({-5: 1.0, 5: 1.0})
    with pytest.raises(ConfigurationError):
        evaluate(s, CircleGrid(16))
    g = CircleGrid.for_symbol(s, 2)
    assert g.size >= 2 * 10 + 2


def test_grid_size_must_be_power_of_two():
    with pytest.raises(ConfigurationError):
        CircleGrid(12)


def test_fit_from_samples_roundtrip_and_tail():
    s = random_symbol(2, 2, -3, 4)
    g = CircleGrid.for_symbol(s, 64)
    vals = evaluate(s, g)
    fitted, tail = fit_from_samples(vals, g)
    assert tail < 1e-12
    assert (fitted - s).trim(0.0).coeff_l2() < 1e-12
    # restricting the band reports the discarded mass
    analytic, tail2 = fit_from_samples(vals, g, band=(0, 8))
    assert tail2 > 0.1
    assert analytic.lo >= 0


def test_block_helpers():
    a = MatrixSymbol.scalar({-1: 1.0})
    b = MatrixSymbol.scalar({0: 2.0})
    d = block_diag(a, b)
    assert (d.rows, d.cols) == (2, 2)
    assert abs(d.coeff(-1)[0, 0] - 1.0) < 1e-15
    assert abs(d.coeff(0)[1, 1] - 2.0) < 1e-15
    h = hcat(a, b)
    assert (h.rows, h.cols) == (1, 2)


def test_symbol_file_roundtrip():
    s = MatrixSymbol.from_entries(
        2,
        2,
        {(0, 0): MatrixSymbol.scalar({-1: 1.0}), (1, 1): MatrixSymbol.scalar({-1: 0.5})},
    )
    text = dumps_symbol(s)
    back = loads_symbol(text)
    assert (back - s).trim(0.0).coeff_l2() == 0.0
    # canonical writer is a fixed point
    assert dumps_symbol(back) == text


def test_symbol_file_rejects_duplicates():
    d = {
        "rows": 1,
        "cols": 1,
        "terms": [
            {"k": -1, "i": 0, "j": 0, "re": 1.0, "im": 0.0},
            {"k": -1, "i": 0, "j": 0, "re": 2.0, "im": 0.0},
        ],
    }
    with pytest.raises(SymbolFormatError):
        symbol_from_dict(d)


def test_symbol_file_unlisted_entries_zero():
    d = {"rows": 2, "cols": 2, "terms": [{"k": 0, "i": 0, "j": 0, "re": 3.0, "im": 0.0}]}
    s = symbol_from_dict(d)
    assert abs(s.coeff(0)[1, 1]) == 0.0
    assert symbol_to_dict(s)["terms"] == d["terms"]


def test_symbol_file_parse_error_context():
    with pytest.raises(SymbolFormatError) as err:
        loads_symbol("{not json}")
    assert "line" in str(err.value)


def test_worker_cap_does_not_change_results(monkeypatch):
    s = random_symbol(3, 3, -4, 4)
    g = CircleGrid.for_symbol(s, 512)
    base = linf_norm(s, g)
    monkeypatch.setenv("SUPEROPT_THREADS", "4")
    assert linf_norm(s, g) == base
