import numpy as np
import pytest

from nehari.certify import (
    badly_approximable,
    condition_c,
    isometry_uniqueness,
    schmidt_family,
    uniqueness_hint,
)
from nehari.hankel import hankel_norm_and_schmidt
from nehari.hardy import winding_number
from nehari.superopt import superopt_factorize
from nehari.symbol import CircleGrid, MatrixSymbol, block_diag, evaluate, linf_norm

G = CircleGrid(256)
D = 4


def scalar(terms):
    return MatrixSymbol.scalar(terms)


def diag_symbol(*scalars):
    return block_diag(*[MatrixSymbol.scalar(t) for t in scalars])


def test_ba_scalar_zbar_passes_with_constant_witness():
    cert = badly_approximable(scalar({-1: 1.0}), G, D)
    assert cert.verdict == "pass"
    w = cert.witnesses[0]
    assert np.abs(evaluate(w, G)[:, 0, 0] - evaluate(w, G)[0, 0, 0]).max() < 1e-8


def test_ba_analytic_symbol_fails():
    cert = badly_approximable(scalar({1: 1.0}), G, D)
    assert cert.verdict == "fail"


def test_ba_nonuniqueness_block_passes():
    cert = badly_approximable(diag_symbol({-1: 1.0}, {}), G, D)
    assert cert.verdict == "pass"


def test_ba_scalar_law_on_corpus():
    # scalar pass <=> unimodular and negative winding
    for k in range(-3, 4):
        s = scalar({k: 1.0})
        cert = badly_approximable(s, G, D)
        expected = "pass" if winding_number(s, G) < 0 else "fail"
        assert cert.verdict == expected
    # non-unimodular scalar: norm not constant
    cert = badly_approximable(scalar({-1: 1.0, 0: 0.5}), G, D)
    assert cert.verdict == "fail"


def test_ba_pass_cross_checked_by_norm_identity():
    for phi in [scalar({-1: 1.0}), diag_symbol({-1: 1.0}, {}), diag_symbol({-1: 1.0}, {-1: 0.5})]:
        cert = badly_approximable(phi, G, D)
        if cert.verdict == "pass":
            norm, _, _ = hankel_norm_and_schmidt(phi)
            assert abs(norm - linf_norm(phi, G)) < 1e-6


def test_condition_c_scalar_and_diagonal_passes():
    for phi in [scalar({-1: 1.0}), MatrixSymbol.monomial(-1, np.eye(2)), diag_symbol({-1: 1.0}, {-1: 0.5})]:
        cert = condition_c(phi, G, D)
        assert cert.verdict == "pass", cert.diagnostics
        # cross-check: superoptimal approximant is zero
        rep = superopt_factorize(phi, grid=G)
        assert linf_norm(rep.F, CircleGrid.for_symbol(rep.F, 256)) < 1e-6


def test_condition_c_fails_on_constant_block():
    cert = condition_c(diag_symbol({-1: 1.0}, {0: 0.5}), G, D)
    assert cert.verdict == "fail"


def test_condition_c_fails_on_nonconstant_singular_values():
    cert = condition_c(scalar({-1: 1.0, 0: 0.5}), G, D)
    assert cert.verdict == "fail"
    assert "not constant" in cert.diagnostics["note"]


def test_condition_c_verdicts_stable_under_grid_refinement():
    cases = [
        (scalar({-1: 1.0}), "pass"),
        (diag_symbol({-1: 1.0}, {0: 0.5}), "fail"),
        (diag_symbol({-1: 1.0}, {-1: 0.5}), "pass"),
    ]
    for phi, expected in cases:
        assert condition_c(phi, G, D).verdict == expected
        assert condition_c(phi, G.refined(), D).verdict == expected


def test_schmidt_family_dimensions():
    phi = diag_symbol({-1: 1.0}, {-1: 0.5})
    fam_top = schmidt_family(phi, G, 1.0)
    assert fam_top.dimension == 1 and fam_top.constant_dimension
    fam_all = schmidt_family(phi, G, 0.5)
    assert fam_all.dimension == 2


def test_isometry_uniqueness_unitary_case():
    cert = isometry_uniqueness(MatrixSymbol.monomial(-1, np.eye(2)), G, D)
    assert cert.verdict == "pass"
    # pass implies the very-badly-approximable certificate passes too
    assert condition_c(MatrixSymbol.monomial(-1, np.eye(2)), G, D).verdict == "pass"


def test_isometry_uniqueness_scalar():
    assert isometry_uniqueness(scalar({-1: 1.0}), G, D).verdict == "pass"


def test_isometry_uniqueness_fails_for_rank_deficient_block():
    cert = isometry_uniqueness(diag_symbol({-1: 1.0}, {}), G, D)
    assert cert.verdict == "fail"


def test_uniqueness_hint_finite_case_unique():
    phi = diag_symbol({-1: 1.0}, {-1: 0.5})
    rep = superopt_factorize(phi, grid=G)
    cert = uniqueness_hint(rep, phi, G)
    assert cert.verdict == "UNIQUE"
    assert cert.diagnostics["diameter_bound"] <= 1e-8


def test_uniqueness_hint_scalar_unique():
    phi = scalar({-1: 1.0})
    rep = superopt_factorize(phi, grid=G)
    assert uniqueness_hint(rep, phi, G).verdict == "UNIQUE"


def test_uniqueness_hint_tail_model_non_unique():
    phi = diag_symbol({}, {-1: 1.0}, {-1: 0.9}, {-1: 0.8})
    rep = superopt_factorize(phi, depth=3, tail_sigma=0.8, grid=G)
    cert = uniqueness_hint(rep, phi, G)
    assert cert.verdict == "NON-UNIQUE-LIKELY"
    assert cert.diagnostics["perturbation_budget"] == pytest.approx(0.8, abs=1e-9)
    assert cert.witnesses  # the deflation corner


def test_certificates_serialize():
    cert = badly_approximable(scalar({-1: 1.0}), G, D)
    d = cert.to_dict()
    assert d["verdict"] == "pass"
    assert isinstance(d["witnesses"], list) and d["witnesses"]
    import json

    json.dumps(d, sort_keys=True)
