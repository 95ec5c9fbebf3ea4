import itertools
from fractions import Fraction

import pytest

from pmdkit.galois import FieldSpec, compute_dual_basis
from pmdkit.ptc import (PtcFamily, build_bcgst_family, commuting_shift_keys,
                        measure_pairwise_detectability, measure_strong_ptc_error,
                        pbeta_roots)
from pmdkit.symplectic import PauliOperator, StabilizerCode, symplectic_product, syndrome


def pauli(label):
    return PauliOperator.from_label(label)


def test_build_n2_lambda1_keys():
    fam = build_bcgst_family(2, 1)
    assert fam.num_keys == 2 and fam.r == 2
    # v_0 = (1, 0, 0, 0): X on qubit 0.  v_1 = (1, 1, 1, 1): Y on both.
    assert [g.label() for g in fam.codes[0].gens] == ["XI"]
    assert [g.label() for g in fam.codes[1].gens] == ["YY"]


def test_build_n4_lambda2_shape():
    fam = build_bcgst_family(4, 2)
    assert fam.num_keys == 4
    for key, code in fam.codes.items():
        assert (code.n, code.k, code.r) == (4, 2, 2)
        for g, h in itertools.combinations(code.gens, 2):
            assert symplectic_product(g, h) == 0


def test_build_rejects_bad_divisibility():
    with pytest.raises(ValueError, match="divide"):
        build_bcgst_family(5, 2)
    with pytest.raises(ValueError, match=">= 1"):
        build_bcgst_family(4, 0)


def single_code_family(code, lam=1):
    return PtcFamily(code.n, lam, FieldSpec.default(lam),
                     {k: code for k in range(1 << lam)})


def test_strong_error_one_for_shared_normalizer_element():
    # Negative control: every key uses the same code, so any normalizer
    # element evades all keys.
    code = StabilizerCode(2, [pauli("XI")])
    fam = single_code_family(code)
    assert measure_strong_ptc_error(fam).value == Fraction(1)


def test_pairwise_detectability_one_for_identical_codes():
    code = StabilizerCode(2, [pauli("XI")])
    fam = single_code_family(code)
    # S cap N contains the stabilizer itself, for every shift.
    assert measure_pairwise_detectability(fam).value == Fraction(1)


# Exhaustive regression constants: the sweep itself is the oracle, and
# every value must sit under the family bounds n/2^lam and 2n/2^lam.
EXPECTED = {
    (2, 1): (Fraction(1), Fraction(0)),
    (4, 2): (Fraction(3, 4), Fraction(1, 2)),
    (6, 2): (Fraction(1), Fraction(1, 2)),
    (6, 3): (Fraction(3, 8), Fraction(1, 4)),
}


@pytest.mark.parametrize("n,lam", sorted(EXPECTED))
def test_measured_values_and_bounds(n, lam):
    fam = build_bcgst_family(n, lam)
    eps = measure_strong_ptc_error(fam)
    delta = measure_pairwise_detectability(fam)
    assert eps.exhaustive and delta.exhaustive
    want_eps, want_delta = EXPECTED[(n, lam)]
    assert eps.value == want_eps
    assert delta.value == want_delta
    assert eps.value <= Fraction(n, 2 ** lam)
    assert delta.value <= Fraction(2 * n, 2 ** lam)


def test_sampling_mode_is_seeded_and_bounded():
    fam = build_bcgst_family(4, 2)
    a = measure_strong_ptc_error(fam, samples=500, seed=42)
    b = measure_strong_ptc_error(fam, samples=500, seed=42)
    assert not a.exhaustive
    assert a.value == b.value
    assert a.value <= measure_strong_ptc_error(fam).value


def test_guard_error_mentions_sampling():
    fam = build_bcgst_family(4, 2)
    import pmdkit.ptc as ptc_module
    old = ptc_module.SWEEP_GUARD
    ptc_module.SWEEP_GUARD = 10
    try:
        with pytest.raises(ValueError, match="samples"):
            measure_strong_ptc_error(fam)
    finally:
        ptc_module.SWEEP_GUARD = old


def test_key_group_structure():
    # k -> k + s is a bijection on keys for every shift, and the code
    # table is total over the additive group.
    fam = build_bcgst_family(4, 2)
    keys = list(fam.keys())
    assert sorted(k.coeffs for k in keys) == list(range(4))
    for s in fam.field.elements():
        shifted = {(k + s).coeffs for k in keys}
        assert shifted == set(range(4))
        for k in keys:
            assert (k + s).coeffs in fam.codes


def test_pbeta_rejects_zero_shift():
    field = FieldSpec.default(2)
    with pytest.raises(ValueError, match="nonzero"):
        pbeta_roots(field.zero(), 2)


def test_pbeta_roots_by_direct_evaluation():
    # (lambda=2, r=2, beta=1): evaluate the two factors at all four
    # field points with explicit arithmetic.
    field = FieldSpec.default(2)
    beta = field.one()
    r = 2
    expected = set()
    for alpha in field.elements():
        f1 = (alpha + beta) ** r + alpha ** r
        f2_ = (alpha ** (r + 1)) * ((alpha + beta) ** (r + 1)) + field.one()
        if f1.coeffs == 0 or f2_.coeffs == 0:
            expected.add(alpha)
    assert pbeta_roots(beta, r) == expected


def test_pbeta_zero_point_evaluation():
    # alpha = 0 is a root iff one factor vanishes at 0: first factor is
    # beta^r, second is -1, so it happens exactly when beta^r = 0, i.e.
    # never for beta != 0.
    field = FieldSpec.default(3)
    for coeffs in range(1, 8):
        beta = field.element(coeffs)
        roots = pbeta_roots(beta, 2)
        assert (field.zero() in roots) == (beta ** 2 == field.zero())


@pytest.mark.parametrize("n,lam", [(2, 1), (4, 2), (6, 2), (6, 3), (3, 3)])
def test_pbeta_root_count_bound(n, lam):
    field = FieldSpec.default(lam)
    r = n // lam
    for coeffs in range(1, 1 << lam):
        assert len(pbeta_roots(field.element(coeffs), r)) <= 3 * r + 2


@pytest.mark.parametrize("n,lam", [(2, 1), (4, 2), (6, 2), (6, 3), (3, 3)])
def test_commuting_keys_contained_in_pbeta_roots(n, lam):
    # The checkable containment: keys whose stabilizers are undetected
    # under a beta-shift are roots of the shift polynomial.
    fam = build_bcgst_family(n, lam)
    for coeffs in range(1, 1 << lam):
        beta = fam.field.element(coeffs)
        bad = commuting_shift_keys(fam, beta)
        roots = pbeta_roots(beta, fam.r)
        assert bad <= roots


def test_measurements_basis_independent():
    # Rebuilding the family under a different dual-basis pair must not
    # change either detectability figure (lambda <= 3).
    for n, lam in [(2, 1), (4, 2), (6, 3)]:
        field = FieldSpec.default(lam)
        default_pair = compute_dual_basis(field)
        if lam == 1:
            alt_alpha = [field.one()]
        else:
            # A non-polynomial basis: {1, x+1, x^2, ...}.
            alt_alpha = field.polynomial_basis()
            alt_alpha[1] = alt_alpha[1] + field.one()
        alt_pair = compute_dual_basis(field, alt_alpha)
        fam_default = build_bcgst_family(n, lam, basis_pair=default_pair)
        fam_alt = build_bcgst_family(n, lam, basis_pair=alt_pair)
        assert (measure_strong_ptc_error(fam_default).value
                == measure_strong_ptc_error(fam_alt).value)
        assert (measure_pairwise_detectability(fam_default).value
                == measure_pairwise_detectability(fam_alt).value)


def test_every_built_code_has_commuting_generators():
    for n, lam in [(2, 1), (4, 2), (6, 2), (6, 3), (8, 4)]:
        fam = build_bcgst_family(n, lam)
        for code in fam.codes.values():
            for g, h in itertools.combinations(code.gens, 2):
                assert symplectic_product(g, h) == 0
            assert len(code.gens) == lam
