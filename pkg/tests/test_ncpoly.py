from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from utils import TEST_DATA_DIR, pair

from majlab.exceptions import AlphabetError, PreconditionError
from majlab.ncpoly import (
    Alphabet,
    NCPoly,
    Word,
    nc_ad_power,
    nc_add,
    nc_adjoint,
    nc_anticommutator,
    nc_commutator,
    nc_dk,
    nc_hk,
    nc_mul,
    nc_qk,
    nc_rk,
    nc_scale,
    nc_substitute_hx,
    verify_identity,
    verify_identity_k3,
    verify_identity_k4,
    verify_identity_k5,
)
from majlab.taylor import PairHX, coeff_bundle

A = NCPoly.generator(Alphabet.AB, "A")
B = NCPoly.generator(Alphabet.AB, "B")
H = NCPoly.generator(Alphabet.HX, "H")
X = NCPoly.generator(Alphabet.HX, "X")


@st.composite
def polynomials(draw, max_length=3):
    terms = draw(
        st.dictionaries(
            st.text(alphabet="AB", max_size=max_length),
            st.fractions(min_value=-5, max_value=5, max_denominator=6),
            max_size=5,
        )
    )
    return NCPoly.from_words(Alphabet.AB, terms)


def test_words():
    word = Word.parse("AABA", Alphabet.AB)
    assert word == Word(4, 0b0010)
    assert word.render(Alphabet.AB) == "A^2BA"
    assert word.reversed().render(Alphabet.AB) == "ABA^2"
    assert (Word.parse("AB", Alphabet.AB) * Word.parse("B", Alphabet.AB)).render(
        Alphabet.AB
    ) == "AB^2"
    assert Word.parse("B", Alphabet.AB) < Word.parse("AA", Alphabet.AB)
    assert Word.parse("AB", Alphabet.AB) < Word.parse("BA", Alphabet.AB)
    with pytest.raises(AlphabetError):
        Word.parse("AH", Alphabet.AB)


def test_rendering():
    assert str(NCPoly(Alphabet.AB)) == "0"
    assert str(A - B) == "A - B"
    assert str(Fraction(-1, 2) * (A * A * B) + NCPoly.constant(Alphabet.AB, 3)) == "3 - 1/2 A^2B"
    assert str(nc_rk(4)) == (
        "A^4 + 2 A^3B + 3 A^2B^2 + 2 AB^3 + 2 BA^3 + 3 B^2A^2 + 2 B^3A + B^4"
    )


def test_exact_coefficients_only():
    with pytest.raises(TypeError):
        A * 0.5
    assert (A * Fraction(1, 3)).coefficient("A") == Fraction(1, 3)
    assert A.coefficient("B") == 0


def test_alphabet_mismatch():
    with pytest.raises(AlphabetError):
        nc_add(A, H)
    with pytest.raises(AlphabetError):
        nc_mul(X, B)
    with pytest.raises(AlphabetError):
        nc_substitute_hx(H)


def test_arithmetic():
    assert nc_add(A, B) - B == A
    assert nc_scale(A, 2) == A + A
    assert nc_mul(A, B).coefficient("AB") == 1
    assert (A + B) ** 2 == nc_hk(2)
    assert nc_adjoint(A * B * B) == B * B * A
    assert nc_commutator(A, A).is_zero
    assert nc_anticommutator(A, B) == A * B + B * A
    assert nc_ad_power(A, B, 0) == B
    assert nc_ad_power(A, B, 2) == A * A * B - 2 * (A * B * A) + B * A * A
    assert nc_qk(2) == A * A + 2 * (A * B) + B * B


def test_substitution():
    assert nc_substitute_hx(A + B) == H
    assert nc_substitute_hx(A - B) == X
    assert nc_substitute_hx(A * B - B * A) == Fraction(1, 2) * (X * H - H * X)
    assert nc_substitute_hx(NCPoly.constant(Alphabet.AB, 7)) == NCPoly.constant(Alphabet.HX, 7)


@seed(5)
@settings(max_examples=60, deadline=None)
@given(p=polynomials(), q=polynomials())
def test_substitution_is_ring_homomorphism(p, q):
    assert nc_substitute_hx(p + q) == nc_substitute_hx(p) + nc_substitute_hx(q)
    assert nc_substitute_hx(p * q) == nc_substitute_hx(p) * nc_substitute_hx(q)


@seed(6)
@settings(max_examples=60, deadline=None)
@given(p=polynomials(), q=polynomials())
def test_adjoint_reverses_products(p, q):
    assert (p * q).adjoint() == q.adjoint() * p.adjoint()


@pytest.mark.parametrize("k", range(2, 7))
def test_dk_golden(k):
    expected = (TEST_DATA_DIR / "golden" / f"d{k}.txt").read_text(encoding="utf-8").strip()
    assert str(nc_dk(k)) == expected


@pytest.mark.parametrize("k", range(1, 9))
def test_dk_self_adjoint_and_free_of_powers(k):
    d = nc_dk(k)
    assert d.adjoint() == d
    assert d.coefficient("A" * k) == 0
    assert d.coefficient("B" * k) == 0


def test_order_bounds():
    with pytest.raises(PreconditionError):
        nc_dk(0)
    with pytest.raises(PreconditionError):
        nc_qk(13)
    with pytest.raises(PreconditionError):
        verify_identity(6)


def test_identities_k3_k4():
    check = verify_identity_k3()
    assert check.holds
    assert check.lhs == Fraction(1, 4) * nc_ad_power(X, H, 2)
    assert list(check.diff_terms()) == []

    assert verify_identity_k4().holds


def test_identity_k5_matches_numeric_value():
    check = verify_identity_k5()
    assert check.holds == check.diff.is_zero
    a, b = pair(50, 3)
    hx = PairHX.from_ab(a, b)
    np.testing.assert_allclose(
        check.lhs.evaluate(hx.H.matrix, hx.X.matrix), coeff_bundle(a, b, 5).D.matrix, atol=1e-9
    )


def test_evaluate():
    a, b = pair(51, 3)
    np.testing.assert_allclose(nc_qk(3).evaluate(a, b), coeff_bundle(a, b, 3).Q, atol=1e-10)
    with pytest.raises(AlphabetError):
        A.evaluate(a)


@pytest.mark.parametrize("k", range(2, 7))
def test_dk_matches_numeric_value(k):
    a, b = pair(52, 3, k)
    a, b = a / 2, b / 2
    np.testing.assert_allclose(nc_dk(k).evaluate(a, b), coeff_bundle(a, b, k).D.matrix, atol=1e-10)
