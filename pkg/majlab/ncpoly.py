"""Exact noncommutative polynomials over the rationals.

A polynomial is a finite map from words over a two-letter alphabet, ``{A, B}`` or
``{H, X}``, to ``fractions.Fraction`` coefficients. Words are packed into an integer, one bit
per letter (first letter in the most significant position), so that sorting by
``(length, bits)`` is the canonical length-then-lexicographic order.

The identities for ``D_k = Re Q_k - H^k`` are proved here word by word: the left side is
expanded over ``{A, B}``, mapped to ``{H, X}`` through ``A = (H + X) / 2``,
``B = (H - X) / 2``, and compared with the commutator expression.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType
from typing import Callable, Dict, Iterable, List, Mapping, Tuple, Union

import numpy as np

from majlab.exceptions import AlphabetError, PreconditionError

L = logging.getLogger(__name__)

MAX_SYMBOLIC_ORDER = 12

Scalar = Union[int, Fraction]


class Alphabet(Enum):
    """Two-letter alphabets; letter ``i`` is encoded by the bit value ``i``."""

    AB = ("A", "B")
    HX = ("H", "X")

    @property
    def letters(self) -> Tuple[str, str]:
        """Letter names."""
        return self.value

    def index(self, letter: str) -> int:
        """Bit value of ``letter``."""
        try:
            return self.value.index(letter)
        except ValueError as e:
            raise AlphabetError(f"Letter {letter!r} not in alphabet {self.name}") from e


@dataclass(frozen=True, order=True)
class Word:
    """Product of ``length`` letters packed into ``bits``."""

    length: int
    bits: int

    @classmethod
    def parse(cls, text: str, alphabet: Alphabet) -> "Word":
        """Word from its letters, e.g. ``"AAB"``; the empty string is the unit word."""
        bits = 0
        for letter in text:
            bits = (bits << 1) | alphabet.index(letter)
        return cls(len(text), bits)

    def letters(self) -> List[int]:
        """Bit values from left to right."""
        return [(self.bits >> (self.length - 1 - i)) & 1 for i in range(self.length)]

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.length + other.length, (self.bits << other.length) | other.bits)

    def reversed(self) -> "Word":
        """Letters in reverse order."""
        bits = 0
        for letter in reversed(self.letters()):
            bits = (bits << 1) | letter
        return Word(self.length, bits)

    def render(self, alphabet: Alphabet) -> str:
        """Runs of a letter written as powers, e.g. ``A^2BA``."""
        parts = []
        letters = self.letters()
        i = 0
        while i < len(letters):
            j = i
            while j < len(letters) and letters[j] == letters[i]:
                j += 1
            name = alphabet.letters[letters[i]]
            parts.append(name if j - i == 1 else f"{name}^{j - i}")
            i = j
        return "".join(parts)


def _as_fraction(value) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, Rational):
        raise TypeError(f"Coefficients must be exact rationals, got {value!r}")
    return Fraction(value)


class NCPoly:
    """Noncommutative polynomial with rational coefficients.

    Args:
        alphabet: alphabet of every word
        terms: word to coefficient; zero coefficients are dropped
    """

    __slots__ = ("alphabet", "_terms")

    def __init__(self, alphabet: Alphabet, terms: Mapping[Word, Scalar] = MappingProxyType({})):
        cleaned = {}
        for word, coefficient in terms.items():
            coefficient = _as_fraction(coefficient)
            if coefficient:
                cleaned[word] = coefficient
        self.alphabet = alphabet
        self._terms = MappingProxyType(dict(sorted(cleaned.items())))

    @classmethod
    def constant(cls, alphabet: Alphabet, value: Scalar = 1) -> "NCPoly":
        """Multiple of the unit word."""
        return cls(alphabet, {Word(0, 0): value})

    @classmethod
    def generator(cls, alphabet: Alphabet, letter: str) -> "NCPoly":
        """Single letter."""
        return cls(alphabet, {Word(1, alphabet.index(letter)): 1})

    @classmethod
    def from_words(cls, alphabet: Alphabet, terms: Mapping[str, Scalar]) -> "NCPoly":
        """Polynomial from spelled-out words, e.g. ``{"AAB": Fraction(1, 2)}``."""
        result: Dict[Word, Fraction] = defaultdict(Fraction)
        for text, coefficient in terms.items():
            result[Word.parse(text, alphabet)] += _as_fraction(coefficient)
        return cls(alphabet, result)

    @property
    def terms(self) -> Mapping[Word, Fraction]:
        """Nonzero coefficients in canonical word order."""
        return self._terms

    @property
    def is_zero(self) -> bool:
        """Whether no term survives."""
        return not self._terms

    @property
    def degree(self) -> int:
        """Longest word length, ``-1`` for the zero polynomial."""
        return max((word.length for word in self._terms), default=-1)

    def coefficient(self, word: Union[Word, str]) -> Fraction:
        """Coefficient of ``word`` (zero when absent)."""
        if isinstance(word, str):
            word = Word.parse(word, self.alphabet)
        return self._terms.get(word, Fraction(0))

    def _check_alphabet(self, other: "NCPoly"):
        if other.alphabet is not self.alphabet:
            raise AlphabetError(
                f"Alphabet mismatch: {self.alphabet.name} vs {other.alphabet.name}"
            )

    def __add__(self, other: "NCPoly") -> "NCPoly":
        if not isinstance(other, NCPoly):
            return NotImplemented
        self._check_alphabet(other)
        result: Dict[Word, Fraction] = defaultdict(Fraction, self._terms)
        for word, coefficient in other._terms.items():
            result[word] += coefficient
        return NCPoly(self.alphabet, result)

    def __neg__(self) -> "NCPoly":
        return NCPoly(self.alphabet, {word: -c for word, c in self._terms.items()})

    def __sub__(self, other: "NCPoly") -> "NCPoly":
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other) -> "NCPoly":
        if isinstance(other, NCPoly):
            self._check_alphabet(other)
            result: Dict[Word, Fraction] = defaultdict(Fraction)
            for u, a in self._terms.items():
                for v, b in other._terms.items():
                    result[u * v] += a * b
            return NCPoly(self.alphabet, result)
        factor = _as_fraction(other)
        return NCPoly(self.alphabet, {word: factor * c for word, c in self._terms.items()})

    def __rmul__(self, other) -> "NCPoly":
        return NCPoly(
            self.alphabet, {word: _as_fraction(other) * c for word, c in self._terms.items()}
        )

    def __pow__(self, exponent: int) -> "NCPoly":
        if exponent < 0:
            raise ValueError(f"Exponent must be nonnegative, got {exponent}")
        result = NCPoly.constant(self.alphabet)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self.alphabet is other.alphabet and dict(self._terms) == dict(other._terms)

    def __hash__(self):
        return hash((self.alphabet, tuple(self._terms.items())))

    def adjoint(self) -> "NCPoly":
        """Reverse every word; the letters stand for Hermitian indeterminates."""
        return NCPoly(self.alphabet, {word.reversed(): c for word, c in self._terms.items()})

    def evaluate(self, *matrices: np.ndarray) -> np.ndarray:
        """Numeric value with letter ``i`` replaced by ``matrices[i]``."""
        if len(matrices) != len(self.alphabet.letters):
            raise AlphabetError(f"Expected {len(self.alphabet.letters)} matrices")
        matrices = tuple(np.asarray(m, dtype=complex) for m in matrices)
        n = matrices[0].shape[0]
        identity = np.eye(n, dtype=complex)
        result = np.zeros((n, n), dtype=complex)
        for word, coefficient in self._terms.items():
            product = identity
            for letter in word.letters():
                product = product @ matrices[letter]
            result = result + float(coefficient) * product
        return result

    def __str__(self):
        if self.is_zero:
            return "0"
        parts = []
        for word, coefficient in self._terms.items():
            body = word.render(self.alphabet)
            magnitude = abs(coefficient)
            if not body:
                text = str(magnitude)
            elif magnitude == 1:
                text = body
            else:
                text = f"{magnitude} {body}"
            if not parts:
                parts.append(f"-{text}" if coefficient < 0 else text)
            else:
                parts.append(f" - {text}" if coefficient < 0 else f" + {text}")
        return "".join(parts)

    def __repr__(self):
        return f"NCPoly({self.alphabet.name}, {str(self)!r})"


def nc_add(p: NCPoly, q: NCPoly) -> NCPoly:
    """``p + q``."""
    return p + q


def nc_scale(p: NCPoly, factor: Scalar) -> NCPoly:
    """``factor * p``."""
    return p * factor


def nc_mul(p: NCPoly, q: NCPoly) -> NCPoly:
    """``p q``: words concatenated distributively."""
    return p * q


def nc_adjoint(p: NCPoly) -> NCPoly:
    """``p*``."""
    return p.adjoint()


def nc_commutator(p: NCPoly, q: NCPoly) -> NCPoly:
    """``[p, q]``."""
    return p * q - q * p


def nc_anticommutator(p: NCPoly, q: NCPoly) -> NCPoly:
    """``{p, q}``."""
    return p * q + q * p


def nc_ad_power(x: NCPoly, y: NCPoly, m: int) -> NCPoly:
    """``ad_x^m(y)``."""
    if m < 0:
        raise ValueError(f"ad power must be nonnegative, got {m}")
    for _ in range(m):
        y = nc_commutator(x, y)
    return y


def _walsh_hadamard(values: List[Fraction]):
    """In-place ``v[y] <- sum_x (-1)^{popcount(x & y)} v[x]``."""
    half = 1
    while half < len(values):
        for start in range(0, len(values), 2 * half):
            for i in range(start, start + half):
                u, v = values[i], values[i + half]
                values[i], values[i + half] = u + v, u - v
        half *= 2


def nc_substitute_hx(p: NCPoly) -> NCPoly:
    """Image of ``p`` under ``A -> (H + X) / 2``, ``B -> (H - X) / 2``.

    A word of length ``l`` maps to ``2^-l`` times the signed sum of all ``{H, X}`` words of
    that length, the sign counting positions where ``B`` meets ``X``. Per degree this is a
    Walsh-Hadamard transform of the coefficient vector.

    Raises:
        AlphabetError: unless ``p`` is over ``{A, B}``
    """
    if p.alphabet is not Alphabet.AB:
        raise AlphabetError(f"Substitution needs a polynomial over AB, got {p.alphabet.name}")
    by_length: Dict[int, Dict[int, Fraction]] = defaultdict(dict)
    for word, coefficient in p.terms.items():
        by_length[word.length][word.bits] = coefficient
    terms = {}
    for length, coefficients in by_length.items():
        values = [coefficients.get(bits, Fraction(0)) for bits in range(1 << length)]
        _walsh_hadamard(values)
        scale = Fraction(1, 1 << length)
        for bits, value in enumerate(values):
            if value:
                terms[Word(length, bits)] = value * scale
    return NCPoly(Alphabet.HX, terms)


def _check_order(k: int):
    if not 1 <= k <= MAX_SYMBOLIC_ORDER:
        raise PreconditionError(f"Symbolic order must be in [1, {MAX_SYMBOLIC_ORDER}], got {k}")


def nc_qk(k: int) -> NCPoly:
    """``Q_k = sum_p binom(k, p) A^p B^{k-p}``."""
    _check_order(k)
    return NCPoly(Alphabet.AB, {Word(k, (1 << (k - p)) - 1): math.comb(k, p) for p in range(k + 1)})


def nc_hk(k: int) -> NCPoly:
    """``H^k = (A + B)^k``: every word of length ``k`` once."""
    _check_order(k)
    return NCPoly(Alphabet.AB, {Word(k, bits): 1 for bits in range(1 << k)})


def nc_rk(k: int) -> NCPoly:
    """``R_k = (Q_k + Q_k*) / 2``."""
    q = nc_qk(k)
    return (q + q.adjoint()) * Fraction(1, 2)


def nc_dk(k: int) -> NCPoly:
    """``D_k = R_k - H^k``."""
    return nc_rk(k) - nc_hk(k)


def _hx() -> Tuple[NCPoly, NCPoly]:
    return NCPoly.generator(Alphabet.HX, "H"), NCPoly.generator(Alphabet.HX, "X")


def d3_expansion() -> NCPoly:
    """``[X, [X, H]] / 4``."""
    h, x = _hx()
    return nc_ad_power(x, h, 2) * Fraction(1, 4)


def d4_expansion() -> NCPoly:
    """``[X, [X, H^2]] / 2 - [X, H]^2 / 4``."""
    h, x = _hx()
    k = nc_commutator(x, h)
    return nc_ad_power(x, h**2, 2) * Fraction(1, 2) - (k * k) * Fraction(1, 4)


def d5_expansion() -> NCPoly:
    """Five-term expression for ``D_5`` with ``ad_X`` powers and anticommutators."""
    h, x = _hx()
    ad2_h = nc_ad_power(x, h, 2)
    return (
        nc_ad_power(x, h, 4) * Fraction(1, 16)
        + nc_ad_power(x, h**3, 2) * Fraction(7, 16)
        + nc_anticommutator(h, nc_ad_power(x, h**2, 2)) * Fraction(9, 32)
        - nc_anticommutator(h**2, ad2_h) * Fraction(1, 32)
        + (h * ad2_h * h) * Fraction(1, 8)
    )


EXPANSIONS: Dict[int, Callable[[], NCPoly]] = {
    3: d3_expansion,
    4: d4_expansion,
    5: d5_expansion,
}


@dataclass(frozen=True)
class IdentityCheck:
    """Both sides of ``D_k = expansion`` over ``{H, X}`` and their difference."""

    k: int
    lhs: NCPoly
    rhs: NCPoly
    diff: NCPoly

    @property
    def holds(self) -> bool:
        """Whether the difference is the zero polynomial."""
        return self.diff.is_zero

    def diff_terms(self) -> Iterable[Tuple[str, Fraction]]:
        """Offending words with their coefficient in ``lhs - rhs``."""
        return [(word.render(Alphabet.HX), c) for word, c in self.diff.terms.items()]


def verify_identity(k: int) -> IdentityCheck:
    """Expand ``D_k`` and its commutator form exactly and compare them word by word.

    Raises:
        PreconditionError: if no expansion is known for ``k``
    """
    if k not in EXPANSIONS:
        raise PreconditionError(f"No commutator expansion for k={k}, known: {sorted(EXPANSIONS)}")
    lhs = nc_substitute_hx(nc_dk(k))
    rhs = EXPANSIONS[k]()
    check = IdentityCheck(k, lhs, rhs, lhs - rhs)
    if check.holds:
        L.info("Identity for D_%d holds over %d words", k, len(lhs.terms))
    else:
        L.warning("Identity for D_%d fails on %d words", k, len(check.diff.terms))
    return check


def verify_identity_k3() -> IdentityCheck:
    """``R_3 - H^3 = [X, [X, H]] / 4``."""
    return verify_identity(3)


def verify_identity_k4() -> IdentityCheck:
    """``R_4 - H^4 = [X, [X, H^2]] / 2 - [X, H]^2 / 4``."""
    return verify_identity(4)


def verify_identity_k5() -> IdentityCheck:
    """Five-term expansion of ``D_5``."""
    return verify_identity(5)
