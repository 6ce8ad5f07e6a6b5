"""
Exact arithmetic in the variables Q (number of points), T (homological
degree) and a.

Three value types live here:

- ``LaurentPoly``: polynomial in Q and a, Laurent in T, integer coefficients.
- ``QSeries``: power series in Q truncated at ``nmax``; coefficients are
  LaurentPoly values free of Q.
- ``FactoredRational``: a numerator over a multiset of factors
  (1 - Q^alpha T^beta) with alpha >= 1, expanded factor by factor.

All three are immutable. Nothing in this module uses floating point.
"""
import logging
from collections import Counter, defaultdict
from typing import Callable, Dict, Iterable, List, Mapping, NamedTuple, Optional, Tuple, Union

import sympy

from app.errors import SeriesDomainError, SubstitutionError
from app.models.series_schema import LaurentPolyPayload, QSeriesPayload
from app.services.profiling import phase

# Configure logging
logger = logging.getLogger(__name__)


class Monomial(NamedTuple):
    q: int
    t: int
    a: int = 0


Factor = Tuple[int, int]
Scalar = Union["LaurentPoly", int]

_SYMBOLS = {name: sympy.Symbol(name) for name in ("Q", "T", "a")}


def _mul_terms(left: Mapping, right: Mapping) -> Dict:
    out = defaultdict(int)
    for (q1, t1, a1), c1 in left.items():
        for (q2, t2, a2), c2 in right.items():
            out[(q1 + q2, t1 + t2, a1 + a2)] += c1 * c2
    return out


class LaurentPoly:
    """
    Exact polynomial in Q and a, Laurent in T.

    Coefficients are Python ints; zero coefficients are never stored, so two
    equal polynomials always have identical term maps.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping[Tuple[int, int, int], int]] = None):
        clean = {}
        for key, coeff in (terms or {}).items():
            mono = Monomial(*key)
            if mono.q < 0 or mono.a < 0:
                raise SeriesDomainError(f"Monomial {tuple(mono)} has a negative Q or a exponent")
            coeff = int(coeff)
            if coeff:
                clean[(mono.q, mono.t, mono.a)] = coeff
        self._terms = clean

    @classmethod
    def _wrap(cls, terms: Mapping) -> "LaurentPoly":
        poly = cls.__new__(cls)
        poly._terms = {key: coeff for key, coeff in terms.items() if coeff}
        return poly

    @classmethod
    def monomial(cls, q: int = 0, t: int = 0, a: int = 0, coeff: int = 1) -> "LaurentPoly":
        return cls({(q, t, a): coeff})

    @classmethod
    def constant(cls, value: int) -> "LaurentPoly":
        return cls({(0, 0, 0): value})

    @classmethod
    def zero(cls) -> "LaurentPoly":
        return cls._wrap({})

    @classmethod
    def from_expr(cls, text: str) -> "LaurentPoly":
        """
        Parse a polynomial written in sympy syntax over Q, T and a, e.g.
        ``"Q^2*T^2 - Q + 1"``. Negative powers of T are allowed.
        """
        expr = sympy.expand(sympy.sympify(text, locals=_SYMBOLS))
        terms = defaultdict(int)
        for term in sympy.Add.make_args(expr):
            if term == 0:
                continue
            coeff, rest = term.as_coeff_Mul()
            if not coeff.is_Integer:
                raise SeriesDomainError(f"Non-integer coefficient {coeff} in {text!r}")
            powers = {} if rest == 1 else rest.as_powers_dict()
            unknown = set(powers) - set(_SYMBOLS.values())
            if unknown:
                raise SeriesDomainError(f"Unknown symbols {sorted(map(str, unknown))} in {text!r}")
            exps = []
            for name in ("Q", "T", "a"):
                exp = sympy.sympify(powers.get(_SYMBOLS[name], 0))
                if not exp.is_Integer:
                    raise SeriesDomainError(f"Non-integer exponent of {name} in {text!r}")
                exps.append(int(exp))
            terms[tuple(exps)] += int(coeff)
        return cls(terms)

    @property
    def terms(self) -> Dict[Monomial, int]:
        return {Monomial(*key): coeff for key, coeff in self._terms.items()}

    def sorted_terms(self) -> List[Tuple[Monomial, int]]:
        """
        Terms in ascending Q, then T, then a.
        """
        return [(Monomial(*key), self._terms[key]) for key in sorted(self._terms)]

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def min_t(self) -> Optional[int]:
        return min((key[1] for key in self._terms), default=None)

    def leading_term(self) -> Optional[Tuple[Monomial, int]]:
        """
        The term with the largest (q, t, a) exponent tuple.
        """
        if not self._terms:
            return None
        key = max(self._terms)
        return Monomial(*key), self._terms[key]

    def coefficient(self, q: int = 0, t: int = 0, a: int = 0) -> int:
        return self._terms.get((q, t, a), 0)

    def coefficient_of_q(self, n: int) -> "LaurentPoly":
        return LaurentPoly._wrap({(0, t, a): c for (q, t, a), c in self._terms.items() if q == n})

    def times_monomial(self, q: int = 0, t: int = 0, a: int = 0) -> "LaurentPoly":
        return LaurentPoly({(kq + q, kt + t, ka + a): c for (kq, kt, ka), c in self._terms.items()})

    @staticmethod
    def _coerce(other) -> Optional["LaurentPoly"]:
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, int):
            return LaurentPoly.constant(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self._terms)
        for key, c in other._terms.items():
            out[key] = out.get(key, 0) + c
        return LaurentPoly._wrap(out)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly._wrap({key: -c for key, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return LaurentPoly._wrap(_mul_terms(self._terms, other._terms))

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "LaurentPoly":
        if exponent < 0:
            # only unit monomials in T are invertible
            if len(self._terms) == 1:
                (q, t, a), c = next(iter(self._terms.items()))
                if q == 0 and a == 0 and c in (1, -1):
                    return LaurentPoly._wrap({(0, -t * -exponent, 0): c ** -exponent})
            raise SeriesDomainError(f"{self} is not invertible in the Laurent ring")
        result = LaurentPoly.constant(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        return f"LaurentPoly({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for key in sorted(self._terms, reverse=True):
            coeff = self._terms[key]
            factors = []
            for name, exp in zip(("Q", "T", "a"), key):
                if exp == 1:
                    factors.append(name)
                elif exp:
                    factors.append(f"{name}^{exp}")
            body = "*".join(factors)
            magnitude = abs(coeff)
            if not body:
                body = str(magnitude)
            elif magnitude != 1:
                body = f"{magnitude}*{body}"
            sign = "-" if coeff < 0 else "+"
            pieces.append((sign, body))
        first_sign, first_body = pieces[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text


# Generators of the ring
ONE = LaurentPoly.constant(1)
Q = LaurentPoly.monomial(q=1)
T = LaurentPoly.monomial(t=1)
A = LaurentPoly.monomial(a=1)


def mono(q: int = 0, t: int = 0, a: int = 0, coeff: int = 1) -> LaurentPoly:
    return LaurentPoly.monomial(q, t, a, coeff)


def lp_add(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    return p + q


def lp_mul(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    return p * q


def _as_poly(value: Scalar) -> LaurentPoly:
    poly = LaurentPoly._coerce(value)
    if poly is None:
        raise TypeError(f"Expected LaurentPoly or int, got {type(value).__name__}")
    return poly


Rows = List[Dict[Tuple[int, int], int]]


def _empty_rows(nmax: int) -> Rows:
    return [defaultdict(int) for _ in range(nmax + 1)]


class QSeries:
    """
    Power series in Q truncated at Q-degree ``nmax``.

    ``coefficient(n)`` is the LaurentPoly (in T and a, no Q) multiplying Q^n.
    """

    __slots__ = ("nmax", "_coeffs")

    def __init__(self, nmax: int, coeffs: Iterable[Scalar] = ()):
        if nmax < 0:
            raise SeriesDomainError(f"Truncation degree must be >= 0, got {nmax}")
        polys = [_as_poly(c) for c in coeffs][: nmax + 1]
        for n, poly in enumerate(polys):
            if any(key[0] for key in poly._terms):
                raise SeriesDomainError(f"Coefficient of Q^{n} contains Q: {poly}")
        polys.extend(LaurentPoly.zero() for _ in range(nmax + 1 - len(polys)))
        self.nmax = nmax
        self._coeffs = tuple(polys)

    @classmethod
    def _from_rows(cls, nmax: int, rows: Rows) -> "QSeries":
        series = cls.__new__(cls)
        series.nmax = nmax
        series._coeffs = tuple(
            LaurentPoly._wrap({(0, t, a): c for (t, a), c in row.items()}) for row in rows
        )
        return series

    def _rows(self) -> Rows:
        rows = _empty_rows(self.nmax)
        for n, poly in enumerate(self._coeffs):
            for (_, t, a), c in poly._terms.items():
                rows[n][(t, a)] = c
        return rows

    @classmethod
    def from_poly(cls, poly: Scalar, nmax: int) -> "QSeries":
        poly = _as_poly(poly)
        rows = _empty_rows(nmax)
        for (q, t, a), c in poly._terms.items():
            if q <= nmax:
                rows[q][(t, a)] += c
        return cls._from_rows(nmax, rows)

    @property
    def coeffs(self) -> Tuple[LaurentPoly, ...]:
        return self._coeffs

    def coefficient(self, n: int) -> LaurentPoly:
        if n < 0 or n > self.nmax:
            raise IndexError(f"Q^{n} is outside 0..{self.nmax}")
        return self._coeffs[n]

    def map_coefficients(self, fn: Callable[[LaurentPoly], LaurentPoly]) -> "QSeries":
        return QSeries(self.nmax, [fn(c) for c in self._coeffs])

    def times_t(self, k: int) -> "QSeries":
        return self.map_coefficients(lambda c: c.times_monomial(t=k))

    def is_nonnegative(self) -> bool:
        return all(c >= 0 for poly in self._coeffs for c in poly._terms.values())

    def carries_a(self) -> bool:
        return any(key[2] for poly in self._coeffs for key in poly._terms)

    def _coerce_series(self, other) -> Optional["QSeries"]:
        if isinstance(other, QSeries):
            return other
        if isinstance(other, (LaurentPoly, int)):
            return QSeries.from_poly(other, self.nmax)
        return None

    def __add__(self, other):
        other = self._coerce_series(other)
        if other is None:
            return NotImplemented
        nmax = min(self.nmax, other.nmax)
        return QSeries(nmax, [self._coeffs[n] + other._coeffs[n] for n in range(nmax + 1)])

    __radd__ = __add__

    def __neg__(self) -> "QSeries":
        return QSeries(self.nmax, [-c for c in self._coeffs])

    def __sub__(self, other):
        other = self._coerce_series(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce_series(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce_series(other)
        if other is None:
            return NotImplemented
        nmax = min(self.nmax, other.nmax)
        rows = _empty_rows(nmax)
        for i in range(nmax + 1):
            left = self._coeffs[i]._terms
            if not left:
                continue
            for j in range(nmax + 1 - i):
                right = other._coeffs[j]._terms
                if not right:
                    continue
                row = rows[i + j]
                for (_, t1, a1), c1 in left.items():
                    for (_, t2, a2), c2 in right.items():
                        row[(t1 + t2, a1 + a2)] += c1 * c2
        return QSeries._from_rows(nmax, rows)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, QSeries):
            return NotImplemented
        return self.nmax == other.nmax and self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash((self.nmax, self._coeffs))

    def __repr__(self) -> str:
        body = " + ".join(
            f"Q^{n}*({c})" for n, c in enumerate(self._coeffs) if c
        )
        return f"QSeries(nmax={self.nmax}, {body or '0'})"


def series_first_divergence(
    expected: QSeries, actual: QSeries
) -> Optional[Tuple[int, LaurentPoly, LaurentPoly]]:
    """
    First Q-degree (up to the smaller truncation) where the two series differ,
    with both coefficients; None when they agree throughout.
    """
    for n in range(min(expected.nmax, actual.nmax) + 1):
        if expected.coefficient(n) != actual.coefficient(n):
            return n, expected.coefficient(n), actual.coefficient(n)
    return None


def total_degree_truncation(series: QSeries, degree: int) -> LaurentPoly:
    """
    Terms Q^q T^t a^s of ``series`` with q + t <= degree, as a polynomial.

    Complete only when every T exponent is nonnegative and ``degree`` does
    not exceed the Q-truncation.
    """
    if degree > series.nmax:
        raise SeriesDomainError(f"Total degree {degree} exceeds the Q-truncation {series.nmax}")
    terms = {}
    for n, poly in enumerate(series.coeffs):
        for (_, t, a), c in poly._terms.items():
            if t < 0:
                raise SeriesDomainError("Total-degree truncation needs nonnegative T exponents")
            if n + t <= degree:
                terms[(n, t, a)] = c
    return LaurentPoly._wrap(terms)


class FactoredRational:
    """
    numerator / prod (1 - Q^alpha T^beta) with every alpha >= 1.

    The denominator is a sorted tuple of (alpha, beta) pairs, repeated by
    multiplicity. It is never multiplied out during arithmetic.
    """

    __slots__ = ("numerator", "_denominator")

    def __init__(self, numerator: Scalar, denominator: Iterable[Factor] = ()):
        factors = []
        for alpha, beta in denominator:
            if alpha < 1:
                raise SeriesDomainError(
                    f"Factor (1 - Q^{alpha} T^{beta}) has no Q-adic expansion"
                )
            factors.append((int(alpha), int(beta)))
        self.numerator = _as_poly(numerator)
        self._denominator = tuple(sorted(factors))

    @property
    def denominator(self) -> Tuple[Factor, ...]:
        return self._denominator

    def factor_counts(self) -> Counter:
        return Counter(self._denominator)

    def expanded_denominator(self) -> LaurentPoly:
        return factor_product(self._denominator)

    def _coerce_rational(self, other) -> Optional["FactoredRational"]:
        if isinstance(other, FactoredRational):
            return other
        if isinstance(other, (LaurentPoly, int)):
            return FactoredRational(other)
        return None

    def __mul__(self, other):
        other = self._coerce_rational(other)
        if other is None:
            return NotImplemented
        return FactoredRational(
            self.numerator * other.numerator, self._denominator + other._denominator
        )

    __rmul__ = __mul__

    def __add__(self, other):
        other = self._coerce_rational(other)
        if other is None:
            return NotImplemented
        left, right = self.factor_counts(), other.factor_counts()
        common = left | right
        numerator = (
            self.numerator * factor_product((common - left).elements())
            + other.numerator * factor_product((common - right).elements())
        )
        return FactoredRational(numerator, common.elements())

    __radd__ = __add__

    def __eq__(self, other) -> bool:
        if not isinstance(other, FactoredRational):
            return NotImplemented
        return self.numerator == other.numerator and self._denominator == other._denominator

    def __hash__(self) -> int:
        return hash((self.numerator, self._denominator))

    def equals_rational(self, other: "FactoredRational") -> bool:
        """
        Equality as rational functions: N1 * D2 == N2 * D1.
        """
        return cross_multiplied(self, other)[0] == cross_multiplied(self, other)[1]

    def shift_factor(self, index: int, d_alpha: int = 0, d_beta: int = 0) -> "FactoredRational":
        """
        Copy with the exponents of one denominator factor shifted.
        """
        factors = list(self._denominator)
        alpha, beta = factors[index]
        factors[index] = (alpha + d_alpha, beta + d_beta)
        return FactoredRational(self.numerator, factors)

    def __repr__(self) -> str:
        denom = " * ".join(f"(1 - Q^{a}*T^{b})" for a, b in self._denominator) or "1"
        return f"FactoredRational(({self.numerator}) / ({denom}))"


def factor_product(factors: Iterable[Factor]) -> LaurentPoly:
    """
    prod (1 - Q^alpha T^beta) over the given factors, multiplied out.
    """
    result = ONE
    for alpha, beta in factors:
        result = result - result.times_monomial(q=alpha, t=beta)
    return result


def cross_multiplied(left: FactoredRational, right: FactoredRational) -> Tuple[LaurentPoly, LaurentPoly]:
    """
    (N_left * D_right, N_right * D_left) after cancelling the shared factors.
    """
    lc, rc = left.factor_counts(), right.factor_counts()
    shared = lc & rc
    return (
        left.numerator * factor_product((rc - shared).elements()),
        right.numerator * factor_product((lc - shared).elements()),
    )


def rf_to_series(r: FactoredRational, nmax: int) -> QSeries:
    """
    Q-adic expansion of ``r`` up to Q^nmax.

    Each factor 1/(1 - Q^alpha T^beta) is applied in place: the running
    series S becomes S' with S'_q = S_q + T^beta S'_{q-alpha}.
    """
    if nmax < 0:
        raise SeriesDomainError(f"Truncation degree must be >= 0, got {nmax}")
    with phase("series"):
        rows = _empty_rows(nmax)
        for (q, t, a), c in r.numerator._terms.items():
            if q <= nmax:
                rows[q][(t, a)] += c
        for alpha, beta in r.denominator:
            if alpha < 1:
                raise SeriesDomainError(f"Factor (1 - Q^{alpha} T^{beta}) has no Q-adic expansion")
            for q in range(alpha, nmax + 1):
                source = rows[q - alpha]
                if not source:
                    continue
                target = rows[q]
                for (t, a), c in source.items():
                    if c:
                        target[(t + beta, a)] += c
        return QSeries._from_rows(nmax, rows)


def rf_substitute_T(r: FactoredRational) -> FactoredRational:
    """
    Apply T -> (QT^2)^-1, i.e. Q^x T^y -> Q^(x-y) T^(-2y), to numerator and factors.
    """
    numerator_terms = {}
    for (q, t, a), c in r.numerator._terms.items():
        if q - t < 0:
            raise SubstitutionError(
                f"Monomial Q^{q} T^{t} maps to a negative power of Q under T -> (QT^2)^-1"
            )
        numerator_terms[(q - t, -2 * t, a)] = c
    factors = []
    for alpha, beta in r.denominator:
        if alpha - beta < 1:
            raise SubstitutionError(
                f"Factor (1 - Q^{alpha} T^{beta}) maps to a non-expandable factor"
            )
        factors.append((alpha - beta, -2 * beta))
    return FactoredRational(LaurentPoly._wrap(numerator_terms), factors)


def qs_substitute_T(series: QSeries) -> QSeries:
    """
    Apply T -> (QT^2)^-1 to a truncated series whose T exponents are all <= 0.

    Every term moves to an equal or higher Q-degree, so the image is exact up
    to the same truncation.
    """
    rows = _empty_rows(series.nmax)
    for n, poly in enumerate(series.coeffs):
        for (_, t, a), c in poly._terms.items():
            if t > 0:
                raise SubstitutionError(
                    f"Term Q^{n} T^{t} would move below its Q-degree under T -> (QT^2)^-1"
                )
            target = n - t
            if target <= series.nmax:
                rows[target][(-2 * t, a)] += c
    return QSeries._from_rows(series.nmax, rows)


def _specialize_poly(p: LaurentPoly, var: str, value: int) -> LaurentPoly:
    out = defaultdict(int)
    for (q, t, a), c in p._terms.items():
        if var == "T":
            if value == 1:
                out[(q, 0, a)] += c
            elif t < 0:
                raise SeriesDomainError("T=0 is undefined on a term with a negative power of T")
            elif t == 0:
                out[(q, t, a)] += c
        else:
            if value == 1:
                out[(q, t, 0)] += c
            elif a == 0:
                out[(q, t, a)] += c
    return LaurentPoly._wrap(out)


def specialize(p: Union[LaurentPoly, QSeries], var: str, value: int):
    """
    Substitute ``var`` (``"T"`` or ``"a"``) by ``value`` (0 or 1).
    """
    if var not in ("T", "a") or value not in (0, 1):
        raise SeriesDomainError(f"Unsupported specialisation {var}={value}")
    if isinstance(p, QSeries):
        return p.map_coefficients(lambda c: _specialize_poly(c, var, value))
    return _specialize_poly(_as_poly(p), var, value)


def lp_to_payload(p: LaurentPoly) -> LaurentPolyPayload:
    return LaurentPolyPayload(
        terms=[(m.q, m.t, m.a, str(c)) for m, c in p.sorted_terms()]
    )


def lp_from_payload(payload: LaurentPolyPayload) -> LaurentPoly:
    return LaurentPoly({(q, t, a): int(c) for q, t, a, c in payload.terms})


def qs_to_payload(series: QSeries) -> QSeriesPayload:
    with_a = series.carries_a()
    coeffs = []
    for n, poly in enumerate(series.coeffs):
        entries = []
        for m, c in poly.sorted_terms():
            entries.append((m.t, m.a, str(c)) if with_a else (m.t, str(c)))
        coeffs.append((n, entries))
    return QSeriesPayload(nmax=series.nmax, coeffs=coeffs)


def qs_from_payload(payload: QSeriesPayload) -> QSeries:
    rows = _empty_rows(payload.nmax)
    for n, entries in payload.coeffs:
        for entry in entries:
            if len(entry) == 3:
                t, a, c = entry
            else:
                (t, c), a = entry, 0
            rows[n][(t, a)] += int(c)
    return QSeries._from_rows(payload.nmax, rows)
