import logging

import pytest
from hypothesis import given, settings, strategies as st

from app.errors import SeriesDomainError, SubstitutionError
from app.services.series_core import (
    A,
    ONE,
    Q,
    T,
    FactoredRational,
    LaurentPoly,
    QSeries,
    lp_add,
    lp_from_payload,
    lp_mul,
    lp_to_payload,
    mono,
    qs_from_payload,
    qs_substitute_T,
    qs_to_payload,
    rf_substitute_T,
    rf_to_series,
    series_first_divergence,
    specialize,
    total_degree_truncation,
)

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

NODAL = FactoredRational(ONE - Q + Q ** 2 * T ** 2, [(1, 0), (1, 0)])

polys = st.dictionaries(
    st.tuples(st.integers(0, 3), st.integers(-3, 3), st.integers(0, 1)),
    st.integers(-4, 4),
    max_size=5,
).map(LaurentPoly)

rationals = st.builds(
    FactoredRational,
    polys,
    st.lists(st.tuples(st.integers(1, 3), st.integers(-2, 2)), max_size=3),
)


def expr(text: str) -> LaurentPoly:
    return LaurentPoly.from_expr(text)


def test_add_cancels_to_zero():
    assert lp_add(mono(q=2, t=2), mono(q=2, t=2, coeff=-1)).is_zero()
    assert lp_add(ONE - Q, Q ** 2 * T ** 2 + Q) == expr("1 + Q^2*T^2")


def test_mul_examples():
    assert lp_mul(ONE - Q, ONE + Q + Q ** 2 + Q ** 3) == ONE - Q ** 4
    assert lp_mul(T ** 2 - 1, T ** 2 + 1) == T ** 4 - 1


def test_zero_coefficients_are_not_stored():
    p = LaurentPoly({(1, 0, 0): 3, (0, 2, 0): 0})
    assert len(p) == 1
    assert (p - p).terms == {}


def test_negative_q_exponent_rejected():
    with pytest.raises(SeriesDomainError):
        LaurentPoly({(-1, 0, 0): 1})


def test_negative_powers_only_for_t_units():
    assert T ** -2 == mono(t=-2)
    assert (T ** 3) * (T ** -3) == ONE
    with pytest.raises(SeriesDomainError):
        (ONE + T) ** -1


@settings(max_examples=60, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(p, q, r):
    assert (p + q) - q == p
    assert p + q == q + p
    assert p * q == q * p
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r


def test_from_expr_reads_laurent_terms():
    assert expr("Q^2*T^2 - Q + 1") == Q ** 2 * T ** 2 - Q + 1
    assert expr("Q*T^-2 + 3*a") == mono(q=1, t=-2) + 3 * A
    with pytest.raises(SeriesDomainError):
        expr("Q/2")
    with pytest.raises(SeriesDomainError):
        expr("x + 1")


def test_str_is_readable():
    assert str(ONE - Q + Q ** 2 * T ** 2) == "Q^2*T^2 - Q + 1"
    assert str(LaurentPoly.zero()) == "0"


def test_geometric_series():
    series = rf_to_series(FactoredRational(ONE, [(1, 0)]), 4)
    assert series.coeffs == (ONE,) * 5


def test_nodal_series():
    series = rf_to_series(NODAL, 5)
    expected = ["1", "1", "1 + T^2", "1 + 2*T^2", "1 + 3*T^2", "1 + 4*T^2"]
    assert list(series.coeffs) == [expr(text) for text in expected]


def test_plane_product_q4_coefficient():
    three = FactoredRational(ONE, [(1, 0), (2, 2), (3, 4)])
    four = FactoredRational(ONE, [(1, 0), (2, 2), (3, 4), (4, 6)])
    assert rf_to_series(three, 4).coefficient(4) == expr("1 + T^2 + 2*T^4")
    assert rf_to_series(four, 4).coefficient(4) == expr("1 + T^2 + 2*T^4 + T^6")


def test_zero_alpha_factor_rejected():
    with pytest.raises(SeriesDomainError):
        FactoredRational(ONE, [(0, 1)])


def test_factor_times_its_expansion_is_one():
    for alpha, beta in [(1, 0), (2, 3), (3, -1)]:
        factor = QSeries.from_poly(ONE - mono(q=alpha, t=beta), 12)
        expansion = rf_to_series(FactoredRational(ONE, [(alpha, beta)]), 12)
        assert factor * expansion == QSeries.from_poly(ONE, 12)


@settings(max_examples=40, deadline=None)
@given(rationals, rationals)
def test_expansion_is_multiplicative(r1, r2):
    assert rf_to_series(r1 * r2, 6) == rf_to_series(r1, 6) * rf_to_series(r2, 6)


def test_sum_over_common_denominator():
    total = FactoredRational(ONE, [(1, 0)]) + FactoredRational(Q ** 2 * T ** 2, [(1, 0), (1, 0)])
    assert total == NODAL


def test_equals_rational_ignores_common_factors():
    padded = FactoredRational(NODAL.numerator * (ONE - mono(q=2, t=2)), [(1, 0), (1, 0), (2, 2)])
    assert padded.equals_rational(NODAL)
    assert not NODAL.equals_rational(FactoredRational(ONE, [(1, 0)]))


def test_shift_factor():
    r = FactoredRational(ONE, [(1, 0), (2, 2)])
    assert r.shift_factor(1, d_beta=1).denominator == ((1, 0), (2, 3))
    assert r.shift_factor(0, d_alpha=2).denominator == ((2, 2), (3, 0))


def test_substitution_on_factors_and_monomials():
    for i in (1, 2, 3):
        image = rf_substitute_T(FactoredRational(ONE, [(1, 1 - i)]))
        assert image.denominator == ((i, 2 * (i - 1)),)
    for v in (1, 2, 5):
        image = rf_substitute_T(FactoredRational(mono(q=1, t=-v)))
        assert image.numerator == mono(q=v + 1, t=2 * v)


def test_substitution_domain_errors():
    with pytest.raises(SubstitutionError):
        rf_substitute_T(FactoredRational(ONE, [(1, 1)]))
    with pytest.raises(SubstitutionError):
        rf_substitute_T(FactoredRational(mono(q=1, t=2)))
    with pytest.raises(SubstitutionError):
        qs_substitute_T(QSeries.from_poly(T, 3))


def test_substitution_commutes_with_expansion():
    r = FactoredRational(ONE - Q + mono(q=1, t=-2), [(1, 0), (1, 0), (1, -1)])
    assert rf_to_series(rf_substitute_T(r), 10) == qs_substitute_T(rf_to_series(r, 10))


def test_specialize():
    for m in (1, 2, 3):
        assert specialize((T ** 2 - 1) ** m, "T", 1).is_zero()
    assert specialize(Q ** 2 * T ** 2 - Q + 1, "T", 1) == expr("Q^2 - Q + 1")
    assert specialize(ONE + A + T, "a", 0) == ONE + T
    assert specialize(ONE + A * T, "T", 0) == ONE
    with pytest.raises(SeriesDomainError):
        specialize(T ** -1, "T", 0)
    with pytest.raises(SeriesDomainError):
        specialize(T, "Q", 1)


def test_plane_series_at_t_one_counts_partitions():
    plane = FactoredRational(ONE, [(i, 2 * (i - 1)) for i in range(1, 11)])
    counts = specialize(rf_to_series(plane, 10), "T", 1)
    assert [c.coefficient() for c in counts.coeffs] == [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]


def test_total_degree_truncation():
    truncated = total_degree_truncation(rf_to_series(NODAL, 4), 4)
    assert truncated == expr("1 + Q + Q^2 + Q^2*T^2 + Q^3 + Q^4")
    with pytest.raises(SeriesDomainError):
        total_degree_truncation(rf_to_series(NODAL, 4), 5)


def test_first_divergence_reports_both_sides():
    nodal = rf_to_series(NODAL, 6)
    line = rf_to_series(FactoredRational(ONE, [(1, 0)]), 6)
    degree, expected, actual = series_first_divergence(nodal, line)
    assert degree == 2
    assert expected == ONE + T ** 2
    assert actual == ONE
    assert series_first_divergence(nodal, nodal) is None


def test_series_payload_shape():
    payload = qs_to_payload(rf_to_series(NODAL, 2))
    assert payload.model_dump_json() == (
        '{"nmax":2,"coeffs":[[0,[[0,"1"]]],[1,[[0,"1"]]],[2,[[0,"1"],[2,"1"]]]]}'
    )
    assert qs_from_payload(payload) == rf_to_series(NODAL, 2)


def test_series_payload_carries_a_when_present():
    payload = qs_to_payload(QSeries(1, [ONE + A]))
    assert payload.model_dump_json() == '{"nmax":1,"coeffs":[[0,[[0,0,"1"],[0,1,"1"]]],[1,[]]]}'
    assert qs_from_payload(payload) == QSeries(1, [ONE + A])


def test_poly_payload_keeps_big_coefficients_exact():
    big = mono(q=3, t=-1, coeff=10 ** 40)
    payload = lp_to_payload(big + ONE)
    assert payload.terms == [(0, 0, 0, "1"), (3, -1, 0, str(10 ** 40))]
    assert lp_from_payload(payload) == big + ONE


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
